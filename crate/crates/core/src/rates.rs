//! Triplet generation rates for the waveguide and ring devices, field
//! enhancement, and scaling-law fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{
    self, mean_frequency, sinc, tau_ring, tau_sp_wg_analytic, tau_st_wg_analytic, vacuum_power,
    BandwidthResult, QuadratureSettings, RingBandwidth, SplineIncrement,
};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::phasematch::{
    self, hot_resonances, optimal_pump_detuning, pump_operating_point, self_consistent_pump,
    BandFrequencies, PumpState, RingSpec, WaveguideSpec,
};
use crate::units::{span_angular, span_cyclic};
use crate::{Band, Process};

/// Where the generation bandwidth comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandwidthSource {
    /// Ring closed form, or waveguide quadrature over the model ranges.
    #[default]
    Auto,
    /// τ⁻¹ in s⁻¹.
    Injected { tau_inv: f64 },
    /// Weak-dispersion limit; β₂ from the dispersion model when absent.
    Analytic { beta2: Option<f64> },
    /// Quadrature, optionally over a detection window (rad/s).
    Numeric { bounds: Option<(f64, f64)> },
}

/// How the ring pump laser is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PumpDetuning {
    /// Held at the detuning that balances energy on the hot resonances.
    #[default]
    Optimal,
    /// Fixed offset (rad/s) from the hot pump resonance.
    FromHot { detuning: f64 },
    /// Fixed laser frequency (rad/s); the pump state is solved self-consistently.
    Laser { omega: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessScenario {
    pub process: Process,
    /// W
    pub pump_power: f64,
    /// W; zero for spontaneous processes.
    pub seed_power: f64,
    /// Band centers (waveguide). Missing bands follow from energy
    /// conservation; the ring takes its resonances instead.
    pub omegas: BandFrequencies,
    pub bandwidth: BandwidthSource,
    /// Waveguide `Δk̄` override, rad/m.
    pub mismatch: Option<f64>,
    pub pump_detuning: PumpDetuning,
    /// Seed laser offset from its hot resonance, rad/s.
    pub seed_detuning: f64,
}

impl ProcessScenario {
    pub fn new(process: Process, pump_power: f64, seed_power: f64) -> Self {
        Self {
            process,
            pump_power,
            seed_power,
            omegas: BTreeMap::new(),
            bandwidth: BandwidthSource::Auto,
            mismatch: None,
            pump_detuning: PumpDetuning::Optimal,
            seed_detuning: 0.0,
        }
    }

    pub fn with_omega(mut self, band: Band, omega: f64) -> Self {
        self.omegas.insert(band, omega);
        self
    }

    pub fn with_bandwidth(mut self, source: BandwidthSource) -> Self {
        self.bandwidth = source;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.pump_power >= 0.0) {
            return bad(
                "pump power",
                format!("must be non-negative, got {}", self.pump_power),
            );
        }
        if !(self.seed_power >= 0.0) {
            return bad(
                "seed power",
                format!("must be non-negative, got {}", self.seed_power),
            );
        }
        match self.process {
            Process::SpDegenerate | Process::SpNonDegenerate if self.seed_power != 0.0 => bad(
                "seed power",
                format!("spontaneous process {} takes no seed", self.process),
            ),
            Process::Stimulated if self.seed_power == 0.0 => {
                bad("seed power", "the stimulated process needs a seed".into())
            }
            _ => Ok(()),
        }
    }
}

/// Straight waveguide or ring.
#[derive(Debug, Clone)]
pub enum Device {
    Waveguide(WaveguideSpec),
    Ring(RingSpec),
}

impl Device {
    pub fn kind(&self) -> &'static str {
        match self {
            Device::Waveguide(_) => "waveguide",
            Device::Ring(_) => "ring",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    /// Waveguide `Δk̄`, rad/m.
    pub mismatch: Option<f64>,
    /// `sinc²(Δk̄L/2)` of the doubly stimulated waveguide rate.
    pub phase_factor: Option<f64>,
    pub pump: Option<PumpState>,
    /// Process energy mismatch against the hot resonances, rad/s.
    pub energy_detuning: Option<f64>,
    /// Idler detuning of the doubly stimulated ring process, rad/s.
    pub idler_detuning: Option<f64>,
    /// The pump enhancement was taken on resonance (`|δω̃_P| < Γ_P/100`).
    pub pump_on_resonance: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub process: Process,
    pub device: String,
    /// Triplets (or generated photons) per second.
    pub rate: f64,
    /// `rate/R_P`.
    pub efficiency: f64,
    /// `R_P = P_P/ħω_P`, s⁻¹.
    pub pump_photon_rate: f64,
    /// |γ| used, (W·m)⁻¹.
    pub gamma: f64,
    pub bandwidth: Option<BandwidthResult>,
    /// W
    pub vacuum_power: Option<f64>,
    /// `|F_J|²` per band (ring).
    pub enhancement: BTreeMap<Band, f64>,
    pub omegas: BandFrequencies,
    pub diagnostics: Diagnostics,
    pub notes: Vec<String>,
}

impl RateResult {
    /// Flat key/value view for reports.
    pub fn report(&self, scenario: &ProcessScenario) -> serde_json::Value {
        serde_json::json!({
            "inputs": scenario,
            "device": self.device,
            "process": self.process,
            "rate_per_s": self.rate,
            "efficiency": self.efficiency,
            "pump_photon_rate_per_s": self.pump_photon_rate,
            "gamma_per_w_m": self.gamma,
            "bandwidth": self.bandwidth,
            "vacuum_power_w": self.vacuum_power,
            "enhancement": self.enhancement,
            "omegas_rad_per_s": self.omegas,
            "diagnostics": self.diagnostics,
            "notes": self.notes,
        })
    }
}

fn finish(
    process: Process,
    device: &str,
    efficiency: f64,
    scenario: &ProcessScenario,
    omega_pump: f64,
    gamma: f64,
) -> RateResult {
    let pump_photon_rate = scenario.pump_power / (HBAR * omega_pump);
    let mut notes = vec!["frequencies and bandwidths are angular (rad/s)".to_string()];
    if device == "ring" {
        notes.push("escape efficiencies and idler quality factor as configured; defaults are η = 0.5 and Q_idler = Q_fundamental".into());
    }
    RateResult {
        process,
        device: device.into(),
        rate: efficiency * pump_photon_rate,
        efficiency,
        pump_photon_rate,
        gamma,
        bandwidth: None,
        vacuum_power: None,
        enhancement: BTreeMap::new(),
        omegas: BTreeMap::new(),
        diagnostics: Diagnostics::default(),
        notes,
    }
}

/// Band centers for a waveguide process, filling missing ones from energy
/// conservation.
fn waveguide_omegas(process: Process, given: &BandFrequencies) -> Result<BandFrequencies> {
    let mut m = given.clone();
    let pump = *m.get(&Band::Pump).ok_or(Error::MissingBand(Band::Pump))?;
    match process {
        Process::SpDegenerate => {
            m.entry(Band::Fundamental).or_insert(pump / 3.0);
        }
        Process::SpNonDegenerate | Process::Stimulated => {
            match (m.get(&Band::Generated), m.get(&Band::Seed)) {
                (Some(_), Some(_)) => {}
                (Some(&g), None) => {
                    m.insert(Band::Seed, pump - 2.0 * g);
                }
                (None, Some(&s)) => {
                    m.insert(Band::Generated, 0.5 * (pump - s));
                }
                (None, None) => return Err(Error::MissingBand(Band::Seed)),
            }
        }
        Process::DoublyStimulated => match (m.get(&Band::Seed), m.get(&Band::Idler)) {
            (Some(_), Some(_)) => {}
            (Some(&s), None) => {
                m.insert(Band::Idler, pump - 2.0 * s);
            }
            (None, Some(&i)) => {
                m.insert(Band::Seed, 0.5 * (pump - i));
            }
            (None, None) => return Err(Error::MissingBand(Band::Seed)),
        },
    }
    m.retain(|b, _| *b == Band::Pump || process.bands().contains(b));
    Ok(m)
}

fn waveguide_mismatch(
    spec: &WaveguideSpec,
    scenario: &ProcessScenario,
    omegas: &BandFrequencies,
) -> Result<f64> {
    if let Some(m) = scenario.mismatch {
        return Ok(m);
    }
    let k = phasematch::shifted_wavenumbers_wg(spec, scenario.pump_power, omegas, None)?;
    phasematch::mismatch(scenario.process, &k)
}

fn waveguide_bandwidth(
    spec: &WaveguideSpec,
    scenario: &ProcessScenario,
    omegas: &BandFrequencies,
    band: Band,
) -> Result<BandwidthResult> {
    let center = omegas[&band];
    let spontaneous = scenario.process == Process::SpDegenerate;
    match scenario.bandwidth {
        BandwidthSource::Injected { tau_inv } => {
            if !(tau_inv >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "tau_inv",
                    reason: format!("{tau_inv}"),
                });
            }
            Ok(BandwidthResult::injected(tau_inv))
        }
        BandwidthSource::Analytic { beta2 } => {
            let beta2 = match beta2 {
                Some(b) => b,
                None => spec.model(band)?.group_quantities(center)?.beta2,
            };
            let tau = if spontaneous {
                tau_sp_wg_analytic(beta2, spec.length)?
            } else {
                tau_st_wg_analytic(beta2, spec.length)?
            };
            Ok(BandwidthResult {
                tau_inv: tau,
                tau_inv_sq: spontaneous.then_some(tau * tau),
                method: bandwidth::BandwidthMethod::Analytic,
                diagnostics: None,
            })
        }
        BandwidthSource::Auto | BandwidthSource::Numeric { .. } => {
            let bounds = match scenario.bandwidth {
                BandwidthSource::Numeric { bounds: Some(b) } => b,
                _ => spec.model(band)?.valid_range(),
            };
            let mismatch = waveguide_mismatch(spec, scenario, omegas)?;
            let model = spec.model(band)?;
            let settings = QuadratureSettings::default();
            if spontaneous {
                let inc =
                    SplineIncrement::new(model, center, (bounds.0 - center, bounds.1 - center))?;
                bandwidth::tau_sp_numeric(
                    &inc,
                    omegas[&Band::Pump],
                    mismatch,
                    spec.length,
                    bounds,
                    settings,
                )
            } else {
                let half = (bounds.1 - center).min(center - bounds.0).max(0.0);
                let inc = SplineIncrement::new(model, center, (-half, half))?;
                bandwidth::tau_st_numeric(&inc, center, mismatch, spec.length, bounds, settings)
            }
        }
    }
}

/// Degenerate spontaneous waveguide rate, `(|γ|L)² P_vac² R_P`.
pub fn rate_sp_wg(spec: &WaveguideSpec, scenario: &ProcessScenario) -> Result<RateResult> {
    spec.validate()?;
    scenario.validate()?;
    match scenario.process {
        Process::SpDegenerate => {}
        Process::SpNonDegenerate => {
            return Err(Error::Unsupported(
                "the non-degenerate spontaneous rate has a closed form only in the ring".into(),
            ))
        }
        p => return Err(Error::Unsupported(format!("rate_sp_wg called with {p}"))),
    }
    let omegas = waveguide_omegas(scenario.process, &scenario.omegas)?;
    let gamma = spec.gamma.triplet(scenario.process)?;
    let bw = waveguide_bandwidth(spec, scenario, &omegas, Band::Fundamental)?;
    let p_vac = vacuum_power(omegas[&Band::Fundamental], bw.tau_inv);
    let efficiency = (gamma * spec.length).powi(2) * p_vac * p_vac;
    let mut r = finish(
        scenario.process,
        "waveguide",
        efficiency,
        scenario,
        omegas[&Band::Pump],
        gamma,
    );
    r.bandwidth = Some(bw);
    r.vacuum_power = Some(p_vac);
    r.omegas = omegas;
    Ok(r)
}

/// Stimulated waveguide rate, `(|γ|L)² P_S P_vac R_P`.
pub fn rate_st_wg(spec: &WaveguideSpec, scenario: &ProcessScenario) -> Result<RateResult> {
    spec.validate()?;
    scenario.validate()?;
    if scenario.process != Process::Stimulated {
        return Err(Error::Unsupported(format!(
            "rate_st_wg called with {}",
            scenario.process
        )));
    }
    let omegas = waveguide_omegas(scenario.process, &scenario.omegas)?;
    let gamma = spec.gamma.triplet(scenario.process)?;
    let bw = waveguide_bandwidth(spec, scenario, &omegas, Band::Generated)?;
    let p_vac = vacuum_power(omegas[&Band::Generated], bw.tau_inv);
    let efficiency = (gamma * spec.length).powi(2) * scenario.seed_power * p_vac;
    let mut r = finish(
        scenario.process,
        "waveguide",
        efficiency,
        scenario,
        omegas[&Band::Pump],
        gamma,
    );
    r.bandwidth = Some(bw);
    r.vacuum_power = Some(p_vac);
    r.omegas = omegas;
    Ok(r)
}

/// Doubly stimulated waveguide rate, `(1/2π)(|γ|L P_S)² sinc²(Δk̄L/2) R_P`.
pub fn rate_dst_wg(spec: &WaveguideSpec, scenario: &ProcessScenario) -> Result<RateResult> {
    spec.validate()?;
    scenario.validate()?;
    if scenario.process != Process::DoublyStimulated {
        return Err(Error::Unsupported(format!(
            "rate_dst_wg called with {}",
            scenario.process
        )));
    }
    let omegas = waveguide_omegas(scenario.process, &scenario.omegas)?;
    let gamma = spec.gamma.triplet(scenario.process)?;
    let mut notes = Vec::new();
    let mismatch = match waveguide_mismatch(spec, scenario, &omegas) {
        Ok(m) => m,
        Err(Error::MissingBand(_)) if spec.bands.is_empty() => {
            notes.push("no dispersion data: the process is taken as phase matched".to_string());
            0.0
        }
        Err(e) => return Err(e),
    };
    let phase = sinc(mismatch * spec.length / 2.0).powi(2);
    let efficiency = (gamma * spec.length * scenario.seed_power).powi(2) * phase / (2.0 * PI);
    let mut r = finish(
        scenario.process,
        "waveguide",
        efficiency,
        scenario,
        omegas[&Band::Pump],
        gamma,
    );
    r.omegas = omegas;
    r.diagnostics.mismatch = Some(mismatch);
    r.diagnostics.phase_factor = Some(phase);
    r.notes.extend(notes);
    Ok(r)
}

/// `|F_J|²` at detuning `δ` from the (hot) resonance.
pub fn field_enhancement(ring: &RingSpec, band: Band, detuning: f64) -> Result<f64> {
    let r = ring.resonance(band)?;
    if !(r.linewidth() > 0.0) {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("{band}: linewidth must be positive"),
        });
    }
    Ok(r.enhancement(ring.circumference, detuning))
}

struct RingPump {
    state: PumpState,
    enhancement: f64,
    on_resonance: bool,
}

fn ring_pump(ring: &RingSpec, scenario: &ProcessScenario) -> Result<RingPump> {
    let process = scenario.process;
    let state = match scenario.pump_detuning {
        PumpDetuning::Optimal => {
            let mut s = pump_operating_point(ring, process, scenario.pump_power)?;
            if scenario.seed_detuning != 0.0 {
                // Re-center with the seed laser off its resonance.
                let shift = match process {
                    Process::Stimulated => scenario.seed_detuning,
                    Process::DoublyStimulated => 2.0 * scenario.seed_detuning,
                    _ => 0.0,
                };
                let pump = ring.resonance(Band::Pump)?;
                let mut circulating = s.circulating;
                for _ in 0..100 {
                    let hot = hot_resonances(ring, circulating);
                    let d = optimal_pump_detuning(process, &hot)? + shift;
                    let next = scenario.pump_power * pump.enhancement(ring.circumference, d);
                    let done = (next - circulating).abs() <= 1e-14 * next.max(f64::MIN_POSITIVE);
                    circulating = next;
                    s.detuning = d;
                    if done {
                        break;
                    }
                }
                s.hot = hot_resonances(ring, circulating);
                s.circulating = circulating;
                s.laser_omega = s.hot[&Band::Pump] + s.detuning;
            }
            s
        }
        PumpDetuning::FromHot { detuning } => {
            let circulating =
                phasematch::circulating_power(ring, Band::Pump, scenario.pump_power, detuning)?;
            let hot = hot_resonances(ring, circulating);
            PumpState {
                power: scenario.pump_power,
                circulating,
                detuning,
                laser_omega: hot[&Band::Pump] + detuning,
                hot,
                iterations: 0,
                multistable: false,
            }
        }
        PumpDetuning::Laser { omega } => self_consistent_pump(ring, scenario.pump_power, omega)?,
    };
    let linewidth = ring.resonance(Band::Pump)?.linewidth();
    let on_resonance = state.detuning.abs() < linewidth / 100.0;
    let enhancement = field_enhancement(
        ring,
        Band::Pump,
        if on_resonance { 0.0 } else { state.detuning },
    )?;
    Ok(RingPump {
        state,
        enhancement,
        on_resonance,
    })
}

fn ring_common(
    ring: &RingSpec,
    scenario: &ProcessScenario,
    expected: Process,
) -> Result<(RingPump, f64)> {
    ring.validate()?;
    scenario.validate()?;
    if scenario.process != expected {
        return Err(Error::Unsupported(format!(
            "expected {expected}, got {}",
            scenario.process
        )));
    }
    for band in expected.bands().iter().chain([&Band::Pump]) {
        ring.resonance(*band)?;
    }
    let gamma = ring.gamma.triplet(expected)?;
    Ok((ring_pump(ring, scenario)?, gamma))
}

fn ring_result(
    ring: &RingSpec,
    scenario: &ProcessScenario,
    pump: RingPump,
    gamma: f64,
    efficiency: f64,
    enhancement: BTreeMap<Band, f64>,
) -> RateResult {
    let omegas: BandFrequencies = ring.resonances.iter().map(|(b, r)| (*b, r.omega)).collect();
    let mut r = finish(
        scenario.process,
        "ring",
        efficiency,
        scenario,
        omegas[&Band::Pump],
        gamma,
    );
    r.enhancement = enhancement;
    r.enhancement.insert(Band::Pump, pump.enhancement);
    r.omegas = omegas;
    r.diagnostics.pump_on_resonance = Some(pump.on_resonance);
    r.diagnostics.pump = Some(pump.state);
    r
}

/// Degenerate spontaneous ring rate, `(|γ|𝓛)² P_vac² |F_F|⁶ |F_P|² R_P`.
pub fn rate_sp_ring_degenerate(ring: &RingSpec, scenario: &ProcessScenario) -> Result<RateResult> {
    let (pump, gamma) = ring_common(ring, scenario, Process::SpDegenerate)?;
    let f = ring.resonance(Band::Fundamental)?;
    let hot = &pump.state.hot;
    let delta = pump.state.laser_omega - 3.0 * hot[&Band::Fundamental];
    let bw = match scenario.bandwidth {
        BandwidthSource::Injected { tau_inv } => BandwidthResult::injected(tau_inv),
        _ => tau_ring(
            RingBandwidth::Degenerate {
                fundamental: f.linewidth(),
            },
            delta,
        )?,
    };
    let p_vac = vacuum_power(f.omega, bw.tau_inv);
    let ff = field_enhancement(ring, Band::Fundamental, 0.0)?;
    let efficiency =
        (gamma * ring.circumference).powi(2) * p_vac * p_vac * ff.powi(3) * pump.enhancement;
    let mut r = ring_result(
        ring,
        scenario,
        pump,
        gamma,
        efficiency,
        [(Band::Fundamental, ff)].into(),
    );
    r.bandwidth = Some(bw);
    r.vacuum_power = Some(p_vac);
    r.diagnostics.energy_detuning = Some(delta);
    Ok(r)
}

/// Non-degenerate spontaneous ring rate,
/// `(|γ|𝓛)² P_vac² |F_G|⁴ |F_S|² |F_P|² R_P`.
pub fn rate_sp_ring_nondegenerate(
    ring: &RingSpec,
    scenario: &ProcessScenario,
) -> Result<RateResult> {
    let (pump, gamma) = ring_common(ring, scenario, Process::SpNonDegenerate)?;
    let g = ring.resonance(Band::Generated)?;
    let s = ring.resonance(Band::Seed)?;
    let hot = &pump.state.hot;
    let delta = pump.state.laser_omega - 2.0 * hot[&Band::Generated] - hot[&Band::Seed];
    let bw = match scenario.bandwidth {
        BandwidthSource::Injected { tau_inv } => BandwidthResult::injected(tau_inv),
        _ => tau_ring(
            RingBandwidth::NonDegenerate {
                generated: g.linewidth(),
                seed: s.linewidth(),
            },
            delta,
        )?,
    };
    let p_vac = vacuum_power(mean_frequency([g.omega, g.omega, s.omega]), bw.tau_inv);
    let fg = field_enhancement(ring, Band::Generated, 0.0)?;
    let fs = field_enhancement(ring, Band::Seed, 0.0)?;
    let efficiency =
        (gamma * ring.circumference).powi(2) * p_vac * p_vac * fg * fg * fs * pump.enhancement;
    let mut r = ring_result(
        ring,
        scenario,
        pump,
        gamma,
        efficiency,
        [(Band::Generated, fg), (Band::Seed, fs)].into(),
    );
    r.bandwidth = Some(bw);
    r.vacuum_power = Some(p_vac);
    r.diagnostics.energy_detuning = Some(delta);
    Ok(r)
}

/// Stimulated ring rate, `(|γ|𝓛)² P_S P_vac |F_G|⁴ |F_S|² |F_P|² R_P`.
pub fn rate_st_ring(ring: &RingSpec, scenario: &ProcessScenario) -> Result<RateResult> {
    let (pump, gamma) = ring_common(ring, scenario, Process::Stimulated)?;
    let g = ring.resonance(Band::Generated)?;
    let hot = &pump.state.hot;
    let seed_laser = hot[&Band::Seed] + scenario.seed_detuning;
    let delta = pump.state.laser_omega - seed_laser - 2.0 * hot[&Band::Generated];
    let bw = match scenario.bandwidth {
        BandwidthSource::Injected { tau_inv } => BandwidthResult::injected(tau_inv),
        _ => tau_ring(
            RingBandwidth::Stimulated {
                generated: g.linewidth(),
            },
            delta,
        )?,
    };
    let p_vac = vacuum_power(g.omega, bw.tau_inv);
    let fg = field_enhancement(ring, Band::Generated, 0.0)?;
    let fs = field_enhancement(ring, Band::Seed, scenario.seed_detuning)?;
    let efficiency = (gamma * ring.circumference).powi(2)
        * scenario.seed_power
        * p_vac
        * fg
        * fg
        * fs
        * pump.enhancement;
    let mut r = ring_result(
        ring,
        scenario,
        pump,
        gamma,
        efficiency,
        [(Band::Generated, fg), (Band::Seed, fs)].into(),
    );
    r.bandwidth = Some(bw);
    r.vacuum_power = Some(p_vac);
    r.diagnostics.energy_detuning = Some(delta);
    Ok(r)
}

/// Doubly stimulated ring rate,
/// `(|γ|𝓛)² P_S² |F_S|⁴ |F_P|² |F_I(δ_I)|² R_P` with
/// `δ_I = (ω̃_P + δω̃_P) − 2(ω̃_S + δω̃_S) − ω̃_I`.
pub fn rate_dst_ring(ring: &RingSpec, scenario: &ProcessScenario) -> Result<RateResult> {
    let (pump, gamma) = ring_common(ring, scenario, Process::DoublyStimulated)?;
    let hot = &pump.state.hot;
    let idler_detuning = pump.state.laser_omega
        - 2.0 * (hot[&Band::Seed] + scenario.seed_detuning)
        - hot[&Band::Idler];
    let fs = field_enhancement(ring, Band::Seed, scenario.seed_detuning)?;
    let fi = field_enhancement(ring, Band::Idler, idler_detuning)?;
    let efficiency = (gamma * ring.circumference * scenario.seed_power).powi(2)
        * fs
        * fs
        * fi
        * pump.enhancement;
    let mut r = ring_result(
        ring,
        scenario,
        pump,
        gamma,
        efficiency,
        [(Band::Seed, fs), (Band::Idler, fi)].into(),
    );
    r.diagnostics.idler_detuning = Some(idler_detuning);
    Ok(r)
}

/// Dispatch on device and process.
pub fn evaluate(device: &Device, scenario: &ProcessScenario) -> Result<RateResult> {
    match (device, scenario.process) {
        (Device::Waveguide(w), Process::SpDegenerate | Process::SpNonDegenerate) => {
            rate_sp_wg(w, scenario)
        }
        (Device::Waveguide(w), Process::Stimulated) => rate_st_wg(w, scenario),
        (Device::Waveguide(w), Process::DoublyStimulated) => rate_dst_wg(w, scenario),
        (Device::Ring(r), Process::SpDegenerate) => rate_sp_ring_degenerate(r, scenario),
        (Device::Ring(r), Process::SpNonDegenerate) => rate_sp_ring_nondegenerate(r, scenario),
        (Device::Ring(r), Process::Stimulated) => rate_st_ring(r, scenario),
        (Device::Ring(r), Process::DoublyStimulated) => rate_dst_ring(r, scenario),
    }
}

/// Parameter varied in a scaling family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "band", rename_all = "snake_case")]
pub enum ScalingParameter {
    Length,
    Circumference,
    Quality(Band),
    PumpPower,
    SeedPower,
}

impl ScalingParameter {
    pub fn label(self) -> String {
        match self {
            ScalingParameter::Length => "length".into(),
            ScalingParameter::Circumference => "circumference".into(),
            ScalingParameter::Quality(b) => format!("q_{b}"),
            ScalingParameter::PumpPower => "pump_power".into(),
            ScalingParameter::SeedPower => "seed_power".into(),
        }
    }

    /// Copy of the device and scenario with this parameter set to `value`.
    pub fn apply(
        self,
        device: &Device,
        scenario: &ProcessScenario,
        value: f64,
    ) -> Result<(Device, ProcessScenario)> {
        let mut d = device.clone();
        let mut s = scenario.clone();
        match (self, &mut d) {
            (ScalingParameter::Length, Device::Waveguide(w)) => w.length = value,
            (ScalingParameter::Circumference, Device::Ring(r)) => r.circumference = value,
            (ScalingParameter::Quality(band), Device::Ring(r)) => {
                r.resonances
                    .get_mut(&band)
                    .ok_or(Error::MissingBand(band))?
                    .q = value;
            }
            (ScalingParameter::PumpPower, _) => s.pump_power = value,
            (ScalingParameter::SeedPower, _) => s.seed_power = value,
            (p, d) => {
                return Err(Error::Unsupported(format!(
                    "parameter {} does not apply to a {}",
                    p.label(),
                    d.kind()
                )))
            }
        }
        Ok((d, s))
    }
}

/// Evaluate a family over `grid`, in parallel, preserving order.
pub fn scaling_family(
    device: &Device,
    scenario: &ProcessScenario,
    parameter: ScalingParameter,
    grid: &[f64],
) -> Result<Vec<(f64, RateResult)>> {
    grid.par_iter()
        .map(|&v| {
            let (d, s) = parameter.apply(device, scenario, v)?;
            Ok((v, evaluate(&d, &s)?))
        })
        .collect()
}

/// Least-squares slope of `log rate` against `log parameter`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("need at least 5 points, got {}", points.len()),
        });
    }
    for &(x, y) in points {
        if !(y > 0.0) {
            return Err(Error::NonPositiveRate(y));
        }
        if !(x > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("non-positive parameter {x}"),
            });
        }
    }
    let (min, max) = points.iter().fold((f64::INFINITY, 0.0f64), |(a, b), p| {
        (a.min(p.0), b.max(p.0))
    });
    if max / min < 10.0 * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "must span at least one decade".into(),
        });
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Fitted exponent of the rate with respect to `parameter` over `grid`.
pub fn scaling_exponents(
    device: &Device,
    scenario: &ProcessScenario,
    parameter: ScalingParameter,
    grid: &[f64],
) -> Result<f64> {
    let family = scaling_family(device, scenario, parameter, grid)?;
    let points: Vec<(f64, f64)> = family.iter().map(|(v, r)| (*v, r.rate)).collect();
    fit_exponent(&points)
}

/// Logarithmic grid of `points` values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Wavelength span of a bandwidth under both readings of τ⁻¹: as a cyclic
/// frequency and as an angular one. Returns `(cyclic, angular)` in meters.
pub fn wavelength_spans(lambda: f64, tau_inv: f64) -> (f64, f64) {
    (span_cyclic(lambda, tau_inv), span_angular(lambda, tau_inv))
}
