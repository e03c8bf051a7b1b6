//! Phase mismatch with self- and cross-phase modulation, phase-matched
//! wavelength search, ring resonance shifts, pump buildup and the pump
//! detuning that re-centers a process on its hot resonances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::modeoverlap::NonlinearParameterSet;
use crate::units::wavelength_from_omega;
use crate::{Band, Process};

/// Default residual for phase-matched points, rad/m.
pub const MISMATCH_TOLERANCE: f64 = 1e-3;

/// Frequencies (rad/s) per band.
pub type BandFrequencies = BTreeMap<Band, f64>;

/// Straight waveguide of length `L`.
#[derive(Debug, Clone)]
pub struct WaveguideSpec {
    /// m
    pub length: f64,
    /// Dispersion per band. Generated, seed and idler fall back to the
    /// fundamental band's model when they have none of their own.
    pub bands: BTreeMap<Band, DispersionModel>,
    pub gamma: NonlinearParameterSet,
}

impl WaveguideSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("must be positive, got {}", self.length),
            });
        }
        Ok(())
    }

    pub fn model(&self, band: Band) -> Result<&DispersionModel> {
        model_for(&self.bands, band)
    }
}

pub(crate) fn model_for(
    bands: &BTreeMap<Band, DispersionModel>,
    band: Band,
) -> Result<&DispersionModel> {
    bands
        .get(&band)
        .or_else(|| match band {
            Band::Pump | Band::Fundamental => None,
            _ => bands.get(&Band::Fundamental),
        })
        .ok_or(Error::MissingBand(band))
}

/// One ring resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    /// Cold resonance frequency, rad/s.
    pub omega: f64,
    /// Resonance wavenumber, rad/m.
    pub kappa: f64,
    /// Loaded quality factor.
    pub q: f64,
    /// Escape efficiency, 0.5 at critical coupling.
    pub eta: f64,
    /// m/s
    pub group_velocity: f64,
}

impl Resonance {
    /// Loaded half-linewidth `ω/2Q`.
    pub fn linewidth(&self) -> f64 {
        self.omega / (2.0 * self.q)
    }

    /// Lorentzian intensity enhancement `|F|² = (2vηΓ/𝓛)/(δ² + Γ²)`.
    pub fn enhancement(&self, circumference: f64, detuning: f64) -> f64 {
        let g = self.linewidth();
        2.0 * self.group_velocity * self.eta * g / circumference / (detuning * detuning + g * g)
    }

    fn validate(&self, band: Band) -> Result<()> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "resonance",
            reason: format!("{band}: {reason}"),
        };
        if !(self.omega > 0.0 && self.q > 0.0 && self.group_velocity > 0.0) {
            return Err(bad(
                "frequency, Q and group velocity must be positive".into()
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(bad(format!(
                "escape efficiency {} is outside [0, 1]",
                self.eta
            )));
        }
        Ok(())
    }
}

/// Microring of circumference `𝓛`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    /// m
    pub circumference: f64,
    pub resonances: BTreeMap<Band, Resonance>,
    pub gamma: NonlinearParameterSet,
}

impl RingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.circumference > 0.0) {
            return Err(Error::InvalidParameter {
                name: "circumference",
                reason: format!("must be positive, got {}", self.circumference),
            });
        }
        for (band, r) in &self.resonances {
            r.validate(*band)?;
        }
        Ok(())
    }

    pub fn resonance(&self, band: Band) -> Result<&Resonance> {
        self.resonances.get(&band).ok_or(Error::MissingBand(band))
    }
}

/// A strong seed treated like a second pump when shifting wavenumbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongSeed {
    /// W
    pub power: f64,
    /// Self-phase modulation of the seed band, (W·m)⁻¹.
    pub spm: f64,
    /// Cross-phase modulation the seed imposes on every other band, (W·m)⁻¹.
    pub xpm: f64,
}

/// `k̄` per band: `k + γ_SPM P_P` on the pump, `k + 2γ_XPM P_P` elsewhere.
pub fn shifted_wavenumbers_wg(
    spec: &WaveguideSpec,
    pump_power: f64,
    omegas: &BandFrequencies,
    seed: Option<StrongSeed>,
) -> Result<BandFrequencies> {
    if !(pump_power >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "pump power",
            reason: format!("must be non-negative, got {pump_power}"),
        });
    }
    let mut out = BTreeMap::new();
    for (&band, &omega) in omegas {
        let k = spec.model(band)?.wavenumber(omega)?;
        let mut shift = match band {
            Band::Pump => spec.gamma.spm() * pump_power,
            _ => 2.0 * spec.gamma.xpm(band) * pump_power,
        };
        if let Some(s) = seed {
            shift += if band == Band::Seed {
                s.spm * s.power
            } else {
                2.0 * s.xpm * s.power
            };
        }
        out.insert(band, k + shift);
    }
    Ok(out)
}

/// Signed mismatch at band centers: `k̄_P − 3k̄_F`, `k̄_P − k̄_S − 2k̄_G`
/// or `k̄_P − 2k̄_S − k̄_I`.
pub fn mismatch(process: Process, k: &BandFrequencies) -> Result<f64> {
    let get = |b: Band| k.get(&b).copied().ok_or(Error::MissingBand(b));
    let pump = get(Band::Pump)?;
    Ok(match process {
        Process::SpDegenerate => pump - 3.0 * get(Band::Fundamental)?,
        Process::SpNonDegenerate | Process::Stimulated => {
            pump - get(Band::Seed)? - 2.0 * get(Band::Generated)?
        }
        Process::DoublyStimulated => pump - 2.0 * get(Band::Seed)? - get(Band::Idler)?,
    })
}

/// Mismatch for explicit component wavenumbers, `k_P − k₁ − k₂ − k₃`.
pub fn mismatch_components(pump: f64, components: [f64; 3]) -> f64 {
    pump - components.iter().sum::<f64>()
}

/// Energy-conservation constraint used by [`find_phase_matched`]; each
/// leaves one free frequency, searched over the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// Free `ω_F`, `ω_P = 3ω_F`.
    Degenerate,
    /// Fixed `ω_G − ω_S` (rad/s), free `ω_P`; `ω_G = (ω_P + Δ)/3`, `ω_S = (ω_P − 2Δ)/3`.
    Separation { separation: f64 },
    /// Fixed `ω_P`, free idler `ω_I`; `ω_S = (ω_P − ω_I)/2`.
    FixedPump { omega_pump: f64 },
}

impl Constraint {
    fn frequencies(self, process: Process, free: f64) -> Result<BandFrequencies> {
        let mut m = BTreeMap::new();
        match (self, process) {
            (Constraint::Degenerate, Process::SpDegenerate) => {
                m.insert(Band::Fundamental, free);
                m.insert(Band::Pump, 3.0 * free);
            }
            (
                Constraint::Separation { separation },
                Process::SpNonDegenerate | Process::Stimulated,
            ) => {
                m.insert(Band::Pump, free);
                m.insert(Band::Generated, (free + separation) / 3.0);
                m.insert(Band::Seed, (free - 2.0 * separation) / 3.0);
            }
            (Constraint::FixedPump { omega_pump }, Process::DoublyStimulated) => {
                m.insert(Band::Pump, omega_pump);
                m.insert(Band::Idler, free);
                m.insert(Band::Seed, 0.5 * (omega_pump - free));
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "constraint {self:?} does not apply to process {process}"
                )))
            }
        }
        Ok(m)
    }
}

/// Result of a phase-matching search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatch {
    pub omegas: BandFrequencies,
    /// m
    pub wavelengths: BTreeMap<Band, f64>,
    /// Residual linear mismatch, rad/m.
    pub mismatch: f64,
    /// True when the mismatch changes sign in the bracket.
    pub is_root: bool,
    /// True when every energy-conserving point is matched (dispersionless bands).
    pub degenerate: bool,
}

/// Linear phase matching (no pump shifts) under an energy-conservation
/// constraint. Returns a root if the mismatch changes sign in `[lo, hi]`,
/// otherwise an interior minimum of `|Δk|`.
pub fn find_phase_matched(
    bands: &BTreeMap<Band, DispersionModel>,
    process: Process,
    constraint: Constraint,
    bracket: (f64, f64),
) -> Result<PhaseMatch> {
    let (lo, hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let no_match = Error::NoPhaseMatch { lo, hi };
    if !(lo > 0.0) || lo == hi {
        return Err(no_match);
    }
    let eval = |free: f64| -> Result<f64> {
        let omegas = constraint.frequencies(process, free)?;
        let mut k = BTreeMap::new();
        for (band, w) in &omegas {
            k.insert(*band, model_for(bands, *band)?.wavenumber(*w)?);
        }
        mismatch(process, &k)
    };
    let finish = |free: f64, is_root: bool, degenerate: bool| -> Result<PhaseMatch> {
        let omegas = constraint.frequencies(process, free)?;
        Ok(PhaseMatch {
            wavelengths: omegas
                .iter()
                .map(|(b, w)| (*b, wavelength_from_omega(*w)))
                .collect(),
            omegas,
            mismatch: eval(free)?,
            is_root,
            degenerate,
        })
    };

    const SCAN: usize = 256;
    let xs: Vec<f64> = (0..=SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| eval(x)).collect::<Result<_>>()?;

    // Scale for judging a mismatch identically zero: the pump wavenumber.
    let scale = {
        let omegas = constraint.frequencies(process, 0.5 * (lo + hi))?;
        model_for(bands, Band::Pump)?
            .wavenumber(omegas[&Band::Pump])?
            .abs()
    };
    if fs.iter().all(|f| f.abs() <= 1e-12 * scale) {
        return finish(0.5 * (lo + hi), true, true);
    }

    for i in 0..SCAN {
        if fs[i] == 0.0 {
            return finish(xs[i], true, false);
        }
        if fs[i].signum() != fs[i + 1].signum() {
            let x = bracketed_root(&eval, xs[i], xs[i + 1], fs[i], fs[i + 1])?;
            return finish(x, true, false);
        }
    }

    let best = (0..=SCAN)
        .min_by(|&a, &b| fs[a].abs().total_cmp(&fs[b].abs()))
        .unwrap_or(0);
    if best == 0 || best == SCAN {
        return Err(no_match);
    }
    let x = golden_minimum(|x| eval(x).map(f64::abs), xs[best - 1], xs[best + 1])?;
    finish(x, false, false)
}

/// Bisection with secant (Illinois) steps, converged to 1e-15 relative in
/// the abscissa.
pub(crate) fn bracketed_root(
    f: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()) {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Golden-section search for a minimum on `[a, b]`.
pub(crate) fn golden_minimum(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > 1e-15 * a.abs().max(b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Intracavity power `P' = P·|F|²(δ)` for channel power `P`.
pub fn circulating_power(ring: &RingSpec, band: Band, power: f64, detuning: f64) -> Result<f64> {
    let r = ring.resonance(band)?;
    Ok(power * r.enhancement(ring.circumference, detuning))
}

/// Hot resonances at circulating pump power `P'`: `ω_P − γ_SPM v_P P'` for
/// the pump and `ω_J − 2γ_XPM v_J P'` for every other band.
pub fn hot_resonances(ring: &RingSpec, circulating: f64) -> BandFrequencies {
    ring.resonances
        .iter()
        .map(|(&band, r)| {
            let shift = match band {
                Band::Pump => ring.gamma.spm() * r.group_velocity * circulating,
                _ => 2.0 * ring.gamma.xpm(band) * r.group_velocity * circulating,
            };
            (band, r.omega - shift)
        })
        .collect()
}

/// Hot resonance wavenumbers, `K_P − γ_SPM P'` and `K_J − 2γ_XPM P'`.
pub fn hot_wavenumbers(ring: &RingSpec, circulating: f64) -> BandFrequencies {
    ring.resonances
        .iter()
        .map(|(&band, r)| {
            let shift = match band {
                Band::Pump => ring.gamma.spm() * circulating,
                _ => 2.0 * ring.gamma.xpm(band) * circulating,
            };
            (band, r.kappa - shift)
        })
        .collect()
}

/// Steady pump inside a ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpState {
    /// Channel power, W.
    pub power: f64,
    /// Circulating power, W.
    pub circulating: f64,
    /// Laser frequency minus the hot pump resonance, rad/s.
    pub detuning: f64,
    /// rad/s
    pub laser_omega: f64,
    pub hot: BandFrequencies,
    pub iterations: usize,
    /// The steady-state cubic has three positive roots at this drive.
    pub multistable: bool,
}

const MAX_ITERATIONS: usize = 10_000;

/// Fixed point of `P' = P·|F_P|²(ω_laser − ω̃_P(P'))`, by damped iteration
/// whose damping adapts to the local slope of the map.
pub fn self_consistent_pump(ring: &RingSpec, power: f64, laser_omega: f64) -> Result<PumpState> {
    ring.validate()?;
    if !(power >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "pump power",
            reason: format!("must be non-negative, got {power}"),
        });
    }
    let pump = ring.resonance(Band::Pump)?;
    let shift_rate = ring.gamma.spm() * pump.group_velocity;
    let cold_detuning = laser_omega - pump.omega;
    let map = |p: f64| power * pump.enhancement(ring.circumference, cold_detuning + shift_rate * p);

    let multistable = {
        let g = pump.linewidth();
        let drive = power * 2.0 * pump.group_velocity * pump.eta * g / ring.circumference;
        cubic_has_three_positive_roots(
            shift_rate * shift_rate,
            2.0 * shift_rate * cold_detuning,
            cold_detuning * cold_detuning + g * g,
            -drive,
        )
    };

    let mut x = map(0.0);
    let mut prev: Option<(f64, f64)> = None;
    let mut history = Vec::with_capacity(128);
    let mut iterations = 0;
    let converged = loop {
        if iterations >= MAX_ITERATIONS {
            break false;
        }
        iterations += 1;
        let gx = map(x);
        // Damping from the secant slope of the map: α = 1/(1 − g').
        let alpha = match prev {
            Some((xp, gp)) if (x - xp).abs() > 0.0 => {
                let slope = (gx - gp) / (x - xp);
                (1.0 / (1.0 - slope)).clamp(0.01, 1.0)
            }
            _ => 0.5,
        };
        prev = Some((x, gx));
        let next = (1.0 - alpha) * x + alpha * gx;
        if history.len() == 128 {
            history.remove(0);
        }
        history.push(next);
        let done = (next - x).abs() <= 1e-12 * next.abs().max(f64::MIN_POSITIVE);
        x = next;
        if done || power == 0.0 {
            break true;
        }
    };
    if !converged {
        let low = history.iter().copied().fold(f64::INFINITY, f64::min);
        let high = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::Bistable {
            iterations,
            low,
            high,
        });
    }
    let hot = hot_resonances(ring, x);
    Ok(PumpState {
        power,
        circulating: x,
        detuning: laser_omega - hot[&Band::Pump],
        laser_omega,
        hot,
        iterations,
        multistable,
    })
}

/// Cubic `a x³ + b x² + c x + d` with `a > 0`, `d < 0`: three positive real
/// roots exactly when the discriminant is positive (the sign pattern already
/// rules out negative roots when `b < 0`).
fn cubic_has_three_positive_roots(a: f64, b: f64, c: f64, d: f64) -> bool {
    if a <= 0.0 || b >= 0.0 {
        return false;
    }
    let disc = 18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c
        - 4.0 * a * c.powi(3)
        - 27.0 * a * a * d * d;
    disc > 0.0
}

/// Pump detuning from its hot resonance that puts the process on exact
/// hot-resonance energy balance: `3ω̃_F − ω̃_P`, `2ω̃_G + ω̃_S − ω̃_P` or
/// `2ω̃_S + ω̃_I − ω̃_P`.
pub fn optimal_pump_detuning(process: Process, hot: &BandFrequencies) -> Result<f64> {
    let get = |b: Band| hot.get(&b).copied().ok_or(Error::MissingBand(b));
    let pump = get(Band::Pump)?;
    Ok(match process {
        Process::SpDegenerate => 3.0 * get(Band::Fundamental)? - pump,
        Process::SpNonDegenerate | Process::Stimulated => {
            2.0 * get(Band::Generated)? + get(Band::Seed)? - pump
        }
        Process::DoublyStimulated => 2.0 * get(Band::Seed)? + get(Band::Idler)? - pump,
    })
}

/// Pump state with the laser held at the optimal detuning from its own hot
/// resonance, iterated until the circulating power and the detuning agree.
pub fn pump_operating_point(ring: &RingSpec, process: Process, power: f64) -> Result<PumpState> {
    ring.validate()?;
    let pump = ring.resonance(Band::Pump)?;
    let mut circulating = circulating_power(ring, Band::Pump, power, 0.0)?;
    let mut detuning;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let hot = hot_resonances(ring, circulating);
        detuning = optimal_pump_detuning(process, &hot)?;
        let next = power * pump.enhancement(ring.circumference, detuning);
        let done = (next - circulating).abs() <= 1e-14 * next.abs().max(f64::MIN_POSITIVE);
        circulating = next;
        if done || power == 0.0 {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::Bistable {
                iterations,
                low: circulating.min(next),
                high: circulating.max(next),
            });
        }
    }
    let hot = hot_resonances(ring, circulating);
    Ok(PumpState {
        power,
        circulating,
        detuning,
        laser_omega: hot[&Band::Pump] + detuning,
        hot,
        iterations,
        multistable: false,
    })
}
