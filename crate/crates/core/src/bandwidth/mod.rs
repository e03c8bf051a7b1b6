//! Generation bandwidths: waveguide quadrature over finite frequency windows,
//! the weak-dispersion analytic limits, ring closed forms, and the vacuum
//! powers built from them.

mod montecarlo;
pub mod quadrature;

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

pub use montecarlo::{mc_oracle, McEstimate, McIntegrand};

use crate::constants::HBAR;
use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use quadrature::{integrate, phase_panels, Tolerance};

/// Relative error above which a numeric bandwidth is rejected.
pub const MAX_RELATIVE_ERROR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMethod {
    Numeric,
    Analytic,
    RingClosedForm,
    /// Supplied by the caller.
    Injected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDiagnostics {
    pub evaluations: usize,
    pub segments: usize,
    pub relative_error: f64,
    /// The requested tolerance was not reached (but the error is below
    /// [`MAX_RELATIVE_ERROR`]).
    pub flagged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthResult {
    /// s⁻¹
    pub tau_inv: f64,
    /// s⁻², for triplet-type bandwidths.
    pub tau_inv_sq: Option<f64>,
    pub method: BandwidthMethod,
    pub diagnostics: Option<QuadratureDiagnostics>,
}

impl BandwidthResult {
    pub fn injected(tau_inv: f64) -> Self {
        Self {
            tau_inv,
            tau_inv_sq: None,
            method: BandwidthMethod::Injected,
            diagnostics: None,
        }
    }

    fn squared(
        tau_inv_sq: f64,
        method: BandwidthMethod,
        diagnostics: Option<QuadratureDiagnostics>,
    ) -> Self {
        Self {
            tau_inv: tau_inv_sq.max(0.0).sqrt(),
            tau_inv_sq: Some(tau_inv_sq),
            method,
            diagnostics,
        }
    }

    fn linear(
        tau_inv: f64,
        method: BandwidthMethod,
        diagnostics: Option<QuadratureDiagnostics>,
    ) -> Self {
        Self {
            tau_inv,
            tau_inv_sq: None,
            method,
            diagnostics,
        }
    }
}

/// `sin(x)/x`, with the series below 1e-8.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Dispersion increment `Δ(δω) = k(ω_J + δω) − k(ω_J)` about a band center.
pub trait Increment: Sync {
    fn increment(&self, delta: f64) -> f64;
    /// Inverse group velocity at the center, s/m.
    fn slope(&self, delta: f64) -> f64;
}

/// Increments taken from the full interpolant.
#[derive(Debug, Clone, Copy)]
pub struct SplineIncrement<'a> {
    model: &'a DispersionModel,
    center: f64,
    k_center: f64,
}

impl<'a> SplineIncrement<'a> {
    /// Requires `[center + lo, center + hi]` inside the model's range.
    pub fn new(model: &'a DispersionModel, center: f64, span: (f64, f64)) -> Result<Self> {
        let k_center = model.wavenumber(center)?;
        model.wavenumber(center + span.0)?;
        model.wavenumber(center + span.1)?;
        Ok(Self {
            model,
            center,
            k_center,
        })
    }
}

impl Increment for SplineIncrement<'_> {
    fn increment(&self, delta: f64) -> f64 {
        let (lo, hi) = self.model.valid_range();
        let w = (self.center + delta).clamp(lo, hi);
        self.model
            .wavenumber(w)
            .map_or(f64::NAN, |k| k - self.k_center)
    }

    fn slope(&self, delta: f64) -> f64 {
        let (lo, hi) = self.model.valid_range();
        let w = (self.center + delta).clamp(lo, hi);
        self.model.derivatives(w).map_or(f64::NAN, |d| d[1])
    }
}

/// Truncated Taylor increment `δ/v + β₂δ²/2 + β₃δ³/6 + β₄δ⁴/24`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialIncrement {
    pub inverse_velocity: f64,
    pub beta: [f64; 3],
}

impl PolynomialIncrement {
    pub fn pure_beta2(inverse_velocity: f64, beta2: f64) -> Self {
        Self {
            inverse_velocity,
            beta: [beta2, 0.0, 0.0],
        }
    }
}

impl Increment for PolynomialIncrement {
    fn increment(&self, d: f64) -> f64 {
        let [b2, b3, b4] = self.beta;
        d * (self.inverse_velocity + d * (b2 / 2.0 + d * (b3 / 6.0 + d * b4 / 24.0)))
    }

    fn slope(&self, d: f64) -> f64 {
        let [b2, b3, b4] = self.beta;
        self.inverse_velocity + d * (b2 + d * (b3 / 2.0 + d * b4 / 6.0))
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "length",
            reason: format!("must be positive, got {length}"),
        })
    }
}

fn check_bounds(center: f64, bounds: (f64, f64)) -> Result<bool> {
    let (lo, hi) = bounds;
    if !(lo <= hi) || !(lo > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bounds",
            reason: format!("expected 0 < ω_min ≤ ω_max, got [{lo:.6e}, {hi:.6e}]"),
        });
    }
    if lo == hi {
        return Ok(false);
    }
    if !(center > lo && center < hi) {
        return Err(Error::InvalidParameter {
            name: "bounds",
            reason: format!("band center {center:.6e} rad/s lies outside [{lo:.6e}, {hi:.6e}]"),
        });
    }
    Ok(true)
}

fn diagnostics(
    value: f64,
    error: f64,
    evaluations: usize,
    segments: usize,
    requested: f64,
) -> Result<QuadratureDiagnostics> {
    let relative_error = if value != 0.0 {
        (error / value).abs()
    } else {
        error
    };
    if !(relative_error <= MAX_RELATIVE_ERROR) || !value.is_finite() {
        return Err(Error::QuadratureFailed {
            estimate: value,
            error,
        });
    }
    Ok(QuadratureDiagnostics {
        evaluations,
        segments,
        relative_error,
        flagged: relative_error > requested,
    })
}

/// Accuracy settings for the waveguide quadratures.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    pub outer_relative: f64,
    pub inner_relative: f64,
    /// Probes used to place panel boundaries along the sinc phase.
    pub phase_samples: usize,
    pub parallel: bool,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            outer_relative: 1e-6,
            inner_relative: 1e-8,
            phase_samples: 513,
            parallel: true,
        }
    }
}

/// Spontaneous degenerate bandwidth on a finite window, in the rotated
/// coordinates
/// `τ⁻² = (√3/18π²) ∬ dΩ₁dΩ₂ sinc²(Υ − [Δ(δω₁)+Δ(δω₂)+Δ(δω₃)]L/2)` with
/// `δω₁ = 2Ω₂/√6`, `δω₂,₃ = ∓Ω₁/√2 − Ω₂/√6` and `Υ = Δk̄ L/2`.
/// `omega_pump/3` is the fundamental center the increments refer to.
pub fn tau_sp_numeric(
    increment: &impl Increment,
    omega_pump: f64,
    mismatch: f64,
    length: f64,
    bounds: (f64, f64),
    settings: QuadratureSettings,
) -> Result<BandwidthResult> {
    check_length(length)?;
    let center = omega_pump / 3.0;
    if !check_bounds(center, bounds)? {
        return Ok(BandwidthResult::squared(
            0.0,
            BandwidthMethod::Numeric,
            None,
        ));
    }
    let (w_min, w_max) = bounds;
    let s6 = 6f64.sqrt();
    let upsilon = mismatch * length / 2.0;
    let phase = |o1: f64, o2: f64| {
        let d1 = 2.0 * o2 / s6;
        let d2 = -o1 / SQRT_2 - o2 / s6;
        let d3 = o1 / SQRT_2 - o2 / s6;
        upsilon
            - (increment.increment(d1) + increment.increment(d2) + increment.increment(d3)) * length
                / 2.0
    };
    let o1_limits = |o2: f64| {
        let a = w_max - center + o2 / s6;
        let b = w_min - center + o2 / s6;
        ((-SQRT_2 * a).max(SQRT_2 * b), (SQRT_2 * a).min(-SQRT_2 * b))
    };
    let inner = |o2: f64| -> f64 {
        let (lo, hi) = o1_limits(o2);
        if !(hi > lo) {
            return 0.0;
        }
        let bp = phase_panels(|o1| phase(o1, o2), lo, hi, settings.phase_samples, PI);
        let tol = Tolerance {
            relative: settings.inner_relative,
            parallel: false,
            ..Default::default()
        };
        integrate(&|o1: f64| sinc(phase(o1, o2)).powi(2), &bp, tol).value
    };
    let o2_lo = s6 / 2.0 * w_min - omega_pump / s6;
    let o2_hi = s6 / 2.0 * w_max - omega_pump / s6;
    let mut bp = phase_panels(
        |o2| phase(0.0, o2),
        o2_lo,
        o2_hi,
        settings.phase_samples,
        PI,
    );
    // The inner limits switch branches where −a = b.
    let kink = (s6 / 2.0) * (2.0 * center - w_max - w_min);
    if kink > o2_lo && kink < o2_hi {
        bp.push(kink);
        bp.sort_by(f64::total_cmp);
        bp.dedup();
    }
    let tol = Tolerance {
        relative: settings.outer_relative,
        parallel: settings.parallel,
        ..Default::default()
    };
    let r = integrate(&inner, &bp, tol);
    let prefactor = 3f64.sqrt() / (18.0 * PI * PI);
    let value = prefactor * r.value;
    let diag = diagnostics(
        r.value,
        r.error,
        r.evaluations,
        r.segments,
        settings.outer_relative * 10.0,
    )?;
    Ok(BandwidthResult::squared(
        value,
        BandwidthMethod::Numeric,
        Some(diag),
    ))
}

/// Stimulated bandwidth on a finite window,
/// `τ⁻¹ = (1/2π) ∫ dΩ sinc²(Υ − [Δ(Ω/2) + Δ(−Ω/2)]L/2)`, about the generated
/// band center `omega_generated`.
pub fn tau_st_numeric(
    increment: &impl Increment,
    omega_generated: f64,
    mismatch: f64,
    length: f64,
    bounds: (f64, f64),
    settings: QuadratureSettings,
) -> Result<BandwidthResult> {
    check_length(length)?;
    if !check_bounds(omega_generated, bounds)? {
        return Ok(BandwidthResult::linear(0.0, BandwidthMethod::Numeric, None));
    }
    let (w_min, w_max) = bounds;
    let g = omega_generated;
    let lo = (2.0 * (w_min - g)).max(-2.0 * (w_max - g));
    let hi = (2.0 * (w_max - g)).min(-2.0 * (w_min - g));
    let upsilon = mismatch * length / 2.0;
    let phase = |o: f64| {
        upsilon - (increment.increment(o / 2.0) + increment.increment(-o / 2.0)) * length / 2.0
    };
    let bp = phase_panels(phase, lo, hi, settings.phase_samples.max(4097), PI);
    let tol = Tolerance {
        relative: settings.inner_relative,
        parallel: settings.parallel,
        ..Default::default()
    };
    let r = integrate(&|o: f64| sinc(phase(o)).powi(2), &bp, tol);
    let value = r.value / (2.0 * PI);
    let diag = diagnostics(
        r.value,
        r.error,
        r.evaluations,
        r.segments,
        settings.inner_relative * 10.0,
    )?;
    Ok(BandwidthResult::linear(
        value,
        BandwidthMethod::Numeric,
        Some(diag),
    ))
}

/// Spontaneous waveguide bandwidth from band models. The mismatch
/// `k̄_P − 3k̄_F` includes the pump SPM and fundamental XPM shifts; bounds
/// default to the fundamental model's range.
#[allow(clippy::too_many_arguments)]
pub fn tau_sp_wg_numeric(
    fundamental: &DispersionModel,
    pump: &DispersionModel,
    length: f64,
    pump_power: f64,
    gamma_spm: f64,
    gamma_xpm: f64,
    omega_pump: f64,
    bounds: Option<(f64, f64)>,
) -> Result<BandwidthResult> {
    let bounds = bounds.unwrap_or_else(|| fundamental.valid_range());
    let center = omega_pump / 3.0;
    let k_p = pump.wavenumber(omega_pump)? + gamma_spm * pump_power;
    let k_f = fundamental.wavenumber(center)? + 2.0 * gamma_xpm * pump_power;
    if bounds.0 == bounds.1 {
        return Ok(BandwidthResult::squared(
            0.0,
            BandwidthMethod::Numeric,
            None,
        ));
    }
    let inc = SplineIncrement::new(fundamental, center, (bounds.0 - center, bounds.1 - center))?;
    tau_sp_numeric(
        &inc,
        omega_pump,
        k_p - 3.0 * k_f,
        length,
        bounds,
        QuadratureSettings::default(),
    )
}

/// Stimulated waveguide bandwidth from the generated band's model; bounds
/// default to that model's range.
pub fn tau_st_wg_numeric(
    generated: &DispersionModel,
    mismatch: f64,
    length: f64,
    omega_generated: f64,
    bounds: Option<(f64, f64)>,
) -> Result<BandwidthResult> {
    let bounds = bounds.unwrap_or_else(|| generated.valid_range());
    if bounds.0 == bounds.1 {
        return Ok(BandwidthResult::linear(0.0, BandwidthMethod::Numeric, None));
    }
    let g = omega_generated;
    let half = (bounds.1 - g).min(g - bounds.0).max(0.0);
    let inc = SplineIncrement::new(generated, g, (-half, half))?;
    tau_st_numeric(
        &inc,
        g,
        mismatch,
        length,
        bounds,
        QuadratureSettings::default(),
    )
}

fn check_beta2(beta2: f64, length: f64) -> Result<()> {
    check_length(length)?;
    if beta2 == 0.0 {
        return Err(Error::InfiniteBandwidth);
    }
    if !beta2.is_finite() {
        return Err(Error::InvalidParameter {
            name: "beta2",
            reason: format!("{beta2}"),
        });
    }
    Ok(())
}

/// Weak-dispersion spontaneous limit, `τ⁻² = √3/(9|β₂|L)`.
pub fn tau_sp_wg_analytic(beta2: f64, length: f64) -> Result<f64> {
    check_beta2(beta2, length)?;
    Ok((3f64.sqrt() / (9.0 * beta2.abs() * length)).sqrt())
}

/// Weak-dispersion stimulated limit, `τ⁻¹ = (4/3)√(2/(π|β₂|L))`.
pub fn tau_st_wg_analytic(beta2: f64, length: f64) -> Result<f64> {
    check_beta2(beta2, length)?;
    Ok(4.0 / 3.0 * (2.0 / (PI * beta2.abs() * length)).sqrt())
}

/// Ring process families for the closed-form bandwidths. Linewidths are the
/// loaded half-widths `Γ = ω/2Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RingBandwidth {
    Degenerate { fundamental: f64 },
    NonDegenerate { generated: f64, seed: f64 },
    Stimulated { generated: f64 },
}

/// Ring bandwidth at energy mismatch `δ` against the hot resonances:
/// `τ⁻² = ½Γ_F⁴/(δ² + 9Γ_F²)`,
/// `τ⁻² = ½Γ_G²Γ_S(2Γ_G+Γ_S)/(δ² + (2Γ_G+Γ_S)²)`, or
/// `τ⁻¹ = 2Γ_G³/(δ² + 4Γ_G²)`.
pub fn tau_ring(kind: RingBandwidth, detuning: f64) -> Result<BandwidthResult> {
    let positive = |v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter {
                name: "linewidth",
                reason: format!("must be positive, got {v}"),
            })
        }
    };
    let d2 = detuning * detuning;
    Ok(match kind {
        RingBandwidth::Degenerate { fundamental } => {
            let g = positive(fundamental)?;
            BandwidthResult::squared(
                0.5 * g.powi(4) / (d2 + 9.0 * g * g),
                BandwidthMethod::RingClosedForm,
                None,
            )
        }
        RingBandwidth::NonDegenerate { generated, seed } => {
            let (g, s) = (positive(generated)?, positive(seed)?);
            let w = 2.0 * g + s;
            BandwidthResult::squared(
                0.5 * g * g * s * w / (d2 + w * w),
                BandwidthMethod::RingClosedForm,
                None,
            )
        }
        RingBandwidth::Stimulated { generated } => {
            let g = positive(generated)?;
            BandwidthResult::linear(
                2.0 * g.powi(3) / (d2 + 4.0 * g * g),
                BandwidthMethod::RingClosedForm,
                None,
            )
        }
    })
}

/// Geometric mean frequency of the generated photons.
pub fn mean_frequency(omegas: [f64; 3]) -> f64 {
    (omegas[0] * omegas[1] * omegas[2]).cbrt()
}

/// `P_vac = ħ ω̄ τ⁻¹`.
pub fn vacuum_power(omega_bar: f64, tau_inv: f64) -> f64 {
    HBAR * omega_bar * tau_inv
}

/// Effective vacuum power of the ring non-degenerate process,
/// `ħω_S [(δ_st² + 4Γ_G²)/(δ_sp² + (2Γ_G+Γ_S)²)] Γ_S(2Γ_G+Γ_S)/(4Γ_G)`;
/// the ratio of stimulated to spontaneous rates is `P_S/P̄_vac`.
pub fn effective_vacuum_power(
    gamma_generated: f64,
    gamma_seed: f64,
    omega_seed: f64,
    detuning_stimulated: f64,
    detuning_spontaneous: f64,
) -> f64 {
    let (g, s) = (gamma_generated, gamma_seed);
    let w = 2.0 * g + s;
    HBAR * omega_seed * (detuning_stimulated.powi(2) + 4.0 * g * g)
        / (detuning_spontaneous.powi(2) + w * w)
        * s
        * w
        / (4.0 * g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_values() {
        let sp = tau_sp_wg_analytic(3.2e-26, 0.01).unwrap();
        assert!((sp / 2.4e13 - 1.0).abs() < 0.03);
        let st = tau_st_wg_analytic(5.5e-26, 0.01).unwrap();
        assert!((st / 4.5e13 - 1.0).abs() < 0.01);
        let sp55 = tau_sp_wg_analytic(5.5e-26, 0.01).unwrap();
        assert!((sp55 / 1.87e13 - 1.0).abs() < 0.005);
        assert!((tau_sp_wg_analytic(3.2e-26, 0.04).unwrap() / sp - 0.5).abs() < 1e-15);
        assert!(
            (tau_st_wg_analytic(3.2e-26, 0.04).unwrap()
                / tau_st_wg_analytic(3.2e-26, 0.01).unwrap()
                - 0.5)
                .abs()
                < 1e-15
        );
        let ratio = tau_st_wg_analytic(3.2e-26, 0.01).unwrap() / sp;
        assert!((ratio - 4.0 / 3.0 * (2.0 / PI).sqrt() / (3f64.sqrt() / 9.0).sqrt()).abs() < 1e-12);
        assert!((ratio - 2.42).abs() < 0.01);
        assert_eq!(tau_sp_wg_analytic(0.0, 0.01), Err(Error::InfiniteBandwidth));
    }

    #[test]
    fn ring_closed_forms() {
        let g = 5.47e7;
        let d = tau_ring(RingBandwidth::Degenerate { fundamental: g }, 0.0).unwrap();
        assert!((d.tau_inv / (g / 18f64.sqrt()) - 1.0).abs() < 1e-15);
        let s = tau_ring(RingBandwidth::Stimulated { generated: g }, 0.0).unwrap();
        assert!((s.tau_inv / (g / 2.0) - 1.0).abs() < 1e-15);
        let nd = tau_ring(
            RingBandwidth::NonDegenerate {
                generated: g,
                seed: g,
            },
            0.0,
        )
        .unwrap();
        assert!((nd.tau_inv_sq.unwrap() / d.tau_inv_sq.unwrap() - 3.0).abs() < 1e-14);
        for kind in [
            RingBandwidth::Degenerate { fundamental: g },
            RingBandwidth::NonDegenerate {
                generated: g,
                seed: 0.7 * g,
            },
            RingBandwidth::Stimulated { generated: g },
        ] {
            let at = |x: f64| tau_ring(kind, x).unwrap().tau_inv;
            assert_eq!(at(3e7), at(-3e7));
            assert!(at(0.0) > at(1e3));
        }
    }

    #[test]
    fn effective_vacuum_power_reduces() {
        let g = 5e7;
        let w = 8e14;
        let p = effective_vacuum_power(g, g, w, 0.0, 0.0);
        assert!((p / (HBAR * w * g / 3.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_width_window() {
        let inc = PolynomialIncrement::pure_beta2(7e-9, 3.2e-26);
        let r = tau_sp_numeric(
            &inc,
            3e15,
            0.0,
            0.01,
            (1e15, 1e15),
            QuadratureSettings::default(),
        )
        .unwrap();
        assert_eq!(r.tau_inv, 0.0);
        let r = tau_st_numeric(
            &inc,
            1e15,
            0.0,
            0.01,
            (1e15, 1e15),
            QuadratureSettings::default(),
        )
        .unwrap();
        assert_eq!(r.tau_inv, 0.0);
    }

    #[test]
    fn stimulated_quadrature_reaches_analytic_limit() {
        let (b2, l) = (5.5e-26, 0.01);
        let inc = PolynomialIncrement::pure_beta2(7e-9, b2);
        let g = 1.24e15;
        let r = tau_st_numeric(
            &inc,
            g,
            0.0,
            l,
            (0.2 * g, 1.8 * g),
            QuadratureSettings::default(),
        )
        .unwrap();
        let a = tau_st_wg_analytic(b2, l).unwrap();
        assert!((r.tau_inv / a - 1.0).abs() < 1e-3, "{}", r.tau_inv / a);
    }

    #[test]
    fn sinc_series_patch() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-17);
        assert!((sinc(1e-7) - (1e-7f64).sin() / 1e-7).abs() < 1e-15);
    }
}
