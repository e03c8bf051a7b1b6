//! Reference device: a silicon-on-insulator style waveguide and microring
//! phase matched for a 0.57 μm pump, with synthetic dispersion tables of the
//! same shape (k_P = 3k_F = 1.97e7 rad/m, n_g ≈ 2.1 and 2.3, |β₂| = 3.2e-26
//! s²/m at the fundamental and 5.5e-26 s²/m at 1.52 μm).

use std::collections::BTreeMap;

use crate::constants::C;
use crate::dispersion::{DispersionModel, IndexTable};
use crate::error::Result;
use crate::modeoverlap::NonlinearParameterSet;
use crate::phasematch::{Resonance, RingSpec, WaveguideSpec};
use crate::units::{omega_from_wavelength, um, wavelength_from_omega};
use crate::Band;

pub const PUMP_WAVELENGTH: f64 = 0.57e-6;
pub const SEED_WAVELENGTH: f64 = 2.3e-6;
/// Phase-matched fundamental of the synthetic tables.
pub const MATCHED_FUNDAMENTAL_WAVELENGTH: f64 = 1.72e-6;
pub const PUMP_WAVENUMBER: f64 = 1.97e7;

/// (W·m)⁻¹
pub const GAMMA: f64 = 0.19;
pub const GAMMA_SPM: f64 = 4.3;
pub const GAMMA_XPM: f64 = 0.8;

pub const LENGTH: f64 = 0.01;
pub const CIRCUMFERENCE: f64 = 750e-6;
pub const Q_PUMP: f64 = 1e5;
pub const Q_SIGNAL: f64 = 1e7;
pub const ESCAPE_EFFICIENCY: f64 = 0.5;
pub const GROUP_INDEX_PUMP: f64 = 2.3;
pub const GROUP_INDEX_FUNDAMENTAL: f64 = 2.1;

pub const PUMP_POWER: f64 = 0.1;
pub const SEED_POWER_WAVEGUIDE: f64 = 10e-3;
pub const SEED_POWER_RING: f64 = 20e-6;

/// Waveguide bandwidths from the reference mode-solver data, s⁻¹.
pub const TAU_INV_SPONTANEOUS: f64 = 2.9e13;
pub const TAU_INV_STIMULATED: f64 = 4.0e13;

/// GVD of the synthetic fundamental band at its matched frequency, s²/m.
pub const BETA2_FUNDAMENTAL: f64 = 3.2e-26;
/// GVD at 1.52 μm, s²/m.
pub const BETA2_GENERATED: f64 = 5.5e-26;

const BETA3: f64 = 1.5961e-40;

pub fn pump_omega() -> f64 {
    omega_from_wavelength(PUMP_WAVELENGTH)
}

/// Band frequencies set by energy conservation around the 0.57 μm pump and
/// 2.3 μm seed: F = P/3, G = (P − S)/2, I = P − 2S.
pub fn band_omegas() -> BTreeMap<Band, f64> {
    let p = pump_omega();
    let s = omega_from_wavelength(SEED_WAVELENGTH);
    [
        (Band::Pump, p),
        (Band::Fundamental, p / 3.0),
        (Band::Generated, 0.5 * (p - s)),
        (Band::Seed, s),
        (Band::Idler, p - 2.0 * s),
    ]
    .into_iter()
    .collect()
}

fn matched_fundamental_omega() -> f64 {
    omega_from_wavelength(MATCHED_FUNDAMENTAL_WAVELENGTH)
}

/// Synthetic fundamental-band wavenumber, rad/m.
pub fn fundamental_wavenumber(omega: f64) -> f64 {
    let d = omega - matched_fundamental_omega();
    PUMP_WAVENUMBER / 3.0
        + d * GROUP_INDEX_FUNDAMENTAL / C
        + BETA2_FUNDAMENTAL * d * d / 2.0
        + BETA3 * d.powi(3) / 6.0
}

/// Synthetic pump-band wavenumber, rad/m.
pub fn pump_wavenumber(omega: f64) -> f64 {
    PUMP_WAVENUMBER + (omega - 3.0 * matched_fundamental_omega()) * GROUP_INDEX_PUMP / C
}

fn table(label: &str, lo: f64, hi: f64, points: usize, k: impl Fn(f64) -> f64) -> IndexTable {
    let samples = (0..points)
        .map(|i| {
            let lambda = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let omega = omega_from_wavelength(lambda);
            (lambda, k(omega) * C / omega)
        })
        .collect();
    let mut t = IndexTable::new(label, samples);
    t.source = "synthetic reference dispersion".into();
    t
}

/// Fundamental band tabulated over 1.0–2.6 μm.
pub fn fundamental_table(points: usize) -> IndexTable {
    table(
        "fundamental",
        um(1.0),
        um(2.6),
        points,
        fundamental_wavenumber,
    )
}

/// Pump band tabulated over 0.50–0.66 μm.
pub fn pump_table(points: usize) -> IndexTable {
    table("pump", um(0.50), um(0.66), points, pump_wavenumber)
}

pub fn dispersion_models() -> Result<BTreeMap<Band, DispersionModel>> {
    Ok([
        (Band::Pump, DispersionModel::build(&pump_table(161))?),
        (
            Band::Fundamental,
            DispersionModel::build(&fundamental_table(161))?,
        ),
    ]
    .into_iter()
    .collect())
}

pub fn nonlinear_parameters() -> NonlinearParameterSet {
    NonlinearParameterSet::direct(GAMMA, GAMMA_SPM, GAMMA_XPM)
}

/// 1 cm waveguide, with or without the synthetic dispersion tables.
pub fn waveguide(with_dispersion: bool) -> Result<WaveguideSpec> {
    Ok(WaveguideSpec {
        length: LENGTH,
        bands: if with_dispersion {
            dispersion_models()?
        } else {
            BTreeMap::new()
        },
        gamma: nonlinear_parameters(),
    })
}

/// 750 μm ring with resonances at every band of [`band_omegas`]. The idler
/// takes the fundamental's Q and every non-pump band its group index.
pub fn ring() -> RingSpec {
    let n_eff = PUMP_WAVENUMBER * C / pump_omega();
    let resonances = band_omegas()
        .into_iter()
        .map(|(band, omega)| {
            let (q, n_g) = if band == Band::Pump {
                (Q_PUMP, GROUP_INDEX_PUMP)
            } else {
                (Q_SIGNAL, GROUP_INDEX_FUNDAMENTAL)
            };
            let r = Resonance {
                omega,
                kappa: n_eff * omega / C,
                q,
                eta: ESCAPE_EFFICIENCY,
                group_velocity: C / n_g,
            };
            (band, r)
        })
        .collect();
    RingSpec {
        circumference: CIRCUMFERENCE,
        resonances,
        gamma: nonlinear_parameters(),
    }
}

/// Wavelengths of [`band_omegas`], for reports.
pub fn band_wavelengths() -> BTreeMap<Band, f64> {
    band_omegas()
        .into_iter()
        .map(|(b, w)| (b, wavelength_from_omega(w)))
        .collect()
}
