//! Shared workloads for the benchmarks.

use topdc::bandwidth::SplineIncrement;
use topdc::dispersion::DispersionModel;
use topdc::{sample, Band, Device, Process, ProcessScenario};

/// Fundamental band of the reference waveguide and its matched frequency.
pub fn fundamental() -> (DispersionModel, f64) {
    let mut models = sample::dispersion_models().expect("reference tables build");
    let model = models.remove(&Band::Fundamental).expect("fundamental band");
    let center = topdc::units::omega_from_wavelength(sample::MATCHED_FUNDAMENTAL_WAVELENGTH);
    (model, center)
}

/// Wavenumber increment over the full table range.
pub fn increment(model: &DispersionModel, center: f64) -> SplineIncrement<'_> {
    let (lo, hi) = model.valid_range();
    SplineIncrement::new(model, center, (lo - center, hi - center)).expect("increment builds")
}

pub fn ring_cases() -> Vec<(Device, ProcessScenario)> {
    let ring = Device::Ring(sample::ring());
    [
        (Process::SpDegenerate, 0.0),
        (Process::Stimulated, sample::SEED_POWER_RING),
        (Process::DoublyStimulated, sample::SEED_POWER_RING),
    ]
    .into_iter()
    .map(|(p, seed)| {
        let mut s = ProcessScenario::new(p, sample::PUMP_POWER, seed);
        s.omegas = sample::band_omegas();
        (ring.clone(), s)
    })
    .collect()
}
