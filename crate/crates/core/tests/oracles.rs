//! Library results against independent calculations and frozen values.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use topdc::bandwidth::{mc_oracle, tau_ring, McIntegrand, PolynomialIncrement, RingBandwidth};
use topdc::constants::{C, HBAR};
use topdc::modeoverlap::{effective_area_waveguide, Chi3Map, Conjugation, NormalizedMode};
use topdc::phasematch::self_consistent_pump;
use topdc::rates::{evaluate, Device, ProcessScenario};
use topdc::units::{omega_from_wavelength, um};
use topdc::{sample, Band, Error, ModeProfile, Process, RingSpec};

/// Positive roots of `s²x³ + 2sc₀x² + (c₀² + Γ²)x − D` by a dense scan and
/// bisection.
fn cubic_roots(s: f64, c0: f64, g: f64, drive: f64) -> Vec<f64> {
    let f = |x: f64| x * ((c0 + s * x).powi(2) + g * g) - drive;
    let hi = drive / (g * g) * 1.01;
    let n = 200_000;
    let mut roots = Vec::new();
    let mut a = 0.0;
    let mut fa = f(a);
    for i in 1..=n {
        let b = hi * i as f64 / n as f64;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut up) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + up);
                if f(lo) * f(mid) <= 0.0 {
                    up = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + up));
        }
        a = b;
        fa = fb;
    }
    roots
}

fn pump_oracle(ring: &RingSpec, power: f64, laser: f64) -> Vec<f64> {
    let p = ring.resonances[&Band::Pump];
    let g = p.linewidth();
    let drive = power * 2.0 * p.group_velocity * p.eta * g / ring.circumference;
    cubic_roots(
        ring.gamma.spm() * p.group_velocity,
        laser - p.omega,
        g,
        drive,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pump_fixed_point_matches_cubic(power in 1e-3f64..2.0, offset in -3.0f64..3.0, spm in 0.0f64..10.0) {
        let mut ring = sample::ring();
        ring.gamma = ring.gamma.with_spm(spm);
        let g = ring.resonances[&Band::Pump].linewidth();
        let laser = ring.resonances[&Band::Pump].omega + offset * g;
        let roots = pump_oracle(&ring, power, laser);
        prop_assert!(!roots.is_empty());
        match self_consistent_pump(&ring, power, laser) {
            Ok(state) => {
                let best = roots.iter().map(|r| (state.circulating / r - 1.0).abs()).fold(f64::INFINITY, f64::min);
                prop_assert!(best < 1e-9, "{} vs {:?}", state.circulating, roots);
                prop_assert_eq!(state.multistable, roots.len() == 3);
            }
            Err(Error::Bistable { .. }) => prop_assert!(roots.len() > 1),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}

#[test]
fn pump_bistable_branch() {
    let mut ring = sample::ring();
    ring.gamma = ring.gamma.with_spm(4300.0);
    let p = ring.resonances[&Band::Pump];
    let laser = p.omega - 10.0 * p.linewidth();
    let roots = pump_oracle(&ring, 0.1, laser);
    assert_eq!(roots.len(), 3);
    match self_consistent_pump(&ring, 0.1, laser) {
        Ok(s) => {
            assert!(s.multistable);
            assert!(roots.iter().any(|r| (s.circulating / r - 1.0).abs() < 1e-9));
        }
        Err(e) => assert!(matches!(e, Error::Bistable { .. })),
    }
}

#[test]
fn table_one_by_hand() {
    // Waveguide spontaneous: (γL)² (ħω_F τ⁻¹)² P_P/(ħω_P).
    let wp = omega_from_wavelength(sample::PUMP_WAVELENGTH);
    let p_vac = HBAR * wp / 3.0 * sample::TAU_INV_SPONTANEOUS;
    let by_hand =
        (sample::GAMMA * sample::LENGTH).powi(2) * p_vac * p_vac * sample::PUMP_POWER / (HBAR * wp);
    let mut s = ProcessScenario::new(Process::SpDegenerate, sample::PUMP_POWER, 0.0);
    s.omegas = sample::band_omegas();
    s.bandwidth = topdc::BandwidthSource::Injected {
        tau_inv: sample::TAU_INV_SPONTANEOUS,
    };
    let r = evaluate(&Device::Waveguide(sample::waveguide(false).unwrap()), &s).unwrap();
    assert!((r.rate / by_hand - 1.0).abs() < 1e-13);
    assert!((p_vac - 3.3e-6).abs() < 0.1e-6);

    // Ring degenerate with the pump on resonance.
    let ring = sample::ring();
    let f = ring.resonances[&Band::Fundamental];
    let p = ring.resonances[&Band::Pump];
    let ff = 4.0 * f.group_velocity * f.eta * f.q / (ring.circumference * f.omega);
    let fp = 4.0 * p.group_velocity * p.eta * p.q / (ring.circumference * p.omega);
    let p_vac = HBAR * f.omega * f.omega / (2.0 * f.q) / 18f64.sqrt();
    let by_hand = (sample::GAMMA * sample::CIRCUMFERENCE).powi(2)
        * p_vac
        * p_vac
        * ff.powi(3)
        * fp
        * sample::PUMP_POWER
        / (HBAR * p.omega);
    let mut s = ProcessScenario::new(Process::SpDegenerate, sample::PUMP_POWER, 0.0);
    s.omegas = sample::band_omegas();
    let r = evaluate(&Device::Ring(ring), &s).unwrap();
    assert!(
        (r.rate / by_hand - 1.0).abs() < 1e-12,
        "{} vs {by_hand}",
        r.rate
    );
    assert!((fp - 10.5).abs() < 0.05);
    // The quoted |F_F|² ≈ 3.48e3 refers to a 1.72 μm resonance.
    let at_172 = topdc::Resonance {
        omega: omega_from_wavelength(um(1.72)),
        ..f
    };
    assert!((at_172.enhancement(sample::CIRCUMFERENCE, 0.0) / 3.48e3 - 1.0).abs() < 2e-3);
    assert!((ff / at_172.enhancement(sample::CIRCUMFERENCE, 0.0) - 1.71 / 1.72).abs() < 1e-12);
}

#[test]
fn frozen_ring_rates() {
    let ring = Device::Ring(sample::ring());
    let frozen = [
        (Process::SpNonDegenerate, 0.0, 1.663711106431e-2),
        (Process::SpDegenerate, 0.0, 5.753053905195e-3),
        (
            Process::Stimulated,
            sample::SEED_POWER_RING,
            2.176945653035e5,
        ),
        (
            Process::DoublyStimulated,
            sample::SEED_POWER_RING,
            1.209853566874e12,
        ),
    ];
    for (process, seed, value) in frozen {
        let mut s = ProcessScenario::new(process, sample::PUMP_POWER, seed);
        s.omegas = sample::band_omegas();
        let r = evaluate(&ring, &s).unwrap();
        assert!(
            (r.rate / value - 1.0).abs() < 1e-9,
            "{process}: {:.12e}",
            r.rate
        );
    }
}

#[test]
fn numeric_waveguide_rate_frozen() {
    let mut s = ProcessScenario::new(Process::SpDegenerate, sample::PUMP_POWER, 0.0);
    s.omegas.insert(
        Band::Pump,
        3.0 * omega_from_wavelength(sample::MATCHED_FUNDAMENTAL_WAVELENGTH),
    );
    let r = evaluate(&Device::Waveguide(sample::waveguide(true).unwrap()), &s).unwrap();
    assert!(
        (r.rate / 8.309364383454 - 1.0).abs() < 1e-6,
        "{:.12e}",
        r.rate
    );
}

fn gaussian() -> ModeProfile {
    ModeProfile::gaussian(
        "g",
        omega_from_wavelength(um(1.55)),
        161,
        161,
        um(0.05),
        um(0.05),
        um(0.8),
    )
}

#[test]
fn displaced_gaussian_area() {
    // 𝒜(d) = 2πw² exp(d²/2w²) for two unit-index Gaussians offset by d.
    let w = um(0.8);
    let a = gaussian();
    for steps in [0.0, 6.0, 12.0, 20.0] {
        let d = steps * um(0.05);
        let b = gaussian().shifted(d, 0.0);
        let (na, nb) = (NormalizedMode::new(&a), NormalizedMode::new(&b));
        let o = effective_area_waveguide(
            &[na, nb, na, nb],
            Conjugation::TwoDagger,
            &Chi3Map::uniform(),
        )
        .unwrap();
        let exact = 2.0 * PI * w * w * (d * d / (2.0 * w * w)).exp();
        assert!(
            (o.area / exact - 1.0).abs() < 1e-6,
            "d = {d:e}: {:e} vs {exact:e}",
            o.area
        );
    }
}

#[test]
fn area_invariances() {
    let a = gaussian();
    let n = NormalizedMode::new(&a);
    let base = effective_area_waveguide(&[n, n, n, n], Conjugation::TwoDagger, &Chi3Map::uniform())
        .unwrap();
    let b = gaussian()
        .scaled(37.0)
        .phased(Complex64::from_polar(1.0, 0.7));
    let nb = NormalizedMode::new(&b);
    let o = effective_area_waveguide(&[n, nb, n, nb], Conjugation::TwoDagger, &Chi3Map::uniform())
        .unwrap();
    assert!((o.area / base.area - 1.0).abs() < 1e-12);
    let c = gaussian().rotated_polarization(PI / 2.0);
    let nc = NormalizedMode::new(&c);
    let r = effective_area_waveguide(
        &[n, n, n, nc],
        Conjugation::ThreeDagger,
        &Chi3Map::uniform(),
    );
    assert_eq!(r, Err(Error::VanishingOverlap));
}

#[test]
fn ring_bandwidth_oracle() {
    let g = 3.1e7;
    for delta in [0.0, 0.5 * g, 2.0 * g] {
        let closed = tau_ring(RingBandwidth::Stimulated { generated: g }, delta)
            .unwrap()
            .tau_inv;
        assert!((closed - 2.0 * g.powi(3) / (delta * delta + 4.0 * g * g)).abs() < 1e-9 * closed);
    }
    let degenerate = tau_ring(RingBandwidth::Degenerate { fundamental: g }, 0.0)
        .unwrap()
        .tau_inv;
    let nondeg = tau_ring(
        RingBandwidth::NonDegenerate {
            generated: g,
            seed: g,
        },
        0.0,
    )
    .unwrap()
    .tau_inv;
    // Equal linewidths: the non-degenerate τ⁻² is three times the degenerate one.
    assert!(((nondeg / degenerate).powi(2) - 3.0).abs() < 1e-13);
}

#[test]
fn monte_carlo_is_seeded() {
    let inc = PolynomialIncrement::pure_beta2(2.1 / C, 3.2e-26);
    let wf = omega_from_wavelength(um(1.72));
    let bounds = (wf - 2e14, wf + 2e14);
    let run = |seed| {
        mc_oracle(
            McIntegrand::Spontaneous {
                increment: &inc,
                omega_pump: 3.0 * wf,
                mismatch: 0.0,
                length: 0.01,
                bounds,
            },
            100_000,
            seed,
        )
        .unwrap()
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3).value, run(4).value);
}
