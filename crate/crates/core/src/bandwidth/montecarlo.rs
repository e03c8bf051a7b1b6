//! Monte-Carlo estimates of the bandwidth integrals in the original
//! frequency variables, with exact `dk = k'(ω) dω` Jacobians. Used to check
//! the rotated-coordinate quadrature.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sinc, Increment};
use crate::error::{Error, Result};

const CHUNK: usize = 1 << 15;
pub const MIN_SAMPLES: usize = 100_000;

/// Integral to estimate.
#[derive(Clone, Copy)]
pub enum McIntegrand<'a> {
    /// `τ⁻² = (v_F³/6π²) ∬ dω₁dω₂ k'(ω₁)k'(ω₂)k'(ω₃) sinc²(…)` with
    /// `ω₃ = ω_P − ω₁ − ω₂` kept inside the window.
    Spontaneous {
        increment: &'a dyn Increment,
        omega_pump: f64,
        mismatch: f64,
        length: f64,
        bounds: (f64, f64),
    },
    /// `τ⁻¹ = (v_G²/π) ∫ dω₁ k'(ω₁)k'(ω₂) sinc²(…)` with `ω₂ = 2ω_G − ω₁`.
    Stimulated {
        increment: &'a dyn Increment,
        omega_generated: f64,
        mismatch: f64,
        length: f64,
        bounds: (f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    /// τ⁻² for the spontaneous integrand, τ⁻¹ for the stimulated one.
    pub value: f64,
    pub sigma: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Estimate with `samples` uniform draws. Chunks use independent ChaCha
/// streams of one seed, so the result does not depend on the thread count.
pub fn mc_oracle(integrand: McIntegrand<'_>, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: format!("at least {MIN_SAMPLES} are needed, got {samples}"),
        });
    }
    let (bounds, dims) = match integrand {
        McIntegrand::Spontaneous { bounds, .. } => (bounds, 2),
        McIntegrand::Stimulated { bounds, .. } => (bounds, 1),
    };
    let (lo, hi) = bounds;
    if !(hi >= lo) {
        return Err(Error::InvalidParameter {
            name: "bounds",
            reason: format!("[{lo:.6e}, {hi:.6e}]"),
        });
    }
    if hi == lo {
        return Ok(McEstimate {
            value: 0.0,
            sigma: 0.0,
            samples,
            seed,
        });
    }
    let volume = (hi - lo).powi(dims);
    let weight = weight_fn(integrand);

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(samples - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let x = rng.random_range(lo..hi);
                let y = rng.random_range(lo..hi);
                let w = weight(x, y);
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let sum = super::quadrature::neumaier_sum(partial.iter().map(|p| p.0));
    let sum2 = super::quadrature::neumaier_sum(partial.iter().map(|p| p.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(McEstimate {
        value: volume * mean,
        sigma: volume * (var / n).sqrt(),
        samples,
        seed,
    })
}

fn weight_fn<'a>(integrand: McIntegrand<'a>) -> Box<dyn Fn(f64, f64) -> f64 + Sync + 'a> {
    match integrand {
        McIntegrand::Spontaneous {
            increment,
            omega_pump,
            mismatch,
            length,
            bounds,
        } => {
            let center = omega_pump / 3.0;
            let v = 1.0 / increment.slope(0.0);
            let norm = v.powi(3) / (6.0 * PI * PI);
            Box::new(move |w1, w2| {
                let w3 = omega_pump - w1 - w2;
                if w3 < bounds.0 || w3 > bounds.1 {
                    return 0.0;
                }
                let (d1, d2, d3) = (w1 - center, w2 - center, w3 - center);
                let jac = increment.slope(d1) * increment.slope(d2) * increment.slope(d3);
                let sum =
                    increment.increment(d1) + increment.increment(d2) + increment.increment(d3);
                norm * jac * sinc((mismatch - sum) * length / 2.0).powi(2)
            })
        }
        McIntegrand::Stimulated {
            increment,
            omega_generated,
            mismatch,
            length,
            bounds,
        } => {
            let v = 1.0 / increment.slope(0.0);
            let norm = v * v / PI;
            Box::new(move |w1, _| {
                let w2 = 2.0 * omega_generated - w1;
                if w2 < bounds.0 || w2 > bounds.1 {
                    return 0.0;
                }
                let (d1, d2) = (w1 - omega_generated, w2 - omega_generated);
                let jac = increment.slope(d1) * increment.slope(d2);
                let sum = increment.increment(d1) + increment.increment(d2);
                norm * jac * sinc((mismatch - sum) * length / 2.0).powi(2)
            })
        }
    }
}
