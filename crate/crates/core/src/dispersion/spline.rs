//! Quintic B-splines: not-a-knot interpolation and a penalized variant whose
//! smoothing weight is chosen by generalized cross-validation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const DEGREE: usize = 5;
const ORDER: usize = DEGREE + 1;

/// A degree-5 spline on `[lo, hi]`, stored as B-spline coefficients over a
/// unit-scaled abscissa.
#[derive(Debug, Clone)]
pub struct QuinticSpline {
    knots: Vec<f64>,
    coeffs: Vec<f64>,
    offset: f64,
    scale: f64,
}

/// How the spline treats the samples.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Smoothing {
    /// Pass through every sample.
    Interpolate,
    /// Penalized fit, smoothing weight chosen by generalized cross-validation.
    #[default]
    CrossValidated,
    /// Penalized fit with a fixed relative weight on the integral of `(s''')²`.
    Fixed(f64),
}

impl QuinticSpline {
    pub fn fit(x: &[f64], y: &[f64], smoothing: Smoothing) -> Result<Self> {
        let n = x.len();
        if n < ORDER + 2 || y.len() != n {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("need at least {} points, got {n}", ORDER + 2),
            });
        }
        let offset = x[0];
        let scale = x[n - 1] - x[0];
        let u: Vec<f64> = x.iter().map(|&v| (v - offset) / scale).collect();
        let knots = not_a_knot(&u);
        let basis = collocation(&knots, &u);
        let rhs = DVector::from_column_slice(y);

        let coeffs = match smoothing {
            Smoothing::Interpolate => solve_square(&basis, &rhs)?,
            Smoothing::Fixed(lambda) => penalized(&basis, &rhs, &knots, lambda)?.0,
            Smoothing::CrossValidated => {
                let y_scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
                let mut best: Option<(f64, DVector<f64>)> = None;
                for i in 0..=48 {
                    let lambda = 10f64.powf(-14.0 + 0.375 * i as f64);
                    let (c, trace) = penalized(&basis, &rhs, &knots, lambda)?;
                    let resid = &basis * &c - &rhs;
                    let rss = resid.norm_squared() / (y_scale * y_scale);
                    let dof = n as f64 - trace;
                    if dof <= 1e-6 {
                        continue;
                    }
                    let gcv = n as f64 * rss / (dof * dof);
                    if best.as_ref().is_none_or(|(g, _)| gcv < *g) {
                        best = Some((gcv, c));
                    }
                }
                match best {
                    Some((_, c)) => c,
                    None => solve_square(&basis, &rhs)?,
                }
            }
        };

        Ok(Self {
            knots,
            coeffs: coeffs.iter().copied().collect(),
            offset,
            scale,
        })
    }

    pub fn lo(&self) -> f64 {
        self.offset
    }

    pub fn hi(&self) -> f64 {
        self.offset + self.scale
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivatives::<1>(x)[0]
    }

    /// Value and the first `N - 1` derivatives at `x`.
    pub fn derivatives<const N: usize>(&self, x: f64) -> [f64; N] {
        let u = ((x - self.offset) / self.scale).clamp(0.0, 1.0);
        let span = find_span(&self.knots, u);
        let nd = (N - 1).min(DEGREE);
        let ders = basis_derivatives(&self.knots, span, u, nd);
        let mut out = [0.0; N];
        let mut factor = 1.0;
        for (k, slot) in out.iter_mut().enumerate().take(nd + 1) {
            let mut acc = 0.0;
            for (j, d) in ders[k].iter().enumerate() {
                acc += d * self.coeffs[span - DEGREE + j];
            }
            *slot = acc * factor;
            factor /= self.scale;
        }
        out
    }
}

/// Knot vector for not-a-knot interpolation: clamped ends, interior knots at
/// the data sites with the two sites nearest each end removed.
fn not_a_knot(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut knots = Vec::with_capacity(n + ORDER);
    knots.extend(std::iter::repeat_n(u[0], ORDER));
    knots.extend_from_slice(&u[3..n - 3]);
    knots.extend(std::iter::repeat_n(u[n - 1], ORDER));
    knots
}

fn find_span(knots: &[f64], u: f64) -> usize {
    let n = knots.len() - ORDER - 1;
    if u >= knots[n + 1] {
        return n;
    }
    let (mut lo, mut hi) = (DEGREE, n + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if u < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Nonzero basis functions and their derivatives up to `nd` at `u`
/// (Piegl & Tiller, algorithm A2.3).
fn basis_derivatives(knots: &[f64], span: usize, u: f64, nd: usize) -> Vec<[f64; ORDER]> {
    let p = DEGREE;
    let mut ndu = [[0.0; ORDER]; ORDER];
    let mut left = [0.0; ORDER];
    let mut right = [0.0; ORDER];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![[0.0; ORDER]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = [[0.0; ORDER]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize) - 1 <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        for v in row.iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

fn collocation(knots: &[f64], u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, &ui) in u.iter().enumerate() {
        let span = find_span(knots, ui);
        let ders = basis_derivatives(knots, span, ui, 0);
        for j in 0..ORDER {
            m[(i, span - DEGREE + j)] = ders[0][j];
        }
    }
    m
}

fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone().lu().solve(b).ok_or(Error::InvalidParameter {
        name: "samples",
        reason: "spline collocation system is singular".into(),
    })
}

/// Gram matrix of third derivatives, `∫ B_i''' B_j''' du`. Its null space is
/// exactly the quadratics, whatever the knot spacing.
fn roughness(knots: &[f64], n: usize) -> DMatrix<f64> {
    // B''' has degree 2, so three Gauss points per span are exact.
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut r = DMatrix::zeros(n, n);
    for span in DEGREE..n {
        let (a, b) = (knots[span], knots[span + 1]);
        if b <= a {
            continue;
        }
        for (t, w) in NODES.iter().zip(WEIGHTS) {
            let u = 0.5 * (a + b) + 0.5 * (b - a) * t;
            let d3 = basis_derivatives(knots, span, u, 3)[3];
            let w = w * 0.5 * (b - a);
            for i in 0..ORDER {
                for j in 0..ORDER {
                    r[(span - DEGREE + i, span - DEGREE + j)] += w * d3[i] * d3[j];
                }
            }
        }
    }
    r
}

/// Penalized least squares. `lambda` is relative: the roughness matrix is
/// rescaled to the trace of the data term. Returns the coefficients and the
/// trace of the hat matrix.
fn penalized(
    b: &DMatrix<f64>,
    y: &DVector<f64>,
    knots: &[f64],
    lambda: f64,
) -> Result<(DVector<f64>, f64)> {
    let btb = b.transpose() * b;
    let r = roughness(knots, b.ncols());
    let weight = lambda * btb.trace() / r.trace().max(f64::MIN_POSITIVE);
    let lhs = &btb + weight * r;
    let chol = lhs.cholesky().ok_or(Error::InvalidParameter {
        name: "smoothing",
        reason: "penalized normal equations are not positive definite".into(),
    })?;
    let coeffs = chol.solve(&(b.transpose() * y));
    let trace = chol.solve(&btb).trace();
    Ok((coeffs, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * (i as f64 / (n - 1) as f64).powf(1.1))
            .collect()
    }

    #[test]
    fn reproduces_quintic_polynomials_exactly() {
        let x = grid(20, -1.0, 2.0);
        let p = |t: f64| {
            1.0 - 2.0 * t + 0.5 * t.powi(2) + 0.3 * t.powi(3) - 0.2 * t.powi(4) + 0.05 * t.powi(5)
        };
        let y: Vec<f64> = x.iter().map(|&t| p(t)).collect();
        let s = QuinticSpline::fit(&x, &y, Smoothing::Interpolate).unwrap();
        for t in [-0.93, 0.1, 0.77, 1.5, 1.99] {
            let d = s.derivatives::<5>(t);
            assert!((d[0] - p(t)).abs() < 1e-11);
            let d1 = -2.0 + t + 0.9 * t * t - 0.8 * t.powi(3) + 0.25 * t.powi(4);
            let d2 = 1.0 + 1.8 * t - 2.4 * t * t + t.powi(3);
            let d3 = 1.8 - 4.8 * t + 3.0 * t * t;
            let d4 = -4.8 + 6.0 * t;
            assert!((d[1] - d1).abs() < 1e-9, "{} vs {d1}", d[1]);
            assert!((d[2] - d2).abs() < 1e-8);
            assert!((d[3] - d3).abs() < 1e-7);
            assert!((d[4] - d4).abs() < 1e-6);
        }
    }

    #[test]
    fn interpolates_at_nodes() {
        let x = grid(12, 0.0, 3.0);
        let y: Vec<f64> = x.iter().map(|t| t.sin() + 0.1 * t.exp()).collect();
        let s = QuinticSpline::fit(&x, &y, Smoothing::Interpolate).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.value(*xi) - yi).abs() < 1e-13);
        }
    }

    #[test]
    fn cross_validation_suppresses_noise_in_curvature() {
        let x: Vec<f64> = (0..80).map(|i| i as f64 / 79.0).collect();
        let noise = |i: usize| ((i * 7919 % 101) as f64 / 101.0 - 0.5) * 2e-6;
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, t)| t * t + noise(i))
            .collect();
        let raw = QuinticSpline::fit(&x, &y, Smoothing::Interpolate).unwrap();
        let cv = QuinticSpline::fit(&x, &y, Smoothing::CrossValidated).unwrap();
        let err = |s: &QuinticSpline| {
            (5..75)
                .map(|i| (s.derivatives::<3>(i as f64 / 80.0)[2] - 2.0).abs())
                .fold(0.0, f64::max)
        };
        assert!(
            err(&cv) < 0.2 * err(&raw),
            "cv {} raw {}",
            err(&cv),
            err(&raw)
        );
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(
            QuinticSpline::fit(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], Smoothing::Interpolate).is_err()
        );
    }
}
