//! Globally adaptive Gauss–Kronrod (7/15) quadrature with deterministic,
//! order-preserving parallel evaluation.

use rayon::prelude::*;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Nodes per panel.
pub const NODES: usize = 15;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let resasc = resasc * half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    Segment { a, b, value, error }
}

/// Compensated (Neumaier) sum in iteration order.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub segments: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_segments: usize,
    /// Evaluate panels on the rayon pool.
    pub parallel: bool,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-8,
            absolute: 0.0,
            max_segments: 20_000,
            parallel: false,
        }
    }
}

/// Integrate over consecutive `breakpoints`. Segments whose error exceeds
/// their share of the target are bisected in batches until the total error
/// meets the tolerance or the segment budget runs out.
pub fn integrate<F>(f: &F, breakpoints: &[f64], tol: Tolerance) -> Integral
where
    F: Fn(f64) -> f64 + Sync,
{
    let eval = |pairs: Vec<(f64, f64)>| -> Vec<Segment> {
        if tol.parallel && pairs.len() > 1 {
            pairs
                .into_par_iter()
                .map(|(a, b)| kronrod(f, a, b))
                .collect()
        } else {
            pairs.into_iter().map(|(a, b)| kronrod(f, a, b)).collect()
        }
    };
    let initial: Vec<(f64, f64)> = breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    if initial.is_empty() {
        return Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            segments: 0,
        };
    }
    let mut evaluations = initial.len() * NODES;
    let mut segments = eval(initial);
    loop {
        let value = neumaier_sum(segments.iter().map(|s| s.value));
        let error = neumaier_sum(segments.iter().map(|s| s.error));
        let target = tol.absolute.max(tol.relative * value.abs());
        if error <= target || segments.len() >= tol.max_segments {
            return Integral {
                value,
                error,
                evaluations,
                segments: segments.len(),
            };
        }
        let share = target / segments.len() as f64;
        let mut split = Vec::new();
        let mut keep = Vec::with_capacity(segments.len());
        for (i, s) in segments.iter().enumerate() {
            let mid = 0.5 * (s.a + s.b);
            if s.error > share && mid > s.a && mid < s.b {
                split.push((i, (s.a, mid), (mid, s.b)));
            } else {
                keep.push(i);
            }
        }
        if split.is_empty() {
            return Integral {
                value,
                error,
                evaluations,
                segments: segments.len(),
            };
        }
        let pairs: Vec<(f64, f64)> = split.iter().flat_map(|(_, l, r)| [*l, *r]).collect();
        evaluations += pairs.len() * NODES;
        let fresh = eval(pairs);
        let mut next = Vec::with_capacity(segments.len() + split.len());
        let mut fresh_iter = fresh.into_iter();
        let mut split_iter = split.iter().peekable();
        for (i, s) in segments.iter().enumerate() {
            if split_iter.peek().is_some_and(|(j, _, _)| *j == i) {
                split_iter.next();
                next.extend(fresh_iter.by_ref().take(2));
            } else {
                next.push(*s);
            }
        }
        segments = next;
    }
}

/// Breakpoints on `[a, b]` such that `phase` changes by at most `max_step`
/// within each panel, judged on `samples` equally spaced probes.
pub fn phase_panels(
    phase: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    samples: usize,
    max_step: f64,
) -> Vec<f64> {
    if !(b > a) {
        return vec![a, b];
    }
    let samples = samples.max(2);
    let mut points = vec![a];
    let mut accumulated = 0.0;
    let mut prev = phase(a);
    for i in 1..samples {
        let x = a + (b - a) * i as f64 / (samples - 1) as f64;
        let p = phase(x);
        accumulated += (p - prev).abs();
        prev = p;
        if accumulated >= max_step && i + 1 < samples {
            points.push(x);
            accumulated = 0.0;
        }
    }
    points.push(b);
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(
            &|x: f64| x.powi(6) - 2.0 * x.powi(3),
            &[0.0, 2.0],
            Tolerance::default(),
        );
        assert!((r.value - (128.0 / 7.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn sinc_squared_integral() {
        let sinc2 = |x: f64| {
            if x.abs() < 1e-8 {
                1.0
            } else {
                (x.sin() / x).powi(2)
            }
        };
        let bp = phase_panels(|x| x, -2000.0, 2000.0, 4001, std::f64::consts::PI);
        let r = integrate(
            &sinc2,
            &bp,
            Tolerance {
                relative: 1e-10,
                ..Default::default()
            },
        );
        // π minus the two tails, each ≈ 1/(2·2000).
        let expect = std::f64::consts::PI - 2.0 * (1.0 / 4000.0);
        assert!((r.value - expect).abs() < 2e-7, "{}", r.value - expect);
    }

    #[test]
    fn parallel_matches_serial() {
        let f = |x: f64| (x * x).sin() / (1.0 + x * x);
        let bp: Vec<f64> = (0..=64).map(|i| i as f64 * 0.5).collect();
        let s = integrate(
            &f,
            &bp,
            Tolerance {
                relative: 1e-12,
                ..Default::default()
            },
        );
        let p = integrate(
            &f,
            &bp,
            Tolerance {
                relative: 1e-12,
                parallel: true,
                ..Default::default()
            },
        );
        assert_eq!(s.value.to_bits(), p.value.to_bits());
    }

    #[test]
    fn compensated_sum() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }
}
