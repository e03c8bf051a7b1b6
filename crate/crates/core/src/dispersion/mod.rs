//! Effective-index tables and the smooth wavenumber model `k(ω)` built on
//! them: group velocity and the dispersion coefficients β₂…β₄.

mod spline;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use spline::{QuinticSpline, Smoothing};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::units::{omega_from_wavelength, wavelength_from_omega};

/// Minimum number of samples per table.
pub const MIN_SAMPLES: usize = 8;

/// Sampled effective index of one spatial-mode band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexTable {
    pub band_label: String,
    /// `(wavelength [m], n_eff)`, wavelength strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub source: String,
}

impl IndexTable {
    pub fn new(band_label: impl Into<String>, samples: Vec<(f64, f64)>) -> Self {
        Self {
            band_label: band_label.into(),
            samples,
            source: String::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let band = &self.band_label;
        if self.samples.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                band: band.clone(),
                found: self.samples.len(),
                required: MIN_SAMPLES,
            });
        }
        for (row, &(lambda, n)) in self.samples.iter().enumerate() {
            if !(lambda > 0.0) || (row > 0 && !(lambda > self.samples[row - 1].0)) {
                return Err(Error::NonMonotone {
                    band: band.clone(),
                    row,
                });
            }
            if !(n > 0.0) {
                return Err(Error::NonPositiveIndex {
                    band: band.clone(),
                    row,
                });
            }
        }
        Ok(())
    }

    /// Parse the `wavelength_um,n_eff` CSV format. A `# band: NAME` comment
    /// sets the band label, otherwise `fallback_label` is used.
    pub fn parse_csv(text: &str, fallback_label: &str) -> Result<Self> {
        let mut label = None;
        let mut source = Vec::new();
        let mut header_seen = false;
        let mut samples = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(b) = comment.strip_prefix("band:") {
                    label = Some(b.trim().to_string());
                } else if !comment.is_empty() {
                    source.push(comment.to_string());
                }
                continue;
            }
            if !header_seen {
                let cols: Vec<_> = line.split(',').map(str::trim).collect();
                if cols != ["wavelength_um", "n_eff"] {
                    return Err(Error::Parse(format!(
                        "line {}: expected header `wavelength_um,n_eff`, found `{line}`",
                        lineno + 1
                    )));
                }
                header_seen = true;
                continue;
            }
            let mut cols = line.split(',');
            let parse = |c: Option<&str>| -> Result<f64> {
                c.map(str::trim)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Parse(format!("line {}: malformed row `{line}`", lineno + 1))
                    })
            };
            let lambda_um = parse(cols.next())?;
            let n = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::Parse(format!(
                    "line {}: too many columns",
                    lineno + 1
                )));
            }
            samples.push((lambda_um * 1e-6, n));
        }
        if !header_seen {
            return Err(Error::Parse("missing `wavelength_um,n_eff` header".into()));
        }
        let table = Self {
            band_label: label.unwrap_or_else(|| fallback_label.to_string()),
            samples,
            source: source.join("; "),
        };
        table.validate()?;
        Ok(table)
    }

    /// Read a table, taking the band label from the file stem when no
    /// `# band:` comment is present.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("band");
        Self::parse_csv(&text, stem)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# band: {}", self.band_label);
        if !self.source.is_empty() {
            let _ = writeln!(out, "# {}", self.source);
        }
        out.push_str("wavelength_um,n_eff\n");
        for &(lambda, n) in &self.samples {
            let _ = writeln!(out, "{:.10},{:.15}", lambda * 1e6, n);
        }
        out
    }
}

/// Group velocity and dispersion coefficients at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupQuantities {
    /// m/s
    pub group_velocity: f64,
    pub group_index: f64,
    /// s²/m
    pub beta2: f64,
    /// s³/m
    pub beta3: f64,
    /// s⁴/m
    pub beta4: f64,
}

/// Smooth `k(ω)` for one band, immutable after construction.
#[derive(Debug, Clone)]
pub struct DispersionModel {
    band_label: String,
    spline: QuinticSpline,
    /// Straight line through the end samples, subtracted before fitting.
    line: (f64, f64),
    omega_min: f64,
    omega_max: f64,
    reference_omega: f64,
    reference_k: f64,
}

impl DispersionModel {
    /// Smoothing spline with the weight chosen by cross-validation; the
    /// reference frequency is the center of the range.
    pub fn build(table: &IndexTable) -> Result<Self> {
        Self::build_with(table, Smoothing::default())
    }

    pub fn build_with(table: &IndexTable, smoothing: Smoothing) -> Result<Self> {
        table.validate()?;
        // Longest wavelength first gives increasing ω.
        let mut points: Vec<(f64, f64)> = table
            .samples
            .iter()
            .rev()
            .map(|&(lambda, n)| {
                let w = omega_from_wavelength(lambda);
                (w, n * w / C)
            })
            .collect();
        points.dedup_by(|a, b| a.0 == b.0);
        let (w0, k0) = points[0];
        let (w1, k1) = points[points.len() - 1];
        let slope = (k1 - k0) / (w1 - w0);
        let x: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points
            .iter()
            .map(|p| p.1 - (k0 + slope * (p.0 - w0)))
            .collect();
        let spline = QuinticSpline::fit(&x, &y, smoothing)?;
        let mut model = Self {
            band_label: table.band_label.clone(),
            spline,
            line: (k0 - slope * w0, slope),
            omega_min: w0,
            omega_max: w1,
            reference_omega: 0.5 * (w0 + w1),
            reference_k: 0.0,
        };
        model.reference_k = model.eval(model.reference_omega);
        Ok(model)
    }

    /// The same model expanded about `omega`.
    pub fn at_reference(mut self, omega: f64) -> Result<Self> {
        self.check(omega)?;
        self.reference_omega = omega;
        self.reference_k = self.eval(omega);
        Ok(self)
    }

    pub fn band_label(&self) -> &str {
        &self.band_label
    }

    pub fn valid_range(&self) -> (f64, f64) {
        (self.omega_min, self.omega_max)
    }

    pub fn reference_omega(&self) -> f64 {
        self.reference_omega
    }

    pub fn reference_k(&self) -> f64 {
        self.reference_k
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.omega_min * (1.0 - 1e-14) && omega <= self.omega_max * (1.0 + 1e-14)
    }

    fn check(&self, omega: f64) -> Result<()> {
        if self.contains(omega) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                band: self.band_label.clone(),
                omega,
                min: self.omega_min,
                max: self.omega_max,
            })
        }
    }

    fn eval(&self, omega: f64) -> f64 {
        self.line.0 + self.line.1 * omega + self.spline.value(omega)
    }

    /// `k(ω)` in rad/m.
    pub fn wavenumber(&self, omega: f64) -> Result<f64> {
        self.check(omega)?;
        Ok(self.eval(omega))
    }

    /// Effective index `c·k/ω`.
    pub fn effective_index(&self, omega: f64) -> Result<f64> {
        Ok(self.wavenumber(omega)? * C / omega)
    }

    /// `∂ⁿk/∂ωⁿ` for n = 0..=4.
    pub fn derivatives(&self, omega: f64) -> Result<[f64; 5]> {
        self.check(omega)?;
        let mut d = self.spline.derivatives::<5>(omega);
        d[0] += self.line.0 + self.line.1 * omega;
        d[1] += self.line.1;
        Ok(d)
    }

    pub fn group_quantities(&self, omega: f64) -> Result<GroupQuantities> {
        let d = self.derivatives(omega)?;
        if !(d[1] > 0.0) {
            return Err(Error::InvalidParameter {
                name: "group velocity",
                reason: format!(
                    "band `{}` has non-positive ∂k/∂ω at {omega:.6e} rad/s",
                    self.band_label
                ),
            });
        }
        Ok(GroupQuantities {
            group_velocity: 1.0 / d[1],
            group_index: C * d[1],
            beta2: d[2],
            beta3: d[3],
            beta4: d[4],
        })
    }

    /// Truncated Taylor series of `k(ω_J + δω) − k_J` about the reference
    /// frequency, keeping terms up to `order` (1..=4).
    pub fn taylor_mismatch(&self, delta: f64, order: usize) -> Result<f64> {
        if !(1..=4).contains(&order) {
            return Err(Error::InvalidParameter {
                name: "order",
                reason: format!("expected 1..=4, got {order}"),
            });
        }
        self.check(self.reference_omega + delta)?;
        let d = self.derivatives(self.reference_omega)?;
        let mut sum = 0.0;
        let mut term = 1.0;
        for (n, dn) in d.iter().enumerate().skip(1).take(order) {
            term *= delta / n as f64;
            sum += dn * term;
        }
        Ok(sum)
    }

    /// `k(ω_J + δω) − k_J` evaluated on the full interpolant.
    pub fn mismatch_exact(&self, delta: f64) -> Result<f64> {
        Ok(self.wavenumber(self.reference_omega + delta)? - self.reference_k)
    }

    /// Sample the model back into an index table over its own range.
    pub fn tabulate(&self, points: usize) -> IndexTable {
        let lmin = wavelength_from_omega(self.omega_max);
        let lmax = wavelength_from_omega(self.omega_min);
        let samples = (0..points)
            .map(|i| {
                let lambda = lmin + (lmax - lmin) * i as f64 / (points - 1) as f64;
                let w = omega_from_wavelength(lambda).clamp(self.omega_min, self.omega_max);
                (lambda, self.eval(w) * C / w)
            })
            .collect();
        IndexTable::new(self.band_label.clone(), samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::um;

    fn constant_table(n: f64) -> IndexTable {
        let samples = (0..30).map(|i| (um(1.0 + i as f64 / 29.0), n)).collect();
        IndexTable::new("const", samples)
    }

    #[test]
    fn constant_index_is_dispersionless() {
        let m = DispersionModel::build(&constant_table(2.0)).unwrap();
        let w = omega_from_wavelength(um(1.4));
        let k = m.wavenumber(w).unwrap();
        assert!((k / (2.0 * w / C) - 1.0).abs() < 1e-12);
        let g = m.group_quantities(w).unwrap();
        assert!((g.group_index - 2.0).abs() < 1e-9);
        // β₂ of a dispersionless medium is zero: compare with the scale
        // β₂ would have for a real waveguide.
        assert!(g.beta2.abs() < 1e-33);
    }

    #[test]
    fn round_trip_at_samples() {
        let samples: Vec<_> = (0..40)
            .map(|i| {
                let l = 1.0 + i as f64 * 0.04;
                (um(l), 1.9 - 0.12 * (l - 1.0) + 0.01 * (l - 1.0).powi(2))
            })
            .collect();
        let t = IndexTable::new("f", samples.clone());
        let m = DispersionModel::build_with(&t, Smoothing::Interpolate).unwrap();
        for (l, n) in samples {
            let w = omega_from_wavelength(l);
            let k = m.wavenumber(w).unwrap();
            assert!((k / (n * w / C) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn extrapolation_is_an_error() {
        let m = DispersionModel::build(&constant_table(2.0)).unwrap();
        let w = omega_from_wavelength(um(0.9));
        assert!(matches!(m.wavenumber(w), Err(Error::OutOfRange { .. })));
        assert!(matches!(
            m.group_quantities(omega_from_wavelength(um(2.1))),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn table_validation() {
        let mut t = constant_table(2.0);
        t.samples.truncate(5);
        assert!(matches!(
            t.validate(),
            Err(Error::TooFewSamples { found: 5, .. })
        ));
        let mut t = constant_table(2.0);
        t.samples.swap(3, 4);
        assert!(matches!(
            t.validate(),
            Err(Error::NonMonotone { row: 4, .. })
        ));
        let mut t = constant_table(2.0);
        t.samples[2].1 = 0.0;
        assert!(matches!(
            t.validate(),
            Err(Error::NonPositiveIndex { row: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip_and_label() {
        let t = constant_table(1.7);
        let text = t.to_csv();
        let back = IndexTable::parse_csv(&text, "ignored").unwrap();
        assert_eq!(back.band_label, "const");
        assert_eq!(back.samples.len(), t.samples.len());
        let unlabeled = "wavelength_um,n_eff\n".to_string()
            + &(0..9)
                .map(|i| format!("{},{}\n", 1.0 + i as f64 * 0.1, 1.8))
                .collect::<String>();
        assert_eq!(
            IndexTable::parse_csv(&unlabeled, "pump")
                .unwrap()
                .band_label,
            "pump"
        );
        assert!(IndexTable::parse_csv("lambda,n\n1,2\n", "x").is_err());
        assert!(IndexTable::parse_csv("wavelength_um,n_eff\n1,abc\n", "x").is_err());
    }

    #[test]
    fn taylor_orders() {
        let m = DispersionModel::build(&constant_table(2.0)).unwrap();
        assert_eq!(m.taylor_mismatch(0.0, 4).unwrap(), 0.0);
        assert!(m.taylor_mismatch(1e12, 5).is_err());
        assert!(m.taylor_mismatch(1e12, 0).is_err());
    }
}
