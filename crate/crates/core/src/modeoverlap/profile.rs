use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{omega_from_wavelength, wavelength_from_omega};

const MIN_POINTS: usize = 16;

/// Uniform transverse lattice. Points are stored row-major, `idx = iy·nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    /// m
    pub dx: f64,
    /// m
    pub dy: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates relative to the grid center.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let cx = 0.5 * (self.nx - 1) as f64;
        let cy = 0.5 * (self.ny - 1) as f64;
        (0..self.ny).flat_map(move |iy| {
            (0..self.nx).map(move |ix| ((ix as f64 - cx) * self.dx, (iy as f64 - cy) * self.dy))
        })
    }

    /// Composite Simpson rule over the whole lattice.
    pub fn simpson(&self, f: impl Fn(usize) -> f64) -> f64 {
        let wx = simpson_weights(self.nx, self.dx);
        let wy = simpson_weights(self.ny, self.dy);
        let mut total = 0.0;
        for (iy, wy) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (ix, wx) in wx.iter().enumerate() {
                row += wx * f(iy * self.nx + ix);
            }
            total += wy * row;
        }
        total
    }

    /// Plain Riemann sum, used as a cross-check on Simpson.
    pub fn riemann(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.len()).map(f).sum::<f64>() * self.dx * self.dy
    }
}

/// Simpson 1/3 weights, finishing with a 3/8 panel when the point count is even.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let simple_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i + 2 <= simple_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if n.is_multiple_of(2) {
        let s = n - 4;
        for (k, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
            w[s + k] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// Local group index: one modal value, or a per-point map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupIndexMap {
    Uniform(f64),
    Map(Vec<f64>),
}

impl GroupIndexMap {
    pub fn at(&self, idx: usize) -> f64 {
        match self {
            GroupIndexMap::Uniform(v) => *v,
            GroupIndexMap::Map(m) => m[idx],
        }
    }
}

/// Transverse electric-field profile of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub band_label: String,
    pub grid: Grid,
    /// `(Ex, Ey, Ez)` per point, arbitrary common scale.
    pub e_field: Vec<[Complex64; 3]>,
    /// Material index `n(x, y)`.
    pub index_map: Vec<f64>,
    pub group_index: GroupIndexMap,
    /// rad/s
    pub omega: f64,
    /// Reference index `n̄` of the band.
    pub n_bar: f64,
    /// Modal group index, `c/v̄`.
    pub modal_group_index: f64,
}

impl ModeProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidProfile {
            band: self.band_label.clone(),
            reason,
        };
        let g = &self.grid;
        if !(g.dx > 0.0 && g.dy > 0.0) {
            return Err(bad(format!(
                "grid spacings must be positive, got {} and {}",
                g.dx, g.dy
            )));
        }
        if g.nx < MIN_POINTS || g.ny < MIN_POINTS {
            return Err(bad(format!(
                "grid is {}×{}, at least {MIN_POINTS}×{MIN_POINTS} is needed",
                g.nx, g.ny
            )));
        }
        if self.e_field.len() != g.len() || self.index_map.len() != g.len() {
            return Err(bad(format!(
                "expected {} points, found {} field and {} index values",
                g.len(),
                self.e_field.len(),
                self.index_map.len()
            )));
        }
        if let GroupIndexMap::Map(m) = &self.group_index {
            if m.len() != g.len() {
                return Err(bad(format!("group-index map has {} points", m.len())));
            }
        }
        if let Some(i) = self.index_map.iter().position(|&n| !(n >= 1.0)) {
            return Err(bad(format!("index map below 1 at point {i}")));
        }
        if !(self.omega > 0.0 && self.n_bar > 0.0 && self.modal_group_index > 0.0) {
            return Err(bad("frequency, n̄ and group index must be positive".into()));
        }
        if self
            .e_field
            .iter()
            .all(|e| e.iter().all(|c| c.norm_sqr() == 0.0))
        {
            return Err(bad("field is identically zero".into()));
        }
        Ok(())
    }

    /// x-polarized Gaussian `exp(−r²/2w²)` in a uniform unit-index medium.
    pub fn gaussian(
        label: &str,
        omega: f64,
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        w: f64,
    ) -> Self {
        let grid = Grid { nx, ny, dx, dy };
        let e_field = grid
            .points()
            .map(|(x, y)| {
                let a = (-(x * x + y * y) / (2.0 * w * w)).exp();
                [
                    Complex64::new(a, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ]
            })
            .collect();
        Self {
            band_label: label.to_string(),
            grid,
            e_field,
            index_map: vec![1.0; grid.len()],
            group_index: GroupIndexMap::Uniform(1.0),
            omega,
            n_bar: 1.0,
            modal_group_index: 1.0,
        }
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for e in &mut self.e_field {
            for c in e.iter_mut() {
                *c *= factor;
            }
        }
        self
    }

    /// Multiply every component by a complex factor.
    pub fn phased(mut self, factor: Complex64) -> Self {
        for e in &mut self.e_field {
            for c in e.iter_mut() {
                *c *= factor;
            }
        }
        self
    }

    /// Translate the field by whole grid steps (nearest), zero-filling.
    pub fn shifted(mut self, sx: f64, sy: f64) -> Self {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let ox = (sx / self.grid.dx).round() as isize;
        let oy = (sy / self.grid.dy).round() as isize;
        let zero = [Complex64::new(0.0, 0.0); 3];
        let mut out = vec![zero; self.e_field.len()];
        for iy in 0..ny {
            for ix in 0..nx {
                let (tx, ty) = (ix + ox, iy + oy);
                if (0..nx).contains(&tx) && (0..ny).contains(&ty) {
                    out[(ty * nx + tx) as usize] = self.e_field[(iy * nx + ix) as usize];
                }
            }
        }
        self.e_field = out;
        self
    }

    /// Rotate the transverse polarization by `angle` about z.
    pub fn rotated_polarization(mut self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        for e in &mut self.e_field {
            let (ex, ey) = (e[0], e[1]);
            e[0] = ex * c - ey * s;
            e[1] = ex * s + ey * c;
        }
        self
    }

    /// Parse the whitespace-separated profile format: a `key value` header
    /// (`nx`, `ny`, `dx_um`, `dy_um`, `lambda_um`, `band`, optional `n_eff`
    /// and `n_g`), then one row per point:
    /// `x_idx y_idx Re(Ex) Im(Ex) Re(Ey) Im(Ey) Re(Ez) Im(Ez) n [n_g]`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header = std::collections::BTreeMap::<String, String>::new();
        let mut rows = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let first = line.chars().next().unwrap_or(' ');
            if first.is_ascii_alphabetic() {
                let mut parts = line.splitn(2, |c: char| c.is_whitespace() || c == '=');
                let key = parts.next().unwrap_or_default().trim().to_string();
                let value = parts
                    .next()
                    .unwrap_or_default()
                    .trim()
                    .trim_start_matches('=')
                    .trim()
                    .to_string();
                header.insert(key, value);
            } else {
                rows.push((lineno + 1, line));
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .ok_or_else(|| Error::Parse(format!("mode profile header is missing `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            get(k)?
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("header `{k}` is not a number")))
        };
        let nx = num("nx")? as usize;
        let ny = num("ny")? as usize;
        let grid = Grid {
            nx,
            ny,
            dx: num("dx_um")? * 1e-6,
            dy: num("dy_um")? * 1e-6,
        };
        let omega = omega_from_wavelength(num("lambda_um")? * 1e-6);
        let band_label = get("band")?.clone();
        let n_bar = if header.contains_key("n_eff") {
            num("n_eff")?
        } else {
            1.0
        };
        let modal_group_index = if header.contains_key("n_g") {
            num("n_g")?
        } else {
            1.0
        };

        let zero = [Complex64::new(0.0, 0.0); 3];
        let mut e_field = vec![zero; grid.len()];
        let mut index_map = vec![f64::NAN; grid.len()];
        let mut ng_map: Option<Vec<f64>> = None;
        for (lineno, line) in rows {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| Error::Parse(format!("line {lineno}: malformed number")))?;
            if vals.len() != 9 && vals.len() != 10 {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected 9 or 10 columns, found {}",
                    vals.len()
                )));
            }
            let (ix, iy) = (vals[0] as usize, vals[1] as usize);
            if ix >= nx || iy >= ny || vals[0] < 0.0 || vals[1] < 0.0 {
                return Err(Error::Parse(format!(
                    "line {lineno}: point ({}, {}) is outside the grid",
                    vals[0], vals[1]
                )));
            }
            let idx = iy * nx + ix;
            e_field[idx] = [
                Complex64::new(vals[2], vals[3]),
                Complex64::new(vals[4], vals[5]),
                Complex64::new(vals[6], vals[7]),
            ];
            index_map[idx] = vals[8];
            if vals.len() == 10 {
                ng_map.get_or_insert_with(|| vec![modal_group_index; grid.len()])[idx] = vals[9];
            }
        }
        if let Some(i) = index_map.iter().position(|v| v.is_nan()) {
            return Err(Error::Parse(format!(
                "point ({}, {}) is missing",
                i % nx.max(1),
                i / nx.max(1)
            )));
        }
        let profile = Self {
            band_label,
            grid,
            e_field,
            index_map,
            group_index: ng_map.map_or(
                GroupIndexMap::Uniform(modal_group_index),
                GroupIndexMap::Map,
            ),
            omega,
            n_bar,
            modal_group_index,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let g = &self.grid;
        let _ = writeln!(out, "nx {}\nny {}", g.nx, g.ny);
        let _ = writeln!(out, "dx_um {}\ndy_um {}", g.dx * 1e6, g.dy * 1e6);
        let _ = writeln!(out, "lambda_um {}", wavelength_from_omega(self.omega) * 1e6);
        let _ = writeln!(out, "band {}", self.band_label);
        let _ = writeln!(out, "n_eff {}\nn_g {}", self.n_bar, self.modal_group_index);
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let idx = iy * g.nx + ix;
                let e = &self.e_field[idx];
                let _ = write!(
                    out,
                    "{ix} {iy} {:e} {:e} {:e} {:e} {:e} {:e} {}",
                    e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, self.index_map[idx]
                );
                if let GroupIndexMap::Map(m) = &self.group_index {
                    let _ = write!(out, " {}", m[idx]);
                }
                out.push('\n');
            }
        }
        out
    }
}
