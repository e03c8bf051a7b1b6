//! Normalization constants, effective areas and nonlinear parameters γ from
//! sampled transverse mode profiles.

mod profile;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use profile::{Grid, GroupIndexMap, ModeProfile};

use crate::constants::{C, EPSILON_0};
use crate::error::{Error, Result};
use crate::{Band, Process};

/// Which fields enter the overlap conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjugation {
    /// `e₁* e₂* e₃ e₄`
    TwoDagger,
    /// `e₁* e₂* e₃* e₄`
    ThreeDagger,
}

/// Relative χ₃ distribution `χ₃(x, y)/χ̄₃` and its tensor structure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Chi3Map {
    /// Per-point relative strength, row-major like the profiles. `None`
    /// means 1 everywhere.
    pub strength: Option<Vec<f64>>,
    pub contraction: Contraction,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Contraction {
    /// `(1/3)[(a·b)(c·d) + (a·c)(b·d) + (a·d)(b·c)]`, which reduces to the
    /// plain product when all fields share one polarization.
    #[default]
    Isotropic,
    /// Full rank-4 tensor, index `((i·3 + j)·3 + k)·3 + l`.
    Full(Box<[f64; 81]>),
}

impl Chi3Map {
    pub fn uniform() -> Self {
        Self::default()
    }

    /// Strength 1 where `core(x, y)` holds, 0 elsewhere.
    pub fn core(grid: &Grid, core: impl Fn(f64, f64) -> bool) -> Self {
        let strength = grid
            .points()
            .map(|(x, y)| if core(x, y) { 1.0 } else { 0.0 })
            .collect();
        Self {
            strength: Some(strength),
            contraction: Contraction::Isotropic,
        }
    }

    fn at(&self, idx: usize) -> f64 {
        self.strength.as_ref().map_or(1.0, |s| s[idx])
    }

    fn contract(
        &self,
        a: &[Complex64; 3],
        b: &[Complex64; 3],
        c: &[Complex64; 3],
        d: &[Complex64; 3],
    ) -> Complex64 {
        match &self.contraction {
            Contraction::Isotropic => {
                (dot(a, b) * dot(c, d) + dot(a, c) * dot(b, d) + dot(a, d) * dot(b, c)) / 3.0
            }
            Contraction::Full(t) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    for j in 0..3 {
                        let ab = a[i] * b[j];
                        for k in 0..3 {
                            let abc = ab * c[k];
                            for l in 0..3 {
                                acc += t[((i * 3 + j) * 3 + k) * 3 + l] * abc * d[l];
                            }
                        }
                    }
                }
                acc
            }
        }
    }
}

fn dot(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A profile together with the reference index `n̄` and group velocity `v̄`
/// its normalization is taken against.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedMode<'a> {
    pub profile: &'a ModeProfile,
    pub n_bar: f64,
    pub v_bar: f64,
}

impl<'a> NormalizedMode<'a> {
    /// Reference values from the profile's own header.
    pub fn new(profile: &'a ModeProfile) -> Self {
        Self {
            profile,
            n_bar: profile.n_bar,
            v_bar: C / profile.modal_group_index,
        }
    }
}

/// Effective area and overlap phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    /// m²
    pub area: f64,
    /// rad
    pub phase: f64,
}

/// `𝒩 = sqrt(∬ |e|² (n/n̄)/(v_g/v̄) dx dy)` by composite Simpson integration.
pub fn normalization_constant(mode: &ModeProfile, n_bar: f64, v_bar: f64) -> Result<f64> {
    mode.validate()?;
    if !(n_bar > 0.0 && v_bar > 0.0) {
        return Err(Error::InvalidParameter {
            name: "reference",
            reason: format!("n̄ = {n_bar}, v̄ = {v_bar} must be positive"),
        });
    }
    let integral = mode.grid.simpson(|idx| {
        let e = &mode.e_field[idx];
        let intensity: f64 = e.iter().map(|c| c.norm_sqr()).sum();
        let v_local = C / mode.group_index.at(idx);
        intensity * (mode.index_map[idx] / n_bar) / (v_local / v_bar)
    });
    if !(integral > 0.0) {
        return Err(Error::InvalidProfile {
            band: mode.band_label.clone(),
            reason: "field is identically zero".into(),
        });
    }
    Ok(integral.sqrt())
}

fn check_grids(modes: &[NormalizedMode<'_>; 4], chi3: &Chi3Map) -> Result<()> {
    let grid = &modes[0].profile.grid;
    for m in &modes[1..] {
        if m.profile.grid != *grid {
            return Err(Error::GridMismatch(format!(
                "`{}` is {}×{} at ({:.3e}, {:.3e}) m, `{}` is {}×{} at ({:.3e}, {:.3e}) m",
                modes[0].profile.band_label,
                grid.nx,
                grid.ny,
                grid.dx,
                grid.dy,
                m.profile.band_label,
                m.profile.grid.nx,
                m.profile.grid.ny,
                m.profile.grid.dx,
                m.profile.grid.dy
            )));
        }
    }
    if let Some(s) = &chi3.strength {
        if s.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "χ₃ map has {} points, profiles have {}",
                s.len(),
                grid.len()
            )));
        }
    }
    Ok(())
}

/// `e^{iΦ}/𝒜` for one set of four modes; `None` when the overlap vanishes.
fn inverse_area(
    modes: &[NormalizedMode<'_>; 4],
    pattern: Conjugation,
    chi3: &Chi3Map,
) -> Result<Complex64> {
    check_grids(modes, chi3)?;
    let mut norm = 1.0;
    for m in modes {
        norm *= normalization_constant(m.profile, m.n_bar, m.v_bar)?;
    }
    let conj_count = match pattern {
        Conjugation::TwoDagger => 2,
        Conjugation::ThreeDagger => 3,
    };
    let grid = &modes[0].profile.grid;
    let field = |slot: usize, idx: usize| -> [Complex64; 3] {
        let e = modes[slot].profile.e_field[idx];
        if slot < conj_count {
            [e[0].conj(), e[1].conj(), e[2].conj()]
        } else {
            e
        }
    };
    let integrand = |idx: usize| {
        let s = chi3.at(idx);
        if s == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        s * chi3.contract(
            &field(0, idx),
            &field(1, idx),
            &field(2, idx),
            &field(3, idx),
        )
    };
    let re = grid.simpson(|idx| integrand(idx).re);
    let im = grid.simpson(|idx| integrand(idx).im);
    // Scale against which a vanishing overlap is judged.
    let magnitude = grid.simpson(|idx| {
        let s = chi3.at(idx).abs();
        s * (0..4)
            .map(|slot| {
                modes[slot].profile.e_field[idx]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .product::<f64>()
    });
    let value = Complex64::new(re, im);
    if magnitude == 0.0 || value.norm() <= 1e-12 * magnitude {
        return Err(Error::VanishingOverlap);
    }
    Ok(value / norm)
}

/// Effective area and phase for a straight waveguide.
pub fn effective_area_waveguide(
    modes: &[NormalizedMode<'_>; 4],
    pattern: Conjugation,
    chi3: &Chi3Map,
) -> Result<Overlap> {
    let inv = inverse_area(modes, pattern, chi3)?;
    Ok(Overlap {
        area: 1.0 / inv.norm(),
        phase: inv.arg(),
    })
}

/// Ring variant for azimuthally uniform profiles: the waveguide overlap times
/// `(1/𝓛)∮ e^{iΔκζ} dζ`, with `Δκ = κ₁ + κ₂ − κ₃ − κ₄` (two daggers) or
/// `κ₁ + κ₂ + κ₃ − κ₄` (three daggers).
pub fn effective_area_ring(
    modes: &[NormalizedMode<'_>; 4],
    kappa: [f64; 4],
    circumference: f64,
    pattern: Conjugation,
    chi3: &Chi3Map,
) -> Result<Overlap> {
    if !(circumference > 0.0) {
        return Err(Error::InvalidParameter {
            name: "circumference",
            reason: format!("must be positive, got {circumference}"),
        });
    }
    let dk = match pattern {
        Conjugation::TwoDagger => kappa[0] + kappa[1] - kappa[2] - kappa[3],
        Conjugation::ThreeDagger => kappa[0] + kappa[1] + kappa[2] - kappa[3],
    };
    let factor = azimuthal_factor(dk * circumference);
    if factor.norm() < 1e-9 {
        return Err(Error::VanishingOverlap);
    }
    let inv = inverse_area(modes, pattern, chi3)? * factor;
    Ok(Overlap {
        area: 1.0 / inv.norm(),
        phase: inv.arg(),
    })
}

/// `(e^{iθ} − 1)/(iθ)`, equal to 1 at θ = 0.
fn azimuthal_factor(theta: f64) -> Complex64 {
    if theta.abs() < 1e-6 {
        return Complex64::new(1.0 - theta * theta / 6.0, theta / 2.0);
    }
    let i = Complex64::i();
    ((i * theta).exp() - 1.0) / (i * theta)
}

/// General nonlinear parameter in (W·m)⁻¹:
/// `3(ω₁ω₂ω₃ω₄)^{1/4} χ̄₃ e^{iΦ} / (4ε₀ (n̄₁n̄₂n̄₃n̄₄)^{1/2} c² 𝒜)`.
pub fn gamma_general(
    omega: [f64; 4],
    n_bar: [f64; 4],
    chi3_bar: f64,
    overlap: Overlap,
) -> Complex64 {
    let omega_prod: f64 = omega.iter().product();
    let n_prod: f64 = n_bar.iter().product();
    let magnitude = 3.0 * omega_prod.powf(0.25) * chi3_bar
        / (4.0 * EPSILON_0 * n_prod.sqrt() * C * C * overlap.area);
    Complex64::from_polar(magnitude, overlap.phase)
}

/// Process-specific prefactors applied to a general γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaKind {
    /// From `γ_PPPP`; prefactor 1.
    Spm,
    /// From `γ_PGPG`: `√(ω_G/ω_P)`.
    Xpm { omega_band: f64, omega_pump: f64 },
    /// From `γ_FFFP`: `(ω_F³ω_P)^{1/4}/ω_F`.
    Degenerate {
        omega_fundamental: f64,
        omega_pump: f64,
    },
    /// From `γ_GGSP`: `(ω_P/ω_S)^{1/4}`.
    Stimulated { omega_pump: f64, omega_seed: f64 },
    /// From `γ_ḠSSP`: `(ω_P ω_Ḡ/ω_S²)^{1/4}`.
    DoublyStimulated {
        omega_pump: f64,
        omega_idler: f64,
        omega_seed: f64,
    },
    /// Ring non-degenerate spontaneous, from `γ_GGSP`:
    /// `(ω_G²ω_Sω_P)^{1/4}/(ω_G²ω_S)^{1/3}`.
    NonDegenerate {
        omega_generated: f64,
        omega_seed: f64,
        omega_pump: f64,
    },
}

impl GammaKind {
    pub fn prefactor(self) -> f64 {
        match self {
            GammaKind::Spm => 1.0,
            GammaKind::Xpm {
                omega_band,
                omega_pump,
            } => (omega_band / omega_pump).sqrt(),
            GammaKind::Degenerate {
                omega_fundamental: f,
                omega_pump: p,
            } => (f * f * f * p).powf(0.25) / f,
            GammaKind::Stimulated {
                omega_pump,
                omega_seed,
            } => (omega_pump / omega_seed).powf(0.25),
            GammaKind::DoublyStimulated {
                omega_pump,
                omega_idler,
                omega_seed,
            } => (omega_pump * omega_idler / (omega_seed * omega_seed)).powf(0.25),
            GammaKind::NonDegenerate {
                omega_generated: g,
                omega_seed: s,
                omega_pump: p,
            } => (g * g * s * p).powf(0.25) / (g * g * s).cbrt(),
        }
    }
}

pub fn gamma_process(base: Complex64, kind: GammaKind) -> Result<Complex64> {
    let f = kind.prefactor();
    if !f.is_finite() || f <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "process frequencies",
            reason: format!("{kind:?} gives prefactor {f}"),
        });
    }
    Ok(base * f)
}

/// Nonlinear parameters consumed by the phase-matching and rate modules.
/// Rates use magnitudes only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearParameterSet {
    /// m²/V², when the set was derived from profiles.
    pub chi3_bar: Option<f64>,
    pub n_bar: BTreeMap<Band, f64>,
    /// Effective areas keyed by the overlap they describe, e.g. `pump·fundamental`.
    pub overlaps: BTreeMap<String, Overlap>,
    pub spm: Complex64,
    /// Pump-induced cross-phase modulation on each non-pump band.
    pub xpm: BTreeMap<Band, Complex64>,
    pub triplet: BTreeMap<Process, Complex64>,
}

impl NonlinearParameterSet {
    /// Real γ values entered directly; one XPM value for every band and one
    /// triplet value for every process.
    pub fn direct(triplet: f64, spm: f64, xpm: f64) -> Self {
        let c = |v: f64| Complex64::new(v, 0.0);
        Self {
            chi3_bar: None,
            n_bar: BTreeMap::new(),
            overlaps: BTreeMap::new(),
            spm: c(spm),
            xpm: [Band::Fundamental, Band::Generated, Band::Seed, Band::Idler]
                .into_iter()
                .map(|b| (b, c(xpm)))
                .collect(),
            triplet: Process::ALL.into_iter().map(|p| (p, c(triplet))).collect(),
        }
    }

    pub fn spm(&self) -> f64 {
        self.spm.norm()
    }

    pub fn xpm(&self, band: Band) -> f64 {
        self.xpm.get(&band).map_or(0.0, |g| g.norm())
    }

    /// `|γ|` for a triplet process.
    pub fn triplet(&self, process: Process) -> Result<f64> {
        match self.triplet.get(&process) {
            Some(g) if g.norm() > 0.0 && g.norm().is_finite() => Ok(g.norm()),
            _ => Err(Error::MissingGamma(process.label().to_string())),
        }
    }

    pub fn with_spm(mut self, spm: f64) -> Self {
        self.spm = Complex64::new(spm, 0.0);
        self
    }

    pub fn with_xpm(mut self, xpm: f64) -> Self {
        for g in self.xpm.values_mut() {
            *g = Complex64::new(xpm, 0.0);
        }
        self
    }

    /// Derive every γ from profiles. `profiles` must contain the pump and
    /// whichever of the other bands are present; processes whose bands are
    /// missing are skipped.
    pub fn from_profiles(
        profiles: &BTreeMap<Band, ModeProfile>,
        chi3_bar: f64,
        chi3: &Chi3Map,
    ) -> Result<Self> {
        let pump = profiles
            .get(&Band::Pump)
            .ok_or(Error::MissingBand(Band::Pump))?;
        let norm = |b: Band| profiles.get(&b).map(NormalizedMode::new);
        let n_bar: BTreeMap<Band, f64> = profiles.iter().map(|(b, p)| (*b, p.n_bar)).collect();
        let p = NormalizedMode::new(pump);
        let mut overlaps = BTreeMap::new();
        let mut general =
            |bands: [Band; 4], modes: [NormalizedMode<'_>; 4], pattern| -> Result<Complex64> {
                let ov = effective_area_waveguide(&modes, pattern, chi3)?;
                let key = bands
                    .iter()
                    .map(|b| b.label())
                    .collect::<Vec<_>>()
                    .join("·");
                overlaps.insert(key, ov);
                let omega = modes.map(|m| m.profile.omega);
                let nb = modes.map(|m| m.n_bar);
                Ok(gamma_general(omega, nb, chi3_bar, ov))
            };

        let spm = general([Band::Pump; 4], [p; 4], Conjugation::TwoDagger)?;
        let mut xpm = BTreeMap::new();
        for band in [Band::Fundamental, Band::Generated, Band::Seed, Band::Idler] {
            if let Some(m) = norm(band) {
                let base = general(
                    [Band::Pump, band, Band::Pump, band],
                    [p, m, p, m],
                    Conjugation::TwoDagger,
                )?;
                let kind = GammaKind::Xpm {
                    omega_band: m.profile.omega,
                    omega_pump: pump.omega,
                };
                xpm.insert(band, gamma_process(base, kind)?);
            }
        }

        let mut triplet = BTreeMap::new();
        if let Some(f) = norm(Band::Fundamental) {
            let base = general(
                [
                    Band::Fundamental,
                    Band::Fundamental,
                    Band::Fundamental,
                    Band::Pump,
                ],
                [f, f, f, p],
                Conjugation::ThreeDagger,
            )?;
            let kind = GammaKind::Degenerate {
                omega_fundamental: f.profile.omega,
                omega_pump: pump.omega,
            };
            triplet.insert(Process::SpDegenerate, gamma_process(base, kind)?);
        }
        if let (Some(g), Some(s)) = (norm(Band::Generated), norm(Band::Seed)) {
            let base = general(
                [Band::Generated, Band::Generated, Band::Seed, Band::Pump],
                [g, g, s, p],
                Conjugation::ThreeDagger,
            )?;
            let st = GammaKind::Stimulated {
                omega_pump: pump.omega,
                omega_seed: s.profile.omega,
            };
            let nd = GammaKind::NonDegenerate {
                omega_generated: g.profile.omega,
                omega_seed: s.profile.omega,
                omega_pump: pump.omega,
            };
            triplet.insert(Process::Stimulated, gamma_process(base, st)?);
            triplet.insert(Process::SpNonDegenerate, gamma_process(base, nd)?);
        }
        if let (Some(i), Some(s)) = (norm(Band::Idler), norm(Band::Seed)) {
            let base = general(
                [Band::Idler, Band::Seed, Band::Seed, Band::Pump],
                [i, s, s, p],
                Conjugation::ThreeDagger,
            )?;
            let kind = GammaKind::DoublyStimulated {
                omega_pump: pump.omega,
                omega_idler: i.profile.omega,
                omega_seed: s.profile.omega,
            };
            triplet.insert(Process::DoublyStimulated, gamma_process(base, kind)?);
        }

        Ok(Self {
            chi3_bar: Some(chi3_bar),
            n_bar,
            overlaps,
            spm,
            xpm,
            triplet,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{omega_from_wavelength, um};
    use std::f64::consts::PI;

    fn gaussian(w: f64) -> ModeProfile {
        ModeProfile::gaussian(
            "g",
            omega_from_wavelength(um(1.55)),
            129,
            129,
            um(0.05),
            um(0.05),
            w,
        )
    }

    #[test]
    fn gaussian_normalization() {
        let w = um(0.8);
        let m = gaussian(w);
        let n = normalization_constant(&m, 1.0, C).unwrap();
        assert!((n * n / (PI * w * w) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn normalization_is_linear_in_amplitude() {
        let m = gaussian(um(0.8));
        let scaled = m.clone().scaled(2.0);
        let a = normalization_constant(&m, 1.0, C).unwrap();
        let b = normalization_constant(&scaled, 1.0, C).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_rejected() {
        let m = gaussian(um(0.8)).scaled(0.0);
        assert!(normalization_constant(&m, 1.0, C).is_err());
    }

    #[test]
    fn gaussian_area() {
        let w = um(0.8);
        let m = gaussian(w);
        let n = NormalizedMode::new(&m);
        let ov =
            effective_area_waveguide(&[n; 4], Conjugation::TwoDagger, &Chi3Map::uniform()).unwrap();
        assert!((ov.area / (2.0 * PI * w * w) - 1.0).abs() < 1e-6);
        assert!(ov.phase.abs() < 1e-12);
    }

    #[test]
    fn field_outside_core_vanishes() {
        let m = gaussian(um(0.3));
        let chi3 = Chi3Map::core(&m.grid, |x, _| x < um(0.5));
        let shifted = m.clone().shifted(um(4.0), 0.0);
        let n = NormalizedMode::new(&shifted);
        let r = effective_area_waveguide(&[n; 4], Conjugation::TwoDagger, &chi3);
        assert_eq!(r, Err(Error::VanishingOverlap));
    }

    #[test]
    fn ring_orthogonality() {
        let m = gaussian(um(0.8));
        let n = NormalizedMode::new(&m);
        let l = um(750.0);
        let wg = effective_area_waveguide(&[n; 4], Conjugation::ThreeDagger, &Chi3Map::uniform())
            .unwrap();
        let k = 6.5e6;
        let ring = effective_area_ring(
            &[n; 4],
            [k, k, k, 3.0 * k],
            l,
            Conjugation::ThreeDagger,
            &Chi3Map::uniform(),
        )
        .unwrap();
        assert!((ring.area / wg.area - 1.0).abs() < 1e-12);
        let off = 3.0 * k + 2.0 * PI * 3.0 / l;
        let r = effective_area_ring(
            &[n; 4],
            [k, k, k, off],
            l,
            Conjugation::ThreeDagger,
            &Chi3Map::uniform(),
        );
        assert_eq!(r, Err(Error::VanishingOverlap));
    }

    #[test]
    fn grid_mismatch_detected() {
        let a = gaussian(um(0.8));
        let b = ModeProfile::gaussian("b", a.omega, 65, 65, um(0.1), um(0.1), um(0.8));
        let (na, nb) = (NormalizedMode::new(&a), NormalizedMode::new(&b));
        let r = effective_area_waveguide(
            &[na, na, nb, nb],
            Conjugation::TwoDagger,
            &Chi3Map::uniform(),
        );
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn full_tensor_matches_isotropic_for_isotropic_tensor() {
        let mut t = [0.0; 81];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        t[((i * 3 + j) * 3 + k) * 3 + l] =
                            (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k)) / 3.0;
                    }
                }
            }
        }
        let m = gaussian(um(0.8)).rotated_polarization(0.4);
        let n = NormalizedMode::new(&m);
        let iso =
            effective_area_waveguide(&[n; 4], Conjugation::TwoDagger, &Chi3Map::uniform()).unwrap();
        let full = Chi3Map {
            strength: None,
            contraction: Contraction::Full(Box::new(t)),
        };
        let ov = effective_area_waveguide(&[n; 4], Conjugation::TwoDagger, &full).unwrap();
        assert!((ov.area / iso.area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_scales_inversely_with_area() {
        let w = [1e15; 4];
        let n = [1.8; 4];
        let g1 = gamma_general(
            w,
            n,
            1e-21,
            Overlap {
                area: 1e-12,
                phase: 0.0,
            },
        );
        let g2 = gamma_general(
            w,
            n,
            1e-21,
            Overlap {
                area: 2e-12,
                phase: 0.0,
            },
        );
        assert!((g1.norm() / g2.norm() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spm_matches_kerr_coefficient() {
        // χ̄₃ = 4n²ε₀c·n₂/3 turns the general form into γ = ω n₂/(c 𝒜).
        let (n, n2, area) = (1.9, 2.4e-19, 0.7e-12);
        let w = omega_from_wavelength(um(0.57));
        let chi3 = 4.0 * n * n * EPSILON_0 * C * n2 / 3.0;
        let g = gamma_general([w; 4], [n; 4], chi3, Overlap { area, phase: 0.0 });
        assert!((g.norm() / (w * n2 / (C * area)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prefactors() {
        let w = 1.2e15;
        for kind in [
            GammaKind::Spm,
            GammaKind::Xpm {
                omega_band: w,
                omega_pump: w,
            },
            GammaKind::Degenerate {
                omega_fundamental: w,
                omega_pump: w,
            },
            GammaKind::Stimulated {
                omega_pump: w,
                omega_seed: w,
            },
            GammaKind::DoublyStimulated {
                omega_pump: w,
                omega_idler: w,
                omega_seed: w,
            },
            GammaKind::NonDegenerate {
                omega_generated: w,
                omega_seed: w,
                omega_pump: w,
            },
        ] {
            assert!((kind.prefactor() - 1.0).abs() < 1e-12, "{kind:?}");
        }
        let st = GammaKind::Stimulated {
            omega_pump: omega_from_wavelength(um(0.57)),
            omega_seed: omega_from_wavelength(um(2.3)),
        };
        assert!((st.prefactor() - (2.3f64 / 0.57).powf(0.25)).abs() < 1e-12);
        assert!((st.prefactor() - 1.417).abs() < 1e-3);
    }
}
