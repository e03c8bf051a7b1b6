//! Run configuration: a TOML document with named devices and lists of
//! scenarios, sweeps, phase-matching searches, bandwidth and overlap jobs.
//!
//! Quantities are numbers in SI units or strings with a unit suffix
//! (`"100 mW"`, `"1.72 um"`, `"2.9e4 GHz"`). Frequencies are angular.
//! Relative file paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use topdc::constants::C;
use topdc::modeoverlap::Conjugation;
use topdc::rates::{BandwidthSource, PumpDetuning, ScalingParameter};
use topdc::units::{omega_from_wavelength, parse_quantity};
use topdc::{
    Band, DispersionModel, IndexTable, NonlinearParameterSet, Process, ProcessScenario, Resonance, RingSpec, Smoothing,
    WaveguideSpec,
};

/// A number in SI units, read from a bare number or a string with a unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Quantity(pub f64);

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Quantity;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a string such as \"100 mW\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Quantity, E> {
                Ok(Quantity(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Quantity, E> {
                Ok(Quantity(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Quantity, E> {
                Ok(Quantity(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Quantity, E> {
                parse_quantity(v).map(Quantity).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Configuration problem; reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub devices: BTreeMap<String, DeviceConfig>,
    #[serde(default, rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
    #[serde(default, rename = "sweep")]
    pub sweeps: Vec<SweepConfig>,
    #[serde(default)]
    pub phasematch: Vec<PhaseMatchConfig>,
    #[serde(default)]
    pub bandwidth: Vec<BandwidthConfig>,
    #[serde(default)]
    pub overlap: Vec<OverlapConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Waveguide,
    Ring,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub kind: DeviceKind,
    pub length: Option<Quantity>,
    pub circumference: Option<Quantity>,
    pub gamma: GammaConfig,
    pub dispersion: Option<DispersionConfig>,
    #[serde(default)]
    pub resonances: BTreeMap<Band, ResonanceConfig>,
}

/// Nonlinear parameters in (W·m)⁻¹. `triplet` applies to every process
/// unless a per-process value is given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaConfig {
    pub triplet: Quantity,
    #[serde(default)]
    pub spm: Option<Quantity>,
    #[serde(default)]
    pub xpm: Option<Quantity>,
    #[serde(default)]
    pub process: BTreeMap<Process, Quantity>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DispersionConfig {
    #[serde(default)]
    pub smoothing: Option<SmoothingConfig>,
    #[serde(flatten)]
    pub tables: BTreeMap<Band, PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum SmoothingConfig {
    Named(SmoothingName),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingName {
    Interpolate,
    CrossValidated,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    pub wavelength: Option<Quantity>,
    pub q: Option<Quantity>,
    pub eta: Option<f64>,
    pub group_index: Option<f64>,
    pub n_eff: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub device: String,
    pub process: Process,
    pub pump_power: Quantity,
    #[serde(default)]
    pub seed_power: Option<Quantity>,
    #[serde(default)]
    pub wavelengths: BTreeMap<Band, Quantity>,
    /// `auto`, `analytic`, `numeric`, or an injected τ⁻¹ such as `"2.9e4 GHz"`.
    #[serde(default)]
    pub bandwidth: Option<String>,
    pub beta2: Option<Quantity>,
    /// Detection window as two wavelengths.
    pub window: Option<[Quantity; 2]>,
    /// rad/m
    pub mismatch: Option<Quantity>,
    /// `optimal` or an offset from the hot pump resonance, e.g. `"-0.13 GHz"`.
    pub pump_detuning: Option<String>,
    /// Fixed laser wavelength; the pump state is then solved self-consistently.
    pub laser_wavelength: Option<Quantity>,
    pub seed_detuning: Option<Quantity>,
    /// Reference rate, s⁻¹, and relative tolerance for the report.
    pub expect: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    pub scenario: String,
    /// `length`, `circumference`, `pump_power`, `seed_power` or `q_<band>`.
    pub parameter: String,
    pub from: Quantity,
    pub to: Quantity,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Reference exponent and absolute tolerance for the report.
    pub expect: Option<f64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseMatchConfig {
    pub name: String,
    pub device: String,
    pub process: Process,
    /// Bracket on the free band's wavelength: the fundamental (degenerate),
    /// the pump (fixed separation) or the idler (fixed pump).
    pub from: Quantity,
    pub to: Quantity,
    pub pump_wavelength: Option<Quantity>,
    /// `ω_G − ω_S`, rad/s.
    pub separation: Option<Quantity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMethodConfig {
    #[default]
    Numeric,
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthConfig {
    pub name: String,
    pub device: String,
    pub process: Process,
    /// Fundamental (spontaneous) or generated (stimulated) wavelength.
    pub wavelength: Quantity,
    #[serde(default)]
    pub methods: Vec<BandwidthMethodConfig>,
    pub window: Option<[Quantity; 2]>,
    /// rad/m; defaults to zero (phase matched).
    pub mismatch: Option<Quantity>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapConfig {
    pub name: String,
    /// Four profile files in overlap order.
    pub modes: [PathBuf; 4],
    pub pattern: PatternConfig,
    /// m²/V²; when given, γ is reported as well.
    pub chi3_bar: Option<Quantity>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternConfig {
    TwoDagger,
    ThreeDagger,
}

impl From<PatternConfig> for Conjugation {
    fn from(p: PatternConfig) -> Self {
        match p {
            PatternConfig::TwoDagger => Conjugation::TwoDagger,
            PatternConfig::ThreeDagger => Conjugation::ThreeDagger,
        }
    }
}

/// A device ready for evaluation, with the defaults it assumed.
#[derive(Debug, Clone)]
pub struct BuiltDevice {
    pub device: topdc::Device,
    pub assumptions: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.scenarios.is_empty()
            && self.sweeps.is_empty()
            && self.phasematch.is_empty()
            && self.bandwidth.is_empty()
            && self.overlap.is_empty()
        {
            return bad("the config defines no scenario, sweep or other job");
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            if !names.insert(s.name.as_str()) {
                return bad(format!("duplicate scenario name `{}`", s.name));
            }
            if !self.devices.contains_key(&s.device) {
                return bad(format!("scenario `{}` names unknown device `{}`", s.name, s.device));
            }
        }
        for s in &self.sweeps {
            if !names.contains(s.scenario.as_str()) {
                return bad(format!("sweep `{}` names unknown scenario `{}`", s.name, s.scenario));
            }
            if !(s.from.0 > 0.0 && s.to.0 > 0.0) {
                return bad(format!("sweep `{}`: range must be positive", s.name));
            }
            if s.points == 0 {
                return bad(format!("sweep `{}`: needs at least one point", s.name));
            }
            parse_parameter(&s.parameter).map_err(|e| ConfigError(format!("sweep `{}`: {}", s.name, e.0)))?;
        }
        for (job, device) in self
            .phasematch
            .iter()
            .map(|p| (&p.name, &p.device))
            .chain(self.bandwidth.iter().map(|b| (&b.name, &b.device)))
        {
            if !self.devices.contains_key(device) {
                return bad(format!("job `{job}` names unknown device `{device}`"));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn scenario(&self, name: &str) -> Option<&ScenarioConfig> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Build every device, loading dispersion tables.
    pub fn build_devices(&self) -> Result<BTreeMap<String, BuiltDevice>, ConfigError> {
        self.devices
            .iter()
            .map(|(name, d)| {
                d.build(self).map(|b| (name.clone(), b)).map_err(|e| ConfigError(format!("device `{name}`: {}", e.0)))
            })
            .collect()
    }
}

pub fn parse_parameter(text: &str) -> Result<ScalingParameter, ConfigError> {
    Ok(match text {
        "length" => ScalingParameter::Length,
        "circumference" => ScalingParameter::Circumference,
        "pump_power" => ScalingParameter::PumpPower,
        "seed_power" => ScalingParameter::SeedPower,
        other => match other.strip_prefix("q_") {
            Some(band) => ScalingParameter::Quality(
                band.parse().map_err(|e: topdc::Error| ConfigError(format!("parameter `{other}`: {e}")))?,
            ),
            None => return bad(format!("unknown sweep parameter `{other}`")),
        },
    })
}

impl GammaConfig {
    fn build(&self) -> NonlinearParameterSet {
        let mut set = NonlinearParameterSet::direct(
            self.triplet.0,
            self.spm.map_or(0.0, |q| q.0),
            self.xpm.map_or(0.0, |q| q.0),
        );
        for (p, g) in &self.process {
            set.triplet.insert(*p, num_complex::Complex64::new(g.0, 0.0));
        }
        set
    }
}

impl DeviceConfig {
    pub fn build(&self, run: &RunConfig) -> Result<BuiltDevice, ConfigError> {
        let gamma = self.gamma.build();
        let mut assumptions = Vec::new();
        if self.gamma.spm.is_none() || self.gamma.xpm.is_none() {
            assumptions.push("missing SPM/XPM parameters are taken as zero".to_string());
        }
        let device = match self.kind {
            DeviceKind::Waveguide => {
                let length = self.length.ok_or(ConfigError("waveguide needs `length`".into()))?.0;
                let mut bands = BTreeMap::new();
                if let Some(d) = &self.dispersion {
                    let smoothing = match d.smoothing {
                        None => Smoothing::default(),
                        Some(SmoothingConfig::Named(SmoothingName::Interpolate)) => Smoothing::Interpolate,
                        Some(SmoothingConfig::Named(SmoothingName::CrossValidated)) => Smoothing::CrossValidated,
                        Some(SmoothingConfig::Fixed(v)) => Smoothing::Fixed(v),
                    };
                    for (band, path) in &d.tables {
                        let path = run.resolve(path);
                        let table = IndexTable::read_csv(&path)
                            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
                        let model = DispersionModel::build_with(&table, smoothing)
                            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
                        bands.insert(*band, model);
                    }
                    if !bands.contains_key(&Band::Generated) && bands.contains_key(&Band::Fundamental) {
                        assumptions.push("generated, seed and idler bands use the fundamental dispersion".into());
                    }
                }
                topdc::Device::Waveguide(WaveguideSpec { length, bands, gamma })
            }
            DeviceKind::Ring => {
                let circumference = self.circumference.ok_or(ConfigError("ring needs `circumference`".into()))?.0;
                let resonances = self.build_resonances(&mut assumptions)?;
                topdc::Device::Ring(RingSpec { circumference, resonances, gamma })
            }
        };
        Ok(BuiltDevice { device, assumptions })
    }

    /// Resonances, deriving missing bands from energy conservation with the
    /// pump and seed. Non-pump bands default to the fundamental's Q and group
    /// index; η defaults to 0.5.
    fn build_resonances(&self, notes: &mut Vec<String>) -> Result<BTreeMap<Band, Resonance>, ConfigError> {
        let r = &self.resonances;
        let pump = r.get(&Band::Pump).ok_or(ConfigError("ring needs a pump resonance".into()))?;
        let wl = |b: Band| r.get(&b).and_then(|c| c.wavelength).map(|q| omega_from_wavelength(q.0));
        let wp = wl(Band::Pump).ok_or(ConfigError("pump resonance needs `wavelength`".into()))?;
        let mut omegas = BTreeMap::new();
        omegas.insert(Band::Pump, wp);
        omegas.insert(Band::Fundamental, wl(Band::Fundamental).unwrap_or(wp / 3.0));
        let seed = wl(Band::Seed).or(wl(Band::Generated).map(|g| wp - 2.0 * g));
        if let Some(s) = seed {
            omegas.insert(Band::Seed, s);
            omegas.insert(Band::Generated, wl(Band::Generated).unwrap_or(0.5 * (wp - s)));
            omegas.insert(Band::Idler, wl(Band::Idler).unwrap_or(wp - 2.0 * s));
        }
        for b in omegas.keys() {
            if wl(*b).is_none() {
                notes.push(format!("{b} resonance placed by energy conservation"));
            }
        }
        let fund = r.get(&Band::Fundamental).cloned().unwrap_or_default();
        let mut out = BTreeMap::new();
        for (band, omega) in omegas {
            if omega <= 0.0 {
                return bad(format!("{band} resonance frequency is not positive"));
            }
            let c = r.get(&band).cloned().unwrap_or_default();
            let q = match (c.q, band) {
                (Some(q), _) => q.0,
                (None, Band::Pump) => return bad("pump resonance needs `q`"),
                (None, _) => {
                    notes.push(format!("Q of the {band} resonance defaults to the fundamental's"));
                    fund.q.ok_or(ConfigError(format!("{band} resonance needs `q` (no fundamental Q to default to)")))?.0
                }
            };
            let group_index = match (c.group_index, band) {
                (Some(n), _) => n,
                (None, Band::Pump) => return bad("pump resonance needs `group_index`"),
                (None, _) => {
                    notes.push(format!("group index of the {band} resonance defaults to the fundamental's"));
                    fund.group_index
                        .ok_or(ConfigError(format!("{band} resonance needs `group_index`")))?
                }
            };
            let eta = c.eta.unwrap_or_else(|| {
                notes.push(format!("escape efficiency of the {band} resonance defaults to 0.5"));
                0.5
            });
            let n_eff = c.n_eff.or(pump.n_eff).unwrap_or(group_index);
            out.insert(band, Resonance { omega, kappa: n_eff * omega / C, q, eta, group_velocity: C / group_index });
        }
        Ok(out)
    }
}

impl ScenarioConfig {
    pub fn build(&self, device: &topdc::Device) -> Result<ProcessScenario, ConfigError> {
        let ctx = |m: String| ConfigError(format!("scenario `{}`: {m}", self.name));
        let mut s = ProcessScenario::new(self.process, self.pump_power.0, self.seed_power.map_or(0.0, |q| q.0));
        s.omegas = self.wavelengths.iter().map(|(b, q)| (*b, omega_from_wavelength(q.0))).collect();
        if let topdc::Device::Ring(ring) = device {
            for (b, r) in &ring.resonances {
                s.omegas.entry(*b).or_insert(r.omega);
            }
        }
        s.bandwidth = match self.bandwidth.as_deref().map(str::trim) {
            None | Some("auto") => BandwidthSource::Auto,
            Some("analytic") => BandwidthSource::Analytic { beta2: self.beta2.map(|q| q.0) },
            Some("numeric") => BandwidthSource::Numeric {
                bounds: self.window.map(|[a, b]| {
                    let (x, y) = (omega_from_wavelength(a.0), omega_from_wavelength(b.0));
                    (x.min(y), x.max(y))
                }),
            },
            Some(v) => BandwidthSource::Injected {
                tau_inv: parse_quantity(v).map_err(|e| ctx(format!("bandwidth `{v}`: {e}")))?,
            },
        };
        s.mismatch = self.mismatch.map(|q| q.0);
        s.pump_detuning = match (self.pump_detuning.as_deref().map(str::trim), self.laser_wavelength) {
            (Some(_), Some(_)) => return Err(ctx("give either `pump_detuning` or `laser_wavelength`".into())),
            (None, Some(l)) => PumpDetuning::Laser { omega: omega_from_wavelength(l.0) },
            (None | Some("optimal"), None) => PumpDetuning::Optimal,
            (Some(v), None) => PumpDetuning::FromHot {
                detuning: parse_quantity(v).map_err(|e| ctx(format!("pump_detuning `{v}`: {e}")))?,
            },
        };
        s.seed_detuning = self.seed_detuning.map_or(0.0, |q| q.0);
        s.validate().map_err(|e| ctx(e.to_string()))?;
        Ok(s)
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.from.0, self.to.0);
        match (self.spacing, self.points) {
            (_, 1) => vec![a],
            (Spacing::Log, n) => topdc::rates::log_grid(a, b, n),
            (Spacing::Linear, n) => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RING: &str = r#"
[devices.r]
kind = "ring"
circumference = "750 um"
gamma = { triplet = 0.19 }
[devices.r.resonances.pump]
wavelength = "0.57 um"
q = 1e5
group_index = 2.3
[devices.r.resonances.fundamental]
q = 1e7
group_index = 2.1
[devices.r.resonances.seed]
wavelength = "2.3 um"

[[scenario]]
name = "st"
device = "r"
process = "stimulated"
pump_power = 0.1
seed_power = "20 uW"
"#;

    #[test]
    fn quantities_take_numbers_or_units() {
        let cfg = RunConfig::parse(RING).unwrap();
        let s = &cfg.scenarios[0];
        assert_eq!(s.pump_power.0, 0.1);
        assert!((s.seed_power.unwrap().0 - 2e-5).abs() < 1e-18);
    }

    #[test]
    fn ring_defaults_are_recorded() {
        let cfg = RunConfig::parse(RING).unwrap();
        let built = &cfg.build_devices().unwrap()["r"];
        let topdc::Device::Ring(ring) = &built.device else { panic!() };
        assert_eq!(ring.resonances.len(), 5);
        assert_eq!(ring.resonances[&Band::Seed].q, 1e7);
        assert!(built.assumptions.iter().any(|a| a.contains("idler resonance placed")));
        assert!(built.assumptions.iter().any(|a| a.contains("Q of the seed")));
    }

    #[test]
    fn spontaneous_with_seed_power_is_rejected() {
        let text = RING.replace("process = \"stimulated\"", "process = \"sp_degenerate\"");
        let cfg = RunConfig::parse(&text).unwrap();
        let device = cfg.build_devices().unwrap().remove("r").unwrap().device;
        assert!(cfg.scenarios[0].build(&device).is_err());
    }

    #[test]
    fn sweep_parameters() {
        assert!(matches!(parse_parameter("q_idler"), Ok(ScalingParameter::Quality(Band::Idler))));
        assert!(parse_parameter("q_nowhere").is_err());
        assert!(parse_parameter("width").is_err());
    }
}
