//! Subcommand pipelines. Each returns the JSON document it printed and
//! writes its artifacts under the output directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use topdc::bandwidth::{
    mc_oracle, tau_sp_numeric, tau_sp_wg_analytic, tau_st_numeric, tau_st_wg_analytic, McIntegrand,
    QuadratureSettings, SplineIncrement,
};
use topdc::modeoverlap::{effective_area_waveguide, gamma_general, NormalizedMode};
use topdc::phasematch::{find_phase_matched, Constraint};
use topdc::rates::{evaluate, fit_exponent, scaling_family, wavelength_spans, RateResult};
use topdc::units::{omega_from_wavelength, wavelength_from_omega};
use topdc::{Band, Device, ModeProfile, Process, ProcessScenario};

use crate::config::{parse_parameter, BandwidthMethodConfig, BuiltDevice, ConfigError, RunConfig};
use crate::plot::loglog_svg;

/// A physics failure in a named job; reported with exit status 3.
#[derive(Debug)]
pub struct PhysicsError {
    pub job: String,
    pub source: topdc::Error,
}

impl fmt::Display for PhysicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}` failed: {}", self.job, self.source)
    }
}

impl std::error::Error for PhysicsError {}

fn physics(job: &str) -> impl Fn(topdc::Error) -> PhysicsError + '_ {
    move |source| PhysicsError { job: job.to_string(), source }
}

pub struct Options {
    pub out: PathBuf,
    pub json: bool,
    pub seed: u64,
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn emit(opts: &Options, doc: &Value, human: impl FnOnce() -> String) -> anyhow::Result<()> {
    if opts.json {
        println!("{}", serde_json::to_string_pretty(doc)?);
    } else {
        print!("{}", human());
    }
    Ok(())
}

fn devices(cfg: &RunConfig) -> Result<BTreeMap<String, BuiltDevice>, ConfigError> {
    cfg.build_devices()
}

/// Wavelength at which the bandwidth of a result is quoted.
fn bandwidth_band(process: Process) -> Band {
    match process {
        Process::SpDegenerate => Band::Fundamental,
        _ => Band::Generated,
    }
}

fn scenario_report(name: &str, scenario: &ProcessScenario, r: &RateResult, assumptions: &[String], seed: u64) -> Value {
    let mut doc = r.report(scenario);
    let m = doc.as_object_mut().expect("report is an object");
    m.insert("name".into(), json!(name));
    m.insert("seed".into(), json!(seed));
    m.insert("assumptions".into(), json!(assumptions));
    let wavelengths: BTreeMap<Band, f64> = r.omegas.iter().map(|(b, w)| (*b, wavelength_from_omega(*w) * 1e6)).collect();
    m.insert("wavelengths_um".into(), json!(wavelengths));
    if let (Some(bw), Some(w)) = (&r.bandwidth, r.omegas.get(&bandwidth_band(r.process))) {
        let (cyclic, angular) = wavelength_spans(wavelength_from_omega(*w), bw.tau_inv);
        m.insert(
            "bandwidth_span_nm".into(),
            json!({ "tau_inv_as_cyclic": cyclic * 1e9, "tau_inv_as_angular": angular * 1e9 }),
        );
    }
    if let Some(state) = &r.diagnostics.pump {
        m.insert("pump_detuning_cyclic_mhz".into(), json!(state.detuning / (2.0 * std::f64::consts::PI) / 1e6));
    }
    doc
}

#[derive(Serialize)]
struct RateRow<'a> {
    name: &'a str,
    device: &'a str,
    process: &'a str,
    rate: f64,
    efficiency: f64,
    tau_inv: Option<f64>,
    vacuum_power: Option<f64>,
    expected: Option<f64>,
    within_tolerance: Option<bool>,
}

pub fn rate(cfg: &RunConfig, opts: &Options) -> anyhow::Result<Value> {
    if cfg.scenarios.is_empty() {
        return Err(ConfigError("the config has no scenarios".into()).into());
    }
    let devices = devices(cfg)?;
    let jobs: Vec<(&crate::config::ScenarioConfig, &BuiltDevice, ProcessScenario)> = cfg
        .scenarios
        .iter()
        .map(|s| {
            let d = &devices[&s.device];
            s.build(&d.device).map(|built| (s, d, built))
        })
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<RateResult, PhysicsError>> = jobs
        .par_iter()
        .map(|(s, d, sc)| evaluate(&d.device, sc).map_err(physics(&s.name)))
        .collect();

    let mut reports = Vec::new();
    let mut csv = csv::Writer::from_writer(Vec::new());
    for ((s, d, sc), r) in jobs.iter().zip(results) {
        let r = r?;
        debug!("{}: {:?}", s.name, r.diagnostics);
        let mut doc = scenario_report(&s.name, sc, &r, &d.assumptions, opts.seed);
        let check = s.expect.map(|e| {
            let tol = s.tolerance.unwrap_or(0.15);
            let ratio = r.rate / e;
            (e, ratio, (ratio - 1.0).abs() <= tol, tol)
        });
        if let Some((e, ratio, ok, tol)) = check {
            doc["reference"] = json!({ "expected": e, "ratio": ratio, "tolerance": tol, "within_tolerance": ok });
        }
        write_json(&opts.out.join(format!("{}.json", s.name)), &doc)?;
        csv.serialize(RateRow {
            name: &s.name,
            device: &r.device,
            process: r.process.label(),
            rate: r.rate,
            efficiency: r.efficiency,
            tau_inv: r.bandwidth.as_ref().map(|b| b.tau_inv),
            vacuum_power: r.vacuum_power,
            expected: check.map(|c| c.0),
            within_tolerance: check.map(|c| c.2),
        })?;
        reports.push(doc);
    }
    write(&opts.out.join("rates.csv"), &String::from_utf8(csv.into_inner()?)?)?;
    info!("wrote {} reports to {}", reports.len(), opts.out.display());
    let doc = json!({ "seed": opts.seed, "scenarios": reports });
    emit(opts, &doc, || {
        let mut s = String::new();
        for r in &reports {
            let reference = match r.get("reference") {
                Some(c) => format!(
                    "  expected {:.2e} ratio {:.3} {}",
                    c["expected"].as_f64().unwrap_or(f64::NAN),
                    c["ratio"].as_f64().unwrap_or(f64::NAN),
                    if c["within_tolerance"] == json!(true) { "ok" } else { "OUT OF TOLERANCE" }
                ),
                None => String::new(),
            };
            s += &format!(
                "{:<32} {:<10} {:<18} {:>12.4e} /s{reference}\n",
                r["name"].as_str().unwrap_or(""),
                r["device"].as_str().unwrap_or(""),
                r["process"].as_str().unwrap_or(""),
                r["rate_per_s"].as_f64().unwrap_or(f64::NAN)
            );
        }
        s
    })?;
    Ok(doc)
}

#[derive(Serialize)]
struct SweepRow {
    parameter: f64,
    rate: f64,
    tau_inv: Option<f64>,
    vacuum_power: Option<f64>,
}

pub fn sweep(cfg: &RunConfig, opts: &Options) -> anyhow::Result<Value> {
    if cfg.sweeps.is_empty() {
        return Err(ConfigError("the config has no sweeps".into()).into());
    }
    let devices = devices(cfg)?;
    let mut summaries = Vec::new();
    for sw in &cfg.sweeps {
        let base = cfg.scenario(&sw.scenario).expect("validated");
        let device = &devices[&base.device];
        let scenario = base.build(&device.device)?;
        let parameter = parse_parameter(&sw.parameter)?;
        let grid = sw.grid();
        let family = scaling_family(&device.device, &scenario, parameter, &grid).map_err(physics(&sw.name))?;

        let mut csv = csv::Writer::from_writer(Vec::new());
        for (v, r) in &family {
            csv.serialize(SweepRow {
                parameter: *v,
                rate: r.rate,
                tau_inv: r.bandwidth.as_ref().map(|b| b.tau_inv),
                vacuum_power: r.vacuum_power,
            })?;
        }
        write(&opts.out.join(format!("{}.csv", sw.name)), &String::from_utf8(csv.into_inner()?)?)?;
        let points: Vec<(f64, f64)> = family.iter().map(|(v, r)| (*v, r.rate)).collect();
        let title = format!("{} ({} on {})", sw.name, scenario.process, device.device.kind());
        let chart = loglog_svg(&title, &sw.parameter, "rate (1/s)", &points);
        if let Some(svg) = &chart {
            write(&opts.out.join(format!("{}.svg", sw.name)), svg)?;
        }
        let (exponent, note) = match fit_exponent(&points) {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let check = match (sw.expect, exponent) {
            (Some(e), Some(x)) => {
                let tol = sw.tolerance.unwrap_or(0.02);
                Some(json!({ "expected": e, "tolerance": tol, "within_tolerance": (x - e).abs() <= tol }))
            }
            _ => None,
        };
        summaries.push(json!({
            "name": sw.name,
            "scenario": sw.scenario,
            "parameter": sw.parameter,
            "points": grid.len(),
            "exponent": exponent,
            "fit_note": note,
            "reference": check,
            "chart": chart.is_some(),
        }));
    }
    let doc = json!({ "seed": opts.seed, "sweeps": summaries });
    write_json(&opts.out.join("sweeps.json"), &doc)?;
    emit(opts, &doc, || {
        let mut s = String::new();
        for w in &summaries {
            let exponent = match w["exponent"].as_f64() {
                Some(e) => format!("exponent {e:+.4}"),
                None => format!("no fit ({})", w["fit_note"].as_str().unwrap_or("")),
            };
            let reference = match w["reference"].as_object() {
                Some(c) => format!(
                    "  expected {:+.2} {}",
                    c["expected"].as_f64().unwrap_or(f64::NAN),
                    if c["within_tolerance"] == json!(true) { "ok" } else { "OUT OF TOLERANCE" }
                ),
                None => String::new(),
            };
            s += &format!("{:<28} {:<16} {exponent}{reference}\n", w["name"].as_str().unwrap_or(""), w["parameter"].as_str().unwrap_or(""));
        }
        s
    })?;
    Ok(doc)
}

fn waveguide<'a>(devices: &'a BTreeMap<String, BuiltDevice>, name: &str, job: &str) -> Result<&'a topdc::WaveguideSpec, ConfigError> {
    match &devices[name].device {
        Device::Waveguide(w) if !w.bands.is_empty() => Ok(w),
        _ => Err(ConfigError(format!("job `{job}` needs a waveguide device with dispersion tables"))),
    }
}

pub fn phasematch(cfg: &RunConfig, opts: &Options) -> anyhow::Result<Value> {
    if cfg.phasematch.is_empty() {
        return Err(ConfigError("the config has no phasematch jobs".into()).into());
    }
    let devices = devices(cfg)?;
    let mut out = Vec::new();
    for job in &cfg.phasematch {
        let wg = waveguide(&devices, &job.device, &job.name)?;
        let constraint = match job.process {
            Process::SpDegenerate => Constraint::Degenerate,
            Process::SpNonDegenerate | Process::Stimulated => Constraint::Separation {
                separation: job
                    .separation
                    .ok_or(ConfigError(format!("job `{}` needs `separation`", job.name)))?
                    .0,
            },
            Process::DoublyStimulated => Constraint::FixedPump {
                omega_pump: omega_from_wavelength(
                    job.pump_wavelength
                        .ok_or(ConfigError(format!("job `{}` needs `pump_wavelength`", job.name)))?
                        .0,
                ),
            },
        };
        let (a, b) = (omega_from_wavelength(job.from.0), omega_from_wavelength(job.to.0));
        let m = find_phase_matched(&wg.bands, job.process, constraint, (a.min(b), a.max(b))).map_err(physics(&job.name))?;
        let wavelengths: BTreeMap<Band, f64> = m.wavelengths.iter().map(|(b, l)| (*b, l * 1e6)).collect();
        out.push(json!({
            "name": job.name,
            "process": job.process,
            "wavelengths_um": wavelengths,
            "mismatch_rad_per_m": m.mismatch,
            "is_root": m.is_root,
            "degenerate": m.degenerate,
        }));
    }
    let doc = json!({ "seed": opts.seed, "phasematch": out });
    write_json(&opts.out.join("phasematch.json"), &doc)?;
    emit(opts, &doc, || {
        let mut s = String::new();
        for p in &out {
            let wl: Vec<String> = p["wavelengths_um"]
                .as_object()
                .map(|m| m.iter().map(|(b, l)| format!("{b} {:.4} um", l.as_f64().unwrap_or(f64::NAN))).collect())
                .unwrap_or_default();
            s += &format!(
                "{:<24} {}  mismatch {:.2e} rad/m{}\n",
                p["name"].as_str().unwrap_or(""),
                wl.join(", "),
                p["mismatch_rad_per_m"].as_f64().unwrap_or(f64::NAN),
                if p["is_root"] == json!(true) { "" } else { " (minimum, no sign change)" }
            );
        }
        s
    })?;
    Ok(doc)
}

pub fn bandwidth(cfg: &RunConfig, opts: &Options) -> anyhow::Result<Value> {
    if cfg.bandwidth.is_empty() {
        return Err(ConfigError("the config has no bandwidth jobs".into()).into());
    }
    let devices = devices(cfg)?;
    let mut out = Vec::new();
    for job in &cfg.bandwidth {
        let wg = waveguide(&devices, &job.device, &job.name)?;
        let err = physics(&job.name);
        let center = omega_from_wavelength(job.wavelength.0);
        let spontaneous = match job.process {
            Process::SpDegenerate => true,
            Process::Stimulated => false,
            p => return Err(ConfigError(format!("job `{}`: no waveguide bandwidth for {p}", job.name)).into()),
        };
        let model = wg.model(if spontaneous { Band::Fundamental } else { Band::Generated }).map_err(&err)?;
        let bounds = match job.window {
            Some([a, b]) => {
                let (x, y) = (omega_from_wavelength(a.0), omega_from_wavelength(b.0));
                (x.min(y), x.max(y))
            }
            None => model.valid_range(),
        };
        let span = if spontaneous {
            (bounds.0 - center, bounds.1 - center)
        } else {
            let half = (bounds.1 - center).min(center - bounds.0);
            (-half, half)
        };
        let mismatch = job.mismatch.map_or(0.0, |q| q.0);
        let inc = SplineIncrement::new(model, center, span).map_err(&err)?;
        let methods = if job.methods.is_empty() {
            vec![BandwidthMethodConfig::Numeric, BandwidthMethodConfig::Analytic]
        } else {
            job.methods.clone()
        };
        let lambda = job.wavelength.0;
        let mut results = serde_json::Map::new();
        for method in methods {
            let (key, tau, extra) = match method {
                BandwidthMethodConfig::Numeric => {
                    let r = if spontaneous {
                        tau_sp_numeric(&inc, 3.0 * center, mismatch, wg.length, bounds, QuadratureSettings::default())
                    } else {
                        tau_st_numeric(&inc, center, mismatch, wg.length, bounds, QuadratureSettings::default())
                    }
                    .map_err(&err)?;
                    ("numeric", r.tau_inv, json!({ "diagnostics": r.diagnostics }))
                }
                BandwidthMethodConfig::Analytic => {
                    let beta2 = model.group_quantities(center).map_err(&err)?.beta2;
                    let tau = if spontaneous {
                        tau_sp_wg_analytic(beta2, wg.length)
                    } else {
                        tau_st_wg_analytic(beta2, wg.length)
                    }
                    .map_err(&err)?;
                    ("analytic", tau, json!({ "beta2_s2_per_m": beta2 }))
                }
                BandwidthMethodConfig::MonteCarlo => {
                    let samples = job.samples.unwrap_or(1_000_000);
                    let integrand = if spontaneous {
                        McIntegrand::Spontaneous { increment: &inc, omega_pump: 3.0 * center, mismatch, length: wg.length, bounds }
                    } else {
                        McIntegrand::Stimulated { increment: &inc, omega_generated: center, mismatch, length: wg.length, bounds }
                    };
                    let e = mc_oracle(integrand, samples, opts.seed).map_err(&err)?;
                    let (tau, sigma) = if spontaneous {
                        (e.value.max(0.0).sqrt(), e.sigma / (2.0 * e.value.max(f64::MIN_POSITIVE).sqrt()))
                    } else {
                        (e.value, e.sigma)
                    };
                    ("monte_carlo", tau, json!({ "sigma": sigma, "samples": e.samples, "seed": e.seed }))
                }
            };
            let (cyclic, angular) = wavelength_spans(lambda, tau);
            let mut entry = json!({
                "tau_inv": tau,
                "span_nm": { "tau_inv_as_cyclic": cyclic * 1e9, "tau_inv_as_angular": angular * 1e9 },
            });
            if let (Some(e), Some(x)) = (entry.as_object_mut(), extra.as_object()) {
                e.extend(x.clone());
            }
            results.insert(key.to_string(), entry);
        }
        out.push(json!({
            "name": job.name,
            "process": job.process,
            "wavelength_um": lambda * 1e6,
            "window_um": [wavelength_from_omega(bounds.1) * 1e6, wavelength_from_omega(bounds.0) * 1e6],
            "mismatch_rad_per_m": mismatch,
            "results": results,
        }));
    }
    let doc = json!({ "seed": opts.seed, "bandwidth": out });
    write_json(&opts.out.join("bandwidth.json"), &doc)?;
    emit(opts, &doc, || {
        let mut s = String::new();
        for b in &out {
            for (k, v) in b["results"].as_object().into_iter().flatten() {
                s += &format!(
                    "{:<24} {:<12} tau^-1 {:.4e} /s  span {:.1} nm (cyclic) / {:.1} nm (angular)\n",
                    b["name"].as_str().unwrap_or(""),
                    k,
                    v["tau_inv"].as_f64().unwrap_or(f64::NAN),
                    v["span_nm"]["tau_inv_as_cyclic"].as_f64().unwrap_or(f64::NAN),
                    v["span_nm"]["tau_inv_as_angular"].as_f64().unwrap_or(f64::NAN),
                );
            }
        }
        s
    })?;
    Ok(doc)
}

pub fn overlap(cfg: &RunConfig, opts: &Options) -> anyhow::Result<Value> {
    if cfg.overlap.is_empty() {
        return Err(ConfigError("the config has no overlap jobs".into()).into());
    }
    let mut out = Vec::new();
    for job in &cfg.overlap {
        let profiles: Vec<ModeProfile> = job
            .modes
            .iter()
            .map(|p| {
                let path = cfg.resolve(p);
                ModeProfile::read(&path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
            })
            .collect::<Result<_, _>>()?;
        let modes: [NormalizedMode; 4] = std::array::from_fn(|i| NormalizedMode::new(&profiles[i]));
        let o = effective_area_waveguide(&modes, job.pattern.into(), &topdc::modeoverlap::Chi3Map::uniform())
            .map_err(physics(&job.name))?;
        let gamma = job.chi3_bar.map(|chi| {
            let g = gamma_general(
                std::array::from_fn(|i| profiles[i].omega),
                std::array::from_fn(|i| profiles[i].n_bar),
                chi.0,
                o,
            );
            json!({ "magnitude_per_w_m": g.norm(), "phase_rad": g.arg() })
        });
        out.push(json!({
            "name": job.name,
            "area_m2": o.area,
            "area_um2": o.area * 1e12,
            "phase_rad": o.phase,
            "gamma": gamma,
        }));
    }
    let doc = json!({ "seed": opts.seed, "overlap": out });
    write_json(&opts.out.join("overlap.json"), &doc)?;
    emit(opts, &doc, || {
        out.iter()
            .map(|o| {
                format!(
                    "{:<24} area {:.4} um^2  phase {:+.4} rad{}\n",
                    o["name"].as_str().unwrap_or(""),
                    o["area_um2"].as_f64().unwrap_or(f64::NAN),
                    o["phase_rad"].as_f64().unwrap_or(f64::NAN),
                    o["gamma"]["magnitude_per_w_m"].as_f64().map_or(String::new(), |g| format!("  |gamma| {g:.4} /(W m)"))
                )
            })
            .collect()
    })?;
    Ok(doc)
}
