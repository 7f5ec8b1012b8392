//! Consolidated summary of a finished run directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ipm_core::oracles::fit_power_law;
use serde::{Deserialize, Serialize};

use crate::error::{exit, LabError};
use crate::experiments::{Check, Summary};
use crate::manifest::{verify, RunManifest};

/// Target decay exponents and their accepted ranges, by series name.
pub fn target(weight: &str) -> Option<(f64, f64, f64)> {
    match weight {
        "identity" => Some((-0.25, -0.27, -0.23)),
        "r1" => Some((-0.75, -0.78, -0.72)),
        "r1_squared" => Some((-1.25, -1.28, -1.22)),
        "h8" => Some((-2.5, -2.8, -2.0)),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentRow {
    pub series: String,
    pub exponent: f64,
    pub samples: usize,
    pub target: Option<f64>,
    pub deviation: Option<f64>,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub kind: String,
    pub status: crate::manifest::RunStatus,
    pub fit_window: Option<[f64; 2]>,
    pub exponents: Vec<ExponentRow>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            exit::PASS
        } else {
            exit::TOLERANCE
        }
    }

    pub fn markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Run report: {}\n", self.kind);
        let _ = writeln!(s, "Status: {:?}\n", self.status);
        if !self.exponents.is_empty() {
            if let Some(w) = self.fit_window {
                let _ = writeln!(s, "Fit window: t in [{}, {}]\n", w[0], w[1]);
            }
            s.push_str("| series | exponent | target | deviation | accepted range | pass |\n");
            s.push_str("|---|---|---|---|---|---|\n");
            for r in &self.exponents {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
                let range = match (r.low, r.high) {
                    (Some(l), Some(h)) => format!("[{l}, {h}]"),
                    _ => "-".into(),
                };
                let pass = r.pass.map(|p| if p { "yes" } else { "no" }).unwrap_or("-");
                let _ = writeln!(
                    s,
                    "| {} | {:.4} | {} | {} | {} | {} |",
                    r.series,
                    r.exponent,
                    opt(r.target),
                    opt(r.deviation),
                    range,
                    pass
                );
            }
            s.push('\n');
        }
        if !self.checks.is_empty() {
            s.push_str("| check | value | low | high | pass |\n|---|---|---|---|---|\n");
            for c in &self.checks {
                let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    s,
                    "| {} | {:e} | {} | {} | {} |",
                    c.name,
                    c.value,
                    opt(c.low),
                    opt(c.high),
                    if c.pass { "yes" } else { "no" }
                );
            }
        }
        s
    }
}

fn listed(manifest: &RunManifest, name: &str) -> bool {
    manifest.files.iter().any(|f| f.path == name)
}

#[derive(Deserialize)]
struct Sidecar {
    fit_window: [f64; 2],
}

/// Verifies the run directory and fits every series of its `decay.csv`.
/// Writes `report.json` and `report.md` next to the run artifacts.
pub fn report(dir: &Path) -> Result<Report, LabError> {
    let manifest = verify(dir)?;
    let checks = if listed(&manifest, "summary.json") {
        let s: Summary = serde_json::from_slice(&std::fs::read(dir.join("summary.json")).map_err(|e| LabError::io(dir, e))?)?;
        s.checks
    } else {
        Vec::new()
    };
    let fit_window = if listed(&manifest, "params.json") {
        let bytes = std::fs::read(dir.join("params.json")).map_err(|e| LabError::io(dir, e))?;
        serde_json::from_slice::<Sidecar>(&bytes).ok().map(|s| s.fit_window)
    } else {
        None
    };
    let mut exponents = Vec::new();
    if listed(&manifest, "decay.csv") {
        let path = dir.join("decay.csv");
        let mut rdr = csv::Reader::from_path(&path)?;
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        let mut order = Vec::new();
        for rec in rdr.deserialize::<(f64, f64, String, f64)>() {
            let (t, v, w, _) = rec?;
            if !series.contains_key(&w) {
                order.push(w.clone());
            }
            series.entry(w).or_default().push((t, v));
        }
        for w in order {
            let data = &series[&w];
            let window = fit_window.map(|w| (w[0], w[1])).unwrap_or_else(|| {
                let lo = data.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = data.iter().map(|p| p.0).fold(0.0, f64::max);
                (lo, hi)
            });
            let f = fit_power_law(data, window)?;
            let t = target(&w);
            exponents.push(ExponentRow {
                series: w.clone(),
                exponent: f.exponent,
                samples: f.samples,
                target: t.map(|t| t.0),
                deviation: t.map(|t| f.exponent - t.0),
                low: t.map(|t| t.1),
                high: t.map(|t| t.2),
                pass: t.map(|t| f.exponent >= t.1 && f.exponent <= t.2),
            });
        }
    }
    let all_pass = manifest.exit_code == exit::PASS
        && checks.iter().all(|c| c.pass)
        && exponents.iter().all(|r| r.pass != Some(false));
    let report = Report { kind: manifest.kind.clone(), status: manifest.status, fit_window, exponents, checks, all_pass };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    let out = dir.join("report.json");
    std::fs::write(&out, json).map_err(|e| LabError::io(&out, e))?;
    let md = dir.join("report.md");
    std::fs::write(&md, report.markdown()).map_err(|e| LabError::io(&md, e))?;
    Ok(report)
}
