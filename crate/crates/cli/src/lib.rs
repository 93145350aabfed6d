//! Scenario configuration and artifact writing for the `harmrand` binary.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use harmrand::counterexamples::{build_fourier_divergent, build_ml_poisson, build_schnorr_poisson, FourierOptions};
use harmrand::exact::{self, Rational};
use harmrand::functions::BoundaryData;
use harmrand::poisson::{self, RadialEntry, RadialTrace, ScanSpec};
use harmrand::randomness_tests::{covering_test, nest_tail};
use harmrand::verify::{CheckEntry, Status};
use harmrand::{BoundaryFunction, TestFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or input; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<FieldError>),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] harmrand::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Core(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: &'static str,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    #[serde(alias = "fourier-divergent")]
    Fourier,
    #[serde(alias = "schnorr-poisson")]
    SchnorrPoisson,
    #[serde(alias = "ml-poisson")]
    MlPoisson,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Fourier => "fourier",
            Construction::SchnorrPoisson => "schnorr_poisson",
            Construction::MlPoisson => "ml_poisson",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Slack on the Fourier jump and `g_n(t)` lower bounds.
    pub jump: f64,
    /// Slack on the radial lower bound.
    pub radial: f64,
    /// Relative tolerance of the `L^p` norm quadrature.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { jump: 1e-9, radial: 1e-6, norm: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Rational `"p/q"`.
    pub target_point: String,
    pub construction: Construction,
    /// Depth of the covering test; derived from the stage cap when absent.
    pub depth: Option<usize>,
    pub n_max: usize,
    pub m_max: usize,
    pub s_max: usize,
    pub p: f64,
    #[serde(rename = "C")]
    pub c: u32,
    /// Heights of the radial trace, strictly decreasing.
    pub heights: Option<Vec<f64>>,
    /// Fourier trace checkpoints; `N_0 < N_1 < …` when absent.
    pub checkpoints: Option<Vec<u64>>,
    pub output_dir: PathBuf,
    pub tolerances: Tolerances,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            target_point: "0".into(),
            construction: Construction::Fourier,
            depth: None,
            n_max: 3,
            m_max: 24,
            s_max: 41,
            p: 2.0,
            c: 1,
            heights: None,
            checkpoints: None,
            output_dir: PathBuf::from("out"),
            tolerances: Tolerances::default(),
        }
    }
}

impl ScenarioConfig {
    /// Reads JSON, or TOML when the extension is `.toml`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn target(&self) -> Result<Rational, FieldError> {
        exact::parse(&self.target_point).map_err(|e| FieldError { field: "target_point", reason: e.to_string() })
    }

    pub fn required_depth(&self) -> usize {
        match self.construction {
            Construction::Fourier => self.n_max + 1,
            Construction::SchnorrPoisson => self.m_max + 2,
            Construction::MlPoisson => self.s_max.saturating_sub(1) / 2 + 1,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut errs = Vec::new();
        let mut bad = |field, reason: String| errs.push(FieldError { field, reason });
        if let Err(e) = self.target() {
            bad(e.field, e.reason);
        }
        match self.construction {
            Construction::Fourier => {
                if !(self.p > 1.0 && self.p.is_finite()) {
                    bad("p", format!("must be a finite number > 1, got {}", self.p));
                }
                if self.c == 0 {
                    bad("C", "must be positive".into());
                }
                if self.n_max > 8 {
                    bad("n_max", format!("{} is above the supported cap 8", self.n_max));
                }
            }
            Construction::SchnorrPoisson if self.m_max == 0 => bad("m_max", "must be positive".into()),
            Construction::MlPoisson if self.s_max == 0 => bad("s_max", "must be positive".into()),
            _ => {}
        }
        if let Some(d) = self.depth {
            if d < self.required_depth() {
                bad("depth", format!("{d} is below the {} stages the construction needs", self.required_depth()));
            }
        }
        if let Some(hs) = &self.heights {
            if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                bad("heights", "must be a nonempty list of positive numbers".into());
            } else if hs.windows(2).any(|w| w[1] >= w[0]) {
                bad("heights", "must decrease strictly".into());
            }
        }
        if let Some(cs) = &self.checkpoints {
            if cs.is_empty() || cs.windows(2).any(|w| w[1] <= w[0]) {
                bad("checkpoints", "must be a nonempty strictly increasing list".into());
            }
        }
        let t = &self.tolerances;
        for (field, v) in [("tolerances.jump", t.jump), ("tolerances.radial", t.radial), ("tolerances.norm", t.norm)] {
            if !(v >= 0.0 && v.is_finite()) {
                bad(field, format!("must be a finite nonnegative number, got {v}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs))
        }
    }

    pub fn heights(&self) -> Vec<f64> {
        self.heights.clone().unwrap_or_else(poisson::default_y_sequence)
    }

    fn test_family(&self) -> Result<TestFamily, CliError> {
        let x = self.target().map_err(|e| CliError::Config(vec![e]))?;
        let depth = self.depth.unwrap_or_else(|| self.required_depth());
        Ok(match self.construction {
            Construction::Fourier => covering_test(&x, depth, 2)?,
            Construction::SchnorrPoisson => nest_tail(&covering_test(&x, depth, 2)?)?,
            Construction::MlPoisson => covering_test(&x, depth, 0)?,
        })
    }
}

/// Checks performed for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub construction: String,
    pub target_point: String,
    pub passed: bool,
    pub entries: Vec<CheckEntry>,
}

impl ScenarioReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }
}

/// Files written by [`run_scenario`], relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioOutput {
    pub report: ScenarioReport,
    pub files: Vec<PathBuf>,
}

fn entry(id: &str, module: &str, bound: &str, exact: bool, ok: bool, detail: String) -> CheckEntry {
    CheckEntry {
        id: id.into(),
        module: module.into(),
        bound: bound.into(),
        exact,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

/// Serialized artifacts of a scenario: `(file name, contents)`.
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub report: ScenarioReport,
}

/// Builds the construction and its traces without touching the file system.
pub fn scenario_artifacts(cfg: &ScenarioConfig) -> Result<Artifacts, CliError> {
    cfg.validate()?;
    let family = cfg.test_family()?;
    let x = cfg.target().map_err(|e| CliError::Config(vec![e]))?;
    let xf = exact::to_f64(&x);
    let mut files = Vec::new();
    let mut entries = Vec::new();
    files.push(("test_family.json".to_string(), family.to_json()? + "\n"));
    match cfg.construction {
        Construction::Fourier => {
            let opts = FourierOptions {
                p: cfg.p,
                c: cfg.c,
                n_max: cfg.n_max,
                target: x.clone(),
                norm_tol: cfg.tolerances.norm,
                ..FourierOptions::default()
            };
            let c = build_fourier_divergent(&family, &opts)?;
            let beta = c.beta();
            let trace = match &cfg.checkpoints {
                Some(cs) => harmrand::trig::convergence_trace(c.partial.last().expect("nonempty"), xf, cs)?,
                None => c.fourier_trace(xf)?,
            };
            for s in &c.stages {
                entries.push(entry(
                    &format!("fourier.spectral_containment.n{}", s.n),
                    "counterexamples",
                    "spec(g_n) within [-N_n, N_n]",
                    true,
                    c.spectrum_contained(s.n),
                    format!("N={}, degree {}", s.big_n, s.g.degree()),
                ));
                // Either sufficient condition puts the target within reach of a kernel peak.
                if s.qualifies || s.covered {
                    entries.push(entry(
                        &format!("fourier.g_lower_bound.n{}", s.n),
                        "counterexamples",
                        "g_n(t) >= 4C/pi^2",
                        false,
                        s.g_at_target >= beta - cfg.tolerances.jump,
                        format!("g_n(t) = {:e}, beta = {beta:e}", s.g_at_target),
                    ));
                    if let Some(e) = trace.entries.iter().find(|e| e.n == s.big_n) {
                        entries.push(entry(
                            &format!("fourier.trace_jump.n{}", s.n),
                            "trig",
                            "|S_{N_n}f(t) - S_{N_{n-1}}f(t)| >= 4C/pi^2",
                            false,
                            e.jump >= beta - cfg.tolerances.jump,
                            format!("jump at N={} is {:e}", e.n, e.jump),
                        ));
                    }
                }
            }
            let norms = c.norm_partial_sums();
            let majorant = c.majorant_partial_sums();
            let worst = norms.iter().zip(&majorant).position(|(a, b)| a > b);
            entries.push(entry(
                "fourier.summability",
                "counterexamples",
                "sum ||g_n||_p <= C A_p sum (2n+1)/(n+1)^(2+2/p)",
                false,
                worst.is_none(),
                format!("partial sums {norms:.6?} vs majorant {majorant:.6?}"),
            ));
            let increments = c.integral_test_increments(xf);
            let covered_from = c.stages.iter().position(|s| s.qualifies || s.covered);
            let growth_ok = covered_from.is_some_and(|n0| increments[n0..].iter().all(|d| *d >= beta - cfg.tolerances.jump));
            entries.push(entry(
                "integral_test.growth",
                "randomness_tests",
                "T_{2n+2}(t) - T_{2n}(t) >= 4C/pi^2 beyond the first qualifying n",
                false,
                growth_ok,
                format!("increments {increments:.6?}"),
            ));
            let mut dump = c.to_json();
            dump["trace_discrepancies"] = serde_json::json!(c.jump_discrepancies(xf)?);
            files.push(("construction.json".into(), pretty(&dump)));
            files.push(("fourier_trace.csv".into(), trace.to_csv()));
        }
        Construction::SchnorrPoisson => {
            let c = build_schnorr_poisson(&family, cfg.m_max)?;
            for m in 0..=cfg.m_max {
                let ch = c.check_stage(m);
                entries.push(entry(
                    &format!("schnorr_poisson.stage.m{m}"),
                    "counterexamples",
                    "integral, step norm, monotone, nonnegative, vanishing on V_m",
                    true,
                    ch.all(),
                    format!("{ch:?}"),
                ));
            }
            let mut radial = Vec::new();
            for y in cfg.heights() {
                let stage = c.stage_for_height(&exact::from_f64(y));
                let f = &c.stages[stage.unwrap_or(cfg.m_max)].f;
                let bound = stage.map(|_| harmrand::counterexamples::StepConstruction::radial_lower_bound(xf));
                radial.push(RadialEntry {
                    y,
                    value: poisson::poisson_integral(f, xf, y)?,
                    lower_bound: bound,
                    bound_active: bound.is_some(),
                    kernel_certificate: poisson::kernel_certificate(y),
                });
            }
            let trace = RadialTrace { x: xf, entries: radial, reference_value: None };
            let active = trace.entries.iter().filter(|e| e.bound_active).count();
            let violations: Vec<f64> = trace
                .entries
                .iter()
                .filter(|e| e.lower_bound.is_some_and(|b| e.value < b - cfg.tolerances.radial))
                .map(|e| e.y)
                .collect();
            entries.push(entry(
                "schnorr_poisson.radial_lower_bound",
                "poisson",
                "P[f_m](x, y) >= 3(2 - 2^-K)/(5 pi) when lambda(V_m) <= y/4",
                false,
                violations.is_empty(),
                format!("{active} active heights; violations at {violations:?}"),
            ));
            files.push(("construction.json".into(), pretty(&c.to_json())));
            files.push(("poisson_trace.csv".into(), trace.to_csv()));
        }
        Construction::MlPoisson => {
            let c = build_ml_poisson(&family, cfg.s_max)?;
            let mut csv = String::from("s,intervals,l1_norm,norm_bound,within_bound,covers_target,value_at_target\n");
            for st in &c.stages {
                let ch = c.check_stage(st.s)?;
                let bound = harmrand::counterexamples::TentConstruction::norm_bound(st.s);
                let value = st.f.value_at(&x);
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    st.s,
                    st.intervals.len(),
                    exact::format(&st.l1_norm),
                    exact::format(&bound),
                    st.l1_norm <= bound,
                    c.covers(st.s, &x),
                    exact::format(&value)
                ));
                entries.push(entry(
                    &format!("ml_poisson.stage.s{}", st.s),
                    "counterexamples",
                    "||f_{2n+1}||_1 <= (2n+1)/2^n, f_{2n} = 0, positive on covered points",
                    true,
                    ch.all(),
                    format!("{ch:?}"),
                ));
            }
            let deepest = c.stages.iter().rev().find(|s| s.s % 2 == 1).unwrap_or(&c.stages[0]);
            let trace = poisson::radial_trace(&deepest.f, xf, &cfg.heights())?.with_lower_bound(|_| None);
            let l1 = exact::to_f64(&deepest.l1_norm);
            let over: Vec<f64> =
                trace.entries.iter().filter(|e| e.value > l1 / (PI * e.y) * (1.0 + 1e-12)).map(|e| e.y).collect();
            entries.push(entry(
                "ml_poisson.contraction",
                "poisson",
                "P[f_s](x, y) <= ||f_s||_1/(pi y)",
                false,
                over.is_empty(),
                format!("stage s={}; violations at {over:?}", deepest.s),
            ));
            files.push(("construction.json".into(), pretty(&c.to_json())));
            files.push(("ml_norms.csv".into(), csv));
            files.push(("poisson_trace.csv".into(), trace.to_csv()));
        }
    }
    let report = ScenarioReport {
        construction: cfg.construction.name().into(),
        target_point: exact::format(&x),
        passed: entries.iter().all(|e| e.status != Status::Fail),
        entries,
    };
    files.push(("report.json".into(), pretty(&report)));
    Ok(Artifacts { files, report })
}

/// Builds the scenario and writes its artifacts into `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let artifacts = scenario_artifacts(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut files = Vec::new();
    for (name, contents) in &artifacts.files {
        let path = cfg.output_dir.join(name);
        fs::write(&path, contents)?;
        files.push(path);
    }
    Ok(ScenarioOutput { report: artifacts.report, files })
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Reads a boundary function file (`{"kind": "step" | "linear", …}`).
pub fn load_boundary_function(path: &Path) -> Result<BoundaryFunction, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn scan_spec(spacing: f64) -> ScanSpec {
    ScanSpec { spacing, ..ScanSpec::default() }
}
