use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use harmrand::exact;
use harmrand::poisson;
use harmrand::verify::{self, Caps, VerificationReport};
use harmrand::BoundaryFunction;
use harmrand_cli::{
    load_boundary_function, pretty, run_scenario, scan_spec, scenario_artifacts, CliError, Construction, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "harmrand", version, about = "Fourier and Poisson constructions against randomness tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fejér and Poisson kernel identities and bounds.
    KernelCheck {
        /// Check Fejér identities for N < this.
        #[arg(long, default_value_t = 65)]
        degrees: u64,
        #[arg(long, default_value_t = 200)]
        bound_degrees: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a construction and write its dump, traces and report.
    Build {
        #[arg(long, value_enum)]
        construction: Option<Construction>,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Fourier partial sums of the divergent construction at the target.
    FourierTrace {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Radial trace of the step-function construction, or of `--input`.
    PoissonTrace {
        /// Boundary function JSON; the step-function construction when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Evaluation point for `--input`, as "p/q".
        #[arg(long, default_value = "0")]
        x: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Grid check of the weak-type bound of the Poisson maximal operator.
    WeakTypeCheck {
        #[arg(long, conflicts_with = "seed")]
        input: Option<PathBuf>,
        /// Check this many random functions generated from the seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Levels; defaults to 2^-3 .. 2^3.
        #[arg(long, value_delimiter = ',')]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = (-12f64).exp2())]
        spacing: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every bound check within the caps.
    VerifyAll {
        /// Caps as JSON or TOML; missing fields keep their defaults.
        #[arg(long)]
        caps: Option<PathBuf>,
        /// Set every cap to zero.
        #[arg(long)]
        zero_caps: bool,
        /// Negative control: corrupt one Fejér coefficient.
        #[arg(long)]
        corrupt_fejer: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Scenario flags; they override the config file.
#[derive(Args, Clone, Default)]
struct ScenarioArgs {
    /// Scenario config (JSON, or TOML by extension).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    s_max: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "C", alias = "c")]
    c: Option<u32>,
    /// Comma-separated decreasing heights.
    #[arg(long, value_delimiter = ',')]
    heights: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ScenarioArgs {
    fn resolve(&self, construction: Option<Construction>) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(c) = construction {
            cfg.construction = c;
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $( if let Some(v) = &self.$f { cfg.$g = v.clone().into(); } )* };
        }
        set!(target => target_point, n_max => n_max, m_max => m_max, s_max => s_max, p => p, c => c, out => output_dir);
        if self.depth.is_some() {
            cfg.depth = self.depth;
        }
        if self.heights.is_some() {
            cfg.heights = self.heights.clone();
        }
        if self.checkpoints.is_some() {
            cfg.checkpoints = self.checkpoints.clone();
        }
        Ok(cfg)
    }
}

const KERNEL_POISSON_CHECKS: [&str; 3] = ["poisson.kernel_bounds", "poisson.unit_mass", "poisson.mass_contraction"];

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Ok(std::fs::write(path, text)?)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn status(passed: bool) -> ExitCode {
    ExitCode::from(if passed { 0 } else { 1 })
}

fn report_failures(report: &VerificationReport) {
    for f in report.failures() {
        eprintln!("FAILED {} ({}): {}", f.id, f.bound, f.detail);
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::KernelCheck { degrees, bound_degrees, samples, out } => {
            let caps = Caps { fejer_degrees: degrees, fejer_bound_degrees: bound_degrees, samples, ..Caps::zero() };
            let report = verify::verify_all(&caps);
            let kernel: Vec<_> = report
                .entries
                .iter()
                .filter(|e| e.id.starts_with("fejer.") || KERNEL_POISSON_CHECKS.contains(&e.id.as_str()))
                .cloned()
                .collect();
            let report = VerificationReport { entries: kernel, ..report };
            emit(&out, &pretty(&report))?;
            report_failures(&report);
            let passed = report.failures().next().is_none();
            Ok(status(passed))
        }
        Command::Build { construction, scenario } => {
            let cfg = scenario.resolve(construction)?;
            let output = run_scenario(&cfg)?;
            for f in &output.files {
                eprintln!("wrote {}", f.display());
            }
            for e in output.report.failures() {
                eprintln!("FAILED {} ({}): {}", e.id, e.bound, e.detail);
            }
            Ok(status(output.report.passed))
        }
        Command::FourierTrace { scenario } => {
            let cfg = scenario.resolve(Some(Construction::Fourier))?;
            let artifacts = scenario_artifacts(&cfg)?;
            let csv = artifacts.files.iter().find(|(n, _)| n == "fourier_trace.csv").expect("fourier trace").1.clone();
            emit(&scenario.out.map(|d| d.join("fourier_trace.csv")), &csv)?;
            Ok(status(artifacts.report.passed))
        }
        Command::PoissonTrace { input: None, scenario, .. } => {
            let cfg = scenario.resolve(Some(Construction::SchnorrPoisson))?;
            let artifacts = scenario_artifacts(&cfg)?;
            let csv = artifacts.files.iter().find(|(n, _)| n == "poisson_trace.csv").expect("poisson trace").1.clone();
            emit(&scenario.out.map(|d| d.join("poisson_trace.csv")), &csv)?;
            Ok(status(artifacts.report.passed))
        }
        Command::PoissonTrace { input: Some(path), x, scenario } => {
            let f = load_boundary_function(&path)?;
            let x = exact::to_f64(&exact::parse(&x).map_err(|e| CliError::Usage(format!("--x: {e}")))?);
            let heights = scenario.heights.clone().unwrap_or_else(poisson::default_y_sequence);
            let trace = match &f {
                BoundaryFunction::Step { pieces } => poisson::radial_trace(pieces, x, &heights),
                BoundaryFunction::Linear { vertices } => poisson::radial_trace(vertices, x, &heights),
            }
            .map_err(|e| CliError::Usage(e.to_string()))?;
            emit(&scenario.out, &trace.to_csv())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::WeakTypeCheck { input, seed, count, alpha, spacing, out } => {
            if !(spacing > 0.0) {
                return Err(CliError::Usage("--spacing must be positive".into()));
            }
            let alphas = if alpha.is_empty() { (-3..=3).map(|e| f64::from(e).exp2()).collect() } else { alpha };
            if alphas.iter().any(|a| !(*a > 0.0)) {
                return Err(CliError::Usage("--alpha values must be positive".into()));
            }
            let functions = match (input, seed) {
                (Some(path), _) => vec![load_boundary_function(&path)?],
                (None, seed) => verify::sample_functions(seed.unwrap_or(0), count),
            };
            let spec = scan_spec(spacing);
            let mut rows = Vec::new();
            let mut passed = true;
            for (i, f) in functions.iter().enumerate() {
                let reports = match f {
                    BoundaryFunction::Step { pieces } => poisson::weak_type_sweep(pieces, &alphas, &spec),
                    BoundaryFunction::Linear { vertices } => poisson::weak_type_sweep(vertices, &alphas, &spec),
                }?;
                passed &= reports.iter().all(|r| r.holds);
                rows.push(serde_json::json!({ "function": i, "reports": reports }));
            }
            emit(&out, &pretty(&serde_json::json!({ "passed": passed, "functions": rows })))?;
            Ok(status(passed))
        }
        Command::VerifyAll { caps, zero_caps, corrupt_fejer, out } => {
            let mut c = match (&caps, zero_caps) {
                (Some(_), true) => return Err(CliError::Usage("--caps and --zero-caps are exclusive".into())),
                (Some(path), false) => load_caps(path)?,
                (None, true) => Caps::zero(),
                (None, false) => Caps::default(),
            };
            c.corrupt_fejer |= corrupt_fejer;
            let report = verify::verify_all(&c);
            emit(&out, &pretty(&report))?;
            report_failures(&report);
            Ok(status(report.passed))
        }
    }
}

fn load_caps(path: &std::path::Path) -> Result<Caps, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
