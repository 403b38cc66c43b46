//! Command-line front end: threshold tables, inequality checks, simulation
//! runs and certificates.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use blowcert_core::certifier::{self, build_report, certify_config, disposition, monitor, BlowupCertificate};
use blowcert_core::config::{parse_config, SimConfig};
use blowcert_core::fields::functionals;
use blowcert_core::inequality::{
    dissipation_lower_bound, verify_holder11, verify_holder13, verify_jensen14, verify_momentum16,
    verify_sobolev10, GradientChoice, InequalityReport,
};
use blowcert_core::io::{self, RunManifest};
use blowcert_core::solver::{initial_data, run_observed};
use blowcert_core::thresholds::{admissibility, threshold_set, ExponentParams};
use blowcert_core::{Error, Result};

/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "blowcert", version, about = "Blow-up certificates for compressible non-Newtonian fluids and MHD")]
struct Cli {
    /// Worker threads for the field kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Threshold exponents and constants for (n, γ[, q]).
    Thresholds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        q: Option<f64>,
        /// Total mass entering K1.
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        /// Pressure coefficient entering K1.
        #[arg(long = "A", default_value_t = 1.0)]
        a: f64,
        /// Check the MHD hypotheses instead of the fluid ones.
        #[arg(long)]
        mhd: bool,
        #[arg(long)]
        json: bool,
    },
    /// Evaluates functional inequalities on the initial data of a config.
    Verify {
        #[arg(long, required_unless_present = "all")]
        check: Option<CheckName>,
        #[arg(long, conflicts_with = "check")]
        all: bool,
        #[arg(long)]
        config: PathBuf,
        /// Derivative used by the Sobolev check.
        #[arg(long, value_enum, default_value_t = Gradient::Full)]
        gradient: Gradient,
        /// Exponent σ of the interpolation check (default (1 + γ)/2).
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Runs a simulation and writes series, snapshots, certificate and report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certificate for the initial data only.
    Certify {
        #[arg(long)]
        config: PathBuf,
        /// Also write the certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a recorded series against a certificate.
    Monitor {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        /// Run manifest; defaults to manifest.json next to the series if present.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Also write the monitor report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum CheckName {
    Sobolev10,
    Holder11,
    Holder13,
    Jensen14,
    Momentum16,
    DissipationBound,
}

const ALL_CHECKS: [CheckName; 6] = [
    CheckName::Sobolev10,
    CheckName::Holder11,
    CheckName::Holder13,
    CheckName::Jensen14,
    CheckName::Momentum16,
    CheckName::DissipationBound,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Gradient {
    Full,
    Symmetric,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    dispatch_to(argv, &mut out, &mut err)
}

/// [`dispatch`] with explicit output streams.
pub fn dispatch_to<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if argv.len() <= 1 {
        let _ = writeln!(err, "{}", usage());
        return EXIT_USAGE;
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let result = with_threads(cli.threads, || execute(cli.command, out, err));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn usage() -> String {
    use clap::CommandFactory;
    Cli::command().render_help().to_string()
}

fn with_threads<F>(threads: Option<usize>, f: F) -> Result<i32>
where
    F: FnOnce() -> Result<i32> + Send,
{
    match threads {
        None => f(),
        Some(0) => Err(Error::Config {
            path: "--threads".into(),
            message: "need at least one thread".into(),
        }),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Mismatch(format!("cannot start thread pool: {e}")))?;
            pool.install(f)
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Thresholds {
            n,
            gamma,
            q,
            mass,
            a,
            mhd,
            json,
        } => thresholds(n, gamma, q, mass, a, mhd, json, out, err),
        Command::Verify {
            check,
            all,
            config,
            gradient,
            sigma,
        } => {
            let config = parse_config(&config)?;
            let gradient = match gradient {
                Gradient::Full => GradientChoice::Full,
                Gradient::Symmetric => GradientChoice::Symmetric,
            };
            if all {
                let reports: Vec<serde_json::Value> = ALL_CHECKS
                    .iter()
                    .map(|&c| match verify(&config, c, gradient, sigma) {
                        Ok(r) => serde_json::to_value(r).expect("report serializes"),
                        Err(e) => serde_json::json!({ "name": check_label(c), "error": e.to_string() }),
                    })
                    .collect();
                emit(out, &reports)?;
                let failed = reports.iter().any(|r| r.get("passed") != Some(&serde_json::Value::Bool(true)));
                Ok(if failed { EXIT_FAILED_CHECK } else { 0 })
            } else {
                let report = verify(&config, check.expect("clap requires --check"), gradient, sigma)?;
                emit(out, &report)?;
                Ok(if report.passed { 0 } else { EXIT_FAILED_CHECK })
            }
        }
        Command::Simulate { config, out: dir } => simulate(&config, &dir, out),
        Command::Certify { config, out: path } => {
            let config = parse_config(&config)?;
            let cert = certify_config(&config)?;
            emit(out, &cert)?;
            if let Some(path) = path {
                io::write_json(&cert, &path)?;
            }
            if let Some(reason) = &cert.reason {
                let _ = writeln!(err, "no certificate: {reason}");
            }
            Ok(disposition(&cert, None, None).exit_code())
        }
        Command::Monitor {
            series,
            cert,
            manifest,
            out: path,
        } => monitor_files(&series, &cert, manifest.as_deref(), path.as_deref(), out),
    }
}

/// Exit code of `verify` when an inequality fails.
pub const EXIT_FAILED_CHECK: i32 = 5;

fn emit<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| Error::Mismatch(format!("cannot write output: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn thresholds(
    n: usize,
    gamma: f64,
    q: Option<f64>,
    mass: f64,
    a: f64,
    mhd: bool,
    json: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(Error::Config {
            path: "--gamma".into(),
            message: "gamma must exceed 1".into(),
        });
    }
    let set = threshold_set(n, gamma, q, mass, a)?;
    if let Some(q) = q {
        if q >= n as f64 {
            let _ = writeln!(err, "warning: q = {q} >= n = {n}; K and K1 need q < n");
        }
    }
    // The momentum is not known here; report the hypotheses as if P ≠ 0.
    let report = q.map(|q| {
        let params = ExponentParams {
            n,
            gamma,
            a,
            nu: 1.0,
            q,
            eta: 0.0,
        };
        admissibility(&params, &[1.0], mhd)
    });
    if json {
        let mut value = serde_json::json!({ "thresholds": set });
        if let Some(r) = &report {
            value["admissibility"] = serde_json::to_value(r)?;
        }
        emit(out, &value)?;
    } else {
        let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(|e| Error::Mismatch(e.to_string()));
        w(out, format!("q0 = {}", set.q0))?;
        w(out, format!("q1 = {}", set.q1))?;
        if let Some(lo) = set.mhd_lo {
            w(out, format!("mhd_lo = {lo}"))?;
        }
        if q.is_some() {
            w(out, format!("K = {}", set.k.map_or("undefined".into(), |k| k.to_string())))?;
            w(out, format!("K1 = {}", set.k1.map_or("undefined".into(), |k| k.to_string())))?;
        }
        if let Some(r) = &report {
            w(out, format!("condition15 = {} ({})", r.condition15, r.condition15_value))?;
            w(out, format!("in_q_range = {}", r.in_q_range))?;
            w(out, format!("in_open_q_range = {}", r.in_open_q_range))?;
            w(out, format!("in_mhd_range = {}", r.in_mhd_range))?;
            w(out, format!("dimension_ok = {}", r.dimension_ok))?;
            w(out, format!("theorem_applies (assuming P != 0) = {}", r.theorem_applies))?;
        }
    }
    Ok(0)
}

fn check_label(c: CheckName) -> &'static str {
    match c {
        CheckName::Sobolev10 => "Sobolev10",
        CheckName::Holder11 => "Holder11",
        CheckName::Holder13 => "Holder13",
        CheckName::Jensen14 => "Jensen14",
        CheckName::Momentum16 => "Momentum16",
        CheckName::DissipationBound => "DissipationBound",
    }
}

fn verify(config: &SimConfig, check: CheckName, gradient: GradientChoice, sigma: Option<f64>) -> Result<InequalityReport> {
    let (state, _) = initial_data(config)?;
    let params = config.exponent_params();
    let tol = &config.tolerances;
    let mass = functionals(&state, &params)?.m;
    match check {
        CheckName::Sobolev10 => verify_sobolev10(&state.u, params.q, gradient, tol.sobolev),
        CheckName::Holder11 => {
            let sigma = sigma.unwrap_or(0.5 * (1.0 + params.gamma));
            verify_holder11(&state.rho, sigma, params.gamma, tol.algebraic)
        }
        CheckName::Holder13 => verify_holder13(&state.rho, &state.u, params.q, tol.algebraic),
        CheckName::Jensen14 => verify_jensen14(&state.rho, params.q, params.gamma, params.a, mass, tol.algebraic),
        CheckName::Momentum16 => verify_momentum16(&state.rho, &state.u, &params, tol.algebraic),
        CheckName::DissipationBound => dissipation_lower_bound(&state, &params, mass, tol.composite),
    }
}

fn simulate(config_path: &Path, dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let config = parse_config(config_path)?;
    let snapshots = dir.join("snapshots");
    std::fs::create_dir_all(&snapshots).map_err(|e| Error::Io {
        path: snapshots.clone(),
        source: e,
    })?;
    let mut manifest = RunManifest::new(&config)?;
    let mut files = Vec::new();
    let cert = certify_config(&config)?;
    let output = run_observed(&config, |step, state| {
        let stem = format!("step_{step:08}");
        io::write_snapshot(state, &snapshots, &stem)?;
        files.push(format!("snapshots/{stem}.json"));
        files.push(format!("snapshots/{stem}.bin"));
        Ok(())
    })?;
    let final_stem = format!("step_{:08}", output.steps);
    if !files.iter().any(|f| f.contains(&final_stem)) {
        io::write_snapshot(&output.last, &snapshots, &final_stem)?;
        files.push(format!("snapshots/{final_stem}.json"));
        files.push(format!("snapshots/{final_stem}.bin"));
    }

    let n = config.grid.n();
    io::write_series_file(&output.series, n, &dir.join("series.csv"))?;
    io::write_json(&cert, &dir.join("cert.json"))?;
    let monitor_report = monitor(&output.series, &cert, &config.exponent_params())?;
    io::write_json(&monitor_report, &dir.join("monitor.json"))?;
    let report = build_report(&cert, Some(&monitor_report), Some(&output.status));
    certifier::write_report(&report, &dir.join("report.json"))?;

    let mut listed = vec![
        "series.csv".to_string(),
        "cert.json".into(),
        "monitor.json".into(),
        "report.json".into(),
        "report.txt".into(),
    ];
    listed.extend(files);
    manifest.files = listed;
    manifest.status = Some(output.status);
    manifest.disposition = Some(report.disposition);
    manifest.steps = output.steps;
    manifest.clamps = output.clamps;
    manifest.duration_seconds = started.elapsed().as_secs_f64();
    manifest.write(&dir.join("manifest.json"))?;

    let _ = write!(out, "{}", certifier::summary_text(&report));
    Ok(report.exit_code)
}

fn monitor_files(
    series_path: &Path,
    cert_path: &Path,
    manifest_path: Option<&Path>,
    out_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32> {
    let series = io::read_series_file(series_path)?;
    let cert: BlowupCertificate = io::read_json(cert_path)?;
    let sibling = series_path.with_file_name("manifest.json");
    let manifest_path = manifest_path.map(Path::to_path_buf).or_else(|| sibling.exists().then_some(sibling));
    let manifest = manifest_path.as_deref().map(RunManifest::read).transpose()?;
    if let (Some(m), Some(hash)) = (&manifest, &cert.config_hash) {
        if &m.config_hash != hash {
            return Err(Error::Mismatch(format!(
                "series was produced by config {} but the certificate is for {}",
                m.config_hash, hash
            )));
        }
    }
    let report = monitor(&series, &cert, &cert.params)?;
    if let Some(path) = out_path {
        io::write_json(&report, path)?;
    }
    emit(out, &report)?;
    let status = manifest.as_ref().and_then(|m| m.status);
    Ok(disposition(&cert, Some(&report), status.as_ref()).exit_code())
}
