//! Command-line parsing, output directory resolution and result persistence.

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::config::{load_config, ExperimentConfig};
use crate::suites::{run_suite, SuiteOutput};

pub const EXIT_OK: i32 = 0;
/// A check failed or a computation could not be completed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Bad usage, bad config or unwritable output.
pub const EXIT_USAGE: i32 = 2;

pub const OUT_ENV: &str = "PINLAB_OUT";
pub const METADATA_FILE: &str = "runs.jsonl";

#[derive(Debug, Parser)]
#[command(name = "pinlab", version, about = "Run pinning-model experiment suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Renewal function and intersection asymptotics on the `n` grid.
    Asymptotics(RunArgs),
    /// Homogeneous free energy, derivatives and finite-volume values.
    Homogeneous(RunArgs),
    /// Quenched free energy against the annealed bound.
    #[command(name = "quenched_grid")]
    QuenchedGrid(RunArgs),
    /// Full bound reports.
    #[command(name = "bounds_grid")]
    BoundsGrid(RunArgs),
    /// Interpolation inequality checks.
    #[command(name = "replica_checks")]
    ReplicaChecks(RunArgs),
    /// The acceptance battery; the config only supplies the seed.
    Acceptance(RunArgs),
    /// Resolve a config and print it with every default filled in.
    Validate {
        /// Config file.
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config file; optional for `acceptance`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides PINLAB_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed; overrides `batch.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (suite, args) = match cli.command {
        Command::Validate { config } => return validate(&config),
        Command::Asymptotics(a) => ("asymptotics", a),
        Command::Homogeneous(a) => ("homogeneous", a),
        Command::QuenchedGrid(a) => ("quenched_grid", a),
        Command::BoundsGrid(a) => ("bounds_grid", a),
        Command::ReplicaChecks(a) => ("replica_checks", a),
        Command::Acceptance(a) => ("acceptance", a),
    };
    run(suite, args)
}

fn validate(path: &Path) -> i32 {
    match load_config(path, None) {
        Ok(c) => {
            for n in &c.notes {
                println!("# note: {n}");
            }
            print!("{}", c.to_toml());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_USAGE
        }
    }
}

fn resolve_config(suite: &str, args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut config = match &args.config {
        Some(p) => load_config(p, Some(suite)).map_err(|e| e.to_string())?,
        None if suite == "acceptance" => crate::config::parse_config_for("[law]\nkind = \"srw_d1\"\n", Some(suite))
            .map_err(|e| e.to_string())?,
        None => return Err(format!("{suite} needs --config <path>")),
    };
    if let Some(seed) = args.seed {
        config.batch.master_seed = seed;
    }
    Ok(config)
}

/// `--out`, then `PINLAB_OUT`, then the config.
pub fn output_dir(cli: Option<&Path>, env: Option<OsString>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    match env {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(&config.output_dir),
    }
}

fn run(suite: &str, args: RunArgs) -> i32 {
    let mut config = match resolve_config(suite, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let dir = output_dir(args.out.as_deref(), std::env::var_os(OUT_ENV), &config);
    config.output_dir = dir.display().to_string();
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create output directory {}: {e}", dir.display());
        return EXIT_USAGE;
    }
    for n in &config.notes {
        eprintln!("note: {n}");
    }

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let result = match args.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(|| run_suite(&config)),
            Err(e) => {
                eprintln!("error: cannot start {w} workers: {e}");
                return EXIT_USAGE;
            }
        },
        None => run_suite(&config),
    };
    let wall = clock.elapsed().as_secs_f64();

    let (output, error) = match result {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let code = match (&output, &error) {
        (Some(o), _) if o.passed => EXIT_OK,
        _ => EXIT_CHECK_FAILED,
    };
    let csv = dir.join(format!("{suite}.csv"));
    if let Some(o) = &output {
        if let Err(e) = write_csv(&csv, o) {
            eprintln!("error: cannot write {}: {e}", csv.display());
            return EXIT_USAGE;
        }
    }
    let record = metadata(&config, output.as_ref(), error.as_deref(), started, wall, code, &csv);
    if let Err(e) = append_line(&dir.join(METADATA_FILE), &record) {
        eprintln!("error: cannot write metadata: {e}");
        return EXIT_USAGE;
    }
    match (&output, &error) {
        (Some(o), _) => eprintln!(
            "{suite}: {} rows, {} -> {}",
            o.rows,
            if o.passed { "all checks passed" } else { "check failure" },
            csv.display()
        ),
        (_, Some(e)) => eprintln!("error: {suite} failed: {e}"),
        _ => {}
    }
    code
}

fn write_csv(path: &Path, output: &SuiteOutput) -> std::io::Result<()> {
    let mut text = String::with_capacity(output.header.len() + output.body.len() + 1);
    text.push_str(&output.header);
    text.push('\n');
    text.push_str(&output.body);
    fs::write(path, text)
}

fn append_line(path: &Path, line: &str) -> std::io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    Sha256::digest(config.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn metadata(
    config: &ExperimentConfig,
    output: Option<&SuiteOutput>,
    error: Option<&str>,
    started: f64,
    wall: f64,
    code: i32,
    csv: &Path,
) -> String {
    serde_json::json!({
        "suite": config.suite,
        "config_sha256": config_hash(config),
        "config": config,
        "versions": {
            "pinlab": env!("CARGO_PKG_VERSION"),
            "pinlab_core": pinlab_core::VERSION,
            "disorder_generator": pinlab_core::disorder::GENERATOR_SPEC,
        },
        "started_unix_s": started,
        "wall_time_s": wall,
        "rows": output.map(|o| o.rows),
        "passed": output.map(|o| o.passed),
        "error": error,
        "exit_code": code,
        "csv": csv.display().to_string(),
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn output_precedence() {
        let c = parse_config("suite = \"homogeneous\"\noutput_dir = \"from-config\"\n[law]\nalpha = 0.3\n").unwrap();
        let env = Some(OsString::from("from-env"));
        assert_eq!(output_dir(Some(Path::new("from-cli")), env.clone(), &c), PathBuf::from("from-cli"));
        assert_eq!(output_dir(None, env, &c), PathBuf::from("from-env"));
        assert_eq!(output_dir(None, Some(OsString::new()), &c), PathBuf::from("from-config"));
        assert_eq!(output_dir(None, None, &c), PathBuf::from("from-config"));
    }

    #[test]
    fn hash_tracks_the_resolved_config() {
        let a = parse_config("suite = \"homogeneous\"\n[law]\nalpha = 0.3\n").unwrap();
        let b = parse_config("suite = \"homogeneous\"\n[law]\nalpha = 0.3\nn_max = 65536\n").unwrap();
        let c = parse_config("suite = \"homogeneous\"\n[law]\nalpha = 0.4\n").unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&c));
        assert_eq!(config_hash(&a).len(), 64);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["pinlab", "no_such_suite"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pinlab", "homogeneous"]), EXIT_USAGE);
        assert_eq!(main_with_args(["pinlab", "validate", "/nonexistent/pinlab.toml"]), EXIT_USAGE);
    }
}
