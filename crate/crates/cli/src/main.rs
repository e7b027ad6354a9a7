use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bdat_core::evaluation::{
    run_bench, security_report, timing_report, EvalError, StageKc, PRESETS, REPORT_SCHEMA,
};
use bdat_core::pipeline::{
    EnrollOptions, EnrollSeeds, Enrollment, PipelineError, Population, StageConfig, Store, Timings,
};
use bdat_core::vectors::{
    load_features, synth_classes, FeatureFormat, FeatureVector, SynthSpec, VectorError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "bdat",
    version,
    about = "Protected face-template enrollment and verification"
)]
struct Cli {
    /// Template store directory.
    #[arg(long, global = true, env = "BDAT_STORE", default_value = "bdat-store")]
    store: PathBuf,
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Enroll a user from a file of training vectors.
    Enroll {
        user: String,
        features: PathBuf,
        #[command(flatten)]
        issue: IssueArgs,
        /// Replace an existing enrollment.
        #[arg(long)]
        overwrite: bool,
    },
    /// Verify a query vector against a user's record. Exits 0 on accept, 1 on reject.
    Verify {
        user: String,
        query: PathBuf,
        /// Row of the query file to use.
        #[arg(long, default_value_t = 0)]
        row: usize,
    },
    /// Reissue a user's record under fresh randomness.
    Revoke {
        user: String,
        features: PathBuf,
        #[command(flatten)]
        issue: IssueArgs,
    },
    /// Run the synthetic benchmark and write reports to a directory.
    Bench(BenchArgs),
    /// Print the security-strength table.
    Security {
        /// Named preset.
        #[arg(long, conflicts_with = "kc")]
        preset: Option<String>,
        /// Same template length Kc for every stage.
        #[arg(long)]
        kc: Option<u64>,
    },
}

#[derive(Args)]
struct IssueArgs {
    /// Base seed for all enrollment randomness. Omit to use OS entropy.
    #[arg(long)]
    seed: Option<u64>,
    /// Vectors from other subjects used to model the background population.
    #[arg(long)]
    population: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    classes: usize,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Samples per class used for enrollment; the rest are probes.
    #[arg(long, default_value_t = 5)]
    enroll: usize,
    #[arg(long, default_value_t = 1.0)]
    center_scale: f64,
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,
    /// Timing repetitions.
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
}

enum Failure {
    Domain(String),
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 2,
            Failure::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Input(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_domain() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Pipeline(p) => p.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<VectorError> for Failure {
    fn from(e: VectorError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_failure(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Vec<FeatureVector>, Failure> {
    Ok(load_features(path, FeatureFormat::from_path(path))?)
}

fn load_config(path: Option<&Path>, features_dim: Option<usize>) -> Result<StageConfig, Failure> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_failure(p))?;
            let config: StageConfig =
                toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            config.validate()?;
            Ok(config)
        }
        None => Ok(StageConfig {
            d: features_dim.unwrap_or(StageConfig::default().d),
            ..StageConfig::default()
        }),
    }
}

fn timings_json(t: &Timings) -> Value {
    let stages: serde_json::Map<String, Value> = t
        .stages
        .iter()
        .map(|(name, d)| (name.to_string(), json!(d.as_secs_f64() * 1e6)))
        .collect();
    json!({ "stages_us": stages, "total_us": t.total.as_secs_f64() * 1e6 })
}

fn emit(format: Format, value: &Value, text: &str) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("json")),
        Format::Text => print!("{text}"),
    }
}

/// Seeds and creation time for a new record: fixed under `--seed`, otherwise
/// drawn from OS entropy and reported for audit.
fn issue_options(args: &IssueArgs, overwrite: bool) -> Result<(EnrollSeeds, EnrollOptions, u64), Failure> {
    let population =
        match &args.population {
            Some(p) => Some(Population::fit(&load(p)?).ok_or_else(|| {
                Failure::Input(format!("{}: population file is empty or ragged", p.display()))
            })?),
            None => None,
        };
    let (seeds, created_at, registry_seed) = match args.seed {
        Some(s) => (EnrollSeeds::from_base(s), Some(0), s),
        None => {
            let seeds = EnrollSeeds {
                projection: rand::random(),
                targets: rand::random(),
                commitment: rand::random(),
            };
            let registry_seed = rand::random();
            eprintln!(
                "seeds: projection={} targets={} commitment={} registry={}",
                seeds.projection, seeds.targets, seeds.commitment, registry_seed
            );
            (seeds, None, registry_seed)
        }
    };
    let options = EnrollOptions {
        overwrite,
        population,
        created_at,
    };
    Ok((seeds, options, registry_seed))
}

fn report_enrollment(cli: &Cli, store: &Store, user: &str, e: &Enrollment) {
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    let r = &e.record;
    let meta = &r.model.train_meta;
    let file = store.record_path(user);
    let value = json!({
        "schema_version": REPORT_SCHEMA,
        "user": user,
        "record": file.display().to_string(),
        "n_total": r.config.n_total(),
        "blocks": r.config.blocks,
        "projection_seed": r.projection_seed,
        "converged": meta.converged,
        "epochs_run": meta.epochs_run,
        "warnings": e.warnings,
        "timings": timings_json(&e.timings),
    });
    let text = format!(
        "enrolled {user}: {} bits in {} block(s), training {} after {} epochs\nrecord {}\n",
        r.config.n_total(),
        r.config.blocks,
        if meta.converged {
            "converged"
        } else {
            "did not converge"
        },
        meta.epochs_run,
        file.display()
    );
    emit(cli.format, &value, &text);
}

fn enroll(cli: &Cli, user: &str, features: &Path, issue: &IssueArgs, overwrite: bool) -> Result<u8, Failure> {
    let training = load(features)?;
    let config = load_config(cli.config.as_deref(), training.first().map(FeatureVector::dim))?;
    let (seeds, options, registry_seed) = issue_options(issue, overwrite)?;
    let store = Store::open(&cli.store, registry_seed)?;
    let e = store.enroll(user, &training, &config, seeds, &options)?;
    report_enrollment(cli, &store, user, &e);
    Ok(0)
}

fn revoke(cli: &Cli, user: &str, features: &Path, issue: &IssueArgs) -> Result<u8, Failure> {
    let training = load(features)?;
    let (seeds, options, registry_seed) = issue_options(issue, false)?;
    let store = Store::open(&cli.store, registry_seed)?;
    let e = store.revoke(user, &training, seeds, &options)?;
    report_enrollment(cli, &store, user, &e);
    Ok(0)
}

fn verify(cli: &Cli, user: &str, query: &Path, row: usize) -> Result<u8, Failure> {
    let queries = load(query)?;
    let q = queries.get(row).ok_or_else(|| {
        Failure::Input(format!(
            "{}: no row {row} ({} rows)",
            query.display(),
            queries.len()
        ))
    })?;
    if !cli.store.join("index.json").exists() {
        return Err(Failure::Domain(format!(
            "user {user:?} is not enrolled (no store at {})",
            cli.store.display()
        )));
    }
    let store = Store::open(&cli.store, 0)?;
    let v = store.verify(user, &q.values)?;
    let decision = if v.accepted { "ACCEPT" } else { "REJECT" };
    let value = json!({
        "schema_version": REPORT_SCHEMA,
        "user": user,
        "decision": decision,
        "accepted": v.accepted,
        "errors_corrected": v.errors_corrected(),
        "timings": timings_json(&v.timings),
    });
    emit(cli.format, &value, &format!("{decision}\n"));
    Ok(if v.accepted { 0 } else { 1 })
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(io_failure(path))
}

fn bench(cli: &Cli, args: &BenchArgs) -> Result<u8, Failure> {
    let config = load_config(cli.config.as_deref(), None)?;
    let synth = SynthSpec {
        seed: args.seed,
        num_classes: args.classes,
        samples_per_class: args.samples,
        dim: config.d,
        class_center_scale: args.center_scale,
        within_sigma: args.sigma,
    };
    synth.validate()?;
    if args.enroll >= args.samples {
        return Err(Failure::Input(format!(
            "--enroll ({}) must be below --samples ({}) to leave probes",
            args.enroll, args.samples
        )));
    }
    let run = run_bench(&synth, &config, args.enroll, args.seed)?;
    let timings = timing_report(
        &synth_classes(&synth)?,
        &config,
        args.repetitions.max(1),
        args.seed,
    )?;

    fs::create_dir_all(&args.out).map_err(io_failure(&args.out))?;
    let out = |name: &str| args.out.join(name);
    write_file(&out("scores.json"), pretty(&run.report))?;
    write_file(&out("scores.txt"), run.report.scores.to_text())?;
    write_file(&out("histograms.json"), pretty(&run.histograms))?;
    write_file(&out("histograms.csv"), run.histograms.to_csv())?;
    write_file(&out("timings.json"), pretty(&timings))?;
    write_file(&out("timings.txt"), timings.to_text())?;

    let r = &run.report.rates;
    let value = json!({
        "schema_version": REPORT_SCHEMA,
        "out": args.out.display().to_string(),
        "rates": r,
        "summary": run.report.scores.summary,
    });
    let text = format!(
        "genuine accept {}/{} ({:.3}), imposter accept {}/{} ({:.3})\n{}reports written to {}\n",
        r.genuine_accepts,
        r.genuine_trials,
        r.genuine_accept_rate,
        r.imposter_accepts,
        r.imposter_trials,
        r.imposter_accept_rate,
        run.report.scores.to_text(),
        args.out.display()
    );
    emit(cli.format, &value, &text);
    Ok(0)
}

fn security(cli: &Cli, preset: Option<&str>, kc: Option<u64>) -> Result<u8, Failure> {
    let report = match (preset, kc) {
        (Some(name), _) => {
            let stages = StageKc::preset(name).map_err(|_| {
                Failure::Input(format!("unknown preset {name:?} (known: {})", PRESETS.join(", ")))
            })?;
            security_report(&stages, name, None)?
        }
        (None, Some(kc)) => security_report(&StageKc::uniform(kc), "kc", None)?,
        (None, None) => {
            let config = load_config(cli.config.as_deref(), None)?;
            let code = config.validate()?;
            let secret = (config.blocks * code.k_msg()) as u64;
            security_report(&StageKc::from_config(&config), "config", Some(secret))?
        }
    };
    let value = serde_json::to_value(&report).expect("report serializes");
    emit(cli.format, &value, &report.to_text());
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Enroll {
            user,
            features,
            issue,
            overwrite,
        } => enroll(cli, user, features, issue, *overwrite),
        Command::Verify { user, query, row } => verify(cli, user, query, *row),
        Command::Revoke {
            user,
            features,
            issue,
        } => revoke(cli, user, features, issue),
        Command::Bench(args) => bench(cli, args),
        Command::Security { preset, kc } => security(cli, preset.as_deref(), *kc),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
