mod args;
mod commands;
mod config;
mod error;
mod values;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command};
use commands::Run;
use config::{merge, FileConfig, DEFAULT_OUT_DIR};
use error::CliError;

const SEED_RULE: &str = "task seed = master XOR splitmix64(task index)";
const TIMING_FILE: &str = "timing.txt";

/// Everything needed to reproduce a run; written as manifest.json.
#[derive(Serialize)]
struct RunManifest<'a> {
    toolkit: &'a str,
    version: &'a str,
    subcommand: &'a str,
    seed: u64,
    strict: bool,
    seed_rule: &'a str,
    config: Value,
    derived: &'a std::collections::BTreeMap<String, Value>,
    warnings: &'a [String],
    outputs: &'a [String],
    timing: &'a str,
}

macro_rules! dispatch {
    ($cmd:expr, $file:expr, $run:expr, $($variant:ident => $body:path),+ $(,)?) => {
        match $cmd {
            $(Command::$variant(flags) => {
                let name = $cmd.name();
                let mut a = merge(flags, $file.sections.get(name), name)?;
                $body(&mut a, $run)?;
                without_nulls(serde_json::to_value(&a).expect("settings serialize"))
            })+
        }
    };
}

/// Unset optional settings mean "automatic"; omit them from the manifest.
fn without_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(m.into_iter().filter(|(_, x)| !x.is_null()).collect()),
        other => other,
    }
}

fn execute(cli: Cli) -> Result<Option<bool>, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let command = match (cli.command, &file.replay_of) {
        (Some(c), Some(r)) if c.name() != r => {
            return Err(CliError::usage(format!(
                "--config: manifest is for `{r}`, not `{}`",
                c.name()
            )));
        }
        (Some(c), _) => c,
        (None, Some(r)) => Command::empty(r)
            .ok_or_else(|| CliError::usage(format!("--config: unknown subcommand `{r}`")))?,
        (None, None) => return Err(CliError::usage("no subcommand given (see --help)")),
    };
    let seed = cli.seed.or(file.global.seed).unwrap_or(0);
    let strict = cli.strict || file.global.strict.unwrap_or(false);
    let out_dir: PathBuf = cli
        .out_dir
        .or(file.global.out_dir.clone())
        .unwrap_or_else(|| DEFAULT_OUT_DIR.into());
    if let Some(n) = cli.threads.or(file.global.threads) {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        // only fails when a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    fs::create_dir_all(&out_dir).map_err(|e| {
        CliError::usage(format!(
            "--out-dir: cannot create {}: {e}",
            out_dir.display()
        ))
    })?;

    let start = Instant::now();
    let mut run = Run::new(out_dir.clone(), seed, strict);
    let config = dispatch!(&command, file, &mut run,
        SampleFbm => commands::sample_fbm,
        SampleFou => commands::sample_fou,
        FouCov => commands::fou_cov,
        SimulateSde => commands::simulate_sde,
        Euler => commands::euler,
        EstimateHurst => commands::estimate,
        Verify => commands::verify,
        Wick => commands::wick,
        Covariance => commands::covariance,
    );
    let elapsed = start.elapsed();

    let manifest = RunManifest {
        toolkit: "hurstlab",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: command.name(),
        seed,
        strict,
        seed_rule: SEED_RULE,
        config,
        derived: &run.derived,
        warnings: &run.warnings,
        outputs: &run.outputs,
        timing: TIMING_FILE,
    };
    let mut bytes = commands::to_json(&manifest);
    bytes.push(b'\n');
    fs::write(out_dir.join("manifest.json"), bytes)?;
    fs::write(
        out_dir.join(TIMING_FILE),
        format!("wall_clock_seconds = {:.6}\n", elapsed.as_secs_f64()),
    )?;

    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    for line in &run.stdout {
        println!("{line}");
    }
    Ok(run.verdict)
}

fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(Some(false)) => 3,
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn main() {
    std::process::exit(run(std::env::args()));
}
