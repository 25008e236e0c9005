//! Command-line front end for `slitwave`.
//!
//! Every subcommand reads the same `key = value` configuration. Any key can
//! also be given as a flag (`--x2-min -5`, `--slits -0.01 0.01 39.99 40.01`),
//! and flags win over the file.

pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::{Arg, ArgAction, ArgMatches, Command};

use commands::CliError;
use config::{is_list_key, parse_settings, ConfigError, Origin, RunConfig, Settings, KEYS};

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "SLITWAVE_THREADS";

const SUBCOMMANDS: &[(&str, &str)] = &[
    ("density", "probability density on a lattice (CSV, optional PGM)"),
    ("nullmap", "points where the normalized density falls below the threshold"),
    ("slice", "density along a constant-z'' or constant-x2 line"),
    ("cornu", "Cornu spiral samples (u, S, C)"),
    ("transition", "near-null counts per station and the braid/fringe transition band"),
    ("scalecheck", "compare densities under the scaling map x -> s x, z'' -> s^2 z''"),
    ("drho", "d(rho)/dz'' on a lattice (CSV, optional PGM)"),
    ("refine", "refine local minima of the density from start points"),
];

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn subcommand(name: &'static str, about: &'static str) -> Command {
    let mut cmd = Command::new(name)
        .about(about)
        .arg(
            Arg::new("config")
                .long("config")
                .short('c')
                .value_name("FILE")
                .help("key = value configuration file"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help(format!("worker threads (default: ${THREADS_ENV}, else all cores)")),
        );
    for key in KEYS {
        let mut arg = Arg::new(*key)
            .long(flag_name(key))
            .allow_negative_numbers(true)
            .action(ArgAction::Set)
            .help_heading("Settings");
        if is_list_key(key) {
            arg = arg.num_args(1..).value_name("V").action(ArgAction::Append);
        } else {
            arg = arg.num_args(1).value_name("VALUE");
        }
        cmd = cmd.arg(arg);
    }
    cmd
}

pub fn command() -> Command {
    let mut cmd = Command::new("slitwave")
        .about("Null maps and densities behind multi-slit apertures")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in SUBCOMMANDS {
        cmd = cmd.subcommand(subcommand(name, about));
    }
    cmd
}

fn flag_settings(m: &ArgMatches, settings: &mut Settings) -> Result<(), ConfigError> {
    for key in KEYS {
        let Some(values) = m.get_many::<String>(key) else { continue };
        let values: Vec<&str> = values.map(String::as_str).collect();
        let text = if is_list_key(key) {
            format!("[{}]", values.join(", "))
        } else {
            values.join(" ")
        };
        settings.set(key, &text, Origin::Flag)?;
    }
    Ok(())
}

/// Builds the run configuration from an optional file plus flag overrides.
pub fn load_config(m: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut settings = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_settings(&text)?
        }
        None => Settings::default(),
    };
    flag_settings(m, &mut settings)?;
    Ok(config::resolve(&settings)?)
}

fn thread_count(m: &ArgMatches) -> Result<Option<usize>, CliError> {
    if let Some(n) = m.get_one::<usize>("threads") {
        return Ok(Some(*n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| {
            CliError::Config(ConfigError {
                key: THREADS_ENV.into(),
                origin: Origin::Missing,
                message: format!("expected a thread count (got `{v}`)"),
            })
        }),
        Err(_) => Ok(None),
    }
}

fn dispatch(name: &str, cfg: &RunConfig) -> Result<(), CliError> {
    match name {
        "density" => commands::density(cfg),
        "nullmap" => commands::nullmap(cfg),
        "slice" => commands::slice(cfg),
        "cornu" => commands::cornu(cfg),
        "transition" => commands::transition(cfg),
        "scalecheck" => commands::scalecheck(cfg),
        "drho" => commands::drho(cfg),
        "refine" => commands::refine(cfg),
        other => unreachable!("unregistered subcommand {other}"),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let result = thread_count(sub).and_then(|threads| {
        let cfg = load_config(sub)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Numeric(format!("thread pool: {e}")))?;
        pool.install(|| dispatch(name, &cfg))
    });
    match result {
        Ok(()) => 0,
        Err(CliError::CheckFailed) => 1,
        Err(e) => {
            eprintln!("slitwave: {e}");
            e.exit_code()
        }
    }
}
