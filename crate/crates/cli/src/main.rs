//! `coordconf`: check, run, format and re-render coordination models.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coordconf::dsl::{parse_configurator_conf, pretty_print};
use coordconf::harness::{
    check_sources, parse_trace, read_file, render_trace, run_scenario, FileDiagnostics, Inputs, LoadError, Mode,
    Scenario, Source, TraceKind,
};

#[derive(Parser)]
#[command(name = "coordconf", version, about = "Coordinator/Configurator models: check, run, fmt, trace")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate configuration, statechart and system model files.
    Check {
        #[arg(long, value_name = "F")]
        system: Option<PathBuf>,
        #[arg(long, value_name = "F")]
        conf: Option<PathBuf>,
        #[arg(long, value_name = "F")]
        fsm: Option<PathBuf>,
    },
    /// Replay a scenario and report failed expectations.
    Run {
        #[arg(long, value_name = "F")]
        system: PathBuf,
        #[arg(long, value_name = "F")]
        conf: PathBuf,
        #[arg(long, value_name = "F")]
        fsm: PathBuf,
        #[arg(long, value_name = "F")]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Det)]
        mode: ModeArg,
        /// Write the trace here instead of standard output.
        #[arg(long, value_name = "F")]
        trace_out: Option<PathBuf>,
    },
    /// Print a configuration file in canonical form.
    Fmt {
        #[arg(long, value_name = "F")]
        conf: PathBuf,
    },
    /// Re-render a saved trace, optionally keeping only some record kinds.
    Trace {
        file: PathBuf,
        #[arg(long, value_name = "KIND")]
        kind: Vec<String>,
        /// Write the rendered trace here instead of standard output.
        #[arg(long, value_name = "F")]
        trace_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Det,
    Threaded,
}

/// Exit codes: 0 ok, 1 validation or expectation failure, 2 usage.
enum Failure {
    Invalid,
    Usage(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        eprint!("{e}");
        Failure::Invalid
    }
}

fn init_logging() {
    let level = match std::env::var("COORDCONF_LOG").as_deref() {
        Ok("debug") => log::LevelFilter::Debug,
        Ok("info") => log::LevelFilter::Info,
        Ok("quiet") => log::LevelFilter::Off,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_target(false)
        .format_timestamp(None)
        .init();
}

fn print_diagnostics(files: &[FileDiagnostics]) {
    for f in files {
        eprint!("{}", f.render());
    }
}

fn output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("{}: {e}", p.display());
            Failure::Invalid
        }),
        None => {
            // a closed pipe is not an error worth reporting
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn check(system: Option<PathBuf>, conf: Option<PathBuf>, fsm: Option<PathBuf>) -> Result<(), Failure> {
    if system.is_none() && conf.is_none() && fsm.is_none() {
        return Err(Failure::Usage("check needs at least one of --system, --conf, --fsm".into()));
    }
    let load = |p: &Option<PathBuf>| -> Result<Option<(String, String)>, Failure> {
        p.as_ref()
            .map(|p| Ok((p.display().to_string(), read_file(p)?)))
            .transpose()
    };
    let (system, conf, fsm) = (load(&system)?, load(&conf)?, load(&fsm)?);
    fn src(f: &Option<(String, String)>) -> Option<Source<'_>> {
        f.as_ref().map(|(name, text)| Source { name, text })
    }
    let checked = check_sources(src(&system), src(&conf), src(&fsm));
    print_diagnostics(&checked.warnings);
    print_diagnostics(&checked.errors);
    if !checked.errors.is_empty() {
        return Err(Failure::Invalid);
    }
    if let (Some(c), Some((name, _))) = (&checked.conf, &conf) {
        println!("{name}: {} configuration(s) ok", c.len());
    }
    if let (Some(c), Some((name, _))) = (&checked.chart, &fsm) {
        println!("{name}: statechart {} with {} state(s) ok", c.name, c.states.len());
    }
    if let (Some(m), Some((name, _))) = (&checked.system, &system) {
        println!("{name}: {} component(s) ok", m.components.len());
    }
    Ok(())
}

fn run(
    paths: [&Path; 3],
    scenario: &Path,
    mode: ModeArg,
    trace_out: Option<&Path>,
) -> Result<(), Failure> {
    let inputs = Inputs::load(paths[0], paths[1], paths[2])?;
    for w in &inputs.warnings {
        log::warn!("{}", w.render().trim_end());
    }
    let text = read_file(scenario)?;
    let scenario = Scenario::parse(&text).map_err(|diags| {
        for d in diags {
            eprintln!("{}", d.render(&scenario.display().to_string()));
        }
        Failure::Invalid
    })?;
    let mode = match mode {
        ModeArg::Det => Mode::Deterministic,
        ModeArg::Threaded => Mode::Threaded,
    };
    let out = run_scenario(&inputs, &scenario, mode);
    output(trace_out, &out.trace_text())?;
    for f in &out.failures {
        eprintln!("expectation failed: {f}");
    }
    if out.passed() {
        log::info!("{} directive(s), all expectations hold", scenario.directives.len());
        Ok(())
    } else {
        Err(Failure::Invalid)
    }
}

fn fmt(conf: &Path) -> Result<(), Failure> {
    let text = read_file(conf)?;
    match parse_configurator_conf(&text) {
        Ok(c) => output(None, &pretty_print(&c)),
        Err(diags) => {
            for d in diags {
                eprintln!("{}", d.render(&conf.display().to_string()));
            }
            Err(Failure::Invalid)
        }
    }
}

fn trace(file: &Path, kinds: &[String], trace_out: Option<&Path>) -> Result<(), Failure> {
    let kinds: Vec<TraceKind> = kinds
        .iter()
        .map(|k| {
            k.to_ascii_uppercase()
                .parse()
                .map_err(|_| Failure::Usage(format!("unknown record kind `{k}`")))
        })
        .collect::<Result<_, _>>()?;
    let text = read_file(file)?;
    let records = parse_trace(&text).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        Failure::Invalid
    })?;
    let kept: Vec<_> = records
        .into_iter()
        .filter(|r| kinds.is_empty() || kinds.contains(&r.kind))
        .collect();
    output(trace_out, &render_trace(&kept))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging();
    let res = match cli.command {
        Command::Check { system, conf, fsm } => check(system, conf, fsm),
        Command::Run {
            system,
            conf,
            fsm,
            scenario,
            mode,
            trace_out,
        } => run([&system, &conf, &fsm], &scenario, mode, trace_out.as_deref()),
        Command::Fmt { conf } => fmt(&conf),
        Command::Trace { file, kind, trace_out } => trace(&file, &kind, trace_out.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
