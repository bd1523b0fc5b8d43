//! `dyncaus`: validate, execute, encode and compare event structures.
//!
//! Exit status 0 means success, 1 a negative answer (invalid structure,
//! inequivalent pair, failed check) and 2 a usage or parse error.

mod repl;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dyncaus_core::dynamic::{dces_of_ebes, embed_ges, embed_ses, ts_equivalent};
use dyncaus_core::hierarchy::{
    configuration_equivalent, poset_equivalent, rces_of, trace_equivalent, transition_equivalent, verify_result, Report,
    CHECKS,
};
use dyncaus_core::shrinking::{des_to_ses, ses_to_des};
use dyncaus_core::textio::{export_graph, parse_structure, render_structure, GraphFormat};
use dyncaus_core::{CauseFlavor, Dces, Error, EventSet, StepMode, Structure};
use serde_json::{json, Value};

const PORT_ENV: &str = "DYNCAUS_PORT";
const DEFAULT_PORT: u16 = 8080;

#[derive(Parser)]
#[command(name = "dyncaus", version, about = "Event structures with static and dynamic causality")]
struct Cli {
    /// Print machine readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a structure.
    Validate { file: PathBuf },
    /// List the traces.
    Traces {
        file: PathBuf,
        /// Only traces of at most this many events.
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// List the configurations.
    Configs { file: PathBuf },
    /// List the posets.
    Posets {
        file: PathBuf,
        #[arg(long, default_value = "early")]
        flavor: CauseFlavor,
    },
    /// Export the transition graph, or the state graph of dynamic causality.
    Graph {
        file: PathBuf,
        #[arg(long, default_value = "dot")]
        format: GraphFormat,
        #[arg(long, default_value = "multi")]
        steps: StepMode,
    },
    /// Translate into another family.
    Encode {
        file: PathBuf,
        #[arg(long)]
        to: Target,
    },
    /// Compare two structures.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        by: By,
        #[arg(long, default_value = "early")]
        flavor: CauseFlavor,
    },
    /// Re-check an expressiveness result by exhaustive search.
    Oracle {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        name: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Fire events interactively.
    Step { file: PathBuf },
    /// Run the HTTP service.
    Serve {
        /// Defaults to the DYNCAUS_PORT environment variable, then 8080.
        #[arg(long, env = PORT_ENV)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Append-only journal replayed at startup.
        #[arg(long)]
        journal: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Des,
    Ses,
    Rces,
    Dces,
}

#[derive(Clone, Copy, ValueEnum)]
enum By {
    Traces,
    Configs,
    Posets,
    Transitions,
    Ts,
}

/// A failed command: its exit status and the diagnostic.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn negative(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::NotStrictDense(_) | Error::NotSsdc | Error::NotEbdc(_) => {
                Failure::negative(e.to_string())
            }
            _ => Failure::usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<Structure, Failure> {
    let text = read(path)?;
    parse_structure(&text).map_err(|e| {
        let f = Failure::from(e);
        Failure { message: format!("{}: {}", path.display(), f.message), ..f }
    })
}

fn set(s: &EventSet) -> String {
    format!("{{{}}}", s.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(","))
}

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, value: Value, text: impl FnOnce() -> String) -> io::Result<()> {
        let mut out = io::stdout().lock();
        if self.json {
            writeln!(out, "{value}")
        } else {
            write!(out, "{}", text())
        }
    }
}

fn lines<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.into_iter().map(|i| f(i) + "\n").collect()
}

/// Dynamic causality structure a family runs as, when it has one.
fn as_dces(s: &Structure) -> Option<Dces> {
    match s {
        Structure::Dces(d) => Some(d.clone()),
        Structure::Ses(x) => Some(embed_ses(x)),
        Structure::Ges(x) => Some(embed_ges(x)),
        Structure::Ebes(x) => Some(dces_of_ebes(x)),
        _ => None,
    }
}

fn encode(s: &Structure, to: Target) -> Result<Structure, Failure> {
    let unsupported = |to: &str| Failure::usage(format!("no encoding from {} into {to}", s.kind()));
    Ok(match (to, s) {
        (Target::Des, Structure::Des(d)) => d.clone().into(),
        (Target::Des, Structure::Ses(x)) => ses_to_des(x).into(),
        (Target::Des, Structure::Bes(x)) => x.to_des().into(),
        (Target::Des, _) => return Err(unsupported("des")),
        (Target::Ses, Structure::Ses(x)) => x.clone().into(),
        (Target::Ses, Structure::Des(d)) => des_to_ses(d).into(),
        (Target::Ses, Structure::Bes(x)) => des_to_ses(&x.to_des()).into(),
        (Target::Ses, _) => return Err(unsupported("ses")),
        (Target::Rces, _) => rces_of(s)?.into(),
        (Target::Dces, _) => as_dces(s).ok_or_else(|| unsupported("dces"))?.into(),
    })
}

fn report_text(r: &Report) -> String {
    let mut t = format!(
        "{} {}: {}\n",
        if r.holds { "HOLDS" } else { "FAILS" },
        r.name,
        r.claim
    );
    for (i, tier) in r.tiers.iter().enumerate() {
        t += &format!(
            "  tier {i}: {} over {} [{}] vs {}: {} candidates, {} checked\n",
            tier.family,
            set(&tier.events),
            tier.constraints.join("; "),
            tier.target,
            tier.search_space,
            tier.checked
        );
    }
    for (fact, ok) in &r.certificate {
        t += &format!("  {} {fact}\n", if *ok { "ok" } else { "FALSE" });
    }
    if let Some(w) = &r.witness {
        t += &format!("  witness at tier {} index {}:\n", w.tier, w.index);
        for l in render_structure(&w.structure).lines() {
            t += &format!("    {l}\n");
        }
    }
    t
}

fn run(cli: Cli) -> Outcome {
    let out = Out { json: cli.json };
    match cli.command {
        Command::Validate { file } => {
            let s = load(&file)?;
            let mut v = json!({ "valid": true, "kind": s.kind(), "events": s.events() });
            let mut text = format!("valid {} structure with {} events\n", s.kind(), s.events().len());
            if let Structure::Dces(d) = &s {
                let c = d.classify();
                v["ssdc"] = json!(c.is_ssdc);
                v["ebdc"] = json!(c.is_ebdc);
                text += &format!("ssdc: {}\nebdc: {}\n", c.is_ssdc, c.is_ebdc);
            }
            out.emit(v, || text)?;
        }
        Command::Traces { file, max_len } => {
            let s = load(&file)?;
            let limit = max_len.unwrap_or(usize::MAX);
            let traces: Vec<_> = s.traces()?.into_iter().filter(|t| t.len() <= limit).collect();
            out.emit(json!(traces), || lines(&traces, |t| t.to_string()))?;
        }
        Command::Configs { file } => {
            let configs = load(&file)?.configurations()?;
            out.emit(json!(configs), || lines(&configs, set))?;
        }
        Command::Posets { file, flavor } => {
            let posets = load(&file)?.posets(flavor)?;
            let v: Vec<Value> = posets
                .iter()
                .map(|p| json!({ "carrier": p.carrier(), "order": p.hasse() }))
                .collect();
            out.emit(json!(v), || lines(&posets, |p| p.to_string()))?;
        }
        Command::Graph { file, format, steps } => {
            let g = load(&file)?.graph(steps)?;
            let fmt = if out.json { GraphFormat::Json } else { format };
            let mut text = export_graph(&g, fmt);
            if !text.ends_with('\n') {
                text.push('\n');
            }
            io::stdout().lock().write_all(text.as_bytes())?;
        }
        Command::Encode { file, to } => {
            let e = encode(&load(&file)?, to)?;
            out.emit(json!({ "kind": e.kind(), "text": render_structure(&e) }), || render_structure(&e))?;
        }
        Command::Compare { a, b, by, flavor } => {
            let (x, y) = (load(&a)?, load(&b)?);
            let equal = match by {
                By::Traces => trace_equivalent(&x, &y)?,
                By::Configs => configuration_equivalent(&x, &y)?,
                By::Posets => poset_equivalent(&x, &y, flavor)?,
                By::Transitions => transition_equivalent(&x, &y)?,
                By::Ts => {
                    let need = |s: &Structure| {
                        as_dces(s).ok_or_else(|| {
                            Failure::usage(format!("{} structures have no states to compare", s.kind()))
                        })
                    };
                    // the check itself looks at shared events only, so that
                    // encodings with auxiliary `__` events compare
                    let visible = |s: &Structure| -> EventSet {
                        s.events().iter().filter(|e| !e.as_str().starts_with("__")).cloned().collect()
                    };
                    visible(&x) == visible(&y) && ts_equivalent(&need(&x)?, &need(&y)?)?
                }
            };
            out.emit(json!({ "equivalent": equal }), || {
                format!("{}\n", if equal { "equivalent" } else { "not equivalent" })
            })?;
            return Ok(if equal { 0 } else { 1 });
        }
        Command::Oracle { name, all } => {
            let names: Vec<String> = match name {
                Some(n) if !all => vec![n],
                _ => CHECKS.iter().map(|s| s.to_string()).collect(),
            };
            let mut holds = true;
            let mut reports = Vec::new();
            for n in &names {
                let r = verify_result(n)?;
                holds &= r.holds;
                if !out.json {
                    out.emit(Value::Null, || report_text(&r))?;
                }
                reports.push(r);
            }
            if out.json {
                out.emit(json!(reports), String::new)?;
            }
            return Ok(if holds { 0 } else { 1 });
        }
        Command::Step { file } => {
            let s = load(&file)?;
            let d = as_dces(&s)
                .ok_or_else(|| Failure::usage(format!("{} structures have no states to step through", s.kind())))?;
            repl::run(&d, io::stdin().lock(), &mut io::stdout().lock(), out.json)?;
        }
        Command::Serve { port, host, journal } => {
            tracing_subscriber::fmt().with_writer(io::stderr).init();
            let state = match journal {
                Some(p) => dyncaus_service::AppState::with_journal(p)?,
                None => dyncaus_service::AppState::new(),
            };
            let addr = std::net::SocketAddr::new(host, port.unwrap_or(DEFAULT_PORT));
            tokio::runtime::Runtime::new()?.block_on(dyncaus_service::serve(addr, state))?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

