mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use coherence_core::homcat::{Bound, BOUND_ENV};
use coherence_core::parallel::THREADS_ENV;
use coherence_core::Error;

use commands::{Factorization, Report};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for usage and parse errors.
const USAGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "coherence-forge", version, about = "Finitely presented 2-theories: hom-categories, classification, factorizations and Kronecker products")]
struct Cli {
    /// Largest arity examined [default: 4]
    #[arg(long, global = true)]
    max_arity: Option<usize>,

    /// Largest term size enumerated [default: 8]
    #[arg(long, global = true)]
    max_term_size: Option<usize>,

    /// Longest 2-cell path considered [default: 16]
    #[arg(long, global = true)]
    max_path_len: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Search order for the alternative lift in `lift` and `compare`
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-arity work [default: available cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Path,
    Cylinder,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a theory, or a map with --map
    Show {
        theory: Option<String>,
        #[arg(long)]
        map: Option<String>,
    },
    /// Enumerate the hom-category T(1,n)
    Enumerate {
        theory: String,
        #[arg(long)]
        arity: usize,
    },
    /// Decide weak equivalence, fibration and cofibration for a map
    Classify {
        #[arg(long)]
        map: String,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Search for per-arity equivalences of hom-categories
    Certify {
        #[arg(long)]
        map: String,
    },
    /// Path-object or mapping-cylinder factorization
    Factor {
        kind: Kind,
        #[arg(long)]
        map: String,
        /// Print the middle theory at --arity as DOT
        #[arg(long)]
        emit_dot: bool,
        #[arg(long)]
        arity: Option<usize>,
    },
    /// Lift an invertible 2-cell along a map, or solve a lifting square
    Lift {
        #[arg(long)]
        map: String,
        #[arg(long, requires = "path", conflicts_with_all = ["via", "then"])]
        term: Option<String>,
        #[arg(long, requires = "term")]
        path: Option<String>,
        #[arg(long, requires = "then")]
        via: Option<String>,
        #[arg(long, requires = "via")]
        then: Option<String>,
    },
    /// Kronecker product of two theories
    Kronecker {
        left: String,
        right: String,
        /// Check the interchange coherence conditions
        #[arg(long)]
        check: bool,
    },
    /// Check that parallel 2-cells agree
    Coherence {
        theory: String,
        #[arg(long)]
        arity: Option<usize>,
        #[arg(long, requires_all = ["lhs", "rhs"])]
        source: Option<String>,
        #[arg(long, requires = "source")]
        lhs: Option<String>,
        #[arg(long, requires = "source")]
        rhs: Option<String>,
    },
    /// Compare the mapping cylinder with another factorization
    Compare {
        #[arg(long)]
        map: String,
        #[arg(long)]
        via: String,
        #[arg(long)]
        then: String,
    },
}

fn bound(cli: &Cli) -> coherence_core::Result<Bound> {
    let base = Bound::from_env()?;
    Bound::new(
        cli.max_arity.unwrap_or(base.max_arity),
        cli.max_term_size.unwrap_or(base.max_term_size),
        cli.max_path_len.unwrap_or(base.max_path_length),
    )
}

fn run(cli: &Cli, b: &Bound) -> coherence_core::Result<(&'static str, Report)> {
    use commands as c;
    Ok(match &cli.command {
        Command::Show { theory, map } => match (theory, map) {
            (_, Some(m)) => ("show", c::show_map(m)?),
            (Some(t), None) => ("show", c::show_theory(t)?),
            (None, None) => return Err(Error::Hypothesis("show needs a theory or --map".into())),
        },
        Command::Enumerate { theory, arity } => ("enumerate", c::enumerate(theory, *arity, b)?),
        Command::Classify { map, from, to } => ("classify", c::classify_map(map, from.as_deref(), to.as_deref(), b)?),
        Command::Certify { map } => ("certify", c::certify_map(map, b)?),
        Command::Factor {
            kind,
            map,
            emit_dot,
            arity,
        } => {
            let k = match kind {
                Kind::Path => Factorization::Path,
                Kind::Cylinder => Factorization::Cylinder,
            };
            let mut r = c::factor(k, map, *arity, b)?;
            if !emit_dot && cli.format != Format::Dot {
                r.dot = None;
            }
            ("factor", r)
        }
        Command::Lift {
            map,
            term,
            path,
            via,
            then,
        } => match (term, path, via, then) {
            (Some(t), Some(p), _, _) => ("lift", c::lift_path(map, t, p, b)?),
            (_, _, Some(f), Some(g)) => ("lift", c::lift_square(map, f, g, cli.seed, b)?),
            _ => return Err(Error::Hypothesis("lift needs --term and --path, or --via and --then".into())),
        },
        Command::Kronecker { left, right, check } => ("kronecker", c::kronecker_product(left, right, *check, b)?),
        Command::Coherence {
            theory,
            arity,
            source,
            lhs,
            rhs,
        } => match (source, lhs, rhs) {
            (Some(s), Some(l), Some(r)) => ("coherence", c::coherence_paths(theory, s, l, r, b)?),
            _ => ("coherence", c::coherence(theory, *arity, b)?),
        },
        Command::Compare { map, via, then } => ("compare", c::compare(map, via, then, cli.seed, b)?),
    })
}

fn bound_line(b: &Bound) -> String {
    format!(
        "bound: arity <= {}, term size <= {}, path length <= {}",
        b.max_arity, b.max_term_size, b.max_path_length
    )
}

fn emit(cli: &Cli, command: &str, b: &Bound, r: &Report) -> Result<String, String> {
    let wants_dot = cli.format == Format::Dot || matches!(cli.command, Command::Factor { emit_dot: true, .. });
    if wants_dot {
        return r
            .dot
            .clone()
            .ok_or_else(|| format!("{command} has no DOT output for these arguments"));
    }
    match cli.format {
        Format::Json => {
            let mut doc = json!({
                "tool": "coherence-forge",
                "version": VERSION,
                "command": command,
                "bound": b,
                "result": r.json,
            });
            if let Some(v) = &r.verdict {
                doc["verdict"] = json!(v);
            }
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Text => {
            let mut s = format!("{}\n{}", bound_line(b), r.text);
            if let Some(v) = &r.verdict {
                s.push_str(&format!("verdict: {v} [{}]\n", bound_line(b)));
            }
            Ok(s)
        }
        Format::Dot => unreachable!(),
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::NoLift(_) => 1,
        Error::BoundExceeded(_) => 2,
        _ => USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        std::env::set_var(THREADS_ENV, n.max(1).to_string());
    }
    let b = match bound(&cli) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e} (from flags or {BOUND_ENV})");
            return ExitCode::from(USAGE);
        }
    };
    let (command, report) = match run(&cli, &b) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", bound_line(&b));
            return ExitCode::from(error_code(&e));
        }
    };
    match emit(&cli, command, &b, &report) {
        Ok(s) => {
            print!("{s}");
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(USAGE)
        }
    }
}
