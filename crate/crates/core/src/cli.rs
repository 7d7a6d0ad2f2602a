//! The `epiflow` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::harness::{
    diff_pair, dump_knowledge, fuzz_equivalences, read_file, render_knowledge, run_check,
    CheckConfig, Condition, FuzzConfig, FuzzDomain, HarnessError, Pair, PolicyFile,
};
use crate::lang::{parse_program, Domain, Program, Store, Value};
use crate::model::{build_model, ModelConfig, DEFAULT_BOUND};

#[derive(Debug, Parser)]
#[command(
    name = "epiflow",
    version,
    about = "Information-flow checking by epistemic model checking"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Value domain: `bool` or `int:N`.
    #[arg(long, global = true, default_value = "bool")]
    pub domain: String,
    /// Use the signed window `[-N/2, N/2)` for integer domains.
    #[arg(long, global = true)]
    pub signed_window: bool,
    /// Comma-separated image of each domain value under `hash`.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub hash_table: Option<Vec<i64>>,
    /// Observable identifiers; overrides the policy's `low:` line.
    #[arg(long, global = true, value_delimiter = ',')]
    pub low: Option<Vec<String>>,
    /// Transition bound per execution.
    #[arg(long, global = true, default_value_t = DEFAULT_BOUND)]
    pub bound: usize,
    /// Make termination observable with a final event.
    #[arg(long, global = true)]
    pub termination_output: bool,
    /// Write the machine-readable report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Fix the low inputs exactly in the abstract encoding.
    #[arg(long, global = true)]
    pub aak_fix_low: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide one security condition.
    Check {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// Overrides the policy's `check:` line.
        #[arg(long)]
        condition: Option<Condition>,
    },
    /// Print every execution and the epoch table.
    Model {
        #[arg(long)]
        program: PathBuf,
    },
    /// Run both sides of condition pairs and compare.
    Diff {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// Defaults to the pair of the policy's condition, or all pairs.
        #[arg(long)]
        pair: Vec<Pair>,
    },
    /// Compare the pairs on random programs.
    Fuzz {
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long)]
        pair: Vec<Pair>,
        #[arg(long, default_value_t = 6)]
        max_size: usize,
        #[arg(long, default_value_t = 3)]
        idents: usize,
        /// Allow bounded `while v < c` loops.
        #[arg(long)]
        loops: bool,
    },
    /// Knowledge and release set sizes along one execution.
    Knowledge {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        /// Initial store, e.g. `l=tt,h1=tt,h2=ff`.
        #[arg(long)]
        from: String,
    },
}

impl Global {
    fn domain(&self) -> Result<Domain, HarnessError> {
        let d = Domain::parse_spec(&self.domain, self.signed_window)?;
        Ok(match &self.hash_table {
            Some(t) => d.with_hash_table(t)?,
            None => d,
        })
    }

    fn config(&self) -> Result<CheckConfig, HarnessError> {
        Ok(CheckConfig {
            domain: self.domain()?,
            model: ModelConfig {
                bound: self.bound,
                termination_output: self.termination_output,
            },
            aak_fix_low: self.aak_fix_low,
        })
    }

    fn policy(&self, path: &Path) -> Result<PolicyFile, HarnessError> {
        let mut p = PolicyFile::parse(&read_file(path)?)?;
        if let Some(low) = &self.low {
            p.low = Some(low.clone());
        }
        Ok(p)
    }

    fn write_report(&self, json: &str) -> Result<(), HarnessError> {
        if let Some(path) = &self.report {
            std::fs::write(path, json).map_err(|source| HarnessError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }
}

fn load_program(path: &Path) -> Result<(String, Program), HarnessError> {
    let src = read_file(path)?;
    let p = parse_program(&src)?;
    Ok((src, p))
}

fn parse_store(spec: &str, p: &Program, dom: &Domain) -> Result<Store, HarnessError> {
    let sig = &p.signature;
    let mut s = Store(vec![Value::FALSE; sig.len()]);
    let mut seen = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, v) = part
            .split_once('=')
            .ok_or_else(|| HarnessError::Usage(format!("expected `name=value`, got `{part}`")))?;
        let slot = sig
            .slot(name.trim())
            .filter(|s| sig.vars().contains(s))
            .ok_or_else(|| HarnessError::Usage(format!("unknown identifier `{}`", name.trim())))?;
        let v = match v.trim() {
            "tt" => Value::TRUE,
            "ff" => Value::FALSE,
            n => Value(
                n.parse()
                    .map_err(|_| HarnessError::Usage(format!("bad value `{n}`")))?,
            ),
        };
        if !dom.contains(v) {
            return Err(HarnessError::Usage(format!("value {} outside {dom}", v.0)));
        }
        s.set(slot, v);
        seen.push(slot);
    }
    if let Some(missing) = sig.vars().into_iter().find(|x| !seen.contains(x)) {
        return Err(HarnessError::Usage(format!(
            "no value for `{}`",
            sig.name(missing)
        )));
    }
    Ok(s)
}

/// Runs one command, writing human output to `out`. Returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, HarnessError> {
    let g = &cli.global;
    let w = |out: &mut dyn Write, s: &str| {
        let _ = out.write_all(s.as_bytes());
    };
    match &cli.command {
        Command::Check {
            program,
            policy,
            condition,
        } => {
            let src = read_file(program)?;
            let report = run_check(&src, &g.policy(policy)?, *condition, &g.config()?)?;
            w(out, &report.render_text());
            g.write_report(&report.to_json())?;
            Ok(report.outcome.exit_code())
        }
        Command::Model { program } => {
            let cfg = g.config()?;
            let (_, p) = load_program(program)?;
            let m = build_model(&p, &cfg.domain, &cfg.model)?;
            w(out, &m.dump());
            Ok(0)
        }
        Command::Diff {
            program,
            policy,
            pair,
        } => {
            let cfg = g.config()?;
            let (_, p) = load_program(program)?;
            let file = g.policy(policy)?;
            let pol = file.resolve(&p.signature)?;
            let pairs = if !pair.is_empty() {
                pair.clone()
            } else if let Some(c) = file.check {
                vec![c.pair()]
            } else {
                Pair::ALL.to_vec()
            };
            let mut rows = Vec::new();
            for pr in pairs {
                let row = diff_pair(&p, &pol, pr, &cfg)?;
                w(out, &format!("{}\n", row.render()));
                rows.push(row);
            }
            g.write_report(&serde_json::to_string_pretty(&rows).expect("rows serialize"))?;
            Ok(i32::from(rows.iter().any(|r| r.mismatch())))
        }
        Command::Fuzz {
            count,
            pair,
            max_size,
            idents,
            loops,
        } => {
            let domain = match g.domain()? {
                d if d == Domain::bool() => FuzzDomain::Bool,
                d if d == Domain::int(4).expect("valid") => FuzzDomain::Mod4,
                d => {
                    return Err(HarnessError::Usage(format!(
                        "fuzzing supports bool and int:4, not {d}"
                    )))
                }
            };
            let cfg = FuzzConfig {
                seed: g.seed,
                count: *count,
                max_size: *max_size,
                idents: *idents,
                domain,
                loops: *loops,
                pairs: if pair.is_empty() {
                    Pair::ALL.to_vec()
                } else {
                    pair.clone()
                },
                bound: g.bound.min(FuzzConfig::default().bound),
                ..FuzzConfig::default()
            };
            let summary = fuzz_equivalences(&cfg);
            w(out, &summary.render());
            g.write_report(&serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
            Ok(i32::from(!summary.is_clean()))
        }
        Command::Knowledge {
            program,
            policy,
            from,
        } => {
            let cfg = g.config()?;
            let (_, p) = load_program(program)?;
            let pol = g.policy(policy)?.resolve(&p.signature)?;
            let s0 = parse_store(from, &p, &cfg.domain)?;
            let m = build_model(&p, &cfg.domain, &cfg.model)?;
            if m.is_tainted() {
                w(out, "BOUND_EXCEEDED\n");
                return Ok(2);
            }
            let rows = dump_knowledge(&m, &pol.fs, &pol.releases, &s0);
            w(out, &render_knowledge(&m, &rows));
            Ok(i32::from(rows.iter().any(|r| !r.secure)))
        }
    }
}

/// Entry point of the binary: parses `args` and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("epiflow: {e}");
            e.exit_code()
        }
    }
}
