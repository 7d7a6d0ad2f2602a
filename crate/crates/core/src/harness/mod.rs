//! Loading programs and policies, dispatching to a checker, and reporting.

mod fuzz;
mod knowledge;
mod policy;
mod report;

use std::time::Instant;

use thiserror::Error;

use crate::lang::{parse_program, Domain, DomainError, ParseError, Program};
use crate::logic::{model_satisfies, LogicError};
use crate::model::{build_model, Model, ModelConfig, ModelError};
use crate::policy::{
    encode_aak, encode_ak, encode_akd, encode_akr, encode_aktd, AakOptions, PolicyError,
};
use crate::semantic;
use crate::verdict::{Outcome, Verdict};

pub use fuzz::{
    fuzz_equivalences, generate_program, Counterexample, FuzzConfig, FuzzDomain, FuzzSummary,
    PairSummary, StmtWeights,
};
pub use knowledge::{dump_knowledge, render_knowledge, KnowledgeRow};
pub use policy::{Condition, Pair, Policy, PolicyFile};
pub use report::{DomainReport, Report, ReportStats, ReportWitness};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("policy line {line}: {message}")]
    Policy { line: usize, message: String },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Encoding(#[from] PolicyError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        3
    }
}

/// Everything about a run that is not the program or the policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub domain: Domain,
    pub model: ModelConfig,
    pub aak_fix_low: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            domain: Domain::bool(),
            model: ModelConfig::default(),
            aak_fix_low: false,
        }
    }
}

impl CheckConfig {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            ..Self::default()
        }
    }
}

/// The verdict of one condition together with the model it was read on.
#[derive(Debug)]
pub struct CheckResult {
    pub condition: Condition,
    pub verdict: Verdict,
    pub model: Model,
}

/// Decides `cond` for `program` under `policy`.
pub fn run_condition(
    program: &Program,
    policy: &Policy,
    cond: Condition,
    cfg: &CheckConfig,
) -> Result<CheckResult, HarnessError> {
    let dom = &cfg.domain;
    let build = |p: &Program| build_model(p, dom, &cfg.model);
    if cond == Condition::Aak {
        let opts = AakOptions {
            fix_low: cfg.aak_fix_low,
        };
        let (transformed, f) = encode_aak(
            program,
            &policy.fs,
            &policy.eta,
            &policy.phi,
            &policy.rho,
            dom,
            opts,
        )?;
        let model = build(&transformed)?;
        let verdict = model_satisfies(&model, &f)?;
        return Ok(CheckResult {
            condition: cond,
            verdict,
            model,
        });
    }
    let model = build(program)?;
    let verdict = check_on(&model, policy, cond)?;
    Ok(CheckResult {
        condition: cond,
        verdict,
        model,
    })
}

/// Decides any condition other than AAK, whose model differs from the
/// program's.
pub fn check_on(m: &Model, policy: &Policy, cond: Condition) -> Result<Verdict, HarnessError> {
    let fs = &policy.fs;
    let dom = m.domain();
    let formula = match cond {
        Condition::Oni => return Ok(semantic::check_oni(m, fs)),
        Condition::Nid => return Ok(semantic::check_nid(m, fs, &policy.declassify)),
        Condition::Nani => {
            return Ok(semantic::check_nani(
                m,
                fs,
                &policy.eta,
                &policy.phi,
                &policy.rho,
            ))
        }
        Condition::Er => return Ok(semantic::check_er(m, fs, &policy.releases)),
        Condition::Nitd => return Ok(semantic::check_nitd(m, fs, &policy.when)),
        Condition::Ak => encode_ak(fs, dom)?,
        Condition::Akd => encode_akd(fs, &policy.declassify, dom)?,
        Condition::Akr => encode_akr(fs, &policy.releases, dom)?,
        Condition::Aktd => encode_aktd(fs, &policy.when, dom)?,
        Condition::Aak => {
            return Err(HarnessError::Usage(
                "aak must be run through run_condition".into(),
            ))
        }
    };
    Ok(model_satisfies(m, &formula)?)
}

/// Parses both inputs, runs the policy's condition (or `override_cond`) and
/// builds the report.
pub fn run_check(
    program_src: &str,
    file: &PolicyFile,
    override_cond: Option<Condition>,
    cfg: &CheckConfig,
) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let program = parse_program(program_src)?;
    let policy = file.resolve(&program.signature)?;
    let cond = override_cond
        .or(policy.check)
        .ok_or_else(|| HarnessError::Usage("no condition: add `check:` or pass one".into()))?;
    let result = run_condition(&program, &policy, cond, cfg)?;
    let mut file = file.clone();
    file.check = Some(cond);
    Ok(Report::new(
        program_src,
        &file,
        cfg,
        &result,
        start.elapsed().as_millis() as u64,
    ))
}

/// One row of `diff`: both sides of a pair on the same program.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct DiffRow {
    pub pair: Pair,
    pub semantic: Outcome,
    pub epistemic: Outcome,
}

impl DiffRow {
    pub fn mismatch(&self) -> bool {
        self.semantic != self.epistemic
    }

    pub fn render(&self) -> String {
        format!(
            "{:<10} SEMANTIC {:<15} EPISTEMIC {:<15} {}",
            self.pair.name(),
            self.semantic.as_str(),
            self.epistemic.as_str(),
            if self.mismatch() { "MISMATCH" } else { "ok" }
        )
    }
}

pub fn diff_pair(
    program: &Program,
    policy: &Policy,
    pair: Pair,
    cfg: &CheckConfig,
) -> Result<DiffRow, HarnessError> {
    let semantic = run_condition(program, policy, pair.semantic(), cfg)?;
    let epistemic = run_condition(program, policy, pair.epistemic(), cfg)?;
    Ok(DiffRow {
        pair,
        semantic: semantic.verdict.outcome,
        epistemic: epistemic.verdict.outcome,
    })
}

/// Reads a file, naming it in the error.
pub fn read_file(path: &std::path::Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}
