//! Random programs and policies for comparing each semantic definition with
//! its epistemic encoding.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{diff_pair, CheckConfig, Pair, PolicyFile};
use crate::lang::{parse_program, Domain};
use crate::model::ModelConfig;
use crate::verdict::Outcome;

const NAMES: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FuzzDomain {
    Bool,
    Mod4,
}

impl FuzzDomain {
    pub fn domain(self) -> Domain {
        match self {
            FuzzDomain::Bool => Domain::bool(),
            FuzzDomain::Mod4 => Domain::int(4).expect("4 is a valid size"),
        }
    }
}

/// Relative frequency of each statement form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StmtWeights {
    pub skip: u32,
    pub assign: u32,
    pub out: u32,
    pub branch: u32,
    /// Only used when loops are enabled.
    pub looping: u32,
    /// Only used for the release pair.
    pub release: u32,
}

impl Default for StmtWeights {
    fn default() -> Self {
        Self {
            skip: 1,
            assign: 4,
            out: 4,
            branch: 2,
            looping: 1,
            release: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub seed: u64,
    /// Programs per pair.
    pub count: usize,
    /// Upper bound on statements per program, nested ones included.
    pub max_size: usize,
    /// Distinct identifiers, 1 to 3.
    pub idents: usize,
    pub domain: FuzzDomain,
    /// Allow `while v < c do { ...; v := v + 1 }`.
    pub loops: bool,
    pub weights: StmtWeights,
    pub pairs: Vec<Pair>,
    pub bound: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            count: 200,
            max_size: 6,
            idents: 3,
            domain: FuzzDomain::Bool,
            loops: false,
            weights: StmtWeights::default(),
            pairs: Pair::ALL.to_vec(),
            bound: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub seed: u64,
    pub index: usize,
    pub pair: Pair,
    pub program: String,
    pub policy: String,
    pub semantic: Option<Outcome>,
    pub epistemic: Option<Outcome>,
    /// Set when a side could not be run at all.
    pub error: Option<String>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} seed={} index={}", self.pair, self.seed, self.index)?;
        writeln!(f, "  program: {}", self.program)?;
        for line in self.policy.lines() {
            writeln!(f, "  policy: {line}")?;
        }
        match &self.error {
            Some(e) => write!(f, "  error: {e}"),
            None => write!(
                f,
                "  semantic {} epistemic {}",
                self.semantic.map_or("-", Outcome::as_str),
                self.epistemic.map_or("-", Outcome::as_str)
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub programs: usize,
    pub holds: usize,
    pub fails: usize,
    pub bound_exceeded: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub pairs: Vec<(Pair, PairSummary)>,
    pub counterexamples: Vec<Counterexample>,
}

impl FuzzSummary {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }

    pub fn of(&self, pair: Pair) -> Option<&PairSummary> {
        self.pairs.iter().find(|(p, _)| *p == pair).map(|(_, s)| s)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (p, s) in &self.pairs {
            out += &format!(
                "{:<10} programs {:>5} holds {:>5} fails {:>5} bound {:>4} mismatches {}\n",
                p.name(),
                s.programs,
                s.holds,
                s.fails,
                s.bound_exceeded,
                s.mismatches
            );
        }
        for c in &self.counterexamples {
            out += &format!("{c}\n");
        }
        out
    }
}

/// Generator state for one program.
struct Gen<'a> {
    rng: ChaCha8Rng,
    cfg: &'a FuzzConfig,
    names: &'a [&'static str],
    budget: usize,
    outputs: bool,
    releases: bool,
}

impl Gen<'_> {
    fn literal(&mut self) -> String {
        match self.cfg.domain {
            FuzzDomain::Bool => if self.rng.gen() { "tt" } else { "ff" }.to_string(),
            FuzzDomain::Mod4 => self.rng.gen_range(0..4).to_string(),
        }
    }

    fn var(&mut self) -> &'static str {
        self.names
            .choose(&mut self.rng)
            .expect("at least one identifier")
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return if self.rng.gen_bool(0.7) {
                self.var().to_string()
            } else {
                self.literal()
            };
        }
        if self.rng.gen_bool(0.15) {
            let op = ["!", "-"].choose(&mut self.rng).unwrap();
            return format!("{op}({})", self.expr(depth - 1));
        }
        let ops = ["&&", "||", "==", "!=", "<", "<=", "+", "-", "*", "mod"];
        let op = ops.choose(&mut self.rng).unwrap();
        format!("({} {op} {})", self.expr(depth - 1), self.expr(depth - 1))
    }

    /// Guards must have a boolean operator at the top.
    fn guard(&mut self) -> String {
        if self.rng.gen_bool(0.25) {
            return self.var().to_string();
        }
        let ops = ["&&", "||", "==", "!=", "<", "<="];
        let op = ops.choose(&mut self.rng).unwrap();
        format!("{} {op} {}", self.expr(1), self.expr(1))
    }

    fn stmt(&mut self) -> String {
        self.budget = self.budget.saturating_sub(1);
        let w = self.cfg.weights;
        let nested = self.budget >= 2;
        let choices = [
            (0, w.skip),
            (1, w.assign),
            (2, if self.outputs { w.out } else { 0 }),
            (3, if nested { w.branch } else { 0 }),
            (
                4,
                if nested && self.cfg.loops {
                    w.looping
                } else {
                    0
                },
            ),
            (5, if self.releases { w.release } else { 0 }),
        ];
        let kind = choices
            .choose_weighted(&mut self.rng, |c| c.1)
            .map(|c| c.0)
            .unwrap_or(1);
        match kind {
            0 => "skip".to_string(),
            1 => format!("{} := {}", self.var(), self.expr(2)),
            2 => format!("out {}", self.expr(2)),
            3 => {
                let c = self.guard();
                let a = self.block();
                let b = self.block();
                format!("if {c} then {{ {a} }} else {{ {b} }}")
            }
            4 => {
                let v = self.var();
                let limit = self.literal();
                let body = self.block();
                format!("while {v} < {limit} do {{ {body}; {v} := {v} + 1 }}")
            }
            _ => format!("release r{}", self.rng.gen_range(1..=2)),
        }
    }

    fn block(&mut self) -> String {
        let n = self.rng.gen_range(1..=2usize).min(self.budget.max(1));
        (0..n).map(|_| self.stmt()).collect::<Vec<_>>().join("; ")
    }

    fn program(&mut self) -> String {
        // Mention every identifier first so the signature is fixed.
        let mut parts: Vec<String> = self.names.iter().map(|n| format!("{n} := {n}")).collect();
        while self.budget > 0 {
            parts.push(self.stmt());
        }
        parts.join("; ")
    }

    fn random_low(&mut self) -> Vec<String> {
        self.names
            .iter()
            .filter(|_| self.rng.gen_bool(0.5))
            .map(|s| s.to_string())
            .collect()
    }

    fn state_condition(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => "tt".to_string(),
            1 => "ff".to_string(),
            2 => format!("{} == {}", self.var(), self.literal()),
            _ => format!("{} <= {}", self.var(), self.var()),
        }
    }

    fn policy(&mut self, pair: Pair) -> PolicyFile {
        let mut p = PolicyFile {
            low: Some(self.random_low()),
            check: Some(pair.semantic()),
            ..PolicyFile::default()
        };
        match pair {
            Pair::OniAk => {}
            Pair::NidAkd => {
                let n = self.rng.gen_range(0..=2);
                p.declassify = (0..n).map(|_| self.expr(2)).collect();
            }
            Pair::NaniAak => {
                // `Par` needs the literal 2, which booleans do not have.
                let names: &[&str] = match self.cfg.domain {
                    FuzzDomain::Bool => &["Id", "Sign"],
                    FuzzDomain::Mod4 => &["Id", "Sign", "Par"],
                };
                let pick = |g: &mut Self| {
                    if g.rng.gen_bool(0.25) {
                        g.expr(2)
                    } else {
                        names.choose(&mut g.rng).unwrap().to_string()
                    }
                };
                p.eta = Some(pick(self));
                p.phi = Some(pick(self));
                p.rho = Some(pick(self));
            }
            Pair::ErAkr => {
                let n = self.rng.gen_range(0..=2);
                p.release = (1..=n).map(|i| (format!("r{i}"), self.expr(2))).collect();
            }
            Pair::NitdAktd => {
                let n = self.rng.gen_range(0..=2);
                p.when = (0..n)
                    .map(|_| (self.state_condition(), self.expr(2)))
                    .collect();
            }
        }
        p
    }
}

fn rng_for(seed: u64, index: usize, pair: Pair) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lane = Pair::ALL.iter().position(|&p| p == pair).unwrap() as u64;
    rng.set_stream((index as u64) << 3 | lane);
    rng
}

/// The `index`-th program and policy for `pair`; equal inputs give equal
/// text.
pub fn generate_program(cfg: &FuzzConfig, index: usize, pair: Pair) -> (String, PolicyFile) {
    let idents = cfg.idents.clamp(1, NAMES.len());
    let mut g = Gen {
        rng: rng_for(cfg.seed, index, pair),
        cfg,
        names: &NAMES[..idents],
        budget: cfg.max_size.max(1),
        // The abstract pair compares final stores; outputs would be seen by
        // the encoding only.
        outputs: pair != Pair::NaniAak,
        releases: pair == Pair::ErAkr,
    };
    let program = g.program();
    let policy = g.policy(pair);
    (program, policy)
}

fn run_one(
    cfg: &FuzzConfig,
    index: usize,
    pair: Pair,
) -> (Option<Outcome>, Option<Counterexample>) {
    let (program, file) = generate_program(cfg, index, pair);
    let bundle = |semantic, epistemic, error| Counterexample {
        seed: cfg.seed,
        index,
        pair,
        program: program.clone(),
        policy: file.render(),
        semantic,
        epistemic,
        error,
    };
    let check = CheckConfig {
        domain: cfg.domain.domain(),
        model: ModelConfig {
            bound: cfg.bound,
            termination_output: false,
        },
        aak_fix_low: false,
    };
    let row = parse_program(&program)
        .map_err(super::HarnessError::from)
        .and_then(|p| {
            let policy = file.resolve(&p.signature)?;
            diff_pair(&p, &policy, pair, &check)
        });
    match row {
        Err(e) => (None, Some(bundle(None, None, Some(e.to_string())))),
        Ok(r) if r.mismatch() => (
            None,
            Some(bundle(Some(r.semantic), Some(r.epistemic), None)),
        ),
        Ok(r) => (Some(r.semantic), None),
    }
}

/// Runs `cfg.count` programs for every selected pair. Iterations run in
/// parallel; results are merged by index.
pub fn fuzz_equivalences(cfg: &FuzzConfig) -> FuzzSummary {
    let mut summary = FuzzSummary::default();
    for &pair in &cfg.pairs {
        let results: Vec<_> = (0..cfg.count)
            .into_par_iter()
            .map(|i| run_one(cfg, i, pair))
            .collect();
        let mut s = PairSummary {
            programs: cfg.count,
            ..PairSummary::default()
        };
        for (outcome, cex) in results {
            match outcome {
                Some(Outcome::Holds) => s.holds += 1,
                Some(Outcome::Fails) => s.fails += 1,
                Some(Outcome::BoundExceeded) => s.bound_exceeded += 1,
                None => s.mismatches += 1,
            }
            summary.counterexamples.extend(cex);
        }
        summary.pairs.push((pair, s));
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_reproducible() {
        let cfg = FuzzConfig::default();
        for pair in Pair::ALL {
            assert_eq!(
                generate_program(&cfg, 3, pair),
                generate_program(&cfg, 3, pair)
            );
        }
        assert_ne!(
            generate_program(&cfg, 3, Pair::OniAk).0,
            generate_program(&cfg, 4, Pair::OniAk).0
        );
    }

    #[test]
    fn generated_programs_parse() {
        let cfg = FuzzConfig {
            domain: FuzzDomain::Mod4,
            loops: true,
            ..FuzzConfig::default()
        };
        for i in 0..50 {
            for pair in Pair::ALL {
                let (src, pol) = generate_program(&cfg, i, pair);
                let p = parse_program(&src).unwrap_or_else(|e| panic!("{src}: {e}"));
                assert_eq!(p.signature.vars().len(), 3);
                pol.resolve(&p.signature).unwrap();
                if pair == Pair::NaniAak {
                    assert!(!p.body.has_output(), "{src}");
                }
            }
        }
    }

    #[test]
    fn empty_run() {
        let cfg = FuzzConfig {
            count: 0,
            ..FuzzConfig::default()
        };
        let s = fuzz_equivalences(&cfg);
        assert!(s.is_clean());
        assert!(s.pairs.iter().all(|(_, p)| p.programs == 0));
    }

    #[test]
    fn small_clean_run() {
        let cfg = FuzzConfig {
            count: 20,
            ..FuzzConfig::default()
        };
        let s = fuzz_equivalences(&cfg);
        assert!(s.is_clean(), "{}", s.render());
    }
}
