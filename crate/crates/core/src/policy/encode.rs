use std::sync::Arc;

use super::espm::{esp, espm};
use super::{
    Abstractor, FlowSpec, InitPredicate, PolicyError, ReleaseSpec, TemporalDeclassification,
    MAX_POWERSET_BASE,
};
use crate::lang::{Domain, Expr, OutArg, Program, Stmt, Value};
use crate::logic::{Conjunct, Formula};

/// Absence of knowledge: `G esp`.
pub fn encode_ak(fs: &FlowSpec, dom: &Domain) -> Result<Arc<Formula>, PolicyError> {
    Ok(Formula::g(esp(fs, dom)?))
}

/// Absence of knowledge modulo declassification of `preds`.
pub fn encode_akd(
    fs: &FlowSpec,
    preds: &[InitPredicate],
    dom: &Domain,
) -> Result<Arc<Formula>, PolicyError> {
    Ok(Formula::g(espm(
        fs.signature(),
        fs.low(),
        fs.high(),
        preds,
        dom,
    )?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AakOptions {
    /// Fix the low inputs exactly instead of letting them vary within their
    /// `η` class.
    pub fix_low: bool,
}

/// Abstract absence of knowledge. Returns `P; out ρ(l)` and the formula to
/// check on it.
pub fn encode_aak(
    program: &Program,
    fs: &FlowSpec,
    eta: &Abstractor,
    phi: &Abstractor,
    rho: &Abstractor,
    dom: &Domain,
    opts: AakOptions,
) -> Result<(Program, Arc<Formula>), PolicyError> {
    let outs: Vec<Stmt> = rho
        .outputs(fs.low())
        .into_iter()
        .map(|e| Stmt::Out(OutArg::Expr(e)))
        .collect();
    let transformed = program.then(Stmt::seq_all(outs));
    let sig = fs.signature();
    let formula = if opts.fix_low {
        let preds = phi.predicates(fs.high());
        espm(sig, fs.low(), fs.high(), &preds, dom)?
    } else {
        let all: Vec<_> = fs.low().iter().chain(fs.high()).copied().collect();
        let mut preds = eta.predicates(fs.low());
        preds.extend(phi.predicates(fs.high()));
        espm(sig, &[], &all, &preds, dom)?
    };
    Ok((transformed, Formula::g(formula)))
}

/// Absence of knowledge modulo release: at every point some subset `E` of
/// the releases is exactly the set of raised flags and the secrets agreeing
/// on `E` are possible.
pub fn encode_akr(
    fs: &FlowSpec,
    rs: &ReleaseSpec,
    dom: &Domain,
) -> Result<Arc<Formula>, PolicyError> {
    let n = rs.len();
    if n > MAX_POWERSET_BASE {
        return Err(PolicyError::TooMany {
            what: "release spec",
            got: n,
        });
    }
    let mut disjuncts = Vec::new();
    for mask in 0u32..(1 << n) {
        let chosen = |i: usize| mask & (1 << i) != 0;
        // A flag the program never raises cannot be part of E.
        if (0..n).any(|i| chosen(i) && rs.releases[i].slot.is_none()) {
            continue;
        }
        let preds: Vec<InitPredicate> = (0..n)
            .filter(|&i| chosen(i))
            .map(|i| InitPredicate::Expr(rs.releases[i].expr.clone()))
            .collect();
        let mut parts = vec![espm(fs.signature(), fs.low(), fs.high(), &preds, dom)?];
        for (i, r) in rs.releases.iter().enumerate() {
            if let Some(slot) = r.slot {
                let v = if chosen(i) { Value::TRUE } else { Value::FALSE };
                parts.push(Formula::eq(Expr::Var(slot), Expr::Const(v)));
            }
        }
        disjuncts.push(Formula::and(parts));
    }
    Ok(Formula::g(Formula::or(disjuncts)))
}

/// Absence of knowledge modulo temporal declassification: for each subset
/// `Ψ`, the secrets agreeing on `Ψ`'s properties stay possible until some
/// condition outside `Ψ` has held.
pub fn encode_aktd(
    fs: &FlowSpec,
    phis: &[TemporalDeclassification],
    dom: &Domain,
) -> Result<Arc<Formula>, PolicyError> {
    let n = phis.len();
    if n > MAX_POWERSET_BASE {
        return Err(PolicyError::TooMany {
            what: "temporal declassification set",
            got: n,
        });
    }
    let mut conjuncts = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let inside = |i: usize| mask & (1 << i) != 0;
        let preds: Vec<InitPredicate> = (0..n)
            .filter(|&i| inside(i))
            .map(|i| phis[i].property.clone())
            .collect();
        let conds: Vec<Arc<Formula>> = (0..n)
            .filter(|&i| !inside(i))
            .map(|i| phis[i].condition.clone())
            .collect();
        let release = if conds.is_empty() {
            Formula::ff()
        } else {
            Formula::or(conds)
        };
        let body = espm(fs.signature(), fs.low(), fs.high(), &preds, dom)?;
        conjuncts.push(Conjunct {
            binding: vec![(Arc::from("psi"), Value(mask as i64))],
            formula: Formula::weak_until(body, release),
        });
    }
    Ok(Arc::new(Formula::And(conjuncts)))
}
