use std::collections::HashMap;
use std::sync::Arc;

use super::{FlowSpec, InitPredicate, PolicyError};
use crate::lang::{Domain, Signature, Slot, Store, Value};
use crate::logic::{Conjunct, Formula};

/// Refuse encodings with more knowledge atoms than this.
pub const MAX_ESPM_ATOMS: u128 = 1 << 22;

/// Upper bound on the `L` atoms of an expansion: `|Val|^(|fixed| + 2|high|)`.
pub fn espm_atom_count(dom: &Domain, fixed: usize, high: usize) -> u128 {
    (dom.size() as u128).saturating_pow((fixed + 2 * high) as u32)
}

fn budget(dom: &Domain, fixed: usize, high: usize) -> Result<(), PolicyError> {
    let atoms = espm_atom_count(dom, fixed, high);
    if atoms > MAX_ESPM_ATOMS {
        return Err(PolicyError::Budget {
            atoms,
            limit: MAX_ESPM_ATOMS,
        });
    }
    Ok(())
}

/// All vectors of length `k` over `values`, lexicographically.
pub(crate) fn tuples(values: &[Value], k: usize) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                values.iter().map(move |&v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn labels(sig: &Signature, prefix: &str, slots: &[Slot], vals: &[Value]) -> Vec<(Arc<str>, Value)> {
    slots
        .iter()
        .zip(vals)
        .map(|(&s, &v)| (Arc::from(format!("{prefix}.{}", sig.name(s))), v))
        .collect()
}

/// One universally quantified identifier per level: for each value `a` of
/// `slots[k]`, `init(slots[k], a) -> inner`.
fn nested(
    sig: &Signature,
    dom: &Domain,
    slots: &[(Slot, &str)],
    prefix: &mut Vec<Value>,
    leaf: &mut dyn FnMut(&[Value]) -> Arc<Formula>,
) -> Arc<Formula> {
    let k = prefix.len();
    if k == slots.len() {
        return leaf(prefix);
    }
    let (slot, label) = slots[k];
    let mut cs = Vec::with_capacity(dom.size());
    for a in dom.values() {
        prefix.push(a);
        let inner = nested(sig, dom, slots, prefix, leaf);
        prefix.pop();
        cs.push(Conjunct {
            binding: vec![(Arc::from(format!("{label}.{}", sig.name(slot))), a)],
            formula: Formula::implies(Formula::init(slot, a), inner),
        });
    }
    Arc::new(Formula::And(cs))
}

/// Every secret is possible: for all low values `v`, if the low identifiers
/// started at `v`, then every high vector `u` is still possible together
/// with `v`.
pub fn esp(fs: &FlowSpec, dom: &Domain) -> Result<Arc<Formula>, PolicyError> {
    let sig = fs.signature();
    let (low, high) = (fs.low(), fs.high());
    budget(dom, low.len() + high.len(), 0)?;
    let values: Vec<Value> = dom.values().collect();
    let secrets = tuples(&values, high.len());
    let levels: Vec<(Slot, &str)> = low.iter().map(|&s| (s, "v")).collect();
    let mut leaf = |v: &[Value]| {
        let cs = secrets
            .iter()
            .map(|u| Conjunct {
                binding: labels(sig, "u", high, u),
                formula: Formula::l(Formula::and([
                    Formula::init_vec(low, v),
                    Formula::init_vec(high, u),
                ])),
            })
            .collect();
        Arc::new(Formula::And(cs))
    };
    Ok(nested(sig, dom, &levels, &mut Vec::new(), &mut leaf))
}

/// Every secret agreeing on `preds` is possible: for all `v` on `fixed` and
/// `u1` on `high` that the execution started from, every `u2` with the same
/// predicate values as `(v, u1)` is possible together with `v`. Agreement is
/// decided here on concrete vectors, so predicates never reach the formula.
pub fn espm(
    sig: &Signature,
    fixed: &[Slot],
    high: &[Slot],
    preds: &[InitPredicate],
    dom: &Domain,
) -> Result<Arc<Formula>, PolicyError> {
    for p in preds {
        for s in p.slots() {
            if !fixed.contains(&s) && !high.contains(&s) {
                return Err(PolicyError::OutOfScope(sig.name(s).to_string()));
            }
        }
    }
    budget(dom, fixed.len(), high.len())?;
    let values: Vec<Value> = dom.values().collect();
    let secrets = tuples(&values, high.len());
    let width = sig.len();
    let class = |v: &[Value], u: &[Value]| -> Vec<Value> {
        let mut s = Store(vec![Value(0); width]);
        for (&slot, &a) in fixed.iter().zip(v).chain(high.iter().zip(u)) {
            s.set(slot, a);
        }
        preds.iter().map(|p| p.eval(&s, dom)).collect()
    };

    let mut atoms: HashMap<(Vec<Value>, usize), Arc<Formula>> = HashMap::new();
    let mut blocks: HashMap<(Vec<Value>, Vec<Value>), Arc<Formula>> = HashMap::new();
    let mut classes: HashMap<Vec<Value>, Vec<Vec<Value>>> = HashMap::new();
    let mut leaf = |vu: &[Value]| {
        let (v, u1) = vu.split_at(fixed.len());
        let per_u = classes
            .entry(v.to_vec())
            .or_insert_with(|| secrets.iter().map(|u| class(v, u)).collect());
        let want = class(v, u1);
        let key = (v.to_vec(), want.clone());
        if let Some(b) = blocks.get(&key) {
            return b.clone();
        }
        let mut cs = Vec::new();
        for (j, u2) in secrets.iter().enumerate() {
            if per_u[j] != want {
                continue;
            }
            let atom = atoms
                .entry((v.to_vec(), j))
                .or_insert_with(|| {
                    Formula::l(Formula::and([
                        Formula::init_vec(fixed, v),
                        Formula::init_vec(high, u2),
                    ]))
                })
                .clone();
            cs.push(Conjunct {
                binding: labels(sig, "u2", high, u2),
                formula: atom,
            });
        }
        let b = Arc::new(Formula::And(cs));
        blocks.insert(key, b.clone());
        b
    };
    let levels: Vec<(Slot, &str)> = fixed
        .iter()
        .map(|&s| (s, "v"))
        .chain(high.iter().map(|&s| (s, "u1")))
        .collect();
    Ok(nested(sig, dom, &levels, &mut Vec::new(), &mut leaf))
}
