//! The line-oriented policy file.
//!
//! ```text
//! # comment
//! low: x, y
//! check: akd
//! declassify: h == 0
//! eta: Id
//! phi: Sign
//! rho: l mod 2
//! release: r1 = h1
//! when: paid >= cost ==> data
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::lang::{parse_expr_in, Signature};
use crate::logic::parse_state_formula;
use crate::policy::{
    Abstraction, Abstractor, FlowSpec, InitPredicate, ReleaseSpec, TemporalDeclassification,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Oni,
    Ak,
    Nid,
    Akd,
    Nani,
    Aak,
    Er,
    Akr,
    Nitd,
    Aktd,
}

impl Condition {
    pub const ALL: [Condition; 10] = [
        Condition::Oni,
        Condition::Ak,
        Condition::Nid,
        Condition::Akd,
        Condition::Nani,
        Condition::Aak,
        Condition::Er,
        Condition::Akr,
        Condition::Nitd,
        Condition::Aktd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::Oni => "oni",
            Condition::Ak => "ak",
            Condition::Nid => "nid",
            Condition::Akd => "akd",
            Condition::Nani => "nani",
            Condition::Aak => "aak",
            Condition::Er => "er",
            Condition::Akr => "akr",
            Condition::Nitd => "nitd",
            Condition::Aktd => "aktd",
        }
    }

    /// Whether this is a trace-based definition rather than a formula.
    pub fn is_semantic(self) -> bool {
        matches!(
            self,
            Condition::Oni | Condition::Nid | Condition::Nani | Condition::Er | Condition::Nitd
        )
    }

    pub fn pair(self) -> Pair {
        match self {
            Condition::Oni | Condition::Ak => Pair::OniAk,
            Condition::Nid | Condition::Akd => Pair::NidAkd,
            Condition::Nani | Condition::Aak => Pair::NaniAak,
            Condition::Er | Condition::Akr => Pair::ErAkr,
            Condition::Nitd | Condition::Aktd => Pair::NitdAktd,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Condition::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown condition `{s}`")))
    }
}

/// A semantic definition together with its epistemic encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pair {
    #[serde(rename = "oni-ak")]
    OniAk,
    #[serde(rename = "nid-akd")]
    NidAkd,
    #[serde(rename = "nani-aak")]
    NaniAak,
    #[serde(rename = "er-akr")]
    ErAkr,
    #[serde(rename = "nitd-aktd")]
    NitdAktd,
}

impl Pair {
    pub const ALL: [Pair; 5] = [
        Pair::OniAk,
        Pair::NidAkd,
        Pair::NaniAak,
        Pair::ErAkr,
        Pair::NitdAktd,
    ];

    pub fn semantic(self) -> Condition {
        match self {
            Pair::OniAk => Condition::Oni,
            Pair::NidAkd => Condition::Nid,
            Pair::NaniAak => Condition::Nani,
            Pair::ErAkr => Condition::Er,
            Pair::NitdAktd => Condition::Nitd,
        }
    }

    pub fn epistemic(self) -> Condition {
        match self {
            Pair::OniAk => Condition::Ak,
            Pair::NidAkd => Condition::Akd,
            Pair::NaniAak => Condition::Aak,
            Pair::ErAkr => Condition::Akr,
            Pair::NitdAktd => Condition::Aktd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pair::OniAk => "oni-ak",
            Pair::NidAkd => "nid-akd",
            Pair::NaniAak => "nani-aak",
            Pair::ErAkr => "er-akr",
            Pair::NitdAktd => "nitd-aktd",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pair {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase().replace(['/', '_'], "-");
        if let Some(p) = Pair::ALL.into_iter().find(|p| p.name() == s) {
            return Ok(p);
        }
        s.parse::<Condition>()
            .map(Condition::pair)
            .map_err(|_| HarnessError::Usage(format!("unknown condition pair `{s}`")))
    }
}

/// A policy file as written, before its names are resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub low: Option<Vec<String>>,
    pub check: Option<Condition>,
    pub declassify: Vec<String>,
    pub eta: Option<String>,
    pub phi: Option<String>,
    pub rho: Option<String>,
    pub release: Vec<(String, String)>,
    pub when: Vec<(String, String)>,
}

impl PolicyFile {
    pub fn parse(src: &str) -> Result<Self, HarnessError> {
        let mut p = PolicyFile::default();
        for (n, raw) in src.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| HarnessError::Policy {
                line: n + 1,
                message: msg,
            };
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| bad(format!("expected `key: value`, got `{line}`")))?;
            let rest = rest.trim();
            let once = |slot: &mut Option<String>, what: &str| {
                if slot.replace(rest.to_string()).is_some() {
                    Err(bad(format!("`{what}` given twice")))
                } else {
                    Ok(())
                }
            };
            match key.trim() {
                "low" => {
                    if p.low.is_some() {
                        return Err(bad("`low` given twice".into()));
                    }
                    p.low = Some(split_list(rest));
                }
                "check" => {
                    let c = rest.parse().map_err(|e: HarnessError| bad(e.to_string()))?;
                    if p.check.replace(c).is_some() {
                        return Err(bad("`check` given twice".into()));
                    }
                }
                "declassify" => p.declassify.push(rest.to_string()),
                "eta" => once(&mut p.eta, "eta")?,
                "phi" => once(&mut p.phi, "phi")?,
                "rho" => once(&mut p.rho, "rho")?,
                "release" => {
                    let (flag, e) = rest
                        .split_once('=')
                        .filter(|(_, e)| !e.starts_with('='))
                        .ok_or_else(|| bad("expected `release: flag = expr`".into()))?;
                    p.release
                        .push((flag.trim().to_string(), e.trim().to_string()));
                }
                "when" => {
                    let (c, e) = rest
                        .split_once("==>")
                        .ok_or_else(|| bad("expected `when: condition ==> expr`".into()))?;
                    p.when.push((c.trim().to_string(), e.trim().to_string()));
                }
                other => return Err(bad(format!("unknown key `{other}`"))),
            }
        }
        Ok(p)
    }

    /// Canonical text; parsing it gives back an equal value.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(low) = &self.low {
            out += &format!("low: {}\n", low.join(", "));
        }
        if let Some(c) = self.check {
            out += &format!("check: {c}\n");
        }
        for d in &self.declassify {
            out += &format!("declassify: {d}\n");
        }
        for (k, v) in [("eta", &self.eta), ("phi", &self.phi), ("rho", &self.rho)] {
            if let Some(v) = v {
                out += &format!("{k}: {v}\n");
            }
        }
        for (r, e) in &self.release {
            out += &format!("release: {r} = {e}\n");
        }
        for (c, e) in &self.when {
            out += &format!("when: {c} ==> {e}\n");
        }
        out
    }

    /// Resolves every name against the program's signature.
    pub fn resolve(&self, sig: &Signature) -> Result<Policy, HarnessError> {
        let low = self.low.clone().unwrap_or_default();
        let fs = FlowSpec::new(sig, &low)?;
        let expr = |s: &str| parse_expr_in(s, sig).map_err(HarnessError::from);
        let declassify = self
            .declassify
            .iter()
            .map(|d| expr(d).map(InitPredicate::Expr))
            .collect::<Result<_, _>>()?;
        let abstractor = |s: &Option<String>| -> Result<Abstractor, HarnessError> {
            match s.as_deref().map(str::trim) {
                None => Ok(Abstractor::id()),
                Some(a) => match Abstraction::parse(a) {
                    Some(a) => Ok(Abstractor::Named(a)),
                    None => expr(a).map(Abstractor::Expr),
                },
            }
        };
        let releases = self
            .release
            .iter()
            .map(|(r, e)| expr(e).map(|e| (r.clone(), e)))
            .collect::<Result<_, _>>()?;
        let when = self
            .when
            .iter()
            .map(|(c, e)| {
                let cond = parse_state_formula(c, sig)?;
                let prop = InitPredicate::Expr(expr(e)?);
                Ok(TemporalDeclassification::new(cond, prop)?)
            })
            .collect::<Result<_, HarnessError>>()?;
        Ok(Policy {
            check: self.check,
            fs,
            declassify,
            eta: abstractor(&self.eta)?,
            phi: abstractor(&self.phi)?,
            rho: abstractor(&self.rho)?,
            releases: ReleaseSpec::new(sig, releases)?,
            when,
        })
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

/// A policy with every name bound to a program identifier.
#[derive(Debug, Clone)]
pub struct Policy {
    pub check: Option<Condition>,
    pub fs: FlowSpec,
    pub declassify: Vec<InitPredicate>,
    pub eta: Abstractor,
    pub phi: Abstractor,
    pub rho: Abstractor,
    pub releases: ReleaseSpec,
    pub when: Vec<TemporalDeclassification>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    const FULL: &str = "\
# every key once
low: max, paid
check: aktd
declassify: h == 0
eta: Id
phi: Sign
rho: l mod 2
release: r1 = h1
when: paid >= cost ==> data
when: tt ==> cost > max
";

    #[test]
    fn render_round_trips() {
        let p = PolicyFile::parse(FULL).unwrap();
        assert_eq!(p.when.len(), 2);
        assert_eq!(p.release, vec![("r1".to_string(), "h1".to_string())]);
        assert_eq!(PolicyFile::parse(&p.render()).unwrap(), p);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = PolicyFile::parse("low: x\n\nfoo: 1").unwrap_err();
        assert!(matches!(err, HarnessError::Policy { line: 3, .. }));
        assert!(PolicyFile::parse("check: nope").is_err());
        assert!(PolicyFile::parse("release: r == h").is_err());
        assert!(PolicyFile::parse("check: ak\ncheck: oni").is_err());
    }

    #[test]
    fn resolution_checks_names() {
        let prog = parse_program("l := h; release r; out l").unwrap();
        let ok = PolicyFile::parse("low: l\nrelease: r = h\nphi: Par").unwrap();
        let pol = ok.resolve(&prog.signature).unwrap();
        assert_eq!(pol.releases.len(), 1);
        assert_eq!(pol.phi, Abstractor::Named(Abstraction::Par));
        let bad = PolicyFile::parse("low: q").unwrap();
        assert!(bad.resolve(&prog.signature).is_err());
        let bad = PolicyFile::parse("declassify: h + z").unwrap();
        assert!(bad.resolve(&prog.signature).is_err());
    }

    #[test]
    fn pair_names() {
        for p in Pair::ALL {
            assert_eq!(p.name().parse::<Pair>().unwrap(), p);
            assert_eq!(p.semantic().pair(), p);
            assert_eq!(p.epistemic().pair(), p);
        }
        assert_eq!("akr".parse::<Pair>().unwrap(), Pair::ErAkr);
    }
}
