//! Formulas of the normal modal language: atoms, `¬`, `□`, `◇`, `∨`, `∧`, `→`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax;

/// A modal formula.
///
/// Atom names are lowercase identifiers (`[a-z][a-z0-9_]*`). Atoms are
/// global, so substitution never has to worry about capture.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

/// The modality wrapped around both propositional variables of a form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modality {
    /// No modal operator.
    #[serde(rename = "none")]
    None,
    /// `□`, read "it's certain that".
    #[serde(rename = "box")]
    Necessity,
    /// `◇`, read "it's possible that".
    #[serde(rename = "dia")]
    Possibility,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::None, Modality::Necessity, Modality::Possibility];

    /// Wrap `f` in this modality.
    pub fn apply(self, f: Formula) -> Formula {
        match self {
            Modality::None => f,
            Modality::Necessity => Formula::boxed(f),
            Modality::Possibility => Formula::diamond(f),
        }
    }

    /// Short stable tag used in identifiers and reports.
    pub fn tag(self) -> &'static str {
        match self {
            Modality::None => "none",
            Modality::Necessity => "box",
            Modality::Possibility => "dia",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == tag)
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Returns true if `name` is a valid atom identifier.
pub fn is_atom_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Formula {
    /// Builds an atom. Panics on an invalid identifier.
    pub fn atom(name: &str) -> Formula {
        assert!(is_atom_name(name), "invalid atom name {name:?}");
        Formula::Atom(String::from(name))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    /// Parse the concrete syntax (`~ [] <> | & ->`).
    pub fn parse(text: &str) -> Result<Formula, syntax::SyntaxError> {
        syntax::parse_formula(text)
    }

    /// Render with minimal parentheses; inverse of [`Formula::parse`].
    pub fn render(&self) -> String {
        syntax::render(self)
    }

    /// Maximum nesting of `□`/`◇` along any root-to-leaf path.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(a) => a.modal_depth(),
            Formula::Box(a) | Formula::Diamond(a) => 1 + a.modal_depth(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
        }
    }

    /// Rewrite into the functionally complete basis `{¬, □, →}`:
    /// `a ∨ b ⇒ ¬a → b`, `a ∧ b ⇒ ¬(a → ¬b)`, `◇a ⇒ ¬□¬a`, applied bottom-up.
    pub fn to_primitive_basis(&self) -> Formula {
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::Not(a) => Formula::not(a.to_primitive_basis()),
            Formula::Box(a) => Formula::boxed(a.to_primitive_basis()),
            Formula::Diamond(a) => {
                Formula::not(Formula::boxed(Formula::not(a.to_primitive_basis())))
            }
            Formula::Or(a, b) => {
                Formula::implies(Formula::not(a.to_primitive_basis()), b.to_primitive_basis())
            }
            Formula::And(a, b) => Formula::not(Formula::implies(
                a.to_primitive_basis(),
                Formula::not(b.to_primitive_basis()),
            )),
            Formula::Implies(a, b) => {
                Formula::implies(a.to_primitive_basis(), b.to_primitive_basis())
            }
        }
    }

    /// True if the formula only uses `¬`, `□`, `→` and atoms.
    pub fn is_primitive(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(a) | Formula::Box(a) => a.is_primitive(),
            Formula::Implies(a, b) => a.is_primitive() && b.is_primitive(),
            Formula::Diamond(_) | Formula::Or(..) | Formula::And(..) => false,
        }
    }

    /// Collect atom names into `out`.
    pub fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.as_str());
            }
            Formula::Not(a) | Formula::Box(a) | Formula::Diamond(a) => a.collect_atoms(out),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(a) | Formula::Box(a) | Formula::Diamond(a) => 1 + a.size(),
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl core::str::FromStr for Formula {
    type Err = syntax::SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Formula::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// A formula template whose leaves may be metavariables (`φ`, `ψ`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MetaFormula {
    Atom(String),
    /// A metavariable leaf, stored by name (`phi` or `psi`).
    Var(String),
    Not(Box<MetaFormula>),
    Box(Box<MetaFormula>),
    Diamond(Box<MetaFormula>),
    Or(Box<MetaFormula>, Box<MetaFormula>),
    And(Box<MetaFormula>, Box<MetaFormula>),
    Implies(Box<MetaFormula>, Box<MetaFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SubstituteError {
    #[error("unknown metavariable `{0}` (expected phi or psi)")]
    UnknownMetavariable(String),
}

/// Names accepted for metavariables.
pub const METAVARIABLES: [&str; 2] = ["phi", "psi"];

impl MetaFormula {
    /// Parse a template: the formula syntax plus `$phi`/`$psi` (or `φ`/`ψ`) leaves.
    pub fn parse(text: &str) -> Result<MetaFormula, syntax::SyntaxError> {
        syntax::parse_meta(text)
    }

    pub fn var(name: &str) -> MetaFormula {
        MetaFormula::Var(String::from(name))
    }

    pub fn render(&self) -> String {
        syntax::render_meta(self)
    }

    /// Replace every `phi` leaf by `phi` and every `psi` leaf by `psi`.
    pub fn substitute(&self, phi: &Formula, psi: &Formula) -> Result<Formula, SubstituteError> {
        Ok(match self {
            MetaFormula::Atom(name) => Formula::Atom(name.clone()),
            MetaFormula::Var(name) => match name.as_str() {
                "phi" => phi.clone(),
                "psi" => psi.clone(),
                other => return Err(SubstituteError::UnknownMetavariable(String::from(other))),
            },
            MetaFormula::Not(a) => Formula::not(a.substitute(phi, psi)?),
            MetaFormula::Box(a) => Formula::boxed(a.substitute(phi, psi)?),
            MetaFormula::Diamond(a) => Formula::diamond(a.substitute(phi, psi)?),
            MetaFormula::Or(a, b) => Formula::or(a.substitute(phi, psi)?, b.substitute(phi, psi)?),
            MetaFormula::And(a, b) => {
                Formula::and(a.substitute(phi, psi)?, b.substitute(phi, psi)?)
            }
            MetaFormula::Implies(a, b) => {
                Formula::implies(a.substitute(phi, psi)?, b.substitute(phi, psi)?)
            }
        })
    }

    /// Metavariable names occurring in the template.
    pub fn metavariables(&self) -> BTreeSet<&str> {
        fn walk<'a>(m: &'a MetaFormula, out: &mut BTreeSet<&'a str>) {
            match m {
                MetaFormula::Atom(_) => {}
                MetaFormula::Var(n) => {
                    out.insert(n.as_str());
                }
                MetaFormula::Not(a) | MetaFormula::Box(a) | MetaFormula::Diamond(a) => walk(a, out),
                MetaFormula::Or(a, b) | MetaFormula::And(a, b) | MetaFormula::Implies(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for MetaFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::atom("p")
    }
    fn q() -> Formula {
        Formula::atom("q")
    }

    #[test]
    fn primitive_basis_rewrites() {
        assert_eq!(
            Formula::or(p(), q()).to_primitive_basis(),
            Formula::implies(Formula::not(p()), q())
        );
        assert_eq!(
            Formula::and(p(), q()).to_primitive_basis(),
            Formula::not(Formula::implies(p(), Formula::not(q())))
        );
        assert_eq!(
            Formula::diamond(p()).to_primitive_basis(),
            Formula::not(Formula::boxed(Formula::not(p())))
        );
    }

    #[test]
    fn modal_depth_examples() {
        assert_eq!(p().modal_depth(), 0);
        assert_eq!(Formula::boxed(p()).modal_depth(), 1);
        assert_eq!(
            Formula::boxed(Formula::or(p(), Formula::diamond(q()))).modal_depth(),
            2
        );
    }

    #[test]
    fn substitute_examples() {
        let t = MetaFormula::parse("$phi | $psi").unwrap();
        let got = t
            .substitute(&Formula::boxed(p()), &Formula::boxed(q()))
            .unwrap();
        assert_eq!(got, Formula::or(Formula::boxed(p()), Formula::boxed(q())));

        let id = MetaFormula::var("phi");
        assert_eq!(id.substitute(&p(), &q()).unwrap(), p());

        let mp = MetaFormula::parse("~φ -> ψ").unwrap();
        let got = mp
            .substitute(&Formula::diamond(p()), &Formula::diamond(q()))
            .unwrap();
        assert_eq!(
            got,
            Formula::implies(Formula::not(Formula::diamond(p())), Formula::diamond(q()))
        );
    }

    #[test]
    fn substitute_rejects_unknown_metavariable() {
        let t = MetaFormula::Or(Box::new(MetaFormula::var("phi")), Box::new(MetaFormula::var("chi")));
        assert_eq!(
            t.substitute(&p(), &q()),
            Err(SubstituteError::UnknownMetavariable("chi".into()))
        );
    }

    #[test]
    fn atom_names() {
        assert!(is_atom_name("p"));
        assert!(is_atom_name("p2_x"));
        assert!(!is_atom_name(""));
        assert!(!is_atom_name("P"));
        assert!(!is_atom_name("2p"));
    }
}
