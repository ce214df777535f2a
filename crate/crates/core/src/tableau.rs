//! Tableau decision procedure for local and global consequence over K and T frames.
//!
//! Formulas are put into negation normal form and hash-consed. A world is
//! saturated under the propositional rules (branching on `∨`), `□a ⇒ a` is
//! added for reflexive frames, and every `◇a` spawns a successor labelled
//! `{a} ∪ {b : □b}`. In global mode every world also receives the premises,
//! and a successor whose label is contained in an ancestor's saturated label
//! is blocked by an edge back to that ancestor. An open tableau is read off as
//! a countermodel.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::formula::Formula;
use crate::kripke::{FrameClass, KripkeModel, Mode, Sequent, Verdict};

/// Search limits for [`decide`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProverConfig {
    /// Maximum number of rule applications before giving up.
    pub max_nodes: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig { max_nodes: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProverError {
    #[error("tableau exceeded the node limit of {limit}")]
    ResourceLimit { limit: usize },
}

type Id = u32;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Nnf {
    Lit(u32, bool),
    And(Id, Id),
    Or(Id, Id),
    Box(Id),
    Dia(Id),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    index: BTreeMap<Nnf, Id>,
    atoms: Vec<String>,
    atom_index: BTreeMap<String, u32>,
}

impl Arena {
    fn intern(&mut self, n: Nnf) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    fn atom(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.atom_index.get(name) {
            return i;
        }
        let i = self.atoms.len() as u32;
        self.atoms.push(String::from(name));
        self.atom_index.insert(String::from(name), i);
        i
    }

    fn nnf(&mut self, f: &Formula, positive: bool) -> Id {
        let node = match f {
            Formula::Atom(a) => Nnf::Lit(self.atom(a), positive),
            Formula::Not(a) => return self.nnf(a, !positive),
            Formula::Box(a) => {
                let inner = self.nnf(a, positive);
                if positive { Nnf::Box(inner) } else { Nnf::Dia(inner) }
            }
            Formula::Diamond(a) => {
                let inner = self.nnf(a, positive);
                if positive { Nnf::Dia(inner) } else { Nnf::Box(inner) }
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.nnf(a, positive), self.nnf(b, positive));
                if positive { Nnf::Or(x, y) } else { Nnf::And(x, y) }
            }
            Formula::And(a, b) => {
                let (x, y) = (self.nnf(a, positive), self.nnf(b, positive));
                if positive { Nnf::And(x, y) } else { Nnf::Or(x, y) }
            }
            Formula::Implies(a, b) => {
                let (x, y) = (self.nnf(a, !positive), self.nnf(b, positive));
                if positive { Nnf::Or(x, y) } else { Nnf::And(x, y) }
            }
        };
        self.intern(node)
    }
}

enum WorldTree {
    Node { true_atoms: Vec<u32>, children: Vec<WorldTree> },
    /// Blocked successor: an edge back to the ancestor at this stack depth.
    Back(usize),
}

struct Tableau {
    arena: Arena,
    frames: FrameClass,
    globals: Vec<Id>,
    blocking: bool,
    ancestors: Vec<BTreeSet<Id>>,
    steps: usize,
    limit: usize,
}

impl Tableau {
    fn tick(&mut self) -> Result<(), ProverError> {
        self.steps += 1;
        if self.steps > self.limit {
            return Err(ProverError::ResourceLimit { limit: self.limit });
        }
        Ok(())
    }

    fn world(&mut self, initial: BTreeSet<Id>) -> Result<Option<WorldTree>, ProverError> {
        self.tick()?;
        if self.blocking {
            if let Some(level) = self.ancestors.iter().position(|anc| initial.is_subset(anc)) {
                return Ok(Some(WorldTree::Back(level)));
            }
        }
        let pending: Vec<Id> = initial.into_iter().collect();
        self.expand(pending, BTreeSet::new())
    }

    fn expand(
        &mut self,
        mut pending: Vec<Id>,
        mut set: BTreeSet<Id>,
    ) -> Result<Option<WorldTree>, ProverError> {
        while let Some(f) = pending.pop() {
            if set.contains(&f) {
                continue;
            }
            self.tick()?;
            match self.arena.nodes[f as usize].clone() {
                Nnf::Lit(a, pol) => {
                    if let Some(&neg) = self.arena.index.get(&Nnf::Lit(a, !pol)) {
                        if set.contains(&neg) {
                            return Ok(None);
                        }
                    }
                    set.insert(f);
                }
                Nnf::And(a, b) => {
                    set.insert(f);
                    pending.push(a);
                    pending.push(b);
                }
                Nnf::Or(a, b) => {
                    set.insert(f);
                    if set.contains(&a) || set.contains(&b) {
                        continue;
                    }
                    for choice in [a, b] {
                        let mut branch = pending.clone();
                        branch.push(choice);
                        if let Some(tree) = self.expand(branch, set.clone())? {
                            return Ok(Some(tree));
                        }
                    }
                    return Ok(None);
                }
                Nnf::Box(a) => {
                    set.insert(f);
                    if self.frames == FrameClass::Reflexive {
                        pending.push(a);
                    }
                }
                Nnf::Dia(_) => {
                    set.insert(f);
                }
            }
        }
        self.successors(set)
    }

    fn successors(&mut self, set: BTreeSet<Id>) -> Result<Option<WorldTree>, ProverError> {
        let mut boxes = Vec::new();
        let mut diamonds = Vec::new();
        let mut true_atoms = Vec::new();
        for &f in &set {
            match self.arena.nodes[f as usize] {
                Nnf::Box(a) => boxes.push(a),
                Nnf::Dia(a) => diamonds.push(a),
                Nnf::Lit(a, true) => true_atoms.push(a),
                _ => {}
            }
        }
        self.ancestors.push(set);
        let mut children = Vec::with_capacity(diamonds.len());
        let mut open = true;
        for d in diamonds {
            let mut label: BTreeSet<Id> = boxes.iter().copied().collect();
            label.insert(d);
            label.extend(self.globals.iter().copied());
            match self.world(label) {
                Ok(Some(child)) => children.push(child),
                Ok(None) => {
                    open = false;
                    break;
                }
                Err(e) => {
                    self.ancestors.pop();
                    return Err(e);
                }
            }
        }
        self.ancestors.pop();
        Ok(open.then_some(WorldTree::Node { true_atoms, children }))
    }
}

fn flatten(tree: &WorldTree, arena: &Arena, frames: FrameClass) -> KripkeModel {
    fn walk(
        tree: &WorldTree,
        arena: &Arena,
        stack: &mut Vec<usize>,
        model: &mut KripkeModel,
    ) -> usize {
        match tree {
            WorldTree::Back(level) => stack[*level],
            WorldTree::Node { true_atoms, children } => {
                let me = model.worlds;
                model.worlds += 1;
                model
                    .valuation
                    .push(true_atoms.iter().map(|&a| arena.atoms[a as usize].clone()).collect());
                stack.push(me);
                for child in children {
                    let target = walk(child, arena, stack, model);
                    model.accessibility.insert((me, target));
                }
                stack.pop();
                me
            }
        }
    }
    let mut model = KripkeModel::empty(0);
    walk(tree, arena, &mut Vec::new(), &mut model);
    if frames == FrameClass::Reflexive {
        model.make_reflexive();
    }
    model.designated = 0;
    model
}

/// Decide the sequent with the default search limits.
pub fn decide(s: &Sequent) -> Result<Verdict, ProverError> {
    decide_with(s, ProverConfig::default())
}

/// Decide the sequent; on invalidity the verdict carries a countermodel whose
/// designated world is `0`.
pub fn decide_with(s: &Sequent, config: ProverConfig) -> Result<Verdict, ProverError> {
    let mut arena = Arena::default();
    let premises: Vec<Id> = s.premises.iter().map(|p| arena.nnf(p, true)).collect();
    let negated_goal = arena.nnf(&s.conclusion, false);

    let mut root: BTreeSet<Id> = premises.iter().copied().collect();
    root.insert(negated_goal);
    let global = s.mode == Mode::Global;
    let mut tableau = Tableau {
        arena,
        frames: s.frames,
        globals: if global { premises } else { Vec::new() },
        blocking: global,
        ancestors: Vec::new(),
        steps: 0,
        limit: config.max_nodes,
    };
    Ok(match tableau.world(root)? {
        None => Verdict::valid(),
        Some(tree) => Verdict::invalid(flatten(&tree, &tableau.arena, s.frames)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str, mode: Mode, frames: FrameClass) -> Sequent {
        Sequent::parse(text).unwrap().with_mode(mode).with_frames(frames)
    }

    fn check(s: &Sequent) -> Verdict {
        let v = decide(s).unwrap();
        if let Some(m) = &v.countermodel {
            assert!(m.refutes(s), "countermodel does not refute {s}:\n{m}");
        }
        v
    }

    #[test]
    fn disjunctive_syllogism_valid() {
        let v = check(&seq("p | q; ~p |- q", Mode::Local, FrameClass::Reflexive));
        assert!(v.valid);
        assert!(v.countermodel.is_none());
    }

    #[test]
    fn affirming_the_consequent_invalid() {
        let v = check(&seq("~p -> q; q |- ~p", Mode::Local, FrameClass::Reflexive));
        assert!(!v.valid);
        let m = v.countermodel.unwrap();
        assert!(m.is_true(m.designated, "p"));
        assert!(m.is_true(m.designated, "q"));
    }

    #[test]
    fn spurious_box_distribution_invalid() {
        let v = check(&seq("[](p | q); ~[]p |- []q", Mode::Local, FrameClass::Reflexive));
        assert!(!v.valid);
    }

    #[test]
    fn necessitation_global_only() {
        assert!(check(&seq("p |- []p", Mode::Global, FrameClass::Reflexive)).valid);
        let v = check(&seq("p |- []p", Mode::Local, FrameClass::Reflexive));
        assert!(!v.valid);
        let m = v.countermodel.unwrap();
        assert_eq!(m.worlds, 2);
        assert!(m.is_true(0, "p"));
        assert!(!m.is_true(1, "p"));
        assert_eq!(m.validate(FrameClass::Reflexive), Ok(()));
    }

    #[test]
    fn reflexivity_axiom_needs_t() {
        assert!(check(&seq("[]p |- p", Mode::Local, FrameClass::Reflexive)).valid);
        assert!(!check(&seq("[]p |- p", Mode::Local, FrameClass::K)).valid);
        assert!(check(&seq("p |- <>p", Mode::Local, FrameClass::Reflexive)).valid);
        assert!(!check(&seq("p |- <>p", Mode::Local, FrameClass::K)).valid);
    }

    #[test]
    fn k_axiom() {
        assert!(check(&seq("[](p -> q); []p |- []q", Mode::Local, FrameClass::K)).valid);
        assert!(check(&seq("|- [](p -> q) -> []p -> []q", Mode::Local, FrameClass::K)).valid);
    }

    #[test]
    fn global_mode_with_cycles_terminates() {
        // p forces a successor that again satisfies p; global premises make every world need one.
        let v = check(&seq("<>p |- q", Mode::Global, FrameClass::K));
        assert!(!v.valid);
        // Every world has a successor, so <>true-ish claims hold globally.
        assert!(check(&seq("<>p |- <>p", Mode::Global, FrameClass::K)).valid);
        assert!(check(&seq("p -> []p; p |- [][]p", Mode::Global, FrameClass::K)).valid);
        assert!(!check(&seq("p -> []p |- [][]p", Mode::Global, FrameClass::K)).valid);
    }

    #[test]
    fn resource_limit_reported() {
        let s = seq("[](p | q); ~[]p |- []q", Mode::Local, FrameClass::Reflexive);
        assert_eq!(
            decide_with(&s, ProverConfig { max_nodes: 3 }),
            Err(ProverError::ResourceLimit { limit: 3 })
        );
    }
}
