//! Exhaustive model enumeration, used as an independent check on the tableau.
//!
//! Every model of the frame class with at most `max_worlds` worlds is visited,
//! up to two reductions that never change a truth value:
//!
//! * world relabelling: non-designated worlds are enumerated with their
//!   valuations in non-decreasing order (all worlds in global mode);
//! * irrelevant edges: in local mode only the out-edges of worlds closer to
//!   the designated world than the sequent's modal depth are enumerated.
//!
//! Global mode with modal depth at most one is checked world by world, since
//! the truth of such formulas at `w` depends only on `w`'s valuation and the
//! valuations of its successors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::formula::Formula;
use crate::kripke::{FrameClass, KripkeModel, Mode, Sequent, Verdict};

/// Largest supported world bound (worlds are tracked in a `u64` mask).
pub const MAX_WORLDS: usize = 64;

#[derive(Clone, Copy)]
enum Op {
    Atom(usize),
    Not(usize),
    Box(usize),
    Dia(usize),
    Or(usize, usize),
    And(usize, usize),
    Implies(usize, usize),
}

/// A formula flattened to post-order over numbered atoms.
struct Compiled {
    ops: Vec<Op>,
}

impl Compiled {
    fn new(f: &Formula, atoms: &BTreeMap<&str, usize>) -> Compiled {
        fn go(f: &Formula, atoms: &BTreeMap<&str, usize>, ops: &mut Vec<Op>) -> usize {
            let op = match f {
                Formula::Atom(a) => Op::Atom(atoms[a.as_str()]),
                Formula::Not(a) => Op::Not(go(a, atoms, ops)),
                Formula::Box(a) => Op::Box(go(a, atoms, ops)),
                Formula::Diamond(a) => Op::Dia(go(a, atoms, ops)),
                Formula::Or(a, b) => {
                    let x = go(a, atoms, ops);
                    Op::Or(x, go(b, atoms, ops))
                }
                Formula::And(a, b) => {
                    let x = go(a, atoms, ops);
                    Op::And(x, go(b, atoms, ops))
                }
                Formula::Implies(a, b) => {
                    let x = go(a, atoms, ops);
                    Op::Implies(x, go(b, atoms, ops))
                }
            };
            ops.push(op);
            ops.len() - 1
        }
        let mut ops = Vec::new();
        go(f, atoms, &mut ops);
        Compiled { ops }
    }

    /// Mask of worlds where the formula holds.
    fn eval(&self, m: &Model, scratch: &mut Vec<u64>) -> u64 {
        scratch.clear();
        let all = m.all();
        for op in &self.ops {
            let v = match *op {
                Op::Atom(a) => m.atom_mask[a],
                Op::Not(a) => !scratch[a] & all,
                Op::Box(a) => {
                    let body = scratch[a];
                    let mut out = 0;
                    for w in 0..m.n {
                        if m.rows[w] & !body == 0 {
                            out |= 1 << w;
                        }
                    }
                    out
                }
                Op::Dia(a) => {
                    let body = scratch[a];
                    let mut out = 0;
                    for w in 0..m.n {
                        if m.rows[w] & body != 0 {
                            out |= 1 << w;
                        }
                    }
                    out
                }
                Op::Or(a, b) => scratch[a] | scratch[b],
                Op::And(a, b) => scratch[a] & scratch[b],
                Op::Implies(a, b) => (!scratch[a] | scratch[b]) & all,
            };
            scratch.push(v);
        }
        *scratch.last().expect("compiled formula is nonempty")
    }
}

struct Model {
    n: usize,
    /// Successor mask of each world.
    rows: Vec<u64>,
    /// Worlds where each atom holds.
    atom_mask: Vec<u64>,
}

impl Model {
    fn all(&self) -> u64 {
        if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 }
    }

    fn set_valuation(&mut self, vals: &[u32]) {
        for (a, mask) in self.atom_mask.iter_mut().enumerate() {
            *mask = 0;
            for (w, &v) in vals.iter().enumerate() {
                if v & (1 << a) != 0 {
                    *mask |= 1 << w;
                }
            }
        }
    }

    fn to_kripke(&self, atoms: &[&str], designated: usize) -> KripkeModel {
        let mut m = KripkeModel::empty(self.n);
        m.designated = designated;
        for w in 0..self.n {
            for v in 0..self.n {
                if self.rows[w] & (1 << v) != 0 {
                    m.accessibility.insert((w, v));
                }
            }
            for (a, name) in atoms.iter().enumerate() {
                if self.atom_mask[a] & (1 << w) != 0 {
                    m.valuation[w].insert(String::from(*name));
                }
            }
        }
        m
    }
}

struct Problem {
    premises: Vec<Compiled>,
    conclusion: Compiled,
    depth: usize,
    frames: FrameClass,
    atom_count: usize,
}

impl Problem {
    fn default_row(&self, w: usize) -> u64 {
        match self.frames {
            FrameClass::K => 0,
            FrameClass::Reflexive => 1 << w,
        }
    }

    /// All admissible successor masks for world `w` among `n` worlds.
    fn rows_for(&self, w: usize, n: usize) -> impl Iterator<Item = u64> + '_ {
        let all: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let forced = self.default_row(w);
        let free = all & !forced;
        // enumerate subsets of `free` in increasing order
        let mut next = Some(0u64);
        core::iter::from_fn(move || {
            let cur = next?;
            next = if cur == free { None } else { Some(((cur | !free).wrapping_add(1)) & free) };
            Some(cur | forced)
        })
    }
}

/// Calls `f` for every non-decreasing tail `vals[start..]` with entries below `limit`.
fn for_each_sorted_tail(
    vals: &mut [u32],
    start: usize,
    limit: u32,
    f: &mut dyn FnMut(&[u32]) -> bool,
) -> bool {
    fn rec(vals: &mut [u32], i: usize, lo: u32, limit: u32, f: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if i == vals.len() {
            return f(vals);
        }
        for v in lo..limit {
            vals[i] = v;
            if rec(vals, i + 1, v, limit, f) {
                return true;
            }
        }
        false
    }
    rec(vals, start, 0, limit, f)
}

/// Exhaustively search for a countermodel with at most `max_worlds` worlds.
///
/// `valid` in the returned verdict means valid up to the bound. For local
/// consequence with modal depth at most one over two atoms, five worlds are
/// enough for the answer to be exact.
pub fn brute_force_oracle(s: &Sequent, max_worlds: usize) -> Verdict {
    assert!(max_worlds >= 1, "max_worlds must be positive");
    let max_worlds = max_worlds.min(MAX_WORLDS);
    let atoms: Vec<&str> = s.atoms().into_iter().collect();
    assert!(atoms.len() <= 16, "too many atoms for exhaustive search");
    let index: BTreeMap<&str, usize> = atoms.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let problem = Problem {
        premises: s.premises.iter().map(|p| Compiled::new(p, &index)).collect(),
        conclusion: Compiled::new(&s.conclusion, &index),
        depth: s.modal_depth(),
        frames: s.frames,
        atom_count: atoms.len(),
    };
    for n in 1..=max_worlds {
        let found = match s.mode {
            Mode::Local => search_local(&problem, n),
            Mode::Global if problem.depth <= 1 => search_global_shallow(&problem, n),
            Mode::Global => search_global_full(&problem, n),
        };
        if let Some((model, designated)) = found {
            return Verdict::invalid(model.to_kripke(&atoms, designated));
        }
    }
    Verdict::valid()
}

fn search_local(p: &Problem, n: usize) -> Option<(Model, usize)> {
    let limit = 1u32 << p.atom_count;
    let mut model = Model {
        n,
        rows: (0..n).map(|w| p.default_row(w)).collect(),
        atom_mask: alloc::vec![0; p.atom_count],
    };
    let mut scratch = Vec::new();
    let mut vals = alloc::vec![0u32; n];
    let mut found = false;
    for v0 in 0..limit {
        vals[0] = v0;
        let done = for_each_sorted_tail(&mut vals, 1, limit, &mut |vals| {
            model.set_valuation(vals);
            let mut queue = alloc::collections::VecDeque::new();
            queue.push_back((0usize, 0usize));
            found = local_rows(p, &mut model, &mut queue, 1, &mut scratch);
            found
        });
        if done {
            return Some((model, 0));
        }
    }
    None
}

/// Enumerate out-edges breadth-first from the designated world, stopping at the modal depth.
fn local_rows(
    p: &Problem,
    model: &mut Model,
    queue: &mut alloc::collections::VecDeque<(usize, usize)>,
    seen: u64,
    scratch: &mut Vec<u64>,
) -> bool {
    let Some((w, dist)) = queue.pop_front() else {
        return local_refutes(p, model, scratch);
    };
    if dist >= p.depth {
        let r = local_rows(p, model, queue, seen, scratch);
        queue.push_front((w, dist));
        return r;
    }
    let rows: Vec<u64> = p.rows_for(w, model.n).collect();
    for row in rows {
        model.rows[w] = row;
        let fresh = row & !seen;
        let before = queue.len();
        for v in 0..model.n {
            if fresh & (1 << v) != 0 {
                queue.push_back((v, dist + 1));
            }
        }
        if local_rows(p, model, queue, seen | fresh, scratch) {
            return true;
        }
        queue.truncate(before);
    }
    model.rows[w] = p.default_row(w);
    queue.push_front((w, dist));
    false
}

fn local_refutes(p: &Problem, model: &Model, scratch: &mut Vec<u64>) -> bool {
    for prem in &p.premises {
        if prem.eval(model, scratch) & 1 == 0 {
            return false;
        }
    }
    p.conclusion.eval(model, scratch) & 1 == 0
}

fn search_global_shallow(p: &Problem, n: usize) -> Option<(Model, usize)> {
    let limit = 1u32 << p.atom_count;
    let mut model = Model {
        n,
        rows: (0..n).map(|w| p.default_row(w)).collect(),
        atom_mask: alloc::vec![0; p.atom_count],
    };
    let mut scratch = Vec::new();
    let mut vals = alloc::vec![0u32; n];
    let mut result = None;
    for_each_sorted_tail(&mut vals, 0, limit, &mut |vals| {
        model.set_valuation(vals);
        let mut good = alloc::vec![None; n];
        let mut bad = None;
        for w in 0..n {
            let bit = 1u64 << w;
            for row in p.rows_for(w, n) {
                model.rows[w] = row;
                let ok = p.premises.iter().all(|pr| pr.eval(&model, &mut scratch) & bit != 0);
                if !ok {
                    continue;
                }
                if good[w].is_none() {
                    good[w] = Some(row);
                }
                if bad.is_none() && p.conclusion.eval(&model, &mut scratch) & bit == 0 {
                    bad = Some((w, row));
                }
            }
            model.rows[w] = p.default_row(w);
            if good[w].is_none() {
                return false;
            }
        }
        let Some((designated, bad_row)) = bad else {
            return false;
        };
        for w in 0..n {
            model.rows[w] = if w == designated { bad_row } else { good[w].unwrap() };
        }
        result = Some(designated);
        true
    });
    result.map(|d| (model, d))
}

fn search_global_full(p: &Problem, n: usize) -> Option<(Model, usize)> {
    let limit = 1u32 << p.atom_count;
    let mut model = Model {
        n,
        rows: (0..n).map(|w| p.default_row(w)).collect(),
        atom_mask: alloc::vec![0; p.atom_count],
    };
    let mut scratch = Vec::new();
    let mut vals = alloc::vec![0u32; n];
    let mut result = None;
    for_each_sorted_tail(&mut vals, 0, limit, &mut |vals| {
        model.set_valuation(vals);
        result = global_rows(p, &mut model, 0, &mut scratch);
        result.is_some()
    });
    result.map(|d| (model, d))
}

fn global_rows(p: &Problem, model: &mut Model, w: usize, scratch: &mut Vec<u64>) -> Option<usize> {
    if w == model.n {
        let all = model.all();
        let everywhere = p.premises.iter().all(|pr| pr.eval(model, scratch) == all);
        if !everywhere {
            return None;
        }
        let holds = p.conclusion.eval(model, scratch);
        return (0..model.n).find(|&v| holds & (1 << v) == 0);
    }
    let rows: Vec<u64> = p.rows_for(w, model.n).collect();
    for row in rows {
        model.rows[w] = row;
        if let Some(d) = global_rows(p, model, w + 1, scratch) {
            return Some(d);
        }
    }
    model.rows[w] = p.default_row(w);
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str, mode: Mode, frames: FrameClass) -> Sequent {
        Sequent::parse(text).unwrap().with_mode(mode).with_frames(frames)
    }

    #[test]
    fn row_enumeration_respects_reflexivity() {
        let p = Problem {
            premises: Vec::new(),
            conclusion: Compiled { ops: alloc::vec![Op::Atom(0)] },
            depth: 0,
            frames: FrameClass::Reflexive,
            atom_count: 1,
        };
        let rows: Vec<u64> = p.rows_for(1, 3).collect();
        assert_eq!(rows, alloc::vec![0b010, 0b011, 0b110, 0b111]);
        let k = Problem { frames: FrameClass::K, ..p };
        assert_eq!(k.rows_for(0, 2).count(), 4);
    }

    #[test]
    fn diamond_disjunctive_syllogism_valid() {
        let s = seq("<>(p | q); ~<>p |- <>q", Mode::Local, FrameClass::Reflexive);
        assert!(brute_force_oracle(&s, 5).valid);
    }

    #[test]
    fn diamond_theorem_refuted() {
        let s = seq("<>(p | q); <>~p |- <>q", Mode::Local, FrameClass::Reflexive);
        let v = brute_force_oracle(&s, 5);
        assert!(!v.valid);
        let m = v.countermodel.unwrap();
        assert!(m.refutes(&s));
        // The designated world doubles as the ~p witness under reflexivity.
        assert_eq!(m.worlds, 2);

        let k = s.clone().with_frames(FrameClass::K);
        let v = brute_force_oracle(&k, 5);
        assert!(!v.valid);
        let m = v.countermodel.unwrap();
        assert!(m.refutes(&k));
        // Still two worlds: under K the designated world may see itself.
        assert_eq!(m.worlds, 2);
    }

    #[test]
    fn excluded_middle() {
        let s = seq("|- p | ~p", Mode::Local, FrameClass::K);
        assert!(brute_force_oracle(&s, 1).valid);
    }

    #[test]
    fn necessitation() {
        assert!(brute_force_oracle(&seq("p |- []p", Mode::Global, FrameClass::Reflexive), 4).valid);
        let s = seq("p |- []p", Mode::Local, FrameClass::Reflexive);
        let v = brute_force_oracle(&s, 4);
        assert!(!v.valid);
        assert!(v.countermodel.unwrap().refutes(&s));
    }

    #[test]
    fn deeper_global_uses_full_search() {
        let s = seq("p -> []p |- [][]p", Mode::Global, FrameClass::K);
        let v = brute_force_oracle(&s, 2);
        assert!(!v.valid);
        assert!(v.countermodel.unwrap().refutes(&s));
        let s = seq("p; p -> []p |- [][]p", Mode::Global, FrameClass::K);
        assert!(brute_force_oracle(&s, 3).valid);
    }

    #[test]
    fn deeper_local_reaches_second_layer() {
        let s = seq("[]<>p |- <>[]p", Mode::Local, FrameClass::Reflexive);
        let v = brute_force_oracle(&s, 3);
        assert!(!v.valid);
        assert!(v.countermodel.unwrap().refutes(&s));
    }
}
