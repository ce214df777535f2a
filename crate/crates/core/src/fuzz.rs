//! Random formulas and sequents for fuzzing.

use alloc::vec::Vec;

use rand::Rng;

use crate::formula::Formula;
use crate::kripke::{FrameClass, Mode, Sequent};

/// Shape limits for generated sequents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzShape {
    pub atoms: usize,
    pub max_modal_depth: usize,
    pub max_premises: usize,
    /// Maximum number of connectives per formula.
    pub max_connectives: usize,
}

impl Default for FuzzShape {
    fn default() -> Self {
        FuzzShape { atoms: 2, max_modal_depth: 1, max_premises: 2, max_connectives: 4 }
    }
}

const ATOMS: [&str; 4] = ["p", "q", "r", "s"];

/// A random formula with at most `budget` connectives and modal depth at most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: usize, depth: usize, budget: usize) -> Formula {
    let atoms = atoms.clamp(1, ATOMS.len());
    if budget == 0 || rng.gen_ratio(1, 4) {
        return Formula::atom(ATOMS[rng.gen_range(0..atoms)]);
    }
    let choice = if depth == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..6) };
    match choice {
        0 => Formula::not(random_formula(rng, atoms, depth, budget - 1)),
        1..=3 => {
            let left = rng.gen_range(0..budget);
            let a = random_formula(rng, atoms, depth, left);
            let b = random_formula(rng, atoms, depth, budget - 1 - left);
            match choice {
                1 => Formula::or(a, b),
                2 => Formula::and(a, b),
                _ => Formula::implies(a, b),
            }
        }
        4 => Formula::boxed(random_formula(rng, atoms, depth - 1, budget - 1)),
        _ => Formula::diamond(random_formula(rng, atoms, depth - 1, budget - 1)),
    }
}

pub fn random_sequent<R: Rng>(rng: &mut R, shape: FuzzShape, mode: Mode, frames: FrameClass) -> Sequent {
    let n = rng.gen_range(0..=shape.max_premises);
    let premises: Vec<Formula> = (0..n)
        .map(|_| random_formula(rng, shape.atoms, shape.max_modal_depth, shape.max_connectives))
        .collect();
    let conclusion = random_formula(rng, shape.atoms, shape.max_modal_depth, shape.max_connectives);
    Sequent::new(premises, conclusion).with_mode(mode).with_frames(frames)
}
