//! The exhaustive oracle next to the solver on a small system.

use raag_comm::solver::{brute_force_feasible, prune_fixpoint};
use raag_comm::system::build_full_system;
use raag_comm::trees::Tree;

fn main() {
    let full = build_full_system(&Tree::path(3), &Tree::path(5)).unwrap();
    for s in &full.systems {
        let fast = prune_fixpoint(s).unwrap();
        let slow = brute_force_feasible(s, 4).unwrap();
        println!(
            "component {}: solver feasible = {}, search over {} classes up to 4 feasible = {}",
            s.component,
            fast.is_feasible(),
            slow.classes,
            slow.feasible
        );
    }
}
