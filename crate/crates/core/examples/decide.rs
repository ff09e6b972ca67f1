//! Deciding pairs of trees, with the witness of a feasible pair.
//!
//! Usage: `cargo run --release --example decide -- path:10 tkk:2`

use raag_comm::solver::{decide, Verdict};
use raag_comm::trees::parse_tree_spec;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let pairs: Vec<(String, String)> = if args.len() == 2 {
        vec![(args[0].clone(), args[1].clone())]
    } else {
        [("path:3", "path:5"), ("path:5", "path:7"), ("path:6", "tkk:1"), ("path:7", "t4:(1,1),(2,1);0")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    };
    for (a, b) in pairs {
        let g1 = parse_tree_spec(&a).unwrap();
        let g2 = parse_tree_spec(&b).unwrap();
        let d = decide(&g1, &g2).unwrap();
        let verdict = match d.verdict() {
            Verdict::Feasible => "feasible",
            Verdict::Infeasible => "infeasible",
        };
        println!("{a} vs {b}: {verdict}");
        if let Some((system, outcome)) = d.feasible_component() {
            let witness = outcome.witness().unwrap();
            let support = system.support_edges(witness);
            let max = witness.iter().max().unwrap();
            println!(
                "  component {}: {} of {} edges carry positive labels, largest label {max}",
                system.component,
                support.len(),
                system.num_vars() / 4
            );
        }
    }
}
