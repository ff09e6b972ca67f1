//! Building the linear system of a pair and checking the diagonal solution.

use num_bigint::BigInt;
use raag_comm::system::build_full_system;
use raag_comm::trees::parse_tree_spec;

fn main() {
    let left = parse_tree_spec("path:7").unwrap();
    let right = parse_tree_spec("path:3").unwrap();
    let full = build_full_system(&left, &right).unwrap();
    for s in &full.systems {
        println!(
            "component {}: {} variables, {} equalities, {} strict sums, {} implications",
            s.component,
            s.num_vars(),
            s.equalities.len(),
            s.strict_sums.len(),
            s.implications.len()
        );
    }

    // On a pair (G, G), setting all labels of the diagonal edges to 1 solves
    // the component that contains the diagonal.
    let g = parse_tree_spec("t4:(2,1),(3,1);0").unwrap();
    let full = build_full_system(&g, &g).unwrap();
    let p = &full.product;
    for s in &full.systems {
        let x: Vec<BigInt> = s
            .variables
            .iter()
            .map(|id| {
                let e = p.edge(id.edge);
                let (i, j) = p.vertex(e.source);
                let (k, l) = p.vertex(e.target);
                BigInt::from((i == j && k == l) as u8)
            })
            .collect();
        let report = s.check_assignment(&x).unwrap();
        println!(
            "diagonal assignment on component {}: {}",
            s.component,
            if report.is_ok() { "satisfies the system" } else { "not a solution here" }
        );
    }
    println!("system JSON is {} bytes", full.systems[0].to_json().len());
}
