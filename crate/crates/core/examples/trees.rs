//! Parsing tree specs and looking at their reductions.

use raag_comm::trees::parse_tree_spec;

fn main() {
    for spec in ["path:6", "tkk:2", "t4:(1,1),(2,1);0", "t4:(3,2);1", "adj:0 1 1 2 1 3 3 4"] {
        let tree = parse_tree_spec(spec).expect("valid spec");
        let reduced = tree.reduce().expect("nontrivial tree");
        println!(
            "{spec:<22} {} vertices, diameter {}, {} leaves, reduced to {} vertices",
            tree.vertex_count(),
            tree.diameter(),
            tree.leaves().len(),
            reduced.tree.vertex_count()
        );
        if let Ok(code) = tree.diam4_code() {
            println!("{:<22} diameter-4 code {code}", "");
        }
    }
    let a = parse_tree_spec("tkk:1").unwrap();
    let b = parse_tree_spec("t4:(1,1),(2,1);0").unwrap();
    println!("tkk:1 isomorphic to t4:(1,1),(2,1);0: {}", a.is_isomorphic(&b));
}
