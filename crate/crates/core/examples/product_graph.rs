//! The direct product of two reduced trees and its two components.
//!
//! Pass `--dot` to print the product in Graphviz format.

use raag_comm::product::ProductGraph;
use raag_comm::trees::Tree;

fn main() {
    let left = Tree::path(5);
    let right = Tree::tkk(2).unwrap();
    let p = ProductGraph::of_reductions(&left, &right).unwrap();
    println!(
        "{} vertices, {} unoriented edges",
        p.vertex_count(),
        p.unoriented_edge_count()
    );
    for c in [1, 2] {
        let vertices = p.component_vertices(c).unwrap();
        let labels: Vec<String> = vertices.iter().map(|&v| p.vertex_label(v)).collect();
        println!("component {c}: {}", labels.join(" "));
    }
    if std::env::args().any(|a| a == "--dot") {
        print!("{}", p.to_dot());
    }
}
