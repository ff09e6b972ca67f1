//! The two explicit covers for a given k, validated, with their parameters.
//!
//! Usage: `cargo run --example covers -- 4`

use raag_comm::covers::{build_cover_s, build_cover_z, validate_cover_s, validate_cover_z};

fn main() {
    let k: usize = std::env::args().nth(1).map_or(3, |a| a.parse().expect("k"));
    let s = build_cover_s(k).unwrap();
    println!("S: {} vertices, valid = {}", s.vertex_count(), validate_cover_s(&s, k).is_ok());
    for (x, letter) in s.alphabet().iter().enumerate() {
        println!("  {letter}: {:?}", s.census(x));
    }
    let (z, ab) = build_cover_z(k).unwrap();
    println!("Z: {} vertices, valid = {}", z.vertex_count(), validate_cover_z(&z, k).is_ok());
    for (x, letter) in z.alphabet().iter().enumerate() {
        println!("  {letter}: {:?}", z.census(x));
    }
    for (i, list) in &ab.alpha {
        println!("  alpha_{i} = {list:?}, beta_{i} = {:?}", ab.beta[i]);
    }
}
