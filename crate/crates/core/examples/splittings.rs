//! Quotient graphs from the covers, the model graph, and the label check
//! against the linear system.

use raag_comm::splitting::{build_psi_h, build_psi_k, build_x, cross_validate, labelled_iso, Compare};

fn main() {
    for k in 2..=4 {
        let x = build_x(k).unwrap();
        let (_, h) = build_psi_h(k).unwrap();
        let (_, kk) = build_psi_k(k).unwrap();
        println!("k = {k}: {} / {} / {} vertices", x.vertex_count(), h.vertex_count(), kk.vertex_count());
        println!("  rank census {:?}", x.rank_multiset());
        println!(
            "  model ~ H: {}, H ~ K: {}",
            labelled_iso(&x, &h, Compare::Ranks).is_some(),
            labelled_iso(&h, &kk, Compare::Ranks).is_some()
        );
        let cv = cross_validate(k).unwrap();
        println!(
            "  induced labels satisfy the system of component {:?}: {}",
            cv.component,
            cv.passed()
        );
    }
}
