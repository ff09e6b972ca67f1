//! Invariants over random trees, systems and covers.

use num_bigint::BigInt;
use proptest::prelude::*;

use raag_comm::covers::{build_cover_s, build_cover_z, validate_cover_s, validate_cover_z};
use raag_comm::exactlp::{scale_to_integers, Rational};
use raag_comm::product::ProductGraph;
use raag_comm::solver::{decide, prune_fixpoint_by};
use raag_comm::system::{build_full_system, LinearSystem};
use raag_comm::trees::{parse_tree_spec, Tree};

/// Decodes a Prüfer sequence over `seq.len() + 2` vertices.
fn from_prufer(seq: &[usize]) -> Tree {
    let n = seq.len() + 2;
    let mut degree = vec![1; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::new();
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).unwrap();
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    Tree::from_edges(n, &edges).unwrap()
}

fn any_tree(max_vertices: usize) -> impl Strategy<Value = Tree> {
    (3..=max_vertices).prop_flat_map(|n| proptest::collection::vec(0..n, n - 2).prop_map(|seq| from_prufer(&seq)))
}

fn deep_tree(max_vertices: usize) -> impl Strategy<Value = Tree> {
    any_tree(max_vertices).prop_filter("diameter at least 3", |t| t.diameter() >= 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spec_round_trip_is_isomorphic(t in any_tree(12)) {
        let back = parse_tree_spec(&t.to_spec()).unwrap();
        prop_assert!(back.is_isomorphic(&t));
        prop_assert_eq!(back.canonical_form(), t.canonical_form());
    }

    #[test]
    fn reduction_strips_one_layer(t in deep_tree(12)) {
        let r = t.reduce().unwrap();
        prop_assert_eq!(r.tree.diameter() + 2, t.diameter());
        prop_assert!(r.tree.vertex_count() < t.vertex_count());
    }

    #[test]
    fn product_of_trees_has_two_components(a in any_tree(8), b in any_tree(8)) {
        let p = ProductGraph::direct_product(&a, &b);
        prop_assert_eq!(p.vertex_count(), a.vertex_count() * b.vertex_count());
        prop_assert_eq!(p.unoriented_edge_count(), 2 * a.edges().len() * b.edges().len());
        let sizes: Vec<usize> = [1u8, 2].iter().map(|&c| p.component_vertices(c).unwrap().len()).collect();
        prop_assert_eq!(sizes[0] + sizes[1], p.vertex_count());
        for &(u, v) in a.edges() {
            for &(x, y) in b.edges() {
                let e = p.find_edge(p.vertex_id(u, x), p.vertex_id(v, y)).unwrap();
                let inverse = p.edge(e).inverse;
                prop_assert_eq!(p.edge(inverse).target, p.vertex_id(u, x));
            }
        }
    }

    #[test]
    fn system_json_round_trips(a in deep_tree(7), b in deep_tree(7)) {
        let full = build_full_system(&a, &b).unwrap();
        for s in &full.systems {
            let back = LinearSystem::from_json(&s.to_json()).unwrap();
            prop_assert_eq!(&back, s);
        }
    }

    #[test]
    fn scaling_keeps_ratios(nums in proptest::collection::vec((0i64..50, 1i64..20), 1..6)) {
        let x: Vec<Rational> = nums.iter().map(|&(p, q)| Rational::new(p.into(), q.into())).collect();
        let z = scale_to_integers(&x);
        let base = x.iter().position(|v| *v != Rational::from_integer(0.into()));
        if let Some(i) = base {
            for j in 0..x.len() {
                prop_assert_eq!(
                    Rational::from_integer(z[j].clone()) * &x[i],
                    Rational::from_integer(z[i].clone()) * &x[j]
                );
            }
        } else {
            prop_assert!(z.iter().all(|v| *v == BigInt::from(0)));
        }
    }

    #[test]
    fn covers_validate(k in 1usize..=9) {
        let s = build_cover_s(k).unwrap();
        prop_assert!(validate_cover_s(&s, k).is_ok());
        let (z, _) = build_cover_z(k).unwrap();
        prop_assert!(validate_cover_z(&z, k).is_ok());
        prop_assert_eq!(s.vertex_count(), k * (k + 1));
        prop_assert_eq!(z.vertex_count(), k * (k + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_invariants(a in deep_tree(6), b in deep_tree(6), seed in any::<u64>()) {
        let d = decide(&a, &b).unwrap();
        let swapped = decide(&b, &a).unwrap();
        prop_assert_eq!(d.verdict(), swapped.verdict());
        let mut state = seed | 1;
        for (s, base) in d.full.systems.iter().zip(&d.outcomes) {
            if let Some(w) = base.witness() {
                let doubled: Vec<BigInt> = w.iter().map(|x| x * 2).collect();
                prop_assert!(s.check_assignment(&doubled).unwrap().is_ok());
            }
            // Prune a pseudo-random nonempty subset each round.
            let other = prune_fixpoint_by(s, |violated| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let mut pick: Vec<usize> = violated
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (state >> (i % 64)) & 1 == 1)
                    .map(|(_, &t)| t)
                    .collect();
                if pick.is_empty() {
                    pick.push(violated[(state as usize) % violated.len()]);
                }
                pick
            })
            .unwrap();
            prop_assert_eq!(&other.support, &base.support);
        }
    }

    #[test]
    fn diagonal_is_feasible(t in deep_tree(7)) {
        prop_assert!(decide(&t, &t).unwrap().feasible_component().is_some());
    }
}
