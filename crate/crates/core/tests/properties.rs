use std::collections::HashSet;

use fracgraph::calculus::{
    hs_norm, ibp_residual, lambda1, lp_norm, sobolev_norm_s2, sup_norm, PotentialH,
};
use fracgraph::graph::{
    ball, build_graph, generate_standard, graph_from_json, graph_to_json, load_graph, save_graph,
    GeneratorParams, GraphKind, WeightedGraph,
};
use fracgraph::kernel::{frac_laplacian_apply, ws_spectral};
use fracgraph::schrodinger::{
    energy, energy_gradient, nehari_project, paper_example, power_nonlinearity, Branch,
};
use fracgraph::spectral::{eigendecompose, mu_laplacian, semigroup_apply};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct RandomGraph {
    measures: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
}

impl RandomGraph {
    fn build(&self) -> WeightedGraph {
        build_graph(
            self.measures.iter().enumerate().map(|(i, m)| (format!("v{i}"), *m)),
            self.edges
                .iter()
                .map(|&(u, v, w)| (format!("v{u}"), format!("v{v}"), w)),
        )
        .unwrap()
    }
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect()
}

/// Arbitrary edge subsets, not necessarily connected.
fn any_graph() -> impl Strategy<Value = RandomGraph> {
    (2usize..8).prop_flat_map(|n| {
        let pairs = all_pairs(n);
        let m = pairs.len();
        (
            prop::collection::vec(0.2f64..3.0, n),
            prop::collection::vec(prop::option::weighted(0.4, 0.1f64..3.0), m),
        )
            .prop_map(move |(measures, mask)| RandomGraph {
                measures,
                edges: pairs
                    .iter()
                    .zip(mask)
                    .filter_map(|(&(u, v), w)| w.map(|w| (u, v, w)))
                    .collect(),
            })
    })
}

/// A weighted path backbone plus random chords.
fn connected_graph() -> impl Strategy<Value = RandomGraph> {
    (2usize..7).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = all_pairs(n).into_iter().filter(|(u, v)| v - u > 1).collect();
        let m = pairs.len();
        (
            prop::collection::vec(0.3f64..3.0, n),
            prop::collection::vec(0.2f64..3.0, n - 1),
            prop::collection::vec(prop::option::weighted(0.3, 0.2f64..3.0), m),
        )
            .prop_map(move |(measures, backbone, chords)| {
                let mut edges: Vec<_> = backbone.iter().enumerate().map(|(i, &w)| (i, i + 1, w)).collect();
                edges.extend(
                    pairs
                        .iter()
                        .zip(chords)
                        .filter_map(|(&(u, v), w)| w.map(|w| (u, v, w))),
                );
                RandomGraph { measures, edges }
            })
    })
}

fn connected_by_union_find(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for &(u, v, _) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    (0..n).all(|x| find(&mut parent, x) == root)
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weights_are_symmetric(rg in any_graph()) {
        let g = rg.build();
        for x in 0..g.len() {
            for y in 0..g.len() {
                prop_assert_eq!(g.weight(x, y), g.weight(y, x));
            }
        }
    }

    #[test]
    fn connectivity_matches_union_find(rg in any_graph()) {
        let g = rg.build();
        prop_assert_eq!(g.is_connected(), connected_by_union_find(rg.measures.len(), &rg.edges));
    }

    #[test]
    fn balls_are_nested(r in 0usize..4, i in -2i64..=2, j in -2i64..=2) {
        prop_assume!(i.abs() + j.abs() <= 2);
        let g = generate_standard(GraphKind::LatticeBallZ2, &GeneratorParams::with_radius(4)).unwrap();
        let center = format!("{i},{j}");
        let inner: HashSet<String> = ball(&g, &center, r).unwrap().ids().iter().cloned().collect();
        let outer: HashSet<String> = ball(&g, &center, r + 1).unwrap().ids().iter().cloned().collect();
        prop_assert!(inner.is_subset(&outer));
        prop_assert!(inner.len() < outer.len());
    }

    #[test]
    fn save_then_load_is_identity(rg in any_graph()) {
        let g = rg.build();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        save_graph(&g, &path).unwrap();
        prop_assert_eq!(&load_graph(&path).unwrap(), &g);
        prop_assert_eq!(&graph_from_json(&graph_to_json(&g)).unwrap(), &g);
    }

    #[test]
    fn laplacian_annihilates_constants(rg in connected_graph()) {
        let g = rg.build();
        let l = mu_laplacian(&g).unwrap();
        for x in 0..g.len() {
            prop_assert!(l.row(x).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_property(rg in connected_graph(), t in 0.0f64..3.0, s in 0.0f64..3.0) {
        let g = rg.build();
        let sp = eigendecompose(&g).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|x| (x as f64 * 0.7).sin()).collect();
        let two_steps = semigroup_apply(&sp, t, &semigroup_apply(&sp, s, &u).unwrap()).unwrap();
        let one_step = semigroup_apply(&sp, t + s, &u).unwrap();
        for (a, b) in two_steps.iter().zip(&one_step) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!(sp.reconstruction_defect().unwrap() < 1e-11);
    }

    #[test]
    fn kernel_structure(rg in connected_graph(), s in 0.05f64..0.95) {
        let g = rg.build();
        let k = ws_spectral(&eigendecompose(&g).unwrap(), s).unwrap();
        for x in 0..g.len() {
            prop_assert_eq!(k.get(x, x), 0.0);
            for y in 0..g.len() {
                prop_assert_eq!(k.get(x, y), k.get(y, x));
                if x != y {
                    prop_assert!(k.get(x, y) > 0.0);
                }
            }
        }
    }

    #[test]
    fn calculus_inequalities(rg in connected_graph(), s in 0.05f64..0.95, seed in any::<u64>()) {
        let g = rg.build();
        let n = g.len();
        let k = ws_spectral(&eigendecompose(&g).unwrap(), s).unwrap();
        let u: Vec<f64> = (0..n).map(|x| ((seed as f64) * 1e-3 + x as f64 * 1.3).cos()).collect();
        let phi: Vec<f64> = (0..n).map(|x| ((seed as f64) * 7e-4 + x as f64 * 0.4).sin()).collect();
        let lap = frac_laplacian_apply(&k, &u).unwrap();
        let pairing: f64 = lap.iter().zip(&u).zip(g.measure()).map(|((a, b), m)| a * b * m).sum();
        prop_assert!(pairing >= -1e-12);
        prop_assert!(ibp_residual(&k, &u, &phi).unwrap() < 1e-11);

        let h = PotentialH::new((0..n).map(|x| 0.5 + x as f64).collect()).unwrap();
        let l1 = lambda1(&k, &h).unwrap().value;
        prop_assert!(l1 >= h.h0() - 1e-12);
        let l2 = lp_norm(g.measure(), &u, 2.0);
        prop_assert!(hs_norm(&k, &h, &u).unwrap() >= l1.sqrt() * l2 * (1.0 - 1e-12));

        let w = sobolev_norm_s2(&k, &u).unwrap();
        let mu0 = g.min_measure();
        prop_assert!(sup_norm(&u).powi(2) <= w * w / mu0 * (1.0 + 1e-12));
    }

    #[test]
    fn gradient_matches_differences(rg in connected_graph(), seed in 0u64..1000) {
        let g = rg.build();
        let n = g.len();
        let k = ws_spectral(&eigendecompose(&g).unwrap(), 0.5).unwrap();
        let h = PotentialH::constant(n, 1.0).unwrap();
        let nl = paper_example();
        let u: Vec<f64> = (0..n).map(|x| ((seed + x as u64) as f64 * 0.91).sin()).collect();
        let phi: Vec<f64> = (0..n).map(|x| ((seed * 3 + x as u64) as f64 * 0.37).cos()).collect();
        for branch in Branch::BOTH {
            let eps = 1e-5;
            let plus: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a + eps * b).collect();
            let minus: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a - eps * b).collect();
            let fd = (energy(&k, &h, &nl, &plus, branch).unwrap() - energy(&k, &h, &nl, &minus, branch).unwrap()) / (2.0 * eps);
            let grad = energy_gradient(&k, &h, &nl, &u, branch).unwrap();
            let an: f64 = grad.iter().zip(&phi).zip(g.measure()).map(|((a, b), m)| a * b * m).sum();
            prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0));
        }
    }

    #[test]
    fn nehari_ray_invariance(u in vector(4), c in 0.01f64..100.0) {
        prop_assume!(u.iter().any(|v| *v > 1e-3));
        let g = generate_standard(GraphKind::Cycle, &GeneratorParams::with_n(4)).unwrap();
        let k = ws_spectral(&eigendecompose(&g).unwrap(), 0.5).unwrap();
        let h = PotentialH::constant(4, 1.0).unwrap();
        let nl = power_nonlinearity(3.0).unwrap();
        let p = nehari_project(&k, &h, &nl, &u, Branch::Positive).unwrap();
        let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
        let q = nehari_project(&k, &h, &nl, &cu, Branch::Positive).unwrap();
        prop_assert!((q.t0 * c / p.t0 - 1.0).abs() < 1e-9);
    }
}
