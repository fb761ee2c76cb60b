// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

mod common;

use common::floyd_warshall;
use egoclose::eval::{f_measure, pearson, precision_recall};
use egoclose::graph::{
    bfs_distances, closeness_exact, cycle_graph, gen_ba, gen_er, gen_ws,
    largest_connected_component, Graph,
};
use egoclose::measure::{build_matrix, build_matrix_rw, build_matrix_topcent, verify_feasibility};
use egoclose::metrics::{ego_closeness, ego_rings};
use egoclose::recovery::top_k;
use egoclose::NodeScores;
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..3 * n)
            .prop_map(move |edges| Graph::from_edges(n, edges).unwrap())
    })
}

fn arb_connected(max_n: usize) -> impl Strategy<Value = Graph> {
    arb_graph(max_n).prop_map(|g| largest_connected_component(&g))
}

fn arb_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn triangle_inequality(g in arb_graph(30), picks in prop::collection::vec(any::<prop::sample::Index>(), 3)) {
        let n = g.node_count();
        let [a, b, c] = [picks[0].index(n), picks[1].index(n), picks[2].index(n)];
        let (da, db) = (bfs_distances(&g, a).unwrap(), bfs_distances(&g, b).unwrap());
        if let (Some(ab), Some(bc)) = (da[b], db[c]) {
            prop_assert!(da[c].unwrap() <= ab + bc);
        }
    }

    #[test]
    fn closeness_in_unit_interval(g in arb_connected(30)) {
        prop_assume!(g.node_count() >= 2);
        let n = g.node_count();
        let c = closeness_exact(&g).unwrap();
        for u in 0..n {
            prop_assert!(c[u] > 0.0 && c[u] <= 1.0);
            prop_assert_eq!(c[u] == 1.0, g.degree(u) == n - 1);
        }
    }

    #[test]
    fn lcc_is_idempotent(g in arb_graph(30)) {
        let once = largest_connected_component(&g);
        prop_assert_eq!(largest_connected_component(&once), once);
    }

    #[test]
    fn ego_radius_one_is_degree(g in arb_graph(40)) {
        let ego = ego_closeness(&g, 1).unwrap();
        for u in 0..g.node_count() {
            prop_assert_eq!(ego[u], g.degree(u) as f64);
        }
    }

    #[test]
    fn ego_is_monotone_in_radius(g in arb_graph(30), h in 1u32..6) {
        let lo = ego_closeness(&g, h).unwrap();
        let hi = ego_closeness(&g, h + 1).unwrap();
        for u in 0..g.node_count() {
            prop_assert!(hi[u] >= lo[u]);
        }
    }

    #[test]
    fn rings_cover_graph_beyond_diameter(g in arb_connected(25)) {
        let n = g.node_count();
        let dist = floyd_warshall(&g);
        let diameter = dist.iter().flatten().copied().max().unwrap().max(1);
        for h in [diameter, diameter + 2] {
            for v in 0..n {
                let rings = ego_rings(&g, v, h).unwrap();
                prop_assert_eq!(rings.reached(), n - 1);
            }
        }
        for v in 0..n {
            prop_assert!(ego_rings(&g, v, 1.max(diameter / 2)).unwrap().reached() < n);
        }
    }

    #[test]
    fn walk_rows_are_feasible_and_consistent(g in arb_connected(40), seed in any::<u64>(), l in 0usize..12) {
        let signal = ego_closeness(&g, 2).unwrap();
        for ms in [
            build_matrix(&g, &signal, 6, l, seed).unwrap(),
            build_matrix_rw(&g, &signal, 6, l, seed).unwrap(),
            build_matrix_topcent(&g, &signal, 6, l, seed).unwrap(),
        ] {
            prop_assert_eq!(verify_feasibility(&g, &ms).fraction, 1.0);
            for (row, &y) in ms.rows.iter().zip(&ms.y) {
                let sum: f64 = row.iter().map(|&u| signal[u]).sum();
                prop_assert!((sum - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
        let ms = build_matrix(&g, &signal, 6, l, seed).unwrap();
        for row in &ms.rows {
            prop_assert_eq!(row.len(), (l + 1).min(g.node_count()));
        }
    }

    #[test]
    fn pearson_symmetric_and_affine_invariant(
        (x, y) in (3usize..40).prop_flat_map(|n| (arb_vector(n), arb_vector(n))),
        a in 0.01..100.0f64,
        b in -1e3..1e3f64,
    ) {
        let Ok(r) = pearson(&x, &y) else { return Ok(()); };
        prop_assert!((r - pearson(&y, &x).unwrap()).abs() <= 1e-14);
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let ay: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        prop_assert!((r - pearson(&ax, &y).unwrap()).abs() <= 1e-12);
        prop_assert!((r - pearson(&x, &ay).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn f_measure_bounds(p in 0.0..=1.0f64, r in 0.0..=1.0f64) {
        let f = f_measure(p, r);
        prop_assert!(f <= p.max(r) + 1e-15);
        prop_assert!(f <= 2.0 * p.min(r) + 1e-15);
        prop_assert!(f >= p.min(r) - 1e-15);
    }

    #[test]
    fn equal_sized_sets_give_equal_scores(scores in prop::collection::vec(0u8..5, 10..40), k in 1usize..10, shift in 0usize..10) {
        let a: Vec<f64> = scores.iter().map(|&s| f64::from(s)).collect();
        let b: Vec<f64> = a.iter().cycle().skip(shift).take(a.len()).copied().collect();
        let (p, r) = precision_recall(&top_k(&a, k).unwrap().nodes(), &top_k(&b, k).unwrap().nodes()).unwrap();
        prop_assert_eq!(p, r);
        prop_assert_eq!(f_measure(p, r), p);
    }

    #[test]
    fn top_k_agrees_with_sort(v in prop::collection::vec(0u8..8, 1..60), k in any::<prop::sample::Index>()) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let k = 1 + k.index(v.len());
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        prop_assert_eq!(top_k(&v, k).unwrap().nodes(), order[..k].to_vec());
    }

    #[test]
    fn generators_are_deterministic(n in 10usize..80, seed in any::<u64>()) {
        let edges = |g: Graph| g.edges().collect::<Vec<_>>();
        prop_assert_eq!(edges(gen_ba(n, 3, seed).unwrap()), edges(gen_ba(n, 3, seed).unwrap()));
        prop_assert_eq!(edges(gen_er(n, 0.1, seed).unwrap()), edges(gen_er(n, 0.1, seed).unwrap()));
        prop_assert_eq!(edges(gen_ws(n, 4, 0.3, seed).unwrap()), edges(gen_ws(n, 4, 0.3, seed).unwrap()));
    }

    #[test]
    fn watts_strogatz_conserves_edges(n in 10usize..100, half in 1usize..4, p in 0.0..=1.0f64, seed in any::<u64>()) {
        let g = gen_ws(n, 2 * half, p, seed).unwrap();
        prop_assert_eq!(g.edge_count(), n * half);
    }
}

#[test]
fn vertex_transitive_graphs_score_uniformly() {
    let c = cycle_graph(11);
    for h in 1..6 {
        let ego: NodeScores = ego_closeness(&c, h).unwrap();
        assert!(ego.as_slice().iter().all(|&x| x == ego[0]));
    }
}
