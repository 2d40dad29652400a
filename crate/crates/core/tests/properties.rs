use nalgebra::DMatrix;
use proptest::prelude::*;

use lkm::algorithms::{
    primal_from_dual_bound_check, run, run_lkm, Algorithm, BRule, RunOptions, StoppingRule,
};
use lkm::objective::{ConvexObjective, QuadraticObjective};
use lkm::oracles::{lower_bound_decreases, repeated_memories, weak_duality_violations};
use lkm::submodular::{SubmodularFunction, TieRule};
use lkm::subproblem::{
    caratheodory_prune, check_affine_independence, extract_active_set, extract_support,
    solve_subproblem, SimplexWeights, SubproblemOptions,
};
use lkm::vertex::{Vector, VertexSet};

fn vector(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(lo..hi, n).prop_map(Vector::from_vec)
}

/// `P = AᵀA + δI` with `δ ∈ [0.1, 2]`.
fn quadratic(n: usize) -> impl Strategy<Value = QuadraticObjective> {
    (
        prop::collection::vec(-1.0..1.0f64, n * n),
        0.1..2.0f64,
        vector(n, -3.0, 3.0),
    )
        .prop_map(move |(a, shift, b)| {
            let a = DMatrix::from_row_slice(n, n, &a);
            let p = a.transpose() * &a + DMatrix::identity(n, n) * shift;
            QuadraticObjective::new(p, b).unwrap()
        })
}

fn family(n: usize) -> impl Strategy<Value = SubmodularFunction> {
    prop_oneof![
        Just(SubmodularFunction::permutahedron(n).unwrap()),
        (1..=n).prop_map(move |k| SubmodularFunction::cardinality_truncation(n, k).unwrap()),
        prop::collection::vec(-2.0..2.0f64, n)
            .prop_map(|h| SubmodularFunction::maximal_element(h).unwrap()),
        prop::collection::vec(0.0..3.0f64, n).prop_map(move |c| {
            let table = (0..1usize << n)
                .map(|m| {
                    (0..n)
                        .filter(|e| m >> e & 1 == 1)
                        .map(|e| c[e])
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            SubmodularFunction::explicit_table(n, table).unwrap()
        }),
    ]
}

fn sized_case() -> impl Strategy<Value = (SubmodularFunction, Vector)> {
    (1usize..=6).prop_flat_map(|n| (family(n), vector(n, -4.0, 4.0)))
}

/// Coordinates from a tiny grid so ties are common.
fn tied_case() -> impl Strategy<Value = (SubmodularFunction, Vector)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            family(n),
            prop::collection::vec(-2i32..=2, n)
                .prop_map(|v| Vector::from_iterator(v.len(), v.into_iter().map(f64::from))),
        )
    })
}

proptest! {
    #[test]
    fn greedy_matches_enumerated_maximum((f, x) in sized_case()) {
        let best = f.enumerate_vertices().unwrap().iter().map(|v| v.dot(&x)).fold(f64::NEG_INFINITY, f64::max);
        for tie in [TieRule::AscendingIndex, TieRule::DescendingIndex] {
            prop_assert!((f.greedy_vertex(&x, tie).unwrap().value - best).abs() <= 1e-12);
        }
    }

    #[test]
    fn tied_points_give_equal_values((f, x) in tied_case()) {
        let a = f.greedy_vertex(&x, TieRule::AscendingIndex).unwrap();
        let b = f.greedy_vertex(&x, TieRule::DescendingIndex).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * (1.0 + a.value.abs()));
    }

    #[test]
    fn greedy_vertex_lies_in_base_polytope((f, x) in sized_case()) {
        let res = f.greedy_vertex(&x, TieRule::AscendingIndex).unwrap();
        prop_assert!(f.check_membership(&res.vertex, 1e-9).unwrap());
        let total: f64 = res.vertex.iter().sum();
        prop_assert!((total - f.eval_set(&(0..f.n()).collect::<Vec<_>>()).unwrap()).abs() <= 1e-12);
        let mut prefix = Vec::new();
        let mut previous = 0.0;
        for &e in &res.permutation {
            prefix.push(e);
            let value = f.eval_set(&prefix).unwrap();
            prop_assert!((res.vertex[e] - (value - previous)).abs() <= 1e-12);
            previous = value;
        }
    }

    #[test]
    fn lovasz_extension_is_positively_homogeneous((f, x) in sized_case(), c in 0.0..10.0f64) {
        let base = f.lovasz_value(&x).unwrap();
        let scaled = f.lovasz_value(&(&x * c)).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-12 * (1.0 + (c * base).abs()));
    }

    #[test]
    fn lovasz_extension_agrees_on_indicators(f in (1usize..=6).prop_flat_map(family), mask in any::<u16>()) {
        let n = f.n();
        let set: Vec<usize> = (0..n).filter(|e| mask >> e & 1 == 1).collect();
        let x = Vector::from_iterator(n, (0..n).map(|e| if set.contains(&e) { 1.0 } else { 0.0 }));
        let (lhs, rhs) = (f.lovasz_value(&x).unwrap(), f.eval_set(&set).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn families_are_submodular(f in (1usize..=6).prop_flat_map(family)) {
        prop_assert!(f.check_submodular().unwrap());
    }
}

proptest! {
    #[test]
    fn fenchel_young_and_inverse_maps(
        (g, x, y) in (1usize..=8).prop_flat_map(|n| (quadratic(n), vector(n, -3.0, 3.0), vector(n, -3.0, 3.0)))
    ) {
        let w = g.gradient(&x);
        let wx = w.dot(&x);
        prop_assert!((g.value(&x) + g.conjugate_value(&w) - wx).abs() <= 1e-10 * (1.0 + wx.abs()));
        prop_assert!((g.conjugate_gradient(&w) - &x).amax() <= 1e-8);
        prop_assert!((g.gradient(&g.conjugate_gradient(&y)) - &y).amax() <= 1e-8);
    }

    #[test]
    fn gradient_matches_central_differences(
        (g, x) in (1usize..=8).prop_flat_map(|n| (quadratic(n), vector(n, -3.0, 3.0)))
    ) {
        let h = 1e-5;
        let grad = g.gradient(&x);
        let n = x.len();
        let fd = Vector::from_iterator(n, (0..n).map(|i| {
            let mut e = Vector::zeros(n);
            e[i] = h;
            (g.value(&(&x + &e)) - g.value(&(&x - &e))) / (2.0 * h)
        }));
        prop_assert!((&fd - &grad).norm() <= 1e-6 * (1.0 + grad.norm()));
    }

    #[test]
    fn conjugate_gradient_is_lipschitz(
        (g, a, b) in (1usize..=8).prop_flat_map(|n| (quadratic(n), vector(n, -3.0, 3.0), vector(n, -3.0, 3.0)))
    ) {
        let (alpha, beta) = g.moduli();
        prop_assert!(0.0 < alpha && alpha <= beta);
        let lhs = (g.conjugate_gradient(&a) - g.conjugate_gradient(&b)).norm();
        prop_assert!(lhs <= (&a - &b).norm() / alpha * (1.0 + 1e-9));
    }

    #[test]
    fn primal_error_bounded_by_dual_error(
        (g, f, xs) in (2usize..=5).prop_flat_map(|n| (
            quadratic(n),
            family(n),
            prop::collection::vec(vector(n, -1.0, 1.0), 2),
        ))
    ) {
        let a = f.greedy_vertex(&xs[0], TieRule::AscendingIndex).unwrap().vertex;
        let b = f.greedy_vertex(&xs[1], TieRule::AscendingIndex).unwrap().vertex;
        let mid = (&a + &b) * 0.5;
        let (lhs, rhs) = primal_from_dual_bound_check(&g, &f, &mid, &b).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9));
    }
}

fn random_vertices(f: &SubmodularFunction, points: &[Vector]) -> VertexSet {
    let mut set = VertexSet::new(vec![
        f.greedy_vertex(&points[0], TieRule::AscendingIndex)
            .unwrap()
            .vertex,
    ])
    .unwrap();
    for x in &points[1..] {
        set.insert(
            f.greedy_vertex(x, TieRule::AscendingIndex).unwrap().vertex,
            0,
        );
    }
    set
}

fn subproblem_case() -> impl Strategy<Value = (QuadraticObjective, VertexSet)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            quadratic(n),
            Just(SubmodularFunction::permutahedron(n).unwrap()),
            prop::collection::vec(vector(n, -1.0, 1.0), 1..12),
        )
            .prop_map(|(g, f, pts)| {
                let set = random_vertices(&f, &pts);
                (g, set)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn subproblem_strong_duality_and_slackness((g, set) in subproblem_case()) {
        let sol = solve_subproblem(&set, &g, &SubproblemOptions::default(), None).unwrap();
        let dual = sol.dual_value;
        prop_assert!((sol.primal_value(&g) - dual).abs() <= 1e-8 * (1.0 + dual.abs()));
        prop_assert!((sol.lambda.combine(&set) - &sol.w).amax() <= 1e-9);
        let fy = g.value(&sol.x) + sol.w.dot(&sol.x);
        prop_assert!((fy - dual).abs() <= 1e-9 * (1.0 + dual.abs()));
        let support = extract_support(&set, &sol.lambda, 1e-12);
        let active = extract_active_set(&set, &sol.x, sol.t, 1e-9);
        for v in support.iter() {
            prop_assert!(active.contains(v));
        }
        let scale = 1.0 + set.iter().map(|v| v.dot(&sol.x).abs()).fold(0.0, f64::max);
        for v in set.iter() {
            prop_assert!((v - &sol.w).dot(&sol.x) <= 1e-10 * scale);
        }
    }

    #[test]
    fn subproblem_solution_ignores_vertex_order((g, set) in subproblem_case()) {
        let forward = solve_subproblem(&set, &g, &SubproblemOptions::default(), None).unwrap();
        let order: Vec<usize> = (0..set.len()).rev().collect();
        let reversed = solve_subproblem(&set.select(&order), &g, &SubproblemOptions::default(), None).unwrap();
        prop_assert!((&forward.x - &reversed.x).amax() <= 1e-8);
    }

    #[test]
    fn caratheodory_keeps_point_and_bounds_size(
        (set, raw) in (2usize..=5).prop_flat_map(|n| {
            let f = SubmodularFunction::permutahedron(n).unwrap();
            prop::collection::vec(vector(n, -1.0, 1.0), 2..14).prop_flat_map(move |pts| {
                let set = random_vertices(&f, &pts);
                let m = set.len();
                (Just(set), prop::collection::vec(0.01..1.0f64, m))
            })
        })
    ) {
        let total: f64 = raw.iter().sum();
        let lambda = SimplexWeights::new(raw.iter().map(|l| l / total).collect()).unwrap();
        let w = lambda.combine(&set);
        let (pruned, weights) = caratheodory_prune(&set, &lambda, &w).unwrap();
        prop_assert!(pruned.len() <= set.dim() + 1);
        prop_assert!(check_affine_independence(&pruned));
        prop_assert!((weights.combine(&pruned) - &w).amax() <= 1e-9);
        prop_assert!(weights.as_slice().iter().all(|&l| l >= 0.0));
    }
}

fn run_case() -> impl Strategy<Value = (QuadraticObjective, SubmodularFunction)> {
    (2usize..=7).prop_flat_map(|n| (quadratic(n), family(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kelley_memory_stays_small_and_independent((g, f) in run_case()) {
        let n = f.n();
        let res = run_lkm(&g, &f, &StoppingRule::absolute(1e-10, 300), &RunOptions::default()).unwrap();
        for k in 0..res.trace.len() {
            prop_assert!(res.trace.records[k].memory_size <= n + 1);
            prop_assert!(check_affine_independence(&res.trace.memory_set(k)));
        }
    }

    #[test]
    fn bounds_are_monotone_and_ordered((g, f) in run_case()) {
        for algo in [Algorithm::Lkm, Algorithm::Osm, Algorithm::Lfcfw(BRule::MinimalSupport), Algorithm::Lfcfw(BRule::FullMemory)] {
            let res = run(algo, &g, &f, &StoppingRule::absolute(1e-10, 300), &RunOptions::default()).unwrap();
            prop_assert_eq!(lower_bound_decreases(&res.trace, 1e-12), 0);
            prop_assert_eq!(weak_duality_violations(&res.trace, None, 1e-9), 0);
            prop_assert_eq!(repeated_memories(&res.trace), 0);
        }
    }

    #[test]
    fn minimal_support_memory_bound((g, f) in run_case()) {
        let n = f.n();
        let res = run(Algorithm::Lfcfw(BRule::MinimalSupport), &g, &f, &StoppingRule::absolute(1e-10, 300), &RunOptions::default()).unwrap();
        for r in &res.trace.records {
            prop_assert!(r.memory_size <= n + 2);
            prop_assert!(r.active_size <= n + 1);
            prop_assert!(r.away_gap <= 1e-8 * (1.0 + r.t.abs()));
            prop_assert!(r.support_in_active);
        }
    }

    #[test]
    fn converged_means_small_gap((g, f) in run_case()) {
        let stop = StoppingRule::absolute(1e-6, 300);
        let res = run_lkm(&g, &f, &stop, &RunOptions::default()).unwrap();
        if res.status == lkm::algorithms::RunStatus::Converged {
            // Allowance for the solver's own residual.
            let last = res.trace.last().unwrap();
            let reach = res.memory.iter().map(|v| v.norm()).fold(0.0, f64::max) * last.x.norm();
            prop_assert!(res.final_gap() <= 1e-6 + 1e-10 * (1.0 + reach));
        }
    }
}
