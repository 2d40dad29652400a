use lkm::algorithms::{run, run_lkm, Algorithm, BRule, RunOptions, RunStatus, StoppingRule};
use lkm::instance::{generate_instance, FunctionSpec, InstanceSpec};
use lkm::objective::ConvexObjective;
use lkm::oracles::{
    diameter, lower_bound_decreases, oracle_full_vertex, oracle_subgradient, repeated_memories,
    weak_duality_violations,
};

fn small_instances() -> impl Iterator<Item = InstanceSpec> {
    (2..=6).flat_map(|n| {
        (0..4u64).flat_map(move |seed| {
            let mut truncated = InstanceSpec::random(n, seed);
            truncated.function = FunctionSpec::CardinalityTruncation { k: n / 2 };
            [InstanceSpec::random(n, seed), truncated]
        })
    })
}

#[test]
fn full_vertex_oracle_matches_lkm() {
    for spec in small_instances() {
        let inst = generate_instance(&spec).unwrap();
        let oracle = oracle_full_vertex(&inst.g, &inst.f).unwrap();
        let res = run_lkm(
            &inst.g,
            &inst.f,
            &StoppingRule::absolute(0.0, 500),
            &RunOptions::default(),
        )
        .unwrap();
        let last = res.trace.last().unwrap();
        let scale = 1.0 + oracle.p_star.abs();
        assert!(
            (last.primal_value - oracle.p_star).abs() <= 1e-6 * scale,
            "n={} seed={}: {} vs {}",
            spec.n,
            spec.seed,
            last.primal_value,
            oracle.p_star
        );
        assert!((&res.x - &oracle.x_star).amax() <= 1e-6 * scale);
        let dual = oracle.dual_value.unwrap();
        assert!((dual - oracle.p_star).abs() <= 1e-8 * scale);
    }
}

#[test]
fn subgradient_oracle_never_beats_the_optimum() {
    for spec in small_instances().step_by(3) {
        let inst = generate_instance(&spec).unwrap();
        let exact = oracle_full_vertex(&inst.g, &inst.f).unwrap();
        let rough = oracle_subgradient(&inst.g, &inst.f, 20_000).unwrap();
        let scale = 1.0 + exact.p_star.abs();
        assert!(rough.p_star >= exact.p_star - 1e-9 * scale);
        assert!(
            rough.p_star <= exact.p_star + 1e-3 * scale,
            "{} vs {}",
            rough.p_star,
            exact.p_star
        );
    }
}

#[test]
fn subgradient_oracle_brackets_lkm_at_scale() {
    let inst = generate_instance(&InstanceSpec::random(100, 3)).unwrap();
    let res = run_lkm(
        &inst.g,
        &inst.f,
        &StoppingRule::absolute(1e-8, 1000),
        &RunOptions::default(),
    )
    .unwrap();
    assert_eq!(res.status, RunStatus::Converged);
    let last = res.trace.last().unwrap();
    let rough = oracle_subgradient(&inst.g, &inst.f, 5_000).unwrap();
    let scale = 1.0 + last.primal_value.abs();
    assert!(rough.p_star >= last.d - 1e-9 * scale);
    assert!((rough.p_star - last.primal_value).abs() <= 1e-2 * scale);
}

/// `p − d ≤ M·sqrt(2(p★ − d)/α)` while `p★ − d ≤ M²/(2α)`, and
/// `p − d ≤ (p★ − d) + M²/(2α)` beyond that.
#[test]
fn gap_is_bounded_by_dual_suboptimality() {
    for spec in small_instances() {
        let inst = generate_instance(&spec).unwrap();
        let p_star = oracle_full_vertex(&inst.g, &inst.f).unwrap().p_star;
        let m = diameter(&inst.f).unwrap();
        let (alpha, _) = inst.g.moduli();
        let res = run_lkm(
            &inst.g,
            &inst.f,
            &StoppingRule::absolute(0.0, 500),
            &RunOptions::default(),
        )
        .unwrap();
        let slack = 1e-9 * (1.0 + p_star.abs());
        for rec in &res.trace.records {
            let sub = (p_star - rec.d).max(0.0);
            let bound = if sub <= m * m / (2.0 * alpha) {
                m * (2.0 * sub / alpha).sqrt()
            } else {
                sub + m * m / (2.0 * alpha)
            };
            assert!(
                rec.gap <= bound * (1.0 + 1e-6) + slack,
                "n={} seed={} iter={}: gap {} > bound {}",
                spec.n,
                spec.seed,
                rec.iter,
                rec.gap,
                bound
            );
        }
    }
}

#[test]
fn exact_runs_terminate_quickly_on_small_integer_polytopes() {
    for spec in small_instances() {
        let inst = generate_instance(&spec).unwrap();
        for algorithm in [
            Algorithm::Lkm,
            Algorithm::Osm,
            Algorithm::Lfcfw(BRule::MinimalSupport),
        ] {
            let res = run(
                algorithm,
                &inst.g,
                &inst.f,
                &StoppingRule::absolute(0.0, 50),
                &RunOptions::default(),
            )
            .unwrap();
            assert!(
                res.final_gap() <= 1e-8,
                "{} n={} seed={}: gap {} after {} iterations",
                algorithm.name(),
                spec.n,
                spec.seed,
                res.final_gap(),
                res.iterations()
            );
        }
    }
}

#[test]
fn validators_accept_clean_runs() {
    for spec in small_instances().step_by(2) {
        let inst = generate_instance(&spec).unwrap();
        let p_star = oracle_full_vertex(&inst.g, &inst.f).unwrap().p_star;
        let res = run_lkm(
            &inst.g,
            &inst.f,
            &StoppingRule::absolute(0.0, 500),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(repeated_memories(&res.trace), 0);
        assert_eq!(lower_bound_decreases(&res.trace, 1e-9), 0);
        assert_eq!(weak_duality_violations(&res.trace, Some(p_star), 1e-9), 0);
    }
}
