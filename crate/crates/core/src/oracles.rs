//! Slow, independent ground truth for tests and acceptance runs.
//!
//! Nothing here shares numerics with the production solvers: the full-vertex
//! oracle runs accelerated projected gradient over every vertex of `B(F)`,
//! and the subgradient oracle never forms a cutting-plane model at all.

use std::collections::HashSet;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::algorithms::IterationTrace;
use crate::error::{Error, Result};
use crate::objective::{ConvexObjective, QuadraticObjective};
use crate::submodular::{SubmodularFunction, TieRule};
use crate::vertex::{Vector, VertexKey};

/// Largest ground set [`oracle_full_vertex`] accepts.
pub const FULL_VERTEX_MAX_N: usize = 6;
/// Largest ground set [`diameter`] accepts.
pub const DIAMETER_MAX_N: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    FullVertexQp,
    SubgradientDescent,
}

#[derive(Clone, Debug)]
pub struct OracleSolution {
    /// `g(x★) + f(x★)`.
    pub p_star: f64,
    pub x_star: Vector,
    pub w_star: Vector,
    /// `−g*(−w★)`, when `w★` is known to lie in `B(F)`.
    pub dual_value: Option<f64>,
    pub method: OracleMethod,
    pub iterations: usize,
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            shift = candidate;
        }
    }
    y.iter().map(|&v| (v - shift).max(0.0)).collect()
}

fn enumerated_max(vertices: &[Vector], x: &Vector) -> f64 {
    vertices
        .iter()
        .map(|v| v.dot(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Solves the dual over every vertex of `B(F)` by accelerated projected
/// gradient on the simplex of vertex weights.
///
/// Runs at most `10⁵` iterations and stops early once the Frank-Wolfe gap
/// over all vertices is at rounding level.
pub fn oracle_full_vertex(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
) -> Result<OracleSolution> {
    const MAX_ITERATIONS: usize = 100_000;
    let n = f.n();
    if n > FULL_VERTEX_MAX_N {
        return Err(Error::TooLarge {
            what: "full-vertex oracle",
            n,
            limit: FULL_VERTEX_MAX_N,
        });
    }
    if g.dim() != n {
        return Err(Error::invalid(
            "objective and set function dimensions differ",
        ));
    }
    let vertices = f.enumerate_vertices()?;
    let m = vertices.len();
    let w_mat = DMatrix::from_columns(&vertices);
    let (alpha, _) = g.moduli();
    // φ(λ) = g*(−Wλ) has gradient −Wᵀ∇g*(−Wλ), Lipschitz with σ_max(W)²/α.
    let sigma2 = SymmetricEigen::new(&w_mat * w_mat.transpose())
        .eigenvalues
        .max()
        .max(f64::MIN_POSITIVE);
    let step = alpha / sigma2;

    let objective = |lambda: &[f64]| -> (Vector, Vector, f64) {
        let w = &w_mat * Vector::from_column_slice(lambda);
        let neg = -&w;
        let x = g.conjugate_gradient(&neg);
        let value = g.conjugate_value(&neg);
        (w, x, value)
    };

    let mut lambda = vec![1.0 / m as f64; m];
    let mut y = lambda.clone();
    let mut momentum = 1.0f64;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (_, x_y, _) = objective(&y);
        // ∇φ(y) = −Wᵀx(y).
        let grad = w_mat.tr_mul(&x_y);
        let trial: Vec<f64> = y
            .iter()
            .zip(grad.iter())
            .map(|(&yi, &gi)| yi + step * gi)
            .collect();
        let next = project_simplex(&trial);
        // Gradient restart: drop momentum once it points uphill.
        let uphill: f64 = y
            .iter()
            .zip(next.iter())
            .zip(lambda.iter())
            .map(|((&yi, &ni), &li)| (yi - ni) * (ni - li))
            .sum();
        if uphill > 0.0 {
            momentum = 1.0;
        }
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        y = next
            .iter()
            .zip(lambda.iter())
            .map(|(&a, &b)| a + beta * (a - b))
            .collect();
        momentum = next_momentum;
        lambda = next;
        if iterations % 25 == 0 {
            let (w, x, _) = objective(&lambda);
            let best = enumerated_max(&vertices, &x);
            let scale = 1.0 + vertices.iter().map(|v| v.dot(&x).abs()).fold(0.0, f64::max);
            if best - w.dot(&x) <= 1e-14 * scale {
                break;
            }
        }
    }
    let (w_star, x_star, conj) = objective(&lambda);
    let p_star = g.value(&x_star) + enumerated_max(&vertices, &x_star);
    Ok(OracleSolution {
        p_star,
        x_star,
        w_star,
        dual_value: Some(-conj),
        method: OracleMethod::FullVertexQp,
        iterations,
    })
}

/// Subgradient descent on `g + f` with steps `1/(β√k)`.
///
/// Returns the better of the best iterate and the running average. Only a
/// sanity bracket, good to about `1e−3` relative.
pub fn oracle_subgradient(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    iterations: usize,
) -> Result<OracleSolution> {
    if g.dim() != f.n() {
        return Err(Error::invalid(
            "objective and set function dimensions differ",
        ));
    }
    let (_, beta) = g.moduli();
    let composite = |x: &Vector| -> Result<f64> { Ok(g.value(x) + f.lovasz_value(x)?) };
    let mut x = Vector::zeros(f.n());
    let mut average = x.clone();
    let mut best_x = x.clone();
    let mut best = composite(&x)?;
    for k in 1..=iterations.max(1) {
        let sub = g.gradient(&x) + f.greedy_vertex(&x, TieRule::AscendingIndex)?.vertex;
        x -= sub * (1.0 / (beta * (k as f64).sqrt()));
        average += (&x - &average) / k as f64;
        let value = composite(&x)?;
        if value < best {
            best = value;
            best_x = x.clone();
        }
    }
    let avg_value = composite(&average)?;
    if avg_value < best {
        best = avg_value;
        best_x = average;
    }
    let w_star = -g.gradient(&best_x);
    Ok(OracleSolution {
        p_star: best,
        x_star: best_x,
        w_star,
        dual_value: None,
        method: OracleMethod::SubgradientDescent,
        iterations,
    })
}

/// `max_{v,w ∈ vert B(F)} ‖v − w‖₂`.
pub fn diameter(f: &SubmodularFunction) -> Result<f64> {
    let n = f.n();
    if n > DIAMETER_MAX_N {
        return Err(Error::TooLarge {
            what: "diameter",
            n,
            limit: DIAMETER_MAX_N,
        });
    }
    let vertices = f.enumerate_vertices()?;
    let mut best = 0.0f64;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    Ok(best)
}

/// Memories that occur more than once in a trace.
pub fn repeated_memories(trace: &IterationTrace) -> usize {
    let mut seen: HashSet<Vec<VertexKey>> = HashSet::new();
    (0..trace.len())
        .filter(|&k| !seen.insert(trace.memory_keys(k)))
        .count()
}

/// Iterations whose lower bound drops below the previous one by more than
/// `tol·(1 + |d|)`.
pub fn lower_bound_decreases(trace: &IterationTrace, tol: f64) -> usize {
    trace
        .records
        .windows(2)
        .filter(|pair| {
            pair[1].dual_value < pair[0].dual_value - tol * (1.0 + pair[0].dual_value.abs())
        })
        .count()
}

/// Pairs `(i, j)` with `d⁽ⁱ⁾ > p⁽ʲ⁾ + tol·(1 + |p⁽ʲ⁾|)`, plus lower bounds
/// above a known optimum.
pub fn weak_duality_violations(trace: &IterationTrace, p_star: Option<f64>, tol: f64) -> usize {
    let mut violations = 0;
    for ri in &trace.records {
        for rj in &trace.records {
            if ri.dual_value > rj.primal_value + tol * (1.0 + rj.primal_value.abs()) {
                violations += 1;
            }
        }
        if let Some(p) = p_star {
            if ri.dual_value > p + tol * (1.0 + p.abs()) {
                violations += 1;
            }
        }
    }
    violations
}
