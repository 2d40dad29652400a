//! The paired subproblems over a finite vertex memory `V`.
//!
//! Primal: `minimize g(x) + t  s.t.  t ≥ vᵀx  (v ∈ V)`.
//! Dual:   `maximize −g*(−w)  s.t.  w ∈ conv(V)`.
//!
//! The dual is solved in weight space, `w = Σ λ_v v` with `λ` on the simplex,
//! by a Wolfe-style primal active-set method: keep a working support, jump to
//! the minimizer of the quadratic on the affine hull of the support, step back
//! to the simplex boundary when a weight would go negative, and enter the
//! vertex that most violates first-order optimality. The primal solution is
//! recovered as `x = ∇g*(−w)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::objective::{ConvexObjective, QuadraticObjective};
use crate::vertex::{Vector, VertexSet};

/// Tolerances for [`solve_subproblem`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubproblemOptions {
    /// Scaled first-order residual accepted as optimal:
    /// `max_v (v − w)ᵀx ≤ tol_kkt · (1 + max_v |vᵀx|)`.
    pub tol_kkt: f64,
    /// Weights at or below this are clipped to zero before renormalizing.
    pub tol_supp: f64,
    /// Cap on linear solves; `None` scales with the problem size.
    pub max_iterations: Option<usize>,
}

impl Default for SubproblemOptions {
    fn default() -> Self {
        SubproblemOptions {
            tol_kkt: 1e-10,
            tol_supp: 1e-12,
            max_iterations: None,
        }
    }
}

/// Default relative tolerance for the active-set test.
pub const DEFAULT_TOL_ACTIVE: f64 = 1e-9;

/// Convex weights, one per vertex of an associated [`VertexSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    /// Accepts non-negative weights summing to one within `1e-9` and renormalizes.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("simplex weights must be non-empty"));
        }
        if weights.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::invalid(
                "simplex weights must be finite and non-negative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "simplex weights sum to {total}, not 1"
            )));
        }
        Ok(SimplexWeights(weights.iter().map(|l| l / total).collect()))
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        SimplexWeights(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ λ_v v`.
    pub fn combine(&self, vertices: &VertexSet) -> Vector {
        let mut w = Vector::zeros(vertices.dim());
        for (l, v) in self.0.iter().zip(vertices.iter()) {
            w.axpy(*l, v, 1.0);
        }
        w
    }
}

impl std::ops::Index<usize> for SimplexWeights {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// Optimal pair for one subproblem.
#[derive(Clone, Debug)]
pub struct SubproblemSolution {
    /// Dual point in `conv(V)`.
    pub w: Vector,
    /// Weights certifying `w`, aligned with the vertex set.
    pub lambda: SimplexWeights,
    /// Primal point `∇g*(−w)`.
    pub x: Vector,
    /// `−g*(−w)`.
    pub dual_value: f64,
    /// Epigraph height `max_v vᵀx`.
    pub t: f64,
    /// Number of linear solves performed.
    pub inner_iterations: usize,
    /// Scaled first-order residual at the returned point.
    pub kkt_residual: f64,
}

impl SubproblemSolution {
    /// `g(x) + t`, the value of the primal subproblem at the returned point.
    pub fn primal_value(&self, g: &impl ConvexObjective) -> f64 {
        g.value(&self.x) + self.t
    }
}

/// Solves `max −g*(−w)` over `conv(vertices)`.
///
/// `warm` holds weights aligned with `vertices`; its positive entries seed
/// the working support.
pub fn solve_subproblem(
    vertices: &VertexSet,
    g: &QuadraticObjective,
    opts: &SubproblemOptions,
    warm: Option<&[f64]>,
) -> Result<SubproblemSolution> {
    let images: Vec<Vector> = vertices.iter().map(|v| g.solve(v)).collect();
    solve_with_images(vertices, &images, g, opts, warm)
}

/// As [`solve_subproblem`], with `images[k] = P⁻¹ vertices[k]` supplied by the caller.
pub(crate) fn solve_with_images(
    vertices: &VertexSet,
    images: &[Vector],
    g: &QuadraticObjective,
    opts: &SubproblemOptions,
    warm: Option<&[f64]>,
) -> Result<SubproblemSolution> {
    let m = vertices.len();
    if m == 0 {
        return Err(Error::invalid("subproblem needs at least one vertex"));
    }
    if vertices.dim() != g.dim() {
        return Err(Error::invalid(format!(
            "vertices have dimension {}, objective has {}",
            vertices.dim(),
            g.dim()
        )));
    }
    if let Some(warm) = warm {
        if warm.len() != m {
            return Err(Error::invalid(
                "warm-start weights do not match the vertex set",
            ));
        }
    }
    let mut qp = SimplexQp::new(vertices, images, g);
    let cap = opts.max_iterations.unwrap_or(200 * (m + g.dim()) + 1000);
    qp.run(opts.tol_kkt, cap, warm);

    let mut lambda = vec![0.0; m];
    for (&k, &l) in qp.support.iter().zip(&qp.weights) {
        lambda[k] = l;
    }
    let solution = finish(vertices, g, lambda, opts.tol_supp, qp.solves);
    if solution.kkt_residual > opts.tol_kkt {
        return Err(Error::Convergence {
            iterations: qp.solves,
            residual: solution.kkt_residual,
            best: Box::new(solution),
        });
    }
    Ok(solution)
}

/// Clips tiny weights, renormalizes and recomputes every derived quantity.
fn finish(
    vertices: &VertexSet,
    g: &QuadraticObjective,
    mut lambda: Vec<f64>,
    tol_supp: f64,
    solves: usize,
) -> SubproblemSolution {
    for l in lambda.iter_mut() {
        if *l <= tol_supp {
            *l = 0.0;
        }
    }
    let total: f64 = lambda.iter().sum();
    if total > 0.0 {
        lambda.iter_mut().for_each(|l| *l /= total);
    } else {
        lambda[0] = 1.0;
    }
    let lambda = SimplexWeights::from_raw(lambda);
    let w = lambda.combine(vertices);
    let neg_w = -&w;
    let x = g.conjugate_gradient(&neg_w);
    let dual_value = -g.conjugate_value(&neg_w);
    let dots: Vec<f64> = vertices.iter().map(|v| v.dot(&x)).collect();
    let t = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let wx = w.dot(&x);
    let scale = 1.0 + dots.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let kkt_residual = ((t - wx) / scale).max(0.0);
    SubproblemSolution {
        w,
        lambda,
        x,
        dual_value,
        t,
        inner_iterations: solves,
        kkt_residual,
    }
}

/// Working state of the active-set method.
struct SimplexQp<'a> {
    vertices: &'a VertexSet,
    images: &'a [Vector],
    /// `P⁻¹b`.
    shift: Vector,
    support: Vec<usize>,
    weights: Vec<f64>,
    solves: usize,
}

impl<'a> SimplexQp<'a> {
    fn new(vertices: &'a VertexSet, images: &'a [Vector], g: &QuadraticObjective) -> Self {
        SimplexQp {
            vertices,
            images,
            shift: g.solve(g.linear()),
            support: Vec::new(),
            weights: Vec::new(),
            solves: 0,
        }
    }

    /// `x = −P⁻¹(w + b)` for the current weights.
    fn primal_point(&self) -> Vector {
        let mut x = -&self.shift;
        for (&k, &l) in self.support.iter().zip(&self.weights) {
            x.axpy(-l, &self.images[k], 1.0);
        }
        x
    }

    /// Objective `½(w+b)ᵀP⁻¹(w+b)` of a single vertex, up to a constant.
    fn vertex_cost(&self, k: usize) -> f64 {
        let v = &self.vertices[k];
        0.5 * v.dot(&self.images[k]) + v.dot(&self.shift)
    }

    fn cold_start(&mut self) {
        let best = (0..self.vertices.len())
            .min_by(|&a, &b| self.vertex_cost(a).total_cmp(&self.vertex_cost(b)))
            .expect("non-empty vertex set");
        self.support = vec![best];
        self.weights = vec![1.0];
    }

    fn run(&mut self, tol: f64, cap: usize, warm: Option<&[f64]>) {
        match warm {
            Some(warm) if warm.iter().any(|&l| l > 0.0) => {
                let total: f64 = warm.iter().filter(|&&l| l > 0.0).sum();
                for (k, &l) in warm.iter().enumerate() {
                    if l > 0.0 {
                        self.support.push(k);
                        self.weights.push(l / total);
                    }
                }
            }
            _ => self.cold_start(),
        }

        let mut last_entering = usize::MAX;
        let mut repeats = 0;
        while self.solves < cap {
            let x = self.primal_point();
            let wx: f64 = self
                .support
                .iter()
                .zip(&self.weights)
                .map(|(&k, &l)| l * self.vertices[k].dot(&x))
                .sum();
            let mut scale = 1.0f64;
            let mut entering = 0;
            let mut best = f64::NEG_INFINITY;
            for (k, v) in self.vertices.iter().enumerate() {
                let d = v.dot(&x);
                scale = scale.max(1.0 + d.abs());
                if d > best {
                    best = d;
                    entering = k;
                }
            }
            if best - wx <= tol * scale {
                return;
            }
            // The same vertex entering again means the previous cycle made no
            // progress; this only happens at the level of rounding noise.
            if entering == last_entering {
                repeats += 1;
                if repeats > 2 {
                    return;
                }
            } else {
                repeats = 0;
                last_entering = entering;
            }
            if !self.support.contains(&entering) {
                self.support.push(entering);
                self.weights.push(0.0);
            }
            self.minor_cycle(cap);
        }
    }

    /// Moves to the affine minimizer of the support, dropping vertices whose
    /// weight reaches zero on the way.
    fn minor_cycle(&mut self, cap: usize) {
        while self.solves < cap {
            let target = self.affine_minimizer();
            self.solves += 1;
            if target.iter().all(|&l| l > 0.0) {
                self.weights = target;
                return;
            }
            let mut theta = f64::INFINITY;
            let mut leaving = 0;
            for (i, (&cur, &tgt)) in self.weights.iter().zip(&target).enumerate() {
                if tgt <= 0.0 {
                    let step = if cur - tgt > 0.0 {
                        cur / (cur - tgt)
                    } else {
                        0.0
                    };
                    if step < theta {
                        theta = step;
                        leaving = i;
                    }
                }
            }
            let theta = theta.min(1.0);
            for (cur, tgt) in self.weights.iter_mut().zip(&target) {
                *cur += theta * (tgt - *cur);
            }
            self.weights[leaving] = 0.0;
            let mut i = 0;
            while i < self.support.len() {
                if self.weights[i] <= 0.0 {
                    self.support.remove(i);
                    self.weights.remove(i);
                } else {
                    i += 1;
                }
            }
            let total: f64 = self.weights.iter().sum();
            self.weights.iter_mut().for_each(|l| *l /= total);
        }
    }

    /// Minimizer of the quadratic over the affine hull of the support.
    ///
    /// Coordinates are taken relative to the first support vertex `r`, so
    /// the bordered system is built from differences `v − r` and stays well
    /// scaled when the vertices themselves are large.
    fn affine_minimizer(&self) -> Vec<f64> {
        let k = self.support.len();
        if k == 1 {
            return vec![1.0];
        }
        let r = self.support[0];
        let rv = &self.vertices[r];
        let ru = &self.images[r];
        let diffs: Vec<Vector> = self
            .support
            .iter()
            .map(|&j| &self.vertices[j] - rv)
            .collect();
        let udiffs: Vec<Vector> = self.support.iter().map(|&j| &self.images[j] - ru).collect();
        // Gradient of ½‖r + b + Σ μ_j d_j‖²_{P⁻¹} at μ = 0 is d_jᵀP⁻¹(r + b).
        let base = ru + &self.shift;

        let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        let mut diag_max = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let h = diffs[i].dot(&udiffs[j]);
                kkt[(i, j)] = h;
                kkt[(j, i)] = h;
            }
            diag_max = diag_max.max(kkt[(i, i)].abs());
            kkt[(i, k)] = 1.0;
            kkt[(k, i)] = 1.0;
            rhs[i] = -diffs[i].dot(&base);
        }
        rhs[k] = 1.0;
        let ridge = 1e-12 * (1.0 + diag_max);
        for i in 0..k {
            kkt[(i, i)] += ridge;
        }
        let sol = kkt
            .clone()
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .unwrap_or_else(|| {
                kkt.svd(true, true)
                    .solve(&rhs, 1e-14 * (1.0 + diag_max))
                    .expect("svd with both factors")
            });
        sol.rows(0, k).iter().copied().collect()
    }
}

/// Indices of `vertices` with `vᵀx ≥ t − tol_act·(1 + |t|)`; never empty.
pub fn active_indices(vertices: &VertexSet, x: &Vector, t: f64, tol_act: f64) -> Vec<usize> {
    let dots: Vec<f64> = vertices.iter().map(|v| v.dot(x)).collect();
    let cut = t - tol_act * (1.0 + t.abs());
    let active: Vec<usize> = (0..dots.len()).filter(|&k| dots[k] >= cut).collect();
    if active.is_empty() {
        let top = (0..dots.len())
            .max_by(|&a, &b| dots[a].total_cmp(&dots[b]))
            .expect("non-empty vertex set");
        return vec![top];
    }
    active
}

/// Vertices tight at `x`: `{v : vᵀx = t}` up to `tol_act`.
pub fn extract_active_set(vertices: &VertexSet, x: &Vector, t: f64, tol_act: f64) -> VertexSet {
    vertices.select(&active_indices(vertices, x, t, tol_act))
}

/// Indices with `λ_v > tol_supp`.
pub fn support_indices(lambda: &SimplexWeights, tol_supp: f64) -> Vec<usize> {
    (0..lambda.len())
        .filter(|&k| lambda[k] > tol_supp)
        .collect()
}

/// Vertices carrying positive weight.
pub fn extract_support(vertices: &VertexSet, lambda: &SimplexWeights, tol_supp: f64) -> VertexSet {
    vertices.select(&support_indices(lambda, tol_supp))
}

/// Relative singular-value threshold for affine dependence.
const AFFINE_RANK_TOL: f64 = 1e-9;

/// Whether the vertices are affinely independent.
pub fn check_affine_independence(vertices: &VertexSet) -> bool {
    let k = vertices.len();
    if k <= 1 {
        return true;
    }
    if k - 1 > vertices.dim() {
        return false;
    }
    let diffs = difference_matrix(vertices.vertices(), &(0..k).collect::<Vec<_>>());
    let sv = diffs.singular_values();
    let top = sv.max();
    top > 0.0 && sv.iter().all(|&s| s > AFFINE_RANK_TOL * top)
}

/// Columns `v_{idx[j]} − v_{idx[0]}` for `j ≥ 1`.
fn difference_matrix(vertices: &[Vector], idx: &[usize]) -> DMatrix<f64> {
    let n = vertices[idx[0]].len();
    let base = &vertices[idx[0]];
    DMatrix::from_fn(n, idx.len() - 1, |r, c| vertices[idx[c + 1]][r] - base[r])
}

/// Affine dependence `d` over `idx` (`Σ d_j v_j = 0`, `Σ d_j = 0`), if any.
fn affine_dependence(vertices: &[Vector], idx: &[usize]) -> Option<Vec<f64>> {
    let k = idx.len();
    if k <= 1 {
        return None;
    }
    let n = vertices[idx[0]].len();
    let diffs = difference_matrix(vertices, idx);
    // A wide matrix gets padded with zero rows so the SVD returns a full
    // right basis including the null direction.
    let rows = n.max(k - 1);
    let mut square = DMatrix::<f64>::zeros(rows, k - 1);
    square.view_mut((0, 0), (n, k - 1)).copy_from(&diffs);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sv = &svd.singular_values;
    let top = sv.max();
    let (small, smallest) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &s)| (i, s))
        .expect("at least one singular value");
    if k - 1 <= n && top > 0.0 && smallest > AFFINE_RANK_TOL * top {
        return None;
    }
    let c: Vec<f64> = v_t.row(small).iter().copied().collect();
    let mut d = Vec::with_capacity(k);
    d.push(-c.iter().sum::<f64>());
    d.extend(c);
    Some(d)
}

/// Reduces a convex combination to affinely independent atoms (at most `n+1`)
/// with the same barycenter `w`.
pub fn caratheodory_prune(
    vertices: &VertexSet,
    lambda: &SimplexWeights,
    w: &Vector,
) -> Result<(VertexSet, SimplexWeights)> {
    if vertices.len() != lambda.len() {
        return Err(Error::invalid("weights do not match the vertex set"));
    }
    if vertices.dim() != w.len() {
        return Err(Error::invalid("barycenter has the wrong dimension"));
    }
    let n = vertices.dim();
    let all = vertices.vertices();
    let mut idx: Vec<usize> = (0..lambda.len()).filter(|&k| lambda[k] > 0.0).collect();
    let mut weights: Vec<f64> = idx.iter().map(|&k| lambda[k]).collect();

    loop {
        // Any n+2 atoms are affinely dependent; look there first.
        let window = idx.len().min(n + 2);
        let Some(mut d) = affine_dependence(all, &idx[..window]) else {
            if idx.len() <= n + 1 {
                break;
            }
            unreachable!("n+2 points in dimension n are affinely dependent");
        };
        if !d.iter().any(|&x| x > 0.0) {
            d.iter_mut().for_each(|x| *x = -*x);
        }
        let (leaving, theta) = d
            .iter()
            .enumerate()
            .filter(|(_, &dj)| dj > 0.0)
            .map(|(j, &dj)| (j, weights[j] / dj))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dependence has a positive entry");
        for (wt, dj) in weights.iter_mut().zip(&d) {
            *wt -= theta * dj;
        }
        weights[leaving] = 0.0;
        let keep: Vec<usize> = (0..idx.len()).filter(|&j| weights[j] > 0.0).collect();
        idx = keep.iter().map(|&j| idx[j]).collect();
        weights = keep.iter().map(|&j| weights[j]).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|x| *x /= total);
    }
    Ok((vertices.select(&idx), SimplexWeights::from_raw(weights)))
}

/// Residuals of the KKT system of the epigraph subproblem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktResiduals {
    /// `‖∇g(x) + Σ λ_v v‖∞`.
    pub stationarity: f64,
    /// `max_v λ_v |vᵀx − t|`.
    pub comp_slack: f64,
    /// `max(0, max_v vᵀx − t, −min_v λ_v, |Σ λ_v − 1|)`.
    pub feasibility: f64,
}

pub fn kkt_residuals(
    vertices: &VertexSet,
    g: &impl ConvexObjective,
    sol: &SubproblemSolution,
) -> KktResiduals {
    let w = sol.lambda.combine(vertices);
    let stationarity = (g.gradient(&sol.x) + w).amax();
    let mut comp_slack = 0.0f64;
    let mut feasibility = 0.0f64;
    let mut total = 0.0;
    for (v, &l) in vertices.iter().zip(sol.lambda.as_slice()) {
        let dot = v.dot(&sol.x);
        comp_slack = comp_slack.max(l * (dot - sol.t).abs());
        feasibility = feasibility.max(dot - sol.t).max(-l);
        total += l;
    }
    feasibility = feasibility.max((total - 1.0).abs());
    KktResiduals {
        stationarity,
        comp_slack,
        feasibility,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn segment() -> VertexSet {
        VertexSet::new(vec![v(&[2.0, 1.0]), v(&[1.0, 2.0])]).unwrap()
    }

    /// Brute-force scan over the segment `θ(2,1) + (1−θ)(1,2)`.
    fn scan_segment(g: &QuadraticObjective) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=100_000 {
            let theta = i as f64 / 100_000.0;
            let w = v(&[1.0 + theta, 2.0 - theta]);
            let h = -g.conjugate_value(&-w);
            if h > best.0 {
                best = (h, theta);
            }
        }
        best
    }

    #[test]
    fn segment_midpoint() {
        let g = QuadraticObjective::identity(2).unwrap();
        let (scan_value, scan_theta) = scan_segment(&g);
        assert!((scan_theta - 0.5).abs() < 1e-5);
        assert!((scan_value + 2.25).abs() < 1e-9);

        let sol = solve_subproblem(&segment(), &g, &SubproblemOptions::default(), None).unwrap();
        assert!((&sol.w - v(&[1.5, 1.5])).amax() < 1e-12);
        assert!((sol.lambda[0] - 0.5).abs() < 1e-12);
        assert!((&sol.x - v(&[-1.5, -1.5])).amax() < 1e-12);
        assert!((sol.dual_value + 2.25).abs() < 1e-12);
        assert!((sol.primal_value(&g) - sol.dual_value).abs() < 1e-12);
    }

    #[test]
    fn singleton_is_its_own_solution() {
        let g = QuadraticObjective::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]),
            v(&[0.3, -0.7]),
        )
        .unwrap();
        let set = VertexSet::new(vec![v(&[4.0, -1.0])]).unwrap();
        let sol = solve_subproblem(&set, &g, &SubproblemOptions::default(), None).unwrap();
        assert_eq!(sol.w, v(&[4.0, -1.0]));
        assert_eq!(sol.lambda.as_slice(), &[1.0]);
        assert!((&sol.x - g.conjugate_gradient(&v(&[-4.0, 1.0]))).amax() < 1e-14);
        let res = kkt_residuals(&set, &g, &sol);
        assert_eq!(res.comp_slack, 0.0);
    }

    #[test]
    fn vertex_solution() {
        let g = QuadraticObjective::new(DMatrix::identity(2, 2), v(&[-2.0, -1.0])).unwrap();
        let (_, scan_theta) = scan_segment(&g);
        assert_eq!(scan_theta, 1.0);
        let sol = solve_subproblem(&segment(), &g, &SubproblemOptions::default(), None).unwrap();
        assert_eq!(sol.w, v(&[2.0, 1.0]));
        assert_eq!(sol.lambda.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn active_set_examples() {
        let set = segment();
        let both = active_indices(&set, &v(&[-1.5, -1.5]), -4.5, DEFAULT_TOL_ACTIVE);
        assert_eq!(both, vec![0, 1]);
        let one = extract_active_set(&set, &v(&[-1.0, -2.0]), -4.0, DEFAULT_TOL_ACTIVE);
        assert_eq!(one.vertices(), &[v(&[2.0, 1.0])]);
        let single = VertexSet::new(vec![v(&[1.0, 1.0])]).unwrap();
        assert_eq!(
            extract_active_set(&single, &v(&[3.0, 0.0]), 3.0, 1e-9).len(),
            1
        );
        // A stale t still yields a non-empty answer.
        assert_eq!(active_indices(&set, &v(&[-1.0, -2.0]), 10.0, 1e-9), vec![0]);
    }

    #[test]
    fn support_examples() {
        let set = segment();
        let half = SimplexWeights::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(extract_support(&set, &half, 1e-12).len(), 2);
        let first = SimplexWeights::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(support_indices(&first, 1e-12), vec![0]);
        let nearly = SimplexWeights::new(vec![1.0 - 1e-14, 1e-14]).unwrap();
        assert_eq!(support_indices(&nearly, 1e-12), vec![0]);
    }

    #[test]
    fn affine_independence_examples() {
        assert!(check_affine_independence(&segment()));
        let collinear =
            VertexSet::new(vec![v(&[2.0, 1.0]), v(&[1.0, 2.0]), v(&[1.5, 1.5])]).unwrap();
        assert!(!check_affine_independence(&collinear));
        assert!(check_affine_independence(
            &VertexSet::new(vec![v(&[1.0, 1.0])]).unwrap()
        ));
    }

    #[test]
    fn caratheodory_examples() {
        let set = VertexSet::new(vec![v(&[2.0, 1.0]), v(&[1.0, 2.0]), v(&[1.5, 1.5])]).unwrap();
        let third = 1.0 / 3.0;
        let lambda = SimplexWeights::new(vec![third, third, third]).unwrap();
        let w = v(&[1.5, 1.5]);
        let (kept, weights) = caratheodory_prune(&set, &lambda, &w).unwrap();
        assert!((1..=2).contains(&kept.len()));
        assert!((weights.combine(&kept) - &w).amax() < 1e-9);
        assert!(check_affine_independence(&kept));

        let lambda = SimplexWeights::new(vec![0.25, 0.75]).unwrap();
        let w = lambda.combine(&segment());
        let (kept, weights) = caratheodory_prune(&segment(), &lambda, &w).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(weights.as_slice(), lambda.as_slice());

        let lambda = SimplexWeights::new(vec![0.0, 1.0, 0.0]).unwrap();
        let (kept, _) = caratheodory_prune(&set, &lambda, &v(&[1.0, 2.0])).unwrap();
        assert_eq!(kept.vertices(), &[v(&[1.0, 2.0])]);
    }

    #[test]
    fn kkt_examples() {
        let g = QuadraticObjective::identity(2).unwrap();
        let set = segment();
        let sol = solve_subproblem(&set, &g, &SubproblemOptions::default(), None).unwrap();
        let res = kkt_residuals(&set, &g, &sol);
        assert!(res.stationarity <= 1e-9 && res.comp_slack <= 1e-9 && res.feasibility <= 1e-9);

        let mut perturbed = sol.clone();
        perturbed.lambda = SimplexWeights::new(vec![0.6, 0.4]).unwrap();
        perturbed.w = perturbed.lambda.combine(&set);
        // x stays at the optimum, so ∇g(x) + w' = w' − w = (0.1, −0.1).
        let res = kkt_residuals(&set, &g, &perturbed);
        assert!(res.stationarity >= 0.1 - 1e-12);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let g = QuadraticObjective::identity(2).unwrap();
        let opts = SubproblemOptions {
            max_iterations: Some(0),
            ..Default::default()
        };
        match solve_subproblem(&segment(), &g, &opts, None) {
            Err(Error::Convergence { best, .. }) => assert_eq!(best.lambda.len(), 2),
            other => panic!("expected a convergence error, got {other:?}"),
        }
    }

    #[test]
    fn simplex_weights_validation() {
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexWeights::new(vec![]).is_err());
    }
}
