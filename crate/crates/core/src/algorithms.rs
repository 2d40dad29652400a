//! Outer loops: the limited-memory Kelley method, the original simplicial
//! method, fully-corrective Frank-Wolfe with limited or full memory, and
//! Frank-Wolfe with away steps.
//!
//! Kelley-type methods work on the primal `min g(x) + f(x)` and keep a
//! memory `V` of base-polytope vertices that defines the cutting-plane model
//! `f_V(x) = max_{v∈V} vᵀx`. The Frank-Wolfe methods work on the dual
//! `max_{w∈B(F)} −g*(−w)` and keep the atoms of a convex combination. Each
//! iteration of either family solves the same pair of subproblems over `V`
//! (see [`crate::subproblem`]), so the two families differ only in which
//! vertices they keep and in how they report their bounds.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::objective::{ConvexObjective, QuadraticObjective};
use crate::submodular::{SubmodularFunction, TieRule};
use crate::subproblem::{
    active_indices, caratheodory_prune, check_affine_independence, solve_with_images,
    support_indices, SimplexWeights, SubproblemOptions, SubproblemSolution, DEFAULT_TOL_ACTIVE,
};
use crate::vertex::{Vector, VertexKey, VertexSet};

/// When to stop: `gap ≤ epsilon`, or `gap ≤ epsilon·(1 + |p|)` in relative mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub epsilon: f64,
    pub relative: bool,
    pub max_iterations: usize,
}

impl StoppingRule {
    pub fn absolute(epsilon: f64, max_iterations: usize) -> Self {
        StoppingRule {
            epsilon,
            relative: false,
            max_iterations,
        }
    }

    pub fn relative(epsilon: f64, max_iterations: usize) -> Self {
        StoppingRule {
            epsilon,
            relative: true,
            max_iterations,
        }
    }

    pub fn threshold(&self, p: f64) -> f64 {
        if self.relative {
            self.epsilon * (1.0 + p.abs())
        } else {
            self.epsilon
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::invalid("stopping tolerance must be non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("iteration cap must be positive"));
        }
        Ok(())
    }
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule::absolute(1e-8, 1000)
    }
}

/// Which retained vertices the fully-corrective method carries forward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BRule {
    /// Support of the weights after Carathéodory pruning.
    #[default]
    MinimalSupport,
    /// Vertices tight at the current primal point (the Kelley active set).
    ActiveSet,
    /// Everything (vanilla fully-corrective Frank-Wolfe).
    FullMemory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lkm,
    Osm,
    Lfcfw(BRule),
    AwayFw,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Lkm => "lkm",
            Algorithm::Osm => "osm",
            Algorithm::Lfcfw(BRule::FullMemory) => "fcfw",
            Algorithm::Lfcfw(_) => "lfcfw",
            Algorithm::AwayFw => "awayfw",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterationCap,
    InnerSolverFailure,
}

/// Knobs shared by every outer loop.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub tie_rule: TieRule,
    pub subproblem: SubproblemOptions,
    pub tol_active: f64,
    /// Initial memory; defaults to the greedy vertex at `x0`.
    pub initial: Option<VertexSet>,
    /// Initial point; defaults to the origin.
    pub x0: Option<Vector>,
    /// Seed each subproblem with the previous weights.
    pub warm_start: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tie_rule: TieRule::AscendingIndex,
            subproblem: SubproblemOptions::default(),
            tol_active: DEFAULT_TOL_ACTIVE,
            initial: None,
            x0: None,
            warm_start: true,
        }
    }
}

/// One outer iteration.
///
/// `p`, `d` are the method's own bounds: `g(x)+f(x)` and `g(x)+f_V(x)` for
/// Kelley methods, `vᵀx` and `wᵀx` for Frank-Wolfe methods. Their difference
/// is the same certificate in both cases. `primal_value` and `dual_value` put
/// every method on the common scale of the composite objective.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iter: usize,
    pub x: Vector,
    pub w: Vector,
    pub p: f64,
    pub d: f64,
    pub gap: f64,
    /// `g(x) + f(x)`.
    pub primal_value: f64,
    /// Certified lower bound on the optimal value.
    pub dual_value: f64,
    /// Epigraph height `max_{v∈V} vᵀx`.
    pub t: f64,
    /// Size of the memory the subproblem was solved over.
    pub memory_size: usize,
    /// Size of the retained set (active set or `B`).
    pub active_size: usize,
    pub inner_iterations: usize,
    pub cum_time_ms: f64,
    /// `max_{v∈supp λ} (w − v)ᵀx`.
    pub away_gap: f64,
    /// Whether the support of the weights lies inside the active set.
    pub support_in_active: bool,
    /// Pool ids of the memory the subproblem was solved over.
    pub memory: Vec<u32>,
    /// Pool id of the vertex returned by the linear oracle.
    pub new_vertex: u32,
}

/// Per-iteration records plus the vertices they refer to.
#[derive(Clone, Debug, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pool: Vec<Vector>,
    ids: HashMap<VertexKey, u32>,
}

impl IterationTrace {
    fn intern(&mut self, v: &Vector) -> u32 {
        let key = VertexKey::of(v);
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.pool.len() as u32;
        self.pool.push(v.clone());
        self.ids.insert(key, id);
        id
    }

    pub fn vertex(&self, id: u32) -> &Vector {
        &self.pool[id as usize]
    }

    /// Memory of iteration `k` (0-based record index) as a vertex set.
    pub fn memory_set(&self, k: usize) -> VertexSet {
        let mut set = VertexSet::default();
        for &id in &self.records[k].memory {
            set.insert(self.vertex(id).clone(), 0);
        }
        set
    }

    /// Sorted exact keys of the memory of iteration `k`.
    pub fn memory_keys(&self, k: usize) -> Vec<VertexKey> {
        let mut keys: Vec<_> = self.records[k]
            .memory
            .iter()
            .map(|&id| VertexKey::of(self.vertex(id)))
            .collect();
        keys.sort();
        keys
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub x: Vector,
    pub w: Vector,
    /// Weights of the final iterate, aligned with `memory`.
    pub lambda: SimplexWeights,
    /// Memory the final subproblem was solved over.
    pub memory: VertexSet,
    pub trace: IterationTrace,
    pub status: RunStatus,
    pub failure: Option<String>,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_gap(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |r| r.gap)
    }
}

/// Runs any of the algorithms with default options.
pub fn run(
    algorithm: Algorithm,
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<RunResult> {
    match algorithm {
        Algorithm::Lkm => run_lkm(g, f, stop, opts),
        Algorithm::Osm => run_osm(g, f, stop, opts),
        Algorithm::Lfcfw(rule) => run_lfcfw(g, f, stop, rule, opts),
        Algorithm::AwayFw => run_away_fw(g, f, stop, None, opts),
    }
}

/// Vertex memory with cached `P⁻¹v` images and the last weights.
struct Memory {
    set: VertexSet,
    images: Vec<Vector>,
}

impl Memory {
    fn new(set: VertexSet, g: &QuadraticObjective) -> Self {
        let images = set.iter().map(|v| g.solve(v)).collect();
        Memory { set, images }
    }

    fn keep(&self, indices: &[usize]) -> Memory {
        Memory {
            set: self.set.select(indices),
            images: indices.iter().map(|&k| self.images[k].clone()).collect(),
        }
    }

    fn push(&mut self, v: Vector, iteration: usize, g: &QuadraticObjective) -> bool {
        if self.set.contains(&v) {
            return false;
        }
        self.images.push(g.solve(&v));
        self.set.insert(v, iteration);
        true
    }
}

fn check_dims(g: &QuadraticObjective, f: &SubmodularFunction) -> Result<()> {
    if g.dim() != f.n() {
        return Err(Error::invalid(format!(
            "objective has dimension {}, set function has {} elements",
            g.dim(),
            f.n()
        )));
    }
    Ok(())
}

fn initial_memory(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    opts: &RunOptions,
) -> Result<VertexSet> {
    if let Some(set) = &opts.initial {
        if set.dim() != f.n() || set.is_empty() {
            return Err(Error::invalid(
                "initial memory does not match the ground set",
            ));
        }
        return Ok(set.clone());
    }
    let x0 = match &opts.x0 {
        Some(x0) if x0.len() == g.dim() => x0.clone(),
        Some(_) => return Err(Error::invalid("initial point has the wrong dimension")),
        None => Vector::zeros(g.dim()),
    };
    VertexSet::new(vec![f.greedy_vertex(&x0, opts.tie_rule)?.vertex])
}

/// Numerical floor under the stopping threshold.
///
/// A vertex already in memory satisfies `vᵀx − wᵀx ≤ tol_kkt·scale` at the
/// subproblem optimum, so a gap inside this band cannot be closed by adding
/// a new cut and would otherwise stall an `ε = 0` run.
fn gap_floor(opts: &RunOptions, memory: &VertexSet, x: &Vector, extra: f64) -> f64 {
    let scale = memory
        .iter()
        .map(|v| v.dot(x).abs())
        .fold(1.0 + extra.abs(), |a, d| a.max(1.0 + d));
    opts.subproblem.tol_kkt * scale
}

/// Quantities every loop records about the current subproblem solution.
struct Diagnostics {
    away_gap: f64,
    support_in_active: bool,
    active: Vec<usize>,
    support: Vec<usize>,
}

fn diagnose(memory: &VertexSet, sol: &SubproblemSolution, opts: &RunOptions) -> Diagnostics {
    let active = active_indices(memory, &sol.x, sol.t, opts.tol_active);
    let support = support_indices(&sol.lambda, opts.subproblem.tol_supp);
    let wx = sol.w.dot(&sol.x);
    let away_gap = support
        .iter()
        .map(|&k| wx - memory[k].dot(&sol.x))
        .fold(f64::NEG_INFINITY, f64::max);
    let support_in_active = support.iter().all(|k| active.contains(k));
    Diagnostics {
        away_gap,
        support_in_active,
        active,
        support,
    }
}

fn restrict_weights(lambda: &SimplexWeights, keep: &[usize]) -> Vec<f64> {
    keep.iter().map(|&k| lambda[k]).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Update {
    /// Keep the tight cuts and add the new one.
    Limited,
    /// Keep every cut.
    Full,
}

/// Limited-memory Kelley method.
///
/// Each iteration minimizes `g + f_V` over the current memory, queries the
/// greedy oracle at the minimizer, and replaces the memory by the cuts that
/// are tight there plus the new cut. The memory stays affinely independent
/// and so never exceeds `n + 1` vertices.
pub fn run_lkm(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<RunResult> {
    let init = initial_memory(g, f, opts)?;
    if !check_affine_independence(&init) {
        return Err(Error::invalid(
            "initial memory must be affinely independent",
        ));
    }
    run_kelley(g, f, stop, opts, init, Update::Limited, Algorithm::Lkm)
}

/// Original simplicial method: identical to [`run_lkm`] except that no cut
/// is ever discarded.
pub fn run_osm(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<RunResult> {
    let init = initial_memory(g, f, opts)?;
    run_kelley(g, f, stop, opts, init, Update::Full, Algorithm::Osm)
}

fn run_kelley(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    opts: &RunOptions,
    init: VertexSet,
    update: Update,
    algorithm: Algorithm,
) -> Result<RunResult> {
    check_dims(g, f)?;
    stop.validate()?;
    let clock = Instant::now();
    let mut trace = IterationTrace::default();
    let mut memory = Memory::new(init, g);
    let mut warm: Option<Vec<f64>> = None;
    let mut last: Option<SubproblemSolution> = None;

    for iter in 1..=stop.max_iterations {
        let sol = match solve_with_images(
            &memory.set,
            &memory.images,
            g,
            &opts.subproblem,
            warm.as_deref().filter(|_| opts.warm_start),
        ) {
            Ok(sol) => sol,
            Err(Error::Convergence { best, .. }) => {
                return Ok(failure(algorithm, memory.set, *best, trace, "subproblem"));
            }
            Err(e) => return Err(e),
        };
        let oracle = f.greedy_vertex(&sol.x, opts.tie_rule)?;
        let gx = g.value(&sol.x);
        let p = gx + oracle.value;
        let d = gx + sol.t;
        let gap = p - d;
        let diag = diagnose(&memory.set, &sol, opts);
        let memory_ids: Vec<u32> = memory.set.iter().map(|v| trace.intern(v)).collect();
        let new_vertex = trace.intern(&oracle.vertex);
        let memory_size = memory.set.len();

        let floor = gap_floor(opts, &memory.set, &sol.x, oracle.value);
        let converged = gap <= stop.threshold(p) + floor;
        let active_size = diag.active.len();
        if !converged {
            let mut next = match update {
                Update::Limited => memory.keep(&diag.active),
                Update::Full => memory.keep(&(0..memory.set.len()).collect::<Vec<_>>()),
            };
            warm = Some(match update {
                Update::Limited => restrict_weights(&sol.lambda, &diag.active),
                Update::Full => sol.lambda.as_slice().to_vec(),
            });
            if next.push(oracle.vertex.clone(), iter, g) {
                warm.as_mut().expect("set above").push(0.0);
            }
            memory = next;
        }
        trace.records.push(IterationRecord {
            iter,
            x: sol.x.clone(),
            w: sol.w.clone(),
            p,
            d,
            gap,
            primal_value: p,
            dual_value: d,
            t: sol.t,
            memory_size,
            active_size,
            inner_iterations: sol.inner_iterations,
            cum_time_ms: clock.elapsed().as_secs_f64() * 1e3,
            away_gap: diag.away_gap,
            support_in_active: diag.support_in_active,
            memory: memory_ids,
            new_vertex,
        });
        if converged {
            return Ok(finished(
                algorithm,
                memory.set,
                sol,
                trace,
                RunStatus::Converged,
            ));
        }
        last = Some(sol);
    }
    let sol = last.expect("at least one iteration");
    // The memory was already advanced past `sol`; rebuild the weights over it.
    let previous = trace.memory_set(trace.len() - 1);
    Ok(finished(
        algorithm,
        previous,
        sol,
        trace,
        RunStatus::IterationCap,
    ))
}

/// Fully-corrective Frank-Wolfe on `max_{w∈B(F)} −g*(−w)`.
///
/// Each iteration maximizes the dual objective exactly over the hull of the
/// memory, calls the greedy oracle at `x = ∇g*(−w)`, and keeps the vertices
/// chosen by `rule` plus the new vertex.
pub fn run_lfcfw(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    rule: BRule,
    opts: &RunOptions,
) -> Result<RunResult> {
    check_dims(g, f)?;
    stop.validate()?;
    let algorithm = Algorithm::Lfcfw(rule);
    let clock = Instant::now();
    let mut trace = IterationTrace::default();
    let mut memory = Memory::new(initial_memory(g, f, opts)?, g);
    let mut warm: Option<Vec<f64>> = None;
    let mut last: Option<SubproblemSolution> = None;

    for iter in 1..=stop.max_iterations {
        let sol = match solve_with_images(
            &memory.set,
            &memory.images,
            g,
            &opts.subproblem,
            warm.as_deref().filter(|_| opts.warm_start),
        ) {
            Ok(sol) => sol,
            Err(Error::Convergence { best, .. }) => {
                return Ok(failure(algorithm, memory.set, *best, trace, "subproblem"));
            }
            Err(e) => return Err(e),
        };
        let oracle = f.greedy_vertex(&sol.x, opts.tie_rule)?;
        let p = oracle.value;
        let d = sol.w.dot(&sol.x);
        let gap = p - d;
        let gx = g.value(&sol.x);
        let diag = diagnose(&memory.set, &sol, opts);
        let memory_ids: Vec<u32> = memory.set.iter().map(|v| trace.intern(v)).collect();
        let new_vertex = trace.intern(&oracle.vertex);
        let memory_size = memory.set.len();

        let floor = gap_floor(opts, &memory.set, &sol.x, oracle.value);
        let converged = gap <= stop.threshold(gx + p) + floor;
        let (mut next, mut next_warm) = match rule {
            BRule::MinimalSupport => {
                let support = memory.keep(&diag.support);
                let weights =
                    SimplexWeights::from_raw(restrict_weights(&sol.lambda, &diag.support));
                let (pruned, pruned_weights) = caratheodory_prune(&support.set, &weights, &sol.w)?;
                let keys: Vec<usize> = pruned
                    .iter()
                    .map(|v| {
                        support
                            .set
                            .iter()
                            .position(|u| u == v)
                            .expect("pruned atoms come from the support")
                    })
                    .collect();
                (support.keep(&keys), pruned_weights.as_slice().to_vec())
            }
            BRule::ActiveSet => (
                memory.keep(&diag.active),
                restrict_weights(&sol.lambda, &diag.active),
            ),
            BRule::FullMemory => (
                memory.keep(&(0..memory.set.len()).collect::<Vec<_>>()),
                sol.lambda.as_slice().to_vec(),
            ),
        };
        let active_size = next.set.len();
        if !converged {
            if next.push(oracle.vertex.clone(), iter, g) {
                next_warm.push(0.0);
            }
            memory = next;
            warm = Some(next_warm);
        }
        trace.records.push(IterationRecord {
            iter,
            x: sol.x.clone(),
            w: sol.w.clone(),
            p,
            d,
            gap,
            primal_value: gx + p,
            dual_value: sol.dual_value,
            t: sol.t,
            memory_size,
            active_size,
            inner_iterations: sol.inner_iterations,
            cum_time_ms: clock.elapsed().as_secs_f64() * 1e3,
            away_gap: diag.away_gap,
            support_in_active: diag.support_in_active,
            memory: memory_ids,
            new_vertex,
        });
        if converged {
            return Ok(finished(
                algorithm,
                memory.set,
                sol,
                trace,
                RunStatus::Converged,
            ));
        }
        last = Some(sol);
    }
    let sol = last.expect("at least one iteration");
    let previous = trace.memory_set(trace.len() - 1);
    Ok(finished(
        algorithm,
        previous,
        sol,
        trace,
        RunStatus::IterationCap,
    ))
}

fn finished(
    algorithm: Algorithm,
    memory: VertexSet,
    sol: SubproblemSolution,
    trace: IterationTrace,
    status: RunStatus,
) -> RunResult {
    RunResult {
        algorithm,
        x: sol.x,
        w: sol.w,
        lambda: sol.lambda,
        memory,
        trace,
        status,
        failure: None,
    }
}

fn failure(
    algorithm: Algorithm,
    memory: VertexSet,
    best: SubproblemSolution,
    trace: IterationTrace,
    what: &str,
) -> RunResult {
    let message = format!(
        "{what} solver stopped with kkt residual {:e} after {} linear solves",
        best.kkt_residual, best.inner_iterations
    );
    RunResult {
        failure: Some(message),
        ..finished(
            algorithm,
            memory,
            best,
            trace,
            RunStatus::InnerSolverFailure,
        )
    }
}

/// Frank-Wolfe with away steps and exact line search on `max −g*(−w)`.
///
/// `w0` must be a vertex of `B(F)`; by default the greedy vertex at the
/// origin (or at `opts.x0`).
pub fn run_away_fw(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    w0: Option<Vector>,
    opts: &RunOptions,
) -> Result<RunResult> {
    check_dims(g, f)?;
    stop.validate()?;
    let clock = Instant::now();
    let start = match w0 {
        Some(w0) if w0.len() == f.n() => w0,
        Some(_) => return Err(Error::invalid("starting vertex has the wrong dimension")),
        None => initial_memory(g, f, opts)?[0].clone(),
    };
    let mut atoms = VertexSet::new(vec![start])?;
    let mut weights = vec![1.0];
    let mut trace = IterationTrace::default();

    let mut iter = 0;
    loop {
        iter += 1;
        let lambda = SimplexWeights::from_raw(weights.clone());
        let w = lambda.combine(&atoms);
        let neg_w = -&w;
        let x = g.conjugate_gradient(&neg_w);
        let dual_value = -g.conjugate_value(&neg_w);
        let oracle = f.greedy_vertex(&x, opts.tie_rule)?;
        let wx = w.dot(&x);
        let p = oracle.value;
        let gap = p - wx;
        let dots: Vec<f64> = atoms.iter().map(|v| v.dot(&x)).collect();
        let t = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (away, away_dot) = dots
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, &d)| (k, d))
            .expect("at least one atom");
        let cut = t - opts.tol_active * (1.0 + t.abs());
        let memory_ids: Vec<u32> = atoms.iter().map(|v| trace.intern(v)).collect();
        let new_vertex = trace.intern(&oracle.vertex);
        let gx = g.value(&x);
        let converged = gap <= stop.threshold(gx + p) + gap_floor(opts, &atoms, &x, p);
        trace.records.push(IterationRecord {
            iter,
            x: x.clone(),
            w: w.clone(),
            p,
            d: wx,
            gap,
            primal_value: gx + p,
            dual_value,
            t,
            memory_size: atoms.len(),
            active_size: atoms.len(),
            inner_iterations: 1,
            cum_time_ms: clock.elapsed().as_secs_f64() * 1e3,
            away_gap: wx - away_dot,
            support_in_active: dots.iter().all(|&d| d >= cut),
            memory: memory_ids,
            new_vertex,
        });
        let status = if converged {
            Some(RunStatus::Converged)
        } else if iter >= stop.max_iterations {
            Some(RunStatus::IterationCap)
        } else {
            None
        };
        if let Some(status) = status {
            return Ok(RunResult {
                algorithm: Algorithm::AwayFw,
                x,
                w,
                lambda,
                memory: atoms,
                trace,
                status,
                failure: None,
            });
        }

        let fw_gap = gap;
        let away_gap = wx - away_dot;
        let (direction, max_step, toward) = if fw_gap >= away_gap {
            (&oracle.vertex - &w, 1.0, true)
        } else {
            let la = weights[away];
            (&w - &atoms[away], la / (1.0 - la), false)
        };
        // h(w + γd) is a concave quadratic in γ with slope dᵀx at γ = 0.
        let slope = direction.dot(&x);
        let curvature = direction.dot(&g.solve(&direction));
        let step = if curvature > 0.0 {
            (slope / curvature).min(max_step)
        } else {
            max_step
        };
        if toward {
            weights.iter_mut().for_each(|l| *l *= 1.0 - step);
            match atoms.iter().position(|v| *v == oracle.vertex) {
                Some(k) => weights[k] += step,
                None => {
                    atoms.insert(oracle.vertex.clone(), iter);
                    weights.push(step);
                }
            }
        } else {
            weights.iter_mut().for_each(|l| *l *= 1.0 + step);
            weights[away] -= step;
            if step >= max_step {
                weights[away] = 0.0;
            }
        }
        let keep: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > 0.0).collect();
        if keep.len() < weights.len() {
            atoms = atoms.select(&keep);
            weights = keep.iter().map(|&k| weights[k]).collect();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|l| *l /= total);
    }
}

/// Largest per-iteration disagreement between two runs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairDeviation {
    pub iterations: (usize, usize),
    /// `max_i ‖x_a − x_b‖∞`.
    pub max_x: f64,
    /// Largest symmetric difference between the memories of matching iterations.
    pub max_vertex_symmetric_difference: usize,
    /// `max_i |gap_a − gap_b|`.
    pub max_gap: f64,
    /// `max_i |gap_a − gap_b| / (1 + |gap_a|)`.
    pub max_gap_relative: f64,
    /// Reported only: the bounds of the two families differ by `g(x)`.
    pub max_p_offset: f64,
    pub max_d_offset: f64,
}

/// Iterate-level comparison of the primal methods with their duals.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub lkm_vs_lfcfw: PairDeviation,
    pub osm_vs_fcfw: PairDeviation,
}

/// Compares two traces iteration by iteration.
pub fn compare_traces(a: &IterationTrace, b: &IterationTrace) -> PairDeviation {
    let mut dev = PairDeviation {
        iterations: (a.len(), b.len()),
        ..Default::default()
    };
    for k in 0..a.len().min(b.len()) {
        let (ra, rb) = (&a.records[k], &b.records[k]);
        dev.max_x = dev.max_x.max((&ra.x - &rb.x).amax());
        let (ka, kb) = (a.memory_keys(k), b.memory_keys(k));
        let only_a = ka
            .iter()
            .filter(|key| kb.binary_search(key).is_err())
            .count();
        let only_b = kb
            .iter()
            .filter(|key| ka.binary_search(key).is_err())
            .count();
        dev.max_vertex_symmetric_difference =
            dev.max_vertex_symmetric_difference.max(only_a + only_b);
        let dg = (ra.gap - rb.gap).abs();
        dev.max_gap = dev.max_gap.max(dg);
        dev.max_gap_relative = dev.max_gap_relative.max(dg / (1.0 + ra.gap.abs()));
        dev.max_p_offset = dev.max_p_offset.max((ra.p - rb.p).abs());
        dev.max_d_offset = dev.max_d_offset.max((ra.d - rb.d).abs());
    }
    dev
}

/// Runs L-KM against L-FCFW on the active set and OSM against vanilla FCFW
/// from the same start and reports how far their iterates drift apart.
pub fn crosscheck_duality(
    g: &QuadraticObjective,
    f: &SubmodularFunction,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<DualityReport> {
    let lkm = run_lkm(g, f, stop, opts)?;
    let lfcfw = run_lfcfw(g, f, stop, BRule::ActiveSet, opts)?;
    let osm = run_osm(g, f, stop, opts)?;
    let fcfw = run_lfcfw(g, f, stop, BRule::FullMemory, opts)?;
    Ok(DualityReport {
        lkm_vs_lfcfw: compare_traces(&lkm.trace, &lfcfw.trace),
        osm_vs_fcfw: compare_traces(&osm.trace, &fcfw.trace),
    })
}

/// `(‖∇g*(−w_approx) − ∇g*(−w_star)‖, ‖w_approx − w_star‖ / α)`.
///
/// The first never exceeds the second because `∇g*` is `1/α`-Lipschitz.
/// For ground sets small enough to check, both points must lie in `B(F)`.
pub fn primal_from_dual_bound_check(
    g: &impl ConvexObjective,
    f: &SubmodularFunction,
    w_approx: &Vector,
    w_star: &Vector,
) -> Result<(f64, f64)> {
    if w_approx.len() != g.dim() || w_star.len() != g.dim() {
        return Err(Error::invalid("dual points have the wrong dimension"));
    }
    if f.n() <= crate::submodular::MEMBERSHIP_MAX_N {
        for w in [w_approx, w_star] {
            if !f.check_membership(w, 1e-9)? {
                return Err(Error::invalid("dual point is not in the base polytope"));
            }
        }
    }
    let (alpha, _) = g.moduli();
    let lhs = (g.conjugate_gradient(&-w_approx) - g.conjugate_gradient(&-w_star)).norm();
    let rhs = (w_approx - w_star).norm() / alpha;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn worked() -> (QuadraticObjective, SubmodularFunction) {
        (
            QuadraticObjective::identity(2).unwrap(),
            SubmodularFunction::permutahedron(2).unwrap(),
        )
    }

    #[test]
    fn lkm_worked_trace() {
        let (g, f) = worked();
        let res = run_lkm(
            &g,
            &f,
            &StoppingRule::absolute(0.0, 50),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(res.status, RunStatus::Converged);
        assert_eq!(res.iterations(), 2);
        let first = &res.trace.records[0];
        assert_eq!(first.x, v(&[-2.0, -1.0]));
        assert_eq!(first.p, -1.5);
        assert_eq!(first.d, -2.5);
        assert_eq!(res.trace.vertex(first.new_vertex), &v(&[1.0, 2.0]));
        let second = &res.trace.records[1];
        assert!((&second.x - v(&[-1.5, -1.5])).amax() < 1e-12);
        assert!((second.p + 2.25).abs() < 1e-12 && (second.d + 2.25).abs() < 1e-12);
    }

    #[test]
    fn modular_function_stops_at_once() {
        let g = QuadraticObjective::new(
            nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            v(&[0.5, -1.0]),
        )
        .unwrap();
        let f = SubmodularFunction::cardinality_truncation(2, 2).unwrap();
        let stop = StoppingRule::absolute(0.0, 10);
        for algo in [
            Algorithm::Lkm,
            Algorithm::Osm,
            Algorithm::Lfcfw(BRule::MinimalSupport),
            Algorithm::AwayFw,
        ] {
            let res = run(algo, &g, &f, &stop, &RunOptions::default()).unwrap();
            assert_eq!(res.status, RunStatus::Converged, "{algo:?}");
            assert_eq!(res.iterations(), 1, "{algo:?}");
            assert!(res.final_gap().abs() < 1e-12);
        }
    }

    #[test]
    fn away_fw_worked_trace() {
        let (g, f) = worked();
        let res = run_away_fw(
            &g,
            &f,
            &StoppingRule::absolute(0.0, 50),
            Some(v(&[2.0, 1.0])),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(res.status, RunStatus::Converged);
        assert_eq!(res.iterations(), 2);
        assert!((&res.w - v(&[1.5, 1.5])).amax() < 1e-12);
    }

    #[test]
    fn rejects_dependent_initial_memory() {
        let (g, _) = worked();
        let f = SubmodularFunction::permutahedron(2).unwrap();
        let opts = RunOptions {
            initial: Some(
                VertexSet::new(vec![v(&[2.0, 1.0]), v(&[1.0, 2.0]), v(&[1.5, 1.5])]).unwrap(),
            ),
            ..Default::default()
        };
        assert!(run_lkm(&g, &f, &StoppingRule::default(), &opts).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let g = QuadraticObjective::identity(5).unwrap();
        let f = SubmodularFunction::permutahedron(5).unwrap();
        let res = run_lkm(
            &g,
            &f,
            &StoppingRule::absolute(0.0, 1),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(res.status, RunStatus::IterationCap);
        assert_eq!(res.iterations(), 1);
        assert_eq!(res.lambda.len(), res.memory.len());
    }

    #[test]
    fn bound_check_examples() {
        let (g, f) = worked();
        let w = v(&[1.5, 1.5]);
        assert_eq!(
            primal_from_dual_bound_check(&g, &f, &w, &w).unwrap(),
            (0.0, 0.0)
        );
        let (lhs, rhs) = primal_from_dual_bound_check(&g, &f, &v(&[2.0, 1.0]), &w).unwrap();
        assert_eq!(lhs, rhs);
        assert!(primal_from_dual_bound_check(&g, &f, &v(&[3.0, 0.0]), &w).is_err());
    }

    #[test]
    fn stopping_rule_validation() {
        let (g, f) = worked();
        let bad = StoppingRule::absolute(-1.0, 10);
        assert!(run_lkm(&g, &f, &bad, &RunOptions::default()).is_err());
        let bad = StoppingRule::absolute(0.0, 0);
        assert!(run_osm(&g, &f, &bad, &RunOptions::default()).is_err());
        assert_eq!(StoppingRule::relative(1e-5, 1).threshold(-99.0), 1e-3);
    }
}
