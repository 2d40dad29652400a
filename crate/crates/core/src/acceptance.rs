//! The acceptance suite: twelve pass/fail checks over seeded runs.
//!
//! Runs are generated once per [`Corpus`] and shared, so the cross-run
//! checks (monotone bounds, no repeated memory) see every run the other
//! checks produced.

use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{
    compare_traces, primal_from_dual_bound_check, run, Algorithm, BRule, RunOptions, RunResult,
    RunStatus, StoppingRule,
};
use crate::error::Result;
use crate::instance::{generate_instance, Instance, InstanceSpec};
use crate::objective::{ConvexObjective, QuadraticObjective};
use crate::oracles::{oracle_full_vertex, OracleSolution};
use crate::submodular::{SubmodularFunction, TieRule};
use crate::subproblem::check_affine_independence;
use crate::vertex::Vector;

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "kelley memory bound"),
    (2, "fully-corrective memory bound"),
    (3, "worked example"),
    (4, "oracle equivalence"),
    (5, "primal-dual iterate equivalence"),
    (6, "monotone lower bounds and weak duality"),
    (7, "no repeated memory"),
    (8, "convergence at scale"),
    (9, "empirical linear decay"),
    (10, "zero away gap and complementary slackness"),
    (11, "conjugate identities"),
    (12, "greedy correctness"),
];

#[derive(Clone, Debug)]
pub struct AcceptanceConfig {
    /// Criteria needing larger instances are skipped (or trimmed).
    pub n_max: usize,
    /// Overrides every per-criterion seed count.
    pub seeds: Option<usize>,
    /// Negative control: the minimal-support rule keeps the full memory.
    pub inject_fault: bool,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            n_max: 100,
            seeds: None,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skipped => "SKIP",
        };
        write!(
            f,
            "criterion {:>2} {tag} {}: {}",
            self.id, self.name, self.detail
        )
    }
}

/// One algorithm run on one instance.
pub struct Run {
    pub n: usize,
    pub seed: u64,
    pub result: RunResult,
    pub wall_ms: f64,
}

/// Oracle-checked Kelley run.
pub struct OracleCase {
    pub run: Run,
    pub oracle: OracleSolution,
}

pub struct DualityCase {
    pub lkm: Run,
    pub lfcfw: Run,
    pub osm: Run,
    pub fcfw: Run,
}

pub struct ScaleCase {
    pub runs: Vec<Run>,
}

/// Lazily built runs shared by the criteria.
pub struct Corpus {
    config: AcceptanceConfig,
    memory_lkm: OnceLock<Result<Vec<Run>>>,
    memory_lfcfw: OnceLock<Result<Vec<Run>>>,
    worked: OnceLock<Result<Vec<Run>>>,
    oracle: OnceLock<Result<(Vec<OracleCase>, f64)>>,
    duality: OnceLock<Result<Vec<DualityCase>>>,
    scale: OnceLock<Result<Vec<ScaleCase>>>,
}

fn execute(
    algorithm: Algorithm,
    instance: &Instance,
    stop: &StoppingRule,
    opts: &RunOptions,
) -> Result<Run> {
    let start = Instant::now();
    let result = run(algorithm, &instance.g, &instance.f, stop, opts)?;
    Ok(Run {
        n: instance.spec.n,
        seed: instance.spec.seed,
        result,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn experiment_stop() -> StoppingRule {
    StoppingRule::relative(1e-5, 500)
}

fn as_ref<T>(r: &Result<T>) -> std::result::Result<&T, String> {
    r.as_ref().map_err(|e| e.to_string())
}

impl Corpus {
    pub fn new(config: AcceptanceConfig) -> Self {
        Corpus {
            config,
            memory_lkm: OnceLock::new(),
            memory_lfcfw: OnceLock::new(),
            worked: OnceLock::new(),
            oracle: OnceLock::new(),
            duality: OnceLock::new(),
            scale: OnceLock::new(),
        }
    }

    pub fn config(&self) -> &AcceptanceConfig {
        &self.config
    }

    fn seeds(&self, default: usize) -> u64 {
        self.config.seeds.unwrap_or(default) as u64
    }

    /// `(n, seed)` pairs of the memory-bound instance set.
    fn memory_instances(&self) -> Vec<(usize, u64)> {
        let mut out = Vec::new();
        for (n, count) in [(10, 20), (50, 5)] {
            if n <= self.config.n_max {
                out.extend((0..self.seeds(count)).map(|s| (n, s)));
            }
        }
        out
    }

    fn memory_runs(&self, algorithm: Algorithm) -> Result<Vec<Run>> {
        self.memory_instances()
            .into_iter()
            .map(|(n, seed)| {
                let inst = generate_instance(&InstanceSpec::random(n, seed))?;
                execute(algorithm, &inst, &experiment_stop(), &RunOptions::default())
            })
            .collect()
    }

    pub fn memory_lkm(&self) -> std::result::Result<&Vec<Run>, String> {
        as_ref(
            self.memory_lkm
                .get_or_init(|| self.memory_runs(Algorithm::Lkm)),
        )
    }

    pub fn memory_lfcfw(&self) -> std::result::Result<&Vec<Run>, String> {
        let rule = if self.config.inject_fault {
            BRule::FullMemory
        } else {
            BRule::MinimalSupport
        };
        as_ref(
            self.memory_lfcfw
                .get_or_init(|| self.memory_runs(Algorithm::Lfcfw(rule))),
        )
    }

    pub fn worked(&self) -> std::result::Result<&Vec<Run>, String> {
        as_ref(self.worked.get_or_init(|| {
            let inst = generate_instance(&InstanceSpec::identity(2))?;
            [
                Algorithm::Lkm,
                Algorithm::Osm,
                Algorithm::Lfcfw(BRule::MinimalSupport),
                Algorithm::Lfcfw(BRule::FullMemory),
            ]
            .into_iter()
            .map(|a| {
                execute(
                    a,
                    &inst,
                    &StoppingRule::absolute(0.0, 50),
                    &RunOptions::default(),
                )
            })
            .collect()
        }))
    }

    /// Oracle cases plus their total wall time in milliseconds.
    pub fn oracle(&self) -> std::result::Result<&(Vec<OracleCase>, f64), String> {
        as_ref(self.oracle.get_or_init(|| {
            let start = Instant::now();
            let mut cases = Vec::new();
            for n in 2..=self.config.n_max.min(6) {
                for seed in 0..self.seeds(5) {
                    let inst = generate_instance(&InstanceSpec::random(n, seed))?;
                    let run = execute(
                        Algorithm::Lkm,
                        &inst,
                        &StoppingRule::absolute(0.0, 500),
                        &RunOptions::default(),
                    )?;
                    let oracle = oracle_full_vertex(&inst.g, &inst.f)?;
                    cases.push(OracleCase { run, oracle });
                }
            }
            Ok((cases, start.elapsed().as_secs_f64() * 1e3))
        }))
    }

    pub fn duality(&self) -> std::result::Result<&Vec<DualityCase>, String> {
        as_ref(self.duality.get_or_init(|| {
            let n = 20;
            if n > self.config.n_max {
                return Ok(Vec::new());
            }
            (0..self.seeds(10))
                .map(|seed| {
                    let inst = generate_instance(&InstanceSpec::random(n, seed))?;
                    let stop = experiment_stop();
                    let opts = RunOptions::default();
                    Ok(DualityCase {
                        lkm: execute(Algorithm::Lkm, &inst, &stop, &opts)?,
                        lfcfw: execute(Algorithm::Lfcfw(BRule::ActiveSet), &inst, &stop, &opts)?,
                        osm: execute(Algorithm::Osm, &inst, &stop, &opts)?,
                        fcfw: execute(Algorithm::Lfcfw(BRule::FullMemory), &inst, &stop, &opts)?,
                    })
                })
                .collect()
        }))
    }

    pub fn scale(&self) -> std::result::Result<&Vec<ScaleCase>, String> {
        as_ref(self.scale.get_or_init(|| {
            let n = 100;
            if n > self.config.n_max {
                return Ok(Vec::new());
            }
            (0..self.seeds(3))
                .map(|seed| {
                    let inst = generate_instance(&InstanceSpec::random(n, seed))?;
                    let runs = [
                        Algorithm::Lkm,
                        Algorithm::Osm,
                        Algorithm::Lfcfw(BRule::MinimalSupport),
                        Algorithm::Lfcfw(BRule::FullMemory),
                    ]
                    .into_iter()
                    .map(|a| execute(a, &inst, &experiment_stop(), &RunOptions::default()))
                    .collect::<Result<Vec<_>>>()?;
                    Ok(ScaleCase { runs })
                })
                .collect()
        }))
    }

    /// Every run the corpus holds, with a known optimum where one exists.
    fn all_runs(&self) -> std::result::Result<Vec<(&Run, Option<f64>)>, String> {
        let mut out: Vec<(&Run, Option<f64>)> = Vec::new();
        out.extend(self.memory_lkm()?.iter().map(|r| (r, None)));
        out.extend(self.memory_lfcfw()?.iter().map(|r| (r, None)));
        out.extend(self.worked()?.iter().map(|r| (r, Some(-2.25))));
        out.extend(
            self.oracle()?
                .0
                .iter()
                .map(|c| (&c.run, Some(c.oracle.p_star))),
        );
        for c in self.duality()? {
            out.extend([&c.lkm, &c.lfcfw, &c.osm, &c.fcfw].map(|r| (r, None)));
        }
        for c in self.scale()? {
            out.extend(c.runs.iter().map(|r| (r, None)));
        }
        Ok(out)
    }
}

/// Failure messages collected while checking one criterion.
#[derive(Default)]
struct Findings {
    problems: Vec<String>,
    checked: usize,
}

impl Findings {
    fn fail(&mut self, msg: String) {
        self.problems.push(msg);
    }

    fn finish(self, id: u8, summary: String) -> CriterionReport {
        let name = CRITERIA[id as usize - 1].1;
        if self.checked == 0 {
            return CriterionReport {
                id,
                name,
                outcome: Outcome::Skipped,
                detail: "nothing to check at this n_max".into(),
            };
        }
        let (outcome, detail) = if self.problems.is_empty() {
            (Outcome::Pass, summary)
        } else {
            let shown: Vec<_> = self.problems.iter().take(3).cloned().collect();
            (
                Outcome::Fail,
                format!(
                    "{summary}; {} problem(s): {}",
                    self.problems.len(),
                    shown.join("; ")
                ),
            )
        };
        CriterionReport {
            id,
            name,
            outcome,
            detail,
        }
    }
}

fn errored(id: u8, err: String) -> CriterionReport {
    CriterionReport {
        id,
        name: CRITERIA[id as usize - 1].1,
        outcome: Outcome::Fail,
        detail: format!("run error: {err}"),
    }
}

macro_rules! tryc {
    ($id:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return errored($id, err),
        }
    };
}

fn label(run: &Run) -> String {
    format!(
        "{} n={} seed={}",
        run.result.algorithm.name(),
        run.n,
        run.seed
    )
}

/// Runs one criterion by number.
pub fn check(id: u8, corpus: &Corpus) -> CriterionReport {
    match id {
        1 => memory_bound(corpus),
        2 => lfcfw_memory_bound(corpus),
        3 => worked_example(corpus),
        4 => oracle_equivalence(corpus),
        5 => duality(corpus),
        6 => monotone_bounds(corpus),
        7 => no_stall(corpus),
        8 => convergence_at_scale(corpus),
        9 => linear_decay(corpus),
        10 => away_gap(corpus),
        11 => conjugate_identities(corpus),
        12 => greedy_correctness(corpus),
        _ => panic!("unknown criterion {id}"),
    }
}

pub fn check_all(corpus: &Corpus) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&(id, _)| check(id, corpus)).collect()
}

fn memory_bound(corpus: &Corpus) -> CriterionReport {
    let runs = tryc!(1, corpus.memory_lkm());
    let mut out = Findings::default();
    let mut total_ms = 0.0;
    let mut worst = 0;
    for run in runs {
        total_ms += run.wall_ms;
        out.checked += 1;
        if run.result.status != RunStatus::Converged {
            out.fail(format!("{} ended with {:?}", label(run), run.result.status));
        }
        let trace = &run.result.trace;
        for k in 0..trace.len() {
            let size = trace.records[k].memory_size;
            worst = worst.max(size as i64 - run.n as i64);
            if size > run.n + 1 {
                out.fail(format!(
                    "{} iter {} holds {size} vertices",
                    label(run),
                    k + 1
                ));
            }
            if !check_affine_independence(&trace.memory_set(k)) {
                out.fail(format!(
                    "{} iter {} memory affinely dependent",
                    label(run),
                    k + 1
                ));
            }
        }
    }
    if total_ms >= 10_000.0 {
        out.fail(format!("took {total_ms:.0} ms"));
    }
    out.finish(
        1,
        format!(
            "{} runs, max |V| - n = {worst}, {total_ms:.0} ms total",
            runs.len()
        ),
    )
}

fn lfcfw_memory_bound(corpus: &Corpus) -> CriterionReport {
    let runs = tryc!(2, corpus.memory_lfcfw());
    let mut out = Findings::default();
    let (mut worst_v, mut worst_b) = (i64::MIN, i64::MIN);
    for run in runs {
        out.checked += 1;
        for r in &run.result.trace.records {
            worst_v = worst_v.max(r.memory_size as i64 - run.n as i64);
            worst_b = worst_b.max(r.active_size as i64 - run.n as i64);
            if r.memory_size > run.n + 2 {
                out.fail(format!(
                    "{} iter {} |V| = {}",
                    label(run),
                    r.iter,
                    r.memory_size
                ));
            }
            if r.active_size > run.n + 1 {
                out.fail(format!(
                    "{} iter {} |B| = {}",
                    label(run),
                    r.iter,
                    r.active_size
                ));
            }
        }
    }
    out.finish(
        2,
        format!(
            "{} runs, max |V| - n = {worst_v}, max |B| - n = {worst_b}",
            runs.len()
        ),
    )
}

fn worked_example(corpus: &Corpus) -> CriterionReport {
    let runs = tryc!(3, corpus.worked());
    let mut out = Findings::default();
    for run in runs {
        out.checked += 1;
        let res = &run.result;
        let last = res.trace.last();
        let ok = res.status == RunStatus::Converged
            && res.iterations() == 2
            && last.is_some_and(|r| {
                (r.primal_value + 2.25).abs() <= 1e-10 && (r.dual_value + 2.25).abs() <= 1e-10
            });
        if !ok {
            out.fail(format!(
                "{} took {} iterations ending at p = {:?}, d = {:?}",
                label(run),
                res.iterations(),
                last.map(|r| r.primal_value),
                last.map(|r| r.dual_value)
            ));
        }
    }
    out.finish(3, format!("{} algorithms", runs.len()))
}

fn oracle_equivalence(corpus: &Corpus) -> CriterionReport {
    let (cases, total_ms) = tryc!(4, corpus.oracle());
    let mut out = Findings::default();
    let mut worst = 0.0f64;
    for case in cases {
        out.checked += 1;
        let p_star = case.oracle.p_star;
        let p = case
            .run
            .result
            .trace
            .last()
            .map_or(f64::NAN, |r| r.primal_value);
        let err = (p - p_star).abs() / (1.0 + p_star.abs());
        worst = worst.max(err);
        if !(err <= 1e-6) {
            out.fail(format!("{}: p = {p}, oracle {p_star}", label(&case.run)));
        }
    }
    if *total_ms >= 30_000.0 {
        out.fail(format!("took {total_ms:.0} ms"));
    }
    out.finish(
        4,
        format!(
            "{} instances, max relative deviation {worst:.1e}, {total_ms:.0} ms",
            cases.len()
        ),
    )
}

fn duality(corpus: &Corpus) -> CriterionReport {
    let cases = tryc!(5, corpus.duality());
    let mut out = Findings::default();
    let (mut max_x, mut max_gap, mut max_sym) = (0.0f64, 0.0f64, 0usize);
    for case in cases {
        for (a, b) in [(&case.lkm, &case.lfcfw), (&case.osm, &case.fcfw)] {
            out.checked += 1;
            let dev = compare_traces(&a.result.trace, &b.result.trace);
            max_x = max_x.max(dev.max_x);
            max_gap = max_gap.max(dev.max_gap_relative);
            max_sym = max_sym.max(dev.max_vertex_symmetric_difference);
            if dev.iterations.0 != dev.iterations.1 {
                out.fail(format!(
                    "{} vs {}: {} vs {} iterations",
                    label(a),
                    b.result.algorithm.name(),
                    dev.iterations.0,
                    dev.iterations.1
                ));
            }
            if dev.max_x > 1e-6
                || dev.max_vertex_symmetric_difference > 0
                || dev.max_gap_relative > 1e-8
            {
                out.fail(format!(
                    "{} vs {}: {dev:?}",
                    label(a),
                    b.result.algorithm.name()
                ));
            }
        }
    }
    let checked = out.checked;
    out.finish(
        5,
        format!(
            "{} pairs, max |dx| = {max_x:.1e}, max vertex difference {max_sym}, max relative gap difference {max_gap:.1e}",
            checked
        ),
    )
}

fn monotone_bounds(corpus: &Corpus) -> CriterionReport {
    let runs = tryc!(6, corpus.all_runs());
    let mut out = Findings::default();
    for (run, p_star) in &runs {
        out.checked += 1;
        let records = &run.result.trace.records;
        for pair in records.windows(2) {
            let (d0, d1) = (pair[0].dual_value, pair[1].dual_value);
            // Every recorded iteration but the last continued the run.
            if !(d1 > d0 - 1e-12 * (1.0 + d0.abs())) {
                out.fail(format!(
                    "{} iter {}: lower bound {d0} -> {d1}",
                    label(run),
                    pair[1].iter
                ));
            }
        }
        let best_dual = records
            .iter()
            .map(|r| r.dual_value)
            .fold(f64::NEG_INFINITY, f64::max);
        let best_primal = records
            .iter()
            .map(|r| r.primal_value)
            .fold(f64::INFINITY, f64::min);
        if best_dual > best_primal + 1e-9 * (1.0 + best_primal.abs()) {
            out.fail(format!(
                "{}: d = {best_dual} above p = {best_primal}",
                label(run)
            ));
        }
        if let Some(p) = p_star {
            if best_dual > p + 1e-9 * (1.0 + p.abs()) {
                out.fail(format!("{}: d = {best_dual} above optimum {p}", label(run)));
            }
        }
    }
    out.finish(6, format!("{} runs", runs.len()))
}

fn no_stall(corpus: &Corpus) -> CriterionReport {
    let runs = tryc!(7, corpus.all_runs());
    let mut out = Findings::default();
    for (run, _) in &runs {
        out.checked += 1;
        let repeats = crate::oracles::repeated_memories(&run.result.trace);
        if repeats > 0 {
            out.fail(format!("{}: {repeats} repeated memories", label(run)));
        }
    }
    out.finish(7, format!("{} runs", runs.len()))
}

fn convergence_at_scale(corpus: &Corpus) -> CriterionReport {
    let cases = tryc!(8, corpus.scale());
    let mut out = Findings::default();
    let mut iters = Vec::new();
    for case in cases {
        for run in &case.runs {
            out.checked += 1;
            let res = &run.result;
            iters.push(res.iterations());
            if res.status != RunStatus::Converged {
                out.fail(format!("{} ended with {:?}", label(run), res.status));
            }
            if run.wall_ms >= 60_000.0 {
                out.fail(format!("{} took {:.0} ms", label(run), run.wall_ms));
            }
            let records = &res.trace.records;
            match res.algorithm {
                Algorithm::Osm => {
                    if let Some(r) = records.iter().find(|r| r.memory_size != r.iter) {
                        out.fail(format!(
                            "{} iter {} solved over {} vertices",
                            label(run),
                            r.iter,
                            r.memory_size
                        ));
                    }
                }
                Algorithm::Lkm => {
                    if let Some(r) = records.iter().find(|r| r.memory_size > run.n + 1) {
                        out.fail(format!(
                            "{} iter {} |V| = {}",
                            label(run),
                            r.iter,
                            r.memory_size
                        ));
                    }
                }
                _ => {}
            }
        }
    }
    let checked = out.checked;
    out.finish(8, format!("{} runs, iterations {iters:?}", checked))
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn linear_decay(corpus: &Corpus) -> CriterionReport {
    let cases = tryc!(9, corpus.scale());
    let mut out = Findings::default();
    let (mut worst_median, mut worst_reduction) = (0.0f64, 0.0f64);
    for case in cases {
        // Best upper bound seen on this instance stands in for the optimum.
        let p_star = case
            .runs
            .iter()
            .flat_map(|r| r.result.trace.records.iter().map(|x| x.primal_value))
            .fold(f64::INFINITY, f64::min);
        for run in &case.runs {
            out.checked += 1;
            let records = &run.result.trace.records;
            let sub: Vec<f64> = records.iter().map(|r| p_star - r.dual_value).collect();
            let ratios: Vec<f64> = sub
                .windows(2)
                .skip(1)
                .filter(|w| w[0] > 0.0)
                .map(|w| w[1] / w[0])
                .collect();
            let med = median(ratios);
            worst_median = worst_median.max(med);
            if !(med < 1.0) {
                out.fail(format!("{}: median ratio {med:.3}", label(run)));
            }
            let (first, last) = (records[0].gap, records[records.len() - 1].gap);
            let reduction = last / first;
            worst_reduction = worst_reduction.max(reduction);
            if !(last < 1e-5 * first) {
                out.fail(format!(
                    "{}: gap {first:.3e} -> {last:.3e} (factor {reduction:.2e})",
                    label(run)
                ));
            }
        }
    }
    let checked = out.checked;
    out.finish(
        9,
        format!(
            "{} runs, worst median ratio {worst_median:.3}, worst final/initial gap {worst_reduction:.2e}",
            checked
        ),
    )
}

fn away_gap(corpus: &Corpus) -> CriterionReport {
    let runs = tryc!(10, corpus.all_runs());
    let mut out = Findings::default();
    let mut worst = f64::NEG_INFINITY;
    for (run, _) in runs
        .iter()
        .filter(|(r, _)| matches!(r.result.algorithm, Algorithm::Lfcfw(_)))
    {
        out.checked += 1;
        for r in &run.result.trace.records {
            let scaled = r.away_gap / (1.0 + r.t.abs());
            worst = worst.max(scaled);
            if scaled > 1e-8 {
                out.fail(format!(
                    "{} iter {}: away gap {:.2e}",
                    label(run),
                    r.iter,
                    r.away_gap
                ));
            }
            if !r.support_in_active {
                out.fail(format!(
                    "{} iter {}: support outside active set",
                    label(run),
                    r.iter
                ));
            }
        }
    }
    let checked = out.checked;
    out.finish(
        10,
        format!("{} runs, worst scaled away gap {worst:.1e}", checked),
    )
}

/// Random point of `B(F)`: a convex combination of greedy vertices.
fn random_base_point(f: &SubmodularFunction, rng: &mut ChaCha8Rng, atoms: usize) -> Result<Vector> {
    let mut w = Vector::zeros(f.n());
    let raw: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    for lam in raw {
        let x = Vector::from_iterator(f.n(), (0..f.n()).map(|_| rng.random_range(-1.0..1.0)));
        w += f.greedy_vertex(&x, TieRule::AscendingIndex)?.vertex * (lam / total);
    }
    Ok(w)
}

fn conjugate_identities(corpus: &Corpus) -> CriterionReport {
    let n_max = corpus.config().n_max;
    let mut classes: Vec<(String, QuadraticObjective)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut build = || -> Result<()> {
        for n in [2usize, 5] {
            if n <= n_max {
                classes.push((format!("identity n={n}"), QuadraticObjective::identity(n)?));
                let diag = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(0.1..10.0)));
                let b = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-1.0..1.0)));
                classes.push((
                    format!("diagonal n={n}"),
                    QuadraticObjective::new(nalgebra::DMatrix::from_diagonal(&diag), b)?,
                ));
            }
        }
        for n in [10usize, 100] {
            if n <= n_max {
                let inst = generate_instance(&InstanceSpec::random(n, 1))?;
                classes.push((format!("random n={n}"), inst.g));
            }
        }
        Ok(())
    };
    if let Err(e) = build() {
        return errored(11, e.to_string());
    }
    let mut out = Findings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (name, g) in &classes {
        let n = g.dim();
        let f = match SubmodularFunction::permutahedron(n) {
            Ok(f) => f,
            Err(e) => return errored(11, e.to_string()),
        };
        let (alpha, _) = g.moduli();
        for _ in 0..100 {
            out.checked += 1;
            let x = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-3.0..3.0)));
            let y = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(-3.0..3.0)));
            let w = g.gradient(&x);
            if (g.conjugate_gradient(&w) - &x).amax() > 1e-8 {
                out.fail(format!(
                    "{name}: conjugate gradient does not invert the gradient"
                ));
            }
            if (g.gradient(&g.conjugate_gradient(&y)) - &y).amax() > 1e-8 {
                out.fail(format!(
                    "{name}: gradient does not invert the conjugate gradient"
                ));
            }
            let wx = w.dot(&x);
            if (g.value(&x) + g.conjugate_value(&w) - wx).abs() > 1e-10 * (1.0 + wx.abs()) {
                out.fail(format!("{name}: Fenchel-Young equality off"));
            }
            let h = 1e-5;
            let grad = g.gradient(&x);
            let mut fd = Vector::zeros(n);
            for i in 0..n {
                let mut e = Vector::zeros(n);
                e[i] = h;
                fd[i] = (g.value(&(&x + &e)) - g.value(&(&x - &e))) / (2.0 * h);
            }
            if (&fd - &grad).norm() > 1e-6 * (1.0 + grad.norm()) {
                out.fail(format!("{name}: finite differences disagree"));
            }
            let lhs = (g.conjugate_gradient(&x) - g.conjugate_gradient(&y)).norm();
            if lhs > (&x - &y).norm() / alpha * (1.0 + 1e-9) {
                out.fail(format!("{name}: conjugate gradient not 1/alpha-Lipschitz"));
            }
            let pair = random_base_point(&f, &mut rng, 3).and_then(|a| {
                let b = random_base_point(&f, &mut rng, 3)?;
                primal_from_dual_bound_check(g, &f, &a, &b)
            });
            match pair {
                Ok((lhs, rhs)) if lhs <= rhs * (1.0 + 1e-9) => {}
                Ok((lhs, rhs)) => out.fail(format!("{name}: primal error {lhs} above {rhs}")),
                Err(e) => out.fail(format!("{name}: {e}")),
            }
        }
    }
    out.finish(11, format!("{} classes x 100 points", classes.len()))
}

/// Families checked by the greedy criterion at ground-set size `n`.
pub fn greedy_families(
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(String, SubmodularFunction)>> {
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    // Concave of a modular function plus a truncation: submodular.
    let table: Vec<f64> = (0..1usize << n)
        .map(|mask| {
            let total: f64 = (0..n)
                .filter(|e| mask >> e & 1 == 1)
                .map(|e| weights[e])
                .sum();
            total.sqrt() + (mask.count_ones() as f64).min(2.0)
        })
        .collect();
    Ok(vec![
        (
            "permutahedron".into(),
            SubmodularFunction::permutahedron(n)?,
        ),
        (
            "cardinality truncation".into(),
            SubmodularFunction::cardinality_truncation(n, n.div_ceil(2))?,
        ),
        (
            "maximal element".into(),
            SubmodularFunction::maximal_element(h)?,
        ),
        (
            "explicit table".into(),
            SubmodularFunction::explicit_table(n, table)?,
        ),
    ])
}

fn greedy_correctness(corpus: &Corpus) -> CriterionReport {
    let n = corpus.config().n_max.min(7);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let families = match greedy_families(n, &mut rng) {
        Ok(f) => f,
        Err(e) => return errored(12, e.to_string()),
    };
    let mut out = Findings::default();
    let mut worst = 0.0f64;
    for (name, f) in &families {
        let vertices = match f.enumerate_vertices() {
            Ok(v) => v,
            Err(e) => return errored(12, e.to_string()),
        };
        for k in 0..100 {
            out.checked += 1;
            // Every other point sits on a small integer grid to force ties.
            let x = Vector::from_iterator(
                n,
                (0..n).map(|_| {
                    if k % 2 == 0 {
                        rng.random_range(-5.0..5.0)
                    } else {
                        rng.random_range(-2i32..=2) as f64
                    }
                }),
            );
            let best = vertices
                .iter()
                .map(|v| v.dot(&x))
                .fold(f64::NEG_INFINITY, f64::max);
            for tie in [TieRule::AscendingIndex, TieRule::DescendingIndex] {
                match f.greedy_vertex(&x, tie) {
                    Ok(res) => {
                        let err = (res.value - best).abs();
                        worst = worst.max(err);
                        if err > 1e-12 {
                            out.fail(format!("{name}: greedy {} vs max {best}", res.value));
                        }
                    }
                    Err(e) => out.fail(format!("{name}: {e}")),
                }
            }
        }
    }
    out.finish(
        12,
        format!(
            "n = {n}, {} families x 100 points, max error {worst:.1e}",
            families.len()
        ),
    )
}
