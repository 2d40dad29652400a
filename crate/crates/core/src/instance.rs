//! Seeded benchmark instances and their JSON description.
//!
//! Random quadratics draw `A` row-major from `U[−1, 1]`, then `b` from
//! `U[0, n]`, with a `ChaCha8Rng` seeded by `seed_from_u64(seed)`. The
//! objective is `xᵀQx + bᵀx` with `Q = (A + Aᵀ)/2 + shift·I`, stored as
//! `P = 2Q`. A draw whose `P` has smallest eigenvalue below `1e−6` is
//! discarded and the next seed tried, up to eight times.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::QuadraticObjective;
use crate::submodular::SubmodularFunction;
use crate::vertex::Vector;

pub const SCHEMA_VERSION: u32 = 1;
const MAX_RESAMPLES: u64 = 8;
const MIN_EIGENVALUE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub version: u32,
    pub n: usize,
    pub seed: u64,
    pub function: FunctionSpec,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum FunctionSpec {
    Permutahedron,
    CardinalityTruncation { k: usize },
    MaximalElement { h: Vec<f64> },
    ExplicitTable { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum ObjectiveSpec {
    /// Seeded random quadratic; `shift` defaults to `n`.
    RandomQuadratic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<f64>,
    },
    /// `½‖x‖²`.
    Identity,
    /// `½xᵀPx + bᵀx`, `P` given by rows.
    Explicit { p: Vec<Vec<f64>>, b: Vec<f64> },
}

impl InstanceSpec {
    /// The benchmark recipe: permutahedron plus a random quadratic.
    pub fn random(n: usize, seed: u64) -> Self {
        InstanceSpec {
            version: SCHEMA_VERSION,
            n,
            seed,
            function: FunctionSpec::Permutahedron,
            objective: ObjectiveSpec::RandomQuadratic { shift: None },
            notes: None,
        }
    }

    /// Permutahedron with `½‖x‖²`.
    pub fn identity(n: usize) -> Self {
        InstanceSpec {
            objective: ObjectiveSpec::Identity,
            ..Self::random(n, 0)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_str(text)?;
        if spec.version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported instance schema version {}",
                spec.version
            )));
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// A generated problem: `min g(x) + f(x)`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub g: QuadraticObjective,
    pub f: SubmodularFunction,
    /// Seed actually used after resampling.
    pub effective_seed: u64,
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::invalid("instance dimension must be positive"));
    }
    let f = match &spec.function {
        FunctionSpec::Permutahedron => SubmodularFunction::permutahedron(n)?,
        FunctionSpec::CardinalityTruncation { k } => {
            SubmodularFunction::cardinality_truncation(n, *k)?
        }
        FunctionSpec::MaximalElement { h } => {
            if h.len() != n {
                return Err(Error::invalid("maximal-element weights must have length n"));
            }
            SubmodularFunction::maximal_element(h.clone())?
        }
        FunctionSpec::ExplicitTable { values } => {
            SubmodularFunction::explicit_table(n, values.clone())?
        }
    };
    let (g, effective_seed) = match &spec.objective {
        ObjectiveSpec::Identity => (QuadraticObjective::identity(n)?, spec.seed),
        ObjectiveSpec::Explicit { p, b } => {
            if p.len() != n || p.iter().any(|row| row.len() != n) || b.len() != n {
                return Err(Error::invalid(
                    "explicit objective must be n×n with b of length n",
                ));
            }
            let flat: Vec<f64> = p.iter().flatten().copied().collect();
            let g = QuadraticObjective::new(
                DMatrix::from_row_slice(n, n, &flat),
                Vector::from_column_slice(b),
            )?;
            (g, spec.seed)
        }
        ObjectiveSpec::RandomQuadratic { shift } => {
            random_quadratic(n, spec.seed, shift.unwrap_or(n as f64))?
        }
    };
    Ok(Instance {
        spec: spec.clone(),
        g,
        f,
        effective_seed,
    })
}

/// Draws `(P, b)` for the random quadratic recipe.
pub fn random_quadratic_data(n: usize, seed: u64, shift: f64) -> (DMatrix<f64>, Vector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_row_iterator(n, n, (0..n * n).map(|_| rng.random_range(-1.0..=1.0)));
    let b = Vector::from_iterator(n, (0..n).map(|_| rng.random_range(0.0..=n as f64)));
    let q = (&a + a.transpose()) * 0.5 + DMatrix::identity(n, n) * shift;
    (q * 2.0, b)
}

fn random_quadratic(n: usize, seed: u64, shift: f64) -> Result<(QuadraticObjective, u64)> {
    if !shift.is_finite() {
        return Err(Error::invalid("diagonal shift must be finite"));
    }
    for attempt in 0..MAX_RESAMPLES {
        let seed = seed.wrapping_add(attempt);
        let (p, b) = random_quadratic_data(n, seed, shift);
        let min_eig = SymmetricEigen::new(p.clone()).eigenvalues.min();
        if min_eig >= MIN_EIGENVALUE {
            return Ok((QuadraticObjective::new(p, b)?, seed));
        }
    }
    Err(Error::Generation(format!(
        "no positive definite draw for n = {n}, seed = {seed} after {MAX_RESAMPLES} attempts"
    )))
}
