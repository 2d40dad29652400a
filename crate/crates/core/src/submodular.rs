//! Submodular set functions, Edmonds' greedy vertex, and the Lovász extension.
//!
//! The Lovász extension is the support function of the base polytope,
//! `f(x) = max { wᵀx : w ∈ B(F) }`. Sorting `x` in non-increasing order and
//! taking marginal gains along that order produces a maximizing vertex; every
//! vertex of `B(F)` arises this way from some permutation.

use std::collections::HashSet;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::vertex::{Vector, VertexKey};

/// Largest ground set an explicit table may describe (2^16 entries).
pub const EXPLICIT_TABLE_MAX_N: usize = 16;
/// Largest ground set for `n!` vertex enumeration.
pub const ENUMERATION_MAX_N: usize = 8;
/// Largest ground set for the `2^n` membership test.
pub const MEMBERSHIP_MAX_N: usize = 16;
/// Largest ground set for the `4^n` pairwise submodularity check.
pub const SUBMODULARITY_CHECK_MAX_N: usize = 10;

/// Elements `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ground set must have at least one element"));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// The parametric families the crate ships.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `F(S) = Σ_{s=1}^{|S|} (n+1−s)`; its base polytope is the permutahedron.
    Permutahedron,
    /// `F(S) = min(|S|, k)`.
    CardinalityTruncation { k: usize },
    /// `F(S) = max_{e∈S} h(e) − min_e h(e)`, with `F(∅) = 0`.
    MaximalElement { h: Vec<f64> },
    /// `values[mask]` is `F` of the subset whose bit `i` marks element `i`.
    ExplicitTable { values: Vec<f64> },
}

/// An evaluation oracle for a set function with `F(∅) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmodularFunction {
    ground: GroundSet,
    family: Family,
}

/// Order in which tied coordinates are visited by the greedy sort.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieRule {
    #[default]
    AscendingIndex,
    DescendingIndex,
}

/// A greedy vertex together with the permutation that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyResult {
    pub permutation: Vec<usize>,
    pub vertex: Vector,
    /// `vertexᵀx`, which is the Lovász extension at `x`.
    pub value: f64,
}

impl SubmodularFunction {
    pub fn permutahedron(n: usize) -> Result<Self> {
        Ok(SubmodularFunction {
            ground: GroundSet::new(n)?,
            family: Family::Permutahedron,
        })
    }

    pub fn cardinality_truncation(n: usize, k: usize) -> Result<Self> {
        Ok(SubmodularFunction {
            ground: GroundSet::new(n)?,
            family: Family::CardinalityTruncation { k },
        })
    }

    /// Maximal-element function stored shifted by `min h` so that `F(∅) = 0`.
    pub fn maximal_element(h: Vec<f64>) -> Result<Self> {
        let ground = GroundSet::new(h.len())?;
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("maximal-element weights must be finite"));
        }
        Ok(SubmodularFunction {
            ground,
            family: Family::MaximalElement { h },
        })
    }

    /// Explicit table of `2^n` values. Submodularity is not checked here;
    /// use [`SubmodularFunction::check_submodular`].
    pub fn explicit_table(n: usize, values: Vec<f64>) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        if n > EXPLICIT_TABLE_MAX_N {
            return Err(Error::TooLarge {
                what: "explicit table",
                n,
                limit: EXPLICIT_TABLE_MAX_N,
            });
        }
        if values.len() != 1 << n {
            return Err(Error::invalid(format!(
                "explicit table for n = {n} needs {} entries, got {}",
                1usize << n,
                values.len()
            )));
        }
        if values[0] != 0.0 {
            return Err(Error::invalid("explicit table must have F(∅) = 0"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("explicit table entries must be finite"));
        }
        Ok(SubmodularFunction {
            ground,
            family: Family::ExplicitTable { values },
        })
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Value of a function of the cardinality only.
    fn of_cardinality(&self, k: usize) -> f64 {
        let n = self.n();
        match self.family {
            // k(2n−k+1)/2 is an integer; computing it in integers keeps it exact.
            Family::Permutahedron => ((k * (2 * n + 1 - k)) / 2) as f64,
            Family::CardinalityTruncation { k: cap } => k.min(cap) as f64,
            _ => unreachable!("not a cardinality-based family"),
        }
    }

    /// `F(S)`. Repeated elements are ignored.
    pub fn eval_set(&self, subset: &[usize]) -> Result<f64> {
        let n = self.n();
        if let Some(&bad) = subset.iter().find(|&&e| e >= n) {
            return Err(Error::invalid(format!(
                "element {bad} is outside the ground set 0..{n}"
            )));
        }
        let distinct: HashSet<usize> = subset.iter().copied().collect();
        Ok(match &self.family {
            Family::Permutahedron | Family::CardinalityTruncation { .. } => {
                self.of_cardinality(distinct.len())
            }
            Family::MaximalElement { h } => match distinct.iter().map(|&e| h[e]).reduce(f64::max) {
                Some(top) => top - min_of(h),
                None => 0.0,
            },
            Family::ExplicitTable { values } => {
                let mask = distinct.iter().fold(0usize, |m, &e| m | (1 << e));
                values[mask]
            }
        })
    }

    /// `F` of the subset encoded by `mask`. Only meaningful for `n < 64`.
    pub(crate) fn eval_mask(&self, mask: u64) -> f64 {
        match &self.family {
            Family::Permutahedron | Family::CardinalityTruncation { .. } => {
                self.of_cardinality(mask.count_ones() as usize)
            }
            Family::MaximalElement { h } => {
                if mask == 0 {
                    return 0.0;
                }
                let top = (0..h.len())
                    .filter(|&e| mask >> e & 1 == 1)
                    .map(|e| h[e])
                    .fold(f64::NEG_INFINITY, f64::max);
                top - min_of(h)
            }
            Family::ExplicitTable { values } => values[mask as usize],
        }
    }

    /// `F({π₁..π_k})` for `k = 0..=n`, evaluated incrementally along `order`.
    fn prefix_values(&self, order: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(0.0);
        match &self.family {
            Family::Permutahedron | Family::CardinalityTruncation { .. } => {
                out.extend((1..=order.len()).map(|k| self.of_cardinality(k)));
            }
            Family::MaximalElement { h } => {
                let floor = min_of(h);
                let mut top = f64::NEG_INFINITY;
                for &e in order {
                    top = top.max(h[e]);
                    out.push(top - floor);
                }
            }
            Family::ExplicitTable { values } => {
                let mut mask = 0usize;
                for &e in order {
                    mask |= 1 << e;
                    out.push(values[mask]);
                }
            }
        }
        out
    }

    /// Marginal-gain vertex of `B(F)` for the given permutation.
    pub fn vertex_for_permutation(&self, order: &[usize]) -> Vector {
        let prefix = self.prefix_values(order);
        let mut v = Vector::zeros(self.n());
        for (k, &e) in order.iter().enumerate() {
            v[e] = prefix[k + 1] - prefix[k];
        }
        v
    }

    /// Edmonds' greedy algorithm: a vertex maximizing `wᵀx` over `B(F)`.
    pub fn greedy_vertex(&self, x: &Vector, tie: TieRule) -> Result<GreedyResult> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::invalid(format!(
                "point has dimension {}, ground set has {n} elements",
                x.len()
            )));
        }
        if x.iter().any(|c| c.is_nan()) {
            return Err(Error::invalid("NaN in greedy input"));
        }
        let mut permutation: Vec<usize> = match tie {
            TieRule::AscendingIndex => (0..n).collect(),
            TieRule::DescendingIndex => (0..n).rev().collect(),
        };
        // Stable: tied coordinates keep the tie-rule order.
        permutation.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).expect("NaN filtered above"));
        let vertex = self.vertex_for_permutation(&permutation);
        let value = vertex.dot(x);
        Ok(GreedyResult {
            permutation,
            vertex,
            value,
        })
    }

    /// The Lovász extension `f(x)`.
    pub fn lovasz_value(&self, x: &Vector) -> Result<f64> {
        Ok(self.greedy_vertex(x, TieRule::default())?.value)
    }

    /// All distinct vertices of `B(F)`, in order of first appearance over
    /// the lexicographic list of permutations.
    pub fn enumerate_vertices(&self) -> Result<Vec<Vector>> {
        let n = self.n();
        if n > ENUMERATION_MAX_N {
            return Err(Error::TooLarge {
                what: "vertex enumeration",
                n,
                limit: ENUMERATION_MAX_N,
            });
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for order in (0..n).permutations(n) {
            let v = self.vertex_for_permutation(&order);
            if seen.insert(VertexKey::of(&v)) {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Whether `w ∈ B(F)`: `w(A) ≤ F(A) + tol` for every `A` and `|w(V) − F(V)| ≤ tol`.
    pub fn check_membership(&self, w: &Vector, tol: f64) -> Result<bool> {
        let n = self.n();
        if n > MEMBERSHIP_MAX_N {
            return Err(Error::TooLarge {
                what: "membership check",
                n,
                limit: MEMBERSHIP_MAX_N,
            });
        }
        if w.len() != n {
            return Err(Error::invalid("membership point has the wrong dimension"));
        }
        let full = (1u64 << n) - 1;
        let mut sums = vec![0.0; 1 << n];
        for mask in 1..=full {
            let low = mask.trailing_zeros() as usize;
            sums[mask as usize] = sums[(mask & (mask - 1)) as usize] + w[low];
            if sums[mask as usize] > self.eval_mask(mask) + tol {
                return Ok(false);
            }
        }
        Ok((sums[full as usize] - self.eval_mask(full)).abs() <= tol)
    }

    /// Exhaustive check of `F(A) + F(B) ≥ F(A∪B) + F(A∩B)` over all pairs.
    pub fn check_submodular(&self) -> Result<bool> {
        let n = self.n();
        if n > SUBMODULARITY_CHECK_MAX_N {
            return Err(Error::TooLarge {
                what: "submodularity check",
                n,
                limit: SUBMODULARITY_CHECK_MAX_N,
            });
        }
        let table: Vec<f64> = (0..1u64 << n).map(|m| self.eval_mask(m)).collect();
        let scale = 1.0 + table.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let slack = 1e-12 * scale;
        for a in 0..table.len() {
            for b in (a + 1)..table.len() {
                if table[a] + table[b] + slack < table[a | b] + table[a & b] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn min_of(h: &[f64]) -> f64 {
    h.iter().copied().fold(f64::INFINITY, f64::min)
}
