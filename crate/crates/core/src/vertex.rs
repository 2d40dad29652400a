//! Base-polytope vertices and the ordered vertex memories the outer loops keep.

use std::collections::HashSet;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Dense real vector; vertices, primal points and dual points all use it.
pub type Vector = DVector<f64>;

/// Exact identity of a vertex: the bit patterns of its coordinates.
///
/// Greedy marginals of a deterministic set function are computed by the same
/// subtractions every time, so a vertex that reappears is bit-identical to
/// its earlier copy. `-0.0` is folded into `0.0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexKey(Vec<u64>);

impl VertexKey {
    pub fn of(v: &Vector) -> Self {
        VertexKey(v.iter().map(|&c| (c + 0.0).to_bits()).collect())
    }
}

/// Ordered, duplicate-free list of vertices.
///
/// `provenance[k]` is the outer iteration that inserted `vertices[k]`
/// (0 for the initial memory).
#[derive(Clone, Debug, Default)]
pub struct VertexSet {
    vertices: Vec<Vector>,
    provenance: Vec<usize>,
    keys: HashSet<VertexKey>,
}

impl VertexSet {
    /// Builds a set from distinct vertices of equal dimension.
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("vertex set must be non-empty"));
        }
        let dim = vertices[0].len();
        let mut set = VertexSet::default();
        for v in vertices {
            if v.len() != dim {
                return Err(Error::invalid(format!(
                    "vertex of dimension {} in a set of dimension {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid("vertex has a non-finite coordinate"));
            }
            if !set.insert(v, 0) {
                return Err(Error::invalid("vertex set contains an exact duplicate"));
            }
        }
        Ok(set)
    }

    pub(crate) fn empty() -> Self {
        VertexSet::default()
    }

    /// Appends `v` unless an identical vertex is present. Returns whether it was added.
    pub fn insert(&mut self, v: Vector, iteration: usize) -> bool {
        if !self.keys.insert(VertexKey::of(&v)) {
            return false;
        }
        self.vertices.push(v);
        self.provenance.push(iteration);
        true
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.keys.contains(&VertexKey::of(v))
    }

    /// Keeps the vertices at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> VertexSet {
        let mut out = VertexSet::empty();
        for &k in indices {
            out.insert(self.vertices[k].clone(), self.provenance[k]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, |v| v.len())
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn provenance(&self) -> &[usize] {
        &self.provenance
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vector> {
        self.vertices.iter()
    }

    /// Sorted keys; two sets hold the same vertices iff these agree.
    pub fn sorted_keys(&self) -> Vec<VertexKey> {
        let mut keys: Vec<_> = self.keys.iter().cloned().collect();
        keys.sort();
        keys
    }
}

impl std::ops::Index<usize> for VertexSet {
    type Output = Vector;

    fn index(&self, k: usize) -> &Vector {
        &self.vertices[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_zero_is_the_same_vertex() {
        let a = Vector::from_vec(vec![0.0, 1.0]);
        let b = Vector::from_vec(vec![-0.0, 1.0]);
        assert_eq!(VertexKey::of(&a), VertexKey::of(&b));
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        let v = Vector::from_vec(vec![2.0, 1.0]);
        assert!(VertexSet::new(vec![]).is_err());
        assert!(VertexSet::new(vec![v.clone(), v.clone()]).is_err());
        let mut set = VertexSet::new(vec![v.clone()]).unwrap();
        assert!(!set.insert(v, 3));
        assert!(set.insert(Vector::from_vec(vec![1.0, 2.0]), 3));
        assert_eq!(set.provenance(), &[0, 3]);
    }
}
