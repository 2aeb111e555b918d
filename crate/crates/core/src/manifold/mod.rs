//! Measured weighted graphs standing in for Riemannian manifolds and domains.
//!
//! A manifold is a vertex set with a measure per vertex and a nonnegative
//! weight per edge. The Dirichlet energy of a field is `Σ w_ij (f_i - f_j)²`
//! over the edges and integrals are measure-weighted vertex sums. Vertices
//! flagged as boundary carry the Dirichlet condition; they stay in the graph
//! and are only masked when a Dirichlet problem is solved.

mod generators;
pub mod io;

pub use generators::{
    make_circle, make_fibered_product, make_icosphere, make_interval, make_planar_domain,
    make_product, make_radial_model, make_warped_product, GridMask, RadialGrid,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::exact_sum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Bookkeeping for a (warped) product `N ×_ρ M`: vertex `(s, x)` of the
/// product has id `s · n_F + x`.
#[derive(Clone, Debug)]
pub struct ProductStructure {
    pub base: DiscreteManifold,
    pub fiber: DiscreteManifold,
    /// Warping function, one value per base vertex.
    pub rho: Vec<f64>,
    pub fiber_dim: usize,
}

impl ProductStructure {
    pub fn base_vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn fiber_vertex_count(&self) -> usize {
        self.fiber.vertex_count()
    }

    pub fn compose(&self, s: usize, x: usize) -> usize {
        s * self.fiber_vertex_count() + x
    }

    pub fn decompose(&self, v: usize) -> (usize, usize) {
        let nf = self.fiber_vertex_count();
        (v / nf, v % nf)
    }

    /// An edge is vertical when both ends lie in the same fiber.
    pub fn is_vertical(&self, e: &Edge) -> bool {
        let nf = self.fiber_vertex_count();
        e.i / nf == e.j / nf
    }
}

/// Optional extrinsic data: vertex positions and triangles for surface meshes,
/// grid positions for planar domains, `[r, 0, 0]` for radial chains.
#[derive(Clone, Debug, Default)]
pub struct Embedding {
    pub coords: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Clone, Debug)]
pub struct DiscreteManifold {
    dim: usize,
    measures: Vec<f64>,
    edges: Vec<Edge>,
    boundary: Vec<bool>,
    structure: Option<Box<ProductStructure>>,
    embedding: Option<Embedding>,
}

/// Vertex-indexed finite values.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ScalarField(Vec<f64>);

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::DegenerateField(format!(
                "non-finite value at vertex {pos}"
            )));
        }
        Ok(ScalarField(values))
    }

    /// Checked construction against the vertex count of `manifold`.
    pub fn on(manifold: &DiscreteManifold, values: Vec<f64>) -> Result<Self> {
        manifold.check_len(values.len())?;
        Self::new(values)
    }

    pub fn from_fn(manifold: &DiscreteManifold, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new((0..manifold.vertex_count()).map(f).collect())
    }

    pub fn constant(manifold: &DiscreteManifold, c: f64) -> Result<Self> {
        Self::new(vec![c; manifold.vertex_count()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl DiscreteManifold {
    /// Validated construction. Measures must be finite and nonnegative, and
    /// positive on every vertex not flagged as boundary; zero-measure
    /// boundary vertices act as pure Dirichlet ghost nodes.
    pub fn new(
        dim: usize,
        measures: Vec<f64>,
        edges: Vec<Edge>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        let n = measures.len();
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if n == 0 {
            return Err(Error::mesh("manifold has no vertices"));
        }
        if boundary.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: boundary.len(),
            });
        }
        for (i, (&mu, &b)) in measures.iter().zip(&boundary).enumerate() {
            let ok = mu.is_finite() && (mu > 0.0 || (b && mu == 0.0));
            if !ok {
                return Err(Error::mesh(format!("invalid measure {mu} at vertex {i}")));
            }
        }
        for e in &edges {
            if e.i >= n || e.j >= n || e.i == e.j {
                return Err(Error::mesh(format!("invalid edge ({}, {})", e.i, e.j)));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::mesh(format!(
                    "invalid weight {} on edge ({}, {})",
                    e.weight, e.i, e.j
                )));
            }
        }
        Ok(DiscreteManifold {
            dim,
            measures,
            edges,
            boundary,
            structure: None,
            embedding: None,
        })
    }

    pub(crate) fn with_structure(mut self, structure: ProductStructure) -> Self {
        self.structure = Some(Box::new(structure));
        self
    }

    pub(crate) fn with_embedding(mut self, embedding: Embedding) -> Self {
        self.embedding = Some(embedding);
        self
    }

    /// Same graph with replaced boundary flags. Product structure and
    /// embedding are kept.
    pub fn with_boundary(&self, boundary: Vec<bool>) -> Result<Self> {
        let mut m = DiscreteManifold::new(
            self.dim,
            self.measures.clone(),
            self.edges.clone(),
            boundary,
        )?;
        m.structure = self.structure.clone();
        m.embedding = self.embedding.clone();
        Ok(m)
    }

    /// Same graph with every boundary flag cleared.
    pub fn without_boundary(&self) -> Result<Self> {
        self.with_boundary(vec![false; self.vertex_count()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.measures.len()
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_closed(&self) -> bool {
        !self.boundary.iter().any(|&b| b)
    }

    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| !b).count()
    }

    pub fn structure(&self) -> Option<&ProductStructure> {
        self.structure.as_deref()
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    pub fn coords(&self) -> Option<&[[f64; 3]]> {
        self.embedding.as_ref().map(|e| e.coords.as_slice())
    }

    pub fn total_measure(&self) -> f64 {
        exact_sum(self.measures.iter().copied())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.vertex_count() {
            return Err(Error::Shape {
                expected: self.vertex_count(),
                got: len,
            });
        }
        Ok(())
    }

    /// `Σ μ_i f_i^p`, with `f_i^p` taken literally for integer `p` (so odd
    /// powers keep the sign) and as `|f_i|^p` otherwise.
    pub fn integrate(&self, field: &ScalarField, power: f64) -> Result<f64> {
        self.check_len(field.len())?;
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::domain(format!(
                "power must be positive, got {power}"
            )));
        }
        let integer = power.fract() == 0.0 && power <= i32::MAX as f64;
        let total = self
            .measures
            .iter()
            .zip(field.values())
            .map(|(&mu, &f)| {
                let v = if integer {
                    f.powi(power as i32)
                } else {
                    f.abs().powf(power)
                };
                mu * v
            })
            .sum();
        Ok(total)
    }

    /// `Σ_edges w_ij (f_i - f_j)²`.
    pub fn dirichlet_energy(&self, field: &ScalarField) -> Result<f64> {
        self.check_len(field.len())?;
        Ok(self.energy_of(field.values()))
    }

    pub(crate) fn energy_of(&self, f: &[f64]) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                let d = f[e.i] - f[e.j];
                e.weight * d * d
            })
            .sum()
    }

    /// Vertex adjacency lists over positive-weight edges.
    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for e in self.edges.iter().filter(|e| e.weight > 0.0) {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tri() -> DiscreteManifold {
        let edges = vec![
            Edge {
                i: 0,
                j: 1,
                weight: 1.0,
            },
            Edge {
                i: 1,
                j: 2,
                weight: 2.0,
            },
            Edge {
                i: 0,
                j: 2,
                weight: 0.5,
            },
        ];
        DiscreteManifold::new(2, vec![1.0, 2.0, 3.0], edges, vec![false; 3]).unwrap()
    }

    #[test]
    fn validation_rejects_bad_input() {
        let e = |i, j, w| Edge { i, j, weight: w };
        assert!(DiscreteManifold::new(1, vec![], vec![], vec![]).is_err());
        assert!(DiscreteManifold::new(1, vec![1.0, 0.0], vec![], vec![false; 2]).is_err());
        assert!(DiscreteManifold::new(1, vec![1.0, 0.0], vec![], vec![false, true]).is_ok());
        assert!(
            DiscreteManifold::new(1, vec![1.0, 1.0], vec![e(0, 0, 1.0)], vec![false; 2]).is_err()
        );
        assert!(
            DiscreteManifold::new(1, vec![1.0, 1.0], vec![e(0, 2, 1.0)], vec![false; 2]).is_err()
        );
        assert!(
            DiscreteManifold::new(1, vec![1.0, 1.0], vec![e(0, 1, -1.0)], vec![false; 2]).is_err()
        );
        assert!(DiscreteManifold::new(1, vec![1.0], vec![], vec![false; 2]).is_err());
        assert!(ScalarField::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn integrate_conventions() {
        let m = tri();
        let one = ScalarField::constant(&m, 1.0).unwrap();
        assert_eq!(m.integrate(&one, 1.0).unwrap(), 6.0);
        let neg = ScalarField::constant(&m, -1.0).unwrap();
        assert_eq!(m.integrate(&neg, 3.0).unwrap(), -6.0);
        assert_eq!(m.integrate(&neg, 2.5).unwrap(), 6.0);
        let f = ScalarField::new(vec![1.0, -2.0, 0.5]).unwrap();
        let direct = 1.0 * 1.0 + 2.0 * 4.0 + 3.0 * 0.25;
        assert_eq!(m.integrate(&f, 2.0).unwrap(), direct);
        assert!(m.integrate(&f, 0.0).is_err());
        assert!(m
            .integrate(&ScalarField::new(vec![1.0]).unwrap(), 1.0)
            .is_err());
    }

    #[test]
    fn energy_hand_evaluation() {
        let m = tri();
        let f = ScalarField::new(vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(m.dirichlet_energy(&f).unwrap(), 1.0 + 2.0 * 4.0 + 0.5 * 9.0);
        assert_eq!(
            m.dirichlet_energy(&ScalarField::constant(&m, 7.3).unwrap())
                .unwrap(),
            0.0
        );
    }

    proptest! {
        #[test]
        fn energy_polarization(
            a in -3.0f64..3.0, b in -3.0f64..3.0,
            f in proptest::collection::vec(-1.0f64..1.0, 3),
            g in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let m = tri();
            let e = |v: &[f64]| m.energy_of(v);
            let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
            let sum: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x + y).collect();
            let diff: Vec<f64> = f.iter().zip(&g).map(|(x, y)| x - y).collect();
            let cross = 0.25 * (e(&sum) - e(&diff));
            let expect = a * a * e(&f) + 2.0 * a * b * cross + b * b * e(&g);
            prop_assert!(e(&comb) >= 0.0);
            prop_assert!((e(&comb) - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }
}
