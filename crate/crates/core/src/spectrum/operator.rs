//! Stiffness and mass forms restricted to the active vertex set, plus the
//! sparse Cholesky factorisation shared by the eigensolver and the Yamabe
//! descent preconditioner.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LltRef, SymbolicCholesky};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, MatMut, Par, Side};

use crate::error::{Error, Result};
use crate::manifold::DiscreteManifold;

/// Symmetric matrix in compressed-row form with both triangles stored.
#[derive(Clone, Debug)]
pub(crate) struct SymCsr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymCsr {
    /// Builds from `(i, j, v)` entries with `i <= j`; duplicates are summed.
    pub(crate) fn from_upper(n: usize, upper: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in upper {
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut last = usize::MAX;
            for (c, v) in row {
                if c == last {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = c;
                }
            }
            row_ptr.push(cols.len());
        }
        SymCsr {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yi = acc;
        }
    }

    pub(crate) fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    /// Row `i` as `(column, value)` pairs.
    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    /// Upper-triangle entries of `alpha * self + diag(shift)`.
    pub(crate) fn shifted_upper(&self, alpha: f64, shift: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.vals.len() / 2 + self.n);
        for i in 0..self.n {
            let mut has_diag = false;
            for (j, v) in self.row(i) {
                if j > i {
                    out.push((i, j, alpha * v));
                } else if j == i {
                    out.push((i, i, alpha * v + shift[i]));
                    has_diag = true;
                }
            }
            if !has_diag {
                out.push((i, i, shift[i]));
            }
        }
        out
    }
}

/// Generalised problem `K f = λ B f` on the active vertices.
#[derive(Clone, Debug)]
pub(crate) struct Operator {
    /// Active vertex ids in the full manifold.
    pub active: Vec<usize>,
    pub stiffness: SymCsr,
    pub mass: Vec<f64>,
    pub closed: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl Operator {
    /// Closed problem: every vertex is active and boundary flags are ignored.
    pub(crate) fn closed(m: &DiscreteManifold) -> Result<Self> {
        let n = m.vertex_count();
        if let Some(i) = m.measures().iter().position(|&mu| mu <= 0.0) {
            return Err(Error::mesh(format!(
                "closed problems need positive measures; vertex {i} has none"
            )));
        }
        if n < 2 {
            return Err(Error::DegenerateDomain(
                "a closed problem needs at least two vertices".into(),
            ));
        }
        let mut uf = UnionFind::new(n);
        let mut upper = Vec::with_capacity(m.edges().len() + n);
        let mut diag = vec![0.0; n];
        for e in m.edges() {
            if e.weight > 0.0 {
                uf.union(e.i, e.j);
                upper.push((e.i.min(e.j), e.i.max(e.j), -e.weight));
                diag[e.i] += e.weight;
                diag[e.j] += e.weight;
            }
        }
        let components = (0..n).filter(|&v| uf.find(v) == v).count();
        if components > 1 {
            return Err(Error::Topology(format!(
                "graph has {components} connected components"
            )));
        }
        upper.extend(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
        Ok(Operator {
            active: (0..n).collect(),
            stiffness: SymCsr::from_upper(n, &upper),
            mass: m.measures().to_vec(),
            closed: true,
        })
    }

    /// Dirichlet problem on the vertices not flagged as boundary.
    pub(crate) fn dirichlet(m: &DiscreteManifold) -> Result<Self> {
        let n = m.vertex_count();
        let boundary = m.boundary();
        let active: Vec<usize> = (0..n).filter(|&v| !boundary[v]).collect();
        if active.is_empty() {
            return Err(Error::DegenerateDomain("no interior vertices".into()));
        }
        if active.len() == n {
            return Err(Error::DegenerateDomain("no boundary vertices".into()));
        }
        let mut local = vec![usize::MAX; n];
        for (k, &v) in active.iter().enumerate() {
            local[v] = k;
        }
        let na = active.len();
        let mut uf = UnionFind::new(na);
        let mut touches = vec![false; na];
        let mut diag = vec![0.0; na];
        let mut upper = Vec::with_capacity(m.edges().len() + na);
        for e in m.edges().iter().filter(|e| e.weight > 0.0) {
            match (local[e.i], local[e.j]) {
                (usize::MAX, usize::MAX) => {}
                (a, usize::MAX) | (usize::MAX, a) => {
                    diag[a] += e.weight;
                    touches[a] = true;
                }
                (a, b) => {
                    uf.union(a, b);
                    upper.push((a.min(b), a.max(b), -e.weight));
                    diag[a] += e.weight;
                    diag[b] += e.weight;
                }
            }
        }
        let mut anchored = vec![false; na];
        for a in 0..na {
            if touches[a] {
                let r = uf.find(a);
                anchored[r] = true;
            }
        }
        for a in 0..na {
            let r = uf.find(a);
            if !anchored[r] {
                return Err(Error::Topology(format!(
                    "interior component containing vertex {} does not reach the boundary",
                    active[a]
                )));
            }
        }
        upper.extend(diag.iter().enumerate().map(|(i, &d)| (i, i, d)));
        Ok(Operator {
            stiffness: SymCsr::from_upper(na, &upper),
            mass: active.iter().map(|&v| m.measures()[v]).collect(),
            active,
            closed: false,
        })
    }

    pub(crate) fn n(&self) -> usize {
        self.active.len()
    }

    /// Removes the `B`-weighted mean so that `Σ μ_i x_i = 0`.
    pub(crate) fn deflate(&self, x: &mut [f64]) {
        if !self.closed {
            return;
        }
        let num: f64 = self.mass.iter().zip(x.iter()).map(|(m, v)| m * v).sum();
        let den: f64 = self.mass.iter().sum();
        let c = num / den;
        for v in x.iter_mut() {
            *v -= c;
        }
    }

    /// Scatters an active-set vector into a full vertex vector, zero on
    /// inactive vertices.
    pub(crate) fn expand(&self, x: &[f64], total: usize) -> Vec<f64> {
        let mut out = vec![0.0; total];
        for (&v, &val) in self.active.iter().zip(x) {
            out[v] = val;
        }
        out
    }

    pub(crate) fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let mut kx = vec![0.0; self.n()];
        self.stiffness.apply(x, &mut kx);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.n() {
            let bx = self.mass[i] * x[i];
            num += (kx[i] - lambda * bx).powi(2);
            den += bx * bx;
        }
        (num / den).sqrt()
    }
}

/// Sparse `L Lᵀ` factorisation of a symmetric positive definite matrix.
pub(crate) struct SparseCholesky {
    n: usize,
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    /// Symbolic analysis only; returns the factor size so callers can decide
    /// whether the numeric factorisation is affordable.
    pub(crate) fn analyze(
        n: usize,
        upper: &[(usize, usize, f64)],
    ) -> Result<(SymbolicCholesky<usize>, SparseColMat<usize, f64>)> {
        let triplets: Vec<Triplet<usize, usize, f64>> = upper
            .iter()
            .map(|&(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::mesh(format!("sparse assembly failed: {e:?}")))?;
        let symbolic = factorize_symbolic_cholesky(
            a.symbolic(),
            Side::Upper,
            Default::default(),
            Default::default(),
        )
        .map_err(|e| Error::mesh(format!("symbolic factorisation failed: {e:?}")))?;
        Ok((symbolic, a))
    }

    pub(crate) fn factor(
        symbolic: SymbolicCholesky<usize>,
        a: &SparseColMat<usize, f64>,
    ) -> Result<Self> {
        let par = Par::Seq;
        let mut values = vec![0.0; symbolic.len_val()];
        let mut mem =
            MemBuffer::new(symbolic.factorize_numeric_llt_scratch::<f64>(par, Default::default()));
        symbolic
            .factorize_numeric_llt(
                &mut values,
                a.as_ref(),
                Side::Upper,
                Default::default(),
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|e| Error::mesh(format!("matrix is not positive definite: {e:?}")))?;
        Ok(SparseCholesky {
            n: a.nrows(),
            symbolic,
            values,
        })
    }

    pub(crate) fn new(n: usize, upper: &[(usize, usize, f64)]) -> Result<Self> {
        let (symbolic, a) = Self::analyze(n, upper)?;
        Self::factor(symbolic, &a)
    }

    /// Solves in place for `k` right-hand sides stored column-major.
    pub(crate) fn solve_in_place(&self, rhs: &mut [f64], k: usize) {
        let par = Par::Seq;
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(k, par));
        LltRef::new(&self.symbolic, &self.values).solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(rhs, self.n, k),
            par,
            MemStack::new(&mut mem),
        );
    }
}
