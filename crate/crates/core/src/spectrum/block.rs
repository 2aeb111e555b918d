//! Tall column-major blocks and the small dense kernels the block
//! eigensolvers share.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::operator::Operator;
use crate::numeric::symmetric_uniform;

#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub n: usize,
    pub p: usize,
    pub data: Vec<f64>,
}

impl Block {
    pub fn zeros(n: usize, p: usize) -> Self {
        Block {
            n,
            p,
            data: vec![0.0; n * p],
        }
    }

    pub fn random(op: &Operator, p: usize, rng: &mut impl Rng) -> Self {
        let n = op.n();
        let mut b = Block {
            n,
            p,
            data: symmetric_uniform(rng, n * p),
        };
        b.deflate(op);
        b
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn deflate(&mut self, op: &Operator) {
        for j in 0..self.p {
            op.deflate(self.col_mut(j));
        }
    }

    /// Horizontal concatenation.
    pub fn concat(parts: &[&Block]) -> Block {
        let n = parts[0].n;
        let mut data = Vec::with_capacity(parts.iter().map(|b| b.data.len()).sum());
        for b in parts {
            data.extend_from_slice(&b.data);
        }
        Block {
            n,
            p: data.len() / n,
            data,
        }
    }

    /// `self · c` for a `p × q` coefficient matrix.
    pub fn times(&self, c: &DMatrix<f64>) -> Block {
        let q = c.ncols();
        let mut out = Block::zeros(self.n, q);
        for j in 0..q {
            let dst = &mut out.data[j * self.n..(j + 1) * self.n];
            for k in 0..self.p {
                let coef = c[(k, j)];
                if coef != 0.0 {
                    for (d, s) in dst.iter_mut().zip(self.col(k)) {
                        *d += coef * s;
                    }
                }
            }
        }
        out
    }

    pub fn apply_stiffness(&self, op: &Operator) -> Block {
        let mut out = Block::zeros(self.n, self.p);
        for j in 0..self.p {
            op.stiffness
                .apply(self.col(j), &mut out.data[j * self.n..(j + 1) * self.n]);
        }
        out
    }

    pub fn apply_mass(&self, op: &Operator) -> Block {
        let mut out = self.clone();
        for j in 0..self.p {
            for (v, m) in out.col_mut(j).iter_mut().zip(&op.mass) {
                *v *= m;
            }
        }
        out
    }

    /// `selfᵀ · other`.
    pub fn inner(&self, other: &Block) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, other.p, |i, j| dot(self.col(i), other.col(j)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenpairs of a symmetric matrix sorted by ascending eigenvalue.
pub(crate) fn sorted_eigen(mut h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = 0.5 * (&h + h.transpose());
    h.copy_from(&sym);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    (values, vectors)
}

/// `B`-orthonormalises the columns by the SVQB construction, discarding
/// numerically dependent directions. Returns the orthonormal block, which
/// may have fewer columns than the input.
pub(crate) fn svqb(y: &Block, op: &Operator) -> Block {
    let mut cur = y.clone();
    for _ in 0..2 {
        let g = cur.inner(&cur.apply_mass(op));
        let d: Vec<f64> = (0..g.nrows())
            .map(|i| {
                if g[(i, i)] > 0.0 {
                    g[(i, i)].powf(-0.5)
                } else {
                    0.0
                }
            })
            .collect();
        let scaled = DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| d[i] * g[(i, j)] * d[j]);
        let (vals, vecs) = sorted_eigen(scaled);
        let top = vals.last().copied().unwrap_or(0.0);
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&k| vals[k] > 1e-13 * top.max(f64::MIN_POSITIVE))
            .collect();
        let c = DMatrix::from_fn(g.nrows(), keep.len(), |i, j| {
            d[i] * vecs[(i, keep[j])] / vals[keep[j]].sqrt()
        });
        cur = cur.times(&c);
    }
    cur
}

/// Relative residual `‖K x - θ B x‖ / ‖B x‖` from a precomputed `K x`.
pub(crate) fn residual_norm(op: &Operator, theta: f64, x: &[f64], kx: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() {
        let bx = op.mass[i] * x[i];
        num += (kx[i] - theta * bx).powi(2);
        den += bx * bx;
    }
    (num / den).sqrt()
}
