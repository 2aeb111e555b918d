//! Dense solve for small problems and shift-inverted subspace iteration for
//! everything the sparse factorisation can afford.

use nalgebra::DMatrix;
use rand::Rng;

use super::block::{residual_norm, sorted_eigen, svqb, Block};
use super::operator::{Operator, SparseCholesky};
use super::{Iterate, SolverOptions};

/// Full generalised eigendecomposition through `B^{-1/2} K B^{-1/2}`.
pub(crate) fn dense(op: &Operator) -> Iterate {
    let n = op.n();
    let s: Vec<f64> = op.mass.iter().map(|m| m.sqrt()).collect();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for (j, v) in op.stiffness.row(i) {
            c[(i, j)] = v / (s[i] * s[j]);
        }
    }
    let (vals, vecs) = sorted_eigen(c);
    let total: f64 = op.mass.iter().sum();
    let pick = if op.closed {
        // The constant mode maps to B^{1/2}·1; skip the eigenvector most
        // aligned with it.
        let u: Vec<f64> = s.iter().map(|x| x / total.sqrt()).collect();
        let align = |k: usize| (0..n).map(|i| vecs[(i, k)] * u[i]).sum::<f64>().abs();
        let constant = (0..n)
            .max_by(|&a, &b| align(a).total_cmp(&align(b)))
            .unwrap();
        (0..n).find(|&k| k != constant).unwrap()
    } else {
        0
    };
    let x: Vec<f64> = (0..n).map(|i| vecs[(i, pick)] / s[i]).collect();
    Iterate {
        lambda: vals[pick],
        x,
        iterations: 1,
    }
}

pub(crate) fn shift(op: &Operator) -> f64 {
    if !op.closed {
        return 0.0;
    }
    let diag = op.stiffness.diagonal();
    let scale = diag
        .iter()
        .zip(&op.mass)
        .fold(0.0f64, |acc, (k, m)| acc.max(k / m));
    1e-6 * scale.max(f64::MIN_POSITIVE)
}

/// Fills a rank-deficient orthonormal block back up to `p` columns.
pub(crate) fn refill(mut y: Block, p: usize, op: &Operator, rng: &mut impl Rng) -> Block {
    for _ in 0..8 {
        if y.p >= p {
            break;
        }
        let extra = Block::random(op, p - y.p, rng);
        y = svqb(&Block::concat(&[&y, &extra]), op);
    }
    y
}

pub(crate) fn subspace_iteration(
    op: &Operator,
    chol: &SparseCholesky,
    opts: &SolverOptions,
    rng: &mut impl Rng,
) -> Result<Iterate, Iterate> {
    let n = op.n();
    let p = opts
        .block
        .clamp(1, n.saturating_sub(usize::from(op.closed)).max(1));
    let mut x = refill(svqb(&Block::random(op, p, rng), op), p, op, rng);
    let mut best: Option<(f64, Iterate)> = None;
    for it in 1..=opts.max_iter {
        let mut y = x.apply_mass(op);
        chol.solve_in_place(&mut y.data, y.p);
        y.deflate(op);
        let y = refill(svqb(&y, op), p, op, rng);
        let ky = y.apply_stiffness(op);
        let h = y.inner(&ky);
        let (theta, c) = sorted_eigen(h);
        x = y.times(&c);
        let kx0 = ky.times(&c.columns(0, 1).into_owned());
        let res = residual_norm(op, theta[0], x.col(0), kx0.col(0));
        let current = Iterate {
            lambda: theta[0],
            x: x.col(0).to_vec(),
            iterations: it,
        };
        if res <= opts.tol {
            return Ok(current);
        }
        if best.as_ref().is_none_or(|(r, _)| res < *r) {
            best = Some((res, current));
        }
    }
    Err(best.map(|(_, b)| b).expect("at least one iteration"))
}
