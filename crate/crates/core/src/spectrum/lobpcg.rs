//! Locally optimal block preconditioned conjugate gradient, used when the
//! sparse factorisation would not fit the fill budget.

use rand::Rng;

use super::block::{residual_norm, sorted_eigen, svqb, Block};
use super::direct::{refill, shift};
use super::operator::Operator;
use super::{Iterate, SolverOptions};

pub(crate) fn lobpcg(
    op: &Operator,
    opts: &SolverOptions,
    rng: &mut impl Rng,
) -> Result<Iterate, Iterate> {
    let n = op.n();
    let p = opts
        .block
        .clamp(1, n.saturating_sub(usize::from(op.closed)).max(1));
    let sigma = shift(op);
    // Jacobi preconditioner on K + σB.
    let precond: Vec<f64> = op
        .stiffness
        .diagonal()
        .iter()
        .zip(&op.mass)
        .map(|(k, m)| 1.0 / (k + sigma * m))
        .collect();

    let mut x = refill(svqb(&Block::random(op, p, rng), op), p, op, rng);
    let (mut theta, mut kx) = {
        let kx = x.apply_stiffness(op);
        let (t, c) = sorted_eigen(x.inner(&kx));
        x = x.times(&c);
        (t, kx.times(&c))
    };
    let mut prev: Option<Block> = None;
    let mut best: Option<(f64, Iterate)> = None;
    for it in 1..=opts.max_iter {
        let res0 = residual_norm(op, theta[0], x.col(0), kx.col(0));
        let current = Iterate {
            lambda: theta[0],
            x: x.col(0).to_vec(),
            iterations: it,
        };
        if res0 <= opts.tol {
            return Ok(current);
        }
        if best.as_ref().is_none_or(|(r, _)| res0 < *r) {
            best = Some((res0, current));
        }

        let bx = x.apply_mass(op);
        let mut w = Block::zeros(n, p);
        for j in 0..p {
            let (t, kxc, bxc) = (theta[j], kx.col(j), bx.col(j));
            for (i, wi) in w.col_mut(j).iter_mut().enumerate() {
                *wi = precond[i] * (kxc[i] - t * bxc[i]);
            }
        }
        w.deflate(op);
        let proj = x.inner(&w.apply_mass(op));
        let w = sub(&w, &x.times(&proj));

        let basis = match &prev {
            Some(pb) => Block::concat(&[&x, &w, pb]),
            None => Block::concat(&[&x, &w]),
        };
        let s = svqb(&basis, op);
        let ks = s.apply_stiffness(op);
        let (vals, c) = sorted_eigen(s.inner(&ks));
        let cp = c.columns(0, p.min(c.ncols())).into_owned();
        let new_x = s.times(&cp);
        let new_kx = ks.times(&cp);
        // Search direction: the part of the update outside the old block.
        let overlap = x.inner(&new_x.apply_mass(op));
        let dir = sub(&new_x, &x.times(&overlap));
        prev = Some(svqb(&dir, op)).filter(|b| b.p > 0);
        x = new_x;
        kx = new_kx;
        theta = vals[..x.p].to_vec();
        if x.p < p {
            x = refill(x, p, op, rng);
            kx = x.apply_stiffness(op);
            let (t, c) = sorted_eigen(x.inner(&kx));
            x = x.times(&c);
            kx = kx.times(&c);
            theta = t;
        }
    }
    Err(best.map(|(_, b)| b).expect("at least one iteration"))
}

fn sub(a: &Block, b: &Block) -> Block {
    let mut out = a.clone();
    for (o, v) in out.data.iter_mut().zip(&b.data) {
        *o -= v;
    }
    out
}
