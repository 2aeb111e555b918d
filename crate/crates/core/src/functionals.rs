//! Yamabe functional, warped-product scalar curvature and a preconditioned
//! descent that produces upper bounds for the discrete Yamabe infimum.
//!
//! For `f` on an `m`-dimensional manifold with scalar curvature `s`,
//!
//! ```text
//! Y(f) = (a_m E(f) + Σ μ_i s_i f_i²) / (Σ μ_i |f_i|^{p_m})^{2/p_m},
//! a_m = 4(m−1)/(m−2),  p_m = 2m/(m−2),
//! ```
//!
//! where `E` is the discrete Dirichlet energy.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{DiscreteManifold, ScalarField};
use crate::numeric::{seeded_rng, symmetric_uniform};
use crate::spectrum::operator::SparseCholesky;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YamabeConstants {
    pub m_total: usize,
    pub a: f64,
    pub p: f64,
}

pub fn yamabe_constants(m: usize) -> Result<YamabeConstants> {
    if m < 3 {
        return Err(Error::InvalidDimension(m));
    }
    let mf = m as f64;
    Ok(YamabeConstants {
        m_total: m,
        a: 4.0 * (mf - 1.0) / (mf - 2.0),
        p: 2.0 * mf / (mf - 2.0),
    })
}

/// Scalar curvature of `base ×_ρ M^m` at each base vertex, for a fiber of
/// constant scalar curvature `fiber_scalar`:
///
/// `s_h + s_g/ρ² + (2m/ρ) Δρ − m(m−1) |dρ|²/ρ²`
///
/// with `Δ = B⁻¹K` the nonnegative graph Laplacian and `|dρ|²` at a vertex
/// the half-share of its incident edge energy divided by its measure.
pub fn warped_scalar_curvature(
    base: &DiscreteManifold,
    fiber_dim: usize,
    fiber_scalar: f64,
    base_scalar: &[f64],
    rho: &[f64],
) -> Result<Vec<f64>> {
    base.check_len(base_scalar.len())?;
    base.check_len(rho.len())?;
    if let Some(r) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::domain(format!(
            "warping function must be positive, got {r}"
        )));
    }
    if base.measures().iter().any(|&mu| mu <= 0.0) {
        return Err(Error::domain("base vertices need positive measure"));
    }
    let n = base.vertex_count();
    let mut lap = vec![0.0; n];
    let mut grad2 = vec![0.0; n];
    for e in base.edges() {
        let d = rho[e.i] - rho[e.j];
        lap[e.i] += e.weight * d;
        lap[e.j] -= e.weight * d;
        let share = 0.5 * e.weight * d * d;
        grad2[e.i] += share;
        grad2[e.j] += share;
    }
    let m = fiber_dim as f64;
    Ok((0..n)
        .map(|i| {
            let mu = base.measures()[i];
            let r = rho[i];
            base_scalar[i] + fiber_scalar / (r * r) + 2.0 * m * lap[i] / (mu * r)
                - m * (m - 1.0) * grad2[i] / (mu * r * r)
        })
        .collect())
}

/// Repeats a per-base-vertex quantity over every fiber of a product.
pub fn expand_over_fibers(product: &DiscreteManifold, per_base: &[f64]) -> Result<Vec<f64>> {
    let st = product.structure().ok_or(Error::Structure)?;
    st.base.check_len(per_base.len())?;
    let nf = st.fiber_vertex_count();
    Ok(per_base
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, nf))
        .collect())
}

pub fn yamabe_functional(
    manifold: &DiscreteManifold,
    field: &ScalarField,
    scalar_curvature: &[f64],
    m_total: usize,
) -> Result<f64> {
    let c = yamabe_constants(m_total)?;
    manifold.check_len(field.len())?;
    manifold.check_len(scalar_curvature.len())?;
    let (num, den) = quotient_parts(manifold, field.values(), scalar_curvature, &c);
    if !(den > 0.0) {
        return Err(Error::DegenerateField(
            "Yamabe quotient of a field vanishing on the support".into(),
        ));
    }
    Ok(num / den.powf(2.0 / c.p))
}

fn quotient_parts(m: &DiscreteManifold, f: &[f64], s: &[f64], c: &YamabeConstants) -> (f64, f64) {
    let mut num = c.a * m.energy_of(f);
    let mut den = 0.0;
    for ((&fi, &si), &mu) in f.iter().zip(s).zip(m.measures()) {
        num += mu * si * fi * fi;
        den += mu * fi.abs().powf(c.p);
    }
    (num, den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DescentStep {
    pub iter: usize,
    pub value: f64,
    pub step: f64,
}

/// CSV with columns `iter,value,step`.
pub fn trace_to_csv(trace: &[DescentStep]) -> String {
    let mut s = String::from("iter,value,step\n");
    for t in trace {
        let _ = writeln!(s, "{},{},{}", t.iter, t.value, t.step);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentOptions {
    pub iters: usize,
    /// Initial step along the preconditioned direction.
    pub step: f64,
    pub seed: u64,
    /// Backtrack by halving until the value decreases. Without it every step
    /// is taken at full length.
    pub line_search: bool,
    /// Stop once an accepted step improves the value by less than this
    /// relative amount.
    pub rtol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            iters: 400,
            step: 1.0,
            seed: 1,
            line_search: true,
            rtol: 1e-12,
        }
    }
}

/// Best iterate of the descent. `value` bounds the discrete Yamabe infimum
/// from above and is never the infimum itself.
#[derive(Clone, Debug, Serialize)]
pub struct YamabeUpperBound {
    pub value: f64,
    pub field: ScalarField,
    pub trace: Vec<DescentStep>,
}

const MAX_INCREASES: usize = 50;
const MAX_HALVINGS: usize = 40;

/// Descent on `Y` from `1 + 0.01·noise`, preconditioned by `(aK + B)⁻¹`
/// and renormalised to unit `L^p` norm after every step.
pub fn yamabe_descent(
    manifold: &DiscreteManifold,
    scalar_curvature: &[f64],
    m_total: usize,
    opts: &DescentOptions,
) -> Result<YamabeUpperBound> {
    let c = yamabe_constants(m_total)?;
    manifold.check_len(scalar_curvature.len())?;
    if !(opts.step > 0.0) {
        return Err(Error::domain("descent step must be positive"));
    }
    let n = manifold.vertex_count();
    let mut upper: Vec<(usize, usize, f64)> = manifold
        .measures()
        .iter()
        .enumerate()
        .map(|(i, &mu)| (i, i, mu))
        .collect();
    for e in manifold.edges() {
        let w = c.a * e.weight;
        let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
        upper.extend([(i, i, w), (j, j, w), (i, j, -w)]);
    }
    let chol = SparseCholesky::new(n, &upper)?;

    let mut rng = seeded_rng(opts.seed);
    let mut f: Vec<f64> = symmetric_uniform(&mut rng, n)
        .into_iter()
        .map(|u| 1.0 + 0.01 * u)
        .collect();
    normalize(manifold, &mut f, c.p);
    let mut value = eval(manifold, &f, scalar_curvature, &c);
    let mut best = (f.clone(), value);
    let mut trace = vec![DescentStep {
        iter: 0,
        value,
        step: 0.0,
    }];
    let mut increases = 0;
    let mut t = opts.step;

    for iter in 1..=opts.iters {
        let mut d = gradient(manifold, &f, scalar_curvature, &c);
        for v in &mut d {
            *v = -*v;
        }
        chol.solve_in_place(&mut d, 1);

        let trial = |t: f64| {
            let mut g: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            normalize(manifold, &mut g, c.p);
            let v = eval(manifold, &g, scalar_curvature, &c);
            (g, v)
        };
        let (next, v, taken) = if opts.line_search {
            t = (2.0 * t).min(opts.step);
            let mut found = None;
            for _ in 0..MAX_HALVINGS {
                let (g, v) = trial(t);
                if v < value {
                    found = Some((g, v));
                    break;
                }
                t *= 0.5;
            }
            match found {
                Some((g, v)) => (g, v, t),
                // No decrease at any step length: stationary to roundoff.
                None => break,
            }
        } else {
            let (g, v) = trial(opts.step);
            (g, v, opts.step)
        };

        if v < value {
            increases = 0;
        } else {
            increases += 1;
        }
        let improvement = (value - v) / value.abs().max(f64::MIN_POSITIVE);
        f = next;
        value = v;
        trace.push(DescentStep {
            iter,
            value,
            step: taken,
        });
        if value < best.1 {
            best = (f.clone(), value);
        }
        if increases >= MAX_INCREASES {
            return Err(Error::Descent { trace });
        }
        if opts.line_search && improvement < opts.rtol {
            break;
        }
    }
    Ok(YamabeUpperBound {
        value: best.1,
        field: ScalarField::new(best.0)?,
        trace,
    })
}

fn eval(m: &DiscreteManifold, f: &[f64], s: &[f64], c: &YamabeConstants) -> f64 {
    let (num, den) = quotient_parts(m, f, s, c);
    let v = num / den.powf(2.0 / c.p);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn normalize(m: &DiscreteManifold, f: &mut [f64], p: f64) {
    let den: f64 = f
        .iter()
        .zip(m.measures())
        .map(|(v, mu)| mu * v.abs().powf(p))
        .sum();
    if den > 0.0 && den.is_finite() {
        let inv = den.powf(-1.0 / p);
        for v in f {
            *v *= inv;
        }
    }
}

/// `∇Y = D^{−2/p} (∇N − (2/p)(N/D) ∇D)`.
fn gradient(m: &DiscreteManifold, f: &[f64], s: &[f64], c: &YamabeConstants) -> Vec<f64> {
    let (num, den) = quotient_parts(m, f, s, c);
    let mut kf = vec![0.0; f.len()];
    for e in m.edges() {
        let d = e.weight * (f[e.i] - f[e.j]);
        kf[e.i] += d;
        kf[e.j] -= d;
    }
    let scale = den.powf(-2.0 / c.p);
    let ratio = 2.0 / c.p * num / den;
    (0..f.len())
        .map(|i| {
            let mu = m.measures()[i];
            let grad_n = 2.0 * c.a * kf[i] + 2.0 * mu * s[i] * f[i];
            let grad_d = c.p * mu * f[i].abs().powf(c.p - 2.0) * f[i];
            scale * (grad_n - ratio * grad_d)
        })
        .collect()
}
