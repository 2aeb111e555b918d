//! First eigenvalue of the graph Laplacian `K f = λ B f`, where `K` is the
//! stiffness form of the edge weights and `B` the diagonal vertex measure.
//!
//! Closed problems minimise the Rayleigh quotient over mean-zero fields;
//! Dirichlet problems over fields vanishing on boundary vertices. Small
//! problems are solved densely, larger ones by shift-inverted subspace
//! iteration on a sparse Cholesky factorisation, falling back to LOBPCG when
//! the factor would exceed the fill budget.

mod block;
mod direct;
mod lobpcg;
pub(crate) mod operator;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{DiscreteManifold, ScalarField};
use crate::numeric::seeded_rng;
use operator::{Operator, SparseCholesky};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    /// Dense below `dense_limit` active vertices, otherwise direct when the
    /// factor fits the fill budget and LOBPCG when it does not.
    #[default]
    Auto,
    Dense,
    Direct,
    Lobpcg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on `‖K f − λ B f‖ / ‖B f‖`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Block width of the iterative solvers.
    pub block: usize,
    pub method: SolverMethod,
    pub dense_limit: usize,
    /// Largest admissible number of stored Cholesky factor entries.
    pub fill_budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 10_000,
            seed: 1,
            block: 8,
            method: SolverMethod::Auto,
            dense_limit: 400,
            // About 1.2 GB of factor values.
            fill_budget: 150_000_000,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Unit `L²` norm; mean zero for closed problems and exactly zero on
    /// boundary vertices for Dirichlet problems.
    pub eigenfield: ScalarField,
    pub iterations: usize,
    pub residual: f64,
    pub seed: u64,
    pub method: SolverMethod,
}

/// Raw solver output on the active vertex set.
pub(crate) struct Iterate {
    /// Ritz value; the reported eigenvalue is recomputed from `x`.
    #[allow(dead_code)]
    pub lambda: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Smallest positive eigenvalue of the closed Laplacian. Boundary flags are
/// ignored.
pub fn lambda1_closed(manifold: &DiscreteManifold, opts: &SolverOptions) -> Result<SpectralResult> {
    solve(manifold, Operator::closed(manifold)?, opts)
}

/// First Dirichlet eigenvalue, with the boundary vertices held at zero.
pub fn lambda1_dirichlet(
    manifold: &DiscreteManifold,
    opts: &SolverOptions,
) -> Result<SpectralResult> {
    solve(manifold, Operator::dirichlet(manifold)?, opts)
}

fn solve(
    manifold: &DiscreteManifold,
    op: Operator,
    opts: &SolverOptions,
) -> Result<SpectralResult> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 || opts.block == 0 {
        return Err(Error::domain(
            "solver options need positive tol, max_iter and block",
        ));
    }
    let mut rng = seeded_rng(opts.seed);
    let n = op.n();
    let use_dense = match opts.method {
        SolverMethod::Dense => true,
        SolverMethod::Auto => n <= opts.dense_limit,
        _ => false,
    } || n <= opts.block + 1;

    let (outcome, method) = if use_dense {
        (Ok(direct::dense(&op)), SolverMethod::Dense)
    } else {
        let lobpcg_only = opts.method == SolverMethod::Lobpcg;
        let factor = if lobpcg_only {
            None
        } else {
            let sigma = direct::shift(&op);
            let shifted: Vec<f64> = op.mass.iter().map(|m| sigma * m).collect();
            let upper = op.stiffness.shifted_upper(1.0, &shifted);
            let (symbolic, a) = SparseCholesky::analyze(n, &upper)?;
            let fits =
                symbolic.len_val() <= opts.fill_budget || opts.method == SolverMethod::Direct;
            if fits {
                Some(SparseCholesky::factor(symbolic, &a)?)
            } else {
                log::info!(
                    "factor needs {} entries, above the budget of {}; using LOBPCG",
                    symbolic.len_val(),
                    opts.fill_budget
                );
                None
            }
        };
        match factor {
            Some(chol) => (
                direct::subspace_iteration(&op, &chol, opts, &mut rng),
                SolverMethod::Direct,
            ),
            None => (lobpcg::lobpcg(&op, opts, &mut rng), SolverMethod::Lobpcg),
        }
    };
    match outcome {
        Ok(it) => {
            let result = finish(manifold, &op, it, opts.seed, method)?;
            if result.residual > opts.tol && method != SolverMethod::Dense {
                return Err(Error::Convergence(Box::new(result)));
            }
            Ok(result)
        }
        Err(best) => Err(Error::Convergence(Box::new(finish(
            manifold, &op, best, opts.seed, method,
        )?))),
    }
}

/// Normalises an iterate: mean zero (closed), unit `L²` norm, largest
/// entry positive, eigenvalue recomputed as the Rayleigh quotient.
fn finish(
    manifold: &DiscreteManifold,
    op: &Operator,
    it: Iterate,
    seed: u64,
    method: SolverMethod,
) -> Result<SpectralResult> {
    let mut x = it.x;
    op.deflate(&mut x);
    let norm2: f64 = x.iter().zip(&op.mass).map(|(v, m)| m * v * v).sum();
    if !(norm2 > 0.0) {
        return Err(Error::DegenerateField(
            "eigensolver returned a zero vector".into(),
        ));
    }
    let inv = norm2.sqrt().recip();
    let pivot = (0..x.len())
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()).then(b.cmp(&a)))
        .unwrap_or(0);
    let sign = if x[pivot] < 0.0 { -inv } else { inv };
    for v in &mut x {
        *v *= sign;
    }
    let mut kx = vec![0.0; x.len()];
    op.stiffness.apply(&x, &mut kx);
    let num: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().zip(&op.mass).map(|(v, m)| m * v * v).sum();
    let lambda = num / den;
    let residual = op.residual(lambda, &x);
    Ok(SpectralResult {
        lambda1: lambda,
        eigenfield: ScalarField::new(op.expand(&x, manifold.vertex_count()))?,
        iterations: it.iterations,
        residual,
        seed,
        method,
    })
}

/// Rayleigh quotient `E(f̃) / ‖f̃‖²` of the constraint projection `f̃` of
/// `field`: mean removal for closed problems, zeroing the boundary for
/// Dirichlet problems.
pub fn rayleigh_quotient(
    manifold: &DiscreteManifold,
    field: &ScalarField,
    dirichlet: bool,
) -> Result<f64> {
    manifold.check_len(field.len())?;
    let mu = manifold.measures();
    let raw: f64 = field.values().iter().zip(mu).map(|(f, m)| m * f * f).sum();
    let mut g = field.values().to_vec();
    if dirichlet {
        for (v, &b) in g.iter_mut().zip(manifold.boundary()) {
            if b {
                *v = 0.0;
            }
        }
    } else {
        let total: f64 = mu.iter().sum();
        let mean = g.iter().zip(mu).map(|(f, m)| m * f).sum::<f64>() / total;
        for v in &mut g {
            *v -= mean;
        }
    }
    let norm2: f64 = g.iter().zip(mu).map(|(f, m)| m * f * f).sum();
    if !(norm2 > 1e-24 * raw) || norm2 == 0.0 {
        return Err(Error::DegenerateField(
            "field vanishes after constraint projection".into(),
        ));
    }
    Ok(manifold.energy_of(&g) / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{
        make_circle, make_icosphere, make_interval, make_planar_domain, GridMask,
    };
    use std::f64::consts::PI;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn circle_closed_form() {
        let c = make_circle(2.0 * PI, 512).unwrap();
        let r = lambda1_closed(&c, &opts()).unwrap();
        assert!((r.lambda1 - 1.0).abs() < 1e-3, "{}", r.lambda1);
        assert!(r.residual <= 1e-8);
        // Discrete oracle: (2 - 2 cos(2π/n)) / h².
        let h = 2.0 * PI / 512.0;
        let exact = (2.0 - 2.0 * (2.0 * PI / 512.0).cos()) / (h * h);
        assert!((r.lambda1 - exact).abs() < 1e-9);
    }

    #[test]
    fn dense_and_iterative_paths_agree() {
        let s = make_icosphere(2).unwrap();
        let dense = lambda1_closed(
            &s,
            &SolverOptions {
                method: SolverMethod::Dense,
                ..opts()
            },
        )
        .unwrap();
        let direct = lambda1_closed(
            &s,
            &SolverOptions {
                method: SolverMethod::Direct,
                ..opts()
            },
        )
        .unwrap();
        let lob = lambda1_closed(
            &s,
            &SolverOptions {
                method: SolverMethod::Lobpcg,
                ..opts()
            },
        )
        .unwrap();
        assert_eq!(dense.method, SolverMethod::Dense);
        assert_eq!(direct.method, SolverMethod::Direct);
        assert_eq!(lob.method, SolverMethod::Lobpcg);
        assert!((dense.lambda1 - direct.lambda1).abs() < 1e-9);
        assert!((dense.lambda1 - lob.lambda1).abs() < 1e-9);
    }

    #[test]
    fn eigenfield_normalisation() {
        let s = make_icosphere(3).unwrap();
        let r = lambda1_closed(&s, &opts()).unwrap();
        let mu = s.measures();
        let f = r.eigenfield.values();
        let mean: f64 = f.iter().zip(mu).map(|(a, m)| a * m).sum();
        let l1: f64 = f.iter().zip(mu).map(|(a, m)| a.abs() * m).sum();
        let l2: f64 = f.iter().zip(mu).map(|(a, m)| a * a * m).sum();
        assert!(mean.abs() <= 1e-8 * l1);
        assert!((l2 - 1.0).abs() <= 1e-10);
        let rq = rayleigh_quotient(&s, &r.eigenfield, false).unwrap();
        assert!((rq - r.lambda1).abs() <= 1e-8);
    }

    #[test]
    fn interval_dirichlet() {
        let iv = make_interval(PI, 512).unwrap();
        let r = lambda1_dirichlet(&iv, &opts()).unwrap();
        assert!((r.lambda1 - 1.0).abs() < 1e-3);
        let f = r.eigenfield.values();
        assert_eq!(f[0], 0.0);
        assert_eq!(f[511], 0.0);
        assert!(f[256] > 0.0);
    }

    #[test]
    fn square_dirichlet_and_scaling() {
        let n = 65;
        let full = GridMask::from_fn(n, n, |_, _| true);
        let big = make_planar_domain(&full, PI / 64.0).unwrap();
        let l_big = lambda1_dirichlet(&big, &opts()).unwrap().lambda1;
        assert!((l_big - 2.0).abs() < 2e-3, "{l_big}");
        // Same grid at half the spacing is the half-size square.
        let small = make_planar_domain(&full, PI / 128.0).unwrap();
        let l_small = lambda1_dirichlet(&small, &opts()).unwrap().lambda1;
        assert!((l_small / l_big - 4.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        let s = make_icosphere(1).unwrap();
        let one = ScalarField::constant(&s, 1.0).unwrap();
        assert!(matches!(
            rayleigh_quotient(&s, &one, false),
            Err(Error::DegenerateField(_))
        ));
        assert!(matches!(
            lambda1_dirichlet(&s, &opts()),
            Err(Error::DegenerateDomain(_))
        ));
        let single = make_planar_domain(&GridMask::new(1, 1, vec![true]).unwrap(), 1.0).unwrap();
        assert!(matches!(
            lambda1_dirichlet(&single, &opts()),
            Err(Error::DegenerateDomain(_))
        ));
    }

    #[test]
    fn convergence_error_carries_best_iterate() {
        let c = make_circle(2.0 * PI, 2000).unwrap();
        let o = SolverOptions {
            max_iter: 1,
            method: SolverMethod::Lobpcg,
            ..opts()
        };
        match lambda1_closed(&c, &o) {
            Err(Error::Convergence(best)) => {
                assert_eq!(best.iterations, 1);
                assert!(best.residual > 1e-8);
            }
            other => panic!(
                "expected convergence error, got {:?}",
                other.map(|r| r.lambda1)
            ),
        }
    }
}
