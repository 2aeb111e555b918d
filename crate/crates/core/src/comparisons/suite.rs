//! The full battery of checks at one mesh level.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Icosphere level of the sphere checks; product checks use one level
    /// less. Below 4 the grids coarsen and the default slacks widen by
    /// `2^(4 − level)`.
    pub level: usize,
    /// Overrides every mesh-dependent slack.
    pub slack: Option<f64>,
    /// Adds the unasserted hyperbolic-target comparison.
    pub experimental: bool,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            level: 4,
            slack: None,
            experimental: false,
            seed: 1,
        }
    }
}

type Job<'a> = Box<dyn Fn() -> Result<ComparisonReport> + Send + Sync + 'a>;

/// Runs every check and returns the reports sorted by id. A check that
/// errors yields a failed report carrying the error message.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<ComparisonReport>> {
    if cfg.level < 2 {
        return Err(Error::domain(format!(
            "suite level must be at least 2, got {}",
            cfg.level
        )));
    }
    let level = cfg.level;
    let widen = 2f64.powi(4 - level.min(4) as i32);
    let spacing = 0.02 * 2f64.powi(4 - level as i32);
    let slack_override = cfg.slack;
    let check = move |default: f64| CheckConfig {
        slack: Some(slack_override.unwrap_or(default * widen)),
        solver: SolverOptions {
            seed: cfg.seed,
            ..Default::default()
        },
    };
    let seed = cfg.seed;

    let mut jobs: Vec<(&'static str, Job<'_>)> = vec![
        (
            "dirichlet-disc",
            Box::new(move || check_dirichlet_disc(spacing, &check(0.01))),
        ),
        (
            "faber-krahn",
            Box::new(move || {
                let p = FaberKrahnParams {
                    spacing,
                    ..Default::default()
                };
                check_fiberwise_faber_krahn(&p, &check(LAMBDA_SLACK))
            }),
        ),
        (
            "fiberwise-contraction",
            Box::new(move || {
                check_fiberwise_contraction(64, level - 1, 50, seed, &check(LAMBDA_SLACK))
            }),
        ),
        (
            "layer-cake",
            Box::new(move || check_layer_cake(level.min(4), 100, seed, 1e-10)),
        ),
        (
            "lichnerowicz",
            Box::new(move || check_lichnerowicz(level, &check(LAMBDA_SLACK))),
        ),
        (
            "polya-szego",
            Box::new(move || check_polya_szego(level, 100, seed, &check(LAMBDA_SLACK))),
        ),
        (
            "product",
            Box::new(move || {
                let p = ProductParams {
                    base_len: 2.0 * PI,
                    base_n: 128,
                    fiber: FiberSpec::Icosphere { level: level - 1 },
                };
                check_product_formula(&p, &check(LAMBDA_SLACK))
            }),
        ),
        ("reference", Box::new(check_reference)),
        (
            "spherical-domain",
            Box::new(move || {
                let p = SphericalDomainParams {
                    level,
                    ..Default::default()
                };
                check_spherical_domain(&p, &check(LAMBDA_SLACK))
            }),
        ),
        (
            "sup-contraction",
            Box::new(move || check_sup_contraction(level.min(3), 200, seed, 1e-12)),
        ),
        (
            "warped-lambda1",
            Box::new(move || {
                let p = WarpedParams {
                    level: level - 1,
                    ..Default::default()
                };
                check_warped_lambda1(&p, &check(LAMBDA_SLACK))
            }),
        ),
        (
            "yamabe-constant",
            Box::new(move || check_yamabe_constant(64, level - 1, 1e-6)),
        ),
        (
            "yamabe-warped",
            Box::new(move || {
                let p = YamabeParams {
                    level: level - 1,
                    seed,
                    ..Default::default()
                };
                check_yamabe_warped(&p, &check(YAMABE_SLACK))
            }),
        ),
    ];
    if cfg.experimental {
        jobs.push((
            "hyperbolic-domain",
            Box::new(move || {
                let p = FaberKrahnParams {
                    spacing: 2.0 * spacing,
                    ..Default::default()
                };
                check_hyperbolic_domain(&p, &check(LAMBDA_SLACK))
            }),
        ));
    }
    jobs.sort_by_key(|(id, _)| *id);
    Ok(jobs
        .par_iter()
        .map(|(id, job)| {
            job().unwrap_or_else(|e| {
                ComparisonReport::new(
                    id,
                    ("lhs", f64::NAN),
                    ("rhs", f64::NAN),
                    Relation::AtLeast,
                    0.0,
                )
                .with_note(format!("error: {e}"))
            })
        })
        .collect())
}

/// One row per report: `theorem_id,lhs,rhs,margin,slack,asserted,pass,verdict`.
pub fn summary_csv(reports: &[ComparisonReport]) -> String {
    let mut s = String::from("theorem_id,lhs,rhs,margin,slack,asserted,pass,verdict\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.theorem_id,
            r.lhs,
            r.rhs,
            r.margin,
            r.slack,
            r.asserted,
            r.pass,
            r.verdict()
        );
    }
    s
}
