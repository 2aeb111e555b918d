//! Seeded property sweeps over random low-frequency fields, summarised as
//! reports: Pólya–Szegő, layer-cake moments, sup contraction and the
//! fiberwise energy components.

use std::f64::consts::PI;

use rand::Rng;

use super::{CheckConfig, ComparisonReport, Relation, LAMBDA_SLACK};
use crate::error::Result;
use crate::manifold::{make_circle, make_icosphere, make_product, DiscreteManifold, ScalarField};
use crate::model_spaces::ModelSpace;
use crate::numeric::{exact_sum, seeded_rng};
use crate::rearrangement::{
    fiberwise_energy_split, fiberwise_rearrange, polya_szego_check, rearrange,
    sup_contraction_check,
};

/// Monomials of degree 1 to 3 in the ambient coordinates.
fn monomials(p: [f64; 3]) -> Vec<f64> {
    let mut out = Vec::with_capacity(19);
    for i in 0..3 {
        out.push(p[i]);
    }
    for i in 0..3 {
        for j in i..3 {
            out.push(p[i] * p[j]);
        }
    }
    for i in 0..3 {
        for j in i..3 {
            for k in j..3 {
                out.push(p[i] * p[j] * p[k]);
            }
        }
    }
    out
}

/// Random combination of the degree ≤ 3 monomials restricted to the
/// sphere, optionally quantised to produce ties.
pub(crate) fn low_frequency_field(
    sphere: &DiscreteManifold,
    seed: u64,
    levels: Option<u32>,
) -> Result<ScalarField> {
    let mut rng = seeded_rng(seed);
    let coef: Vec<f64> = (0..19).map(|_| rng.random_range(-1.0..1.0)).collect();
    let coords = sphere.coords().expect("icosphere coordinates");
    ScalarField::from_fn(sphere, |v| {
        let val: f64 = monomials(coords[v])
            .iter()
            .zip(&coef)
            .map(|(m, c)| m * c)
            .sum();
        match levels {
            Some(l) => (val * l as f64).round() / l as f64,
            None => val,
        }
    })
}

/// Smallest `E(f) / E(f_*)` over `count` seeded fields on the icosphere;
/// asserted at `≥ 1 − slack`.
pub fn check_polya_szego(
    level: usize,
    count: usize,
    seed: u64,
    cfg: &CheckConfig,
) -> Result<ComparisonReport> {
    let sphere = make_icosphere(level)?;
    let space = ModelSpace::unit_sphere(2)?;
    let mut worst = f64::INFINITY;
    let mut worst_seed = seed;
    for k in 0..count as u64 {
        let f = low_frequency_field(&sphere, seed + k, None)?;
        let ps = polya_szego_check(&sphere, &f, space)?;
        let ratio = ps.lhs / ps.rhs;
        if ratio < worst {
            worst = ratio;
            worst_seed = seed + k;
        }
    }
    Ok(ComparisonReport::new(
        "polya-szego",
        ("min E(f) / E(f_*)", worst),
        ("1", 1.0),
        Relation::AtLeast,
        cfg.slack_or(LAMBDA_SLACK),
    )
    .with_diag("level", level)
    .with_diag("fields", count)
    .with_diag("seed", seed)
    .with_diag("worst_seed", worst_seed))
}

/// Largest relative error between `∫|f|^k` and the same moment of the
/// profile, `k = 1, 2, 3`, over `count` fields (half of them with ties).
pub fn check_layer_cake(
    level: usize,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<ComparisonReport> {
    let sphere = make_icosphere(level)?;
    let space = ModelSpace::unit_sphere(2)?;
    let mut worst: f64 = 0.0;
    for k in 0..count as u64 {
        let levels = if k % 2 == 0 { None } else { Some(4) };
        let f = low_frequency_field(&sphere, seed + k, levels)?;
        let profile = rearrange(&sphere, &f, space)?;
        for power in 1..=3 {
            let direct = sphere.integrate(&f.map(f64::abs)?, power as f64)?;
            let moment = exact_sum(
                profile
                    .layers()
                    .iter()
                    .map(|l| l.measure * l.value.abs().powi(power)),
            );
            worst = worst.max((direct - moment).abs() / direct.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(ComparisonReport::new(
        "layer-cake",
        ("max relative moment error", worst),
        ("tolerance", tol),
        Relation::AtMost,
        0.0,
    )
    .with_diag("level", level)
    .with_diag("fields", count)
    .with_diag("seed", seed))
}

/// Largest `sup|f_* − g_*| − sup|f − g|` over `pairs` seeded field pairs.
pub fn check_sup_contraction(
    level: usize,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<ComparisonReport> {
    let sphere = make_icosphere(level)?;
    let space = ModelSpace::unit_sphere(2)?;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..pairs as u64 {
        let f = low_frequency_field(&sphere, seed + 2 * k, None)?;
        let g = if k % 2 == 0 {
            let mut rng = seeded_rng(seed + 2 * k + 1);
            let eps = 10f64.powi(-((k % 7) as i32));
            let values = f
                .values()
                .iter()
                .map(|v| v + eps * rng.random_range(-1.0..1.0))
                .collect();
            ScalarField::new(values)?
        } else {
            low_frequency_field(&sphere, seed + 2 * k + 1, Some(3))?
        };
        let c = sup_contraction_check(&sphere, &f, &g, space)?;
        worst = worst.max(c.profile_gap - c.field_gap);
    }
    Ok(ComparisonReport::new(
        "sup-contraction",
        ("max sup|f_* - g_*| - sup|f - g|", worst),
        ("tolerance", tol),
        Relation::AtMost,
        0.0,
    )
    .with_diag("level", level)
    .with_diag("pairs", pairs)
    .with_diag("seed", seed))
}

/// Fiberwise rearrangement on `S¹ × S²`: smallest ratio of the original to
/// the rearranged vertical and horizontal energies over `count` fields.
pub fn check_fiberwise_contraction(
    base_n: usize,
    level: usize,
    count: usize,
    seed: u64,
    cfg: &CheckConfig,
) -> Result<ComparisonReport> {
    let base = make_circle(2.0 * PI, base_n)?;
    let sphere = make_icosphere(level)?;
    let product = make_product(&base, &sphere)?;
    let space = ModelSpace::unit_sphere(2)?;
    let nf = sphere.vertex_count();
    let coords = sphere.coords().expect("icosphere coordinates").to_vec();
    let (mut worst_v, mut worst_h) = (f64::INFINITY, f64::INFINITY);
    for k in 0..count as u64 {
        let mut rng = seeded_rng(seed + k);
        let coef: Vec<f64> = (0..5 * 20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = ScalarField::from_fn(&product, |v| {
            let (s, x) = (v / nf, v % nf);
            let t = 2.0 * PI * s as f64 / base_n as f64;
            let a = [1.0, t.cos(), t.sin(), (2.0 * t).cos(), (2.0 * t).sin()];
            let mut b = vec![1.0];
            b.extend(monomials(coords[x]));
            a.iter()
                .enumerate()
                .map(|(i, ai)| {
                    ai * b
                        .iter()
                        .enumerate()
                        .map(|(j, bj)| coef[20 * i + j] * bj)
                        .sum::<f64>()
                })
                .sum()
        })?;
        let fw = fiberwise_rearrange(&product, &f, space)?;
        let split = fiberwise_energy_split(&product, &fw, &f)?;
        if split.vert_rhs > 0.0 {
            worst_v = worst_v.min(split.vert_lhs / split.vert_rhs);
        }
        if split.horiz_rhs > 0.0 {
            worst_h = worst_h.min(split.horiz_lhs / split.horiz_rhs);
        }
    }
    let slack = cfg.slack_or(LAMBDA_SLACK);
    Ok(ComparisonReport::new(
        "fiberwise-contraction",
        ("min vertical energy ratio", worst_v),
        ("1", 1.0),
        Relation::AtLeast,
        slack,
    )
    .with_subcheck(ComparisonReport::new(
        "fiberwise-contraction-horizontal",
        ("min horizontal energy ratio", worst_h),
        ("1", 1.0),
        Relation::AtLeast,
        slack,
    ))
    .with_diag("base_n", base_n)
    .with_diag("level", level)
    .with_diag("fields", count)
    .with_diag("seed", seed))
}
