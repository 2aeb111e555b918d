//! Dirichlet comparisons for fibered domains `X ⊂ N × M`.
//!
//! `X` keeps one vertex set per fiber (a planar grid or an icosphere) and
//! marks, per base vertex, which fiber vertices carry the Dirichlet
//! condition. The symmetrized domain replaces the fiber over `s` by a radial
//! model ball of the same volume `V(s)`, discretized by equal-measure cells
//! so that horizontal edges join cells of equal volume fraction.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{solver_diag, CheckConfig, ComparisonReport, Relation, LAMBDA_SLACK};
use crate::error::{Error, Result};
use crate::manifold::{
    make_circle, make_fibered_product, make_icosphere, make_planar_domain, DiscreteManifold,
    GridMask, RadialGrid,
};
use crate::model_spaces::ModelSpace;
use crate::spectrum::lambda1_dirichlet;

/// Square of the first zero of `J₀`.
pub(crate) const J01_SQUARED: f64 = 5.783_185_962_946_784;

/// Planar cross-sections over a circle base of length `2π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FkPreset {
    /// Discs of radius 0.8 about the origin.
    ConcentricDiscs,
    /// Annuli `0.3 + 0.1 sin s < |q| < 1`.
    Tube,
    /// Unit discs minus a disc of radius 0.2 about `0.45 (cos s, sin s)`.
    TubeWithHole,
}

impl FkPreset {
    pub const ALL: [FkPreset; 3] = [
        FkPreset::ConcentricDiscs,
        FkPreset::Tube,
        FkPreset::TubeWithHole,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FkPreset::ConcentricDiscs => "concentric-discs",
            FkPreset::Tube => "tube",
            FkPreset::TubeWithHole => "tube-with-hole",
        }
    }

    /// Signed distance to the cross-section boundary, positive inside.
    pub fn signed_distance(&self, s: f64, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        match self {
            FkPreset::ConcentricDiscs => 0.8 - r,
            FkPreset::Tube => (r - (0.3 + 0.1 * s.sin())).min(1.0 - r),
            FkPreset::TubeWithHole => {
                let (cx, cy) = (0.45 * s.cos(), 0.45 * s.sin());
                (1.0 - r).min((x - cx).hypot(y - cy) - 0.2)
            }
        }
    }

    /// Area of the cross-section over `s`.
    pub fn area(&self, s: f64) -> f64 {
        match self {
            FkPreset::ConcentricDiscs => PI * 0.64,
            FkPreset::Tube => PI * (1.0 - (0.3 + 0.1 * s.sin()).powi(2)),
            FkPreset::TubeWithHole => PI * (1.0 - 0.04),
        }
    }

    fn outer_radius(&self) -> f64 {
        match self {
            FkPreset::ConcentricDiscs => 0.8,
            _ => 1.0,
        }
    }
}

impl fmt::Display for FkPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FkPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FkPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown preset {s:?}; expected concentric-discs, tube or tube-with-hole"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaberKrahnParams {
    pub preset: FkPreset,
    pub spacing: f64,
    pub base_n: usize,
    /// Equal-measure cells per symmetrized fiber.
    pub bins: usize,
}

impl Default for FaberKrahnParams {
    fn default() -> Self {
        FaberKrahnParams {
            preset: FkPreset::Tube,
            spacing: 0.02,
            base_n: 24,
            bins: 256,
        }
    }
}

fn base_parameters(base: &DiscreteManifold) -> Vec<f64> {
    base.coords()
        .expect("circle coordinates")
        .iter()
        .map(|c| c[0])
        .collect()
}

/// `X` as the union grid with per-fiber Dirichlet flags. A grid node is
/// inside the cross-section when its signed distance exceeds `−h/2`; inside
/// nodes with a 4-neighbour outside, and all outside nodes, are boundary.
fn planar_fibered_domain(
    p: &FaberKrahnParams,
    base: &DiscreteManifold,
) -> Result<DiscreteManifold> {
    let h = p.spacing;
    if !(h > 0.0 && h < 0.25) {
        return Err(Error::domain(format!(
            "grid spacing must lie in (0, 0.25), got {h}"
        )));
    }
    let grid = make_planar_domain(
        &GridMask::disc([0.0, 0.0], p.preset.outer_radius() + h, h),
        h,
    )?;
    let coords = grid.coords().expect("grid coordinates").to_vec();
    let fibers = base_parameters(base)
        .into_iter()
        .map(|s| {
            let inside = |x: f64, y: f64| p.preset.signed_distance(s, x, y) > -0.5 * h;
            let flags = coords
                .iter()
                .map(|&[x, y, _]| {
                    !(inside(x, y)
                        && inside(x + h, y)
                        && inside(x - h, y)
                        && inside(x, y + h)
                        && inside(x, y - h))
                })
                .collect();
            grid.with_boundary(flags)
        })
        .collect::<Result<Vec<_>>>()?;
    make_fibered_product(base, &fibers)
}

/// Base `×` radial model balls of volume `area(s)` with a Dirichlet ghost
/// at the outer face.
fn symmetrized_domain(
    base: &DiscreteManifold,
    space: ModelSpace,
    bins: usize,
    area: impl Fn(f64) -> f64,
) -> Result<DiscreteManifold> {
    let fibers = base_parameters(base)
        .into_iter()
        .map(|s| RadialGrid::equal_measure(space, bins, area(s))?.to_dirichlet_manifold())
        .collect::<Result<Vec<_>>>()?;
    make_fibered_product(base, &fibers)
}

fn dirichlet_comparison(
    id: &str,
    labels: (&str, &str),
    x: &DiscreteManifold,
    star: &DiscreteManifold,
    slack: f64,
    cfg: &CheckConfig,
) -> Result<ComparisonReport> {
    let rx = lambda1_dirichlet(x, &cfg.solver)?;
    let rs = lambda1_dirichlet(star, &cfg.solver)?;
    Ok(ComparisonReport::new(
        id,
        (labels.0, rx.lambda1),
        (labels.1, rs.lambda1),
        Relation::AtLeast,
        slack,
    )
    .with_diag("vertices", x.vertex_count())
    .with_diag("active_vertices", x.interior_count())
    .with_diag("symmetrized_vertices", star.vertex_count())
    .with_diag("solver", solver_diag(&rx))
    .with_diag("symmetrized_solver", solver_diag(&rs)))
}

/// `λ₁(X) ≥ λ₁(X⋆)` for planar cross-sections over a circle.
pub fn check_fiberwise_faber_krahn(
    p: &FaberKrahnParams,
    cfg: &CheckConfig,
) -> Result<ComparisonReport> {
    let base = make_circle(2.0 * PI, p.base_n)?;
    let x = planar_fibered_domain(p, &base)?;
    let star = symmetrized_domain(&base, ModelSpace::euclidean(2)?, p.bins, |s| {
        p.preset.area(s)
    })?;
    let mut report = dirichlet_comparison(
        "faber-krahn",
        ("lambda1(X)", "lambda1(X_star)"),
        &x,
        &star,
        cfg.slack_or(LAMBDA_SLACK),
        cfg,
    )?
    .with_diag("params", p);
    if p.preset == FkPreset::ConcentricDiscs {
        report = report.with_note("equality case: the cross-sections are already centred discs");
    }
    Ok(report)
}

/// Same domain `X` against base `×` hyperbolic discs of equal area. The
/// direction of this comparison is conjectural, so the report is never
/// asserted.
pub fn check_hyperbolic_domain(
    p: &FaberKrahnParams,
    cfg: &CheckConfig,
) -> Result<ComparisonReport> {
    let base = make_circle(2.0 * PI, p.base_n)?;
    let x = planar_fibered_domain(p, &base)?;
    let star = symmetrized_domain(&base, ModelSpace::hyperbolic(2)?, p.bins, |s| {
        p.preset.area(s)
    })?;
    Ok(dirichlet_comparison(
        "hyperbolic-domain",
        ("lambda1(X)", "lambda1(X_hyperbolic)"),
        &x,
        &star,
        cfg.slack_or(LAMBDA_SLACK),
        cfg,
    )?
    .with_diag("params", p)
    .with_note("experimental: conjectural direction, margin reported without assertion")
    .unasserted())
}

/// Unit disc on the grid against `j₀,₁²`.
pub fn check_dirichlet_disc(spacing: f64, cfg: &CheckConfig) -> Result<ComparisonReport> {
    let m = make_planar_domain(&GridMask::disc([0.0, 0.0], 1.0, spacing), spacing)?;
    let r = lambda1_dirichlet(&m, &cfg.solver)?;
    Ok(ComparisonReport::new(
        "dirichlet-disc",
        (format!("lambda1(unit disc, spacing {spacing})"), r.lambda1),
        ("j_{0,1}^2", J01_SQUARED),
        Relation::Equal,
        cfg.slack_or(0.01),
    )
    .with_diag("vertices", m.vertex_count())
    .with_diag("solver", solver_diag(&r)))
}

/// Cross-sections of the unit sphere over a circle base of length `2π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdPreset {
    /// Caps of geodesic radius `1.2 + 0.3 sin s` about the north pole.
    PolarCaps,
    /// Hemispheres `{p · n(s) > 0}` with `n(s)` tilted by `0.6 sin s`.
    TiltedHemispheres,
}

impl SdPreset {
    pub const ALL: [SdPreset; 2] = [SdPreset::PolarCaps, SdPreset::TiltedHemispheres];

    pub fn name(&self) -> &'static str {
        match self {
            SdPreset::PolarCaps => "polar-caps",
            SdPreset::TiltedHemispheres => "tilted-hemispheres",
        }
    }

    /// Geodesic signed distance to the cross-section boundary, positive
    /// inside.
    pub fn signed_distance(&self, s: f64, p: [f64; 3]) -> f64 {
        match self {
            SdPreset::PolarCaps => 1.2 + 0.3 * s.sin() - p[2].clamp(-1.0, 1.0).acos(),
            SdPreset::TiltedHemispheres => {
                let t = 0.6 * s.sin();
                (p[0] * t.sin() + p[2] * t.cos()).clamp(-1.0, 1.0).asin()
            }
        }
    }

    pub fn area(&self, s: f64) -> f64 {
        match self {
            SdPreset::PolarCaps => 2.0 * PI * (1.0 - (1.2 + 0.3 * s.sin()).cos()),
            SdPreset::TiltedHemispheres => 2.0 * PI,
        }
    }
}

impl fmt::Display for SdPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SdPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SdPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown preset {s:?}; expected polar-caps or tilted-hemispheres"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SphericalDomainParams {
    pub preset: SdPreset,
    pub level: usize,
    pub base_n: usize,
    pub bins: usize,
}

impl Default for SphericalDomainParams {
    fn default() -> Self {
        SphericalDomainParams {
            preset: SdPreset::TiltedHemispheres,
            level: 4,
            base_n: 24,
            bins: 256,
        }
    }
}

/// Mean edge length of an embedded mesh.
fn mean_edge_length(m: &DiscreteManifold) -> f64 {
    let c = m.coords().expect("embedded mesh");
    let total: f64 = m
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (c[e.i], c[e.j]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        })
        .sum();
    total / m.edges().len() as f64
}

/// `X` on `circle × icosphere`: a vertex is Dirichlet when its signed
/// distance is below half the spacing between rows of vertices, which
/// centres the zero set on the true boundary.
fn spherical_fibered_domain(
    p: &SphericalDomainParams,
    base: &DiscreteManifold,
) -> Result<DiscreteManifold> {
    let sphere = make_icosphere(p.level)?;
    let offset = 0.5 * mean_edge_length(&sphere) * 3f64.sqrt() / 2.0;
    let coords = sphere.coords().expect("icosphere coordinates").to_vec();
    let fibers = base_parameters(base)
        .into_iter()
        .map(|s| {
            sphere.with_boundary(
                coords
                    .iter()
                    .map(|&q| p.preset.signed_distance(s, q) <= offset)
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    make_fibered_product(base, &fibers)
}

/// `λ₁(X) ≥ λ₁(X*)` for cross-sections of the round sphere, with `X*` the
/// product of the base with polar caps of the same areas.
pub fn check_spherical_domain(
    p: &SphericalDomainParams,
    cfg: &CheckConfig,
) -> Result<ComparisonReport> {
    let base = make_circle(2.0 * PI, p.base_n)?;
    let x = spherical_fibered_domain(p, &base)?;
    let star = symmetrized_domain(&base, ModelSpace::unit_sphere(2)?, p.bins, |s| {
        p.preset.area(s)
    })?;
    let mut report = dirichlet_comparison(
        "spherical-domain",
        ("lambda1(X)", "lambda1(X_star)"),
        &x,
        &star,
        cfg.slack_or(LAMBDA_SLACK),
        cfg,
    )?
    .with_diag("params", p);
    if p.preset == SdPreset::PolarCaps {
        report = report.with_note("equality case: the cross-sections are already polar caps");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_geometry() {
        for p in FkPreset::ALL {
            assert_eq!(p.name().parse::<FkPreset>().unwrap(), p);
            // Monte Carlo-free area check on a fine grid.
            let h = 0.004;
            let n = (1.1 / h) as i64;
            for s in [0.0, 1.3, 4.0] {
                let count = (-n..=n)
                    .flat_map(|i| (-n..=n).map(move |j| (i as f64 * h, j as f64 * h)))
                    .filter(|&(x, y)| p.signed_distance(s, x, y) > 0.0)
                    .count();
                let area = count as f64 * h * h;
                assert!(
                    (area - p.area(s)).abs() < 0.01,
                    "{p} {s}: {area} vs {}",
                    p.area(s)
                );
            }
        }
        for p in SdPreset::ALL {
            assert_eq!(p.name().parse::<SdPreset>().unwrap(), p);
            let m = make_icosphere(5).unwrap();
            for s in [0.0, 1.0, 2.5] {
                let area: f64 = m
                    .coords()
                    .unwrap()
                    .iter()
                    .zip(m.measures())
                    .map(|(q, mu)| {
                        // Vertices on the boundary count half.
                        let d = p.signed_distance(s, *q);
                        if d.abs() < 1e-12 {
                            0.5 * mu
                        } else if d > 0.0 {
                            *mu
                        } else {
                            0.0
                        }
                    })
                    .sum();
                assert!((area - p.area(s)).abs() < 0.03, "{p} {s}: {area}");
            }
        }
        assert!("square".parse::<FkPreset>().is_err());
    }

    #[test]
    fn coarse_faber_krahn_presets() {
        let cfg = CheckConfig::default();
        for preset in FkPreset::ALL {
            let p = FaberKrahnParams {
                preset,
                spacing: 0.08,
                base_n: 8,
                bins: 64,
            };
            let r = check_fiberwise_faber_krahn(
                &p,
                &CheckConfig {
                    slack: Some(0.1),
                    ..cfg.clone()
                },
            )
            .unwrap();
            assert!(r.pass, "{}", r.to_json());
            if preset == FkPreset::Tube {
                assert!(r.margin > 0.5 * r.rhs, "{}", r.to_json());
            }
        }
    }

    #[test]
    fn hemisphere_calibration() {
        // θ ≡ 0 at s = 0 is the upper hemisphere, with λ₁ = 2.
        let sphere = make_icosphere(4).unwrap();
        let offset = 0.5 * mean_edge_length(&sphere) * 3f64.sqrt() / 2.0;
        let flags = sphere
            .coords()
            .unwrap()
            .iter()
            .map(|&q| SdPreset::TiltedHemispheres.signed_distance(0.0, q) <= offset)
            .collect();
        let hemi = sphere.with_boundary(flags).unwrap();
        let l = lambda1_dirichlet(&hemi, &Default::default())
            .unwrap()
            .lambda1;
        assert!((l - 2.0).abs() < 0.02, "{l}");
        let cap = RadialGrid::equal_measure(ModelSpace::unit_sphere(2).unwrap(), 256, 2.0 * PI)
            .unwrap()
            .to_dirichlet_manifold()
            .unwrap();
        let l = lambda1_dirichlet(&cap, &Default::default())
            .unwrap()
            .lambda1;
        assert!((l - 2.0).abs() < 2e-3, "{l}");
    }

    #[test]
    fn coarse_spherical_domain() {
        for preset in SdPreset::ALL {
            let p = SphericalDomainParams {
                preset,
                level: 3,
                base_n: 8,
                bins: 128,
            };
            let r = check_spherical_domain(
                &p,
                &CheckConfig {
                    slack: Some(0.05),
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(r.pass, "{}", r.to_json());
        }
    }

    #[test]
    fn disc_chain_matches_bessel_zero() {
        let chain = RadialGrid::equal_measure(ModelSpace::euclidean(2).unwrap(), 256, PI)
            .unwrap()
            .to_dirichlet_manifold()
            .unwrap();
        let l = lambda1_dirichlet(&chain, &Default::default())
            .unwrap()
            .lambda1;
        assert!((l - J01_SQUARED).abs() < 5e-3 * J01_SQUARED, "{l}");
    }
}
