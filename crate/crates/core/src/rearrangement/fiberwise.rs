//! Rearrangement of a product field fiber by fiber.
//!
//! Each fiber restriction `F_s` is rearranged with respect to the fiber
//! measure and resampled onto one equal-measure radial grid shared by all
//! base vertices, so horizontal differences compare layers of equal measure.

use rayon::prelude::*;
use serde::Serialize;

use super::{mesh_profile_bins, profile_sup_gap, rearrange, sphere_factor, RadialProfile};
use crate::error::{Error, Result};
use crate::manifold::{make_warped_product, DiscreteManifold, RadialGrid, ScalarField};
use crate::model_spaces::ModelSpace;

#[derive(Clone, Debug)]
pub struct FiberwiseField {
    pub space: ModelSpace,
    /// One profile per base vertex.
    pub profiles: Vec<RadialProfile>,
    /// Shared equal-measure radial grid.
    pub grid: RadialGrid,
    /// `binned[s][k]`: mean of profile `s` over grid cell `k`.
    pub binned: Vec<Vec<f64>>,
}

impl FiberwiseField {
    pub fn bins(&self) -> usize {
        self.grid.cell_count()
    }

    /// Field on `base × grid` in product vertex order.
    pub fn symmetrized_field(&self) -> Result<ScalarField> {
        ScalarField::new(self.binned.iter().flatten().copied().collect())
    }
}

/// Rearranges each fiber of `product` onto `space`, with about `√n` shared
/// bins for fibers of `n` vertices.
pub fn fiberwise_rearrange(
    product: &DiscreteManifold,
    field: &ScalarField,
    space: ModelSpace,
) -> Result<FiberwiseField> {
    let st = product.structure().ok_or(Error::Structure)?;
    fiberwise_rearrange_with_bins(
        product,
        field,
        space,
        mesh_profile_bins(st.fiber_vertex_count()),
    )
}

pub fn fiberwise_rearrange_with_bins(
    product: &DiscreteManifold,
    field: &ScalarField,
    space: ModelSpace,
    n_bins: usize,
) -> Result<FiberwiseField> {
    let st = product.structure().ok_or(Error::Structure)?;
    product.check_len(field.len())?;
    let nf = st.fiber_vertex_count();
    let fiber = &st.fiber;
    let volume = fiber.total_measure();
    let grid = RadialGrid::equal_measure(space, n_bins, volume)?;
    let values = field.values();
    let profiles: Vec<RadialProfile> = (0..st.base_vertex_count())
        .into_par_iter()
        .map(|s| {
            let restricted = ScalarField::new(values[s * nf..(s + 1) * nf].to_vec())?;
            rearrange(fiber, &restricted, space)
        })
        .collect::<Result<_>>()?;
    let edges: Vec<f64> = (0..=n_bins)
        .map(|k| volume * k as f64 / n_bins as f64)
        .collect();
    let binned = profiles
        .par_iter()
        .map(|p| {
            edges
                .windows(2)
                .map(|w| p.window_mean(w[0], w[1].min(p.total())))
                .collect()
        })
        .collect();
    Ok(FiberwiseField {
        space,
        profiles,
        grid,
        binned,
    })
}

/// Vertical and horizontal energy of a product field and of its fiberwise
/// rearrangement.
#[derive(Clone, Debug, Serialize)]
pub struct EnergySplit {
    pub vert_lhs: f64,
    /// Includes the factor `(V / V_m)^(2/m)` for sphere targets.
    pub vert_rhs: f64,
    pub horiz_lhs: f64,
    pub horiz_rhs: f64,
    pub factor: f64,
    #[serde(skip)]
    pub symmetrized: Option<(DiscreteManifold, ScalarField)>,
}

/// Splits the energy of `original` on `product` into vertical (within
/// fibers) and horizontal (along the base) parts and compares them with the
/// same parts of the fiberwise rearrangement on `base ×_ρ grid`.
pub fn fiberwise_energy_split(
    product: &DiscreteManifold,
    fiberwise: &FiberwiseField,
    original: &ScalarField,
) -> Result<EnergySplit> {
    let st = product.structure().ok_or(Error::Structure)?;
    product.check_len(original.len())?;
    if fiberwise.profiles.len() != st.base_vertex_count() {
        return Err(Error::Shape {
            expected: st.base_vertex_count(),
            got: fiberwise.profiles.len(),
        });
    }
    let (vert_lhs, horiz_lhs) = split(product, original.values());
    let chain = fiberwise.grid.to_manifold()?;
    let sym = make_warped_product(&st.base, &chain, &st.rho)?;
    let sym_field = fiberwise.symmetrized_field()?;
    let (v, horiz_rhs) = split(&sym, sym_field.values());
    let factor = sphere_factor(&fiberwise.space);
    Ok(EnergySplit {
        vert_lhs,
        vert_rhs: factor * v,
        horiz_lhs,
        horiz_rhs,
        factor,
        symmetrized: Some((sym, sym_field)),
    })
}

fn split(m: &DiscreteManifold, f: &[f64]) -> (f64, f64) {
    let st = m.structure().expect("product structure");
    let (mut vert, mut horiz) = (0.0, 0.0);
    for e in m.edges() {
        let d = f[e.i] - f[e.j];
        if st.is_vertical(e) {
            vert += e.weight * d * d;
        } else {
            horiz += e.weight * d * d;
        }
    }
    (vert, horiz)
}

/// Largest per-fiber profile gap between two fiberwise rearrangements.
pub fn fiberwise_sup_gap(a: &FiberwiseField, b: &FiberwiseField) -> f64 {
    a.profiles
        .iter()
        .zip(&b.profiles)
        .map(|(p, q)| profile_sup_gap(p, q))
        .fold(0.0, f64::max)
}
