//! Monotone rearrangement of vertex fields onto model spaces.
//!
//! The rearranged function `f_*` is radial and nondecreasing in the distance
//! from the base point, with `{f_* < t}` the ball of the same volume as
//! `{f < t}`. Discretely it is a staircase in cumulative measure: vertices are
//! sorted by `(value, index)`, equal values form one layer, and layer `k`
//! occupies the cumulative-measure interval `(c_{k-1}, c_k]`. Cumulative
//! measures are correctly rounded exact sums, so they depend only on the
//! sublevel set and not on summation order.

mod fiberwise;

pub use fiberwise::{
    fiberwise_energy_split, fiberwise_rearrange, fiberwise_sup_gap, EnergySplit, FiberwiseField,
};

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{DiscreteManifold, RadialGrid, ScalarField};
use crate::model_spaces::ModelSpace;
use crate::numeric::{exact_sum, ExactSum};

/// Bin count used when a profile is resampled for energy evaluation.
pub const DEFAULT_PROFILE_BINS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Layer {
    pub value: f64,
    pub measure: f64,
    /// Measure of all layers up to and including this one.
    pub cumulative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    space: ModelSpace,
    layers: Vec<Layer>,
    tie_rank: Vec<usize>,
    total: f64,
}

/// Measure of `{f < t}`.
pub fn distribution_function(
    manifold: &DiscreteManifold,
    field: &ScalarField,
    t: f64,
) -> Result<f64> {
    manifold.check_len(field.len())?;
    Ok(exact_sum(
        field
            .values()
            .iter()
            .zip(manifold.measures())
            .filter(|(f, _)| **f < t)
            .map(|(_, &mu)| mu),
    ))
}

/// Rearranges `field` onto `space`. For the sphere model the model volume
/// must match the total measure to relative precision 1e-9.
pub fn rearrange(
    manifold: &DiscreteManifold,
    field: &ScalarField,
    space: ModelSpace,
) -> Result<RadialProfile> {
    manifold.check_len(field.len())?;
    let total = manifold.total_measure();
    if let Some(v) = space.total_volume() {
        if (v - total).abs() > 1e-9 * v {
            return Err(Error::Volume {
                expected: v,
                got: total,
            });
        }
    }
    let values = field.values();
    let mu = manifold.measures();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut tie_rank = vec![0; values.len()];
    for (rank, &v) in order.iter().enumerate() {
        tie_rank[v] = rank;
    }

    let mut layers: Vec<Layer> = Vec::new();
    let mut running = ExactSum::new();
    let mut k = 0;
    while k < order.len() {
        let value = values[order[k]];
        let mut layer = ExactSum::new();
        while k < order.len() && values[order[k]] == value {
            let m = mu[order[k]];
            layer.add(m);
            running.add(m);
            k += 1;
        }
        let measure = layer.value();
        if measure > 0.0 {
            layers.push(Layer {
                value,
                measure,
                cumulative: running.value(),
            });
        }
    }
    if layers.is_empty() {
        return Err(Error::DegenerateField(
            "field has no vertex of positive measure".into(),
        ));
    }
    Ok(RadialProfile {
        space,
        layers,
        tie_rank,
        total,
    })
}

impl RadialProfile {
    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Position of each source vertex in the `(value, index)` order.
    pub fn tie_rank(&self) -> &[usize] {
        &self.tie_rank
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `(c, t)` pairs starting at `(0, t_1)`; the profile equals `t_k` on
    /// `(c_{k-1}, c_k]`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        std::iter::once((0.0, self.layers[0].value))
            .chain(self.layers.iter().map(|l| (l.cumulative, l.value)))
            .collect()
    }

    /// Profile value at cumulative measure `c`.
    pub fn value_at(&self, c: f64) -> f64 {
        let k = self.layers.partition_point(|l| l.cumulative < c);
        self.layers[k.min(self.layers.len() - 1)].value
    }

    /// Measure of `{f_* < t}`.
    pub fn distribution(&self, t: f64) -> f64 {
        let k = self.layers.partition_point(|l| l.value < t);
        if k == 0 {
            0.0
        } else {
            self.layers[k - 1].cumulative
        }
    }

    /// Model radius of the ball holding cumulative measure `c`.
    pub fn radius_at(&self, c: f64) -> f64 {
        let c = match self.space.total_volume() {
            Some(v) => c.min(v),
            None => c,
        };
        self.space.ball_volume_inverse_unchecked(c.max(0.0))
    }

    /// Largest radius of the profile's support.
    pub fn r_max(&self) -> f64 {
        self.space
            .max_radius()
            .unwrap_or_else(|| self.space.ball_volume_inverse_unchecked(self.total))
    }

    /// Integral of the profile over the cumulative-measure window `[lo, hi]`.
    pub(crate) fn window_integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        let mut k = self.layers.partition_point(|l| l.cumulative <= lo);
        let mut left = lo;
        while k < self.layers.len() && left < hi {
            let right = self.layers[k].cumulative.min(hi);
            acc += self.layers[k].value * (right - left);
            left = right;
            k += 1;
        }
        acc
    }

    /// Mean of the profile over `[lo, hi]`; exactly the layer value when a
    /// single layer covers the window.
    pub(crate) fn window_mean(&self, lo: f64, hi: f64) -> f64 {
        let k = self
            .layers
            .partition_point(|l| l.cumulative <= lo)
            .min(self.layers.len() - 1);
        if self.layers[k].cumulative >= hi {
            return self.layers[k].value;
        }
        self.window_integral(lo, hi) / (hi - lo)
    }

    /// CSV with columns `cumulative_measure,value,radius`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cumulative_measure,value,radius\n");
        for (c, t) in self.breakpoints() {
            let _ = writeln!(s, "{},{},{}", c, t, self.radius_at(c));
        }
        s
    }
}

/// Resamples the profile onto `n_bins` equal-radius cells of the model by
/// measure-weighted averaging; returns the radial chain and the bin values.
pub fn profile_pushforward(
    profile: &RadialProfile,
    n_bins: usize,
) -> Result<(DiscreteManifold, ScalarField)> {
    let space = *profile.space();
    let grid = RadialGrid::equal_radius(space, n_bins, profile.r_max())?;
    let mut cum: Vec<f64> = grid
        .faces()
        .iter()
        .map(|&r| space.ball_volume_unchecked(r))
        .collect();
    cum[0] = 0.0;
    *cum.last_mut().unwrap() = profile.total();
    for k in 1..cum.len() {
        cum[k] = cum[k].max(cum[k - 1]).min(profile.total());
    }
    let measures: Vec<f64> = cum.windows(2).map(|w| w[1] - w[0]).collect();
    let values: Vec<f64> = cum
        .windows(2)
        .map(|w| {
            if w[1] > w[0] {
                profile.window_mean(w[0], w[1])
            } else {
                profile.value_at(w[0])
            }
        })
        .collect();
    let grid = grid.with_measures(measures)?;
    Ok((grid.to_manifold()?, ScalarField::new(values)?))
}

/// Dirichlet energy of the pushforward, discretising `∫ φ'(r)² A'(r) dr`.
pub fn profile_energy(profile: &RadialProfile, n_bins: usize) -> Result<f64> {
    let (m, f) = profile_pushforward(profile, n_bins)?;
    m.dirichlet_energy(&f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PolyaSzego {
    /// Dirichlet energy of the field.
    pub lhs: f64,
    /// `factor` times the energy of the rearranged profile.
    pub rhs: f64,
    /// `(V / V_m)^(2/m)` for the sphere model, 1 otherwise.
    pub factor: f64,
}

/// Energy comparison between a field and its rearrangement. The inequality
/// `lhs ≥ rhs` holds for manifolds with `Ric ≥ m − 1`; the caller is
/// responsible for that hypothesis.
pub fn polya_szego_check(
    manifold: &DiscreteManifold,
    field: &ScalarField,
    space: ModelSpace,
) -> Result<PolyaSzego> {
    polya_szego_check_with_bins(
        manifold,
        field,
        space,
        mesh_profile_bins(manifold.vertex_count()),
    )
}

/// Bin count matched to a mesh of `n` vertices, about `√n`. Finer bins
/// resolve the scatter of vertex measures as radial jitter and overstate
/// the energy of the rearranged field.
pub fn mesh_profile_bins(n: usize) -> usize {
    ((n as f64).sqrt().round() as usize).clamp(8, DEFAULT_PROFILE_BINS)
}

pub fn polya_szego_check_with_bins(
    manifold: &DiscreteManifold,
    field: &ScalarField,
    space: ModelSpace,
    n_bins: usize,
) -> Result<PolyaSzego> {
    let lhs = manifold.dirichlet_energy(field)?;
    let profile = rearrange(manifold, field, space)?;
    let factor = sphere_factor(&space);
    let rhs = factor * profile_energy(&profile, n_bins)?;
    Ok(PolyaSzego { lhs, rhs, factor })
}

pub(crate) fn sphere_factor(space: &ModelSpace) -> f64 {
    match space {
        ModelSpace::SphereOfVolume { .. } => space.scale().powi(2),
        _ => 1.0,
    }
}

/// Sup distance between two profiles over their common cumulative-measure
/// range.
pub fn profile_sup_gap(a: &RadialProfile, b: &RadialProfile) -> f64 {
    let (la, lb) = (a.layers(), b.layers());
    let (mut i, mut j) = (0, 0);
    let mut gap: f64 = 0.0;
    while i < la.len() && j < lb.len() {
        gap = gap.max((la[i].value - lb[j].value).abs());
        let (ca, cb) = (la[i].cumulative, lb[j].cumulative);
        if ca <= cb {
            i += 1;
        }
        if cb <= ca {
            j += 1;
        }
    }
    gap
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupContraction {
    pub profile_gap: f64,
    pub field_gap: f64,
}

/// Compares `sup |f_* − g_*|` with `sup |f − g|`.
pub fn sup_contraction_check(
    manifold: &DiscreteManifold,
    f: &ScalarField,
    g: &ScalarField,
    space: ModelSpace,
) -> Result<SupContraction> {
    manifold.check_len(g.len())?;
    let pf = rearrange(manifold, f, space)?;
    let pg = rearrange(manifold, g, space)?;
    // Ghost vertices of zero measure do not take part in the rearrangement.
    let field_gap = f
        .values()
        .iter()
        .zip(g.values())
        .zip(manifold.measures())
        .filter(|(_, &mu)| mu > 0.0)
        .fold(0.0f64, |acc, ((a, b), _)| acc.max((a - b).abs()));
    Ok(SupContraction {
        profile_gap: profile_sup_gap(&pf, &pg),
        field_gap,
    })
}
