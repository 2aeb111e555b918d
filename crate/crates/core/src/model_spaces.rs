//! Radial geometry of the constant-curvature model spaces.
//!
//! Every model is described around a base point by its ball-volume function
//! `A(r)` and the area `A'(r)` of the geodesic sphere of radius `r`. The
//! sphere model is the round sphere rescaled to a prescribed total volume `V`,
//! with scale factor `a = (V / V_m)^(1/m)`, so radii live in the rescaled
//! metric and range over `[0, π a]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

/// Quadrature panel width used for the sine and sinh power integrals.
const PANEL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpace {
    SphereOfVolume { dim: usize, volume: f64 },
    Euclidean { dim: usize },
    Hyperbolic { dim: usize },
}

/// Volume of the unit round sphere `S^m`.
pub fn unit_sphere_volume(m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidDimension(m));
    }
    Ok(unit_sphere_volume_unchecked(m))
}

/// Same recurrence, extended with `V_0 = 2` (two points).
fn unit_sphere_volume_unchecked(m: usize) -> f64 {
    let (mut even, mut odd) = (2.0, 2.0 * PI);
    if m == 0 {
        return even;
    }
    for k in 2..=m {
        if k % 2 == 0 {
            even *= 2.0 * PI / (k - 1) as f64;
        } else {
            odd *= 2.0 * PI / (k - 1) as f64;
        }
    }
    if m % 2 == 0 {
        even
    } else {
        odd
    }
}

/// `∫_0^x sin^k t dt` for `0 ≤ x ≤ π`.
fn sine_power_integral(k: usize, x: f64) -> f64 {
    match k {
        0 => x,
        1 => {
            let s = (0.5 * x).sin();
            2.0 * s * s
        }
        _ => numeric::integrate(|t| t.sin().powi(k as i32), 0.0, x, PANEL),
    }
}

/// `∫_0^x sinh^k t dt` for `x ≥ 0`.
fn sinh_power_integral(k: usize, x: f64) -> f64 {
    match k {
        0 => x,
        1 => {
            let s = (0.5 * x).sinh();
            2.0 * s * s
        }
        _ => numeric::integrate(|t| t.sinh().powi(k as i32), 0.0, x, PANEL),
    }
}

impl ModelSpace {
    /// Round sphere of dimension `dim` rescaled to total volume `volume`.
    pub fn sphere(dim: usize, volume: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::domain(format!(
                "sphere volume must be positive, got {volume}"
            )));
        }
        Ok(ModelSpace::SphereOfVolume { dim, volume })
    }

    /// The unit round sphere, i.e. volume `V_m`.
    pub fn unit_sphere(dim: usize) -> Result<Self> {
        Self::sphere(dim, unit_sphere_volume(dim)?)
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(ModelSpace::Euclidean { dim })
    }

    pub fn hyperbolic(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(ModelSpace::Hyperbolic { dim })
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpace::SphereOfVolume { dim, .. }
            | ModelSpace::Euclidean { dim }
            | ModelSpace::Hyperbolic { dim } => dim,
        }
    }

    /// Total volume, finite only for the sphere model.
    pub fn total_volume(&self) -> Option<f64> {
        match *self {
            ModelSpace::SphereOfVolume { volume, .. } => Some(volume),
            _ => None,
        }
    }

    /// Radial scale `(V / V_m)^(1/m)` of the sphere model, 1 otherwise.
    pub fn scale(&self) -> f64 {
        match *self {
            ModelSpace::SphereOfVolume { dim, volume } => {
                (volume / unit_sphere_volume_unchecked(dim)).powf(1.0 / dim as f64)
            }
            _ => 1.0,
        }
    }

    /// Largest admissible radius: `R_V = π a` for the sphere, `None` otherwise.
    pub fn max_radius(&self) -> Option<f64> {
        match self {
            ModelSpace::SphereOfVolume { .. } => Some(PI * self.scale()),
            _ => None,
        }
    }

    /// Short lowercase name used in reports and file output.
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpace::SphereOfVolume { .. } => "sphere",
            ModelSpace::Euclidean { .. } => "euclidean",
            ModelSpace::Hyperbolic { .. } => "hyperbolic",
        }
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::domain(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        if let Some(rmax) = self.max_radius() {
            if r > rmax {
                return Err(Error::domain(format!(
                    "radius {r} exceeds model diameter {rmax}"
                )));
            }
        }
        Ok(())
    }

    /// Volume `A(r)` of the geodesic ball of radius `r` about the base point.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.ball_volume_unchecked(r))
    }

    pub(crate) fn ball_volume_unchecked(&self, r: f64) -> f64 {
        let m = self.dim();
        let omega = unit_sphere_volume_unchecked(m - 1);
        match *self {
            ModelSpace::SphereOfVolume { volume, .. } => {
                let a = self.scale();
                let x = (r / a).min(PI);
                if x >= PI {
                    return volume;
                }
                a.powi(m as i32) * omega * sine_power_integral(m - 1, x)
            }
            ModelSpace::Euclidean { .. } => omega * r.powi(m as i32) / m as f64,
            ModelSpace::Hyperbolic { .. } => omega * sinh_power_integral(m - 1, r),
        }
    }

    /// Radius of the ball of volume `v`.
    pub fn ball_volume_inverse(&self, v: f64) -> Result<f64> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::domain(format!(
                "volume must be nonnegative, got {v}"
            )));
        }
        if let Some(total) = self.total_volume() {
            // Rounding in a summed measure may overshoot by a few ulps.
            if v > total * (1.0 + 1e-12) {
                return Err(Error::domain(format!(
                    "volume {v} exceeds model volume {total}"
                )));
            }
        }
        Ok(self.ball_volume_inverse_unchecked(v))
    }

    pub(crate) fn ball_volume_inverse_unchecked(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let m = self.dim();
        let omega = unit_sphere_volume_unchecked(m - 1);
        let (mut lo, mut hi) = match *self {
            ModelSpace::Euclidean { .. } => {
                return (m as f64 * v / omega).powf(1.0 / m as f64);
            }
            ModelSpace::SphereOfVolume { volume, .. } => {
                let rmax = PI * self.scale();
                if v >= volume {
                    return rmax;
                }
                (0.0, rmax)
            }
            ModelSpace::Hyperbolic { .. } => {
                let mut hi = 1.0;
                while self.ball_volume_unchecked(hi) < v {
                    hi *= 2.0;
                }
                (0.0, hi)
            }
        };
        // Start from the Euclidean small-ball radius, then Newton steps kept
        // inside a shrinking bracket.
        let mut r = ((m as f64 * v / omega).powf(1.0 / m as f64)).clamp(lo, hi);
        if r <= lo || r >= hi {
            r = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let f = self.ball_volume_unchecked(r) - v;
            if f.abs() <= 1e-15 * v {
                return r;
            }
            if f < 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let d = self.boundary_area_unchecked(r);
            let mut next = if d > 0.0 { r - f / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == r || hi - lo <= 2.0 * f64::EPSILON * hi {
                return next;
            }
            r = next;
        }
        r
    }

    /// Area `A'(r)` of the geodesic sphere of radius `r`, for `r` strictly
    /// inside the radial domain.
    pub fn boundary_area(&self, r: f64) -> Result<f64> {
        let inside = r.is_finite() && r > 0.0 && self.max_radius().is_none_or(|rmax| r < rmax);
        if !inside {
            return Err(Error::domain(format!(
                "radius {r} is not interior to the model"
            )));
        }
        Ok(self.boundary_area_unchecked(r))
    }

    pub(crate) fn boundary_area_unchecked(&self, r: f64) -> f64 {
        let m = self.dim();
        let omega = unit_sphere_volume_unchecked(m - 1);
        let k = (m - 1) as i32;
        match self {
            ModelSpace::SphereOfVolume { .. } => {
                let a = self.scale();
                let x = (r / a).clamp(0.0, PI);
                a.powi(k) * omega * x.sin().max(0.0).powi(k)
            }
            ModelSpace::Euclidean { .. } => omega * r.powi(k),
            ModelSpace::Hyperbolic { .. } => omega * r.sinh().powi(k),
        }
    }

    /// Isoperimetric profile `h(β)` of the sphere model: boundary area of the
    /// ball holding a fraction `β` of the volume, divided by the volume.
    pub fn isoperimetric_profile(&self, beta: f64) -> Result<f64> {
        let Some(volume) = self.total_volume() else {
            return Err(Error::domain(
                "isoperimetric profile is defined for the sphere model only",
            ));
        };
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!(
                "volume fraction must lie in (0,1), got {beta}"
            )));
        }
        let r = self.ball_volume_inverse_unchecked(beta * volume);
        Ok(self.boundary_area_unchecked(r) / volume)
    }
}
