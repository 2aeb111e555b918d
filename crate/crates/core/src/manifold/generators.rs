use std::collections::{HashMap, VecDeque};

use log::warn;

use super::{DiscreteManifold, Edge, Embedding, ProductStructure};
use crate::error::{Error, Result};
use crate::model_spaces::ModelSpace;

/// Circle of the given length sampled at `n` equally spaced points.
pub fn make_circle(length: f64, n: usize) -> Result<DiscreteManifold> {
    if n < 3 {
        return Err(Error::mesh(format!(
            "a circle needs at least 3 vertices, got {n}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::mesh(format!(
            "circle length must be positive, got {length}"
        )));
    }
    let h = length / n as f64;
    let edges = (0..n)
        .map(|i| Edge {
            i,
            j: (i + 1) % n,
            weight: 1.0 / h,
        })
        .collect();
    let coords = (0..n).map(|i| [i as f64 * h, 0.0, 0.0]).collect();
    Ok(
        DiscreteManifold::new(1, vec![h; n], edges, vec![false; n])?.with_embedding(Embedding {
            coords,
            triangles: Vec::new(),
        }),
    )
}

/// Closed interval `[0, length]` with `n` vertices including both ends,
/// which are flagged as boundary.
pub fn make_interval(length: f64, n: usize) -> Result<DiscreteManifold> {
    if n < 3 {
        return Err(Error::mesh(format!(
            "an interval needs at least 3 vertices, got {n}"
        )));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::mesh(format!(
            "interval length must be positive, got {length}"
        )));
    }
    let h = length / (n - 1) as f64;
    let mut measures = vec![h; n];
    measures[0] = 0.5 * h;
    measures[n - 1] = 0.5 * h;
    let edges = (0..n - 1)
        .map(|i| Edge {
            i,
            j: i + 1,
            weight: 1.0 / h,
        })
        .collect();
    let mut boundary = vec![false; n];
    boundary[0] = true;
    boundary[n - 1] = true;
    let coords = (0..n).map(|i| [i as f64 * h, 0.0, 0.0]).collect();
    Ok(
        DiscreteManifold::new(1, measures, edges, boundary)?.with_embedding(Embedding {
            coords,
            triangles: Vec::new(),
        }),
    )
}

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: V3) -> V3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Area of the geodesic triangle spanned by three unit vectors.
fn spherical_triangle_area(a: V3, b: V3, c: V3) -> f64 {
    let triple = dot(a, cross(b, c)).abs();
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * triple.atan2(denom)
}

/// Cotangent of the angle at `p` in the flat triangle `p q r`.
fn cot_at(p: V3, q: V3, r: V3) -> f64 {
    let u = sub(q, p);
    let v = sub(r, p);
    dot(u, v) / norm(cross(u, v))
}

/// Icosahedron refined `subdivisions` times by edge midpoints projected to
/// the unit sphere.
///
/// Vertex measures are one third of the incident spherical triangle areas,
/// so they add up to 4π at every level; edge weights are the cotangent
/// weights of the flat triangles.
pub fn make_icosphere(subdivisions: usize) -> Result<DiscreteManifold> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<V3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(normalize)
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<V3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }

    let n = verts.len();
    let mut measures = vec![0.0; n];
    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    for &[a, b, c] in &tris {
        let (pa, pb, pc) = (verts[a], verts[b], verts[c]);
        let third = spherical_triangle_area(pa, pb, pc) / 3.0;
        for v in [a, b, c] {
            measures[v] += third;
        }
        for (i, j, k) in [(a, b, c), (b, c, a), (c, a, b)] {
            let key = (i.min(j), i.max(j));
            *weights.entry(key).or_insert(0.0) += 0.5 * cot_at(verts[k], verts[i], verts[j]);
        }
    }
    let mut keys: Vec<_> = weights.keys().copied().collect();
    keys.sort_unstable();
    let mut clamped = 0;
    let edges = keys
        .into_iter()
        .map(|(i, j)| {
            let mut w = weights[&(i, j)];
            if w < 0.0 {
                clamped += 1;
                w = 0.0;
            }
            Edge { i, j, weight: w }
        })
        .collect();
    if clamped > 0 {
        warn!("icosphere({subdivisions}): clamped {clamped} negative cotangent weights to zero");
    }
    Ok(
        DiscreteManifold::new(2, measures, edges, vec![false; n])?.with_embedding(Embedding {
            coords: verts,
            triangles: tris,
        }),
    )
}

/// Rectangular boolean grid, row-major with `nx` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMask {
    nx: usize,
    ny: usize,
    cells: Vec<bool>,
    /// Position of cell `(0, 0)`.
    origin: [f64; 2],
}

impl GridMask {
    pub fn new(nx: usize, ny: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != nx * ny {
            return Err(Error::Shape {
                expected: nx * ny,
                got: cells.len(),
            });
        }
        Ok(GridMask {
            nx,
            ny,
            cells,
            origin: [0.0, 0.0],
        })
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let cells = (0..ny)
            .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| f(ix, iy))
            .collect();
        GridMask {
            nx,
            ny,
            cells,
            origin: [0.0, 0.0],
        }
    }

    /// Samples `inside` at the nodes `(x0 + i h, y0 + j h)` covering the box
    /// `[x0, x1] × [y0, y1]`.
    pub fn sample(
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        spacing: f64,
        mut inside: impl FnMut(f64, f64) -> bool,
    ) -> Self {
        let nx = ((x1 - x0) / spacing).round() as usize + 1;
        let ny = ((y1 - y0) / spacing).round() as usize + 1;
        let mut mask = Self::from_fn(nx, ny, |ix, iy| {
            inside(x0 + ix as f64 * spacing, y0 + iy as f64 * spacing)
        });
        mask.origin = [x0, y0];
        mask
    }

    /// Nodes whose signed distance to the circle of radius `radius` about
    /// `center` exceeds `-spacing / 2`.
    pub fn disc(center: [f64; 2], radius: f64, spacing: f64) -> Self {
        let k = (radius / spacing).ceil() + 1.0;
        let ext = k * spacing;
        Self::sample(
            center[0] - ext,
            center[0] + ext,
            center[1] - ext,
            center[1] + ext,
            spacing,
            |x, y| radius - (x - center[0]).hypot(y - center[1]) > -0.5 * spacing,
        )
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.cells[iy * self.nx + ix]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
}

/// 5-point grid graph on the cells of `mask`.
///
/// Measures are `spacing²` and weights 1, so `Σ (Δf)²` approximates
/// `∫|∇f|²`. Mask cells with a 4-neighbour outside the mask are boundary.
pub fn make_planar_domain(mask: &GridMask, spacing: f64) -> Result<DiscreteManifold> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::mesh(format!(
            "grid spacing must be positive, got {spacing}"
        )));
    }
    let (nx, ny) = (mask.nx, mask.ny);
    let mut id = vec![usize::MAX; nx * ny];
    let mut coords = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            if mask.get(ix, iy) {
                id[iy * nx + ix] = coords.len();
                let o = mask.origin;
                coords.push([o[0] + ix as f64 * spacing, o[1] + iy as f64 * spacing, 0.0]);
            }
        }
    }
    let n = coords.len();
    if n == 0 {
        return Err(Error::mesh("planar mask is empty"));
    }
    let inside = |ix: isize, iy: isize| -> bool {
        ix >= 0
            && iy >= 0
            && (ix as usize) < nx
            && (iy as usize) < ny
            && mask.get(ix as usize, iy as usize)
    };
    let mut edges = Vec::new();
    let mut boundary = vec![false; n];
    for iy in 0..ny {
        for ix in 0..nx {
            if !mask.get(ix, iy) {
                continue;
            }
            let v = id[iy * nx + ix];
            let (sx, sy) = (ix as isize, iy as isize);
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                if !inside(sx + dx, sy + dy) {
                    boundary[v] = true;
                }
            }
            if inside(sx + 1, sy) {
                edges.push(Edge {
                    i: v,
                    j: id[iy * nx + ix + 1],
                    weight: 1.0,
                });
            }
            if inside(sx, sy + 1) {
                edges.push(Edge {
                    i: v,
                    j: id[(iy + 1) * nx + ix],
                    weight: 1.0,
                });
            }
        }
    }
    let m = DiscreteManifold::new(2, vec![spacing * spacing; n], edges, boundary)?.with_embedding(
        Embedding {
            coords,
            triangles: Vec::new(),
        },
    );
    if component_count(&m) != 1 {
        return Err(Error::mesh("planar mask is not 4-connected"));
    }
    Ok(m)
}

fn component_count(m: &DiscreteManifold) -> usize {
    let adj = m.adjacency();
    let mut seen = vec![false; m.vertex_count()];
    let mut count = 0;
    for start in 0..m.vertex_count() {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    count
}

/// Product of `base` with one fiber graph per base vertex, all fibers having
/// the same vertex count. Vertex `(s, x)` gets measure `μ_B(s) μ_s(x)`,
/// vertical edges weight `μ_B(s) w_s(x, y)` and horizontal edges
/// `w_B(s, t) (μ_s(x) + μ_t(x)) / 2`. Boundary flags come from the fibers.
pub fn make_fibered_product(
    base: &DiscreteManifold,
    fibers: &[DiscreteManifold],
) -> Result<DiscreteManifold> {
    let nb = base.vertex_count();
    if fibers.len() != nb {
        return Err(Error::Shape {
            expected: nb,
            got: fibers.len(),
        });
    }
    let nf = fibers[0].vertex_count();
    let fiber_dim = fibers[0].dim();
    if let Some(f) = fibers.iter().find(|f| f.vertex_count() != nf) {
        return Err(Error::Shape {
            expected: nf,
            got: f.vertex_count(),
        });
    }
    let mut measures = Vec::with_capacity(nb * nf);
    let mut boundary = Vec::with_capacity(nb * nf);
    for (s, fiber) in fibers.iter().enumerate() {
        let mu_b = base.measures()[s];
        measures.extend(fiber.measures().iter().map(|&mu| mu_b * mu));
        boundary.extend_from_slice(fiber.boundary());
    }
    let mut edges = Vec::with_capacity(nb * fibers[0].edges().len() + base.edges().len() * nf);
    for (s, fiber) in fibers.iter().enumerate() {
        let mu_b = base.measures()[s];
        edges.extend(fiber.edges().iter().map(|e| Edge {
            i: s * nf + e.i,
            j: s * nf + e.j,
            weight: e.weight * mu_b,
        }));
    }
    for e in base.edges() {
        let (fs, ft) = (&fibers[e.i], &fibers[e.j]);
        for x in 0..nf {
            let mean = 0.5 * (fs.measures()[x] + ft.measures()[x]);
            edges.push(Edge {
                i: e.i * nf + x,
                j: e.j * nf + x,
                weight: e.weight * mean,
            });
        }
    }
    DiscreteManifold::new(base.dim() + fiber_dim, measures, edges, boundary)
}

/// Warped product `base ×_ρ fiber` with metric `h + ρ² g`.
///
/// With `m` the fiber dimension, measures are `μ_B(s) ρ(s)^m μ_F(x)`,
/// vertical weights `w_F μ_B(s) ρ(s)^(m-2)` and horizontal weights
/// `w_B μ_F(x) (ρ(s)^m + ρ(t)^m) / 2`.
pub fn make_warped_product(
    base: &DiscreteManifold,
    fiber: &DiscreteManifold,
    rho: &[f64],
) -> Result<DiscreteManifold> {
    let nb = base.vertex_count();
    if rho.len() != nb {
        return Err(Error::Shape {
            expected: nb,
            got: rho.len(),
        });
    }
    if !base.is_closed() || !fiber.is_closed() {
        return Err(Error::mesh(
            "warped products are assembled from closed factors only",
        ));
    }
    if let Some(r) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::domain(format!(
            "warping function must be positive, got {r}"
        )));
    }
    let nf = fiber.vertex_count();
    let m = fiber.dim() as i32;
    let mut measures = Vec::with_capacity(nb * nf);
    for s in 0..nb {
        let scale = base.measures()[s] * rho[s].powi(m);
        measures.extend(fiber.measures().iter().map(|&mu| scale * mu));
    }
    let mut edges = Vec::with_capacity(nb * fiber.edges().len() + base.edges().len() * nf);
    for s in 0..nb {
        let scale = base.measures()[s] * rho[s].powi(m - 2);
        edges.extend(fiber.edges().iter().map(|e| Edge {
            i: s * nf + e.i,
            j: s * nf + e.j,
            weight: e.weight * scale,
        }));
    }
    for e in base.edges() {
        let mean = 0.5 * (rho[e.i].powi(m) + rho[e.j].powi(m));
        for x in 0..nf {
            edges.push(Edge {
                i: e.i * nf + x,
                j: e.j * nf + x,
                weight: e.weight * fiber.measures()[x] * mean,
            });
        }
    }
    let product = DiscreteManifold::new(
        base.dim() + fiber.dim(),
        measures,
        edges,
        vec![false; nb * nf],
    )?;
    Ok(product.with_structure(ProductStructure {
        base: base.clone(),
        fiber: fiber.clone(),
        rho: rho.to_vec(),
        fiber_dim: fiber.dim(),
    }))
}

/// Riemannian product, the warped product with `ρ ≡ 1`.
pub fn make_product(base: &DiscreteManifold, fiber: &DiscreteManifold) -> Result<DiscreteManifold> {
    make_warped_product(base, fiber, &vec![1.0; base.vertex_count()])
}

/// Cell-centred radial discretisation of a model space on `[0, r_max]`.
///
/// Cells are delimited by `faces`; each cell carries the model volume between
/// its faces, and consecutive cells are joined with weight
/// `A'(face) / (distance between centres)`, which discretises
/// `∫ φ'(r)² A'(r) dr`.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    space: ModelSpace,
    faces: Vec<f64>,
    measures: Vec<f64>,
}

impl RadialGrid {
    fn check(space: &ModelSpace, n: usize, r_max: f64) -> Result<()> {
        if n < 2 {
            return Err(Error::mesh(format!(
                "radial grids need at least 2 cells, got {n}"
            )));
        }
        let bad = !(r_max.is_finite() && r_max > 0.0)
            || space
                .max_radius()
                .is_some_and(|rv| r_max > rv * (1.0 + 1e-12));
        if bad {
            return Err(Error::domain(format!(
                "radial extent {r_max} is outside the model"
            )));
        }
        Ok(())
    }

    /// `n` cells of equal radial width.
    pub fn equal_radius(space: ModelSpace, n: usize, r_max: f64) -> Result<Self> {
        Self::check(&space, n, r_max)?;
        let r_max = space.max_radius().map_or(r_max, |rv| r_max.min(rv));
        let faces: Vec<f64> = (0..=n).map(|k| r_max * k as f64 / n as f64).collect();
        let a: Vec<f64> = faces
            .iter()
            .map(|&r| space.ball_volume_unchecked(r))
            .collect();
        let measures = a.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(RadialGrid {
            space,
            faces,
            measures,
        })
    }

    /// `n` cells of volume `volume / n` each, filling the ball of that volume.
    pub fn equal_measure(space: ModelSpace, n: usize, volume: f64) -> Result<Self> {
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::domain(format!(
                "radial grid volume must be positive, got {volume}"
            )));
        }
        let r_max = space.ball_volume_inverse(volume)?;
        Self::check(&space, n, r_max)?;
        let mut faces: Vec<f64> = (0..=n)
            .map(|k| space.ball_volume_inverse_unchecked(volume * k as f64 / n as f64))
            .collect();
        faces[n] = r_max;
        Ok(RadialGrid {
            space,
            faces,
            measures: vec![volume / n as f64; n],
        })
    }

    /// Replaces the cell measures, e.g. to pin their sum to a known total.
    pub(crate) fn with_measures(mut self, measures: Vec<f64>) -> Result<Self> {
        if measures.len() != self.measures.len()
            || measures.iter().any(|m| !(m.is_finite() && *m >= 0.0))
        {
            return Err(Error::domain(
                "radial cell measures must match the grid and be nonnegative",
            ));
        }
        self.measures = measures;
        Ok(self)
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn cell_count(&self) -> usize {
        self.measures.len()
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn centers(&self) -> Vec<f64> {
        self.faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn r_max(&self) -> f64 {
        *self.faces.last().unwrap()
    }

    /// The closed chain, Neumann at the outer face.
    pub fn to_manifold(&self) -> Result<DiscreteManifold> {
        self.assemble(false)
    }

    /// The chain with an extra zero-measure boundary vertex at `r_max`,
    /// imposing the Dirichlet condition at the outer face.
    pub fn to_dirichlet_manifold(&self) -> Result<DiscreteManifold> {
        self.assemble(true)
    }

    fn assemble(&self, ghost: bool) -> Result<DiscreteManifold> {
        let n = self.cell_count();
        let centers = self.centers();
        let mut edges: Vec<Edge> = (0..n - 1)
            .map(|k| Edge {
                i: k,
                j: k + 1,
                weight: self.space.boundary_area_unchecked(self.faces[k + 1])
                    / (centers[k + 1] - centers[k]),
            })
            .collect();
        let mut measures = self.measures.clone();
        let mut boundary = vec![false; n];
        let mut coords: Vec<[f64; 3]> = centers.iter().map(|&r| [r, 0.0, 0.0]).collect();
        if ghost {
            let r = self.r_max();
            edges.push(Edge {
                i: n - 1,
                j: n,
                weight: self.space.boundary_area_unchecked(r) / (r - centers[n - 1]),
            });
            measures.push(0.0);
            boundary.push(true);
            coords.push([r, 0.0, 0.0]);
        }
        Ok(
            DiscreteManifold::new(self.space.dim(), measures, edges, boundary)?.with_embedding(
                Embedding {
                    coords,
                    triangles: Vec::new(),
                },
            ),
        )
    }
}

/// Equal-radius radial chain of `n_bins` cells on `[0, r_max]`.
pub fn make_radial_model(space: ModelSpace, n_bins: usize, r_max: f64) -> Result<DiscreteManifold> {
    RadialGrid::equal_radius(space, n_bins, r_max)?.to_manifold()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ScalarField;
    use std::f64::consts::PI;

    #[test]
    fn circle_basics() {
        let c = make_circle(2.0 * PI, 8).unwrap();
        assert!((c.total_measure() - 2.0 * PI).abs() < 1e-14);
        assert!(make_circle(1.0, 2).is_err());
        let c = make_circle(1.0, 4).unwrap();
        let f = ScalarField::new(vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.dirichlet_energy(&f).unwrap(), 16.0);
    }

    #[test]
    fn icosphere_counts_and_measure() {
        let s0 = make_icosphere(0).unwrap();
        assert_eq!(s0.vertex_count(), 12);
        assert_eq!(s0.edges().len(), 30);
        assert!((s0.total_measure() / (4.0 * PI) - 1.0).abs() < 0.1);
        let mut prev = 0.0;
        for k in 0..=4 {
            let s = make_icosphere(k).unwrap();
            assert_eq!(s.vertex_count(), 10 * 4usize.pow(k as u32) + 2);
            let total = s.total_measure();
            assert!((total / (4.0 * PI) - 1.0).abs() < 1e-3);
            assert!(total >= prev - 1e-12);
            prev = total;
            assert!(s.edges().iter().all(|e| e.weight >= 0.0));
            assert_eq!(
                s.dirichlet_energy(&ScalarField::constant(&s, 3.0).unwrap())
                    .unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn linear_function_rayleigh_quotient_on_icosphere() {
        let s = make_icosphere(4).unwrap();
        let coords = s.coords().unwrap();
        let f = ScalarField::from_fn(&s, |i| coords[i][2]).unwrap();
        let rq = s.dirichlet_energy(&f).unwrap() / s.integrate(&f, 2.0).unwrap();
        assert!((rq - 2.0).abs() < 0.04, "rq = {rq}");
    }

    #[test]
    fn planar_domain_rules() {
        let single = GridMask::new(1, 1, vec![true]).unwrap();
        let m = make_planar_domain(&single, 0.1).unwrap();
        assert_eq!(m.interior_count(), 0);
        assert!(make_planar_domain(&GridMask::new(2, 2, vec![false; 4]).unwrap(), 0.1).is_err());
        let split = GridMask::new(3, 1, vec![true, false, true]).unwrap();
        assert!(make_planar_domain(&split, 0.1).is_err());
        let diag = GridMask::new(2, 2, vec![true, false, false, true]).unwrap();
        assert!(make_planar_domain(&diag, 0.1).is_err());
        let sq = GridMask::from_fn(5, 5, |_, _| true);
        let m = make_planar_domain(&sq, 0.5).unwrap();
        assert_eq!(m.vertex_count(), 25);
        assert_eq!(m.interior_count(), 9);
        assert_eq!(m.edges().len(), 40);
        assert!((m.total_measure() - 25.0 * 0.25).abs() < 1e-14);
    }

    #[test]
    fn disc_mask_is_symmetric() {
        let mask = GridMask::disc([0.0, 0.0], 1.0, 0.1);
        assert_eq!(mask.nx(), mask.ny());
        for iy in 0..mask.ny() {
            for ix in 0..mask.nx() {
                assert_eq!(mask.get(ix, iy), mask.get(mask.nx() - 1 - ix, iy));
                assert_eq!(mask.get(ix, iy), mask.get(iy, ix));
            }
        }
    }

    #[test]
    fn unwarped_product_assembly() {
        let b = make_circle(2.0, 5).unwrap();
        let f = make_icosphere(0).unwrap();
        let p = make_product(&b, &f).unwrap();
        let st = p.structure().unwrap();
        assert_eq!(p.vertex_count(), 60);
        assert_eq!(p.dim(), 3);
        for v in 0..p.vertex_count() {
            let (s, x) = st.decompose(v);
            assert_eq!(st.compose(s, x), v);
            assert_eq!(p.measures()[v], b.measures()[s] * f.measures()[x]);
        }
        assert_eq!(p.edges().len(), 5 * 30 + 5 * 12);
        assert!(make_warped_product(&b, &f, &[1.0; 4]).is_err());
        assert!(make_warped_product(&b, &f, &[1.0, 1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn constant_warping_scales_energy_components() {
        let b = make_circle(3.0, 6).unwrap();
        let fib = make_icosphere(1).unwrap();
        let p1 = make_product(&b, &fib).unwrap();
        let c: f64 = 1.7;
        let pc = make_warped_product(&b, &fib, &[c; 6]).unwrap();
        let field: Vec<f64> = (0..p1.vertex_count())
            .map(|i| ((i * 37 % 101) as f64 / 50.0) - 1.0)
            .collect();
        let split = |m: &DiscreteManifold| {
            let st = m.structure().unwrap();
            let (mut v, mut h) = (0.0, 0.0);
            for e in m.edges() {
                let d = field[e.i] - field[e.j];
                if st.is_vertical(e) {
                    v += e.weight * d * d;
                } else {
                    h += e.weight * d * d;
                }
            }
            (v, h)
        };
        let (v1, h1) = split(&p1);
        let (vc, hc) = split(&pc);
        assert!((vc - v1 * c.powi(0)).abs() <= 1e-12 * v1);
        assert!((hc - h1 * c.powi(2)).abs() <= 1e-12 * h1);
        let total = pc.energy_of(&field);
        assert!((total - (h1 * c.powi(2) + v1)).abs() <= 1e-12 * total);
    }

    #[test]
    fn fibered_product_matches_warped_assembly() {
        let b = make_circle(3.0, 4).unwrap();
        let fib = make_icosphere(0).unwrap();
        let rho = [1.0, 1.5, 0.5, 2.0];
        let warped = make_warped_product(&b, &fib, &rho).unwrap();
        let fibers: Vec<_> = rho
            .iter()
            .map(|&r: &f64| {
                let edges = fib
                    .edges()
                    .iter()
                    .map(|e| Edge {
                        weight: e.weight * r.powi(0),
                        ..*e
                    })
                    .collect();
                let mu = fib.measures().iter().map(|m| m * r.powi(2)).collect();
                DiscreteManifold::new(2, mu, edges, vec![false; 12]).unwrap()
            })
            .collect();
        let general = make_fibered_product(&b, &fibers).unwrap();
        let field: Vec<f64> = (0..48).map(|i| (i as f64 * 0.37).sin()).collect();
        let (a, g) = (warped.energy_of(&field), general.energy_of(&field));
        assert!((a - g).abs() < 1e-12 * a);
        for (x, y) in warped.measures().iter().zip(general.measures()) {
            assert!((x - y).abs() < 1e-14 * x);
        }
    }

    #[test]
    fn radial_model_measures_and_energy() {
        let s = ModelSpace::unit_sphere(2).unwrap();
        let m = make_radial_model(s, 64, PI).unwrap();
        assert!((m.total_measure() - 4.0 * PI).abs() < 1e-12);
        let e = ModelSpace::euclidean(2).unwrap();
        let mut prev_err = f64::INFINITY;
        for n in [64, 256, 1024] {
            let m = make_radial_model(e, n, 1.0).unwrap();
            let r: Vec<f64> = m.coords().unwrap().iter().map(|c| c[0]).collect();
            let err = (m.energy_of(&r) - PI).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-2);
        assert!(make_radial_model(s, 8, 3.2).is_err());
        assert!(make_radial_model(s, 1, 1.0).is_err());
    }

    #[test]
    fn equal_measure_grid() {
        let s = ModelSpace::unit_sphere(2).unwrap();
        let g = RadialGrid::equal_measure(s, 16, 2.0 * PI).unwrap();
        assert!((g.r_max() - PI / 2.0).abs() < 1e-12);
        assert!(g.measures().iter().all(|&m| m == 2.0 * PI / 16.0));
        let d = g.to_dirichlet_manifold().unwrap();
        assert_eq!(d.vertex_count(), 17);
        assert_eq!(d.interior_count(), 16);
        assert_eq!(d.measures()[16], 0.0);
    }
}
