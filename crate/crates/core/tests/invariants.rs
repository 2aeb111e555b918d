//! Property tests of the structural invariants through the public API.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;

use symmlab::comparisons::{check_lichnerowicz, check_polya_szego, CheckConfig};
use symmlab::functionals::{warped_scalar_curvature, yamabe_functional};
use symmlab::manifold::io::{mesh_to_string, read_mesh_str};
use symmlab::manifold::{
    make_circle, make_icosphere, make_planar_domain, make_product, make_warped_product, GridMask,
};
use symmlab::numeric::seeded_rng;
use symmlab::rearrangement::{
    fiberwise_rearrange, fiberwise_sup_gap, profile_pushforward, rearrange,
};
use symmlab::spectrum::{lambda1_closed, lambda1_dirichlet, rayleigh_quotient};
use symmlab::{DiscreteManifold, ModelSpace, ScalarField, SolverOptions};

fn random_field(m: &DiscreteManifold, seed: u64) -> ScalarField {
    let mut rng = seeded_rng(seed);
    ScalarField::new(
        (0..m.vertex_count())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap()
}

fn edge_energy(m: &DiscreteManifold, f: &[f64], keep: impl Fn(usize, usize) -> bool) -> f64 {
    m.edges()
        .iter()
        .filter(|e| keep(e.i, e.j))
        .map(|e| e.weight * (f[e.i] - f[e.j]).powi(2))
        .sum()
}

fn model(kind: u8, m: usize) -> ModelSpace {
    match kind {
        0 => ModelSpace::unit_sphere(m).unwrap(),
        1 => ModelSpace::euclidean(m).unwrap(),
        _ => ModelSpace::hyperbolic(m).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn ball_volume_round_trip(kind in 0u8..3, m in 1usize..=4, t in 0.01f64..0.99) {
        let space = model(kind, m);
        let r = t * space.max_radius().unwrap_or(4.0);
        let v = space.ball_volume(r).unwrap();
        let back = space.ball_volume_inverse(v).unwrap();
        prop_assert!((back - r).abs() <= 1e-10 * r, "{space:?} r {r} back {back}");
    }

    #[test]
    fn boundary_area_is_the_volume_derivative(kind in 0u8..3, m in 1usize..=4, t in 0.05f64..0.95) {
        let space = model(kind, m);
        let r = t * space.max_radius().unwrap_or(3.0);
        let h = 1e-5 * r;
        let fd = (space.ball_volume(r + h).unwrap() - space.ball_volume(r - h).unwrap()) / (2.0 * h);
        let a = space.boundary_area(r).unwrap();
        prop_assert!((fd / a - 1.0).abs() < 1e-6, "{fd} vs {a}");
    }

    #[test]
    fn sphere_profile_rescales(m in 2usize..=4, lambda in 0.2f64..5.0, beta in 0.02f64..0.98) {
        let unit = ModelSpace::unit_sphere(m).unwrap();
        let vm = unit.total_volume().unwrap();
        // Scaling the metric by λ multiplies volume by λ^(m/2).
        let scaled = ModelSpace::sphere(m, vm * lambda.powf(m as f64 / 2.0)).unwrap();
        let h1 = unit.isoperimetric_profile(beta).unwrap();
        let hl = scaled.isoperimetric_profile(beta).unwrap();
        prop_assert!((hl / (h1 / lambda.sqrt()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn product_indexing_round_trips(nb in 3usize..9, nf in 3usize..9) {
        let p = make_product(&make_circle(1.0, nb).unwrap(), &make_circle(2.0, nf).unwrap()).unwrap();
        let st = p.structure().unwrap();
        for s in 0..nb {
            for x in 0..nf {
                prop_assert_eq!(st.decompose(st.compose(s, x)), (s, x));
            }
        }
    }

    #[test]
    fn constant_warping_scales_energy_parts(c in 0.2f64..3.0, seed in 0u64..1000, level in 0usize..2) {
        let base = make_circle(2.0 * PI, 7).unwrap();
        let fiber = make_icosphere(level).unwrap();
        let p = make_product(&base, &fiber).unwrap();
        let w = make_warped_product(&base, &fiber, &[c; 7]).unwrap();
        let f = random_field(&p, seed);
        let st = p.structure().unwrap();
        let nf = st.fiber_vertex_count();
        let vert = edge_energy(&p, f.values(), |i, j| i / nf == j / nf);
        let horiz = edge_energy(&p, f.values(), |i, j| i / nf != j / nf);
        let expect = horiz * c * c + vert;
        let got = w.dirichlet_energy(&f).unwrap();
        prop_assert!((got / expect - 1.0).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn mesh_text_round_trip(level in 0usize..3, bits in prop::collection::vec(any::<bool>(), 0..12)) {
        let m = make_icosphere(level).unwrap();
        let mut boundary = m.boundary().to_vec();
        for (b, flag) in boundary.iter_mut().zip(bits) {
            *b = flag;
        }
        let m = m.with_boundary(boundary).unwrap();
        let text = mesh_to_string(&m);
        let back = read_mesh_str(&text).unwrap();
        prop_assert_eq!(mesh_to_string(&back), text);
        prop_assert_eq!(back.measures(), m.measures());
    }

    #[test]
    fn yamabe_quotient_is_homogeneous(c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], seed in 0u64..1000) {
        let base = make_circle(2.0 * PI, 8).unwrap();
        let p = make_product(&base, &make_icosphere(1).unwrap()).unwrap();
        let scal = vec![2.0; p.vertex_count()];
        let f = random_field(&p, seed).map(|v| v + 2.0).unwrap();
        let y1 = yamabe_functional(&p, &f, &scal, 3).unwrap();
        let yc = yamabe_functional(&p, &f.map(|v| c * v).unwrap(), &scal, 3).unwrap();
        prop_assert!((yc / y1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_rho_curvature(c in 0.1f64..4.0, s_g in -3.0f64..3.0, s_h in -2.0f64..2.0, m in 1usize..4) {
        let base = make_circle(2.0 * PI, 16).unwrap();
        let s = warped_scalar_curvature(&base, m, s_g, &[s_h; 16], &[c; 16]).unwrap();
        for v in s {
            prop_assert!((v - (s_h + s_g / (c * c))).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn pushforward_is_idempotent(seed in 0u64..1000, bins in 4usize..64) {
        let s = make_icosphere(2).unwrap();
        let space = ModelSpace::unit_sphere(2).unwrap();
        let p = rearrange(&s, &random_field(&s, seed), space).unwrap();
        let (m1, g1) = profile_pushforward(&p, bins).unwrap();
        let p2 = rearrange(&m1, &g1, ModelSpace::sphere(2, m1.total_measure()).unwrap()).unwrap();
        let (_, g2) = profile_pushforward(&p2, bins).unwrap();
        for (a, b) in g1.values().iter().zip(g2.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn fiberwise_sup_contraction(seed in 0u64..1000, eps in 1e-6f64..1.0) {
        let p = make_product(&make_circle(2.0 * PI, 6).unwrap(), &make_icosphere(1).unwrap()).unwrap();
        let space = ModelSpace::unit_sphere(2).unwrap();
        let f = random_field(&p, seed);
        let noise = random_field(&p, seed + 7919);
        let g = ScalarField::new(f.values().iter().zip(noise.values()).map(|(a, b)| a + eps * b).collect()).unwrap();
        let gap = fiberwise_sup_gap(&fiberwise_rearrange(&p, &f, space).unwrap(), &fiberwise_rearrange(&p, &g, space).unwrap());
        prop_assert!(gap <= f.max_abs_diff(&g) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lambda1_bounds_rayleigh_quotients(seed in 0u64..10_000, dirichlet in any::<bool>()) {
        let m = if dirichlet {
            make_planar_domain(&GridMask::disc([0.0, 0.0], 1.0, 0.1), 0.1).unwrap()
        } else {
            make_icosphere(2).unwrap()
        };
        let opts = SolverOptions::default();
        let lam = if dirichlet { lambda1_dirichlet(&m, &opts) } else { lambda1_closed(&m, &opts) }.unwrap().lambda1;
        let q = rayleigh_quotient(&m, &random_field(&m, seed), dirichlet).unwrap();
        prop_assert!(lam <= q + 1e-8 * q.abs().max(1.0), "{lam} > {q}");
    }
}

#[test]
fn circle_eigenvalue_scales_with_length() {
    let opts = SolverOptions::default();
    let vals: Vec<f64> = [PI, 2.0 * PI, 4.0 * PI]
        .iter()
        .map(|&l| {
            lambda1_closed(&make_circle(l, 256).unwrap(), &opts)
                .unwrap()
                .lambda1
                * l
                * l
        })
        .collect();
    for v in &vals {
        assert!((v / vals[0] - 1.0).abs() < 0.005, "{vals:?}");
    }
}

#[test]
fn shrinking_a_domain_raises_lambda1() {
    let h = 0.04;
    let opts = SolverOptions::default();
    let mut prev = 0.0;
    for r in [1.0, 0.8, 0.6, 0.45] {
        let lam = lambda1_dirichlet(
            &make_planar_domain(&GridMask::disc([0.0, 0.0], r, h), h).unwrap(),
            &opts,
        )
        .unwrap()
        .lambda1;
        assert!(lam >= prev, "r {r}: {lam} < {prev}");
        prev = lam;
    }
}

#[test]
fn icosphere_lambda1_converges() {
    let opts = SolverOptions::default();
    let err: Vec<f64> = (2..=4)
        .map(|k| {
            (lambda1_closed(&make_icosphere(k).unwrap(), &opts)
                .unwrap()
                .lambda1
                - 2.0)
                .abs()
        })
        .collect();
    assert!(err[1] < err[0] && err[2] < err[1], "{err:?}");
    // Halving the edge length should at least halve the error.
    assert!(err[1] / err[0] <= 0.5 && err[2] / err[1] <= 0.5, "{err:?}");
}

#[test]
fn icosphere_measure_is_the_sphere_area() {
    // Vertex measures are spherical areas, so every level is exact.
    for k in 0..=4 {
        let a = make_icosphere(k).unwrap().total_measure();
        assert!((a - 4.0 * PI).abs() < 1e-12 * 4.0 * PI, "level {k}: {a}");
    }
}

#[test]
fn reports_replay_bit_for_bit() {
    let cfg = CheckConfig::default();
    let a = check_lichnerowicz(3, &cfg).unwrap();
    let b = check_lichnerowicz(3, &cfg).unwrap();
    assert_eq!(
        (a.lhs.to_bits(), a.rhs.to_bits()),
        (b.lhs.to_bits(), b.rhs.to_bits())
    );
    let a = check_polya_szego(2, 5, 9, &cfg).unwrap();
    let b = check_polya_szego(2, 5, 9, &cfg).unwrap();
    assert_eq!(a.to_json(), b.to_json());
}
