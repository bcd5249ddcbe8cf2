//! Polar surfaces and the rank-two construction over them.

use assocfam_core::assoc::family_member;
use assocfam_core::gallery::{self, gen_lawson_sum};
use assocfam_core::polar::*;
use assocfam_core::ranktwo::*;
use assocfam_core::*;
use nalgebra::DVector;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4};

fn analyze(spec: &SurfaceSpec, n: usize, order: usize) -> Analysis {
    let chart = spec.chart(&spec.default_grid(n), order).unwrap();
    Analysis::run(chart, &AnalysisParams::default()).unwrap()
}

#[test]
fn catenoid_polar_is_its_gauss_map() {
    let an = analyze(&SurfaceSpec::Catenoid, 12, 8);
    let p = polar_surface(&an, &PolarParams::default()).unwrap();
    assert_eq!(p.kind, PolarKind::OddSphericalNormal);
    assert_eq!(p.chart.ambient, AmbientSpace::sphere(3));
    let grid = an.chart.grid;
    let x = p.chart.positions();
    let normal = |node| {
        let (u, v): (f64, f64) = grid.coords(node);
        DVector::from_vec(vec![u.cos(), u.sin(), -v.sinh()]) / v.cosh()
    };
    // One global sign: the flag orientation is fixed at the base node.
    let sign = x[0].dot(&normal(0)).signum();
    for node in 0..grid.len() {
        assert!((&x[node] - normal(node) * sign).norm() < 1e-12, "node {node}");
    }
    assert!(p.span_residual < 1e-10);
    assert!(p.elliptic);
}

#[test]
fn odd_polar_of_five_space_surface() {
    let an = analyze(&gallery::enneper5(), 12, 10);
    let p = polar_surface(&an, &PolarParams::default()).unwrap();
    assert_eq!(p.kind, PolarKind::OddSphericalNormal);
    assert!(p.span_residual < 1e-10);
    assert!(p.elliptic);
}

#[test]
fn even_polar_integrates_the_last_normal_bundle() {
    let an = analyze(&gallery::standard_isotropic(3), 16, 10);
    let p = polar_surface(&an, &PolarParams::default()).unwrap();
    assert_eq!(p.kind, PolarKind::EvenIntegrated);
    assert!(p.span_residual < 1e-3, "{}", p.span_residual);
    assert!(p.closedness_per_area < 1e-4);
    assert!(p.elliptic);
    assert!(matches!(odd_polar(&an), Err(GeomError::BranchMismatch { .. })));
}

fn iso3() -> Analysis {
    analyze(&gallery::standard_isotropic(3), 12, 12)
}

#[test]
fn zero_omega_ranktwo_over_isotropic_curve() {
    let an = iso3();
    let cs = cross_section(&an, &CrossSectionSpec::default(), 1, 1e-7).unwrap();
    assert!(cs.solve_residual < 1e-10);
    let rt = build_ranktwo(&an, &cs, &FiberParams::default()).unwrap();
    let s = rt.summary();
    assert_eq!(s.n, 4);
    assert_eq!(s.samples, an.chart.grid.len() * star(2, 0.5).len());
    assert!(s.regular > s.samples / 2, "{s:?}");
    assert_eq!(s.nullity_mismatch, 0);
    for sample in rt.samples.iter().filter(|x| x.regular) {
        assert_eq!(sample.nullity_dim, s.n - 2);
    }
    assert!(s.max_trace_residual < 1e-6);
    assert!(s.max_j_orthogonality < 1e-6);
}

#[test]
fn ranktwo_family_identity() {
    let an = iso3();
    let spec = CrossSectionSpec { gamma0: SectionSpec { coeffs: vec![0.1, 0.3] }, ..Default::default() };
    let cs = cross_section(&an, &spec, 1, 1e-7).unwrap();
    let rt = build_ranktwo(&an, &cs, &FiberParams::default()).unwrap();
    for theta in [0.0, FRAC_PI_3] {
        let fam = family_member(&an, 1, theta).unwrap();
        let (rt_theta, v) = ranktwo_family(&an, &cs, &rt, &fam).unwrap();
        assert!(v.compared > 0);
        assert!(v.metric < 1e-6 && v.alpha < 1e-6 && v.normal_connection < 1e-6, "{v:?}");
        if theta == 0.0 {
            let c = rt.congruence(&rt_theta, AmbientKind::Euclidean).unwrap();
            assert!(c.residual < 1e-10);
        } else {
            assert!(v.alpha_opposite > 1e-2, "orientation should matter: {v:?}");
        }
    }
}

#[test]
fn affine_omega_on_minimal_base() {
    let an = iso3();
    let spec = CrossSectionSpec {
        omega: Some(OmegaSpec::Affine { v: vec![0.2, 0.0, 0.0, 0.1, 0.0, 0.0], c0: 0.0 }),
        ..Default::default()
    };
    let cs = cross_section(&an, &spec, 1, 1e-7).unwrap();
    assert!(cs.solve_residual < 1e-7, "{}", cs.solve_residual);
    let rt = build_ranktwo(&an, &cs, &FiberParams::default()).unwrap();
    assert!(rt.summary().max_trace_residual < 1e-6);
}

#[test]
fn cross_section_preconditions() {
    let an = iso3();
    let bad = |ell| cross_section(&an, &CrossSectionSpec::default(), ell, 1e-7);
    assert!(bad(0).is_err());
    assert!(bad(2).is_err());
}

fn lawson() -> Analysis {
    let base = SurfaceSpec::LawsonRuled { m: 1, k: 2 };
    let spec = gen_lawson_sum(base, vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![0.0, FRAC_PI_4]).unwrap();
    analyze(&spec, 8, 10)
}

#[test]
fn omega_must_solve_the_eigen_equation_on_the_sphere() {
    let an = lawson();
    // ⟨g, v⟩ restricted to a minimal surface in the unit sphere satisfies Δω + 2ω = 0.
    let mut v = vec![0.0; 8];
    v[0] = 1.0;
    v[5] = -0.5;
    let linear = CrossSectionSpec { omega: Some(OmegaSpec::Affine { v, c0: 0.0 }), ..Default::default() };
    let cs = cross_section(&an, &linear, 2, 1e-7).unwrap();
    assert!(cs.solve_residual < 1e-7, "{}", cs.solve_residual);
    assert_eq!(cs.c, 1.0);
    let constant = CrossSectionSpec { omega: Some(OmegaSpec::Affine { v: vec![0.0; 8], c0: 1.0 }), ..Default::default() };
    assert!(matches!(cross_section(&an, &constant, 2, 1e-7), Err(GeomError::SolveResidualTooLarge { .. })));
}

#[test]
fn non_circular_order_is_refused() {
    let an = lawson();
    assert!(matches!(
        cross_section(&an, &CrossSectionSpec::default(), 1, 1e-7),
        Err(GeomError::NotCircular { order: 1, .. })
    ));
}

#[test]
fn star_layout() {
    let s = star(2, 0.5);
    assert_eq!(s.len(), 5);
    assert_eq!(s[0], vec![0.0, 0.0]);
    assert!(s[1..].iter().all(|t| t.iter().map(|x| x.abs()).sum::<f64>() == 0.5));
}
