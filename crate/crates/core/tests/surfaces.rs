//! Charts, flags, higher forms and complex structures against closed forms.

use assocfam_core::ambient::{chart_from_samples, induced_metric, metric_jets, read_samples_csv};
use assocfam_core::compat::compatibility_residuals;
use assocfam_core::elliptic::{mean_curvature_residual, rotation_field, transport_identity_residuals};
use assocfam_core::gallery::{self, gen_isotropic_curve, gen_lawson_sum, gen_perturbed};
use assocfam_core::jet::{Jet, VJet};
use assocfam_core::*;
use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

fn analyze(spec: &SurfaceSpec, n: usize, order: usize) -> Analysis {
    let chart = spec.chart(&spec.default_grid(n), order).unwrap();
    Analysis::run(chart, &AnalysisParams::default()).unwrap()
}

fn d_cos(a: usize, x: f64) -> f64 {
    (x + a as f64 * FRAC_PI_2).cos()
}

fn d_sin(a: usize, x: f64) -> f64 {
    (x + a as f64 * FRAC_PI_2).sin()
}

fn d_cosh(b: usize, x: f64) -> f64 {
    if b % 2 == 0 { x.cosh() } else { x.sinh() }
}

/// ∂u^a ∂v^b of (cosh v cos u, cosh v sin u, v).
fn catenoid_partial(a: usize, b: usize, u: f64, v: f64) -> Vector3<f64> {
    let z = match (a, b) {
        (0, 0) => v,
        (0, 1) => 1.0,
        _ => 0.0,
    };
    Vector3::new(d_cosh(b, v) * d_cos(a, u), d_cosh(b, v) * d_sin(a, u), z)
}

fn catenoid_normal(u: f64, v: f64) -> DVector<f64> {
    DVector::from_vec(vec![u.cos(), u.sin(), -v.sinh()]) / v.cosh()
}

#[test]
fn plane_has_no_curvature_terms() {
    let grid = GridParams::new(4, 4, (0.0, 1.0), (0.0, 1.0));
    let chart = SurfaceSpec::Plane.chart(&grid, 3).unwrap();
    for jet in &chart.jets {
        for (a, b) in [(2, 0), (1, 1), (0, 2), (3, 0), (1, 2)] {
            assert_eq!(jet.partial(a, b).norm(), 0.0);
        }
    }
    for g in induced_metric(&chart).unwrap() {
        assert!((g - Matrix2::identity()).norm() < 1e-15);
    }
}

#[test]
fn catenoid_jets_match_symbolic_partials() {
    let grid = GridParams::new(5, 5, (-0.4, 0.4), (-0.5, 0.5));
    let chart = SurfaceSpec::Catenoid.chart(&grid, 4).unwrap();
    let origin = grid.node(2, 2);
    assert!((chart.jets[origin].partial(0, 1) - DVector::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-15);
    assert!((chart.jets[origin].partial(1, 0) - DVector::from_vec(vec![0.0, 1.0, 0.0])).norm() < 1e-15);
    for node in 0..grid.len() {
        let (u, v) = grid.coords(node);
        for d in 0..=4 {
            for b in 0..=d {
                let want = catenoid_partial(d - b, b, u, v);
                let got = chart.jets[node].partial(d - b, b);
                let err = (0..3).map(|i| (got[i] - want[i]).abs()).fold(0.0, f64::max);
                assert!(err < 1e-12, "node {node} ∂({},{}) err {err}", d - b, b);
            }
        }
    }
}

#[test]
fn catenoid_metric_is_conformal() {
    let grid = GridParams::new(4, 4, (0.0, 0.3), (0.0, 1.0));
    let chart = SurfaceSpec::Catenoid.chart(&grid, 4).unwrap();
    let g = induced_metric(&chart).unwrap();
    let at = grid.node(0, 3);
    assert!((g[at] - Matrix2::identity() * 1f64.cosh().powi(2)).norm() < 1e-12);
    assert!((g[at][(0, 0)] - 2.381).abs() < 1e-3);
    assert!(g.iter().all(|m| m.determinant() > 0.0));
}

#[test]
fn degenerate_immersion_is_rejected() {
    let grid = GridParams::new(3, 3, (0.0, 1.0), (0.0, 1.0));
    let jets = (0..grid.len())
        .map(|node| {
            let (u, _) = grid.coords(node);
            let x = Jet::var_u(u, 3);
            VJet::from_components(&[x.clone(), x, Jet::zero(3)])
        })
        .collect();
    let chart = Chart { ambient: AmbientSpace::euclidean(3), grid, jets, source: ChartSource::AnalyticGallery };
    assert!(matches!(induced_metric(&chart), Err(GeomError::RankDeficient { .. })));
    assert!(matches!(chart.finalize(), Err(GeomError::RankDeficient { .. })));
}

#[test]
fn sphere_charts_stay_on_the_sphere() {
    let spec = SurfaceSpec::LawsonRuled { m: 1, k: 2 };
    let chart = spec.chart(&spec.default_grid(12), 6).unwrap();
    for jet in &chart.jets {
        let x = jet.value();
        assert!((x.norm() - 1.0).abs() < 1e-12);
        assert!(x.dot(&jet.partial(1, 0)).abs() < 1e-10);
        assert!(x.dot(&jet.partial(0, 1)).abs() < 1e-10);
    }
}

/// Dimensions of the osculating flag of a holomorphic curve, from the
/// complex derivatives of its polynomial components.
fn derivative_span_dims(components: &[Vec<(f64, f64)>], z0: (f64, f64), max_order: usize) -> Vec<usize> {
    let n = components.len();
    let cmul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let deriv = |p: &[(f64, f64)], s: usize| {
        let mut acc = (0.0, 0.0);
        for (k, &c) in p.iter().enumerate().skip(s) {
            let fall: f64 = ((k - s + 1)..=k).map(|x| x as f64).product();
            let mut zp = (1.0, 0.0);
            for _ in 0..(k - s) {
                zp = cmul(zp, z0);
            }
            let t = cmul(c, zp);
            acc = (acc.0 + fall * t.0, acc.1 + fall * t.1);
        }
        acc
    };
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut dims = Vec::new();
    let mut prev = 0;
    for s in 1..=max_order {
        let c: Vec<(f64, f64)> = components.iter().map(|p| deriv(p, s)).collect();
        // ∂u^s ↦ c, ∂u^{s-1}∂v ↦ i c, in the real form (Re p1, Im p1, ...).
        cols.push(DVector::from_iterator(2 * n, c.iter().flat_map(|z| [z.0, z.1])));
        cols.push(DVector::from_iterator(2 * n, c.iter().flat_map(|z| [-z.1, z.0])));
        let rank = DMatrix::from_columns(&cols).rank(1e-10);
        if rank == prev {
            break;
        }
        dims.push(rank - prev);
        prev = rank;
    }
    dims
}

#[test]
fn flag_dimensions_match_derivative_spans() {
    assert_eq!(analyze(&SurfaceSpec::Catenoid, 8, 6).flag.dims, vec![2, 1]);
    for n in [2, 3] {
        let spec = gallery::standard_isotropic(n);
        let SurfaceSpec::IsotropicCurve { components } = &spec else { unreachable!() };
        let an = analyze(&spec, 8, 8);
        for node in [0, an.chart.grid.base(), an.chart.grid.len() - 1] {
            let (u, v) = an.chart.grid.coords(node);
            assert_eq!(derivative_span_dims(components, (u, v), 6), an.flag.dims);
        }
        assert_eq!(an.flag.dims, vec![2; n]);
        assert_eq!(an.flag.tau, n - 1);
        assert_eq!(an.flag.substantial_dim, 2 * n);
        assert!(an.flag.orthogonality_residual < 1e-10);
    }
    let an = analyze(&gallery::standard_isotropic(3), 8, 8);
    assert_eq!(an.flag.tau_o, 2);
}

#[test]
fn catenoid_second_fundamental_form() {
    let an = analyze(&SurfaceSpec::Catenoid, 9, 6);
    for node in 0..an.chart.grid.len() {
        let (u, v) = an.chart.grid.coords(node);
        let nrm = catenoid_normal(u, v);
        let a2 = an.forms.flat(node, 2);
        // Columns α(∂u,∂u), α(∂u,∂v), α(∂v,∂v) equal ⟨∂∂g, N⟩N = −N, 0, N.
        assert!((a2.column(0) + &nrm).norm() < 1e-10);
        assert!(a2.column(1).norm() < 1e-10);
        assert!((a2.column(2) - &nrm).norm() < 1e-10);
    }
}

#[test]
fn catenoid_principal_curvatures_from_lowering_block() {
    let an = analyze(&SurfaceSpec::Catenoid, 9, 6);
    for node in 0..an.chart.grid.len() {
        let (_, v) = an.chart.grid.coords(node);
        let e0 = an.flag.frames[node].columns(0, 2).into_owned();
        let jet = &an.chart.jets[node];
        let dg = DMatrix::from_columns(&[jet.partial(1, 0), jet.partial(0, 1)]);
        let to_frame = (e0.transpose() * dg).try_inverse().unwrap();
        // W(∂_a) = −∂_a ξ has frame coordinates −block(a, 0 ← 1).
        let minus_dxi = DMatrix::from_columns(&[
            -an.tensors.block(node, 0, 0, 1).column(0),
            -an.tensors.block(node, 1, 0, 1).column(0),
        ]);
        let w = minus_dxi * to_frame;
        let mut ev: Vec<f64> = w.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let k = 1.0 / v.cosh().powi(2);
        assert!((ev[0] + k).abs() < 1e-9 && (ev[1] - k).abs() < 1e-9, "node {node}: {ev:?} vs ±{k}");
        assert!((&w - w.transpose()).amax() < 1e-9);
    }
}

#[test]
fn third_form_is_symmetric() {
    let an = analyze(&gallery::standard_isotropic(3), 8, 8);
    let (x, y, w) = ([0.3, -1.2], [0.7, 0.4], [-0.5, 0.9]);
    for node in 0..an.chart.grid.len() {
        let a = an.forms.eval(node, &[x, y, w]);
        for perm in [[y, x, w], [w, y, x], [x, w, y]] {
            assert!((&a - an.forms.eval(node, &perm)).norm() < 1e-9);
        }
    }
}

#[test]
fn isotropic_curve_frenet_identities() {
    let an = analyze(&gallery::standard_isotropic(3), 12, 10);
    assert!(an.tensors.report.second < 1e-9, "duality {}", an.tensors.report.second);
    assert!(an.tensors.report.raising_consistency < 1e-8);
    assert!(an.tensors.report.reconstruction < 1e-8);
    assert!(an.tensors.report.metric_compatibility < 1e-10);
    let c = compatibility_residuals(&an.flag, &an.tensors);
    assert!(c.max() < 1e-7, "{c:?}");
    assert!(c.sym.max < 1e-8);
}

#[test]
fn plane_compatibility_is_exact() {
    let grid = GridParams::new(4, 4, (0.0, 1.0), (0.0, 1.0));
    let chart = SurfaceSpec::Plane.chart(&grid, 4).unwrap();
    let an = Analysis::run(chart, &AnalysisParams::default()).unwrap();
    assert_eq!(an.flag.dims, vec![2]);
    assert_eq!(compatibility_residuals(&an.flag, &an.tensors).max(), 0.0);
}

#[test]
fn minimal_surfaces_have_orthogonal_j() {
    for spec in [SurfaceSpec::Catenoid, SurfaceSpec::Helicoid, gallery::enneper5(), gallery::standard_isotropic(2)] {
        let an = analyze(&spec, 8, 8);
        let cs = an.elliptic().unwrap();
        let metric = induced_metric(&an.chart).unwrap();
        for (j, g) in cs.j.iter().zip(&metric) {
            assert!((j * j + Matrix2::identity()).norm() < 1e-9);
            assert!((j.transpose() * g * j - g).norm() < 1e-9 * g.norm());
        }
        assert!(an.ellipses.as_ref().unwrap().max_defect[0] < 1e-8);
        assert!(cs.orth_defect.iter().all(|d| d[0] < 1e-9));
    }
}

#[test]
fn convex_graph_is_not_elliptic() {
    let spec = SurfaceSpec::Graph { a: 1.0, b: 0.0, c: 1.0 };
    let grid = GridParams::new(5, 5, (-0.2, 0.2), (-0.2, 0.2));
    let an = Analysis::run(spec.chart(&grid, 6).unwrap(), &AnalysisParams::default()).unwrap();
    assert!(matches!(an.cs, Err(GeomError::NotElliptic { .. })));
}

#[test]
fn saddle_graph_is_elliptic_with_null_directions() {
    // A hypersurface admits J exactly when its second form is indefinite.
    let spec = SurfaceSpec::Graph { a: 1.0, b: 0.0, c: -1.0 };
    let grid = GridParams::new(5, 5, (-0.2, 0.2), (-0.2, 0.2));
    let an = Analysis::run(spec.chart(&grid, 6).unwrap(), &AnalysisParams::default()).unwrap();
    let cs = an.elliptic().unwrap();
    let origin = grid.node(2, 2);
    let x = nalgebra::Vector2::new(1.0, 0.0);
    let jx = cs.j[origin] * x;
    let a = an.forms.eval(origin, &[[1.0, 0.0], [1.0, 0.0]]) + an.forms.eval(origin, &[[jx[0], jx[1]], [jx[0], jx[1]]]);
    assert!(a.norm() < 1e-10);
}

#[test]
fn isotropic_ellipses_are_circles_at_every_order() {
    let an = analyze(&gallery::standard_isotropic(3), 12, 10);
    let cs = an.elliptic().unwrap();
    for s in 0..=2 {
        assert!(an.circular_defect(s).unwrap() < 1e-8);
        assert!(an.ellipses.as_ref().unwrap().max_defect[s] < 1e-8);
    }
    assert!(cs.js_residual.iter().all(|&r| r < 1e-8));
    assert!(matches!(an.circular_defect(3), Err(GeomError::OrderOutOfRange { .. })));
}

#[test]
fn circle_criterion_agrees_with_orthogonality() {
    let an = analyze(&gallery::standard_isotropic(3), 10, 10);
    assert!(an.ellipses.unwrap().criterion_gap < 2.0 * an.params.tol_circle);
}

#[test]
fn rotation_fields_compose() {
    let an = analyze(&gallery::standard_isotropic(3), 8, 8);
    let cs = an.elliptic().unwrap();
    for s in 0..=2 {
        let r0 = rotation_field(cs, s, 0.0).unwrap();
        let a = rotation_field(cs, s, PI / 3.0).unwrap();
        let b = rotation_field(cs, s, PI / 6.0).unwrap();
        let q = rotation_field(cs, s, FRAC_PI_2).unwrap();
        for node in 0..r0.maps.len() {
            let id = DMatrix::identity(r0.maps[node].nrows(), r0.maps[node].ncols());
            assert!((&r0.maps[node] - id).amax() < 1e-15);
            assert!((&a.maps[node] * &b.maps[node] - &q.maps[node]).amax() < 1e-9);
            assert!((&q.maps[node] - &cs.js[node][s]).amax() < 1e-15);
        }
    }
    assert!(matches!(rotation_field(cs, 3, 0.1), Err(GeomError::OrderOutOfRange { .. })));
}

#[test]
fn transport_identities_hold_on_isotropic_curve() {
    let an = analyze(&gallery::standard_isotropic(3), 10, 10);
    let cs = an.elliptic().unwrap();
    let r = transport_identity_residuals(&an.tensors, cs, 0.7);
    assert!(r.max() < 1e-8, "{r:?}");
    let r0 = transport_identity_residuals(&an.tensors, cs, 0.0);
    assert!(r0.one0.iter().all(|x| x.1 == 0.0), "{:?}", r0.one0);
}

/// Gaussian curvature from the first fundamental form alone (Brioschi).
fn brioschi(jet: &VJet) -> f64 {
    let [e, f, g] = metric_jets(jet);
    let p = |j: &Jet, a, b| j.partial(a, b);
    let (ee, ff, gg) = (e.value(), f.value(), g.value());
    let m1 = DMatrix::from_row_slice(3, 3, &[
        -0.5 * p(&e, 0, 2) + p(&f, 1, 1) - 0.5 * p(&g, 2, 0),
        0.5 * p(&e, 1, 0),
        p(&f, 1, 0) - 0.5 * p(&e, 0, 1),
        p(&f, 0, 1) - 0.5 * p(&g, 1, 0),
        ee,
        ff,
        0.5 * p(&g, 0, 1),
        ff,
        gg,
    ]);
    let m2 = DMatrix::from_row_slice(3, 3, &[
        0.0,
        0.5 * p(&e, 0, 1),
        0.5 * p(&g, 1, 0),
        0.5 * p(&e, 0, 1),
        ee,
        ff,
        0.5 * p(&g, 1, 0),
        ff,
        gg,
    ]);
    (m1.determinant() - m2.determinant()) / (ee * gg - ff * ff).powi(2)
}

#[test]
fn brioschi_oracle_on_catenoid() {
    let grid = GridParams::new(3, 3, (0.0, 1.0), (-0.5, 0.5));
    let chart = SurfaceSpec::Catenoid.chart(&grid, 5).unwrap();
    for node in 0..grid.len() {
        let (_, v) = grid.coords(node);
        assert!((brioschi(&chart.jets[node]) + 1.0 / v.cosh().powi(4)).abs() < 1e-10);
    }
}

#[test]
fn lawson_ruled_surfaces() {
    for (m, k) in [(1, 1), (1, 2), (2, 3)] {
        let an = analyze(&SurfaceSpec::LawsonRuled { m, k }, 10, 8);
        let h = mean_curvature_residual(&an.forms).into_iter().fold(0.0, f64::max);
        assert!(h < 1e-8, "({m},{k}) mean curvature {h}");
    }
    let flat = SurfaceSpec::LawsonRuled { m: 1, k: 1 };
    let chart = flat.chart(&flat.default_grid(6), 5).unwrap();
    assert!(chart.jets.iter().all(|j| brioschi(j).abs() < 1e-10));
    let spec = SurfaceSpec::LawsonRuled { m: 1, k: 2 };
    let chart = spec.chart(&spec.default_grid(6), 5).unwrap();
    let ks: Vec<f64> = chart.jets.iter().map(brioschi).collect();
    let spread = ks.iter().cloned().fold(f64::MIN, f64::max) - ks.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-2, "curvature spread {spread}");
}

#[test]
fn generator_errors() {
    let dependent = vec![vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)], vec![(0.0, 0.0)]];
    assert!(matches!(gen_isotropic_curve(dependent), Err(GeomError::NotSubstantial)));
    let base = SurfaceSpec::LawsonRuled { m: 1, k: 2 };
    assert!(matches!(gen_lawson_sum(base.clone(), vec![1.0, 1.0], vec![0.0, 0.5]), Err(GeomError::NotUnitNorm { .. })));
    let w = vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    assert!(matches!(gen_lawson_sum(base.clone(), w.clone(), vec![0.5, 0.1]), Err(GeomError::AnglesNotSorted)));
    assert!(matches!(gen_lawson_sum(base.clone(), w, vec![0.0, PI]), Err(GeomError::AnglesNotSorted)));
    assert!(gen_lawson_sum(SurfaceSpec::Catenoid, vec![1.0], vec![0.0]).is_err());
    assert_eq!(gen_perturbed(base.clone(), 0.0, 7).unwrap(), base);
}

#[test]
fn single_term_lawson_sum_is_the_base() {
    let base = SurfaceSpec::LawsonRuled { m: 1, k: 2 };
    let grid = base.default_grid(6);
    let sum = gen_lawson_sum(base.clone(), vec![1.0], vec![0.0]).unwrap();
    let a = base.chart(&grid, 6).unwrap();
    let b = sum.chart(&grid, 6).unwrap();
    for (x, y) in a.positions().iter().zip(b.positions()) {
        assert!((x - y).norm() < 1e-12);
    }
}

#[test]
fn perturbation_ladder_is_monotone() {
    let defects: Vec<f64> = [1e-3, 2e-3, 4e-3]
        .iter()
        .map(|&eps| {
            let spec = gen_perturbed(SurfaceSpec::Catenoid, eps, 11).unwrap();
            let an = analyze(&spec, 8, 6);
            mean_curvature_residual(&an.forms).into_iter().fold(0.0, f64::max)
        })
        .collect();
    assert!(defects[0] > 1e-6, "{defects:?}");
    assert!(defects[0] < defects[1] && defects[1] < defects[2], "{defects:?}");
}

fn sampled_catenoid(n: usize, stencil_order: usize) -> Chart {
    let grid = GridParams::new(n, n, (0.0, 1.0), (-0.5, 0.5));
    let values: Vec<DVector<f64>> = (0..grid.len())
        .map(|k| {
            let (u, v) = grid.coords(k);
            DVector::from_column_slice(catenoid_partial(0, 0, u, v).as_slice())
        })
        .collect();
    chart_from_samples(AmbientSpace::euclidean(3), grid, &values, 4, stencil_order).unwrap()
}

#[test]
fn sampled_charts_converge_at_stencil_order() {
    let errors: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| {
            let chart = sampled_catenoid(n, 4);
            assert_eq!(chart.source, ChartSource::Sampled { stencil_order: 4 });
            let an = Analysis::run(chart, &AnalysisParams { rank_tol: 1e-6, tol_circle: 1e-3 }).unwrap();
            (0..an.chart.grid.len())
                .map(|k| {
                    let (u, v) = an.chart.grid.coords(k);
                    (an.forms.flat(k, 2).column(0) + catenoid_normal(u, v)).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((10.0..25.0).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn sample_csv_round_trip() {
    let chart = sampled_catenoid(9, 4);
    let path = std::env::temp_dir().join(format!("assocfam-samples-{}.csv", std::process::id()));
    chart.write_points_csv(&path).unwrap();
    let back = read_samples_csv(&path, AmbientKind::Euclidean, 4, 4).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(back.grid.nu, 9);
    for (a, b) in chart.jets.iter().zip(&back.jets) {
        assert!((a.matrix() - b.matrix()).amax() < 1e-9);
    }
}
