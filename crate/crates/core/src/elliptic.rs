//! Ellipticity, the structures J and J_s, curvature ellipses and the
//! transport identities relating J_s to the Frenet blocks.

use crate::ambient::{fmt_f64, Chart, GridParams};
use crate::error::{GeomError, Result};
use crate::flag::{multilinear, FrenetTensors, HigherFormTable};
use crate::linalg::{op_norm, right_lstsq};
use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2, Vector3};
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct ComplexStructures {
    /// J in coordinates: column k is J∂_k in the basis (∂u, ∂v).
    pub j: Vec<Matrix2<f64>>,
    /// `js[node][s]` for 0 ≤ s ≤ τ°, in the orthonormal flag basis of N_s.
    pub js: Vec<Vec<DMatrix<f64>>>,
    /// Unit tangent with ⟨Z, JZ⟩ = 0, in coordinates.
    pub z: Vec<Vector2<f64>>,
    /// ‖J_sᵀJ_s − I‖ (operator norm).
    pub orth_defect: Vec<Vec<f64>>,
    /// 1 − sqrt(σ_min/σ_max) of J_s; equals the axis defect of ℰ_s.
    pub normalized_defect: Vec<Vec<f64>>,
    /// Max relative residual of the defining relation of J_s, per s.
    pub js_residual: Vec<f64>,
    /// Max relative |α(X,X) + α(JX,JX)|.
    pub ellipticity_residual: f64,
    pub tau_o: usize,
}

/// Solves for J from the second fundamental form at one node.
///
/// `a2` holds α(∂u,∂u), α(∂u,∂v), α(∂v,∂v) as columns (any orthonormal
/// coordinates); `metric` is the first fundamental form.
pub fn solve_j(a2: &DMatrix<f64>, metric: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    let ginv = metric.try_inverse()?;
    let gvec = Vector3::new(ginv[(0, 0)], ginv[(0, 1)], ginv[(1, 1)]);
    let k = if a2.nrows() == 0 || a2.amax() == 0.0 {
        gvec
    } else {
        let mut m = DMatrix::zeros(a2.nrows(), 3);
        m.set_column(0, &a2.column(0));
        m.set_column(1, &(a2.column(1) * 2.0));
        m.set_column(2, &a2.column(2));
        let svd = crate::linalg::svd_sorted(&m);
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let rank = svd.s.iter().filter(|&&s| s > 1e-9 * smax).count();
        let kernel: Vec<Vector3<f64>> = (rank..3).map(|c| Vector3::from_iterator(svd.v.column(c).iter().copied())).collect();
        match kernel.len() {
            0 => return None,
            1 => kernel[0],
            3 => gvec,
            _ => {
                let p: Vector3<f64> = kernel.iter().map(|b| b * b.dot(&gvec)).sum();
                if quad_det(&p) > 1e-12 * p.norm_squared() {
                    p
                } else {
                    // Look for any definite element of the 2-dim kernel.
                    let (b1, b2) = (kernel[0], kernel[1]);
                    let d12 = 0.5 * (b1[0] * b2[2] + b2[0] * b1[2]) - b1[1] * b2[1];
                    let d = Matrix2::new(quad_det(&b1), d12, d12, quad_det(&b2));
                    let eig = SymmetricEigen::new(d);
                    let i = eig.eigenvalues.imax();
                    if eig.eigenvalues[i] <= 0.0 {
                        return None;
                    }
                    let c = eig.eigenvectors.column(i);
                    b1 * c[0] + b2 * c[1]
                }
            }
        }
    };
    let k = if k[0] < 0.0 { -k } else { k };
    if !(quad_det(&k) > 1e-10 * k.norm_squared()) {
        return None;
    }
    let q = Matrix2::new(k[0], k[1], k[1], k[2]);
    let g = q.try_inverse()?;
    let s = g.determinant().sqrt();
    Some(Matrix2::new(-g[(0, 1)], -g[(1, 1)], g[(0, 0)], g[(0, 1)]) / s)
}

fn quad_det(k: &Vector3<f64>) -> f64 {
    k[0] * k[2] - k[1] * k[1]
}

fn metric_at(forms: &HigherFormTable, node: usize) -> Matrix2<f64> {
    let d = forms.flat(node, 1);
    let (gu, gv) = (d.column(0), d.column(1));
    Matrix2::new(gu.dot(&gu), gu.dot(&gv), gu.dot(&gv), gv.dot(&gv))
}

/// Coefficients of α^{s+1}(J X_1, X_2, …) on monomials, given the monomial table `a`.
fn rotate_first(a: &DMatrix<f64>, j: &Matrix2<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut b = DMatrix::zeros(a.nrows(), n);
    for col in 0..n {
        let v = if col + 1 < n {
            // one ∂u slot is available
            a.column(col) * j[(0, 0)] + a.column(col + 1) * j[(1, 0)]
        } else {
            a.column(col - 1) * j[(0, 1)] + a.column(col) * j[(1, 1)]
        };
        b.set_column(col, &v);
    }
    b
}

pub fn detect_ellipticity(chart: &Chart, forms: &HigherFormTable) -> Result<ComplexStructures> {
    let _ = chart;
    let nodes = forms.flat.len();
    let tau = forms.max_order - 1;
    let tau_o = if tau == 0 || forms.coords(0, tau + 1).nrows() == 2 { tau } else { tau - 1 };
    let mut out = ComplexStructures {
        j: Vec::with_capacity(nodes),
        js: Vec::with_capacity(nodes),
        z: Vec::with_capacity(nodes),
        orth_defect: Vec::with_capacity(nodes),
        normalized_defect: Vec::with_capacity(nodes),
        js_residual: vec![0.0; tau_o + 1],
        ellipticity_residual: 0.0,
        tau_o,
    };
    for node in 0..nodes {
        let metric = metric_at(forms, node);
        let a2 = if forms.max_order >= 2 { forms.coords(node, 2).clone() } else { DMatrix::zeros(0, 3) };
        let j = solve_j(&a2, &metric).ok_or(GeomError::NotElliptic { node })?;
        if forms.max_order >= 2 {
            let f = forms.flat(node, 2);
            let scale = f.norm().max(1e-300);
            for x in [[1.0, 0.0], [0.0, 1.0]] {
                let jx = [j[(0, 0)] * x[0] + j[(0, 1)] * x[1], j[(1, 0)] * x[0] + j[(1, 1)] * x[1]];
                let r = multilinear(f, &[x, x]) + multilinear(f, &[jx, jx]);
                out.ellipticity_residual = out.ellipticity_residual.max(r.norm() / scale);
            }
        }
        out.z.push(choose_z(&metric, &j));
        let mut js = Vec::new();
        let mut od = Vec::new();
        let mut nd = Vec::new();
        for s in 0..=tau_o {
            let a = forms.coords(node, s + 1);
            let b = rotate_first(a, &j);
            let (jsm, res) = right_lstsq(a, &b);
            out.js_residual[s] = out.js_residual[s].max(res);
            let d = jsm.nrows();
            od.push(op_norm(&(jsm.transpose() * &jsm - DMatrix::identity(d, d))));
            let sv = jsm.clone().singular_values();
            nd.push(1.0 - (sv.min() / sv.max()).sqrt());
            js.push(jsm);
        }
        out.j.push(j);
        out.js.push(js);
        out.orth_defect.push(od);
        out.normalized_defect.push(nd);
    }
    Ok(out)
}

/// Unit Z with ⟨Z, JZ⟩ = 0: leading generalized eigenvector of the induced
/// metric against the metric that makes J orthogonal.
fn choose_z(metric: &Matrix2<f64>, j: &Matrix2<f64>) -> Vector2<f64> {
    // Metric G for which J is a rotation: G = Jᵀ G J; take G ∝ M + JᵀMJ.
    let g = metric + j.transpose() * metric * j;
    let l = g.cholesky().map(|c| c.l()).unwrap_or_else(Matrix2::identity);
    let linv = l.try_inverse().unwrap_or_else(Matrix2::identity);
    let ip = linv * metric * linv.transpose();
    let eig = SymmetricEigen::new(ip);
    let (l0, l1) = (eig.eigenvalues[0], eig.eigenvalues[1]);
    let mut z = if (l0 - l1).abs() <= 1e-8 * (l0.abs() + l1.abs()) {
        Vector2::new(1.0, 0.0)
    } else {
        let i = if l0 > l1 { 0 } else { 1 };
        linv.transpose() * eig.eigenvectors.column(i)
    };
    if z[0] < 0.0 || (z[0] == 0.0 && z[1] < 0.0) {
        z = -z;
    }
    z / (z.transpose() * metric * z)[(0, 0)].sqrt()
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipseStats {
    pub center_norm: f64,
    pub semi_a: f64,
    pub semi_b: f64,
    pub defect: f64,
    /// Energy outside the center and mode s+1, relative to semi_a.
    pub fit_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipseReport {
    /// `nodes[node][s]`.
    pub nodes: Vec<Vec<EllipseStats>>,
    pub max_defect: Vec<f64>,
    pub min_defect: Vec<f64>,
    /// `(node, order)` pairs where the ellipse degenerates to a point.
    pub degenerate: Vec<(usize, usize)>,
    /// Max |circular_defect − normalized orth defect| over nodes and orders.
    pub criterion_gap: f64,
}

pub const ELLIPSE_SAMPLES: usize = 64;

pub fn curvature_ellipses(forms: &HigherFormTable, cs: &ComplexStructures) -> EllipseReport {
    let nodes = forms.flat.len();
    let orders = cs.tau_o + 1;
    let mut rep = EllipseReport {
        nodes: Vec::with_capacity(nodes),
        max_defect: vec![0.0; orders],
        min_defect: vec![f64::INFINITY; orders],
        degenerate: Vec::new(),
        criterion_gap: 0.0,
    };
    for node in 0..nodes {
        let z = cs.z[node];
        let jz = cs.j[node] * z;
        let mut per = Vec::new();
        for s in 0..orders {
            let table = forms.flat(node, s + 1);
            let k = (s + 1) as f64;
            let n = ELLIPSE_SAMPLES;
            let pts: Vec<DVector<f64>> = (0..n)
                .map(|i| {
                    let psi = 2.0 * PI * i as f64 / n as f64;
                    let x = z * psi.cos() + jz * psi.sin();
                    multilinear(table, &vec![[x[0], x[1]]; s + 1])
                })
                .collect();
            let dim = table.nrows();
            let mut c0 = DVector::zeros(dim);
            let mut ca = DVector::zeros(dim);
            let mut cb = DVector::zeros(dim);
            for (i, p) in pts.iter().enumerate() {
                let psi = 2.0 * PI * i as f64 / n as f64;
                c0 += p / n as f64;
                ca += p * (2.0 * (k * psi).cos() / n as f64);
                cb += p * (2.0 * (k * psi).sin() / n as f64);
            }
            let ab = DMatrix::from_columns(&[ca.clone(), cb.clone()]);
            let sv = ab.singular_values();
            let (a, b) = (sv.max(), sv.min());
            let mut fit: f64 = 0.0;
            for (i, p) in pts.iter().enumerate() {
                let psi = 2.0 * PI * i as f64 / n as f64;
                let model = &c0 + &ca * (k * psi).cos() + &cb * (k * psi).sin();
                fit = fit.max((p - model).norm());
            }
            let scale = table.norm().max(1e-300);
            let degenerate = a <= 1e-12 * scale;
            let defect = if degenerate { 0.0 } else { (a - b) / a };
            if degenerate {
                rep.degenerate.push((node, s));
            } else {
                rep.max_defect[s] = rep.max_defect[s].max(defect);
                rep.min_defect[s] = rep.min_defect[s].min(defect);
                rep.criterion_gap = rep.criterion_gap.max((defect - cs.normalized_defect[node][s]).abs());
            }
            per.push(EllipseStats {
                center_norm: c0.norm(),
                semi_a: a,
                semi_b: b,
                defect,
                fit_residual: if degenerate { 0.0 } else { fit / a },
            });
        }
        rep.nodes.push(per);
    }
    for m in rep.min_defect.iter_mut() {
        if !m.is_finite() {
            *m = 0.0;
        }
    }
    rep
}

impl EllipseReport {
    /// CSV `u,v,order,center_norm,semi_a,semi_b,defect`.
    pub fn write_csv(&self, grid: &GridParams, path: &Path) -> Result<()> {
        let io = |e: csv::Error| GeomError::Io(e.to_string());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(["u", "v", "order", "center_norm", "semi_a", "semi_b", "defect"]).map_err(io)?;
        for (node, per) in self.nodes.iter().enumerate() {
            let (u, v) = grid.coords(node);
            for (s, e) in per.iter().enumerate() {
                w.write_record([
                    fmt_f64(u),
                    fmt_f64(v),
                    s.to_string(),
                    fmt_f64(e.center_norm),
                    fmt_f64(e.semi_a),
                    fmt_f64(e.semi_b),
                    fmt_f64(e.defect),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| GeomError::Io(e.to_string()))
    }
}

/// Pointwise R^s_φ = cos φ I + sin φ J_s.
#[derive(Clone, Debug)]
pub struct RotationField {
    pub phi: f64,
    pub order: usize,
    pub maps: Vec<DMatrix<f64>>,
}

pub fn rotation_field(cs: &ComplexStructures, s: usize, phi: f64) -> Result<RotationField> {
    if s > cs.tau_o {
        return Err(GeomError::OrderOutOfRange { order: s, max: cs.tau_o });
    }
    let maps = cs
        .js
        .iter()
        .map(|js| {
            let j = &js[s];
            DMatrix::identity(j.nrows(), j.ncols()) * phi.cos() + j * phi.sin()
        })
        .collect();
    Ok(RotationField { phi, order: s, maps })
}

/// Max-over-grid residuals of (js), (jss), (one0), (two0), indexed by s.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TransportResiduals {
    pub phi: f64,
    /// `(s, residual)` pairs.
    pub js: Vec<(usize, f64)>,
    pub jss: Vec<(usize, f64)>,
    pub one0: Vec<(usize, f64)>,
    pub two0: Vec<(usize, f64)>,
}

impl TransportResiduals {
    pub fn max(&self) -> f64 {
        [&self.js, &self.jss, &self.one0, &self.two0]
            .iter()
            .flat_map(|v| v.iter().map(|x| x.1))
            .fold(0.0, f64::max)
    }
}

pub fn transport_identity_residuals(
    tensors: &FrenetTensors,
    cs: &ComplexStructures,
    phi: f64,
) -> TransportResiduals {
    let to = cs.tau_o;
    let nodes = tensors.omega.len();
    let mut rep = TransportResiduals { phi, ..Default::default() };
    let rel = |m: DMatrix<f64>, scale: f64| m.amax() / scale.max(1e-300);
    for s in 2..=to {
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for node in 0..nodes {
            let j = cs.j[node];
            let (jp, jc) = (&cs.js[node][s - 1], &cs.js[node][s]);
            for axis in 0..2 {
                let sx = tensors.raise(node, axis, s - 1);
                let sjx = tensors.raise(node, 0, s - 1) * j[(0, axis)] + tensors.raise(node, 1, s - 1) * j[(1, axis)];
                let scale = sx.amax().max(sjx.amax());
                // (js): J_s π_s ∇_X ξ = π_s ∇_X J_{s-1} ξ = π_s ∇_{JX} ξ
                r1 = r1.max(rel(jc * &sx - &sx * jp, scale)).max(rel(jc * &sx - &sjx, scale));
                // (jss): J_{s-1}ᵀ π_{s-1} ∇_X η = π_{s-1} ∇_X J_sᵀ η = π_{s-1} ∇_{JX} η
                let bx = tensors.block(node, axis, s - 1, s);
                let bjx = tensors.block(node, 0, s - 1, s) * j[(0, axis)] + tensors.block(node, 1, s - 1, s) * j[(1, axis)];
                let scale = bx.amax().max(bjx.amax());
                r2 = r2.max(rel(jp.transpose() * &bx - &bx * jc.transpose(), scale)).max(rel(jp.transpose() * &bx - &bjx, scale));
            }
        }
        rep.js.push((s, r1));
        rep.jss.push((s, r2));
    }
    for s in 1..to {
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for node in 0..nodes {
            let rs = rot(&cs.js[node][s], phi);
            let rn = rot(&cs.js[node][s + 1], phi);
            for axis in 0..2 {
                let sx = tensors.raise(node, axis, s);
                let scale = sx.amax();
                r1 = r1.max(rel(&rn * &sx - &sx * &rs, scale));
                let bx = tensors.block(node, axis, s, s + 1);
                r2 = r2.max(rel(rs.transpose() * &bx - &bx * rn.transpose(), scale));
            }
        }
        rep.one0.push((s, r1));
        rep.two0.push((s, r2));
    }
    rep
}

fn rot(j: &DMatrix<f64>, phi: f64) -> DMatrix<f64> {
    DMatrix::identity(j.nrows(), j.ncols()) * phi.cos() + j * phi.sin()
}

/// Pointwise |H| / |α| with H = trace of α² in the induced metric.
pub fn mean_curvature_residual(forms: &HigherFormTable) -> Vec<f64> {
    (0..forms.flat.len())
        .map(|node| {
            if forms.max_order < 2 {
                return 0.0;
            }
            let m = metric_at(forms, node);
            let gi = m.try_inverse().unwrap_or_else(Matrix2::zeros);
            let a = forms.flat(node, 2);
            let h = a.column(0) * gi[(0, 0)] + a.column(1) * (2.0 * gi[(0, 1)]) + a.column(2) * gi[(1, 1)];
            let scale = a.norm() * gi.norm();
            if scale == 0.0 {
                0.0
            } else {
                h.norm() / scale
            }
        })
        .collect()
}

/// J at one point from first and second derivatives of a position map,
/// with the relative residual of α(X,X) + α(JX,JX) = 0. Singular values of α
/// below `rank_tol` times the largest are treated as zero; a vanishing α
/// gives the metric J.
pub fn ellipticity_at(jet: &crate::jet::VJet, kind: crate::ambient::AmbientKind, rank_tol: f64) -> Option<(Matrix2<f64>, f64)> {
    let (gu, gv) = (jet.partial(1, 0), jet.partial(0, 1));
    let mut cols = vec![gu.clone(), gv.clone()];
    if kind == crate::ambient::AmbientKind::Sphere {
        cols.push(jet.value());
    }
    let basis = crate::linalg::svd_sorted(&DMatrix::from_columns(&cols)).u.columns(0, cols.len()).into_owned();
    let project = |x: DVector<f64>| {
        let p = basis.transpose() * &x;
        x - &basis * p
    };
    let a = DMatrix::from_columns(&[project(jet.partial(2, 0)), project(jet.partial(1, 1)), project(jet.partial(0, 2))]);
    let metric = Matrix2::new(gu.dot(&gu), gu.dot(&gv), gu.dot(&gv), gv.dot(&gv));
    // Coordinates in an orthonormal basis of the span of α.
    let svd = crate::linalg::svd_sorted(&a);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let first = gu.norm_squared().max(gv.norm_squared());
    if smax <= 1e-12 * first {
        return Some((solve_j(&DMatrix::zeros(0, 3), &metric)?, 0.0));
    }
    let r = svd.s.iter().filter(|&&s| s > rank_tol * smax).count();
    let coords = svd.u.columns(0, r).transpose() * &a;
    let j = solve_j(&coords, &metric)?;
    let scale = a.norm().max(1e-300);
    let mut res: f64 = 0.0;
    for x in [[1.0, 0.0], [0.0, 1.0]] {
        let jx = [j[(0, 0)] * x[0] + j[(0, 1)] * x[1], j[(1, 0)] * x[0] + j[(1, 1)] * x[1]];
        res = res.max((multilinear(&a, &[x, x]) + multilinear(&a, &[jx, jx])).norm() / scale);
    }
    Some((j, if a.norm() == 0.0 { 0.0 } else { res }))
}
