//! Cross sections and the rank-two minimal submanifolds f(δ) = h(x) + δ
//! ruled over the bundle Λ_ℓ = N_{ℓ+1} ⊕ … ⊕ N_τ, with their associated
//! family f_θ(δ) = h_θ(x) + φ_θ δ.

use crate::ambient::{fmt_f64, AmbientKind, GridParams};
use crate::analysis::Analysis;
use crate::assoc::Family;
use crate::error::{GeomError, Result};
use crate::jet::{Jet, MJet, VJet};
use crate::elliptic::solve_j;
use crate::linalg::svd_sorted;
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Scalar field ω on the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OmegaSpec {
    Zero,
    /// ω = ⟨g, v⟩ + c0.
    Affine { v: Vec<f64>, c0: f64 },
    /// Per-node jets (order ≥ 4), e.g. from samples.
    #[serde(skip)]
    Jets(Vec<Jet>),
}

/// Section with constant coefficients in a frame block.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSpec {
    pub omega: Option<OmegaSpec>,
    /// Coefficients on the frame of Λ_ℓ; empty means zero.
    pub gamma0: SectionSpec,
    /// `(j, coefficients on the frame of N_j)`, 2 ≤ j ≤ ℓ.
    pub gamma_extra: Vec<(usize, SectionSpec)>,
}

#[derive(Clone, Debug)]
pub struct CrossSectionData {
    pub ell: usize,
    pub c: f64,
    pub omega: OmegaSpec,
    /// Per-node ω jets.
    pub omega_jets: Vec<Jet>,
    /// Coordinates of γ1 on the N_1 frame, per node.
    pub gamma1: Vec<Vec<Jet>>,
    pub gamma0: SectionSpec,
    pub gamma_extra: Vec<(usize, SectionSpec)>,
    /// Per-node h, jets of order 2.
    pub h: Vec<VJet>,
    /// Max relative residual of ⟨α, γ1⟩ = Hess ω + cω⟨,⟩.
    pub solve_residual: f64,
    pub projection_residual: f64,
}

const H_ORDER: usize = 2;

fn omega_jets(an: &Analysis, omega: &OmegaSpec) -> Result<Vec<Jet>> {
    let q = H_ORDER + 2;
    let n = an.chart.grid.len();
    match omega {
        OmegaSpec::Zero => Ok(vec![Jet::zero(q); n]),
        OmegaSpec::Affine { v, c0 } => {
            if v.len() != an.chart.ambient.flat_dim {
                return Err(GeomError::InvalidSpec(format!("omega vector has length {}, expected {}", v.len(), an.chart.ambient.flat_dim)));
            }
            let v = VJet::constant(&DVector::from_column_slice(v), q);
            Ok(an.chart.jets.iter().map(|g| g.truncate(q).dot(&v).add_const(*c0)).collect())
        }
        OmegaSpec::Jets(js) => {
            if js.len() != n {
                return Err(GeomError::InvalidSpec("omega jets do not match the grid".into()));
            }
            if js.iter().any(|j| j.order() < q) {
                return Err(GeomError::JetOrderTooLow { order: js.iter().map(|j| j.order()).min().unwrap_or(0), needed: q });
            }
            Ok(js.iter().map(|j| j.truncate(q)).collect())
        }
    }
}

/// g_*(grad ω) for the metric induced by `g`, as a jet of order `q`.
fn gradient(g: &VJet, w: &Jet, q: usize) -> VJet {
    let (gu, gv) = (g.du().truncate(q), g.dv().truncate(q));
    let (e, f, gg) = (gu.dot(&gu), gu.dot(&gv), gv.dot(&gv));
    let det = &(&e * &gg) - &(&f * &f);
    let inv = det.recip();
    let (wu, wv) = (w.du().truncate(q), w.dv().truncate(q));
    let a = &(&gg * &wu) - &(&f * &wv);
    let b = &(&e * &wv) - &(&f * &wu);
    gu.mul_scalar(&(&a * &inv)).add(&gv.mul_scalar(&(&b * &inv)))
}

/// Hess ω on ∂u∂u, ∂u∂v, ∂v∂v, from tangential projection of g's second derivatives.
fn hessian(g: &VJet, w: &Jet, q: usize) -> [Jet; 3] {
    let (gu, gv) = (g.du().truncate(q + 1), g.dv().truncate(q + 1));
    let (e, f, gg) = (gu.dot(&gu), gu.dot(&gv), gv.dot(&gv));
    let inv = (&(&e * &gg) - &(&f * &f)).recip();
    let (wu, wv) = (w.du(), w.dv());
    let second = [g.derivs(2, 0), g.derivs(1, 1), g.derivs(0, 2)];
    let wsecond = [w.du().du(), w.du().dv(), w.dv().dv()];
    let mut out = [Jet::zero(q), Jet::zero(q), Jet::zero(q)];
    for k in 0..3 {
        let s = second[k].truncate(q);
        let (pu, pv) = (s.dot(&gu.truncate(q)), s.dot(&gv.truncate(q)));
        // Christoffel coordinates of the tangential part.
        let cu = &(&(&gg.truncate(q) * &pu) - &(&f.truncate(q) * &pv)) * &inv.truncate(q);
        let cv = &(&(&e.truncate(q) * &pv) - &(&f.truncate(q) * &pu)) * &inv.truncate(q);
        let corr = &(&cu * &wu.truncate(q)) + &(&cv * &wv.truncate(q));
        out[k] = &wsecond[k].truncate(q) - &corr;
    }
    out
}

/// Range of frame columns spanning Λ_ℓ.
pub fn lambda_columns(an: &Analysis, ell: usize) -> std::ops::Range<usize> {
    let lay = &an.flag.layout;
    lay.block(ell + 1).start..lay.block(an.flag.tau).end
}

fn check_section(name: &str, s: &SectionSpec, dim: usize) -> Result<()> {
    if !s.coeffs.is_empty() && s.coeffs.len() != dim {
        return Err(GeomError::InvalidSpec(format!("{name} has {} coefficients, expected {dim}", s.coeffs.len())));
    }
    Ok(())
}

/// Solves for γ1 and assembles h = cω g + grad ω + γ0 + γ1 + Σ γ_j.
pub fn cross_section(an: &Analysis, spec: &CrossSectionSpec, ell: usize, tol: f64) -> Result<CrossSectionData> {
    let cs = an.elliptic()?;
    let tau = an.flag.tau;
    if ell == 0 || ell >= tau {
        return Err(GeomError::OrderOutOfRange { order: ell, max: tau.saturating_sub(1) });
    }
    if ell > cs.tau_o {
        return Err(GeomError::OrderOutOfRange { order: ell, max: cs.tau_o });
    }
    let defect = cs.orth_defect.iter().map(|d| d[ell]).fold(0.0, f64::max);
    if defect > an.params.tol_circle {
        return Err(GeomError::NotCircular { order: ell, defect });
    }
    let omega = spec.omega.clone().unwrap_or(OmegaSpec::Zero);
    if omega != OmegaSpec::Zero {
        // grad and Hess are taken in the induced metric, which makes J orthogonal only here.
        let d0 = cs.orth_defect.iter().map(|d| d[0]).fold(0.0, f64::max);
        if d0 > an.params.tol_circle {
            return Err(GeomError::PreconditionFailed("nonzero omega needs a minimal base surface".into()));
        }
    }
    let lam = lambda_columns(an, ell);
    check_section("gamma0", &spec.gamma0, lam.len())?;
    for (j, s) in &spec.gamma_extra {
        if *j < 2 || *j > ell {
            return Err(GeomError::InvalidSpec(format!("gamma_{j} outside 2..={ell}")));
        }
        check_section("gamma_j", s, an.flag.dims[*j])?;
    }
    let c = if an.chart.ambient.kind == AmbientKind::Sphere { 1.0 } else { 0.0 };
    let q = H_ORDER;
    let wj = omega_jets(an, &omega)?;
    let n = an.chart.grid.len();
    let mut h = Vec::with_capacity(n);
    let mut gamma1 = Vec::with_capacity(n);
    let mut solve_residual: f64 = 0.0;
    let mut projection_residual: f64 = 0.0;
    for node in 0..n {
        let g = &an.chart.jets[node];
        let frames = an.flag.frame_jets(&an.chart, node)?;
        let w = &wj[node];
        let mut acc = VJet::zero(g.dim(), q);
        let mut y = vec![Jet::zero(q); an.flag.dims[1]];
        if omega != OmegaSpec::Zero {
            acc = acc.add(&g.truncate(q).mul_scalar(&w.truncate(q)).scale(c));
            acc = acc.add(&gradient(g, w, q));
            // ⟨α_ij, γ1⟩ = Hess_ij ω + cω I_ij over the N_1 frame, by normal equations.
            let hess = hessian(g, w, q);
            let (gu, gv) = (g.du().truncate(q), g.dv().truncate(q));
            let metric = [gu.dot(&gu), gu.dot(&gv), gv.dot(&gv)];
            let rhs: Vec<Jet> = (0..3).map(|k| &hess[k] + &(&metric[k] * &w.truncate(q)).scale(c)).collect();
            let e1: Vec<VJet> = frames[an.flag.layout.block(1)].iter().map(|e| e.truncate(q)).collect();
            let second = [g.derivs(2, 0).truncate(q), g.derivs(1, 1).truncate(q), g.derivs(0, 2).truncate(q)];
            let b: Vec<Vec<Jet>> = second.iter().map(|s| e1.iter().map(|e| s.dot(e)).collect()).collect();
            let d = e1.len();
            if d != 2 {
                return Err(GeomError::PreconditionFailed("first normal bundle must be a plane".into()));
            }
            let btb = |a: usize, bb: usize| -> Jet { (0..3).fold(Jet::zero(q), |s, k| &s + &(&b[k][a] * &b[k][bb])) };
            let btr = |a: usize| -> Jet { (0..3).fold(Jet::zero(q), |s, k| &s + &(&b[k][a] * &rhs[k])) };
            let (m00, m01, m11) = (btb(0, 0), btb(0, 1), btb(1, 1));
            let (r0, r1) = (btr(0), btr(1));
            let idet = (&(&m00 * &m11) - &(&m01 * &m01)).recip();
            y[0] = &(&(&m11 * &r0) - &(&m01 * &r1)) * &idet;
            y[1] = &(&(&m00 * &r1) - &(&m01 * &r0)) * &idet;
            let mut res: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for k in 0..3 {
                let lhs = b[k][0].value() * y[0].value() + b[k][1].value() * y[1].value();
                res = res.max((lhs - rhs[k].value()).abs());
                scale = scale.max(rhs[k].value().abs()).max(b[k][0].value().abs().max(b[k][1].value().abs()) * (y[0].value().hypot(y[1].value())));
            }
            let rel = if scale > 0.0 { res / scale } else { res };
            solve_residual = solve_residual.max(rel);
            for (a, e) in e1.iter().enumerate() {
                acc = acc.add(&e.mul_scalar(&y[a]));
            }
        }
        if !spec.gamma0.coeffs.is_empty() {
            for (k, col) in lam.clone().enumerate() {
                acc = acc.add(&frames[col].truncate(q).scale(spec.gamma0.coeffs[k]));
            }
        }
        for (j, s) in &spec.gamma_extra {
            let r = an.flag.layout.block(*j);
            let mut gj = VJet::zero(g.dim(), q);
            for (k, col) in r.clone().enumerate() {
                gj = gj.add(&frames[col].truncate(q).scale(s.coeffs[k]));
            }
            let basis = an.flag.basis(node, *j);
            let v = gj.value();
            let out = &v - &basis * (basis.transpose() * &v);
            projection_residual = projection_residual.max(out.norm() / v.norm().max(1e-300));
            acc = acc.add(&gj);
        }
        h.push(acc);
        gamma1.push(y);
    }
    if solve_residual > tol {
        return Err(GeomError::SolveResidualTooLarge { residual: solve_residual, tol });
    }
    Ok(CrossSectionData {
        ell,
        c,
        omega,
        omega_jets: wj,
        gamma1,
        gamma0: spec.gamma0.clone(),
        gamma_extra: spec.gamma_extra.clone(),
        h,
        solve_residual,
        projection_residual,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FiberParams {
    /// Distance of the star points from the origin of each fiber.
    pub step: f64,
    pub rank_tol: f64,
}

impl Default for FiberParams {
    fn default() -> Self {
        FiberParams { step: 0.5, rank_tol: 1e-6 }
    }
}

/// Star offsets in fiber coordinates: origin, then ± step along each axis.
pub fn star(k: usize, step: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; k]];
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut t = vec![0.0; k];
            t[i] = s * step;
            out.push(t);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct RankTwoSample {
    pub node: usize,
    pub delta_index: usize,
    /// Fiber coordinates on the frame of Λ_ℓ.
    pub delta: Vec<f64>,
    pub x: DVector<f64>,
    /// Columns ∂u f, ∂v f, ∂t_i f.
    pub jacobian: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    /// α(e_a, e_b) at index a·n + b.
    pub alpha: Vec<DVector<f64>>,
    pub nullity_dim: usize,
    /// Basis of the relative nullity (coordinate vectors, columns).
    pub nullity: DMatrix<f64>,
    pub regular: bool,
    pub trace_residual: f64,
    /// |JᵀJ − I| for the complex structure of α on Δ^⊥ (∞ if none).
    pub j_orthogonality: f64,
}

#[derive(Clone, Debug)]
pub struct RankTwoChart {
    pub ell: usize,
    pub theta: f64,
    pub n: usize,
    pub grid: GridParams,
    pub fiber: FiberParams,
    pub samples: Vec<RankTwoSample>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RankTwoSummary {
    pub samples: usize,
    pub regular: usize,
    pub n: usize,
    /// Regular samples whose nullity is not n − 2.
    pub nullity_mismatch: usize,
    pub max_trace_residual: f64,
    pub max_j_orthogonality: f64,
}

impl RankTwoChart {
    pub fn summary(&self) -> RankTwoSummary {
        let reg: Vec<&RankTwoSample> = self.samples.iter().filter(|s| s.regular).collect();
        RankTwoSummary {
            samples: self.samples.len(),
            regular: reg.len(),
            n: self.n,
            nullity_mismatch: reg.iter().filter(|s| s.nullity_dim + 2 != self.n).count(),
            max_trace_residual: reg.iter().map(|s| s.trace_residual).fold(0.0, f64::max),
            max_j_orthogonality: reg.iter().map(|s| s.j_orthogonality).fold(0.0, f64::max),
        }
    }

    /// Congruence of the sampled point sets, sample by sample.
    pub fn congruence(&self, other: &RankTwoChart, kind: AmbientKind) -> Result<crate::assoc::CongruenceResult> {
        if self.grid != other.grid || self.samples.len() != other.samples.len() {
            return Err(GeomError::GridMismatch);
        }
        let pa: Vec<DVector<f64>> = self.samples.iter().map(|s| s.x.clone()).collect();
        let pb: Vec<DVector<f64>> = other.samples.iter().map(|s| s.x.clone()).collect();
        Ok(crate::assoc::align_points(&pa, &pb, kind == AmbientKind::Euclidean))
    }

    /// CSV `u,v,delta_index,x1..xM,nullity_dim,regular`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| GeomError::Io(e.to_string());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        let m = self.samples.first().map(|s| s.x.len()).unwrap_or(0);
        let mut header = vec!["u".to_string(), "v".to_string(), "delta_index".to_string()];
        header.extend((1..=m).map(|k| format!("x{k}")));
        header.push("nullity_dim".into());
        header.push("regular".into());
        w.write_record(&header).map_err(io)?;
        for s in &self.samples {
            let (u, v) = self.grid.coords(s.node);
            let mut rec = vec![fmt_f64(u), fmt_f64(v), s.delta_index.to_string()];
            rec.extend(s.x.iter().map(|x| fmt_f64(*x)));
            rec.push(s.nullity_dim.to_string());
            rec.push(u8::from(s.regular).to_string());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| GeomError::Io(e.to_string()))
    }
}

/// Position, first and second derivatives of f = h + Σ t_i E_i at one sample.
fn sample(h: &VJet, fiber: &[VJet], node: usize, delta_index: usize, t: &[f64], rank_tol: f64) -> RankTwoSample {
    let k = fiber.len();
    let n = 2 + k;
    let m = h.dim();
    let mut pos = h.clone();
    for (ti, e) in t.iter().zip(fiber) {
        pos = pos.add(&e.scale(*ti));
    }
    let mut jac = DMatrix::zeros(m, n);
    jac.set_column(0, &pos.partial(1, 0));
    jac.set_column(1, &pos.partial(0, 1));
    for (i, e) in fiber.iter().enumerate() {
        jac.set_column(2 + i, &e.value());
    }
    let mut second = vec![DVector::zeros(m); n * n];
    let mut set = |a: usize, b: usize, v: DVector<f64>| {
        second[a * n + b] = v.clone();
        second[b * n + a] = v;
    };
    set(0, 0, pos.partial(2, 0));
    set(0, 1, pos.partial(1, 1));
    set(1, 1, pos.partial(0, 2));
    for (i, e) in fiber.iter().enumerate() {
        set(0, 2 + i, e.partial(1, 0));
        set(1, 2 + i, e.partial(0, 1));
    }
    let metric = jac.transpose() * &jac;
    let svd = svd_sorted(&jac);
    let smax = svd.s[0];
    let regular = svd.s[n - 1] > rank_tol * smax;
    let mut alpha = vec![DVector::zeros(m); n * n];
    let mut nullity = DMatrix::zeros(n, 0);
    let mut nullity_dim = 0;
    let mut trace_residual = f64::INFINITY;
    if regular {
        let t = svd.u.columns(0, n).into_owned();
        for (a, s) in alpha.iter_mut().zip(&second) {
            *a = s - &t * (t.transpose() * s);
        }
        let mut l = DMatrix::zeros(n * m, n);
        for a in 0..n {
            for b in 0..n {
                l.view_mut((b * m, a), (m, 1)).copy_from(&alpha[a * n + b]);
            }
        }
        let ls = svd_sorted(&l);
        let lmax = ls.s[0];
        let rank = ls.s.iter().filter(|&&s| s > rank_tol * lmax).count();
        nullity_dim = n - rank;
        nullity = ls.v.columns(rank, n - rank).into_owned();
        let ginv = metric.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n));
        let mut tr = DVector::zeros(m);
        let mut scale = 0.0;
        for a in 0..n {
            for b in 0..n {
                tr += &alpha[a * n + b] * ginv[(a, b)];
                scale += ginv[(a, b)].abs() * alpha[a * n + b].norm();
            }
        }
        trace_residual = if scale > 0.0 { tr.norm() / scale } else { tr.norm() };
    }
    let mut out = RankTwoSample {
        node,
        delta_index,
        delta: t.to_vec(),
        x: pos.value(),
        jacobian: jac,
        metric,
        alpha,
        nullity_dim,
        nullity,
        regular,
        trace_residual,
        j_orthogonality: f64::INFINITY,
    };
    if regular && out.nullity.ncols() + 2 == n {
        out.j_orthogonality = complement_j_defect(&out);
    }
    out
}

/// Samples f(δ) = h(x) + δ on a star in every fiber of Λ_ℓ.
pub fn build_ranktwo(an: &Analysis, cs: &CrossSectionData, fiber: &FiberParams) -> Result<RankTwoChart> {
    let lam = lambda_columns(an, cs.ell);
    let k = lam.len();
    let offsets = star(k, fiber.step);
    let grid = an.chart.grid;
    let mut samples = Vec::with_capacity(grid.len() * offsets.len());
    for node in 0..grid.len() {
        let frames = an.flag.frame_jets(&an.chart, node)?;
        let e: Vec<VJet> = frames[lam.clone()].iter().map(|c| c.truncate(H_ORDER)).collect();
        for (di, t) in offsets.iter().enumerate() {
            samples.push(sample(&cs.h[node], &e, node, di, t, fiber.rank_tol));
        }
    }
    if !samples.iter().any(|s| s.regular) {
        return Err(GeomError::AllSingular);
    }
    Ok(RankTwoChart { ell: cs.ell, theta: 0.0, n: 2 + k, grid, fiber: *fiber, samples })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RankTwoVerdict {
    pub theta: f64,
    pub compared: usize,
    /// max |G_θ − G| / |G| over samples regular in both.
    pub metric: f64,
    /// max over samples of |α_{f_θ}(X,Y) − φ_θ α_f(R_{−θ}X,Y)| / max|α_f|.
    pub alpha: f64,
    /// Same with the opposite orientation of Δ^⊥, for diagnostics.
    pub alpha_opposite: f64,
    /// max |⟨∂_a ξ, η⟩_θ − ⟨∂_a ξ, η⟩| for ξ, η normal fields carried by φ_θ.
    pub normal_connection: f64,
    /// Tangential component of those normal fields, relative to |Df|.
    pub normal_span: f64,
}

impl RankTwoVerdict {
    pub fn max(&self) -> f64 {
        self.metric.max(self.alpha).max(self.normal_connection).max(self.normal_span)
    }
}

/// G-orthonormal basis of Δ^⊥ from the projections of ∂u, ∂v.
fn complement_basis(s: &RankTwoSample) -> DMatrix<f64> {
    let n = s.metric.nrows();
    let g = &s.metric;
    let k = &s.nullity;
    let kg = k.transpose() * g * k;
    let kgi = kg.try_inverse().unwrap_or_else(|| DMatrix::zeros(k.ncols(), k.ncols()));
    let proj = DMatrix::identity(n, n) - k * kgi * k.transpose() * g;
    let mut b: Vec<DVector<f64>> = Vec::new();
    for c in 0..2 {
        let mut x = proj.column(c).into_owned();
        for y in &b {
            let d = (x.transpose() * g * y)[0];
            x -= y * d;
        }
        let nx = (x.transpose() * g * &x)[0].sqrt();
        b.push(x / nx);
    }
    DMatrix::from_columns(&b)
}

/// R_φ = cos φ + sin φ J on Δ^⊥, identity on Δ, where J is the rotation by
/// +π/2 in the basis of `complement_basis` times `orient`.
fn nullity_rotation(s: &RankTwoSample, phi: f64, orient: f64) -> DMatrix<f64> {
    let n = s.metric.nrows();
    let g = &s.metric;
    let bm = complement_basis(s);
    let rot = crate::linalg::rotation2(orient * phi);
    DMatrix::identity(n, n) - &bm * bm.transpose() * g + &bm * rot * bm.transpose() * g
}

/// Orthogonality defect of the J on Δ^⊥ with α(X,X) + α(JX,JX) = 0.
fn complement_j_defect(s: &RankTwoSample) -> f64 {
    let n = s.metric.nrows();
    let bm = complement_basis(s);
    let at = |x: &DVector<f64>, y: &DVector<f64>| {
        let mut out = DVector::zeros(s.x.len());
        for a in 0..n {
            for b in 0..n {
                out += &s.alpha[a * n + b] * (x[a] * y[b]);
            }
        }
        out
    };
    let (b1, b2) = (bm.column(0).into_owned(), bm.column(1).into_owned());
    let a2 = DMatrix::from_columns(&[at(&b1, &b1), at(&b1, &b2), at(&b2, &b2)]);
    let svd = svd_sorted(&a2);
    let smax = svd.s[0];
    if smax == 0.0 {
        return 0.0;
    }
    let r = svd.s.iter().filter(|&&x| x > 1e-9 * smax).count();
    let coords = svd.u.columns(0, r).transpose() * &a2;
    match solve_j(&coords, &Matrix2::identity()) {
        Some(j) => (j.transpose() * j - Matrix2::identity()).amax(),
        None => f64::INFINITY,
    }
}

fn alpha_residual(f: &RankTwoSample, ft: &RankTwoSample, phi_map: &DMatrix<f64>, rot: &DMatrix<f64>) -> f64 {
    let n = f.metric.nrows();
    let scale = f.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max).max(1e-300);
    let mut r: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut rotated = DVector::zeros(f.x.len());
            for c in 0..n {
                rotated += &f.alpha[c * n + b] * rot[(c, a)];
            }
            r = r.max((&ft.alpha[a * n + b] - phi_map * rotated).norm() / scale);
        }
    }
    r
}

/// f_θ(δ) = h_θ(x) + φ_θ δ on the same (node, δ) samples, with verification.
pub fn ranktwo_family(an: &Analysis, cs: &CrossSectionData, rt: &RankTwoChart, fam: &Family) -> Result<(RankTwoChart, RankTwoVerdict)> {
    if fam.ell != rt.ell {
        return Err(GeomError::PreconditionFailed(format!("family has ell = {}, rank-two chart ell = {}", fam.ell, rt.ell)));
    }
    let lam = lambda_columns(an, rt.ell);
    let offsets = star(lam.len(), rt.fiber.step);
    let q = H_ORDER;
    let n1 = an.flag.layout.block(1);
    let low = an.flag.layout.block(0).start..an.flag.layout.block(rt.ell).start;
    // Δ^⊥ carries the orientation opposite to the base one twisted by the sign of J_ℓ.
    let orient = -fam.mc.sigma;
    let mut samples = Vec::with_capacity(rt.samples.len());
    let mut verdict = RankTwoVerdict { theta: fam.theta, ..Default::default() };
    for node in 0..rt.grid.len() {
        let fj: MJet = fam.frame_jet(an, node).truncate(q);
        let col = |c: usize| fj.column(c);
        let gt = &fam.chart.jets[node];
        let w = &cs.omega_jets[node];
        let mut h = VJet::zero(gt.dim(), q);
        if cs.omega != OmegaSpec::Zero {
            h = h.add(&gt.truncate(q).mul_scalar(&w.truncate(q)).scale(cs.c));
            h = h.add(&gradient(gt, w, q));
            for (a, c) in n1.clone().enumerate() {
                h = h.add(&col(c).mul_scalar(&cs.gamma1[node][a]));
            }
        }
        if !cs.gamma0.coeffs.is_empty() {
            for (k, c) in lam.clone().enumerate() {
                h = h.add(&col(c).scale(cs.gamma0.coeffs[k]));
            }
        }
        for (j, s) in &cs.gamma_extra {
            for (k, c) in an.flag.layout.block(*j).enumerate() {
                h = h.add(&col(c).scale(s.coeffs[k]));
            }
        }
        let e: Vec<VJet> = lam.clone().map(col).collect();
        let phi_map = fj.value() * an.flag.frames[node].transpose();
        // The normal space of f is N_0 ⊕ … ⊕ N_{ℓ-1}; compare its connection with that of f_θ.
        let ej = an.flag.frame_mjet(&an.chart, node)?.truncate(q);
        let (c0, c1) = (connection_coeffs(&ej, &low), connection_coeffs(&fj, &low));
        for (x, y) in c0.iter().zip(&c1) {
            verdict.normal_connection = verdict.normal_connection.max((x - y).abs());
        }
        for (di, t) in offsets.iter().enumerate() {
            let st = sample(&h, &e, node, di, t, rt.fiber.rank_tol);
            let s0 = &rt.samples[node * offsets.len() + di];
            if st.regular && s0.regular && s0.nullity.ncols() + 2 == rt.n {
                verdict.compared += 1;
                for (k, x) in [s0, &st].into_iter().zip([ej.value(), fj.value()]) {
                    let xi = x.columns(low.start, low.len());
                    let scale = k.jacobian.norm().max(1e-300);
                    verdict.normal_span = verdict.normal_span.max((k.jacobian.transpose() * xi).amax() / scale);
                }
                let gn = s0.metric.norm().max(1e-300);
                verdict.metric = verdict.metric.max((&st.metric - &s0.metric).norm() / gn);
                let r = nullity_rotation(s0, -fam.theta, orient);
                verdict.alpha = verdict.alpha.max(alpha_residual(s0, &st, &phi_map, &r));
                let r = nullity_rotation(s0, -fam.theta, -orient);
                verdict.alpha_opposite = verdict.alpha_opposite.max(alpha_residual(s0, &st, &phi_map, &r));
            }
            samples.push(st);
        }
    }
    if !samples.iter().any(|s| s.regular) {
        return Err(GeomError::AllSingular);
    }
    Ok((RankTwoChart { ell: rt.ell, theta: fam.theta, n: rt.n, grid: rt.grid, fiber: rt.fiber, samples }, verdict))
}

/// ⟨∂_a ξ_c, ξ_d⟩ for the frame columns in `cols`, a = u, v.
fn connection_coeffs(frame: &MJet, cols: &std::ops::Range<usize>) -> Vec<f64> {
    let mut out = Vec::new();
    for axis in 0..2 {
        let d = frame.deriv(axis);
        for c in cols.clone() {
            let dc = d.value().column(c);
            for e in cols.clone() {
                out.push(dc.dot(&frame.value().column(e)));
            }
        }
    }
    out
}
