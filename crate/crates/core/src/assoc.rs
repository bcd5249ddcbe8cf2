//! Associated families: the modified connection, frame integration, and
//! the residual checks that certify the resulting immersions.

use crate::ambient::{AmbientKind, Chart, ChartSource};
use crate::analysis::Analysis;
use crate::compat::curvature_value;
use crate::elliptic::ComplexStructures;
use crate::error::{GeomError, Result};
use crate::flag::{FlagLayout, FrenetTensors, NormalFlag};
use crate::jet::{index, MJet, VJet};
use crate::linalg::{op_norm, orthonormalize, rot90};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// ∇^θ on the flag: block (ℓ+1, ℓ) is post-multiplied by R^ℓ_θ and block
/// (ℓ, ℓ+1) pre-multiplied by its transpose. For ℓ = 0 this is the
/// tangential modification of the standard family.
#[derive(Clone, Debug)]
pub struct ModifiedConnection {
    pub ell: usize,
    pub theta: f64,
    /// R^ℓ_θ in the flag basis of N_ℓ (exact rotation; J_ℓ = σ·R90 there).
    pub rot: DMatrix<f64>,
    pub sigma: f64,
    pub layout: FlagLayout,
    /// Max orthogonality defect of J_ℓ over the grid.
    pub circular_defect: f64,
    pub tol_circle: f64,
    /// Max |Ω̂ + Ω̂ᵀ| over nodes and directions.
    pub metric_compatibility: f64,
}

impl ModifiedConnection {
    /// Modified copy of a connection-form jet.
    pub fn apply(&self, om: &MJet) -> MJet {
        let (rl, rn) = (self.layout.block(self.ell), self.layout.block(self.ell + 1));
        let rt = self.rot.transpose();
        om.map(|m| {
            let mut out = m.clone();
            let down = m.view((rn.start, rl.start), (rn.len(), rl.len())) * &self.rot;
            out.view_mut((rn.start, rl.start), (rn.len(), rl.len())).copy_from(&down);
            let up = &rt * m.view((rl.start, rn.start), (rl.len(), rn.len()));
            out.view_mut((rl.start, rn.start), (rl.len(), rn.len())).copy_from(&up);
            out
        })
    }

    /// `(t, s)` flag blocks (t, s ≥ 0; position and complement excluded) where
    /// the modified values differ from the original at a node.
    pub fn changed_blocks(&self, tensors: &FrenetTensors, node: usize, tol: f64) -> Vec<(usize, usize)> {
        let n = self.layout.blocks.len();
        let mut out = Vec::new();
        for axis in 0..2 {
            let a = tensors.omega[node][axis].value();
            let b = self.apply(&tensors.omega[node][axis]).value().clone();
            for t in 0..n {
                for s in 0..n {
                    let (rt, rs) = (self.layout.block(t), self.layout.block(s));
                    let d = (b.view((rt.start, rs.start), (rt.len(), rs.len()))
                        - a.view((rt.start, rs.start), (rt.len(), rs.len())))
                    .amax();
                    if d > tol && !out.contains(&(t, s)) {
                        out.push((t, s));
                    }
                }
            }
        }
        out.sort();
        out
    }
}

pub fn modified_connection(
    flag: &NormalFlag,
    tensors: &FrenetTensors,
    cs: &ComplexStructures,
    ell: usize,
    theta: f64,
    tol_circle: f64,
) -> Result<ModifiedConnection> {
    // ℓ + 1 must be a flag order and N_ℓ must carry J_ℓ.
    if ell > cs.tau_o || ell + 1 > flag.tau {
        return Err(GeomError::OrderOutOfRange { order: ell, max: cs.tau_o.min(flag.tau.saturating_sub(1)) });
    }
    if ell >= 1 {
        let dim = flag.substantial_dim + usize::from(flag.layout.position.is_some());
        if dim < 6 {
            return Err(GeomError::AmbientTooSmall { dim });
        }
    }
    let defect = cs.orth_defect.iter().map(|d| d[ell]).fold(0.0, f64::max);
    if defect > tol_circle {
        return Err(GeomError::NotCircular { order: ell, defect });
    }
    let base = tensors.omega.len() / 2;
    let base = base.min(cs.js.len() - 1);
    let sigma = cs.js[base][ell][(1, 0)].signum();
    if cs.js.iter().any(|js| js[ell][(1, 0)].signum() != sigma) {
        return Err(GeomError::PreconditionFailed("J_ell changes orientation across the grid".into()));
    }
    let rot = DMatrix::identity(2, 2) * theta.cos() + rot90() * (sigma * theta.sin());
    let mut mc = ModifiedConnection {
        ell,
        theta,
        rot,
        sigma,
        layout: tensors.layout.clone(),
        circular_defect: defect,
        tol_circle,
        metric_compatibility: 0.0,
    };
    let mut mcomp: f64 = 0.0;
    for om in &tensors.omega {
        for o in om {
            let v = mc.apply(o).value().clone();
            mcomp = mcomp.max((&v + v.transpose()).amax());
        }
    }
    mc.metric_compatibility = mcomp;
    Ok(mc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Transport {
    /// Per-node Taylor solutions of the frame equation matched at edge midpoints.
    Taylor,
    /// exp(hΩ) with Ω at the edge midpoint.
    Midpoint,
}

#[derive(Clone, Copy, Debug)]
pub struct FamilyParams {
    pub transport: Transport,
    /// Bound on cell holonomy per unit area.
    pub holonomy_bound: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams { transport: Transport::Taylor, holonomy_bound: 1e-3 }
    }
}

#[derive(Clone, Debug)]
pub struct FrameField {
    /// Integrated flag frames of g_θ, columns in layout order.
    pub frames: Vec<DMatrix<f64>>,
    /// Position of g_θ at the base node.
    pub anchor: DVector<f64>,
    /// Max over cells of the path-dependence of the transport, per unit area.
    pub holonomy: f64,
    pub holonomy_cell: usize,
    /// Same, not divided by the cell area.
    pub holonomy_raw: f64,
    pub orthogonality: f64,
}

#[derive(Clone, Debug)]
pub struct Family {
    pub ell: usize,
    pub theta: f64,
    pub chart: Chart,
    pub field: FrameField,
    pub mc: ModifiedConnection,
}

impl Family {
    /// Jet of the integrated frame of g_θ at a node (columns in layout order).
    pub fn frame_jet(&self, base: &Analysis, node: usize) -> MJet {
        let kind = base.chart.ambient.kind;
        let m = base.chart.ambient.flat_dim;
        let [au, av] = [0, 1].map(|axis| {
            system_connection(kind, &self.mc.apply(&base.tensors.omega[node][axis]), &base.tensors.translation[node][axis])
        });
        let g = solve_frame_jet(&au, &av);
        let f = &self.field.frames[node];
        g.map(|c| f * c.view((0, 0), (m, m)))
    }
}

/// Taylor solution of dG = G·(A_u du + A_v dv), G(0) = I.
pub fn solve_frame_jet(au: &MJet, av: &MJet) -> MJet {
    let n = au.rows();
    let r = au.order().min(av.order());
    let mut g = MJet::zero(n, n, r + 1);
    let (cu, cv) = (au.coeffs(), av.coeffs());
    let gc = g.coeffs_mut();
    gc[0] = DMatrix::identity(n, n);
    for b in 0..=r {
        let mut acc = DMatrix::zeros(n, n);
        for bp in 0..=b {
            acc += &gc[index(0, bp)] * &cv[index(0, b - bp)];
        }
        gc[index(0, b + 1)] = acc / (b + 1) as f64;
    }
    for a in 0..=r {
        for b in 0..=r - a {
            let mut acc = DMatrix::zeros(n, n);
            for ap in 0..=a {
                for bp in 0..=b {
                    acc += &gc[index(ap, bp)] * &cu[index(a - ap, b - bp)];
                }
            }
            gc[index(a + 1, b)] = acc / (a + 1) as f64;
        }
    }
    g
}

/// Connection of the frame system: Ω̂ for sphere charts, the affine
/// extension [[Ω̂, Eᵀ∂g], [0, 0]] for Euclidean charts.
fn system_connection(kind: AmbientKind, om: &MJet, tr: &VJet) -> MJet {
    match kind {
        AmbientKind::Sphere => om.clone(),
        AmbientKind::Euclidean => {
            let m = om.rows();
            let tr = tr.truncate(om.order());
            let mut out = MJet::zero(m + 1, m + 1, om.order());
            for (k, c) in out.coeffs_mut().iter_mut().enumerate() {
                c.view_mut((0, 0), (m, m)).copy_from(&om.coeffs()[k]);
                c.view_mut((0, m), (m, 1)).copy_from(&tr.matrix().column(k));
            }
            out
        }
    }
}

struct NodeSteps {
    /// Transport to the midpoints (+u, −u, +v, −v) from this node.
    half: [DMatrix<f64>; 4],
    anchor: VJet,
}

fn orthonormalize_linear(f: &mut DMatrix<f64>, m: usize) {
    let q = orthonormalize(&f.view((0, 0), (m, m)).into_owned());
    f.view_mut((0, 0), (m, m)).copy_from(&q);
}

pub fn integrate_family(an: &Analysis, mc: &ModifiedConnection, params: &FamilyParams) -> Result<Family> {
    let chart = &an.chart;
    let grid = chart.grid;
    let kind = chart.ambient.kind;
    let m = chart.ambient.flat_dim;
    let n = if kind == AmbientKind::Euclidean { m + 1 } else { m };
    let anchor_col = if kind == AmbientKind::Euclidean { m } else { 0 };
    let (hu, hv) = (grid.hu(), grid.hv());
    let mut steps = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let [au, av] = [0, 1].map(|axis| {
            system_connection(kind, &mc.apply(&an.tensors.omega[node][axis]), &an.tensors.translation[node][axis])
        });
        let g = solve_frame_jet(&au, &av);
        let half = match params.transport {
            Transport::Taylor => [g.eval(hu / 2.0, 0.0), g.eval(-hu / 2.0, 0.0), g.eval(0.0, hv / 2.0), g.eval(0.0, -hv / 2.0)],
            Transport::Midpoint => {
                // Full-step exponential stored in the + slots; − slots are identities.
                let eu = (au.eval(hu / 2.0, 0.0) * hu).exp();
                let ev = (av.eval(0.0, hv / 2.0) * hv).exp();
                [eu, DMatrix::identity(n, n), ev, DMatrix::identity(n, n)]
            }
        };
        steps.push(NodeSteps { half, anchor: g.column(anchor_col) });
    }
    let inv = |x: &DMatrix<f64>| x.clone().try_inverse().ok_or_else(|| GeomError::IntegrationFailed { residual: f64::INFINITY, tol: 0.0 });
    // Transition from node a to its +neighbour b along an axis.
    let step = |a: usize, b: usize, axis: usize| -> Result<DMatrix<f64>> {
        let (p, q) = (2 * axis, 2 * axis + 1);
        Ok(&steps[a].half[p] * inv(&steps[b].half[q])?)
    };
    let base = grid.base();
    let (i0, j0) = grid.base_ij();
    let mut f0 = DMatrix::identity(n, n);
    f0.view_mut((0, 0), (m, m)).copy_from(&an.flag.frames[base]);
    if kind == AmbientKind::Euclidean {
        f0.view_mut((0, m), (m, 1)).copy_from(&chart.jets[base].value());
    }
    let mut frames: Vec<Option<DMatrix<f64>>> = vec![None; grid.len()];
    frames[base] = Some(f0);
    let sweep = |frames: &mut Vec<Option<DMatrix<f64>>>, line: &dyn Fn(usize) -> usize, start: usize, len: usize, axis: usize| -> Result<()> {
        for k in start + 1..len {
            let (a, b) = (line(k - 1), line(k));
            let mut f = frames[a].as_ref().unwrap() * step(a, b, axis)?;
            orthonormalize_linear(&mut f, m);
            frames[b] = Some(f);
        }
        for k in (0..start).rev() {
            let (a, b) = (line(k), line(k + 1));
            let mut f = frames[b].as_ref().unwrap() * inv(&step(a, b, axis)?)?;
            orthonormalize_linear(&mut f, m);
            frames[a] = Some(f);
        }
        Ok(())
    };
    sweep(&mut frames, &|i| grid.node(i, j0), i0, grid.nu, 0)?;
    for i in 0..grid.nu {
        sweep(&mut frames, &|j| grid.node(i, j), j0, grid.nv, 1)?;
    }
    let frames: Vec<DMatrix<f64>> = frames.into_iter().map(|f| f.unwrap()).collect();
    let mut hol: f64 = 0.0;
    let mut hol_cell = 0;
    for j in 0..grid.nv - 1 {
        for i in 0..grid.nu - 1 {
            let a = grid.node(i, j);
            let (b, c, d) = (grid.node(i + 1, j), grid.node(i + 1, j + 1), grid.node(i, j + 1));
            let p1 = step(a, b, 0)? * step(b, c, 1)?;
            let p2 = step(a, d, 1)? * step(d, c, 0)?;
            let h = (p1 - p2).amax();
            if h > hol {
                hol = h;
                hol_cell = a;
            }
        }
    }
    let area = hu * hv;
    if hol / area > params.holonomy_bound {
        return Err(GeomError::HolonomyTooLarge { cell: hol_cell, value: hol / area, bound: params.holonomy_bound });
    }
    let mut ortho: f64 = 0.0;
    let jets = frames
        .iter()
        .zip(&steps)
        .map(|(f, s)| {
            let lin = f.view((0, 0), (m, m));
            ortho = ortho.max((lin.transpose() * lin - DMatrix::identity(m, m)).amax());
            let x = s.anchor.transform(f);
            VJet::from_matrix(x.order(), x.matrix().rows(0, m).into_owned())
        })
        .collect();
    let chart_out = Chart { ambient: chart.ambient, grid, jets, source: ChartSource::Integrated }.finalize()?;
    let field = FrameField {
        frames: frames.iter().map(|f| f.view((0, 0), (m, m)).into_owned()).collect(),
        anchor: chart_out.jets[base].value(),
        holonomy: hol / area,
        holonomy_cell: hol_cell,
        holonomy_raw: hol,
        orthogonality: ortho,
    };
    Ok(Family { ell: mc.ell, theta: mc.theta, chart: chart_out, field, mc: mc.clone() })
}

/// G_ℓ member at angle θ with default integration settings.
pub fn family_member(an: &Analysis, ell: usize, theta: f64) -> Result<Family> {
    let cs = an.elliptic()?;
    let mc = modified_connection(&an.flag, &an.tensors, cs, ell, theta, an.params.tol_circle)?;
    integrate_family(an, &mc, &FamilyParams::default())
}

/// ℓ = 0 member: the classical associated family of a minimal surface.
pub fn standard_minimal_family(an: &Analysis, theta: f64) -> Result<Family> {
    let cs = an.elliptic()?;
    let defect = cs.orth_defect.iter().map(|d| d[0]).fold(0.0, f64::max);
    if defect > an.params.tol_circle {
        return Err(GeomError::NotMinimal { defect });
    }
    family_member(an, 0, theta)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FamilyVerdict {
    pub metric: f64,
    /// `(s, ‖α^s_θ − φ_θ α^s‖ / ‖α^s‖)` for 2 ≤ s ≤ ℓ+1.
    pub preserved: Vec<(usize, f64)>,
    /// `(s, ‖α^s_θ − φ_θ α^s(J_θ ·, …)‖ / ‖α^s‖)` for s ≥ ℓ+2.
    pub rotated: Vec<(usize, f64)>,
    pub normal_curvature: f64,
    pub holonomy: f64,
}

impl FamilyVerdict {
    pub fn max(&self) -> f64 {
        self.preserved
            .iter()
            .chain(&self.rotated)
            .map(|x| x.1)
            .fold(self.metric.max(self.normal_curvature), f64::max)
    }
}

/// Ambient form E_N R^⊥ E_Nᵀ of the normal curvature at every node.
fn ambient_normal_curvature(flag: &NormalFlag, tensors: &FrenetTensors) -> Vec<DMatrix<f64>> {
    let nr = tensors.layout.normal();
    tensors
        .omega
        .iter()
        .enumerate()
        .map(|(node, om)| {
            let restrict = |x: &MJet| {
                let mut out = MJet::zero(nr.len(), nr.len(), x.order());
                for (c, src) in out.coeffs_mut().iter_mut().zip(x.coeffs()) {
                    *c = src.view((nr.start, nr.start), (nr.len(), nr.len())).into_owned();
                }
                out
            };
            let r = curvature_value(&[restrict(&om[0]), restrict(&om[1])]);
            let e = flag.frames[node].columns(nr.start, nr.len());
            &e * r * e.transpose()
        })
        .collect()
}

/// Compares g_θ with g through φ_θ = F_θ Eᵀ.
pub fn verify_family(base: &Analysis, fam: &Family) -> Result<FamilyVerdict> {
    if fam.chart.grid != base.chart.grid {
        return Err(GeomError::GridMismatch);
    }
    let other = Analysis::run(fam.chart.clone(), &base.params)?;
    if other.flag.dims != base.flag.dims {
        return Err(GeomError::FlagMismatch { left: base.flag.dims.clone(), right: other.flag.dims.clone() });
    }
    let cs = base.elliptic()?;
    let (ell, theta) = (fam.ell, fam.theta);
    let top = base.forms.max_order;
    let mut v = FamilyVerdict { holonomy: fam.field.holonomy, ..Default::default() };
    let mut pres = vec![0.0f64; top + 1];
    let kb = ambient_normal_curvature(&base.flag, &base.tensors);
    let kt = ambient_normal_curvature(&other.flag, &other.tensors);
    let kscale = kb.iter().map(op_norm).fold(0.0, f64::max);
    for node in 0..base.chart.jets.len() {
        let phi = &fam.field.frames[node] * base.flag.frames[node].transpose();
        let a1 = base.forms.flat(node, 1);
        let b1 = other.forms.flat(node, 1);
        let (ga, gb) = (a1.transpose() * a1, b1.transpose() * b1);
        v.metric = v.metric.max((gb - &ga).amax() / ga.amax());
        let j = crate::linalg::to_dmatrix2(&cs.j[node]);
        let jt = DMatrix::identity(2, 2) * theta.cos() + j * theta.sin();
        let jt = nalgebra::Matrix2::from_fn(|r, c| jt[(r, c)]);
        for s in 2..=top {
            let a = base.forms.flat(node, s);
            let b = other.forms.flat(node, s);
            let target = if s <= ell + 1 { a.clone() } else { rotate_slot(a, &jt) };
            let r = (b - &phi * target).norm() / a.norm().max(1e-300);
            pres[s] = pres[s].max(r);
        }
        let d = &kt[node] - &phi * &kb[node] * phi.transpose();
        v.normal_curvature = v.normal_curvature.max(op_norm(&d) / if kscale > 0.0 { kscale } else { 1.0 });
    }
    for (s, r) in pres.into_iter().enumerate().skip(2) {
        if s <= ell + 1 {
            v.preserved.push((s, r));
        } else {
            v.rotated.push((s, r));
        }
    }
    Ok(v)
}

/// Monomial table of α^s(Jθ X_1, X_2, …) from that of α^s.
fn rotate_slot(a: &DMatrix<f64>, j: &nalgebra::Matrix2<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let mut b = DMatrix::zeros(a.nrows(), n);
    for col in 0..n {
        let c = if col + 1 < n {
            a.column(col) * j[(0, 0)] + a.column(col + 1) * j[(1, 0)]
        } else {
            a.column(col - 1) * j[(0, 1)] + a.column(col) * j[(1, 1)]
        };
        b.set_column(col, &c);
    }
    b
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceResult {
    /// Orthogonal part Q of the best map x ↦ Qx + t taking `a` to `b`.
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    pub determinant: f64,
    /// RMS point distance after alignment.
    pub residual: f64,
}

/// Orthogonal Procrustes over the full orthogonal group.
pub fn congruence_test(a: &Chart, b: &Chart) -> Result<CongruenceResult> {
    if a.grid != b.grid || a.ambient != b.ambient {
        return Err(GeomError::GridMismatch);
    }
    Ok(align_points(&a.positions(), &b.positions(), a.ambient.kind == AmbientKind::Euclidean))
}

/// Best x ↦ Qx + t (t = 0 unless `translate`) taking `pa` to `pb` pointwise.
pub fn align_points(pa: &[DVector<f64>], pb: &[DVector<f64>], translate: bool) -> CongruenceResult {
    let m = pa[0].len();
    let npts = pa.len() as f64;
    let (ca, cb) = if translate {
        (pa.iter().sum::<DVector<f64>>() / npts, pb.iter().sum::<DVector<f64>>() / npts)
    } else {
        (DVector::zeros(m), DVector::zeros(m))
    };
    let mut h = DMatrix::zeros(m, m);
    for (x, y) in pa.iter().zip(pb) {
        h += (y - &cb) * (x - &ca).transpose();
    }
    let svd = h.svd(true, true);
    let q = svd.u.unwrap() * svd.v_t.unwrap();
    let t = &cb - &q * &ca;
    let ss: f64 = pa.iter().zip(pb).map(|(x, y)| (&q * x + &t - y).norm_squared()).sum();
    CongruenceResult {
        rotation: (0..m).map(|i| q.row(i).iter().copied().collect()).collect(),
        translation: t.iter().copied().collect(),
        determinant: q.determinant(),
        residual: (ss / npts).sqrt(),
    }
}

/// Congruence of the G_ℓ and G_{ℓ+r} members at the same angle.
pub fn relation_test(an: &Analysis, ell: usize, r: usize, theta: f64) -> Result<CongruenceResult> {
    let a = family_member(an, ell, theta)?;
    let b = family_member(an, ell + r, theta)?;
    congruence_test(&a.chart, &b.chart)
}
