//! Osculating flag, higher fundamental forms and Frenet blocks.
//!
//! Frames are built by Gram–Schmidt on jets of derivative vectors. Each
//! node stores the constant combinations of derivatives that generate its
//! blocks: monomial pairs where they are well conditioned, otherwise the
//! combination reproducing the neighbouring frame, which keeps frame values
//! continuous across the grid.

use crate::ambient::{AmbientKind, Chart, GridParams};
use crate::error::{GeomError, Result};
use crate::jet::{MJet, VJet};
use crate::linalg::{complete_basis, svd_sorted};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Column layout of a flag frame in flat coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlagLayout {
    pub flat_dim: usize,
    /// Column of the position vector (Sphere only).
    pub position: Option<usize>,
    /// `(start, len)` of N_0, …, N_τ.
    pub blocks: Vec<(usize, usize)>,
    /// `(start, len)` of the part of flat space the surface does not reach.
    pub complement: (usize, usize),
}

impl FlagLayout {
    pub fn block(&self, s: usize) -> std::ops::Range<usize> {
        let (a, n) = self.blocks[s];
        a..a + n
    }

    /// All normal columns N_1..N_τ.
    pub fn normal(&self) -> std::ops::Range<usize> {
        let start = self.blocks.get(1).map(|b| b.0).unwrap_or(self.complement.0);
        let (a, n) = *self.blocks.last().unwrap();
        start..a + n
    }
}

#[derive(Clone, Debug)]
struct Plan {
    /// Per derivative order k ≥ 1: coefficient combinations of the k+1 monomials.
    combos: Vec<DMatrix<f64>>,
    /// Constant vectors spanning the complement at the base node.
    complement: DMatrix<f64>,
    /// Whether block s uses the monomial pair ∂u^k, ∂u^{k-1}∂v.
    monomial: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct NormalFlag {
    pub layout: FlagLayout,
    pub dims: Vec<usize>,
    pub tau: usize,
    pub tau_o: usize,
    /// Dimension of the smallest totally geodesic space form containing the surface.
    pub substantial_dim: usize,
    pub rank_tol: f64,
    /// Per-node frame values, columns in layout order.
    pub frames: Vec<DMatrix<f64>>,
    /// Max deviation of the frame Gram matrix from the identity.
    pub orthogonality_residual: f64,
    plan: Plan,
    /// Generator combinations per node and block.
    combos: Vec<Vec<DMatrix<f64>>>,
}

fn monomials(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=k).map(move |b| (k - b, b))
}

/// Rank of a column set after removing its component along `basis`.
fn projected_svd(cols: &DMatrix<f64>, basis: &DMatrix<f64>) -> (crate::linalg::SortedSvd, f64) {
    let mut w = cols.clone();
    if basis.ncols() > 0 {
        for _ in 0..2 {
            let p = basis.transpose() * &w;
            w -= basis * p;
        }
    }
    let raw = svd_sorted(cols).s.first().copied().unwrap_or(0.0);
    (svd_sorted(&w), raw)
}

fn derivative_block(values: &[Vec<DVector<f64>>], k: usize) -> DMatrix<f64> {
    DMatrix::from_columns(&values[k])
}

/// Values of all partials `∂^β g` with |β| ≤ kmax, grouped by order.
fn derivative_values(jet: &VJet, kmax: usize) -> Vec<Vec<DVector<f64>>> {
    (0..=kmax).map(|k| monomials(k).map(|(a, b)| jet.partial(a, b)).collect()).collect()
}

/// Flag dimensions at one node from values only.
fn detect_dims(jet: &VJet, kind: AmbientKind, rank_tol: f64) -> (Vec<usize>, bool, Vec<crate::linalg::SortedSvd>) {
    let m = jet.dim();
    let kmax = jet.order();
    let vals = derivative_values(jet, kmax);
    let mut basis = DMatrix::<f64>::zeros(m, 0);
    if kind == AmbientKind::Sphere {
        basis = DMatrix::from_columns(&[jet.value().normalize()]);
    }
    let mut dims = Vec::new();
    let mut svds = Vec::new();
    let mut complete = false;
    for k in 1..=kmax {
        if basis.ncols() == m {
            complete = true;
            break;
        }
        let w = derivative_block(&vals, k);
        let (svd, raw) = projected_svd(&w, &basis);
        let r = svd.s.iter().filter(|&&s| s > rank_tol * raw).count().min(m - basis.ncols());
        if r == 0 {
            complete = true;
            break;
        }
        dims.push(r);
        let mut nb = DMatrix::zeros(m, basis.ncols() + r);
        nb.columns_mut(0, basis.ncols()).copy_from(&basis);
        nb.columns_mut(basis.ncols(), r).copy_from(&svd.u.columns(0, r));
        basis = nb;
        svds.push(svd);
    }
    if basis.ncols() == m {
        complete = true;
    }
    (dims, complete, svds)
}

/// Gram–Schmidt of the generator combinations on jets of order `q`
/// (order 0 gives the frame values).
fn frame_jets(jet: &VJet, kind: AmbientKind, dims: &[usize], combos: &[DMatrix<f64>], complement: &DMatrix<f64>, q: usize) -> Result<Vec<VJet>> {
    let m = jet.dim();
    let mut cols: Vec<VJet> = Vec::with_capacity(m);
    if kind == AmbientKind::Sphere {
        cols.push(jet.truncate(q).normalized());
    }
    let push = |cols: &mut Vec<VJet>, mut w: VJet, scale: f64| -> Result<()> {
        for _ in 0..2 {
            for e in cols.iter() {
                let c = w.dot(e);
                w = w.sub(&e.mul_scalar(&c));
            }
        }
        let n = w.value().norm();
        if !(n > 1e-9 * scale) {
            return Err(GeomError::PreconditionFailed("frame generator degenerates away from the base node".into()));
        }
        cols.push(w.normalized());
        Ok(())
    };
    for (s, &r) in dims.iter().enumerate() {
        let k = s + 1;
        let derivs: Vec<VJet> = monomials(k).map(|(a, b)| jet.derivs(a, b).truncate(q)).collect();
        let scale = derivs.iter().map(|d| d.value().norm()).fold(0.0, f64::max);
        let combo = &combos[s];
        for c in 0..r {
            let mut g = VJet::zero(m, q);
            for (i, d) in derivs.iter().enumerate() {
                let w = combo[(i, c)];
                if w != 0.0 {
                    g = g.add(&d.scale(w));
                }
            }
            push(&mut cols, g, scale)?;
        }
    }
    for c in 0..complement.ncols() {
        let e = VJet::constant(&complement.column(c).into_owned(), q);
        push(&mut cols, e, 1.0)?;
    }
    Ok(cols)
}

fn make_plan(jet: &VJet, kind: AmbientKind, dims: &[usize], svds: &[crate::linalg::SortedSvd]) -> Result<Plan> {
    let m = jet.dim();
    let mut combos = Vec::new();
    let mut monomial = Vec::new();
    for (s, &r) in dims.iter().enumerate() {
        let k = s + 1;
        let svd = &svds[s];
        let mut combo = DMatrix::zeros(k + 1, r);
        if r == 2 && s > 0 {
            // Prefer the monomials ∂u^k, ∂u^{k-1}∂v: for elliptic surfaces the
            // resulting basis is oriented like (ξ, J_s ξ).
            combo[(0, 0)] = 1.0;
            combo[(1, 1)] = 1.0;
            // Conditioning of the chosen pair inside the projected span.
            let pair = DMatrix::from_fn(r, 2, |i, j| svd.s[i] * svd.v[(j, i)]);
            let sv = pair.singular_values();
            if sv.min() < PAIR_CONDITION * sv.max().max(1e-300) {
                combo = svd.v.columns(0, r).into_owned();
            }
        } else if s == 0 {
            combo[(0, 0)] = 1.0;
            combo[(1, 1)] = 1.0;
        } else {
            combo = svd.v.columns(0, r).into_owned();
            for c in 0..r {
                let col = combo.column(c);
                let imax = col.iamax();
                if col[imax] < 0.0 {
                    combo.column_mut(c).neg_mut();
                }
            }
        }
        monomial.push(r == 2 && combo.nrows() > 2 && combo[(0, 0)] == 1.0 && combo[(1, 1)] == 1.0 && combo[(1, 0)] == 0.0);
        combos.push(combo);
    }
    let used: usize = dims.iter().sum::<usize>() + usize::from(kind == AmbientKind::Sphere);
    let complement = if used < m {
        let cols = frame_jets(&jet.truncate(dims.len()), kind, dims, &combos, &DMatrix::zeros(m, 0), 0)?;
        let q = DMatrix::from_columns(&cols.iter().map(|c| c.value()).collect::<Vec<_>>());
        complete_basis(&q, m)
    } else {
        DMatrix::zeros(m, 0)
    };
    Ok(Plan { combos, complement, monomial })
}

const PAIR_CONDITION: f64 = 1e-3;

/// Nodes in sweep order (base row outwards, then columns outwards), each
/// with the already visited neighbour it continues from.
pub fn sweep_order(grid: &GridParams) -> Vec<(usize, Option<usize>)> {
    let (i0, j0) = grid.base_ij();
    let mut out = vec![(grid.node(i0, j0), None)];
    for i in i0 + 1..grid.nu {
        out.push((grid.node(i, j0), Some(grid.node(i - 1, j0))));
    }
    for i in (0..i0).rev() {
        out.push((grid.node(i, j0), Some(grid.node(i + 1, j0))));
    }
    for i in 0..grid.nu {
        for j in j0 + 1..grid.nv {
            out.push((grid.node(i, j), Some(grid.node(i, j - 1))));
        }
        for j in (0..j0).rev() {
            out.push((grid.node(i, j), Some(grid.node(i, j + 1))));
        }
    }
    out
}

/// Generator combinations at a node, continuing the frame of a neighbour.
fn node_combos(jet: &VJet, kind: AmbientKind, dims: &[usize], plan: &Plan, parent: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let m = jet.dim();
    let mut basis = DMatrix::<f64>::zeros(m, 0);
    let mut col = 0;
    if kind == AmbientKind::Sphere {
        basis = DMatrix::from_columns(&[jet.value().normalize()]);
        col = 1;
    }
    let mut out = Vec::with_capacity(dims.len());
    for (s, &r) in dims.iter().enumerate() {
        let k = s + 1;
        let d = DMatrix::from_columns(&monomials(k).map(|(a, b)| jet.partial(a, b)).collect::<Vec<_>>());
        let mut w = d.clone();
        for _ in 0..2 {
            let p = basis.transpose() * &w;
            w -= &basis * p;
        }
        let combo = if s == 0 {
            plan.combos[0].clone()
        } else {
            let pair_ok = plan.monomial[s] && {
                let sv = w.columns(0, 2).into_owned().singular_values();
                sv.min() >= PAIR_CONDITION * sv.max()
            };
            if pair_ok {
                plan.combos[s].clone()
            } else {
                // c = W⁺ B: reproduces the projection of the neighbour's block.
                let svd = svd_sorted(&w);
                let target = parent.columns(col, r);
                let ut = svd.u.columns(0, r).transpose() * target;
                let sinv = DMatrix::from_fn(r, r, |i, j| if i == j { 1.0 / svd.s[i] } else { 0.0 });
                svd.v.columns(0, r) * sinv * ut
            }
        };
        // Block values at this node, orthonormalized in generator order.
        let vals = &w * &combo;
        let mut nb = DMatrix::zeros(m, basis.ncols() + r);
        nb.columns_mut(0, basis.ncols()).copy_from(&basis);
        for c in 0..r {
            let mut x = vals.column(c).into_owned();
            for _ in 0..2 {
                let p = nb.columns(0, basis.ncols() + c).transpose() * &x;
                x -= nb.columns(0, basis.ncols() + c) * p;
            }
            nb.set_column(basis.ncols() + c, &x.normalize());
        }
        basis = nb;
        col += r;
        out.push(combo);
    }
    out
}

/// Builds the osculating flag with frames at every node.
pub fn build_flag(chart: &Chart, rank_tol: f64) -> Result<NormalFlag> {
    let kind = chart.ambient.kind;
    let m = chart.ambient.flat_dim;
    let base = chart.grid.base();
    let order = chart.order();
    let (dims, complete, svds) = detect_dims(&chart.jets[base], kind, rank_tol);
    if dims.first() != Some(&2) {
        return Err(GeomError::RankDeficient { node: base });
    }
    let tau = dims.len() - 1;
    if !complete {
        return Err(GeomError::JetOrderTooLow { order, needed: order + 1 });
    }
    if order < tau + 2 {
        return Err(GeomError::JetOrderTooLow { order, needed: tau + 2 });
    }
    let plan = make_plan(&chart.jets[base], kind, &dims, &svds)?;
    let mut frames = vec![DMatrix::zeros(0, 0); chart.jets.len()];
    let mut combos = vec![Vec::new(); chart.jets.len()];
    let mut ortho: f64 = 0.0;
    for (node, parent) in sweep_order(&chart.grid) {
        let jet = &chart.jets[node];
        let local = jet.truncate(tau + 2);
        let (d, _, _) = detect_dims(&local, kind, rank_tol);
        if d != dims {
            return Err(GeomError::NotRegular { node, expected: dims.clone(), found: d });
        }
        let c = match parent {
            None => plan.combos.clone(),
            Some(p) => node_combos(jet, kind, &dims, &plan, &frames[p]),
        };
        let cols = frame_jets(jet, kind, &dims, &c, &plan.complement, 0)?;
        let f = DMatrix::from_columns(&cols.iter().map(|c| c.value()).collect::<Vec<_>>());
        ortho = ortho.max((f.transpose() * &f - DMatrix::identity(m, m)).amax());
        frames[node] = f;
        combos[node] = c;
    }
    let mut blocks = Vec::new();
    let mut start = usize::from(kind == AmbientKind::Sphere);
    for &d in &dims {
        blocks.push((start, d));
        start += d;
    }
    let layout = FlagLayout {
        flat_dim: m,
        position: (kind == AmbientKind::Sphere).then_some(0),
        blocks,
        complement: (start, m - start),
    };
    let tau_o = if dims[tau] == 2 { tau } else { tau.saturating_sub(1) };
    let substantial_dim = dims.iter().sum();
    Ok(NormalFlag { layout, dims, tau, tau_o, substantial_dim, rank_tol, frames, orthogonality_residual: ortho, plan, combos })
}

impl NormalFlag {
    /// Jet order of frames built from a chart of order `k`.
    pub fn frame_order(&self, chart_order: usize) -> usize {
        chart_order - self.tau - 1
    }

    /// Frame jets at a node, columns in layout order.
    pub fn frame_jets(&self, chart: &Chart, node: usize) -> Result<Vec<VJet>> {
        let q = self.frame_order(chart.jets[node].order());
        frame_jets(&chart.jets[node], chart.ambient.kind, &self.dims, &self.combos[node], &self.plan.complement, q)
    }

    pub fn frame_mjet(&self, chart: &Chart, node: usize) -> Result<MJet> {
        let cols = self.frame_jets(chart, node)?;
        let refs: Vec<&VJet> = cols.iter().collect();
        Ok(MJet::from_columns(&refs))
    }

    /// Basis of N_s at a node as flat vectors.
    pub fn basis(&self, node: usize, s: usize) -> DMatrix<f64> {
        let r = self.layout.block(s);
        self.frames[node].columns(r.start, r.len()).into_owned()
    }
}

/// Values of α^s on the monomials ∂u^{s-b}∂v^b, b = 0..s.
#[derive(Clone, Debug)]
pub struct HigherFormTable {
    /// `forms[node][s-1]`: flat vectors as columns, s = 1..=τ+1 (α^1 = g_*).
    pub flat: Vec<Vec<DMatrix<f64>>>,
    /// Same values in the orthonormal basis of N_{s-1}.
    pub coords: Vec<Vec<DMatrix<f64>>>,
    pub max_order: usize,
    pub drift: f64,
}

impl HigherFormTable {
    pub fn flat(&self, node: usize, s: usize) -> &DMatrix<f64> {
        &self.flat[node][s - 1]
    }

    pub fn coords(&self, node: usize, s: usize) -> &DMatrix<f64> {
        &self.coords[node][s - 1]
    }

    /// α^s(X_1, …, X_s) for coordinate vectors X_i, by multilinear expansion.
    pub fn eval(&self, node: usize, args: &[[f64; 2]]) -> DVector<f64> {
        multilinear(self.flat(node, args.len()), args)
    }
}

/// Evaluates a symmetric s-linear map stored on monomials at the given arguments.
pub fn multilinear(table: &DMatrix<f64>, args: &[[f64; 2]]) -> DVector<f64> {
    let s = args.len();
    let mut out = DVector::zeros(table.nrows());
    // Expand over choices of ∂u/∂v in each slot; the monomial index is the v-count.
    for mask in 0..(1usize << s) {
        let mut w = 1.0;
        let mut b = 0;
        for (i, x) in args.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w *= x[1];
                b += 1;
            } else {
                w *= x[0];
            }
        }
        if w != 0.0 {
            out.axpy(w, &table.column(b), 1.0);
        }
    }
    out
}

pub fn higher_forms(chart: &Chart, flag: &NormalFlag) -> Result<HigherFormTable> {
    let max_order = flag.tau + 1;
    let lay = &flag.layout;
    let mut flat = Vec::with_capacity(chart.jets.len());
    let mut coords = Vec::with_capacity(chart.jets.len());
    let mut drift: f64 = 0.0;
    for (node, jet) in chart.jets.iter().enumerate() {
        let e = &flag.frames[node];
        let mut fl = Vec::new();
        let mut co = Vec::new();
        for s in 1..=max_order {
            let target = lay.block(s - 1);
            let mut f = DMatrix::zeros(lay.flat_dim, s + 1);
            let mut c = DMatrix::zeros(target.len(), s + 1);
            for (col, (a, b)) in monomials(s).enumerate() {
                let d = jet.partial(a, b);
                let mut x = e.transpose() * &d;
                // Remove position and all lower blocks.
                if let Some(p) = lay.position {
                    x[p] = 0.0;
                }
                for t in 0..s - 1 {
                    for i in lay.block(t) {
                        x[i] = 0.0;
                    }
                }
                let outside: f64 = (target.end..lay.flat_dim).map(|i| x[i] * x[i]).sum::<f64>().sqrt();
                let scale = d.norm().max(1e-300);
                drift = drift.max(outside / scale);
                for (r, i) in target.clone().enumerate() {
                    c[(r, col)] = x[i];
                }
                f.set_column(col, &(e.columns(target.start, target.len()) * c.column(col)));
            }
            fl.push(f);
            co.push(c);
        }
        flat.push(fl);
        coords.push(co);
    }
    // Values must stay in their bundle up to the rank tolerance.
    if drift > flag.rank_tol.max(1e-8) {
        return Err(GeomError::ProjectionDrift { order: max_order, residual: drift });
    }
    Ok(HigherFormTable { flat, coords, max_order, drift })
}

/// Connection forms Ω_X = Eᵀ ∂_X E of the flag frame as jets, plus the
/// translation part Eᵀ ∂_X g.
#[derive(Clone, Debug)]
pub struct FrenetTensors {
    pub layout: FlagLayout,
    /// `omega[node][axis]`, axis 0 = ∂u, 1 = ∂v.
    pub omega: Vec<[MJet; 2]>,
    /// Frame coordinates of ∂_X g as jets.
    pub translation: Vec<[VJet; 2]>,
    pub report: FrenetReport,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FrenetReport {
    /// Duality residual between lowering and raising blocks.
    pub second: f64,
    /// |S^s α^{s+1} − α^{s+2}| relative to |α^{s+2}|.
    pub raising_consistency: f64,
    /// Largest coefficient outside the tridiagonal Frenet pattern.
    pub reconstruction: f64,
    /// Max |D + Dᵀ| over diagonal blocks.
    pub metric_compatibility: f64,
}

impl FrenetTensors {
    /// Value of block (t, s) of Ω_axis at a node (maps N_s → N_t).
    pub fn block(&self, node: usize, axis: usize, t: usize, s: usize) -> DMatrix<f64> {
        let (rt, rs) = (self.layout.block(t), self.layout.block(s));
        self.omega[node][axis].value().view((rt.start, rs.start), (rt.len(), rs.len())).into_owned()
    }

    /// S^s_X : N_s → N_{s+1}.
    pub fn raise(&self, node: usize, axis: usize, s: usize) -> DMatrix<f64> {
        self.block(node, axis, s + 1, s)
    }

    /// D^s_X on N_s.
    pub fn conn(&self, node: usize, axis: usize, s: usize) -> DMatrix<f64> {
        self.block(node, axis, s, s)
    }

    /// Matrix of ξ ↦ A^s_ξ X as a map N_s → N_{s-1}, i.e. minus block (s−1, s).
    pub fn lower(&self, node: usize, axis: usize, s: usize) -> DMatrix<f64> {
        -self.block(node, axis, s - 1, s)
    }

    pub fn order(&self) -> usize {
        self.omega.iter().map(|o| o[0].order()).min().unwrap_or(0)
    }
}

/// Connection forms of a frame given as an MJet (columns = frame vectors).
pub fn connection_forms(e: &MJet) -> [MJet; 2] {
    let et = e.map(|m| m.transpose());
    [et.mul(&e.deriv(0)), et.mul(&e.deriv(1))]
}

pub fn frenet_tensors(chart: &Chart, flag: &NormalFlag, forms: &HigherFormTable) -> Result<FrenetTensors> {
    let lay = flag.layout.clone();
    let tau = flag.tau;
    let mut omega = Vec::with_capacity(chart.jets.len());
    let mut translation = Vec::with_capacity(chart.jets.len());
    let mut rep = FrenetReport::default();
    for node in 0..chart.jets.len() {
        let e = flag.frame_mjet(chart, node)?;
        let q = e.order();
        let et = e.map(|m| m.transpose());
        let om = connection_forms(&e);
        let jet = &chart.jets[node];
        let tr = [0, 1].map(|axis| {
            let d = jet.deriv(axis).truncate(q);
            let m = et.mul(&MJet::from_columns(&[&d]));
            m.column(0)
        });
        // Diagnostics on values.
        for (axis, o) in om.iter().enumerate() {
            let v = o.value();
            rep.metric_compatibility = rep.metric_compatibility.max((v + v.transpose()).amax());
            for s in 1..=tau {
                let up = v.view((lay.block(s).start, lay.block(s - 1).start), (lay.blocks[s].1, lay.blocks[s - 1].1));
                let down = v.view((lay.block(s - 1).start, lay.block(s).start), (lay.blocks[s - 1].1, lay.blocks[s].1));
                rep.second = rep.second.max((down + up.transpose()).amax());
            }
            // Frenet pattern: block (t, s) vanishes for |t − s| ≥ 2, position couples to N_0 only.
            for s in 0..=tau {
                for t in 0..=tau {
                    if t.abs_diff(s) >= 2 {
                        let b = v.view((lay.block(t).start, lay.block(s).start), (lay.blocks[t].1, lay.blocks[s].1));
                        rep.reconstruction = rep.reconstruction.max(b.amax());
                    }
                }
                if let Some(p) = lay.position {
                    if s >= 1 {
                        for i in lay.block(s) {
                            rep.reconstruction = rep.reconstruction.max(v[(i, p)].abs());
                        }
                    }
                }
                let (cs, cn) = lay.complement;
                if cn > 0 {
                    let b = v.view((cs, lay.block(s).start), (cn, lay.blocks[s].1));
                    rep.reconstruction = rep.reconstruction.max(b.amax());
                }
            }
            // S^s α^{s+1}(…) = α^{s+2}(X, …)
            let x = if axis == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
            for s in 0..tau {
                let a1 = forms.coords(node, s + 1);
                let a2 = forms.coords(node, s + 2);
                let raise = v.view((lay.block(s + 1).start, lay.block(s).start), (lay.blocks[s + 1].1, lay.blocks[s].1));
                let scale = a2.norm().max(1e-300);
                for b in 0..=s + 1 {
                    let lhs = raise * a1.column(b);
                    // X inserted into monomial (s+1-b, b) gives monomial index b + x[1]
                    let rhs = a2.column(b + usize::from(x[1] == 1.0));
                    rep.raising_consistency = rep.raising_consistency.max((lhs - rhs).norm() / scale);
                }
            }
        }
        omega.push(om);
        translation.push(tr);
    }
    Ok(FrenetTensors { layout: lay, omega, translation, report: rep })
}
