//! Polar surfaces: the spherical image of the last unit normal when that
//! bundle is a line, and an integrated surface tangent to the last normal
//! plane otherwise.

use crate::ambient::{chart_from_samples, AmbientSpace, Chart, ChartSource};
use crate::analysis::Analysis;
use crate::elliptic::ellipticity_at;
use crate::error::{GeomError, Result};
use crate::flag::sweep_order;
use crate::jet::VJet;
use crate::linalg::svd_sorted;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarKind {
    OddSphericalNormal,
    EvenIntegrated,
}

#[derive(Clone, Debug)]
pub struct PolarSurface {
    pub kind: PolarKind,
    pub chart: Chart,
    /// Max relative component of dh outside the expected bundle.
    pub span_residual: f64,
    /// RMS of the discrete loop sums of dh over grid cells (even case).
    pub closedness_rms: f64,
    /// Same, divided by the cell area.
    pub closedness_per_area: f64,
    pub elliptic: bool,
    pub ellipticity_residual: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PolarParams {
    /// Weight of the smoothness term in the even-case least squares.
    pub smoothing: f64,
    /// Bound on the closedness residual per unit area.
    pub tol: f64,
    pub stencil_order: usize,
}

impl Default for PolarParams {
    fn default() -> Self {
        PolarParams { smoothing: 1e-10, tol: 1e-4, stencil_order: 4 }
    }
}

pub fn polar_surface(an: &Analysis, params: &PolarParams) -> Result<PolarSurface> {
    an.elliptic()?;
    let last = *an.flag.dims.last().unwrap();
    if an.flag.layout.complement.1 > 0 {
        return Err(GeomError::PreconditionFailed("surface is not substantial in its ambient space".into()));
    }
    if last == 1 {
        odd_polar(an)
    } else {
        even_polar(an, params)
    }
}

/// Requires the last normal bundle to be a line.
pub fn odd_polar(an: &Analysis) -> Result<PolarSurface> {
    let flag = &an.flag;
    if *flag.dims.last().unwrap() != 1 {
        return Err(GeomError::BranchMismatch { expected: "odd" });
    }
    let tau = flag.tau;
    let col = flag.layout.block(tau).start;
    let mut jets = Vec::with_capacity(an.chart.jets.len());
    let mut span: f64 = 0.0;
    for node in 0..an.chart.jets.len() {
        let cols = flag.frame_jets(&an.chart, node)?;
        let h = cols[col].clone();
        let e = flag.basis(node, tau - 1);
        for axis in 0..2 {
            let d = h.deriv(axis).value();
            let off = &d - &e * (e.transpose() * &d);
            span = span.max(off.norm() / d.norm().max(1e-300));
        }
        jets.push(h);
    }
    let chart = Chart {
        ambient: AmbientSpace::sphere(an.chart.ambient.flat_dim),
        grid: an.chart.grid,
        jets,
        source: ChartSource::Integrated,
    }
    .finalize()?;
    let (elliptic, res) = check_elliptic(&chart, an.params.rank_tol);
    Ok(PolarSurface {
        kind: PolarKind::OddSphericalNormal,
        chart,
        span_residual: span,
        closedness_rms: 0.0,
        closedness_per_area: 0.0,
        elliptic,
        ellipticity_residual: res,
    })
}

fn check_elliptic(chart: &Chart, rank_tol: f64) -> (bool, f64) {
    let mut res: f64 = 0.0;
    for jet in &chart.jets {
        match ellipticity_at(jet, chart.ambient.kind, rank_tol) {
            Some((_, r)) => res = res.max(r),
            None => return (false, f64::INFINITY),
        }
    }
    (true, res)
}

/// Requires the last normal bundle to be a plane. Solves for dh = e·M with
/// e the frame of N_τ, M constrained pointwise to the kernel of the
/// N_{τ-1} part of d(e·M), and closedness imposed cell by cell.
pub fn even_polar(an: &Analysis, params: &PolarParams) -> Result<PolarSurface> {
    let flag = &an.flag;
    let tau = flag.tau;
    if flag.dims[tau] != 2 || tau == 0 {
        return Err(GeomError::BranchMismatch { expected: "even" });
    }
    let grid = an.chart.grid;
    let m = an.chart.ambient.flat_dim;
    let n = grid.len();
    let (hu, hv) = (grid.hu(), grid.hv());
    let area = hu * hv;
    // Pointwise kernel of  A_u m_v − A_v m_u = 0, unknowns (m_u, m_v).
    let mut kern: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0); n];
    for (node, parent) in sweep_order(&grid) {
        let au = -an.tensors.block(node, 0, tau - 1, tau);
        let av = -an.tensors.block(node, 1, tau - 1, tau);
        let mut c = DMatrix::zeros(2, 4);
        c.view_mut((0, 0), (2, 2)).copy_from(&(-&av));
        c.view_mut((0, 2), (2, 2)).copy_from(&au);
        let svd = svd_sorted(&c);
        let mut k = svd.v.columns(2, 2).into_owned();
        if let Some(p) = parent {
            // Align with the neighbour to keep the kernel basis continuous.
            let r = crate::linalg::orthonormalize(&(k.transpose() * &kern[p]));
            k = &k * r;
        }
        kern[node] = k;
    }
    let base = grid.base();
    let target = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
    let mut c0 = kern[base].transpose() * &target;
    if c0.norm() < 1e-8 {
        c0 = DVector::from_vec(vec![1.0, 0.0]);
    }
    // Unknown layout: 2 per node, base node eliminated.
    let unknown = |node: usize| -> Option<usize> {
        match node.cmp(&base) {
            std::cmp::Ordering::Less => Some(2 * node),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(2 * (node - 1)),
        }
    };
    let nu = 2 * (n - 1);
    let e = |node: usize| flag.basis(node, tau);
    // Per-node M×2 blocks: dh(∂u) = Bu c, dh(∂v) = Bv c.
    let bu: Vec<DMatrix<f64>> = (0..n).map(|k| e(k) * kern[k].rows(0, 2)).collect();
    let bv: Vec<DMatrix<f64>> = (0..n).map(|k| e(k) * kern[k].rows(2, 2)).collect();
    let mut rows: Vec<Vec<(usize, DMatrix<f64>)>> = Vec::new();
    for j in 0..grid.nv - 1 {
        for i in 0..grid.nu - 1 {
            let (a, b) = (grid.node(i, j), grid.node(i + 1, j));
            let (c, d) = (grid.node(i + 1, j + 1), grid.node(i, j + 1));
            let s = 0.5 / area;
            rows.push(vec![
                (a, (&bu[a] * hu - &bv[a] * hv) * s),
                (b, (&bu[b] * hu + &bv[b] * hv) * s),
                (c, (&bv[c] * hv - &bu[c] * hu) * s),
                (d, (-&bu[d] * hu - &bv[d] * hv) * s),
            ]);
        }
    }
    // Normal equations of the loop sums plus smoothing along grid edges.
    let mut coo = CooMatrix::new(nu, nu);
    let mut rhs = DVector::zeros(nu);
    for row in &rows {
        for (na, ba) in row {
            let Some(ia) = unknown(*na) else { continue };
            let bta = ba.transpose();
            for (nb, bb) in row {
                let blk = &bta * bb;
                match unknown(*nb) {
                    Some(ib) => push_block(&mut coo, ia, ib, &blk),
                    None => {
                        let r = -(blk * &c0);
                        rhs[ia] += r[0];
                        rhs[ia + 1] += r[1];
                    }
                }
            }
        }
    }
    let lam = params.smoothing;
    let mut edges = Vec::new();
    for j in 0..grid.nv {
        for i in 0..grid.nu {
            if i + 1 < grid.nu {
                edges.push((grid.node(i, j), grid.node(i + 1, j)));
            }
            if j + 1 < grid.nv {
                edges.push((grid.node(i, j), grid.node(i, j + 1)));
            }
        }
    }
    let eye = DMatrix::identity(2, 2) * lam;
    for (a, b) in edges {
        for (x, y, sign) in [(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)] {
            if let Some(ix) = unknown(x) {
                match unknown(y) {
                    Some(iy) => push_block(&mut coo, ix, iy, &(&eye * sign)),
                    None => {
                        let r = -(&eye * sign) * &c0;
                        rhs[ix] += r[0];
                        rhs[ix + 1] += r[1];
                    }
                }
            }
        }
    }
    let csc = CscMatrix::from(&coo);
    let chol = CscCholesky::factor(&csc).map_err(|_| GeomError::IntegrationFailed { residual: f64::INFINITY, tol: params.tol })?;
    let sol = chol.solve(&rhs);
    let coef = |node: usize| -> DVector<f64> {
        match unknown(node) {
            Some(i) => DVector::from_vec(vec![sol[(i, 0)], sol[(i + 1, 0)]]),
            None => c0.clone(),
        }
    };
    let du: Vec<DVector<f64>> = (0..n).map(|k| &bu[k] * coef(k)).collect();
    let dv: Vec<DVector<f64>> = (0..n).map(|k| &bv[k] * coef(k)).collect();
    // Loop sums.
    let mut ss = 0.0;
    let mut count = 0.0;
    for j in 0..grid.nv - 1 {
        for i in 0..grid.nu - 1 {
            let (a, b) = (grid.node(i, j), grid.node(i + 1, j));
            let (c, d) = (grid.node(i + 1, j + 1), grid.node(i, j + 1));
            let l = (&du[a] + &du[b]) * (hu / 2.0) + (&dv[b] + &dv[c]) * (hv / 2.0)
                - (&du[c] + &du[d]) * (hu / 2.0)
                - (&dv[d] + &dv[a]) * (hv / 2.0);
            ss += l.norm_squared();
            count += 1.0;
        }
    }
    let rms = (ss / count).sqrt();
    if rms / area > params.tol {
        return Err(GeomError::IntegrationFailed { residual: rms / area, tol: params.tol });
    }
    // Trapezoid path integration along the sweep tree.
    let mut h = vec![DVector::zeros(m); n];
    for (node, parent) in sweep_order(&grid) {
        if let Some(p) = parent {
            let (ip, jp) = grid.ij(p);
            let (i, j) = grid.ij(node);
            let step = if jp == j {
                (&du[p] + &du[node]) * ((i as f64 - ip as f64) * hu / 2.0)
            } else {
                (&dv[p] + &dv[node]) * ((j as f64 - jp as f64) * hv / 2.0)
            };
            h[node] = &h[p] + step;
        }
    }
    let chart = chart_from_samples(AmbientSpace::euclidean(m), grid, &h, 2, params.stencil_order)?;
    let mut span: f64 = 0.0;
    for (node, jet) in chart.jets.iter().enumerate() {
        let e = e(node);
        for axis in 0..2 {
            let d = jet.deriv(axis).value();
            span = span.max((&d - &e * (e.transpose() * &d)).norm() / d.norm().max(1e-300));
        }
    }
    let (elliptic, res) = check_elliptic(&chart, an.params.rank_tol);
    Ok(PolarSurface {
        kind: PolarKind::EvenIntegrated,
        chart,
        span_residual: span,
        closedness_rms: rms,
        closedness_per_area: rms / area,
        elliptic,
        ellipticity_residual: res,
    })
}

fn push_block(coo: &mut CooMatrix<f64>, i: usize, j: usize, b: &DMatrix<f64>) {
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            if b[(r, c)] != 0.0 {
                coo.push(i + r, j + c, b[(r, c)]);
            }
        }
    }
}

/// Unit normal of the last line bundle as a jet, for callers that need it directly.
pub fn last_unit_normal(an: &Analysis, node: usize) -> Result<VJet> {
    if *an.flag.dims.last().unwrap() != 1 {
        return Err(GeomError::BranchMismatch { expected: "odd" });
    }
    let col = an.flag.layout.block(an.flag.tau).start;
    Ok(an.flag.frame_jets(&an.chart, node)?.swap_remove(col))
}
