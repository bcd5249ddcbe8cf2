//! Ambient spaces, grids and charts of jets.

use crate::error::{GeomError, Result};
use crate::gallery::SurfaceSpec;
use crate::jet::{exponents, ncoef, Jet, VJet};
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientKind {
    Euclidean,
    Sphere,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AmbientSpace {
    pub kind: AmbientKind,
    pub flat_dim: usize,
}

impl AmbientSpace {
    pub fn euclidean(flat_dim: usize) -> Self {
        AmbientSpace { kind: AmbientKind::Euclidean, flat_dim }
    }

    pub fn sphere(flat_dim: usize) -> Self {
        AmbientSpace { kind: AmbientKind::Sphere, flat_dim }
    }

    /// Curvature tag c.
    pub fn c(&self) -> u8 {
        match self.kind {
            AmbientKind::Euclidean => 0,
            AmbientKind::Sphere => 1,
        }
    }

    /// Dimension N of the space form itself.
    pub fn dim(&self) -> usize {
        self.flat_dim - self.c() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridParams {
    pub nu: usize,
    pub nv: usize,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl GridParams {
    pub fn new(nu: usize, nv: usize, u: (f64, f64), v: (f64, f64)) -> Self {
        GridParams { nu, nv, u0: u.0, u1: u.1, v0: v.0, v1: v.1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 2 || self.nv < 2 || !(self.u1 > self.u0) || !(self.v1 > self.v0) {
            return Err(GeomError::InvalidSpec(format!("bad grid {self:?}")));
        }
        Ok(())
    }

    pub fn hu(&self) -> f64 {
        (self.u1 - self.u0) / (self.nu - 1) as f64
    }

    pub fn hv(&self) -> f64 {
        (self.v1 - self.v0) / (self.nv - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.hu()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.hv()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node index, u fastest.
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * self.nu + i
    }

    pub fn ij(&self, node: usize) -> (usize, usize) {
        (node % self.nu, node / self.nu)
    }

    pub fn coords(&self, node: usize) -> (f64, f64) {
        let (i, j) = self.ij(node);
        (self.u(i), self.v(j))
    }

    /// The node at which frames are anchored.
    pub fn base(&self) -> usize {
        self.node(self.nu / 2, self.nv / 2)
    }

    pub fn base_ij(&self) -> (usize, usize) {
        (self.nu / 2, self.nv / 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ChartSource {
    AnalyticGallery,
    /// Jets from finite differences with the given accuracy order.
    Sampled { stencil_order: usize },
    /// Jets produced by frame integration.
    Integrated,
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub ambient: AmbientSpace,
    pub grid: GridParams,
    pub jets: Vec<VJet>,
    pub source: ChartSource,
}

impl Chart {
    pub fn order(&self) -> usize {
        self.jets.iter().map(|j| j.order()).min().unwrap_or(0)
    }

    pub fn positions(&self) -> Vec<DVector<f64>> {
        self.jets.iter().map(|j| j.value()).collect()
    }

    /// Checks the immersion and sphere constraints, projecting Sphere jets to unit norm.
    pub fn finalize(mut self) -> Result<Chart> {
        if self.ambient.kind == AmbientKind::Sphere {
            for (node, jet) in self.jets.iter_mut().enumerate() {
                let r = jet.value().norm();
                if (r - 1.0).abs() > 1e-6 {
                    return Err(GeomError::SphereViolation { node, residual: r - 1.0 });
                }
                *jet = jet.normalized();
            }
        }
        for (node, jet) in self.jets.iter().enumerate() {
            first_order_rank_check(jet, node)?;
        }
        Ok(self)
    }

    /// Point cloud CSV `u,v,x1..xM`.
    pub fn write_points_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| GeomError::Io(e.to_string()))?;
        let mut header = vec!["u".to_string(), "v".to_string()];
        header.extend((1..=self.ambient.flat_dim).map(|k| format!("x{k}")));
        w.write_record(&header).map_err(|e| GeomError::Io(e.to_string()))?;
        for node in 0..self.grid.len() {
            let (u, v) = self.grid.coords(node);
            let mut rec = vec![fmt_f64(u), fmt_f64(v)];
            rec.extend(self.jets[node].value().iter().map(|x| fmt_f64(*x)));
            w.write_record(&rec).map_err(|e| GeomError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| GeomError::Io(e.to_string()))
    }
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn first_order_rank_check(jet: &VJet, node: usize) -> Result<()> {
    let gu = jet.partial(1, 0);
    let gv = jet.partial(0, 1);
    let m = Matrix2::new(gu.dot(&gu), gu.dot(&gv), gu.dot(&gv), gv.dot(&gv));
    let scale = m.trace().max(1e-300);
    if !(m.determinant() > 1e-20 * scale * scale) {
        return Err(GeomError::RankDeficient { node });
    }
    Ok(())
}

/// Builds a chart from a surface spec.
pub fn evaluate_chart(spec: &SurfaceSpec, grid: &GridParams, order: usize) -> Result<Chart> {
    if order < 3 {
        return Err(GeomError::JetOrderTooLow { order, needed: 3 });
    }
    grid.validate()?;
    spec.chart(grid, order)
}

/// Per-node first fundamental form.
pub fn induced_metric(chart: &Chart) -> Result<Vec<Matrix2<f64>>> {
    chart
        .jets
        .iter()
        .enumerate()
        .map(|(node, jet)| {
            let gu = jet.partial(1, 0);
            let gv = jet.partial(0, 1);
            let m = Matrix2::new(gu.dot(&gu), gu.dot(&gv), gu.dot(&gv), gv.dot(&gv));
            if !(m.determinant() > 1e-20 * m.trace().powi(2)) {
                return Err(GeomError::RankDeficient { node });
            }
            Ok(m)
        })
        .collect()
}

/// First fundamental form as jets `(E, F, G)`.
pub fn metric_jets(jet: &VJet) -> [Jet; 3] {
    let gu = jet.du();
    let gv = jet.dv();
    [gu.norm_sq(), gu.dot(&gv), gv.norm_sq()]
}

/// Finite-difference weights (Fornberg) for derivative `m` at `x0` on nodes `xs`.
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Stencil window of `width` nodes around `i` kept inside `0..n`.
fn window(i: usize, width: usize, n: usize) -> (usize, usize) {
    let w = width.min(n);
    let start = i.saturating_sub(w / 2).min(n - w);
    (start, w)
}

/// Chart from sampled positions with finite-difference jets of accuracy `stencil_order`.
pub fn chart_from_samples(
    ambient: AmbientSpace,
    grid: GridParams,
    values: &[DVector<f64>],
    order: usize,
    stencil_order: usize,
) -> Result<Chart> {
    grid.validate()?;
    if values.len() != grid.len() {
        return Err(GeomError::InvalidSpec(format!(
            "expected {} samples, got {}",
            grid.len(),
            values.len()
        )));
    }
    if order + stencil_order > grid.nu.min(grid.nv) {
        return Err(GeomError::InvalidSpec("grid too small for the requested stencil".into()));
    }
    let m = ambient.flat_dim;
    let us: Vec<f64> = (0..grid.nu).map(|i| grid.u(i)).collect();
    let vs: Vec<f64> = (0..grid.nv).map(|j| grid.v(j)).collect();
    let mut jets = Vec::with_capacity(grid.len());
    for node in 0..grid.len() {
        let (i, j) = grid.ij(node);
        let mut coeffs = DMatrix::zeros(m, ncoef(order));
        for k in 0..ncoef(order) {
            let (a, b) = exponents(k);
            let (si, wi) = window(i, a + stencil_order, grid.nu);
            let (sj, wj) = window(j, b + stencil_order, grid.nv);
            let wu = fd_weights(us[i], &us[si..si + wi], a);
            let wv = fd_weights(vs[j], &vs[sj..sj + wj], b);
            let mut d = DVector::zeros(m);
            for (q, wq) in wv.iter().enumerate() {
                for (p, wp) in wu.iter().enumerate() {
                    d.axpy(wp * wq, &values[grid.node(si + p, sj + q)], 1.0);
                }
            }
            let fact: f64 = (1..=a).product::<usize>() as f64 * (1..=b).product::<usize>() as f64;
            coeffs.set_column(k, &(d / fact));
        }
        jets.push(VJet::from_matrix(order, coeffs));
    }
    Chart { ambient, grid, jets, source: ChartSource::Sampled { stencil_order } }.finalize()
}

/// Reads a sampled chart from CSV `u,v,x1,...,xM` (row-major grid, u fastest or v fastest).
pub fn read_samples_csv(path: &Path, kind: AmbientKind, order: usize, stencil_order: usize) -> Result<Chart> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| GeomError::Io(e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| GeomError::Io(e.to_string()))?;
        let row: std::result::Result<Vec<f64>, _> = rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| GeomError::Io(e.to_string()))?);
    }
    if rows.is_empty() || rows[0].len() < 5 {
        return Err(GeomError::InvalidSpec("sample file needs u,v and at least 3 coordinates".into()));
    }
    let m = rows[0].len() - 2;
    let mut us: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mut vs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    for list in [&mut us, &mut vs] {
        list.sort_by(f64::total_cmp);
        list.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    }
    let grid = GridParams::new(us.len(), vs.len(), (us[0], us[us.len() - 1]), (vs[0], vs[vs.len() - 1]));
    if grid.len() != rows.len() {
        return Err(GeomError::InvalidSpec("samples do not form a full rectangular grid".into()));
    }
    let mut values = vec![DVector::zeros(m); grid.len()];
    let (hu, hv) = (grid.hu(), grid.hv());
    for r in &rows {
        let i = ((r[0] - grid.u0) / hu).round() as usize;
        let j = ((r[1] - grid.v0) / hv).round() as usize;
        values[grid.node(i, j)] = DVector::from_column_slice(&r[2..]);
    }
    let ambient = AmbientSpace { kind, flat_dim: m };
    chart_from_samples(ambient, grid, &values, order, stencil_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_central_second_derivative() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] + 2.0).abs() < 1e-14 && (w[2] - 1.0).abs() < 1e-14);
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn windows_stay_inside() {
        assert_eq!(window(0, 5, 10), (0, 5));
        assert_eq!(window(9, 5, 10), (5, 5));
        assert_eq!(window(5, 5, 10), (3, 5));
    }
}
