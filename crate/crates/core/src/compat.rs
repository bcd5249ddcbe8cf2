//! Compatibility equations of the flag connection and curvature invariance
//! of the modified normal connection.

use crate::assoc::ModifiedConnection;
use crate::error::{GeomError, Result};
use crate::flag::{FrenetTensors, NormalFlag};
use crate::jet::{index, MJet};
use crate::linalg::op_norm;
use nalgebra::DMatrix;
use serde::Serialize;
use std::ops::Range;

#[derive(Clone, Debug, Default, Serialize)]
pub struct EquationResidual {
    pub max: f64,
    pub argmax_node: usize,
    /// `(s, max residual at order s)`.
    pub per_order: Vec<(usize, f64)>,
}

impl EquationResidual {
    fn new(orders: impl Iterator<Item = usize>) -> Self {
        EquationResidual { max: 0.0, argmax_node: 0, per_order: orders.map(|s| (s, 0.0)).collect() }
    }

    fn record(&mut self, slot: usize, node: usize, r: f64) {
        let e = &mut self.per_order[slot].1;
        *e = e.max(r);
        if r > self.max {
            self.max = r;
            self.argmax_node = node;
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CompatReport {
    pub gengauss: EquationResidual,
    pub gencodazzi: EquationResidual,
    pub gencodazzi2: EquationResidual,
    pub sym: EquationResidual,
    pub second: EquationResidual,
    /// Torsion part: d(Eᵀdg) + Ω ∧ Eᵀdg.
    pub structure: f64,
}

impl CompatReport {
    pub fn max(&self) -> f64 {
        [&self.gengauss, &self.gencodazzi, &self.gencodazzi2, &self.sym, &self.second]
            .iter()
            .map(|e| e.max)
            .fold(self.structure, f64::max)
    }
}

/// Value of ∂uΩv − ∂vΩu + [Ωu, Ωv].
pub fn curvature_value(om: &[MJet; 2]) -> DMatrix<f64> {
    let (u, v) = (&om[0], &om[1]);
    let du_v = &v.coeffs()[index(1, 0)];
    let dv_u = &u.coeffs()[index(0, 1)];
    du_v - dv_u + u.value() * v.value() - v.value() * u.value()
}

fn sub(m: &DMatrix<f64>, r: &Range<usize>, c: &Range<usize>) -> DMatrix<f64> {
    m.view((r.start, c.start), (r.len(), c.len())).into_owned()
}

pub fn compatibility_residuals(flag: &NormalFlag, tensors: &FrenetTensors) -> CompatReport {
    let tau = flag.tau;
    let lay = &tensors.layout;
    let mut rep = CompatReport {
        gengauss: EquationResidual::new(0..=tau),
        gencodazzi: EquationResidual::new(0..tau),
        gencodazzi2: EquationResidual::new(0..tau),
        sym: EquationResidual::new(0..tau.saturating_sub(1)),
        second: EquationResidual::new(1..=tau),
        structure: 0.0,
    };
    for (node, om) in tensors.omega.iter().enumerate() {
        if om[0].order() == 0 {
            continue;
        }
        let f = curvature_value(om);
        // Scale of the terms entering F at this node.
        let scale = [0, 1]
            .iter()
            .map(|&a| {
                let v = om[a].value();
                let d = om[a].coeffs()[index(1, 0)].amax() + om[a].coeffs()[index(0, 1)].amax();
                d + v.amax() * v.amax()
            })
            .fold(0.0, f64::max);
        let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
        for s in 0..=tau {
            let b = lay.block(s);
            rep.gengauss.record(s, node, rel(op_norm(&sub(&f, &b, &b))));
            if s < tau {
                let n = lay.block(s + 1);
                rep.gencodazzi.record(s, node, rel(op_norm(&sub(&f, &n, &b))));
                rep.gencodazzi2.record(s, node, rel(op_norm(&sub(&f, &b, &n))));
            }
            if s + 2 <= tau {
                let n = lay.block(s + 2);
                rep.sym.record(s, node, rel(op_norm(&sub(&f, &n, &b))));
            }
        }
        for s in 1..=tau {
            let (a, b) = (lay.block(s - 1), lay.block(s));
            let mut worst: f64 = 0.0;
            for o in om.iter() {
                let v = o.value();
                let d = sub(v, &a, &b) + sub(v, &b, &a).transpose();
                let sc = sub(v, &b, &a).amax();
                worst = worst.max(if sc > 0.0 { op_norm(&d) / sc } else { op_norm(&d) });
            }
            rep.second.record(s - 1, node, worst);
        }
        let t = &tensors.translation[node];
        let tu = t[0].matrix().column(0).into_owned();
        let tv = t[1].matrix().column(0).into_owned();
        let d = t[1].coeff(1, 0) - t[0].coeff(0, 1) + om[0].value() * &tv - om[1].value() * &tu;
        let sc = tu.norm().max(tv.norm()).powi(2).max(t[1].coeff(1, 0).norm());
        rep.structure = rep.structure.max(if sc > 0.0 { d.norm() / sc } else { d.norm() });
    }
    rep
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CurvatureInvariance {
    /// max over cells of ‖H^θ − H^⊥‖ / area, holonomies based at cell centers.
    pub max: f64,
    pub argmax_cell: usize,
    /// `(t, s, max)` over normal blocks N_t ← N_s of the holonomy difference.
    pub per_block: Vec<(usize, usize, f64)>,
    /// Same comparison from jet curvature values at the nodes.
    pub pointwise: f64,
}

fn transport(m: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    (m * h).exp()
}

/// Loop holonomy of a cell conjugated to the cell center.
/// `at(node, axis, du, dv)` evaluates the connection near a node.
fn cell_holonomy(
    at: &dyn Fn(usize, usize, f64, f64) -> DMatrix<f64>,
    a: usize,
    b: usize,
    d: usize,
    hu: f64,
    hv: f64,
) -> DMatrix<f64> {
    let t_ab = transport(&at(a, 0, hu / 2.0, 0.0), hu);
    let t_bc = transport(&at(b, 1, 0.0, hv / 2.0), hv);
    let t_cd = transport(&at(d, 0, hu / 2.0, 0.0), -hu);
    let t_da = transport(&at(a, 1, 0.0, hv / 2.0), -hv);
    let h = t_ab * t_bc * t_cd * t_da;
    let p = (at(a, 0, hu / 4.0, hv / 4.0) * (hu / 2.0) + at(a, 1, hu / 4.0, hv / 4.0) * (hv / 2.0)).exp();
    let pinv = p.clone().try_inverse().unwrap_or_else(|| p.transpose());
    pinv * h * p
}

pub fn curvature_invariance(
    flag: &NormalFlag,
    tensors: &FrenetTensors,
    mc: &ModifiedConnection,
    grid: &crate::ambient::GridParams,
) -> Result<CurvatureInvariance> {
    if mc.circular_defect > mc.tol_circle {
        return Err(GeomError::PreconditionFailed(format!(
            "ellipse of order {} is not circular (defect {:.3e})",
            mc.ell, mc.circular_defect
        )));
    }
    let lay = &tensors.layout;
    let nr = lay.normal();
    let off = nr.start;
    let base_at = |node: usize, axis: usize, du: f64, dv: f64| sub(&tensors.omega[node][axis].eval(du, dv), &nr, &nr);
    let mod_at = |node: usize, axis: usize, du: f64, dv: f64| {
        sub(&mc.apply(&tensors.omega[node][axis]).eval(du, dv), &nr, &nr)
    };
    let (hu, hv) = (grid.hu(), grid.hv());
    let area = hu * hv;
    let mut rep = CurvatureInvariance::default();
    let tau = flag.tau;
    let mut blocks: Vec<(usize, usize, f64)> = Vec::new();
    for t in 1..=tau {
        for s in 1..=tau {
            blocks.push((t, s, 0.0));
        }
    }
    for j in 0..grid.nv - 1 {
        for i in 0..grid.nu - 1 {
            let a = grid.node(i, j);
            let b = grid.node(i + 1, j);
            let d = grid.node(i, j + 1);
            let h0 = cell_holonomy(&base_at, a, b, d, hu, hv);
            let h1 = cell_holonomy(&mod_at, a, b, d, hu, hv);
            let diff = (h1 - h0) / area;
            let r = op_norm(&diff);
            if r > rep.max {
                rep.max = r;
                rep.argmax_cell = a;
            }
            for e in blocks.iter_mut() {
                let (rt, rs) = (lay.block(e.0), lay.block(e.1));
                let v = diff.view((rt.start - off, rs.start - off), (rt.len(), rs.len()));
                e.2 = e.2.max(v.amax());
            }
        }
    }
    for (node, om) in tensors.omega.iter().enumerate() {
        if om[0].order() == 0 {
            break;
        }
        let _ = node;
        let restrict = |m: &MJet| {
            let mut out = MJet::zero(nr.len(), nr.len(), m.order());
            for (c, src) in out.coeffs_mut().iter_mut().zip(m.coeffs()) {
                *c = sub(src, &nr, &nr);
            }
            out
        };
        let base = [restrict(&om[0]), restrict(&om[1])];
        let modi = [restrict(&mc.apply(&om[0])), restrict(&mc.apply(&om[1]))];
        let r = op_norm(&(curvature_value(&modi) - curvature_value(&base)));
        rep.pointwise = rep.pointwise.max(r);
    }
    rep.per_block = blocks;
    Ok(rep)
}
