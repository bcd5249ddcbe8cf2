//! One-call bundle of the per-chart geometry: flag, forms, Frenet blocks,
//! complex structures and ellipses.

use crate::ambient::Chart;
use crate::elliptic::{curvature_ellipses, detect_ellipticity, ComplexStructures, EllipseReport};
use crate::error::{GeomError, Result};
use crate::flag::{build_flag, frenet_tensors, higher_forms, FrenetTensors, HigherFormTable, NormalFlag};

#[derive(Clone, Copy, Debug)]
pub struct AnalysisParams {
    pub rank_tol: f64,
    pub tol_circle: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams { rank_tol: 1e-6, tol_circle: 1e-6 }
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub chart: Chart,
    pub flag: NormalFlag,
    pub forms: HigherFormTable,
    pub tensors: FrenetTensors,
    /// `Err` when the surface is not elliptic; analysis continues without it.
    pub cs: std::result::Result<ComplexStructures, GeomError>,
    pub ellipses: Option<EllipseReport>,
    pub params: AnalysisParams,
}

impl Analysis {
    pub fn run(chart: Chart, params: &AnalysisParams) -> Result<Analysis> {
        let flag = build_flag(&chart, params.rank_tol)?;
        let forms = higher_forms(&chart, &flag)?;
        let tensors = frenet_tensors(&chart, &flag, &forms)?;
        let cs = detect_ellipticity(&chart, &forms);
        let ellipses = cs.as_ref().ok().map(|cs| curvature_ellipses(&forms, cs));
        Ok(Analysis { chart, flag, forms, tensors, cs, ellipses, params: *params })
    }

    /// Complex structures, or the ellipticity error as a hard failure.
    pub fn elliptic(&self) -> Result<&ComplexStructures> {
        self.cs.as_ref().map_err(Clone::clone)
    }

    /// Max over the grid of the J_s orthogonality defect at order s.
    pub fn circular_defect(&self, s: usize) -> Result<f64> {
        let cs = self.elliptic()?;
        if s > cs.tau_o {
            return Err(GeomError::OrderOutOfRange { order: s, max: cs.tau_o });
        }
        Ok(cs.orth_defect.iter().map(|d| d[s]).fold(0.0, f64::max))
    }
}
