//! JSON report schema. Everything except `timings` is a deterministic
//! function of the config.

use crate::config::PipelineConfig;
use assocfam_core::assoc::FamilyVerdict;
use assocfam_core::compat::CompatReport;
use assocfam_core::elliptic::TransportResiduals;
use assocfam_core::polar::PolarKind;
use assocfam_core::ranktwo::{RankTwoSummary, RankTwoVerdict};
use assocfam_core::{AmbientSpace, Analysis, GridParams};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    GateFailed,
}

#[derive(Clone, Debug, Serialize)]
pub struct FailedGate {
    /// Index into `actions` of the config, or null for chart setup.
    pub action: Option<usize>,
    pub action_kind: String,
    pub gate: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub setup_ms: f64,
    pub actions_ms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceSummary {
    pub ambient: AmbientSpace,
    pub grid: GridParams,
    pub order: usize,
    pub dims: Vec<usize>,
    pub tau: usize,
    pub tau_o: Option<usize>,
    pub substantial_dim: usize,
    pub elliptic: bool,
    pub ellipticity_error: Option<String>,
    pub frame_orthogonality: f64,
}

impl SurfaceSummary {
    pub fn from_analysis(an: &Analysis) -> Self {
        SurfaceSummary {
            ambient: an.chart.ambient,
            grid: an.chart.grid,
            order: an.chart.order(),
            dims: an.flag.dims.clone(),
            tau: an.flag.tau,
            tau_o: an.cs.as_ref().ok().map(|c| c.tau_o),
            substantial_dim: an.flag.substantial_dim,
            elliptic: an.cs.is_ok(),
            ellipticity_error: an.cs.as_ref().err().map(|e| e.to_string()),
            frame_orthogonality: an.flag.orthogonality_residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipseRow {
    pub order: usize,
    pub max_defect: f64,
    pub min_defect: f64,
    /// Max ‖J_sᵀJ_s − I‖.
    pub max_orth_defect: f64,
    pub circular: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub compatibility: CompatReport,
    pub mean_curvature_max: f64,
    pub elliptic: bool,
    pub ellipticity_residual: Option<f64>,
    pub js_residual: Vec<f64>,
    pub ellipses: Vec<EllipseRow>,
    pub criterion_gap: Option<f64>,
    pub degenerate_ellipses: usize,
    pub transport_identities: Option<TransportResiduals>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceSummary {
    pub residual: f64,
    pub determinant: f64,
    pub congruent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceSummary {
    pub max: f64,
    pub pointwise: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyMember {
    pub theta: f64,
    pub changed_blocks: Vec<(usize, usize)>,
    pub holonomy: f64,
    pub frame_orthogonality: f64,
    pub verdict: FamilyVerdict,
    pub congruence_to_base: CongruenceSummary,
    pub congruence_to_compare: Option<CongruenceSummary>,
    pub curvature_invariance: Option<InvarianceSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub ell: usize,
    pub members: Vec<FamilyMember>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub ell: usize,
    pub r: usize,
    pub theta: f64,
    pub congruence: CongruenceSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolarReport {
    pub provenance: PolarKind,
    pub span_residual: f64,
    pub closedness_rms: f64,
    pub closedness_per_area: f64,
    pub elliptic: bool,
    pub ellipticity_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankTwoMember {
    pub theta: f64,
    pub summary: RankTwoSummary,
    pub verdict: RankTwoVerdict,
    pub congruence_to_base: CongruenceSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankTwoReport {
    pub ell: usize,
    pub n: usize,
    pub solve_residual: f64,
    pub projection_residual: f64,
    pub summary: RankTwoSummary,
    pub members: Vec<RankTwoMember>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionReport {
    Analyze(AnalyzeReport),
    Family(FamilyReport),
    Relation(RelationReport),
    Polar(PolarReport),
    Ranktwo(RankTwoReport),
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: PipelineConfig,
    pub status: Status,
    pub failed_gate: Option<FailedGate>,
    pub surface: Option<SurfaceSummary>,
    pub actions: Vec<ActionReport>,
    /// Side files written to the output directory.
    pub artifacts: Vec<String>,
    pub timings: Timings,
}

impl Report {
    pub fn new(config: PipelineConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            config,
            status: Status::Ok,
            failed_gate: None,
            surface: None,
            actions: Vec::new(),
            artifacts: Vec::new(),
            timings: Timings::default(),
        }
    }

    pub fn fail(&mut self, g: FailedGate) {
        self.status = Status::GateFailed;
        self.failed_gate = Some(g);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with the `timings` field removed, for regression comparison.
    pub fn to_json_without_timings(&self) -> String {
        strip_timings(&self.to_json())
    }
}

/// Drops the top-level `timings` key from a serialized report.
pub fn strip_timings(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("valid report json");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("timings");
    }
    serde_json::to_string_pretty(&v).expect("report serializes")
}
