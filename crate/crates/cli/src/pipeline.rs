//! Runs the configured actions against one analysed chart and collects the report.

use crate::config::{Action, GammaExtra, PipelineConfig, TransportName};
use crate::report::*;
use assocfam_core::assoc::{congruence_test, integrate_family, modified_connection, verify_family, FamilyParams, Transport};
use assocfam_core::compat::{compatibility_residuals, curvature_invariance};
use assocfam_core::elliptic::{mean_curvature_residual, transport_identity_residuals};
use assocfam_core::polar::{polar_surface, PolarParams};
use assocfam_core::ranktwo::{build_ranktwo, cross_section, ranktwo_family, CrossSectionSpec, FiberParams, SectionSpec};
use assocfam_core::{Analysis, AnalysisParams, GeomError};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Angle used for the transport identity residuals in the analyze action.
const TRANSPORT_PHI: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Gate,
    Io(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Io(_) => 1,
            Outcome::Gate => 2,
        }
    }
}

struct Ctx<'a> {
    cfg: &'a PipelineConfig,
    an: Analysis,
    out: Option<PathBuf>,
    artifacts: Vec<String>,
}

impl Ctx<'_> {
    fn side_file(&mut self, name: &str, write: impl FnOnce(&Path) -> assocfam_core::Result<()>) -> assocfam_core::Result<()> {
        if let Some(dir) = &self.out {
            if self.cfg.output.csv {
                write(&dir.join(name))?;
                self.artifacts.push(name.to_string());
            }
        }
        Ok(())
    }
}

fn congruence(c: &assocfam_core::assoc::CongruenceResult, tol: f64) -> CongruenceSummary {
    CongruenceSummary { residual: c.residual, determinant: c.determinant, congruent: c.residual < tol }
}

fn analyze(ctx: &mut Ctx) -> assocfam_core::Result<ActionReport> {
    let an = &ctx.an;
    let compatibility = compatibility_residuals(&an.flag, &an.tensors);
    let mean_curvature = mean_curvature_residual(&an.forms).into_iter().fold(0.0, f64::max);
    let mut rep = AnalyzeReport {
        compatibility,
        mean_curvature_max: mean_curvature,
        elliptic: an.cs.is_ok(),
        ellipticity_residual: None,
        js_residual: Vec::new(),
        ellipses: Vec::new(),
        criterion_gap: None,
        degenerate_ellipses: 0,
        transport_identities: None,
    };
    if let (Ok(cs), Some(el)) = (&an.cs, &an.ellipses) {
        rep.ellipticity_residual = Some(cs.ellipticity_residual);
        rep.js_residual = cs.js_residual.clone();
        rep.criterion_gap = Some(el.criterion_gap);
        rep.degenerate_ellipses = el.degenerate.len();
        for s in 0..=cs.tau_o {
            let orth = cs.orth_defect.iter().map(|d| d[s]).fold(0.0, f64::max);
            rep.ellipses.push(EllipseRow {
                order: s,
                max_defect: el.max_defect[s],
                min_defect: el.min_defect[s],
                max_orth_defect: orth,
                circular: orth <= ctx.cfg.tolerances.tol_circle,
            });
        }
        rep.transport_identities = Some(transport_identity_residuals(&an.tensors, cs, TRANSPORT_PHI));
        let grid = an.chart.grid;
        let el = el.clone();
        ctx.side_file("ellipses.csv", |p| el.write_csv(&grid, p))?;
    }
    Ok(ActionReport::Analyze(rep))
}

fn family(ctx: &mut Ctx, index: usize, ell: usize, thetas: &[f64], transport: TransportName, compare: Option<&assocfam_core::SurfaceSpec>) -> assocfam_core::Result<ActionReport> {
    let cfg = ctx.cfg;
    let grid = ctx.an.chart.grid;
    let other = match compare {
        Some(spec) => Some(spec.chart(&grid, 4)?),
        None => None,
    };
    let params = FamilyParams {
        transport: match transport {
            TransportName::Taylor => Transport::Taylor,
            TransportName::Midpoint => Transport::Midpoint,
        },
        holonomy_bound: cfg.tolerances.holonomy_bound,
    };
    let mut members = Vec::new();
    for (k, &theta) in thetas.iter().enumerate() {
        let an = &ctx.an;
        let cs = an.elliptic()?;
        let mc = modified_connection(&an.flag, &an.tensors, cs, ell, theta, cfg.tolerances.tol_circle)?;
        let fam = integrate_family(an, &mc, &params)?;
        let verdict = verify_family(an, &fam)?;
        let to_base = congruence(&congruence_test(&an.chart, &fam.chart)?, cfg.tolerances.congruence_tol);
        let to_compare = match &other {
            Some(c) => Some(congruence(&congruence_test(&fam.chart, c)?, cfg.tolerances.congruence_tol)),
            None => None,
        };
        let invariance = if ell >= 1 {
            let ci = curvature_invariance(&an.flag, &an.tensors, &mc, &grid)?;
            Some(InvarianceSummary { max: ci.max, pointwise: ci.pointwise })
        } else {
            None
        };
        let base = grid.base();
        members.push(FamilyMember {
            theta,
            changed_blocks: mc.changed_blocks(&an.tensors, base, 1e-12),
            holonomy: fam.field.holonomy,
            frame_orthogonality: fam.field.orthogonality,
            verdict,
            congruence_to_base: to_base,
            congruence_to_compare: to_compare,
            curvature_invariance: invariance,
        });
        let chart = fam.chart;
        ctx.side_file(&format!("family{index}_l{ell}_{k}.csv"), |p| chart.write_points_csv(p))?;
    }
    Ok(ActionReport::Family(FamilyReport { ell, members }))
}

fn relation(ctx: &mut Ctx, ell: usize, r: usize, theta: f64) -> assocfam_core::Result<ActionReport> {
    let c = assocfam_core::assoc::relation_test(&ctx.an, ell, r, theta)?;
    Ok(ActionReport::Relation(RelationReport { ell, r, theta, congruence: congruence(&c, ctx.cfg.tolerances.congruence_tol) }))
}

fn polar(ctx: &mut Ctx) -> assocfam_core::Result<ActionReport> {
    let p = polar_surface(&ctx.an, &PolarParams::default())?;
    let chart = p.chart.clone();
    ctx.side_file("polar.csv", |path| chart.write_points_csv(path))?;
    Ok(ActionReport::Polar(PolarReport {
        provenance: p.kind,
        span_residual: p.span_residual,
        closedness_rms: p.closedness_rms,
        closedness_per_area: p.closedness_per_area,
        elliptic: p.elliptic,
        ellipticity_residual: p.ellipticity_residual,
    }))
}

#[allow(clippy::too_many_arguments)]
fn ranktwo(
    ctx: &mut Ctx,
    index: usize,
    ell: usize,
    omega: &assocfam_core::ranktwo::OmegaSpec,
    gamma0: &[f64],
    gamma_extra: &[GammaExtra],
    step: f64,
    thetas: &[f64],
) -> assocfam_core::Result<ActionReport> {
    let cfg = ctx.cfg;
    let spec = CrossSectionSpec {
        omega: Some(omega.clone()),
        gamma0: SectionSpec { coeffs: gamma0.to_vec() },
        gamma_extra: gamma_extra.iter().map(|g| (g.j, SectionSpec { coeffs: g.coeffs.clone() })).collect(),
    };
    let an = &ctx.an;
    let csd = cross_section(an, &spec, ell, cfg.tolerances.cross_section_tol)?;
    let fiber = FiberParams { step, rank_tol: cfg.tolerances.rank_tol };
    let rt = build_ranktwo(an, &csd, &fiber)?;
    let kind = an.chart.ambient.kind;
    let mut members = Vec::new();
    let mut charts = Vec::new();
    for &theta in thetas {
        let an = &ctx.an;
        let cs = an.elliptic()?;
        let mc = modified_connection(&an.flag, &an.tensors, cs, ell, theta, cfg.tolerances.tol_circle)?;
        let fam = integrate_family(an, &mc, &FamilyParams { holonomy_bound: cfg.tolerances.holonomy_bound, ..Default::default() })?;
        let (rt_t, verdict) = ranktwo_family(an, &csd, &rt, &fam)?;
        let c = rt.congruence(&rt_t, kind)?;
        members.push(RankTwoMember { theta, summary: rt_t.summary(), verdict, congruence_to_base: congruence(&c, cfg.tolerances.congruence_tol) });
        charts.push(rt_t);
    }
    ctx.side_file(&format!("ranktwo{index}.csv"), |p| rt.write_csv(p))?;
    for (k, c) in charts.iter().enumerate() {
        ctx.side_file(&format!("ranktwo{index}_{k}.csv"), |p| c.write_csv(p))?;
    }
    Ok(ActionReport::Ranktwo(RankTwoReport {
        ell,
        n: rt.n,
        solve_residual: csd.solve_residual,
        projection_residual: csd.projection_residual,
        summary: rt.summary(),
        members,
    }))
}

fn run_action(ctx: &mut Ctx, index: usize, action: &Action) -> assocfam_core::Result<ActionReport> {
    match action {
        Action::Analyze => analyze(ctx),
        Action::Family { ell, theta, transport, compare } => {
            let th: Vec<f64> = theta.iter().map(|a| a.0).collect();
            family(ctx, index, *ell, &th, *transport, compare.as_ref())
        }
        Action::Relation { ell, r, theta } => relation(ctx, *ell, *r, theta.0),
        Action::Polar => polar(ctx),
        Action::Ranktwo { ell, omega, gamma0, gamma_extra, step, theta } => {
            let th: Vec<f64> = theta.iter().map(|a| a.0).collect();
            ranktwo(ctx, index, *ell, omega, gamma0, gamma_extra, *step, &th)
        }
    }
}

fn gate(action: Option<usize>, name: &str, e: &GeomError) -> FailedGate {
    FailedGate { action, action_kind: name.to_string(), gate: e.kind().to_string(), message: e.to_string() }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs a validated config. Side files go to `cfg.output.dir` when set.
pub fn run_pipeline(cfg: &PipelineConfig) -> (Report, Outcome) {
    let start = Instant::now();
    let mut report = Report::new(cfg.clone());
    let out = cfg.output.dir.clone();
    if let Some(dir) = &out {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return (report, Outcome::Io(format!("cannot create {}: {e}", dir.display())));
        }
    }
    let grid = cfg.grid_params();
    let params = AnalysisParams { rank_tol: cfg.tolerances.rank_tol, tol_circle: cfg.tolerances.tol_circle };
    let setup = Instant::now();
    let an = match cfg.surface.chart(&grid, cfg.order).and_then(|c| Analysis::run(c, &params)) {
        Ok(an) => an,
        Err(e) => {
            report.fail(gate(None, "setup", &e));
            report.timings.setup_ms = ms(setup);
            report.timings.total_ms = ms(start);
            return (report, Outcome::Gate);
        }
    };
    report.timings.setup_ms = ms(setup);
    report.surface = Some(SurfaceSummary::from_analysis(&an));
    let mut artifacts = Vec::new();
    if let (Some(dir), true) = (&out, cfg.output.csv) {
        if let Err(e) = an.chart.write_points_csv(&dir.join("points.csv")) {
            return (report, Outcome::Io(e.to_string()));
        }
        artifacts.push("points.csv".to_string());
    }
    let mut ctx = Ctx { cfg, an, out, artifacts };
    let mut outcome = Outcome::Ok;
    for (i, action) in cfg.actions.iter().enumerate() {
        let t = Instant::now();
        let r = run_action(&mut ctx, i, action);
        report.timings.actions_ms.push(ms(t));
        match r {
            Ok(a) => report.actions.push(a),
            Err(GeomError::Io(msg)) => {
                outcome = Outcome::Io(msg);
                break;
            }
            Err(e) => {
                report.fail(gate(Some(i), action.name(), &e));
                outcome = Outcome::Gate;
                break;
            }
        }
    }
    report.artifacts = ctx.artifacts;
    report.timings.total_ms = ms(start);
    (report, outcome)
}
