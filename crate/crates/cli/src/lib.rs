//! Config-driven batch front end for the assocfam engine.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{ConfigError, Overrides, PipelineConfig};
pub use pipeline::{run_pipeline, Outcome};
pub use report::Report;

use config::{Action, Angle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every action in the config.
    Run,
    Analyze,
    Family,
    Ranktwo,
}

/// Keeps the actions a subcommand is responsible for, adding a default one
/// from the overrides when the config has none.
pub fn select_actions(cfg: &mut PipelineConfig, mode: Mode, o: &Overrides) -> Result<(), ConfigError> {
    let keep = |a: &Action| match mode {
        Mode::Run => true,
        Mode::Analyze => matches!(a, Action::Analyze),
        Mode::Family => matches!(a, Action::Family { .. } | Action::Relation { .. }),
        Mode::Ranktwo => matches!(a, Action::Ranktwo { .. }),
    };
    cfg.actions.retain(keep);
    if !cfg.actions.is_empty() {
        return Ok(());
    }
    let missing = |what: &str| ConfigError::Invalid {
        location: "actions".into(),
        message: format!("no {what} action in the config; pass --ell and --theta"),
    };
    match mode {
        Mode::Run | Mode::Analyze => cfg.actions.push(Action::Analyze),
        Mode::Family => {
            let (Some(ell), Some(theta)) = (o.ell, o.theta.clone()) else {
                return Err(missing("family"));
            };
            cfg.actions.push(Action::Family { ell, theta, transport: Default::default(), compare: None });
        }
        Mode::Ranktwo => cfg.actions.push(Action::Ranktwo {
            ell: o.ell.unwrap_or(1),
            omega: assocfam_core::ranktwo::OmegaSpec::Zero,
            gamma0: Vec::new(),
            gamma_extra: Vec::new(),
            step: 0.5,
            theta: o.theta.clone().unwrap_or_else(|| vec![Angle(std::f64::consts::FRAC_PI_3)]),
        }),
    }
    Ok(())
}
