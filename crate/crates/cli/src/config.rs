//! Pipeline configuration: TOML in, validated structs out.

use assocfam_core::ranktwo::OmegaSpec;
use assocfam_core::{GridParams, SurfaceSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { location: location.into(), message: message.into() }
}

/// Angle given as a number or as text like `pi/2`, `2pi/3`, `0.25*pi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let Some(at) = t.find("pi") else {
        return t.parse::<f64>().map_err(|_| format!("cannot parse angle {text:?}"));
    };
    let head = t[..at].trim_end_matches('*');
    let tail = &t[at + 2..];
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("cannot parse angle {text:?}"))?,
    };
    let denom = match tail {
        "" => 1.0,
        d if d.starts_with('/') => d[1..].parse::<f64>().map_err(|_| format!("cannot parse angle {text:?}"))?,
        _ => return Err(format!("cannot parse angle {text:?}")),
    };
    Ok(coef * PI / denom)
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Angle(x)),
            Raw::Text(s) => parse_angle(&s).map(Angle).map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// `[nu, nv]`; defaults to 32 × 32.
    pub n: Option<[usize; 2]>,
    /// Parameter ranges; default to the generator's domain.
    pub u: Option<[f64; 2]>,
    pub v: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub tol_circle: f64,
    pub congruence_tol: f64,
    pub holonomy_bound: f64,
    pub cross_section_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_tol: 1e-6, tol_circle: 1e-6, congruence_tol: 1e-5, holonomy_bound: 1e-3, cross_section_tol: 1e-7 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportName {
    #[default]
    Taylor,
    Midpoint,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaExtra {
    pub j: usize,
    pub coeffs: Vec<f64>,
}

fn default_ell() -> usize {
    1
}

fn default_step() -> f64 {
    0.5
}

fn default_omega() -> OmegaSpec {
    OmegaSpec::Zero
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    Analyze,
    Family {
        ell: usize,
        theta: Vec<Angle>,
        #[serde(default)]
        transport: TransportName,
        /// Surface the members are aligned against, on the same grid.
        #[serde(default)]
        compare: Option<SurfaceSpec>,
    },
    Relation {
        ell: usize,
        r: usize,
        theta: Angle,
    },
    Polar,
    Ranktwo {
        #[serde(default = "default_ell")]
        ell: usize,
        #[serde(default = "default_omega")]
        omega: OmegaSpec,
        #[serde(default)]
        gamma0: Vec<f64>,
        #[serde(default)]
        gamma_extra: Vec<GammaExtra>,
        #[serde(default = "default_step")]
        step: f64,
        #[serde(default)]
        theta: Vec<Angle>,
    },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Analyze => "analyze",
            Action::Family { .. } => "family",
            Action::Relation { .. } => "relation",
            Action::Polar => "polar",
            Action::Ranktwo { .. } => "ranktwo",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Write CSV side files next to the report.
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: None, csv: true }
    }
}

fn default_order() -> usize {
    12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    /// Jet order of the base chart.
    #[serde(default = "default_order")]
    pub order: usize,
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub actions: Vec<Action>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides; `None` keeps the config value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<[usize; 2]>,
    pub theta: Option<Vec<Angle>>,
    pub ell: Option<usize>,
    pub out: Option<PathBuf>,
    pub tol_circle: Option<f64>,
    pub seed: Option<u64>,
}

pub fn parse_grid(text: &str) -> Result<[usize; 2], String> {
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(|| format!("expected NxM, got {text:?}"))?;
    let p = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("expected NxM, got {text:?}"));
    Ok([p(a)?, p(b)?])
}

pub fn parse_theta_list(text: &str) -> Result<Vec<Angle>, String> {
    text.split(',').map(|t| parse_angle(t).map(Angle)).collect()
}

/// Circularity tolerance for finite-difference charts unless the config sets one.
pub const SAMPLED_TOL_CIRCLE: f64 = 1e-3;

/// First key path present in `raw` but absent from `echo`.
fn stray_key(raw: &toml::Value, echo: &toml::Value, at: &str) -> Option<String> {
    let join = |k: &str| if at.is_empty() { k.to_string() } else { format!("{at}.{k}") };
    match (raw, echo) {
        (toml::Value::Table(r), toml::Value::Table(e)) => r.iter().find_map(|(k, v)| match e.get(k) {
            None => Some(join(k)),
            Some(ev) => stray_key(v, ev, &join(k)),
        }),
        (toml::Value::Array(r), toml::Value::Array(e)) => {
            r.iter().zip(e).enumerate().find_map(|(i, (a, b))| stray_key(a, b, &format!("{at}[{i}]")))
        }
        _ => None,
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let parse_err = |message: String| ConfigError::Parse { path: origin.to_string(), message };
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        // Unit generator variants swallow extra keys, so compare against the round trip.
        let raw: toml::Value = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let echo = toml::Value::try_from(&cfg).map_err(|e| parse_err(e.to_string()))?;
        if let Some(key) = stray_key(&raw, &echo, "") {
            return Err(invalid(key, "unknown field"));
        }
        let explicit_circle = raw.get("tolerances").and_then(|t| t.get("tol_circle")).is_some();
        if matches!(cfg.surface, SurfaceSpec::Sampled { .. }) && !explicit_circle {
            cfg.tolerances.tol_circle = SAMPLED_TOL_CIRCLE;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.grid {
            self.grid.n = Some(n);
        }
        if let Some(dir) = &o.out {
            self.output.dir = Some(dir.clone());
        }
        if let Some(t) = o.tol_circle {
            self.tolerances.tol_circle = t;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
            if let SurfaceSpec::Perturbed { seed: s, .. } = &mut self.surface {
                *s = seed;
            }
        }
        for a in &mut self.actions {
            match a {
                Action::Family { ell, theta, .. } | Action::Ranktwo { ell, theta, .. } => {
                    if let Some(e) = o.ell {
                        *ell = e;
                    }
                    if let Some(t) = &o.theta {
                        *theta = t.clone();
                    }
                }
                Action::Relation { ell, theta, .. } => {
                    if let Some(e) = o.ell {
                        *ell = e;
                    }
                    if let Some(t) = o.theta.as_ref().and_then(|t| t.first()) {
                        *theta = *t;
                    }
                }
                _ => {}
            }
        }
    }

    pub fn grid_params(&self) -> GridParams {
        let [nu, nv] = self.grid.n.unwrap_or([32, 32]);
        let (du, dv) = self.surface.default_domain();
        let u = self.grid.u.map(|[a, b]| (a, b)).unwrap_or(du);
        let v = self.grid.v.map(|[a, b]| (a, b)).unwrap_or(dv);
        GridParams::new(nu, nv, u, v)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.surface.validate().map_err(|e| invalid("surface", e.to_string()))?;
        self.grid_params().validate().map_err(|e| invalid("grid", e.to_string()))?;
        if self.order < 4 {
            return Err(invalid("order", "jet order must be at least 4"));
        }
        let t = &self.tolerances;
        for (name, x) in [
            ("rank_tol", t.rank_tol),
            ("tol_circle", t.tol_circle),
            ("congruence_tol", t.congruence_tol),
            ("holonomy_bound", t.holonomy_bound),
            ("cross_section_tol", t.cross_section_tol),
        ] {
            if !(x > 0.0) {
                return Err(invalid(format!("tolerances.{name}"), "must be positive"));
            }
        }
        let check_theta = |loc: String, th: &Angle| -> Result<(), ConfigError> {
            if !(0.0..PI).contains(&th.0) {
                return Err(invalid(loc, "theta out of [0,pi)"));
            }
            Ok(())
        };
        for (i, a) in self.actions.iter().enumerate() {
            let loc = |f: &str| format!("actions[{i}].{f}");
            match a {
                Action::Family { theta, compare, .. } => {
                    if theta.is_empty() {
                        return Err(invalid(loc("theta"), "empty angle list"));
                    }
                    for (k, th) in theta.iter().enumerate() {
                        check_theta(loc(&format!("theta[{k}]")), th)?;
                    }
                    if let Some(c) = compare {
                        c.validate().map_err(|e| invalid(loc("compare"), e.to_string()))?;
                    }
                }
                Action::Relation { r, theta, .. } => {
                    if *r == 0 {
                        return Err(invalid(loc("r"), "r must be at least 1"));
                    }
                    check_theta(loc("theta"), theta)?;
                }
                Action::Ranktwo { ell, step, theta, gamma_extra, .. } => {
                    if *ell == 0 {
                        return Err(invalid(loc("ell"), "rank-two pipeline needs ell >= 1"));
                    }
                    if !(*step > 0.0) {
                        return Err(invalid(loc("step"), "fiber step must be positive"));
                    }
                    for (k, th) in theta.iter().enumerate() {
                        check_theta(loc(&format!("theta[{k}]")), th)?;
                    }
                    for (k, g) in gamma_extra.iter().enumerate() {
                        if g.j < 2 || g.j > *ell {
                            return Err(invalid(loc(&format!("gamma_extra[{k}].j")), format!("j must lie in 2..={ell}")));
                        }
                    }
                }
                Action::Analyze | Action::Polar => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle(" 0.25 ").unwrap(), 0.25);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("pi/x").is_err());
    }

    #[test]
    fn grid_flag() {
        assert_eq!(parse_grid("64x32").unwrap(), [64, 32]);
        assert!(parse_grid("64").is_err());
    }

    #[test]
    fn stray_keys_under_unit_generators() {
        let ok = "[surface]\ngenerator = \"catenoid\"\n[[actions]]\nkind = \"family\"\nell = 0\ntheta = [\"pi/2\"]\ncompare = { generator = \"helicoid\" }\n";
        assert!(PipelineConfig::from_toml(ok, "t").is_ok());
        let bad = ok.replace("generator = \"helicoid\"", "generator = \"helicoid\", scale = 2");
        match PipelineConfig::from_toml(&bad, "t") {
            Err(ConfigError::Invalid { location, .. }) => assert_eq!(location, "actions[0].compare.scale"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampled_surfaces_get_a_looser_circle_tolerance() {
        let text = "[surface]\ngenerator = \"sampled\"\npath = \"x.csv\"\nkind = \"euclidean\"\nstencil_order = 4\n";
        assert_eq!(PipelineConfig::from_toml(text, "t").unwrap().tolerances.tol_circle, SAMPLED_TOL_CIRCLE);
        let pinned = format!("{text}[tolerances]\ntol_circle = 1e-5\n");
        assert_eq!(PipelineConfig::from_toml(&pinned, "t").unwrap().tolerances.tol_circle, 1e-5);
    }
}
