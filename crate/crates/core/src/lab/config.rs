use serde::{Deserialize, Serialize};

use crate::axisym::MarriageRing as Ring;
use crate::error::{Error, Result};
use crate::levelset::TrackMode;

/// Scenario pipelines the runner can dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    CsfPair,
    CsfSelf,
    GraphicalPair,
    MarriageRing,
    Dumbbell,
    ConeFattening,
    Localizability,
    Custom,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::CsfPair => "csf_pair",
            ScenarioKind::CsfSelf => "csf_self",
            ScenarioKind::GraphicalPair => "graphical_pair",
            ScenarioKind::MarriageRing => "marriage_ring",
            ScenarioKind::Dumbbell => "dumbbell",
            ScenarioKind::ConeFattening => "cone_fattening",
            ScenarioKind::Localizability => "localizability",
            ScenarioKind::Custom => "custom",
        }
    }
}

/// Immersed test curves for `csf_self`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfCurve {
    Circle,
    FigureEight,
    ThreeCrossing,
}

/// What the localizability check splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Post-pinch dumbbell, cut by a disk around one bell.
    Dumbbell,
    /// Two disjoint circles, cut by a separating half-plane.
    Circles,
    /// Wide double cone, cut by the plane through its vertex.
    Cone,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Dumbbell => "dumbbell",
            Split::Circles => "circles",
            Split::Cone => "cone",
        }
    }
}

/// One scenario run. Scenario-specific fields are `None` when they do not
/// apply; [`parse_config`] fills in the defaults of those that do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    /// Grid spacing or target vertex spacing.
    #[serde(default)]
    pub resolution: Option<f64>,
    pub horizon: f64,
    pub sample_dt: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub emit_frames: bool,
    /// Dimension of the rotated hypersurface.
    #[serde(default)]
    pub n: Option<usize>,
    /// Entry of the convex pair catalog.
    #[serde(default)]
    pub pair: Option<String>,
    #[serde(default)]
    pub curve: Option<SelfCurve>,
    /// Dumbbell bell scale `L`.
    #[serde(default)]
    pub length: Option<f64>,
    /// Dumbbell neck radius.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub aperture_deg: Option<f64>,
    #[serde(default)]
    pub plane_offset: Option<f64>,
    #[serde(default)]
    pub split: Option<Split>,
    #[serde(default)]
    pub tracking: Option<TrackMode>,
    /// Steps between reinitializations; 0 disables them.
    #[serde(default)]
    pub reinit_every: Option<usize>,
}

/// Default resolution and admissible range per scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionBounds {
    pub default: f64,
    pub min: f64,
    pub max: f64,
}

pub const CSF_DEFAULT_H: f64 = std::f64::consts::TAU / 512.0;
pub const DUMBBELL_DEFAULT_L: f64 = 8.0;
pub const DUMBBELL_DEFAULT_EPS: f64 = 0.5;
/// The localizability dumbbell is shorter so that its grid stays small.
pub const SPLIT_DUMBBELL_L: f64 = 6.0;
const RING_DEFAULT_VERTICES: f64 = 2048.0;
const RING_MIN_VERTICES: f64 = 1024.0;
const RING_MAX_VERTICES: f64 = 16384.0;

fn field_error(name: &str, msg: &str) -> Error {
    Error::Config(format!("{name} {msg}"))
}

impl ScenarioConfig {
    /// Minimal config with every optional field unset.
    pub fn new(scenario: ScenarioKind, horizon: f64, sample_dt: f64) -> Self {
        ScenarioConfig {
            scenario,
            resolution: None,
            horizon,
            sample_dt,
            seed: 0,
            output_dir: None,
            emit_frames: false,
            n: None,
            pair: None,
            curve: None,
            length: None,
            eps: None,
            aperture_deg: None,
            plane_offset: None,
            split: None,
            tracking: None,
            reinit_every: None,
        }
    }

    /// Resolution table; depends on other fields for the ring (vertex
    /// count), the dumbbell (neck radius) and the localizability split.
    pub fn resolution_bounds(&self) -> Result<ResolutionBounds> {
        use ScenarioKind::*;
        let b = |default, min, max| ResolutionBounds { default, min, max };
        Ok(match self.scenario {
            CsfPair | CsfSelf | Custom => b(CSF_DEFAULT_H, 0.002, 0.1),
            GraphicalPair => b(1.0 / 64.0, 1.0 / 512.0, 0.1),
            MarriageRing => {
                let p = Ring::new(self.n.unwrap_or(2))?.perimeter();
                b(p / RING_DEFAULT_VERTICES, p / RING_MAX_VERTICES, p / RING_MIN_VERTICES)
            }
            Dumbbell => {
                let eps = self.eps.unwrap_or(DUMBBELL_DEFAULT_EPS);
                b(eps / 10.0, eps / 40.0, eps / 5.0)
            }
            ConeFattening => b(1.0 / 128.0, 1.0 / 512.0, 1.0 / 32.0),
            Localizability => match self.split.unwrap_or(Split::Circles) {
                Split::Dumbbell => b(0.1, 0.025, 0.1),
                Split::Circles => b(1.0 / 32.0, 1.0 / 256.0, 0.1),
                Split::Cone => b(1.0 / 128.0, 1.0 / 512.0, 1.0 / 32.0),
            },
        })
    }

    /// Fill in defaults for the fields that apply to the scenario.
    pub fn with_defaults(mut self) -> Result<Self> {
        use ScenarioKind::*;
        match self.scenario {
            CsfPair => {
                self.pair.get_or_insert_with(|| "two_circles".to_string());
            }
            CsfSelf => {
                self.curve.get_or_insert(SelfCurve::FigureEight);
            }
            MarriageRing => {
                self.n.get_or_insert(2);
            }
            Dumbbell => {
                self.n.get_or_insert(2);
                self.length.get_or_insert(DUMBBELL_DEFAULT_L);
                self.eps.get_or_insert(DUMBBELL_DEFAULT_EPS);
            }
            ConeFattening => {
                self.n.get_or_insert(2);
                self.aperture_deg.get_or_insert(140.0);
                self.plane_offset.get_or_insert(0.0);
                self.tracking.get_or_insert(TrackMode::TwoRun);
                self.reinit_every.get_or_insert(crate::levelset::REINIT_EVERY);
            }
            Localizability => {
                self.split.get_or_insert(Split::Circles);
                self.reinit_every.get_or_insert(crate::levelset::REINIT_EVERY);
            }
            GraphicalPair | Custom => {}
        }
        if self.resolution.is_none() {
            self.resolution = Some(self.resolution_bounds()?.default);
        }
        Ok(self)
    }

    /// Check every documented constraint; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        use ScenarioKind::*;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(field_error("horizon", "must be positive"));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt <= self.horizon / 4.0) {
            return Err(field_error("sample_dt", "must lie in (0, horizon/4]"));
        }
        let allowed: &[&str] = match self.scenario {
            CsfPair => &["pair"],
            CsfSelf => &["curve"],
            GraphicalPair | Custom => &[],
            MarriageRing => &["n"],
            Dumbbell => &["n", "length", "eps"],
            ConeFattening => &["n", "aperture_deg", "plane_offset", "tracking", "reinit_every"],
            Localizability => &["split", "reinit_every"],
        };
        let present = [
            ("n", self.n.is_some()),
            ("pair", self.pair.is_some()),
            ("curve", self.curve.is_some()),
            ("length", self.length.is_some()),
            ("eps", self.eps.is_some()),
            ("aperture_deg", self.aperture_deg.is_some()),
            ("plane_offset", self.plane_offset.is_some()),
            ("split", self.split.is_some()),
            ("tracking", self.tracking.is_some()),
            ("reinit_every", self.reinit_every.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(field_error(name, &format!("does not apply to scenario {}", self.scenario.as_str())));
            }
        }
        if let Some(h) = self.resolution {
            let b = self.resolution_bounds()?;
            if !(h >= b.min * (1.0 - 1e-12) && h <= b.max * (1.0 + 1e-12)) {
                return Err(field_error("resolution", &format!("must lie in [{}, {}]", b.min, b.max)));
            }
        }
        if let Some(n) = self.n {
            let ok = match self.scenario {
                ConeFattening => n == 2,
                Dumbbell => n == crate::axisym::DUMBBELL_N,
                _ => (2..=8).contains(&n),
            };
            if !ok {
                return Err(field_error("n", "is outside the supported range"));
            }
        }
        if let Some(p) = &self.pair {
            if !super::CSF_PAIRS.iter().any(|c| c.name == p) {
                return Err(field_error("pair", &format!("'{p}' is not in the pair catalog")));
            }
        }
        if let (Some(l), Some(e)) = (self.length, self.eps) {
            if !(l > 0.0 && e > 0.0 && e < l / 10.0) {
                return Err(field_error("eps", "must satisfy 0 < eps < length/10"));
            }
        }
        if let Some(a) = self.aperture_deg {
            if !(a > 0.0 && a < 180.0) {
                return Err(field_error("aperture_deg", "must lie in (0, 180)"));
            }
        }
        if let Some(p) = self.plane_offset {
            if !(p.abs() < 0.5) {
                return Err(field_error("plane_offset", "must lie in (-0.5, 0.5)"));
            }
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.resolution.expect("defaults applied")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse, apply defaults and validate a JSON scenario config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: ScenarioConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let cfg = raw.with_defaults()?;
    cfg.validate()?;
    Ok(cfg)
}
