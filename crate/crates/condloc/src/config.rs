//! Declarative run configuration read from TOML.
//!
//! Every table rejects unknown keys so a typo fails loudly instead of
//! silently falling back to a default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use condloc_core::fusion::{default_view_weights, FusionMode, ViewWeights};
use condloc_core::synth::{NoiseModel, ScenarioConfig};
use condloc_core::{ClassId, ClipSpec, PostParams, DEFAULT_NUM_CLASSES};
use serde::{Deserialize, Deserializer};

use crate::error::{CliError, CliResult};

/// Background class setting: a class id or `none`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Background(pub Option<ClassId>);

impl Default for Background {
    fn default() -> Self {
        Background(Some(ClassId::new(0)))
    }
}

impl FromStr for Background {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(Background(None));
        }
        s.parse::<u16>()
            .map(|c| Background(Some(ClassId::new(c))))
            .map_err(|_| format!("expected `none` or a class id, got `{s}`"))
    }
}

impl fmt::Display for Background {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(c) => write!(f, "{}", c.index()),
            None => f.write_str("none"),
        }
    }
}

impl<'de> Deserialize<'de> for Background {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(u16),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Id(c) => Ok(Background(Some(ClassId::new(c)))),
            Raw::Name(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Source of the per-class view weights.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightsArg {
    Default,
    File(PathBuf),
}

impl FromStr for WeightsArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(if s == "default" { WeightsArg::Default } else { WeightsArg::File(s.into()) })
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub mode: FusionMode,
    /// Rows of (dashboard, rearview, rightside) weights, one per class.
    pub weights: Option<Vec<[f64; 3]>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PostConfig {
    pub gap_max_s: f64,
    pub min_dur_s: f64,
    pub p_merge: f64,
    pub p_noise: f64,
    /// Defaults to every class except the background.
    pub required_classes: Option<Vec<ClassId>>,
}

impl Default for PostConfig {
    fn default() -> Self {
        let p = PostParams::default();
        PostConfig {
            gap_max_s: p.gap_max_s,
            min_dur_s: p.min_dur_s,
            p_merge: p.p_merge,
            p_noise: p.p_noise,
            required_classes: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub video_len_s: f64,
    pub min_duration_s: f64,
    pub max_duration_s: f64,
    pub min_gap_s: f64,
    pub max_gap_s: f64,
    pub ticks_per_s: u32,
    pub noise: NoiseModel,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let s = ScenarioConfig::default();
        SynthConfig {
            video_len_s: s.video_len_s,
            min_duration_s: s.min_duration_s,
            max_duration_s: s.max_duration_s,
            min_gap_s: s.min_gap_s,
            max_gap_s: s.max_gap_s,
            ticks_per_s: s.ticks_per_s,
            noise: s.noise,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub num_classes: usize,
    pub background_class: Background,
    pub clip: ClipSpec,
    pub fusion: FusionConfig,
    pub post: PostConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            num_classes: DEFAULT_NUM_CLASSES,
            background_class: Background::default(),
            clip: ClipSpec::default(),
            fusion: FusionConfig::default(),
            post: PostConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.trim_end())))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |e| CliError::validation("config", e);
        self.clip.validate().map_err(bad)?;
        self.post_params().validate(self.num_classes).map_err(bad)?;
        self.scenario_config().noise.validate(self.num_classes).map_err(bad)?;
        if let Some(rows) = &self.fusion.weights {
            if rows.len() != self.num_classes {
                return Err(CliError::Invalid(format!(
                    "config: {} weight rows for {} classes",
                    rows.len(),
                    self.num_classes
                )));
            }
        }
        Ok(())
    }

    pub fn post_params(&self) -> PostParams {
        let bg = self.background_class.0;
        let mut p = PostParams::for_classes(self.num_classes, bg);
        p.gap_max_s = self.post.gap_max_s;
        p.min_dur_s = self.post.min_dur_s;
        p.p_merge = self.post.p_merge;
        p.p_noise = self.post.p_noise;
        if let Some(req) = &self.post.required_classes {
            p.required_classes = req.clone();
        }
        p
    }

    pub fn scenario_config(&self) -> ScenarioConfig {
        let s = &self.synth;
        ScenarioConfig {
            num_classes: self.num_classes,
            background_class: self.background_class.0,
            video_len_s: s.video_len_s,
            min_duration_s: s.min_duration_s,
            max_duration_s: s.max_duration_s,
            min_gap_s: s.min_gap_s,
            max_gap_s: s.max_gap_s,
            ticks_per_s: s.ticks_per_s,
            clip_spec: self.clip,
            noise: s.noise.clone(),
        }
    }

    /// Resolves the view weights, renormalizing rows that do not sum to one.
    pub fn view_weights(&self) -> CliResult<ViewWeights> {
        let Some(rows) = &self.fusion.weights else {
            return Ok(default_view_weights(self.num_classes));
        };
        let (weights, adjusted) = ViewWeights::normalized(rows.clone())
            .map_err(|e| CliError::validation("view weights", e))?;
        for row in adjusted {
            log::warn!("view weight row {row} did not sum to 1 and was renormalized");
        }
        Ok(weights)
    }

    /// Replaces the weight rows with those from a JSON file holding an
    /// array of `[dashboard, rearview, rightside]` triples.
    pub fn set_weights(&mut self, arg: &WeightsArg) -> CliResult<()> {
        match arg {
            WeightsArg::Default => self.fusion.weights = None,
            WeightsArg::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::Read { path: path.clone(), source })?;
                let rows: Vec<[f64; 3]> = serde_json::from_str(&text)
                    .map_err(|e| CliError::parse(path, e.line(), e))?;
                self.fusion.weights = Some(rows);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c.post_params(), PostParams::default());
        assert_eq!(c.scenario_config(), ScenarioConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[post]\ngap_max = 3.0\n").is_err());
        assert!(RunConfig::from_toml("colour = 1\n").is_err());
        assert!(RunConfig::from_toml("[synth.noise]\neps = 0.1\n").is_err());
    }

    #[test]
    fn background_accepts_none_and_ids() {
        let c = RunConfig::from_toml("background_class = \"none\"\n").unwrap();
        assert_eq!(c.background_class, Background(None));
        assert_eq!(c.post_params().required_classes.len(), 16);
        let c = RunConfig::from_toml("background_class = 3\n").unwrap();
        assert_eq!(c.background_class, Background(Some(ClassId::new(3))));
        assert!(RunConfig::from_toml("background_class = \"zero\"\n").is_err());
    }

    #[test]
    fn thresholds_and_rows_are_overridable() {
        let text = "[post]\np_merge = 0.1\nmin_dur_s = 3.0\n[fusion]\nmode = \"max-confidence\"\n";
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.post_params().p_merge, 0.1);
        assert_eq!(c.post_params().min_dur_s, 3.0);
        assert_eq!(c.fusion.mode, FusionMode::MaxConfidence);
    }

    #[test]
    fn invalid_values_fail_validation() {
        let c = RunConfig::from_toml("[post]\np_noise = 1.5\n").unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 3);
        let c = RunConfig::from_toml("[fusion]\nweights = [[1.0, 0.0, 0.0]]\n").unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 3);
    }
}
