//! Run configuration: a TOML document with one section per concern.
//! Field names are frozen in `docs/format.md`.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use polydisk_core::automorphisms::{
    AngleSchedule, AutomorphismSequence, Permutation, RadialProfile, SequenceGenerator,
};
use polydisk_core::dsl::{parse_auto_dsl, parse_function_dsl};
use polydisk_core::engine::{EngineConfig, DEFAULT_K_MAX};
use polydisk_core::geometry::default_points_per_dim;
use polydisk_core::{CompactProbe, HoloFunction, TorusPoint};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    DiagnoseInner,
    GoodInner,
    ConstructUniversal,
    VerifyOrbit,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::DiagnoseInner => "diagnose-inner",
            Mode::GoodInner => "good-inner",
            Mode::ConstructUniversal => "construct-universal",
            Mode::VerifyOrbit => "verify-orbit",
        }
    }

    pub fn parse(name: &str) -> Option<Mode> {
        [
            Mode::DiagnoseInner,
            Mode::GoodInner,
            Mode::ConstructUniversal,
            Mode::VerifyOrbit,
        ]
        .into_iter()
        .find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub targets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Either a closed-form generator or an explicit list of `auto{...}` specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    /// `"generated"` or `"explicit"`.
    pub kind: String,
    /// Arguments of the direction `α/|α| ∈ 𝕋ⁿ`, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    /// `"converging"` (`|α^k| = 1 − rate/(k+1)`) or `"fixed"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<f64>,
    /// Constant angles, or the limit when `angle_amplitude` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_amplitude: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_cycle: Option<Vec<Vec<f64>>>,
    /// 1-based permutations applied cyclically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(default = "defaults::probe_radius")]
    pub probe_radius: f64,
    /// Points per ring and coordinate; 0 selects the dimension default.
    #[serde(default)]
    pub probe_points: usize,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::j_min")]
    pub j_min: u32,
    #[serde(default = "defaults::k_max")]
    pub k_max: u64,
    #[serde(default = "defaults::schur_depth")]
    pub schur_depth: usize,
    #[serde(default = "defaults::selection_horizon")]
    pub selection_horizon: u64,
    #[serde(default = "defaults::angle_tol")]
    pub angle_tol: f64,
    #[serde(default = "defaults::boundary_threshold")]
    pub boundary_threshold: f64,
    /// Seeded random points for the independent re-evaluation.
    #[serde(default = "defaults::random_points")]
    pub random_points: usize,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection {
            probe_radius: defaults::probe_radius(),
            probe_points: 0,
            epsilon: defaults::epsilon(),
            delta: defaults::delta(),
            j_min: defaults::j_min(),
            k_max: defaults::k_max(),
            schur_depth: defaults::schur_depth(),
            selection_horizon: defaults::selection_horizon(),
            angle_tol: defaults::angle_tol(),
            boundary_threshold: defaults::boundary_threshold(),
            random_points: defaults::random_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Functions to diagnose; empty means the targets.
    #[serde(default)]
    pub functions: Vec<String>,
    #[serde(default = "defaults::radii")]
    pub radii: Vec<f64>,
    /// Quadrature nodes per coordinate; 0 selects the dimension default.
    #[serde(default)]
    pub nodes: usize,
    #[serde(default = "defaults::clamp")]
    pub clamp: f64,
    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            functions: Vec::new(),
            radii: defaults::radii(),
            nodes: 0,
            clamp: defaults::clamp(),
            tolerance: defaults::tolerance(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// The function whose orbit is examined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    /// A construct-universal report supplying `x`, the indices, the targets
    /// and the sequence whenever they are not given here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_to: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "defaults::dir")]
    pub dir: String,
    #[serde(default = "defaults::report")]
    pub report: String,
    #[serde(default = "defaults::tables")]
    pub tables: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: defaults::dir(),
            report: defaults::report(),
            tables: defaults::tables(),
        }
    }
}

mod defaults {
    pub fn probe_radius() -> f64 {
        0.3
    }
    pub fn epsilon() -> f64 {
        0.05
    }
    pub fn delta() -> f64 {
        0.01
    }
    pub fn j_min() -> u32 {
        12
    }
    pub fn k_max() -> u64 {
        super::DEFAULT_K_MAX
    }
    pub fn schur_depth() -> usize {
        16
    }
    pub fn selection_horizon() -> u64 {
        1000
    }
    pub fn angle_tol() -> f64 {
        0.01
    }
    pub fn boundary_threshold() -> f64 {
        0.01
    }
    pub fn random_points() -> usize {
        10_000
    }
    pub fn radii() -> Vec<f64> {
        vec![0.9, 0.99, 0.999]
    }
    pub fn clamp() -> f64 {
        polydisk_core::inner_tools::DEFAULT_CLAMP
    }
    pub fn tolerance() -> f64 {
        0.02
    }
    pub fn dir() -> String {
        "out".into()
    }
    pub fn report() -> String {
        "report.json".into()
    }
    pub fn tables() -> bool {
        true
    }
}

/// Quadrature nodes per coordinate when the config leaves `nodes = 0`.
pub fn default_nodes(n: usize) -> usize {
    match n {
        1 => 512,
        2 => 64,
        _ => 16,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        cfg.normalize();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::ConfigNotFound(path.display().to_string()),
            _ => CliError::Io(format!("{}: {e}", path.display())),
        })?;
        Self::from_toml(&text)
    }

    /// Fills dimension-dependent defaults so the echoed config is explicit.
    pub fn normalize(&mut self) {
        if self.engine.probe_points == 0 {
            self.engine.probe_points = default_points_per_dim(self.dimension.max(1));
        }
        if self.diagnostics.nodes == 0 {
            self.diagnostics.nodes = default_nodes(self.dimension.max(1));
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        override_dir.map_or_else(|| PathBuf::from(&self.output.dir), Path::to_path_buf)
    }

    pub fn parse_functions(&self, texts: &[String]) -> Result<Vec<HoloFunction>, CliError> {
        texts
            .iter()
            .map(|t| parse_function_dsl(t, self.dimension).map_err(CliError::Config))
            .collect()
    }

    pub fn probe(&self) -> Result<CompactProbe, CliError> {
        CompactProbe::new(self.engine.probe_radius, self.engine.probe_points, self.dimension)
            .map_err(CliError::Config)
    }

    pub fn build_sequence(&self) -> Result<AutomorphismSequence, CliError> {
        let spec = self
            .sequence
            .as_ref()
            .ok_or_else(|| CliError::ConfigInvalid("missing [sequence] section".into()))?;
        spec.build(self.dimension)
    }

    pub fn engine_config(&self) -> Result<EngineConfig, CliError> {
        let sequence = self.build_sequence()?;
        let targets = self.parse_functions(&self.targets)?;
        let e = &self.engine;
        let cfg = EngineConfig {
            sequence,
            targets,
            probe: self.probe()?,
            epsilon: e.epsilon,
            delta: e.delta,
            j_min: e.j_min,
            k_max: e.k_max,
            schur_depth: e.schur_depth,
            selection_horizon: e.selection_horizon,
            angle_tol: e.angle_tol,
            boundary_threshold: e.boundary_threshold,
        };
        cfg.validate().map_err(CliError::Config)?;
        Ok(cfg)
    }
}

impl SequenceSpec {
    pub fn build(&self, n: usize) -> Result<AutomorphismSequence, CliError> {
        let invalid = |m: String| CliError::ConfigInvalid(format!("sequence: {m}"));
        match self.kind.as_str() {
            "explicit" => {
                let items = self
                    .items
                    .as_ref()
                    .ok_or_else(|| invalid("explicit sequences need `items`".into()))?;
                let autos = items
                    .iter()
                    .map(|t| parse_auto_dsl(t, n).map_err(CliError::Config))
                    .collect::<Result<Vec<_>, _>>()?;
                AutomorphismSequence::explicit(autos).map_err(CliError::Config)
            }
            "generated" => {
                let dir = self.direction.clone().unwrap_or_else(|| vec![0.0; n]);
                let direction = TorusPoint::new(dir.iter().map(|t| Complex64::from_polar(1.0, *t)).collect())
                    .map_err(CliError::Config)?;
                let radial = match self.radial.as_deref().unwrap_or("converging") {
                    "converging" => RadialProfile::Converging {
                        rate: self.rate.unwrap_or(1.0),
                    },
                    "fixed" => RadialProfile::Fixed {
                        modulus: self
                            .modulus
                            .ok_or_else(|| invalid("radial = \"fixed\" needs `modulus`".into()))?,
                    },
                    other => return Err(invalid(format!("unknown radial profile '{other}'"))),
                };
                let angles = match (&self.angle_cycle, &self.angle_amplitude) {
                    (Some(cycle), None) => AngleSchedule::Cyclic(cycle.clone()),
                    (None, Some(amp)) => AngleSchedule::Decaying {
                        limit: self.angles.clone().unwrap_or_else(|| vec![0.0; n]),
                        amplitude: amp.clone(),
                    },
                    (None, None) => AngleSchedule::Constant(self.angles.clone().unwrap_or_else(|| vec![0.0; n])),
                    (Some(_), Some(_)) => {
                        return Err(invalid("angle_cycle and angle_amplitude are exclusive".into()))
                    }
                };
                let perms = match &self.permutations {
                    Some(ps) => ps
                        .iter()
                        .map(|p| Permutation::from_one_based(p).map_err(CliError::Config))
                        .collect::<Result<Vec<_>, _>>()?,
                    None => vec![Permutation::identity(n)],
                };
                let generator =
                    SequenceGenerator::new(direction, radial, angles, perms).map_err(CliError::Config)?;
                Ok(AutomorphismSequence::Generated(generator))
            }
            other => Err(invalid(format!("unknown kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
dimension = 2
mode = "construct-universal"
targets = ["const 0.5+0i", "z[1] * z[2]"]

[sequence]
kind = "generated"
permutations = [[2, 1]]

[engine]
probe_radius = 0.25
"#;

    #[test]
    fn normalization_is_idempotent() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.engine.probe_points, 24);
        assert_eq!(cfg.diagnostics.nodes, 64);
        let text = cfg.to_toml();
        let again = RunConfig::from_toml(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_toml(), text);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = format!("{SAMPLE}\nbogus = 1\n");
        assert!(matches!(RunConfig::from_toml(&bad), Err(CliError::ConfigParse(_))));
        assert!(RunConfig::from_toml("dimension = 1\nmode = \"nope\"").is_err());
    }

    #[test]
    fn sequence_builds() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        let seq = cfg.build_sequence().unwrap();
        let phi = seq.get(3).unwrap();
        assert_eq!(phi.permutation().one_based(), vec![2, 1]);
        assert!((phi.factors()[0].alpha().re - 0.75).abs() < 1e-15);

        let explicit = SequenceSpec {
            kind: "explicit".into(),
            direction: None,
            radial: None,
            rate: None,
            modulus: None,
            angles: None,
            angle_amplitude: None,
            angle_cycle: None,
            permutations: None,
            items: Some(vec!["auto{p=[1], a=[0.5+0i], t=[0]}".into()]),
        };
        assert_eq!(explicit.build(1).unwrap().len(), Some(1));
    }
}
