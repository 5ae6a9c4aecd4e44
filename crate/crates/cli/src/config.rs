//! Experiment configuration.

use crate::error::{CliError, CliResult};
use adsmax_core::diagnostics::WidthParams;
use adsmax_core::entropy::{WindowSpec, MAX_WORD_RADIUS};
use adsmax_core::qdiff::QDiffSpec;
use adsmax_core::spectrum::MAX_WORD_LENGTH;
use adsmax_core::surface::{SurfaceKind, MAX_SUBDIVISION_LEVEL};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(rename = "type")]
    pub kind: SurfaceKind,
    pub subdivision: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QDiffConfig {
    pub zeros: Vec<(usize, u32)>,
}

fn default_exclusion() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayConfig {
    pub t_values: Vec<f64>,
    #[serde(default = "default_exclusion")]
    pub exclusion_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_iterations() -> usize {
    100
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        }
    }
}

/// `[r_min, r_max]` or a tagged [`WindowSpec`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowConfig {
    Pair([f64; 2]),
    Spec(WindowSpec),
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig::Spec(WindowSpec::default())
    }
}

impl WindowConfig {
    pub fn spec(&self) -> WindowSpec {
        match *self {
            WindowConfig::Pair([r_min, r_max]) => WindowSpec::Absolute { r_min, r_max },
            WindowConfig::Spec(w) => w,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub word_radius: usize,
    #[serde(default)]
    pub window: WindowConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub rep_l_path: PathBuf,
    pub rep_r_path: PathBuf,
    pub max_word_length: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub surface: Option<SurfaceConfig>,
    /// Omitted: four simple zeros at side midpoints on the octagon, none on the torus.
    #[serde(default)]
    pub qdiff: Option<QDiffConfig>,
    #[serde(default)]
    pub ray: Option<RayConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub entropy: Option<EntropyConfig>,
    #[serde(default)]
    pub width: WidthParams,
    #[serde(default)]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Raw bytes, parsed config, and the directory relative paths resolve against.
pub struct LoadedConfig {
    pub bytes: Vec<u8>,
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    pub file_name: String,
}

pub fn load(path: &Path) -> CliResult<LoadedConfig> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ExperimentConfig =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let file_name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let loaded = LoadedConfig {
        bytes,
        config,
        base_dir,
        file_name,
    };
    loaded.config.validate(&loaded.base_dir)?;
    Ok(loaded)
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn validate(&self, base_dir: &Path) -> CliResult<()> {
        if self.ray.is_none() && self.entropy.is_none() && self.spectrum.is_none() && self.surface.is_none() {
            return Err(bad("nothing to do: give a surface, ray, entropy or spectrum section"));
        }
        if (self.ray.is_some() || self.entropy.is_some() || self.qdiff.is_some()) && self.surface.is_none() {
            return Err(bad("ray, qdiff and entropy sections need a surface section"));
        }
        if let Some(s) = &self.surface {
            if s.subdivision > MAX_SUBDIVISION_LEVEL {
                return Err(bad(format!(
                    "subdivision {} exceeds the cap {MAX_SUBDIVISION_LEVEL}",
                    s.subdivision
                )));
            }
        }
        if let Some(r) = &self.ray {
            if r.t_values.is_empty() {
                return Err(bad("ray.t_values is empty"));
            }
            if r.t_values.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return Err(bad("ray.t_values must be finite and nonnegative"));
            }
            if r.t_values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(bad("ray.t_values must be strictly increasing"));
            }
            if !(r.exclusion_radius >= 0.0) {
                return Err(bad("ray.exclusion_radius must be nonnegative"));
            }
        }
        if !(self.solver.tolerance > 0.0) || !self.solver.tolerance.is_finite() {
            return Err(bad("solver.tolerance must be positive"));
        }
        if self.solver.max_iterations == 0 {
            return Err(bad("solver.max_iterations must be at least 1"));
        }
        if let Some(e) = &self.entropy {
            if e.word_radius > MAX_WORD_RADIUS {
                return Err(bad(format!(
                    "entropy.word_radius {} exceeds the cap {MAX_WORD_RADIUS}",
                    e.word_radius
                )));
            }
            match e.window.spec() {
                WindowSpec::Absolute { r_min, r_max } if !(0.0 <= r_min && r_min < r_max) => {
                    return Err(bad("entropy.window needs 0 <= r_min < r_max"))
                }
                WindowSpec::FrontierFraction { lower, upper } if !(0.0 <= lower && lower < upper && upper <= 1.0) => {
                    return Err(bad("entropy.window fractions need 0 <= lower < upper <= 1"))
                }
                _ => {}
            }
        }
        if !(self.width.c > 0.0) || !(self.width.delta > 0.0 && self.width.delta < 1.0) {
            return Err(bad("width needs C > 0 and 0 < delta < 1"));
        }
        if let Some(sp) = &self.spectrum {
            if sp.max_word_length == 0 || sp.max_word_length > MAX_WORD_LENGTH {
                return Err(bad(format!(
                    "spectrum.max_word_length must lie in 1..={MAX_WORD_LENGTH}"
                )));
            }
            for p in [&sp.rep_l_path, &sp.rep_r_path] {
                let full = base_dir.join(p);
                if !full.is_file() {
                    return Err(bad(format!("representation file {} not found", full.display())));
                }
            }
        }
        Ok(())
    }

    /// Zero divisor on a built surface.
    pub fn qdiff_spec(&self, surface: &adsmax_core::surface::DiscreteSurface) -> CliResult<QDiffSpec> {
        let spec = match &self.qdiff {
            Some(q) => QDiffSpec::new(q.zeros.clone()),
            None => match surface.kind {
                SurfaceKind::Octagon8 => QDiffSpec::new(
                    surface
                        .symmetric_simple_zeros()
                        .map_err(|e| bad(e.to_string()))?
                        .into_iter()
                        .map(|v| (v, 1))
                        .collect(),
                ),
                SurfaceKind::TorusValidation => QDiffSpec::new(vec![]),
            },
        };
        spec.validate(surface.genus, surface.vertex_count())
            .map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }
}
