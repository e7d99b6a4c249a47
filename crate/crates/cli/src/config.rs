//! Experiment configuration documents.

use bergman_toeplitz::quad::QuadratureSpec;
use bergman_toeplitz::symbols::SymbolMeasure;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Versioned experiment configuration. Unknown keys are rejected so typos
/// fail fast instead of silently running defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: String,
    /// Inline measure document (same schema as measure files).
    #[serde(default)]
    pub symbol: Option<serde_json::Value>,
    /// Path to a measure document; exclusive with `symbol`.
    #[serde(default)]
    pub symbol_file: Option<PathBuf>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub alpha: Option<u32>,
    #[serde(default)]
    pub beta: Option<u32>,
    #[serde(default)]
    pub j: Option<u32>,
    #[serde(default)]
    pub basis_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default)]
    pub radial: Option<usize>,
    #[serde(default)]
    pub angular: Option<usize>,
    #[serde(default)]
    pub line_nodes: Option<usize>,
    #[serde(default)]
    pub panel_span: Option<u32>,
}

impl ExperimentConfig {
    pub fn defaults_for(name: &str) -> Self {
        Self {
            schema_version: 1,
            experiment: name.to_string(),
            symbol: None,
            symbol_file: None,
            k: None,
            gamma: None,
            alpha: None,
            beta: None,
            j: None,
            basis_sizes: None,
            quadrature: None,
            out_dir: None,
            seed: None,
        }
    }

    /// Parse a config file; errors carry serde's line/column diagnostics.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if cfg.schema_version != 1 {
            return Err(format!(
                "{}: unsupported schema_version {} (expected 1)",
                path.display(),
                cfg.schema_version
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.symbol.is_some() && self.symbol_file.is_some() {
            return Err("config: give either `symbol` or `symbol_file`, not both".into());
        }
        if let Some(f) = &self.symbol_file {
            if !f.exists() {
                return Err(format!(
                    "config: symbol_file {} does not exist",
                    f.display()
                ));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(format!("config: gamma = {g} outside (0, 1)"));
            }
        }
        if let Some(sizes) = &self.basis_sizes {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err("config: basis_sizes must be non-empty positive".into());
            }
        }
        Ok(())
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let mut spec = QuadratureSpec::default();
        if let Some(q) = &self.quadrature {
            if let Some(v) = q.radial {
                spec.radial = v;
            }
            if let Some(v) = q.angular {
                spec.angular = v;
            }
            if let Some(v) = q.line_nodes {
                spec.line_nodes = v;
            }
            if let Some(v) = q.panel_span {
                spec.panel_span = v;
            }
        }
        spec
    }

    /// Resolve the measure override, if any.
    pub fn measure(&self) -> Result<Option<SymbolMeasure>, String> {
        if let Some(inline) = &self.symbol {
            let mu = SymbolMeasure::from_json(&inline.to_string()).map_err(|e| e.to_string())?;
            return Ok(Some(mu));
        }
        if let Some(path) = &self.symbol_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let mu =
                SymbolMeasure::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            return Ok(Some(mu));
        }
        Ok(None)
    }
}
