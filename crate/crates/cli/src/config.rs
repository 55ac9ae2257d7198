//! `--config` JSON file. Every key is optional; command-line flags win.
//!
//! ```json
//! {
//!   "thresholds": {
//!     "min_confidence": 0.0, "iou": 0.5,
//!     "stained": 0.02, "heavily_stained": 0.10,
//!     "recon_accept": 0.92, "recon_review": 0.85
//!   },
//!   "endpoints": { "oai": "https://...", "search": "https://...?search={query}" },
//!   "rate_limits": { "search_per_second": 2.0 },
//!   "search_fields": { "results": "/search", "iri": "/concepturi", "label": "/label" }
//! }
//! ```

use std::fs;
use std::path::Path;

use mskg_core::enrichment::ConditionThresholds;
use mskg_core::recon::{ReconThresholds, ResponseFields};
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub min_confidence: f64,
    pub iou: f64,
    pub stained: f64,
    pub heavily_stained: f64,
    pub recon_accept: f64,
    pub recon_review: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        let c = ConditionThresholds::default();
        let r = ReconThresholds::default();
        Thresholds {
            min_confidence: 0.0,
            iou: 0.5,
            stained: c.stained,
            heavily_stained: c.heavily_stained,
            recon_accept: r.accept,
            recon_review: r.review,
        }
    }
}

impl Thresholds {
    pub fn condition(&self) -> ConditionThresholds {
        ConditionThresholds { stained: self.stained, heavily_stained: self.heavily_stained }
    }

    pub fn recon(&self) -> ReconThresholds {
        ReconThresholds { accept: self.recon_accept, review: self.recon_review }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Endpoints {
    pub oai: Option<String>,
    pub search: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateLimits {
    pub search_per_second: f64,
}

impl Default for RateLimits {
    fn default() -> Self {
        RateLimits { search_per_second: 2.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub thresholds: Thresholds,
    pub endpoints: Endpoints,
    pub rate_limits: RateLimits,
    pub search_fields: Option<ResponseFields>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, String> {
        let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Config::from_json(&bytes).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn from_json(bytes: &[u8]) -> Result<Config, String> {
        let config: Config = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
        let t = &config.thresholds;
        let unit = [
            ("min_confidence", t.min_confidence),
            ("iou", t.iou),
            ("stained", t.stained),
            ("heavily_stained", t.heavily_stained),
            ("recon_accept", t.recon_accept),
            ("recon_review", t.recon_review),
        ];
        if let Some((name, v)) = unit.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            return Err(format!("thresholds.{name} = {v} is outside [0, 1]"));
        }
        if t.recon_review > t.recon_accept {
            return Err("thresholds.recon_review exceeds thresholds.recon_accept".into());
        }
        let rate = config.rate_limits.search_per_second;
        if rate.is_nan() || rate <= 0.0 {
            return Err("rate_limits.search_per_second must be positive".into());
        }
        Ok(config)
    }
}
