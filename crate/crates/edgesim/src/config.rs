//! Experiment configuration: one TOML file drives catalog generation,
//! profile generation, single runs, and sweeps.
//!
//! Every key has a default matching the reference scenario (10 clients on a
//! 24 Mbps shared channel, 100 files of 2-5 minutes cut into 4 s segments,
//! MZipf(q=10, gamma=2.5) popularity, 5 s mean think time, 3 h request
//! horizon), so an empty file is a valid configuration.

use crate::cache::Policy;
use crate::error::SimError;
use crate::workload::SegmentSizeModel;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    // Catalog
    /// Number of files; file id equals initial popularity rank (1-based).
    pub n_files: u32,
    /// Uniform range of whole-second file durations, inclusive.
    pub file_duration_s: [u32; 2],
    /// Segment length in seconds of video.
    pub segment_duration_s: f64,
    /// Per-segment size distribution.
    pub segment_size: SegmentSizeModel,
    /// Seed for catalog generation (one catalog is shared by a whole sweep).
    pub catalog_seed: u64,

    // Popularity
    /// MZipf skew exponent.
    pub gamma: f64,
    /// MZipf plateau factor.
    pub q: f64,
    /// Rewatch factors to sweep.
    pub alphas: Vec<f64>,

    // Workload
    /// Mean of the exponential wait between finishing one file and requesting
    /// the next.
    pub mean_wait_s: f64,
    /// Active-requesting horizon that bounds each generated profile.
    pub horizon_s: f64,

    // System
    /// Number of clients sharing the channel.
    pub n_clients: u32,
    /// Broadcast channel rate in bits per second.
    pub link_rate_bps: u64,
    /// Cache sizes to sweep, as fractions of total catalog bytes.
    pub cache_fractions: Vec<f64>,
    /// Eviction policies to sweep.
    pub policies: Vec<Policy>,
    /// Coding variants to evaluate (false = plain FIFO, true = coded merges).
    pub coding: Vec<bool>,
    /// Fixed delay added to every transmission (fetch over the backhaul).
    pub backhaul_delay_s: f64,

    // Experiment bookkeeping
    /// One complete set of profiles and runs is produced per seed.
    pub seeds: Vec<u64>,
    /// Where generated artifacts land.
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_files: 100,
            file_duration_s: [120, 300],
            segment_duration_s: 4.0,
            segment_size: SegmentSizeModel::default(),
            catalog_seed: 7,
            gamma: 2.5,
            q: 10.0,
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            mean_wait_s: 5.0,
            horizon_s: 10800.0,
            n_clients: 10,
            link_rate_bps: 24_000_000,
            cache_fractions: vec![0.05, 0.10, 0.15],
            policies: vec![Policy::Lru, Policy::Lfu, Policy::Belady, Policy::LfuIndex],
            coding: vec![false, true],
            backhaul_delay_s: 0.0,
            seeds: vec![1, 2, 3],
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Parse a TOML file; keys not present fall back to defaults.
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::io(path.display().to_string(), e))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| SimError::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_files == 0 || self.n_files > 65_535 {
            return Err(SimError::config("n_files must be in 1..=65535"));
        }
        let [lo, hi] = self.file_duration_s;
        if lo == 0 || lo > hi {
            return Err(SimError::config(
                "file_duration_s must be a non-empty positive range [lo, hi]",
            ));
        }
        if !(self.segment_duration_s > 0.0) {
            return Err(SimError::config("segment_duration_s must be positive"));
        }
        self.segment_size.validate()?;
        if !(self.gamma > 0.0) {
            return Err(SimError::config("gamma must be positive"));
        }
        if !(self.q >= 0.0) {
            return Err(SimError::config("q must be non-negative"));
        }
        if self.alphas.is_empty() {
            return Err(SimError::config("alphas must not be empty"));
        }
        for &a in &self.alphas {
            if !(0.0..=1.0).contains(&a) {
                return Err(SimError::config(format!("alpha {a} outside [0, 1]")));
            }
        }
        if !(self.mean_wait_s > 0.0) {
            return Err(SimError::config("mean_wait_s must be positive"));
        }
        if !(self.horizon_s > 0.0) {
            return Err(SimError::config("horizon_s must be positive"));
        }
        if self.n_clients == 0 {
            return Err(SimError::config("n_clients must be at least 1"));
        }
        if self.link_rate_bps == 0 {
            return Err(SimError::config("link_rate_bps must be positive"));
        }
        if self.cache_fractions.is_empty() {
            return Err(SimError::config("cache_fractions must not be empty"));
        }
        for &m in &self.cache_fractions {
            if !(0.0..=1.0).contains(&m) {
                return Err(SimError::config(format!(
                    "cache fraction {m} outside [0, 1]"
                )));
            }
        }
        if self.policies.is_empty() {
            return Err(SimError::config("policies must not be empty"));
        }
        if self.coding.is_empty() {
            return Err(SimError::config("coding must not be empty"));
        }
        if !(self.backhaul_delay_s >= 0.0) {
            return Err(SimError::config("backhaul_delay_s must be non-negative"));
        }
        if self.seeds.is_empty() {
            return Err(SimError::config("seeds must not be empty"));
        }
        Ok(())
    }

    /// Stable content hash of the resolved configuration, used to tie sweep
    /// outputs to the configuration that produced them.
    pub fn sha256(&self) -> String {
        let canon = toml::to_string(self).expect("config always serializes");
        let mut h = Sha256::new();
        h.update(canon.as_bytes());
        hex(&h.finalize())
    }

    pub fn mean_wait_ms(&self) -> u64 {
        (self.mean_wait_s * 1000.0).round() as u64
    }

    pub fn horizon_ms(&self) -> u64 {
        (self.horizon_s * 1000.0).round() as u64
    }

    pub fn backhaul_delay_ms(&self) -> u64 {
        (self.backhaul_delay_s * 1000.0).round() as u64
    }

    pub fn segment_duration_ms(&self) -> u64 {
        (self.segment_duration_s * 1000.0).round() as u64
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
