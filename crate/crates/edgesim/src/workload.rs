//! Catalog and request-profile generation plus their on-disk text formats.
//!
//! A **catalog** fixes the files: each file has a whole-second duration drawn
//! uniformly from a range and is cut into ceil(duration / segment_duration)
//! segments whose byte sizes come from a configurable distribution. File id
//! equals initial popularity rank.
//!
//! A **request profile** pre-draws, per client, the sequence of (wait, file)
//! pairs the client will play during a run. Profiles are generated once per
//! (seed, rewatch factor) and shared by every run being compared — baseline,
//! each eviction policy, coding on and off — so traffic ratios between those
//! runs measure the system and not workload noise. A client's sequence stops
//! once the accumulated waits plus file playback durations exceed the
//! horizon: playback time is the floor on how fast a client can finish a
//! file, so the sequence always covers the horizon even if every byte were
//! delivered instantly.
//!
//! Both artifacts are line-oriented text with `# key=value` headers, written
//! deterministically so equal seeds produce byte-identical files.

use crate::config::{hex, ExperimentConfig};
use crate::error::SimError;
use crate::popularity::{PopularityDistribution, PopularityParams};
use crate::{ClientId, SegmentId, TimeMs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// Per-segment size distribution.
///
/// All families clamp to `[min_bytes, max_bytes]`, so a degenerate range
/// (min == max) turns any family into a constant size.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum SegmentSizeModel {
    /// Log-normal with the given arithmetic mean and log-space sigma.
    Lognormal {
        mean_bytes: u64,
        sigma: f64,
        min_bytes: u64,
        max_bytes: u64,
    },
    /// Uniform over the clamp range.
    Uniform { min_bytes: u64, max_bytes: u64 },
    /// Every segment exactly this size.
    Constant { bytes: u64 },
}

impl Default for SegmentSizeModel {
    /// 4 s of 5 Mbps video averages 2.5 MB; sizes spread log-normally and
    /// clamp to [0.5 MB, 6 MB].
    fn default() -> Self {
        SegmentSizeModel::Lognormal {
            mean_bytes: 2_500_000,
            sigma: 0.25,
            min_bytes: 500_000,
            max_bytes: 6_000_000,
        }
    }
}

impl SegmentSizeModel {
    pub fn validate(&self) -> Result<(), SimError> {
        match *self {
            SegmentSizeModel::Lognormal {
                mean_bytes,
                sigma,
                min_bytes,
                max_bytes,
            } => {
                if mean_bytes == 0 {
                    return Err(SimError::config("segment size mean_bytes must be positive"));
                }
                if !(sigma >= 0.0) {
                    return Err(SimError::config("segment size sigma must be non-negative"));
                }
                check_range(min_bytes, max_bytes)
            }
            SegmentSizeModel::Uniform {
                min_bytes,
                max_bytes,
            } => check_range(min_bytes, max_bytes),
            SegmentSizeModel::Constant { bytes } => {
                if bytes == 0 {
                    return Err(SimError::config("segment size bytes must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Draw one segment size in bytes.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            SegmentSizeModel::Lognormal {
                mean_bytes,
                sigma,
                min_bytes,
                max_bytes,
            } => {
                if sigma == 0.0 || min_bytes == max_bytes {
                    return (mean_bytes).clamp(min_bytes, max_bytes);
                }
                // Choose mu so the *untruncated* arithmetic mean equals
                // mean_bytes: E[lognormal] = exp(mu + sigma^2 / 2).
                let mu = (mean_bytes as f64).ln() - sigma * sigma / 2.0;
                let d = LogNormal::new(mu, sigma).expect("validated params");
                (d.sample(rng).round() as u64).clamp(min_bytes, max_bytes)
            }
            SegmentSizeModel::Uniform {
                min_bytes,
                max_bytes,
            } => rng.gen_range(min_bytes..=max_bytes),
            SegmentSizeModel::Constant { bytes } => bytes,
        }
    }
}

fn check_range(min_bytes: u64, max_bytes: u64) -> Result<(), SimError> {
    if min_bytes == 0 || min_bytes > max_bytes {
        return Err(SimError::config(
            "segment size range must satisfy 0 < min_bytes <= max_bytes",
        ));
    }
    Ok(())
}

/// One file of the catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSpec {
    /// 1-based id; equal to initial popularity rank.
    pub id: u32,
    /// Playback duration in whole seconds.
    pub duration_s: u32,
    /// Size of each segment, index 0 holding segment 1.
    pub segment_sizes: Vec<u64>,
}

/// Maps segments of a fixed catalog to dense ordinals `0..total_segments`,
/// letting per-segment state live in flat arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentIndex {
    offsets: Vec<u32>,
    total: u32,
}

impl SegmentIndex {
    fn new(files: &[FileSpec]) -> Self {
        let mut offsets = Vec::with_capacity(files.len());
        let mut total = 0u32;
        for f in files {
            offsets.push(total);
            total += f.segment_sizes.len() as u32;
        }
        Self { offsets, total }
    }

    pub fn ordinal(&self, seg: SegmentId) -> usize {
        (self.offsets[(seg.file - 1) as usize] + seg.index - 1) as usize
    }

    pub fn total_segments(&self) -> usize {
        self.total as usize
    }
}

/// The full set of files a station serves.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    files: Vec<FileSpec>,
    segment_duration_ms: u64,
    seed: u64,
    index: SegmentIndex,
}

impl Catalog {
    /// Draw a catalog from the configured distributions.
    pub fn generate(cfg: &ExperimentConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let seg_ms = cfg.segment_duration_ms();
        let [lo, hi] = cfg.file_duration_s;
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.catalog_seed);
        let mut files = Vec::with_capacity(cfg.n_files as usize);
        for id in 1..=cfg.n_files {
            let duration_s: u32 = rng.gen_range(lo..=hi);
            let n_segments = div_ceil(duration_s as u64 * 1000, seg_ms).max(1);
            let segment_sizes = (0..n_segments)
                .map(|_| cfg.segment_size.sample(&mut rng))
                .collect();
            files.push(FileSpec {
                id,
                duration_s,
                segment_sizes,
            });
        }
        Self::from_files(files, seg_ms, cfg.catalog_seed)
    }

    /// Build a catalog from explicit files (parsing, tests, hand-made sets).
    pub fn from_files(
        files: Vec<FileSpec>,
        segment_duration_ms: u64,
        seed: u64,
    ) -> Result<Self, SimError> {
        if files.is_empty() {
            return Err(SimError::config("catalog must contain at least one file"));
        }
        if segment_duration_ms == 0 {
            return Err(SimError::config("segment duration must be positive"));
        }
        for (i, f) in files.iter().enumerate() {
            if f.id != i as u32 + 1 {
                return Err(SimError::config(format!(
                    "file ids must be contiguous from 1; position {i} has id {}",
                    f.id
                )));
            }
            if f.segment_sizes.is_empty() {
                return Err(SimError::config(format!("file {} has no segments", f.id)));
            }
            if f.segment_sizes.iter().any(|&s| s == 0) {
                return Err(SimError::config(format!(
                    "file {} has a zero-byte segment",
                    f.id
                )));
            }
        }
        let index = SegmentIndex::new(&files);
        Ok(Self {
            files,
            segment_duration_ms,
            seed,
            index,
        })
    }

    pub fn n_files(&self) -> u32 {
        self.files.len() as u32
    }

    pub fn files(&self) -> &[FileSpec] {
        &self.files
    }

    pub fn file(&self, id: u32) -> &FileSpec {
        &self.files[(id - 1) as usize]
    }

    pub fn n_segments(&self, file: u32) -> u32 {
        self.file(file).segment_sizes.len() as u32
    }

    pub fn duration_ms(&self, file: u32) -> u64 {
        self.file(file).duration_s as u64 * 1000
    }

    pub fn segment_bytes(&self, seg: SegmentId) -> u64 {
        self.file(seg.file).segment_sizes[(seg.index - 1) as usize]
    }

    /// Sum of all segment sizes; cache capacities are fractions of this.
    pub fn total_bytes(&self) -> u64 {
        self.files
            .iter()
            .map(|f| f.segment_sizes.iter().sum::<u64>())
            .sum()
    }

    pub fn segment_index(&self) -> &SegmentIndex {
        &self.index
    }

    /// Canonical text form; equal catalogs render byte-identically.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# edgesim catalog v1\n");
        let _ = writeln!(
            out,
            "# n_files={} segment_duration_ms={} seed={}",
            self.files.len(),
            self.segment_duration_ms,
            self.seed
        );
        out.push_str("# columns: file_id,duration_s,segment_bytes...\n");
        for f in &self.files {
            let _ = write!(out, "{},{}", f.id, f.duration_s);
            for s in &f.segment_sizes {
                let _ = write!(out, ",{s}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self, SimError> {
        let mut header = HeaderFields::parse(text, path, "# edgesim catalog v1")?;
        let segment_duration_ms = header.take_u64("segment_duration_ms")?;
        let seed = header.take_u64("seed")?;
        let n_files = header.take_u64("n_files")? as usize;
        let mut files = Vec::with_capacity(n_files);
        for (lineno, line) in data_lines(text) {
            let mut cols = line.split(',');
            let id = parse_col::<u32>(&mut cols, path, lineno, "file_id")?;
            let duration_s = parse_col::<u32>(&mut cols, path, lineno, "duration_s")?;
            let segment_sizes: Vec<u64> = cols
                .map(|c| {
                    c.parse::<u64>().map_err(|_| SimError::Parse {
                        path: path.to_string(),
                        line: lineno,
                        msg: format!("bad segment size {c:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            files.push(FileSpec {
                id,
                duration_s,
                segment_sizes,
            });
        }
        if files.len() != n_files {
            return Err(SimError::config(format!(
                "{path}: header says {n_files} files, found {}",
                files.len()
            )));
        }
        Self::from_files(files, segment_duration_ms, seed)
    }

    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        hex(&h.finalize())
    }

    pub fn write(&self, path: &Path) -> Result<(), SimError> {
        crate::fsutil::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::io(path.display().to_string(), e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

pub(crate) fn div_ceil(a: u64, b: u64) -> u64 {
    (a + b - 1) / b
}

/// One pre-drawn request: wait this long after the previous file finishes,
/// then stream this file start to end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileEntry {
    pub file: u32,
    pub wait_ms: TimeMs,
}

/// Pre-drawn request sequences for every client, plus the parameters and
/// catalog identity they were drawn under.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestProfile {
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub q: f64,
    pub mean_wait_ms: u64,
    pub horizon_ms: u64,
    pub catalog_sha256: String,
    /// Outer index: client id.
    pub entries: Vec<Vec<ProfileEntry>>,
}

impl RequestProfile {
    /// Draw request sequences for `cfg.n_clients` clients at rewatch factor
    /// `alpha`. Each client gets an independent RNG stream derived from
    /// (seed, client), so sequences don't shift when the client count
    /// changes.
    pub fn generate(
        catalog: &Catalog,
        cfg: &ExperimentConfig,
        alpha: f64,
        seed: u64,
    ) -> Result<Self, SimError> {
        let params = PopularityParams {
            n_files: catalog.n_files(),
            gamma: cfg.gamma,
            q: cfg.q,
            alpha,
        };
        params.validate()?;
        let mean_wait_ms = cfg.mean_wait_ms();
        let horizon_ms = cfg.horizon_ms();
        if mean_wait_ms == 0 || horizon_ms == 0 {
            return Err(SimError::config("mean wait and horizon must be positive"));
        }
        let wait_dist = Exp::new(1.0 / cfg.mean_wait_s).expect("positive mean");
        let mut entries = Vec::with_capacity(cfg.n_clients as usize);
        for client in 0..cfg.n_clients {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(client as u64 + 1);
            let mut dist = PopularityDistribution::mzipf(&params)?;
            let mut seq = Vec::new();
            let mut covered_ms: u64 = 0;
            // Keep drawing until the waits plus playback durations pass the
            // horizon: a client cannot finish a file faster than real-time
            // playback, so this sequence lasts the whole horizon no matter
            // how fast segments are delivered.
            while covered_ms <= horizon_ms {
                let wait_ms = (wait_dist.sample(&mut rng) * 1000.0).round() as u64;
                let file = dist.sample_file(&mut rng);
                dist.apply_rewatch_update(file, &params);
                seq.push(ProfileEntry { file, wait_ms });
                covered_ms += wait_ms + catalog.duration_ms(file);
            }
            entries.push(seq);
        }
        Ok(Self {
            seed,
            alpha,
            gamma: cfg.gamma,
            q: cfg.q,
            mean_wait_ms,
            horizon_ms,
            catalog_sha256: catalog.sha256(),
            entries,
        })
    }

    pub fn n_clients(&self) -> u32 {
        self.entries.len() as u32
    }

    /// Every segment the client will request, in request order: the
    /// concatenation of each profiled file's segments. This is the "future"
    /// the clairvoyant eviction policy consults.
    pub fn future_segments(&self, catalog: &Catalog, client: ClientId) -> Vec<SegmentId> {
        let mut seq = Vec::new();
        for e in &self.entries[client as usize] {
            for index in 1..=catalog.n_segments(e.file) {
                seq.push(SegmentId::new(e.file, index));
            }
        }
        seq
    }

    /// Error if this profile was generated against a different catalog.
    pub fn verify_catalog(&self, catalog: &Catalog) -> Result<(), SimError> {
        let have = catalog.sha256();
        if have != self.catalog_sha256 {
            return Err(SimError::StaleProfile(format!(
                "profile was generated against catalog {} but the supplied catalog hashes to {}",
                &self.catalog_sha256[..12.min(self.catalog_sha256.len())],
                &have[..12]
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# edgesim profile v1\n");
        let _ = writeln!(
            out,
            "# seed={} alpha={} n_clients={} gamma={} q={} mean_wait_ms={} horizon_ms={}",
            self.seed,
            self.alpha,
            self.entries.len(),
            self.gamma,
            self.q,
            self.mean_wait_ms,
            self.horizon_ms
        );
        let _ = writeln!(out, "# catalog_sha256={}", self.catalog_sha256);
        out.push_str("# columns: client_id,seq_no,file_id,wait_ms\n");
        for (client, seq) in self.entries.iter().enumerate() {
            for (seq_no, e) in seq.iter().enumerate() {
                let _ = writeln!(out, "{client},{seq_no},{},{}", e.file, e.wait_ms);
            }
        }
        out
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self, SimError> {
        let mut header = HeaderFields::parse(text, path, "# edgesim profile v1")?;
        let seed = header.take_u64("seed")?;
        let alpha = header.take_f64("alpha")?;
        let n_clients = header.take_u64("n_clients")? as usize;
        let gamma = header.take_f64("gamma")?;
        let q = header.take_f64("q")?;
        let mean_wait_ms = header.take_u64("mean_wait_ms")?;
        let horizon_ms = header.take_u64("horizon_ms")?;
        let catalog_sha256 = header.take_string("catalog_sha256")?;
        let mut entries: Vec<Vec<ProfileEntry>> = vec![Vec::new(); n_clients];
        for (lineno, line) in data_lines(text) {
            let mut cols = line.split(',');
            let client = parse_col::<usize>(&mut cols, path, lineno, "client_id")?;
            let seq_no = parse_col::<usize>(&mut cols, path, lineno, "seq_no")?;
            let file = parse_col::<u32>(&mut cols, path, lineno, "file_id")?;
            let wait_ms = parse_col::<u64>(&mut cols, path, lineno, "wait_ms")?;
            if client >= n_clients {
                return Err(SimError::Parse {
                    path: path.to_string(),
                    line: lineno,
                    msg: format!("client_id {client} out of range (n_clients={n_clients})"),
                });
            }
            if seq_no != entries[client].len() {
                return Err(SimError::Parse {
                    path: path.to_string(),
                    line: lineno,
                    msg: format!(
                        "seq_no {seq_no} out of order for client {client} (expected {})",
                        entries[client].len()
                    ),
                });
            }
            entries[client].push(ProfileEntry { file, wait_ms });
        }
        if entries.iter().any(|seq| seq.is_empty()) {
            return Err(SimError::config(format!(
                "{path}: every client needs at least one request"
            )));
        }
        Ok(Self {
            seed,
            alpha,
            gamma,
            q,
            mean_wait_ms,
            horizon_ms,
            catalog_sha256,
            entries,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), SimError> {
        crate::fsutil::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::io(path.display().to_string(), e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

/// `# key=value` header parsing shared by the text formats.
struct HeaderFields {
    fields: HashMap<String, String>,
    path: String,
}

impl HeaderFields {
    fn parse(text: &str, path: &str, magic: &str) -> Result<Self, SimError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(magic) {
            return Err(SimError::Parse {
                path: path.to_string(),
                line: 1,
                msg: format!("expected header {magic:?}"),
            });
        }
        let mut fields = HashMap::new();
        for line in lines {
            let Some(rest) = line.strip_prefix('#') else {
                break;
            };
            for token in rest.split_whitespace() {
                if let Some((k, v)) = token.split_once('=') {
                    fields.insert(k.to_string(), v.to_string());
                }
            }
        }
        Ok(Self {
            fields,
            path: path.to_string(),
        })
    }

    fn take_string(&mut self, key: &str) -> Result<String, SimError> {
        self.fields.remove(key).ok_or_else(|| SimError::Parse {
            path: self.path.clone(),
            line: 1,
            msg: format!("missing header field {key}"),
        })
    }

    fn take_u64(&mut self, key: &str) -> Result<u64, SimError> {
        let raw = self.take_string(key)?;
        raw.parse().map_err(|_| SimError::Parse {
            path: self.path.clone(),
            line: 1,
            msg: format!("bad {key}={raw:?}"),
        })
    }

    fn take_f64(&mut self, key: &str) -> Result<f64, SimError> {
        let raw = self.take_string(key)?;
        raw.parse().map_err(|_| SimError::Parse {
            path: self.path.clone(),
            line: 1,
            msg: format!("bad {key}={raw:?}"),
        })
    }
}

/// Non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_col<'a, T: std::str::FromStr>(
    cols: &mut impl Iterator<Item = &'a str>,
    path: &str,
    line: usize,
    name: &str,
) -> Result<T, SimError> {
    let raw = cols.next().ok_or_else(|| SimError::Parse {
        path: path.to_string(),
        line,
        msg: format!("missing column {name}"),
    })?;
    raw.parse().map_err(|_| SimError::Parse {
        path: path.to_string(),
        line,
        msg: format!("bad {name}={raw:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn test_config() -> ExperimentConfig {
        ExperimentConfig::default()
    }

    #[test]
    fn segment_count_is_duration_over_segment_length_rounded_up() {
        let mut cfg = test_config();
        cfg.file_duration_s = [120, 120];
        cfg.n_files = 3;
        let cat = Catalog::generate(&cfg).unwrap();
        for f in cat.files() {
            assert_eq!(f.segment_sizes.len(), 30, "120 s / 4 s = 30 segments");
        }
        cfg.file_duration_s = [121, 121];
        let cat = Catalog::generate(&cfg).unwrap();
        assert_eq!(cat.n_segments(1), 31, "partial trailing segment counts");
        cfg.file_duration_s = [300, 300];
        let cat = Catalog::generate(&cfg).unwrap();
        assert_eq!(cat.n_segments(1), 75, "300 s / 4 s = 75 segments");
    }

    #[test]
    fn degenerate_size_range_collapses_to_constant() {
        let mut cfg = test_config();
        cfg.segment_size = SegmentSizeModel::Lognormal {
            mean_bytes: 2_500_000,
            sigma: 0.25,
            min_bytes: 2_500_000,
            max_bytes: 2_500_000,
        };
        cfg.n_files = 5;
        let cat = Catalog::generate(&cfg).unwrap();
        for f in cat.files() {
            assert!(f.segment_sizes.iter().all(|&s| s == 2_500_000));
        }
    }

    #[test]
    fn lognormal_sizes_respect_clamp_and_mean() {
        let cfg = test_config();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 20_000;
        let mut total = 0u64;
        for _ in 0..n {
            let s = cfg.segment_size.sample(&mut rng);
            assert!((500_000..=6_000_000).contains(&s));
            total += s;
        }
        let mean = total as f64 / n as f64;
        assert!(
            (mean - 2_500_000.0).abs() < 100_000.0,
            "sample mean {mean} too far from 2.5 MB"
        );
    }

    #[test]
    fn catalog_generation_is_deterministic_in_seed() {
        let cfg = test_config();
        let a = Catalog::generate(&cfg).unwrap();
        let b = Catalog::generate(&cfg).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.sha256(), b.sha256());
        let mut cfg2 = cfg.clone();
        cfg2.catalog_seed += 1;
        let c = Catalog::generate(&cfg2).unwrap();
        assert_ne!(a.sha256(), c.sha256());
    }

    #[test]
    fn catalog_text_round_trips() {
        let cat = Catalog::generate(&test_config()).unwrap();
        let text = cat.to_text();
        let back = Catalog::from_text(&text, "mem").unwrap();
        assert_eq!(cat, back);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn segment_index_is_dense_and_ordered() {
        let cat = Catalog::generate(&test_config()).unwrap();
        let idx = cat.segment_index();
        let mut seen = vec![false; idx.total_segments()];
        for f in cat.files() {
            for s in 1..=f.segment_sizes.len() as u32 {
                let o = idx.ordinal(SegmentId::new(f.id, s));
                assert!(!seen[o], "ordinal reused");
                seen[o] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn profile_waits_have_the_configured_mean() {
        // Gather ~10^4 waits; the sample mean of Exp(1/5 s) over that many
        // draws stays within [4.85, 5.15] s.
        let mut cfg = test_config();
        cfg.n_files = 5;
        cfg.file_duration_s = [120, 120];
        cfg.alphas = vec![1.0];
        cfg.horizon_s = 130_000.0; // ~1040 entries per client
        cfg.n_clients = 10;
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 1.0, 42).unwrap();
        let waits: Vec<u64> = prof
            .entries
            .iter()
            .flatten()
            .map(|e| e.wait_ms)
            .collect();
        assert!(waits.len() >= 10_000, "need enough draws, got {}", waits.len());
        let mean_s = waits.iter().sum::<u64>() as f64 / waits.len() as f64 / 1000.0;
        assert!(
            (4.85..=5.15).contains(&mean_s),
            "wait sample mean {mean_s} s outside [4.85, 5.15]"
        );
    }

    #[test]
    fn profile_covers_horizon_per_client() {
        let cfg = test_config();
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 0.5, 3).unwrap();
        for seq in &prof.entries {
            let covered: u64 = seq
                .iter()
                .map(|e| e.wait_ms + cat.duration_ms(e.file))
                .sum();
            assert!(
                covered > cfg.horizon_ms(),
                "sequence must outlast the horizon even at playback speed"
            );
        }
    }

    #[test]
    fn alpha_zero_profile_never_repeats_a_file() {
        let cfg = test_config();
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 0.0, 9).unwrap();
        for (client, seq) in prof.entries.iter().enumerate() {
            let mut seen = HashSet::new();
            for e in seq {
                assert!(
                    seen.insert(e.file),
                    "client {client} re-requested file {} at alpha=0",
                    e.file
                );
            }
        }
    }

    #[test]
    fn profile_generation_is_deterministic_and_seed_sensitive() {
        let cfg = test_config();
        let cat = Catalog::generate(&cfg).unwrap();
        let a = RequestProfile::generate(&cat, &cfg, 0.5, 1).unwrap();
        let b = RequestProfile::generate(&cat, &cfg, 0.5, 1).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = RequestProfile::generate(&cat, &cfg, 0.5, 2).unwrap();
        assert_ne!(a.to_text(), c.to_text());
        let d = RequestProfile::generate(&cat, &cfg, 0.75, 1).unwrap();
        assert_ne!(a.to_text(), d.to_text(), "alpha shapes the sequence");
    }

    #[test]
    fn per_client_streams_are_stable_under_client_count() {
        let mut cfg = test_config();
        cfg.n_clients = 3;
        let cat = Catalog::generate(&cfg).unwrap();
        let small = RequestProfile::generate(&cat, &cfg, 0.5, 1).unwrap();
        cfg.n_clients = 5;
        let large = RequestProfile::generate(&cat, &cfg, 0.5, 1).unwrap();
        for c in 0..3 {
            assert_eq!(
                small.entries[c], large.entries[c],
                "existing clients' sequences must not shift when clients are added"
            );
        }
    }

    #[test]
    fn profile_text_round_trips() {
        let cfg = test_config();
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 0.25, 4).unwrap();
        let text = prof.to_text();
        let back = RequestProfile::from_text(&text, "mem").unwrap();
        assert_eq!(prof, back);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn profile_rejects_wrong_catalog() {
        let cfg = test_config();
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 0.25, 4).unwrap();
        assert!(prof.verify_catalog(&cat).is_ok());
        let mut cfg2 = cfg.clone();
        cfg2.catalog_seed += 1;
        let other = Catalog::generate(&cfg2).unwrap();
        assert!(matches!(
            prof.verify_catalog(&other),
            Err(SimError::StaleProfile(_))
        ));
    }

    #[test]
    fn future_segments_concatenate_profiled_files() {
        let mut cfg = test_config();
        cfg.n_files = 4;
        cfg.n_clients = 1;
        cfg.file_duration_s = [8, 8]; // 2 segments each
        cfg.horizon_s = 30.0;
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 1.0, 2).unwrap();
        let fut = prof.future_segments(&cat, 0);
        let mut expect = Vec::new();
        for e in &prof.entries[0] {
            expect.push(SegmentId::new(e.file, 1));
            expect.push(SegmentId::new(e.file, 2));
        }
        assert_eq!(fut, expect);
    }

    #[test]
    fn malformed_profile_lines_are_reported_with_position() {
        let cfg = test_config();
        let cat = Catalog::generate(&cfg).unwrap();
        let prof = RequestProfile::generate(&cat, &cfg, 0.5, 1).unwrap();
        let text = prof.to_text().replace("0,0,", "0,7,"); // seq_no gap
        let err = RequestProfile::from_text(&text, "mem").unwrap_err();
        assert!(matches!(err, SimError::Parse { .. }), "got {err:?}");
    }
}
