//! Whole-grid experiment driver.
//!
//! One sweep covers every (rewatch factor, cache fraction, policy, seed)
//! cell of the configured grid. Per (alpha, seed) it generates one request
//! profile and replays it through the engine three ways — no cache at all,
//! cache without coding, and cache with coding — sharing the no-cache
//! baseline across cache sizes and policies, since nothing about it depends
//! on either. Each cell's measures land in a small row file, and the sweep
//! finishes by writing the combined results table, the seed-aggregated
//! table, and a manifest of everything it produced.
//!
//! Cells are independent and restartable: every row file embeds the hash of
//! the config it was computed under, and a rerun skips any cell whose row
//! file still verifies. An interrupted sweep therefore resumes where it
//! stopped and ends in byte-identical tables, and a config change quietly
//! invalidates all stale rows. Groups may execute on several worker
//! threads; each simulation stays sequential and owns its state, and all
//! files are written atomically, so parallel cells never interleave.

use crate::cache::Policy;
use crate::config::{self, ExperimentConfig};
use crate::engine::{self, RunOutput, SimConfig};
use crate::error::SimError;
use crate::fsutil::{self, write_if_changed};
use crate::metrics::{self, CellRow};
use crate::workload::{Catalog, RequestProfile};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Knobs of one sweep invocation; everything else comes from the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Worker threads for cell execution; `None` or `Some(0)` picks the
    /// runtime default. Thread count never affects the output bytes.
    pub jobs: Option<usize>,
}

/// One generated request profile, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestProfile {
    pub alpha: f64,
    pub seed: u64,
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

/// One sweep cell, pointing at the files behind its results row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub alpha: f64,
    pub cache_fraction: f64,
    pub policy: Policy,
    pub seed: u64,
    /// The request profile this cell replayed, relative to the output
    /// directory.
    pub profile: String,
    /// The cell's row file, relative to the output directory.
    pub row: String,
}

/// Inventory of a completed sweep, written as `manifest.json` beside its
/// outputs. All paths are relative to the output directory so the whole
/// tree can be archived or moved as one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_sha256: String,
    pub catalog: String,
    pub catalog_sha256: String,
    pub profiles: Vec<ManifestProfile>,
    pub cells: Vec<ManifestCell>,
    pub results_csv: String,
    pub aggregated_csv: String,
}

/// What a sweep did: its manifest plus how many cells were simulated fresh
/// versus recovered from row files that still verified.
#[derive(Debug)]
pub struct SweepSummary {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub results_path: PathBuf,
    pub aggregated_path: PathBuf,
    pub executed_cells: usize,
    pub resumed_cells: usize,
}

/// Run the full grid described by `config`, writing all artifacts under its
/// output directory.
pub fn run_sweep(config: &ExperimentConfig, opts: SweepOptions) -> Result<SweepSummary, SimError> {
    config.validate()?;
    let config_sha = config.sha256();
    let out_dir = &config.output_dir;

    let catalog = Catalog::generate(config)?;
    write_if_changed(&out_dir.join("catalog.txt"), catalog.to_text().as_bytes())?;

    let groups: Vec<(f64, u64)> = config
        .alphas
        .iter()
        .flat_map(|&alpha| config.seeds.iter().map(move |&seed| (alpha, seed)))
        .collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = opts.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool
        .build()
        .map_err(|e| SimError::config(format!("worker pool: {e}")))?;
    let outcomes: Vec<GroupOutcome> = pool.install(|| {
        groups
            .par_iter()
            .map(|&(alpha, seed)| run_group(config, &catalog, &config_sha, alpha, seed))
            .collect::<Result<_, SimError>>()
    })?;

    let mut profiles = Vec::with_capacity(outcomes.len());
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    let mut executed_cells = 0;
    let mut resumed_cells = 0;
    for group in outcomes {
        profiles.push(group.profile);
        executed_cells += group.executed;
        resumed_cells += group.resumed;
        for (cell, row) in group.rows {
            cells.push(cell);
            rows.push(row);
        }
    }
    rows.sort_by(metrics::row_order);

    let results_path = out_dir.join("results.csv");
    fsutil::write_atomic(&results_path, metrics::results_csv(&rows).as_bytes())?;
    let aggregated_path = out_dir.join("aggregated.csv");
    let aggregated = metrics::aggregated_csv(&metrics::aggregate(&rows));
    fsutil::write_atomic(&aggregated_path, aggregated.as_bytes())?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_sha,
        catalog: "catalog.txt".to_string(),
        catalog_sha256: catalog.sha256(),
        profiles,
        cells,
        results_csv: "results.csv".to_string(),
        aggregated_csv: "aggregated.csv".to_string(),
    };
    let manifest_path = out_dir.join("manifest.json");
    let mut manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| SimError::config(format!("manifest serialization: {e}")))?;
    manifest_text.push('\n');
    fsutil::write_atomic(&manifest_path, manifest_text.as_bytes())?;

    Ok(SweepSummary {
        manifest,
        manifest_path,
        results_path,
        aggregated_path,
        executed_cells,
        resumed_cells,
    })
}

/// Engine settings for one run of a sweep cell.
pub(crate) fn sim_config(
    config: &ExperimentConfig,
    cache_fraction: f64,
    policy: Policy,
    coding_enabled: bool,
) -> SimConfig {
    SimConfig {
        n_clients: config.n_clients,
        link_rate_bps: config.link_rate_bps,
        cache_fraction,
        policy,
        coding_enabled,
        backhaul_delay_ms: config.backhaul_delay_ms(),
        collect_coding_events: false,
        collect_cache_events: false,
    }
}

/// Relative path of the profile for one (alpha, seed) pair.
pub(crate) fn profile_rel_path(alpha: f64, seed: u64) -> String {
    format!("profiles/profile_a{alpha}_s{seed}.txt")
}

/// Relative path of one cell's row file.
fn row_rel_path(alpha: f64, cache_fraction: f64, policy: Policy, seed: u64) -> String {
    format!("rows/row_a{alpha}_m{cache_fraction}_{policy}_s{seed}.csv")
}

struct GroupOutcome {
    profile: ManifestProfile,
    rows: Vec<(ManifestCell, CellRow)>,
    executed: usize,
    resumed: usize,
}

/// Produce every cell of one (alpha, seed) group: generate and store its
/// profile, recover rows that still verify, and simulate the rest.
fn run_group(
    config: &ExperimentConfig,
    catalog: &Catalog,
    config_sha: &str,
    alpha: f64,
    seed: u64,
) -> Result<GroupOutcome, SimError> {
    let out_dir = &config.output_dir;
    let profile = RequestProfile::generate(catalog, config, alpha, seed)?;
    let profile_rel = profile_rel_path(alpha, seed);
    let profile_text = profile.to_text();
    write_if_changed(&out_dir.join(&profile_rel), profile_text.as_bytes())?;

    let run_coded = config.coding.contains(&true);
    let mut rows = Vec::new();
    let mut executed = 0;
    let mut resumed = 0;
    // The no-cache baseline depends on neither cache size nor policy, so one
    // run serves the whole group. It is simulated lazily: a fully resumed
    // group costs no engine time at all.
    let mut nocache: Option<RunOutput> = None;
    for &cache_fraction in &config.cache_fractions {
        for &policy in &config.policies {
            let cell = ManifestCell {
                alpha,
                cache_fraction,
                policy,
                seed,
                profile: profile_rel.clone(),
                row: row_rel_path(alpha, cache_fraction, policy, seed),
            };
            let row_path = out_dir.join(&cell.row);
            if let Some(row) = read_row_file(&row_path, config_sha, &cell) {
                resumed += 1;
                rows.push((cell, row));
                continue;
            }
            if nocache.is_none() {
                // With no cache there is nothing to evict and nothing to
                // code against, so the policy passed here is irrelevant.
                nocache = Some(engine::run(
                    catalog,
                    &profile,
                    &sim_config(config, 0.0, Policy::Lru, false),
                )?);
            }
            let baseline = nocache.as_ref().expect("baseline just ensured");
            let nocode = engine::run(
                catalog,
                &profile,
                &sim_config(config, cache_fraction, policy, false),
            )?;
            let coded = if run_coded {
                Some(engine::run(
                    catalog,
                    &profile,
                    &sim_config(config, cache_fraction, policy, true),
                )?)
            } else {
                None
            };
            let row = metrics::cell_row(
                alpha,
                cache_fraction,
                policy,
                seed,
                baseline,
                &nocode,
                coded.as_ref(),
            );
            fsutil::write_atomic(&row_path, row_file_text(config_sha, &row).as_bytes())?;
            executed += 1;
            rows.push((cell, row));
        }
    }

    Ok(GroupOutcome {
        profile: ManifestProfile {
            alpha,
            seed,
            path: profile_rel,
            sha256: config::hex(&Sha256::digest(profile_text.as_bytes())),
        },
        rows,
        executed,
        resumed,
    })
}

const ROW_MAGIC: &str = "# edgesim cell row v1";

/// Serialize one cell row together with the config hash it was computed
/// under, so later sweeps can tell whether it is still valid.
pub(crate) fn row_file_text(config_sha256: &str, row: &CellRow) -> String {
    format!(
        "{ROW_MAGIC}\n# config_sha256={config_sha256}\n{}\n{}\n",
        metrics::RESULTS_HEADER,
        row.to_csv()
    )
}

/// Recover a previously computed row. `None` — meaning the cell must be
/// rerun — if the file is missing, was produced under a different config,
/// or does not parse back to exactly this cell.
fn read_row_file(path: &Path, config_sha256: &str, cell: &ManifestCell) -> Option<CellRow> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()? != ROW_MAGIC {
        return None;
    }
    if lines.next()? != format!("# config_sha256={config_sha256}") {
        return None;
    }
    if lines.next()? != metrics::RESULTS_HEADER {
        return None;
    }
    let row = CellRow::from_csv(lines.next()?, &path.display().to_string(), 4).ok()?;
    (row.alpha == cell.alpha
        && row.cache_fraction == cell.cache_fraction
        && row.policy == cell.policy
        && row.seed == cell.seed)
        .then_some(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::SegmentSizeModel;

    /// A grid small enough to sweep in well under a second.
    fn tiny_config(out: &Path) -> ExperimentConfig {
        ExperimentConfig {
            n_files: 6,
            file_duration_s: [8, 16],
            segment_size: SegmentSizeModel::Constant { bytes: 1_000_000 },
            n_clients: 3,
            alphas: vec![0.0, 0.5],
            mean_wait_s: 3.0,
            horizon_s: 120.0,
            cache_fractions: vec![0.2],
            policies: vec![Policy::Lru, Policy::LfuIndex],
            seeds: vec![1, 2],
            output_dir: out.to_path_buf(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sweep_writes_every_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let summary = run_sweep(&config, SweepOptions::default()).unwrap();

        // 2 alphas x 1 fraction x 2 policies x 2 seeds.
        assert_eq!(summary.executed_cells, 8);
        assert_eq!(summary.resumed_cells, 0);
        assert_eq!(summary.manifest.cells.len(), 8);
        assert_eq!(summary.manifest.profiles.len(), 4);
        assert_eq!(summary.manifest.tool_version, env!("CARGO_PKG_VERSION"));

        // Every listed path exists.
        for rel in [&summary.manifest.catalog[..], "results.csv", "aggregated.csv"] {
            assert!(dir.path().join(rel).is_file(), "missing {rel}");
        }
        for p in &summary.manifest.profiles {
            assert!(dir.path().join(&p.path).is_file(), "missing {}", p.path);
        }
        for c in &summary.manifest.cells {
            assert!(dir.path().join(&c.row).is_file(), "missing {}", c.row);
        }

        let results = std::fs::read_to_string(&summary.results_path).unwrap();
        let rows = metrics::parse_results_csv(&results, "results.csv").unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.windows(2).all(|w| metrics::row_order(&w[0], &w[1]).is_lt()));
        // Coding was swept, so every row carries a coded byte count.
        assert!(rows.iter().all(|r| r.tx_bytes_cache_coded.is_some()));

        let aggregated = std::fs::read_to_string(&summary.aggregated_path).unwrap();
        let aggs = metrics::parse_aggregated_csv(&aggregated, "aggregated.csv").unwrap();
        // 2 alphas x 1 fraction x 2 policies, each over 2 seeds.
        assert_eq!(aggs.len(), 4);
        assert!(aggs.iter().all(|a| a.n_seeds == 2));
    }

    #[test]
    fn second_sweep_resumes_without_simulating() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let first = run_sweep(&config, SweepOptions::default()).unwrap();
        let before = std::fs::read(&first.results_path).unwrap();

        let second = run_sweep(&config, SweepOptions::default()).unwrap();
        assert_eq!(second.executed_cells, 0);
        assert_eq!(second.resumed_cells, 8);
        assert_eq!(std::fs::read(&second.results_path).unwrap(), before);
    }

    #[test]
    fn stale_and_damaged_rows_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let first = run_sweep(&config, SweepOptions::default()).unwrap();
        let before = std::fs::read(&first.results_path).unwrap();

        // One row from a different config, one truncated mid-write.
        let stale = dir.path().join(&first.manifest.cells[0].row);
        let text = std::fs::read_to_string(&stale).unwrap();
        std::fs::write(&stale, text.replace(&config.sha256(), &"0".repeat(64))).unwrap();
        let damaged = dir.path().join(&first.manifest.cells[3].row);
        std::fs::write(&damaged, ROW_MAGIC).unwrap();

        let second = run_sweep(&config, SweepOptions::default()).unwrap();
        assert_eq!(second.executed_cells, 2);
        assert_eq!(second.resumed_cells, 6);
        assert_eq!(std::fs::read(&second.results_path).unwrap(), before);
    }

    #[test]
    fn fresh_directories_agree_byte_for_byte() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let out_a = run_sweep(&tiny_config(a.path()), SweepOptions { jobs: Some(2) }).unwrap();
        let out_b = run_sweep(&tiny_config(b.path()), SweepOptions { jobs: Some(1) }).unwrap();
        assert_eq!(
            std::fs::read(&out_a.results_path).unwrap(),
            std::fs::read(&out_b.results_path).unwrap()
        );
        assert_eq!(
            std::fs::read(&out_a.aggregated_path).unwrap(),
            std::fs::read(&out_b.aggregated_path).unwrap()
        );
    }

    #[test]
    fn coding_free_sweep_leaves_coded_columns_null() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path());
        config.coding = vec![false];
        config.alphas = vec![0.5];
        config.seeds = vec![1];
        let summary = run_sweep(&config, SweepOptions::default()).unwrap();
        let results = std::fs::read_to_string(&summary.results_path).unwrap();
        let rows = metrics::parse_results_csv(&results, "results.csv").unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.tx_bytes_cache_coded, None);
            assert_eq!(row.g_i, None);
            assert_eq!(row.g_ci, None);
            assert!(row.g_c.is_some());
        }
    }

    #[test]
    fn invalid_grid_is_rejected_before_any_work() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = tiny_config(dir.path());
        config.policies.clear();
        let err = run_sweep(&config, SweepOptions::default()).unwrap_err();
        assert!(err.to_string().contains("policies"));
        assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
    }
}
