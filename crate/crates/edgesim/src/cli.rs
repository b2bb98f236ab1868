//! Command-line surface: argument parsing, subcommand dispatch, and the
//! trace files behind the `run` subcommand.
//!
//! Four subcommands cover the experiment workflow:
//!
//! - `gen-profile` writes the catalog and the request-profile files for a
//!   config (all its seeds, or one chosen with `--seed`), byte-identical on
//!   every rerun;
//! - `run` replays one stored profile under one policy, together with its
//!   no-cache and coding-off companions so the results row carries every
//!   gain, and emits the delivery trace;
//! - `sweep` runs the whole grid (see [`crate::sweep`]);
//! - `report` renders charts and a summary table from an aggregated CSV.
//!
//! Every failure surfaces as a one-line diagnostic and a nonzero exit.

use crate::cache::Policy;
use crate::config::ExperimentConfig;
use crate::engine::{self, RunOutput};
use crate::error::SimError;
use crate::fsutil::{write_atomic, write_if_changed};
use crate::metrics::{self, parse_aggregated_csv};
use crate::plot;
use crate::sweep::{self, run_sweep, SweepOptions};
use crate::workload::{Catalog, RequestProfile};
use crate::{ClientId, SegmentId};
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Deterministic simulator of a broadcast edge station serving video
/// segments to caching clients, with XOR-coded multicast delivery.
#[derive(Debug, Parser)]
#[command(name = "edgesim", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the catalog and per-(alpha, seed) request profiles.
    GenProfile {
        /// Experiment config (TOML; absent keys fall back to defaults).
        #[arg(long)]
        config: PathBuf,
        /// Generate for this seed only, instead of every seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Replay one request profile under one policy and write its trace,
    /// transmission log, and results row.
    Run {
        /// Experiment config (TOML; absent keys fall back to defaults).
        #[arg(long)]
        config: PathBuf,
        /// Profile file to replay (must match the config's catalog).
        #[arg(long)]
        profile: PathBuf,
        /// Cache replacement policy.
        #[arg(long, value_enum)]
        policy: Policy,
        /// Merge codeable requests into XOR broadcasts.
        #[arg(long)]
        coding: bool,
    },
    /// Run every (alpha, cache size, policy, seed) cell of the config's
    /// grid and write the combined tables.
    Sweep {
        /// Experiment config (TOML; absent keys fall back to defaults).
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (default: one per CPU).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render SVG charts and a text summary from an aggregated CSV.
    Report {
        /// Aggregated results table, as written by `sweep`.
        #[arg(long)]
        input: PathBuf,
        /// Directory for the rendered charts and summary.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Execute one parsed command.
pub fn dispatch(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::GenProfile { config, seed } => cmd_gen_profile(&config, seed),
        Command::Run {
            config,
            profile,
            policy,
            coding,
        } => cmd_run(&config, &profile, policy, coding),
        Command::Sweep { config, jobs } => cmd_sweep(&config, jobs),
        Command::Report { input, out } => cmd_report(&input, &out),
    }
}

/// Write the catalog plus one profile per (alpha, seed); reruns reproduce
/// identical bytes and touch nothing that is already current.
fn cmd_gen_profile(config_path: &Path, seed: Option<u64>) -> Result<(), SimError> {
    let config = ExperimentConfig::load(config_path)?;
    let catalog = Catalog::generate(&config)?;
    let catalog_path = config.output_dir.join("catalog.txt");
    write_if_changed(&catalog_path, catalog.to_text().as_bytes())?;
    println!("wrote {}", catalog_path.display());

    let seeds = seed.map_or_else(|| config.seeds.clone(), |s| vec![s]);
    for &alpha in &config.alphas {
        for &seed in &seeds {
            let profile = RequestProfile::generate(&catalog, &config, alpha, seed)?;
            let path = config.output_dir.join(sweep::profile_rel_path(alpha, seed));
            write_if_changed(&path, profile.to_text().as_bytes())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

/// Replay `profile` under `policy`, with the no-cache baseline and (when
/// coding) the coding-off companion filling the gain columns. The cache
/// budget is the first entry of the config's `cache_fractions`.
fn cmd_run(
    config_path: &Path,
    profile_path: &Path,
    policy: Policy,
    coding: bool,
) -> Result<(), SimError> {
    let config = ExperimentConfig::load(config_path)?;
    let catalog = Catalog::generate(&config)?;
    let profile = RequestProfile::read(profile_path)?;
    profile.verify_catalog(&catalog)?;
    let cache_fraction = config.cache_fractions[0];

    let nocache = engine::run(
        &catalog,
        &profile,
        &sweep::sim_config(&config, 0.0, Policy::Lru, false),
    )?;
    let mut nocode_cfg = sweep::sim_config(&config, cache_fraction, policy, false);
    let coded = if coding {
        let mut coded_cfg = sweep::sim_config(&config, cache_fraction, policy, true);
        coded_cfg.collect_coding_events = true;
        Some(engine::run(&catalog, &profile, &coded_cfg)?)
    } else {
        nocode_cfg.collect_coding_events = false;
        None
    };
    let nocode = engine::run(&catalog, &profile, &nocode_cfg)?;
    let row = metrics::cell_row(
        profile.alpha,
        cache_fraction,
        policy,
        profile.seed,
        &nocache,
        &nocode,
        coded.as_ref(),
    );

    let suffix = if coding { "_coded" } else { "" };
    let dir = config.output_dir.join(format!(
        "run_a{}_m{cache_fraction}_{policy}{suffix}",
        profile.alpha
    ));
    let config_sha = config.sha256();
    let primary = coded.as_ref().unwrap_or(&nocode);
    write_atomic(
        &dir.join("trace.txt"),
        trace_text(&config_sha, primary).as_bytes(),
    )?;
    write_atomic(
        &dir.join("transmissions.txt"),
        transmissions_text(&config_sha, primary).as_bytes(),
    )?;
    if coding {
        write_atomic(
            &dir.join("coding_trace.txt"),
            coding_trace_text(&config_sha, primary).as_bytes(),
        )?;
    }
    write_atomic(
        &dir.join("row.csv"),
        sweep::row_file_text(&config_sha, &row).as_bytes(),
    )?;

    println!("wrote {}", dir.display());
    println!("{}", metrics::RESULTS_HEADER);
    println!("{}", row.to_csv());
    Ok(())
}

fn cmd_sweep(config_path: &Path, jobs: Option<usize>) -> Result<(), SimError> {
    let config = ExperimentConfig::load(config_path)?;
    let summary = run_sweep(&config, SweepOptions { jobs })?;
    println!(
        "{} cells executed, {} resumed",
        summary.executed_cells, summary.resumed_cells
    );
    println!("wrote {}", summary.results_path.display());
    println!("wrote {}", summary.aggregated_path.display());
    println!("wrote {}", summary.manifest_path.display());
    Ok(())
}

fn cmd_report(input: &Path, out: &Path) -> Result<(), SimError> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| SimError::io(input.display().to_string(), e))?;
    let aggs = parse_aggregated_csv(&text, &input.display().to_string())?;
    let report = plot::render_report(&aggs, out)?;
    for path in &report.plot_paths {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", report.summary_path.display());
    Ok(())
}

/// Column header of `trace.txt`.
pub const TRACE_HEADER: &str =
    "req_time_ms,deliv_time_ms,client,file,seg_index,seg_bytes,source,payload_bytes,group_size";

/// Column header of `transmissions.txt`.
pub const TRANSMISSIONS_HEADER: &str = "start_ms,end_ms,payload_bytes,members";

/// Column header of `coding_trace.txt`.
pub const CODING_TRACE_HEADER: &str = "time_ms,action,members,merged_dof,merged_doe";

/// `client:file.segment` pairs joined with `;` — e.g. `3:7.2;5:1.4`.
fn members_str(members: &[(ClientId, SegmentId)]) -> String {
    let parts: Vec<String> = members.iter().map(|(c, s)| format!("{c}:{s}")).collect();
    parts.join(";")
}

/// Render the per-delivery trace of one run.
pub fn trace_text(config_sha256: &str, out: &RunOutput) -> String {
    let mut s = format!("# edgesim trace v1\n# config_sha256={config_sha256}\n{TRACE_HEADER}\n");
    for d in &out.deliveries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            d.request_time,
            d.delivery_time,
            d.client,
            d.segment.file,
            d.segment.index,
            d.segment_bytes,
            d.source.as_str(),
            d.payload_bytes,
            d.group_size
        );
    }
    s
}

/// Render the channel log of one run: every broadcast with its recipients.
pub fn transmissions_text(config_sha256: &str, out: &RunOutput) -> String {
    let mut s = format!(
        "# edgesim transmissions v1\n# config_sha256={config_sha256}\n{TRANSMISSIONS_HEADER}\n"
    );
    for t in &out.transmissions {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            t.start,
            t.end,
            t.payload_bytes,
            members_str(&t.members)
        );
    }
    s
}

/// Render the queue-placement log of one coded run.
pub fn coding_trace_text(config_sha256: &str, out: &RunOutput) -> String {
    let mut s = format!(
        "# edgesim coding trace v1\n# config_sha256={config_sha256}\n{CODING_TRACE_HEADER}\n"
    );
    for e in &out.coding_events {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.time,
            e.action.as_str(),
            members_str(&e.members),
            e.dof,
            e.doe
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_surface_parses() {
        let cli = Cli::try_parse_from([
            "edgesim",
            "run",
            "--config",
            "exp.toml",
            "--profile",
            "p.txt",
            "--policy",
            "lfu-index",
            "--coding",
        ])
        .unwrap();
        match cli.command {
            Command::Run { policy, coding, .. } => {
                assert_eq!(policy, Policy::LfuIndex);
                assert!(coding);
            }
            other => panic!("parsed {other:?}"),
        }

        let cli = Cli::try_parse_from(["edgesim", "sweep", "--config", "exp.toml", "--jobs", "4"])
            .unwrap();
        match cli.command {
            Command::Sweep { jobs, .. } => assert_eq!(jobs, Some(4)),
            other => panic!("parsed {other:?}"),
        }

        let cli = Cli::try_parse_from(["edgesim", "gen-profile", "--config", "exp.toml"]).unwrap();
        match cli.command {
            Command::GenProfile { seed, .. } => assert_eq!(seed, None),
            other => panic!("parsed {other:?}"),
        }

        let cli =
            Cli::try_parse_from(["edgesim", "report", "--input", "agg.csv", "--out", "charts"])
                .unwrap();
        assert!(matches!(cli.command, Command::Report { .. }));
    }

    #[test]
    fn unknown_policy_is_rejected_with_candidates() {
        let err = Cli::try_parse_from([
            "edgesim", "run", "--config", "c", "--profile", "p", "--policy", "mru",
        ])
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lfu-index"), "unhelpful: {msg}");
    }

    #[test]
    fn member_lists_use_compact_pairs() {
        let members = vec![
            (3u32, SegmentId::new(7, 2)),
            (5u32, SegmentId::new(1, 4)),
        ];
        assert_eq!(members_str(&members), "3:7.2;5:1.4");
    }
}
