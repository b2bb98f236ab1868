//! Performance measures over delivery traces, the per-cell results schema,
//! and seed aggregation.
//!
//! Three transmission totals describe each sweep cell, all measured on the
//! same request profile: no cache at all, cache without coding, and cache
//! with coding. Their ratios are the gains —
//!
//! - caching gain `g_c` = tx(no cache) / tx(cache, no coding),
//! - coding gain `g_i` = tx(cache, no coding) / tx(cache, coded),
//! - combined gain `g_ci` = tx(no cache) / tx(cache, coded),
//!
//! so `g_ci = g_c × g_i` holds by construction up to float rounding.
//!
//! Latency is the mean over *all* deliveries of seconds elapsed per megabyte
//! of the wanted segment (cache hits are instantaneous and contribute 0);
//! perceived throughput is the mean over *network* deliveries of wanted bits
//! per elapsed second — the padded XOR payload never inflates it. A metric
//! without a defined value (zero denominator, no qualifying records) is
//! carried as an explicit `null` in CSV, never 0 or NaN.

use crate::cache::Policy;
use crate::engine::{DeliveryRecord, DeliverySource, RunOutput};
use crate::error::SimError;
use std::fmt::Write as _;

/// Bytes per megabyte in metric units (decimal, as link rates are).
pub const BYTES_PER_MB: f64 = 1_000_000.0;

/// Ratio of two transmission totals; `None` when the denominator is zero.
pub fn gain(numerator_bytes: u64, denominator_bytes: u64) -> Option<f64> {
    (denominator_bytes > 0).then(|| numerator_bytes as f64 / denominator_bytes as f64)
}

/// Mean seconds of delivery delay per megabyte wanted, across every
/// delivery; hits contribute 0. `None` on an empty trace.
pub fn latency_s_per_mb(deliveries: &[DeliveryRecord]) -> Option<f64> {
    if deliveries.is_empty() {
        return None;
    }
    let total: f64 = deliveries
        .iter()
        .map(|d| {
            let elapsed_s = (d.delivery_time - d.request_time) as f64 / 1000.0;
            elapsed_s / (d.segment_bytes as f64 / BYTES_PER_MB)
        })
        .sum();
    Some(total / deliveries.len() as f64)
}

/// Mean wanted-bits-per-second over network deliveries; `None` when nothing
/// came from the network.
pub fn perceived_throughput_bps(deliveries: &[DeliveryRecord]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0u64;
    for d in deliveries {
        if d.source == DeliverySource::Network {
            let elapsed_s = (d.delivery_time - d.request_time) as f64 / 1000.0;
            sum += d.segment_bytes as f64 * 8.0 / elapsed_s;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Audit a run against the physics of the channel, in exact integer
/// arithmetic: hits are instantaneous and free; network deliveries take
/// positive time, carry at least the wanted bytes, and never beat the link
/// rate; transmission payloads sum to the byte total.
pub fn validate_physical_bounds(out: &RunOutput, link_rate_bps: u64) -> Result<(), String> {
    for d in &out.deliveries {
        let elapsed_ms = d
            .delivery_time
            .checked_sub(d.request_time)
            .ok_or_else(|| format!("{d:?}: delivered before requested"))?;
        match d.source {
            DeliverySource::CacheHit => {
                if elapsed_ms != 0 || d.payload_bytes != 0 || d.group_size != 0 {
                    return Err(format!("{d:?}: cache hits must be instant and free"));
                }
            }
            DeliverySource::Network => {
                if elapsed_ms == 0 {
                    return Err(format!("{d:?}: network delivery took zero time"));
                }
                if d.payload_bytes < d.segment_bytes {
                    return Err(format!("{d:?}: payload smaller than the wanted segment"));
                }
                if d.group_size == 0 {
                    return Err(format!("{d:?}: network delivery without a group"));
                }
                // wanted bits / elapsed seconds ≤ link rate, cross-multiplied
                // to stay in integers.
                if d.segment_bytes as u128 * 8 * 1000 > link_rate_bps as u128 * elapsed_ms as u128
                {
                    return Err(format!("{d:?}: wanted bits outran the link rate"));
                }
            }
        }
    }
    let tx_sum: u64 = out.transmissions.iter().map(|t| t.payload_bytes).sum();
    if tx_sum != out.tx_bytes {
        return Err(format!(
            "transmission payloads sum to {tx_sum} but the run reports {}",
            out.tx_bytes
        ));
    }
    for t in &out.transmissions {
        if t.end <= t.start {
            return Err(format!("{t:?}: transmission must take positive time"));
        }
        if t.members.is_empty() {
            return Err(format!("{t:?}: transmission without members"));
        }
    }
    Ok(())
}

/// One sweep cell: every measure for a (rewatch factor, cache size, policy,
/// seed) combination, with the raw transmission totals behind the gains.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRow {
    pub alpha: f64,
    pub cache_fraction: f64,
    pub policy: Policy,
    pub seed: u64,
    pub g_c: Option<f64>,
    pub g_i: Option<f64>,
    pub g_ci: Option<f64>,
    pub latency_s_per_mb: Option<f64>,
    pub throughput_bps: Option<f64>,
    pub tx_bytes_nocache: u64,
    pub tx_bytes_cache: u64,
    /// Absent when the sweep never ran the coded variant.
    pub tx_bytes_cache_coded: Option<u64>,
    pub hits: u64,
    pub misses: u64,
    pub requests_completed: u64,
}

pub const RESULTS_HEADER: &str = "alpha,cache_fraction,policy,seed,g_c,g_i,g_ci,latency_s_per_mb,throughput_bps,tx_bytes_nocache,tx_bytes_cache,tx_bytes_cache_coded,hits,misses,requests_completed";

/// Assemble one results row from the three runs of a cell, all replaying the
/// same profile: the no-cache baseline, the cache-without-coding run, and
/// (when executed) the coded run. Latency, throughput, and the hit/miss
/// counters describe the most capable variant that ran — coded if present,
/// otherwise cache-without-coding.
pub fn cell_row(
    alpha: f64,
    cache_fraction: f64,
    policy: Policy,
    seed: u64,
    nocache: &RunOutput,
    nocode: &RunOutput,
    coded: Option<&RunOutput>,
) -> CellRow {
    let best = coded.unwrap_or(nocode);
    CellRow {
        alpha,
        cache_fraction,
        policy,
        seed,
        g_c: gain(nocache.tx_bytes, nocode.tx_bytes),
        g_i: coded.and_then(|c| gain(nocode.tx_bytes, c.tx_bytes)),
        g_ci: coded.and_then(|c| gain(nocache.tx_bytes, c.tx_bytes)),
        latency_s_per_mb: latency_s_per_mb(&best.deliveries),
        throughput_bps: perceived_throughput_bps(&best.deliveries),
        tx_bytes_nocache: nocache.tx_bytes,
        tx_bytes_cache: nocode.tx_bytes,
        tx_bytes_cache_coded: coded.map(|c| c.tx_bytes),
        hits: best.hits,
        misses: best.misses,
        requests_completed: best.deliveries.len() as u64,
    }
}

fn fmt_null<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "null".to_string(), |x| x.to_string())
}

fn parse_nullable<T: std::str::FromStr>(
    raw: &str,
    path: &str,
    line: usize,
) -> Result<Option<T>, SimError> {
    if raw == "null" {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| SimError::Parse {
        path: path.to_string(),
        line,
        msg: format!("bad value {raw:?}"),
    })
}

fn parse_plain<T: std::str::FromStr>(raw: &str, path: &str, line: usize) -> Result<T, SimError> {
    raw.parse().map_err(|_| SimError::Parse {
        path: path.to_string(),
        line,
        msg: format!("bad value {raw:?}"),
    })
}

impl CellRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.alpha,
            self.cache_fraction,
            self.policy,
            self.seed,
            fmt_null(self.g_c),
            fmt_null(self.g_i),
            fmt_null(self.g_ci),
            fmt_null(self.latency_s_per_mb),
            fmt_null(self.throughput_bps),
            self.tx_bytes_nocache,
            self.tx_bytes_cache,
            fmt_null(self.tx_bytes_cache_coded),
            self.hits,
            self.misses,
            self.requests_completed,
        )
    }

    pub fn from_csv(line: &str, path: &str, lineno: usize) -> Result<Self, SimError> {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 15 {
            return Err(SimError::Parse {
                path: path.to_string(),
                line: lineno,
                msg: format!("expected 15 columns, found {}", cols.len()),
            });
        }
        Ok(CellRow {
            alpha: parse_plain(cols[0], path, lineno)?,
            cache_fraction: parse_plain(cols[1], path, lineno)?,
            policy: cols[2].parse().map_err(|e| SimError::Parse {
                path: path.to_string(),
                line: lineno,
                msg: e,
            })?,
            seed: parse_plain(cols[3], path, lineno)?,
            g_c: parse_nullable(cols[4], path, lineno)?,
            g_i: parse_nullable(cols[5], path, lineno)?,
            g_ci: parse_nullable(cols[6], path, lineno)?,
            latency_s_per_mb: parse_nullable(cols[7], path, lineno)?,
            throughput_bps: parse_nullable(cols[8], path, lineno)?,
            tx_bytes_nocache: parse_plain(cols[9], path, lineno)?,
            tx_bytes_cache: parse_plain(cols[10], path, lineno)?,
            tx_bytes_cache_coded: parse_nullable(cols[11], path, lineno)?,
            hits: parse_plain(cols[12], path, lineno)?,
            misses: parse_plain(cols[13], path, lineno)?,
            requests_completed: parse_plain(cols[14], path, lineno)?,
        })
    }
}

/// Render a full results CSV (header + one line per row).
pub fn results_csv(rows: &[CellRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Parse a results CSV produced by [`results_csv`]. Leading `#` comment
/// lines are tolerated (resume markers).
pub fn parse_results_csv(text: &str, path: &str) -> Result<Vec<CellRow>, SimError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != RESULTS_HEADER {
                return Err(SimError::Parse {
                    path: path.to_string(),
                    line: i + 1,
                    msg: "unexpected results header".to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        rows.push(CellRow::from_csv(line, path, i + 1)?);
    }
    if !saw_header {
        return Err(SimError::Parse {
            path: path.to_string(),
            line: 1,
            msg: "missing results header".to_string(),
        });
    }
    Ok(rows)
}

/// Mean and sample standard deviation of one metric across seeds; `None`
/// when no seed produced a value.
pub type MeanSd = Option<(f64, f64)>;

/// Seed-aggregated sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggRow {
    pub alpha: f64,
    pub cache_fraction: f64,
    pub policy: Policy,
    pub n_seeds: usize,
    pub g_c: MeanSd,
    pub g_i: MeanSd,
    pub g_ci: MeanSd,
    pub latency_s_per_mb: MeanSd,
    pub throughput_bps: MeanSd,
    pub tx_bytes_nocache: MeanSd,
    pub tx_bytes_cache: MeanSd,
    pub tx_bytes_cache_coded: MeanSd,
    pub hits: MeanSd,
    pub misses: MeanSd,
    pub requests_completed: MeanSd,
}

pub const AGGREGATED_HEADER: &str = "alpha,cache_fraction,policy,n_seeds,g_c_mean,g_c_sd,g_i_mean,g_i_sd,g_ci_mean,g_ci_sd,latency_s_per_mb_mean,latency_s_per_mb_sd,throughput_bps_mean,throughput_bps_sd,tx_bytes_nocache_mean,tx_bytes_nocache_sd,tx_bytes_cache_mean,tx_bytes_cache_sd,tx_bytes_cache_coded_mean,tx_bytes_cache_coded_sd,hits_mean,hits_sd,misses_mean,misses_sd,requests_completed_mean,requests_completed_sd";

/// Mean and sample standard deviation (0 for a single value) over the
/// defined entries; `None` if all are undefined.
pub fn mean_sd(values: impl Iterator<Item = Option<f64>>) -> MeanSd {
    let vals: Vec<f64> = values.flatten().collect();
    if vals.is_empty() {
        return None;
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = if vals.len() < 2 {
        0.0
    } else {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, sd))
}

/// Canonical table ordering: rewatch factor, then cache fraction, then
/// policy, then seed. Both result tables sort by it, so equal row sets
/// always serialize to identical bytes.
pub fn row_order(a: &CellRow, b: &CellRow) -> std::cmp::Ordering {
    a.alpha
        .total_cmp(&b.alpha)
        .then(a.cache_fraction.total_cmp(&b.cache_fraction))
        .then(a.policy.cmp(&b.policy))
        .then(a.seed.cmp(&b.seed))
}

/// Group rows by (alpha, cache_fraction, policy) and reduce each metric to
/// mean ± sample standard deviation over seeds. Output rows are sorted by
/// the group key, so equal inputs aggregate to byte-identical tables.
pub fn aggregate(rows: &[CellRow]) -> Vec<AggRow> {
    let mut sorted: Vec<&CellRow> = rows.iter().collect();
    sorted.sort_by(|a, b| row_order(a, b));
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..]
            .iter()
            .take_while(|r| {
                r.alpha == sorted[i].alpha
                    && r.cache_fraction == sorted[i].cache_fraction
                    && r.policy == sorted[i].policy
            })
            .count()
            + i;
        let group = &sorted[i..j];
        out.push(AggRow {
            alpha: group[0].alpha,
            cache_fraction: group[0].cache_fraction,
            policy: group[0].policy,
            n_seeds: group.len(),
            g_c: mean_sd(group.iter().map(|r| r.g_c)),
            g_i: mean_sd(group.iter().map(|r| r.g_i)),
            g_ci: mean_sd(group.iter().map(|r| r.g_ci)),
            latency_s_per_mb: mean_sd(group.iter().map(|r| r.latency_s_per_mb)),
            throughput_bps: mean_sd(group.iter().map(|r| r.throughput_bps)),
            tx_bytes_nocache: mean_sd(group.iter().map(|r| Some(r.tx_bytes_nocache as f64))),
            tx_bytes_cache: mean_sd(group.iter().map(|r| Some(r.tx_bytes_cache as f64))),
            tx_bytes_cache_coded: mean_sd(
                group.iter().map(|r| r.tx_bytes_cache_coded.map(|v| v as f64)),
            ),
            hits: mean_sd(group.iter().map(|r| Some(r.hits as f64))),
            misses: mean_sd(group.iter().map(|r| Some(r.misses as f64))),
            requests_completed: mean_sd(
                group.iter().map(|r| Some(r.requests_completed as f64)),
            ),
        });
        i = j;
    }
    out
}

fn fmt_mean_sd(v: MeanSd) -> String {
    match v {
        Some((m, s)) => format!("{m},{s}"),
        None => "null,null".to_string(),
    }
}

/// Render the aggregated CSV.
pub fn aggregated_csv(aggs: &[AggRow]) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATED_HEADER);
    out.push('\n');
    for a in aggs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            a.alpha,
            a.cache_fraction,
            a.policy,
            a.n_seeds,
            fmt_mean_sd(a.g_c),
            fmt_mean_sd(a.g_i),
            fmt_mean_sd(a.g_ci),
            fmt_mean_sd(a.latency_s_per_mb),
            fmt_mean_sd(a.throughput_bps),
            fmt_mean_sd(a.tx_bytes_nocache),
            fmt_mean_sd(a.tx_bytes_cache),
            format!(
                "{},{},{},{}",
                fmt_mean_sd(a.tx_bytes_cache_coded),
                fmt_mean_sd(a.hits),
                fmt_mean_sd(a.misses),
                fmt_mean_sd(a.requests_completed)
            ),
        );
    }
    out
}

fn parse_mean_sd(m: &str, s: &str, path: &str, line: usize) -> Result<MeanSd, SimError> {
    match (
        parse_nullable::<f64>(m, path, line)?,
        parse_nullable::<f64>(s, path, line)?,
    ) {
        (Some(m), Some(s)) => Ok(Some((m, s))),
        (None, None) => Ok(None),
        _ => Err(SimError::Parse {
            path: path.to_string(),
            line,
            msg: "mean/sd pair half-null".to_string(),
        }),
    }
}

/// Parse an aggregated CSV produced by [`aggregated_csv`].
pub fn parse_aggregated_csv(text: &str, path: &str) -> Result<Vec<AggRow>, SimError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == AGGREGATED_HEADER => {}
        _ => {
            return Err(SimError::Parse {
                path: path.to_string(),
                line: 1,
                msg: "expected an aggregated results CSV (header mismatch)".to_string(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 26 {
            return Err(SimError::Parse {
                path: path.to_string(),
                line: i + 1,
                msg: format!("expected 26 columns, found {}", cols.len()),
            });
        }
        let ln = i + 1;
        out.push(AggRow {
            alpha: parse_plain(cols[0], path, ln)?,
            cache_fraction: parse_plain(cols[1], path, ln)?,
            policy: cols[2].parse().map_err(|e| SimError::Parse {
                path: path.to_string(),
                line: ln,
                msg: e,
            })?,
            n_seeds: parse_plain(cols[3], path, ln)?,
            g_c: parse_mean_sd(cols[4], cols[5], path, ln)?,
            g_i: parse_mean_sd(cols[6], cols[7], path, ln)?,
            g_ci: parse_mean_sd(cols[8], cols[9], path, ln)?,
            latency_s_per_mb: parse_mean_sd(cols[10], cols[11], path, ln)?,
            throughput_bps: parse_mean_sd(cols[12], cols[13], path, ln)?,
            tx_bytes_nocache: parse_mean_sd(cols[14], cols[15], path, ln)?,
            tx_bytes_cache: parse_mean_sd(cols[16], cols[17], path, ln)?,
            tx_bytes_cache_coded: parse_mean_sd(cols[18], cols[19], path, ln)?,
            hits: parse_mean_sd(cols[20], cols[21], path, ln)?,
            misses: parse_mean_sd(cols[22], cols[23], path, ln)?,
            requests_completed: parse_mean_sd(cols[24], cols[25], path, ln)?,
        });
    }
    Ok(out)
}
