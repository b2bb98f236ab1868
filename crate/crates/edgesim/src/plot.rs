//! Report rendering: self-contained SVG charts plus a text summary table
//! over an aggregated results table.
//!
//! One chart per (measure, cache fraction): rewatch factor on the x axis,
//! the measure's per-policy mean on the y axis with ±sd error bars, one
//! series per policy. An undefined mean leaves a gap in its series — the
//! line breaks rather than dropping to zero. The SVG is hand-assembled from
//! fixed shapes, so reports render identically everywhere with no plotting
//! dependency.

use crate::cache::Policy;
use crate::error::SimError;
use crate::fsutil;
use crate::metrics::{AggRow, MeanSd};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// What a report rendered: every chart, and the summary table.
#[derive(Debug)]
pub struct ReportSummary {
    pub plot_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
}

/// One plottable measure of the aggregated table.
struct Measure {
    /// Key used in file names.
    key: &'static str,
    /// Human axis label, after scaling.
    y_label: &'static str,
    /// Multiplier applied to values before plotting (axis readability).
    scale: f64,
    extract: fn(&AggRow) -> MeanSd,
}

const MEASURES: [Measure; 3] = [
    Measure {
        key: "g_ci",
        y_label: "combined gain",
        scale: 1.0,
        extract: |a| a.g_ci,
    },
    Measure {
        key: "latency_s_per_mb",
        y_label: "perceived latency (s/MB)",
        scale: 1.0,
        extract: |a| a.latency_s_per_mb,
    },
    Measure {
        key: "throughput_bps",
        y_label: "perceived throughput (Mbps)",
        scale: 1e-6,
        extract: |a| a.throughput_bps,
    },
];

/// Fixed series color per policy, stable across charts.
fn color(policy: Policy) -> &'static str {
    match policy {
        Policy::Lru => "#1f77b4",
        Policy::Lfu => "#ff7f0e",
        Policy::Belady => "#2ca02c",
        Policy::LfuIndex => "#d62728",
    }
}

/// Render every chart and the summary table into `out_dir`.
pub fn render_report(aggs: &[AggRow], out_dir: &Path) -> Result<ReportSummary, SimError> {
    let mut fractions: Vec<f64> = aggs.iter().map(|a| a.cache_fraction).collect();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();
    let mut policies: Vec<Policy> = aggs.iter().map(|a| a.policy).collect();
    policies.sort();
    policies.dedup();
    let mut alphas: Vec<f64> = aggs.iter().map(|a| a.alpha).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let mut plot_paths = Vec::new();
    for measure in &MEASURES {
        for &m in &fractions {
            let path = out_dir.join(format!("plot_{}_m{m}.svg", measure.key));
            let svg = chart(measure, m, aggs, &alphas, &policies);
            fsutil::write_atomic(&path, svg.as_bytes())?;
            plot_paths.push(path);
        }
    }

    let summary_path = out_dir.join("summary.txt");
    fsutil::write_atomic(&summary_path, summary_table(aggs).as_bytes())?;
    Ok(ReportSummary {
        plot_paths,
        summary_path,
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 58.0;

/// Scaled (mean, sd) series point for one (policy, alpha), if defined.
fn point(measure: &Measure, aggs: &[AggRow], m: f64, policy: Policy, alpha: f64) -> MeanSd {
    let row = aggs
        .iter()
        .find(|a| a.cache_fraction == m && a.policy == policy && a.alpha == alpha)?;
    let (mean, sd) = (measure.extract)(row)?;
    Some((mean * measure.scale, sd * measure.scale))
}

fn chart(measure: &Measure, m: f64, aggs: &[AggRow], alphas: &[f64], policies: &[Policy]) -> String {
    // Axis ranges over every defined point, error bars included.
    let (x_min, x_max) = match (alphas.first(), alphas.last()) {
        (Some(&lo), Some(&hi)) if lo < hi => (lo, hi),
        (Some(&lo), _) => (lo - 0.25, lo + 0.25),
        _ => (0.0, 1.0),
    };
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for &policy in policies {
        for &alpha in alphas {
            if let Some((mean, sd)) = point(measure, aggs, m, policy, alpha) {
                y_lo = y_lo.min(mean - sd);
                y_hi = y_hi.max(mean + sd);
            }
        }
    }
    if y_lo > y_hi {
        (y_lo, y_hi) = (0.0, 1.0); // no data: render empty axes
    }
    let pad = ((y_hi - y_lo) * 0.06).max(y_hi.abs().max(1.0) * 1e-3);
    let (y_min, y_max) = (y_lo - pad, y_hi + pad);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let y_px = |y: f64| TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-family="monospace" font-size="15" text-anchor="middle">{} vs rewatch factor (M={m})</text>"#,
        LEFT + plot_w / 2.0,
        measure.key
    );

    // Gridlines and y ticks.
    for i in 0..5 {
        let v = y_min + (y_max - y_min) * i as f64 / 4.0;
        let y = y_px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}"/>"#,
            LEFT + plot_w,
            "#dddddd"
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 7.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    // X ticks at each swept rewatch factor.
    for &alpha in alphas {
        let x = x_px(alpha);
        let base = TOP + plot_h;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{base:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            base + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-family="monospace" font-size="11" text-anchor="middle">{alpha}</text>"#,
            base + 19.0
        );
    }
    // Axes.
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="13" text-anchor="middle">rewatch factor</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-family="monospace" font-size="13" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        measure.y_label
    );

    // One series per policy; gaps split the polyline.
    for &policy in policies {
        let col = color(policy);
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |seg: &mut Vec<(f64, f64)>, s: &mut String| {
            if seg.len() > 1 {
                let pts: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{col}" stroke-width="2"/>"#,
                    pts.join(" ")
                );
            }
            seg.clear();
        };
        for &alpha in alphas {
            match point(measure, aggs, m, policy, alpha) {
                Some((mean, _)) => segment.push((x_px(alpha), y_px(mean))),
                None => flush(&mut segment, &mut s),
            }
        }
        flush(&mut segment, &mut s);
        // Markers and error bars on top of the lines.
        for &alpha in alphas {
            if let Some((mean, sd)) = point(measure, aggs, m, policy, alpha) {
                let (x, y) = (x_px(alpha), y_px(mean));
                if sd > 0.0 {
                    let (y1, y2) = (y_px(mean + sd), y_px(mean - sd));
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{y2:.2}" stroke="{col}"/>"#
                    );
                    for yc in [y1, y2] {
                        let _ = writeln!(
                            s,
                            r#"<line x1="{:.2}" y1="{yc:.2}" x2="{:.2}" y2="{yc:.2}" stroke="{col}"/>"#,
                            x - 3.5,
                            x + 3.5
                        );
                    }
                }
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{col}"/>"#);
            }
        }
    }

    // Legend, upper left inside the plot area.
    for (i, &policy) in policies.iter().enumerate() {
        let y = TOP + 16.0 + i as f64 * 17.0;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/>"#,
            LEFT + 10.0,
            LEFT + 34.0,
            color(policy)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="monospace" font-size="12">{policy}</text>"#,
            LEFT + 40.0,
            y + 4.0
        );
    }

    s.push_str("</svg>\n");
    s
}

/// Compact tick label that adapts to the value's magnitude.
fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if a >= 100_000.0 || a < 0.001 {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn fmt_cell(v: MeanSd) -> String {
    match v {
        Some((mean, sd)) => format!("{mean:.4} ±{sd:.4}"),
        None => "-".to_string(),
    }
}

/// Fixed-width text table of the aggregated rows.
fn summary_table(aggs: &[AggRow]) -> String {
    let header = [
        "alpha", "M", "policy", "seeds", "g_c", "g_i", "g_ci", "latency_s_per_mb",
        "throughput_bps",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
    for a in aggs {
        rows.push(vec![
            a.alpha.to_string(),
            a.cache_fraction.to_string(),
            a.policy.to_string(),
            a.n_seeds.to_string(),
            fmt_cell(a.g_c),
            fmt_cell(a.g_i),
            fmt_cell(a.g_ci),
            fmt_cell(a.latency_s_per_mb),
            fmt_cell(a.throughput_bps.map(|(m, s)| (m / 1e6, s / 1e6))),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::from("throughput in Mbps; '-' marks a measure no seed produced\n\n");
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
