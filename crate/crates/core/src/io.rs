//! Deterministic CSV output.
//!
//! Numbers are written with at least 12 significant digits and at least 12
//! decimal places, capped at 17 significant digits; undefined values are
//! empty cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::engine::aggregate::Band;
use crate::engine::arms::{ab_estimate, AbMetric, Adjustment};
use crate::engine::effects::EffectRow;
use crate::engine::scenario::InterventionWindow;
use crate::engine::simulate::Trajectory;
use crate::error::Result;

const SIG_DIGITS: i32 = 12;
const MIN_DECIMALS: i32 = 12;
const MAX_SIG_DIGITS: i32 = 17;

/// Formats `v` for CSV output, trailing zeros trimmed. Parsing the result
/// recovers `v` within 1e-12 whenever `|v| < 1e4`.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{:.*e}", (SIG_DIGITS - 1) as usize, v);
    }
    let decimals = (SIG_DIGITS - 1 - exp)
        .max(MIN_DECIMALS)
        .min(MAX_SIG_DIGITS - 1 - exp)
        .max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn cell(v: Option<f64>) -> String {
    v.map(format_value).unwrap_or_default()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn trajectory_records<'a>(trajs: &'a [Trajectory]) -> impl Iterator<Item = [String; 6]> + 'a {
    trajs.iter().enumerate().flat_map(|(run_id, tr)| {
        tr.rows.iter().flat_map(move |row| {
            let mut entries = row.entries();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            entries.into_iter().map(move |(name, v)| {
                [
                    run_id.to_string(),
                    tr.mode.as_str().to_string(),
                    tr.seed.to_string(),
                    row.t.to_string(),
                    name,
                    cell(v),
                ]
            })
        })
    })
}

const TRAJECTORY_HEADER: [&str; 6] = ["run_id", "mode", "seed", "t", "metric", "value"];

/// Long-format trajectories: `run_id,mode,seed,t,metric,value`.
///
/// `run_id` is the position in `trajs`; rows are ordered by run, timestep
/// and metric name.
pub fn write_trajectories<W: Write>(w: W, trajs: &[Trajectory]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for rec in trajectory_records(trajs) {
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trajectories_file(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    write_trajectories(create(path)?, trajs)
}

/// Trajectories of several intervention windows, with a leading `window`
/// column.
pub fn write_window_trajectories<W: Write>(
    w: W,
    batches: &[(InterventionWindow, Vec<Trajectory>)],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["window"];
    header.extend(TRAJECTORY_HEADER);
    out.write_record(&header)?;
    for (window, trajs) in batches {
        let label = window.label();
        for rec in trajectory_records(trajs) {
            out.write_record(
                std::iter::once(label.as_str()).chain(rec.iter().map(String::as_str)),
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn effect_header(with_window: bool) -> Vec<String> {
    let mut h = Vec::new();
    if with_window {
        h.push("window".to_string());
    }
    h.extend(["metric", "T"].map(String::from));
    let names = [
        "total",
        "delayed",
        "direct",
        "indirect",
        "longitudinal",
        "longitudinal_bias",
    ];
    h.extend(names.iter().map(|s| s.to_string()));
    for n in names {
        h.push(format!("{n}_ci_low"));
        h.push(format!("{n}_ci_high"));
    }
    h.push("delayed_class".to_string());
    h.push("n_seeds".to_string());
    h
}

fn effect_record(window: Option<&str>, r: &EffectRow) -> Vec<String> {
    let comps = r.components();
    let mut rec = Vec::new();
    if let Some(w) = window {
        rec.push(w.to_string());
    }
    rec.push(r.metric.clone());
    rec.push(r.t.to_string());
    rec.extend(comps.iter().map(|(_, b)| cell(b.map(|b| b.mean))));
    for (_, b) in &comps {
        rec.push(cell(b.and_then(|b| b.low())));
        rec.push(cell(b.and_then(|b| b.high())));
    }
    rec.push(
        r.delayed_class
            .map(|c| c.as_str().to_string())
            .unwrap_or_default(),
    );
    rec.push(
        comps
            .iter()
            .filter_map(|(_, b)| b.map(|b: Band| b.n))
            .max()
            .unwrap_or(0)
            .to_string(),
    );
    rec
}

/// Effect report: one row per (metric, T) with mean and 95% CI bounds of
/// every component.
pub fn write_effects<W: Write>(w: W, rows: &[EffectRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(effect_header(false))?;
    for r in rows {
        out.write_record(effect_record(None, r))?;
    }
    out.flush()?;
    Ok(())
}

/// Effect reports of several windows, with a leading `window` column.
pub fn write_window_effects<W: Write>(
    w: W,
    batches: &[(InterventionWindow, Vec<EffectRow>)],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(effect_header(true))?;
    for (window, rows) in batches {
        let label = window.label();
        for r in rows {
            out.write_record(effect_record(Some(&label), r))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-arm A/B estimates: `seed,t,metric,adjustment,treatment,control,difference`.
pub fn write_ab<W: Write>(w: W, trajs: &[Trajectory]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "seed",
        "t",
        "metric",
        "adjustment",
        "treatment",
        "control",
        "difference",
    ])?;
    for tr in trajs {
        for row in &tr.arms {
            for m in AbMetric::ALL {
                for adj in Adjustment::ALL {
                    let Some(e) = ab_estimate(tr, m, adj, row.t) else {
                        continue;
                    };
                    out.write_record([
                        tr.seed.to_string(),
                        row.t.to_string(),
                        m.as_str().to_string(),
                        adj.as_str().to_string(),
                        cell(e.treatment),
                        cell(e.control),
                        cell(e.difference),
                    ])?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_effects_file(path: &Path, rows: &[EffectRow]) -> Result<()> {
    write_effects(create(path)?, rows)
}

pub fn write_ab_file(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    write_ab(create(path)?, trajs)
}
