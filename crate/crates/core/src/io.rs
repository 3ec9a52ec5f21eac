//! CSV ingestion and emission.
//!
//! Every file has a header row. Floats are written with Rust's shortest
//! round-trip formatting, so equal numbers always produce equal bytes.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::cluster::Clustering;
use crate::curve::{Domain, EventCurve, Mode};
use crate::error::{Error, Result};
use crate::pairwise::PairMaps;
use crate::registration::{MeanCurve, RegisteredCurve, WarpingEstimate};
use crate::synth::SineWarp;
use crate::interp;

fn num(x: f64) -> String {
    format!("{x}")
}

fn parse_err(line: Option<u64>, msg: impl Display) -> Error {
    match line {
        Some(l) => Error::Parse(format!("line {l}: {msg}")),
        None => Error::Parse(msg.to_string()),
    }
}

fn parse_f64(field: &str, line: Option<u64>, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} {field:?} is not finite")));
    }
    Ok(v)
}

/// Rows grouped by the first column, in order of first appearance.
struct Grouped {
    ids: Vec<String>,
    columns: Vec<Vec<Vec<f64>>>,
}

fn read_grouped<R: Read>(reader: R, expected: &[&str], optional: &[&str]) -> Result<Grouped> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(None, e))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let allowed = expected.len() + optional.len();
    let known = names.len() >= expected.len()
        && names.len() <= allowed
        && names.iter().zip(expected.iter().chain(optional)).all(|(a, b)| a == b);
    if !known {
        let mut wanted = expected.join(",");
        if !optional.is_empty() {
            wanted.push_str(&format!("[,{}]", optional.join(",")));
        }
        return Err(parse_err(Some(1), format!("expected header {wanted}, found {}", names.join(","))));
    }
    let width = names.len();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut grouped = Grouped {
        ids: Vec::new(),
        columns: Vec::new(),
    };
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(None, e))?;
        let line = record.position().map(|p| p.line());
        if record.len() != width {
            return Err(parse_err(line, format!("expected {width} fields, found {}", record.len())));
        }
        let id = record[0].to_owned();
        if id.is_empty() {
            return Err(parse_err(line, "empty curve_id"));
        }
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            grouped.ids.push(id);
            grouped.columns.push(vec![Vec::new(); width - 1]);
            grouped.ids.len() - 1
        });
        for (c, name) in names.iter().enumerate().skip(1) {
            let v = parse_f64(&record[c], line, name)?;
            grouped.columns[slot][c - 1].push(v);
        }
    }
    Ok(grouped)
}

/// Reads `curve_id,event_time[,value]` rows into unanchored curves, in order of
/// first appearance.
pub fn read_events<R: Read>(reader: R, domain: Domain, mode: Mode) -> Result<Vec<EventCurve>> {
    let grouped = read_grouped(reader, &["curve_id", "event_time"], &["value"])?;
    grouped
        .ids
        .into_iter()
        .zip(grouped.columns)
        .map(|(id, cols)| match cols.as_slice() {
            [times] => EventCurve::build(id, times, domain, mode),
            [times, values] => EventCurve::with_values(id, times, values, domain, mode),
            _ => unreachable!("header checked"),
        })
        .collect()
}

pub fn read_events_path(path: &Path, domain: Domain, mode: Mode) -> Result<Vec<EventCurve>> {
    let file = File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_events(file, domain, mode)
}

/// Reads `curve_id,event_time,h_inv` rows and grids each estimate.
pub fn read_warpings<R: Read>(reader: R, domain: Domain, g: usize) -> Result<Vec<WarpingEstimate>> {
    let grouped = read_grouped(reader, &["curve_id", "event_time", "h_inv"], &[])?;
    grouped
        .ids
        .into_iter()
        .zip(grouped.columns)
        .map(|(curve_id, mut cols)| {
            let h_inv_values = cols.pop().expect("three columns");
            let event_times = cols.pop().expect("three columns");
            let ok = |xs: &[f64]| interp::is_strictly_increasing(xs) && xs.iter().all(|&t| domain.contains(t));
            if !ok(&event_times) || !ok(&h_inv_values) {
                return Err(Error::InvalidValues {
                    id: curve_id,
                    reason: "warping samples must be strictly increasing and inside the domain".into(),
                });
            }
            WarpingEstimate {
                curve_id,
                domain,
                event_times,
                h_inv_values,
                grid: Vec::new(),
                grid_values: Vec::new(),
            }
            .to_common_grid(g)
        })
        .collect()
}

pub fn read_warpings_path(path: &Path, domain: Domain, g: usize) -> Result<Vec<WarpingEstimate>> {
    let file = File::open(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    read_warpings(file, domain, g)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn finish<W: Write>(mut wtr: csv::Writer<W>) -> io::Result<()> {
    wtr.flush()
}

/// Observed events in the ingestion format (anchors omitted), optionally with
/// the value column.
pub fn write_events<W: Write>(w: W, curves: &[EventCurve], with_values: bool) -> io::Result<()> {
    let mut wtr = writer(w);
    if with_values {
        wtr.write_record(["curve_id", "event_time", "value"])?;
    } else {
        wtr.write_record(["curve_id", "event_time"])?;
    }
    for c in curves {
        for (t, v) in c.event_times().iter().zip(c.event_values()) {
            if with_values {
                wtr.write_record([c.id(), &num(*t), &num(*v)])?;
            } else {
                wtr.write_record([c.id(), &num(*t)])?;
            }
        }
    }
    finish(wtr)
}

/// `ĥ⁻¹` at each curve's observed events.
pub fn write_warpings<W: Write>(w: W, estimates: &[WarpingEstimate]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["curve_id", "event_time", "h_inv"])?;
    for e in estimates {
        let (lo, hi) = (e.domain.t_min(), e.domain.t_max());
        for (t, h) in e.event_times.iter().zip(&e.h_inv_values) {
            if *t == lo || *t == hi {
                continue;
            }
            wtr.write_record([e.curve_id.as_str(), &num(*t), &num(*h)])?;
        }
    }
    finish(wtr)
}

pub fn write_registered<W: Write>(w: W, curves: &[RegisteredCurve]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["curve_id", "registered_time", "value"])?;
    for c in curves {
        for (t, v) in c.event_times().iter().zip(c.event_values()) {
            wtr.write_record([c.curve_id.as_str(), &num(*t), &num(*v)])?;
        }
    }
    finish(wtr)
}

pub fn write_mean_curve<W: Write>(w: W, before: &MeanCurve, after: &MeanCurve) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["grid_t", "mean_before", "mean_after"])?;
    for ((t, b), a) in before.grid.iter().zip(&before.mean_values).zip(&after.mean_values) {
        wtr.write_record([num(*t), num(*b), num(*a)])?;
    }
    finish(wtr)
}

pub fn write_group_means<W: Write, L: Display>(w: W, groups: &[(L, MeanCurve)]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["group", "grid_t", "mean"])?;
    for (label, mean) in groups {
        let label = label.to_string();
        for (t, v) in mean.grid.iter().zip(&mean.mean_values) {
            wtr.write_record([label.clone(), num(*t), num(*v)])?;
        }
    }
    finish(wtr)
}

/// Cluster labels are written one-based.
pub fn write_clusters<W: Write>(w: W, ids: &[String], clustering: &Clustering) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["curve_id", "label", "silhouette"])?;
    for ((id, label), s) in ids.iter().zip(&clustering.labels).zip(&clustering.silhouettes) {
        wtr.write_record([id.clone(), (label + 1).to_string(), num(*s)])?;
    }
    finish(wtr)
}

pub fn write_silhouette_scan<W: Write>(w: W, scan: &[(usize, f64)]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["k", "coefficient"])?;
    for (k, c) in scan {
        wtr.write_record([k.to_string(), num(*c)])?;
    }
    finish(wtr)
}

/// True warps and their inverses on a uniform `g`-point grid.
pub fn write_truth_warps<W: Write>(w: W, ids: &[String], warps: &[SineWarp], g: usize) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["curve_id", "t", "h", "h_inv"])?;
    for (id, warp) in ids.iter().zip(warps) {
        for t in interp::uniform_grid(warp.domain, g.max(2)) {
            wtr.write_record([id.clone(), num(t), num(warp.eval(t)), num(warp.inverse(t))])?;
        }
    }
    finish(wtr)
}

pub fn write_regimes<W: Write>(w: W, ids: &[String], regimes: &[usize]) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["curve_id", "regime"])?;
    for (id, r) in ids.iter().zip(regimes) {
        wtr.write_record([id.clone(), r.to_string()])?;
    }
    finish(wtr)
}

/// Both directions of a pairwise map, one row per mapped point.
pub fn write_pairwise_map<W: Write>(w: W, maps: &PairMaps) -> io::Result<()> {
    let mut wtr = writer(w);
    wtr.write_record(["source_id", "target_id", "source_time", "mapped_time"])?;
    for warp in [&maps.forward, &maps.backward] {
        for (t, m) in warp.source_times.iter().zip(&warp.mapped_times) {
            wtr.write_record([warp.source_id.as_str(), warp.target_id.as_str(), &num(*t), &num(*m)])?;
        }
    }
    finish(wtr)
}
