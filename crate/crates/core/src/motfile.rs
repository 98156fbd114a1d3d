//! MOTChallenge-style text files.
//!
//! One record per line: `frame,id,left,top,w,h,conf,x,y,z`. Boxes are stored
//! by their top-left corner on disk and converted to center form on read.
//! Result files written here put the track status in the `x` column
//! (1 strong, 2 new, 0 weak) and `1 - penalty` in the confidence column.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::warn;
use thiserror::Error;

use crate::geometry::{BBox, Detection};
use crate::lifecycle::TrackStatus;
use crate::pipeline::TrackOutput;

#[derive(Debug, Error)]
pub enum MotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

/// One parsed line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    pub frame: u32,
    pub id: i64,
    pub bbox: BBox,
    pub conf: f64,
    pub extra: [f64; 3],
}

impl MotRecord {
    /// Status stored in the first placeholder column of a result file.
    /// Anything that is not a recognised code counts as strong.
    pub fn status(&self) -> TrackStatus {
        match self.extra[0] as i64 {
            0 => TrackStatus::Weak,
            2 => TrackStatus::New,
            _ => TrackStatus::Strong,
        }
    }
}

pub fn status_code(s: TrackStatus) -> i32 {
    match s {
        TrackStatus::Weak => 0,
        TrackStatus::Strong => 1,
        TrackStatus::New => 2,
    }
}

/// Parses records from text. Blank lines and `#` comments are skipped.
/// Lines need at least the six box columns; confidence defaults to 1 and
/// placeholders to -1. Non-positive sizes are skipped and out-of-range
/// confidences clamped, both with a warning.
pub fn parse_records(text: &str, path: &Path) -> Result<Vec<MotRecord>, MotError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| MotError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() < 6 {
            return Err(err(format!(
                "expected at least 6 fields, found {}",
                fields.len()
            )));
        }
        let num = |k: usize| -> Result<f64, MotError> {
            let v: f64 = fields[k]
                .parse()
                .map_err(|_| err(format!("field {} is not a number: {:?}", k + 1, fields[k])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("field {} is not finite", k + 1)))
            }
        };
        let frame = num(0)?;
        if frame < 1.0 || frame.fract() != 0.0 || frame > u32::MAX as f64 {
            return Err(err(format!(
                "frame must be a positive integer, got {}",
                fields[0]
            )));
        }
        let id = num(1)?;
        if id.fract() != 0.0 {
            return Err(err(format!("id must be an integer, got {}", fields[1])));
        }
        let (left, top, w, h) = (num(2)?, num(3)?, num(4)?, num(5)?);
        if w <= 0.0 || h <= 0.0 {
            warn!(
                "{}:{line}: skipping box with non-positive size {w}x{h}",
                path.display()
            );
            continue;
        }
        let mut conf = if fields.len() > 6 { num(6)? } else { 1.0 };
        if !(0.0..=1.0).contains(&conf) {
            warn!(
                "{}:{line}: confidence {conf} clamped to [0, 1]",
                path.display()
            );
            conf = conf.clamp(0.0, 1.0);
        }
        let mut extra = [-1.0; 3];
        for (k, slot) in extra.iter_mut().enumerate() {
            if fields.len() > 7 + k {
                *slot = num(7 + k)?;
            }
        }
        let bbox = BBox::from_topleft(left, top, w, h).map_err(|e| err(e.to_string()))?;
        out.push(MotRecord {
            frame: frame as u32,
            id: id as i64,
            bbox,
            conf,
            extra,
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<MotRecord>, MotError> {
    let text = std::fs::read_to_string(path).map_err(|source| MotError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records(&text, path)
}

/// Groups detections by frame. Frames without records are absent.
pub fn detections_by_frame(records: &[MotRecord]) -> BTreeMap<u32, Vec<Detection>> {
    let mut out: BTreeMap<u32, Vec<Detection>> = BTreeMap::new();
    for r in records {
        out.entry(r.frame)
            .or_default()
            .push(Detection::new(r.bbox, r.conf));
    }
    out
}

/// Reads a detection file into per-frame lists.
pub fn parse_det_file(path: &Path) -> Result<BTreeMap<u32, Vec<Detection>>, MotError> {
    Ok(detections_by_frame(&read_records(path)?))
}

/// Formats one line with three decimals.
pub fn format_record(frame: u32, id: i64, bbox: &BBox, conf: f64, extra: [f64; 3]) -> String {
    let (l, t, w, h) = bbox.to_topleft();
    format!(
        "{frame},{id},{l:.3},{t:.3},{w:.3},{h:.3},{conf:.3},{},{},{}",
        fmt_extra(extra[0]),
        fmt_extra(extra[1]),
        fmt_extra(extra[2])
    )
}

fn fmt_extra(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x:.3}")
    }
}

/// Renders tracker output as result-file text, sorted by frame then id.
pub fn render_results(frames: &[(u32, Vec<TrackOutput>)], include_weak: bool) -> String {
    let mut rows: Vec<(u32, &TrackOutput)> = frames
        .iter()
        .flat_map(|(f, outs)| outs.iter().map(move |o| (*f, o)))
        .filter(|(_, o)| include_weak || o.status != TrackStatus::Weak)
        .collect();
    rows.sort_by_key(|(f, o)| (*f, o.id));
    let mut text = String::new();
    for (f, o) in rows {
        let extra = [status_code(o.status) as f64, -1.0, -1.0];
        let _ = writeln!(
            text,
            "{}",
            format_record(f, o.id as i64, &o.bbox, 1.0 - o.penalty, extra)
        );
    }
    text
}

pub fn write_results(
    frames: &[(u32, Vec<TrackOutput>)],
    path: &Path,
    include_weak: bool,
) -> Result<(), MotError> {
    write_text(path, &render_results(frames, include_weak))
}

/// Writes plain records (ground truth or detections).
pub fn render_records(records: &[MotRecord]) -> String {
    let mut text = String::new();
    for r in records {
        let _ = writeln!(
            text,
            "{}",
            format_record(r.frame, r.id, &r.bbox, r.conf, r.extra)
        );
    }
    text
}

pub fn write_text(path: &Path, text: &str) -> Result<(), MotError> {
    std::fs::write(path, text).map_err(|source| MotError::Io {
        path: path.to_path_buf(),
        source,
    })
}
