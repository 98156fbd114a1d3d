//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for bad or unreadable
//! input data. Diagnostics go to stderr.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use log::warn;

use crate::config::TrackerConfig;
use crate::lifecycle::TrackStatus;
use crate::metrics::{evaluate, TrackFile};
use crate::motfile::{detections_by_frame, read_records, write_results};
use crate::overlay::draw_box;
use crate::pgm;
use crate::pipeline::{FrameInput, Tracker};
use crate::scenario::ScenarioSpec;

#[derive(Debug, Parser)]
#[command(
    name = "swarmtrack",
    version,
    about = "Multi-object tracking with swarm-refined particle filters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track detections and write a result file.
    Track {
        /// Detection file (MOTChallenge text format).
        #[arg(long)]
        det: PathBuf,
        /// Directory of `%06d.pgm` frames; enables the appearance term.
        #[arg(long)]
        frames: Option<PathBuf>,
        /// Tracker config (`key = value` lines). Defaults apply when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write coasted tracks too; `--include-weak=false` drops them.
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        include_weak: bool,
    },
    /// Score a result file against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Score coasted hypothesis rows; `--include-weak=false` ignores them.
        #[arg(long, action = ArgAction::Set, num_args = 0..=1, default_value_t = true, default_missing_value = "true")]
        include_weak: bool,
    },
    /// Generate a synthetic scene (gt.txt, det.txt, optional frames/).
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Draw tracks onto frames.
    Overlay {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn execute(cmd: Command) -> Result<(), String> {
    match cmd {
        Command::Track {
            det,
            frames,
            config,
            out,
            seed,
            include_weak,
        } => track(
            &det,
            frames.as_deref(),
            config.as_deref(),
            &out,
            seed,
            include_weak,
        ),
        Command::Eval {
            gt,
            hyp,
            iou,
            include_weak,
        } => {
            if !(iou > 0.0 && iou < 1.0) {
                return Err(format!("--iou must be in (0, 1), got {iou}"));
            }
            let gt_rows = read_records(&gt).map_err(|e| e.to_string())?;
            // MOTChallenge marks ignored ground-truth rows with a zero flag
            let gt_rows: Vec<_> = gt_rows.into_iter().filter(|r| r.conf > 0.0).collect();
            let hyp_rows: Vec<_> = read_records(&hyp)
                .map_err(|e| e.to_string())?
                .into_iter()
                .filter(|r| include_weak || r.status() != TrackStatus::Weak)
                .collect();
            let g =
                TrackFile::from_records(&gt_rows).map_err(|e| format!("{}: {e}", gt.display()))?;
            let h = TrackFile::from_records(&hyp_rows)
                .map_err(|e| format!("{}: {e}", hyp.display()))?;
            println!("{}", evaluate(&g, &h, iou));
            Ok(())
        }
        Command::Synth { spec, out_dir } => {
            let s =
                ScenarioSpec::from_file(&spec).map_err(|e| format!("{}: {e}", spec.display()))?;
            s.write(&out_dir).map_err(|e| e.to_string())?;
            Ok(())
        }
        Command::Overlay {
            frames,
            tracks,
            out_dir,
        } => overlay(&frames, &tracks, &out_dir),
    }
}

fn track(
    det: &Path,
    frames: Option<&Path>,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    include_weak: bool,
) -> Result<(), String> {
    let mut cfg = match config {
        Some(p) => TrackerConfig::from_file(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => TrackerConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let by_frame = detections_by_frame(&read_records(det).map_err(|e| e.to_string())?);
    let mut last = by_frame.keys().next_back().copied().unwrap_or(0);
    if let Some(dir) = frames {
        last = last.max(count_frames(dir)?);
    }
    let mut tracker = Tracker::new(cfg).map_err(|e| e.to_string())?;
    let mut results = Vec::with_capacity(last as usize);
    for f in 1..=last {
        let mut input = FrameInput::new(f, by_frame.get(&f).cloned().unwrap_or_default());
        if let Some(dir) = frames {
            let path = pgm::frame_path(dir, f);
            if path.exists() {
                input.image = Some(pgm::read(&path).map_err(|e| e.to_string())?);
            } else {
                warn!(
                    "{}: missing frame, tracking without appearance",
                    path.display()
                );
            }
        }
        let outs = tracker
            .step(&input)
            .map_err(|e| format!("frame {f}: {e}"))?;
        results.push((f, outs));
    }
    write_results(&results, out, include_weak).map_err(|e| e.to_string())
}

/// Highest `k` such that frames `1..=k` are all present.
fn count_frames(dir: &Path) -> Result<u32, String> {
    if !dir.is_dir() {
        return Err(format!("{}: not a directory", dir.display()));
    }
    let mut k = 0;
    while pgm::frame_path(dir, k + 1).exists() {
        k += 1;
    }
    Ok(k)
}

fn overlay(frames: &Path, tracks: &Path, out_dir: &Path) -> Result<(), String> {
    let n = count_frames(frames)?;
    let rows = read_records(tracks).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
    for f in 1..=n {
        let mut img = pgm::read(&pgm::frame_path(frames, f)).map_err(|e| e.to_string())?;
        for r in rows.iter().filter(|r| r.frame == f) {
            draw_box(&mut img, &r.bbox, r.status());
        }
        pgm::write(&pgm::frame_path(out_dir, f), &img).map_err(|e| e.to_string())?;
    }
    Ok(())
}
