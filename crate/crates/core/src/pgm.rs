//! Binary PGM (P5, 8-bit) frame files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::appearance::GrayImage;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}

/// Frame file name for a 1-based frame index (`000001.pgm`).
pub fn frame_file_name(frame: u32) -> String {
    format!("{frame:06}.pgm")
}

pub fn frame_path(dir: &Path, frame: u32) -> PathBuf {
    dir.join(frame_file_name(frame))
}

/// Encodes an image as P5 with maxval 255.
pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

/// Decodes a P5 image; comments in the header are skipped.
pub fn decode(bytes: &[u8]) -> Result<GrayImage, String> {
    let mut pos = 0usize;
    let mut fields: Vec<String> = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(format!("unsupported magic {:?}", fields[0]));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("bad header field {s:?}"))
    };
    let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval != 255 {
        return Err(format!("only maxval 255 is supported, got {maxval}"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let need = w * h;
    if bytes.len() < pos + need {
        return Err(format!(
            "expected {need} pixel bytes, found {}",
            bytes.len().saturating_sub(pos)
        ));
    }
    GrayImage::new(w, h, bytes[pos..pos + need].to_vec()).map_err(|e| e.to_string())
}

pub fn read(path: &Path) -> Result<GrayImage, PgmError> {
    let bytes = fs::read(path).map_err(|source| PgmError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes).map_err(|msg| PgmError::Format {
        path: path.to_path_buf(),
        msg,
    })
}

pub fn write(path: &Path, img: &GrayImage) -> Result<(), PgmError> {
    let io_err = |source| PgmError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(&encode(img)).map_err(io_err)
}
