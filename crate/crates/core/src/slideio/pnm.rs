//! Binary PPM (`P6`) and PGM (`P5`) with `maxval` 255.
//!
//! Writers emit `P6\n`, then one `# <comment>\n` line per comment, then
//! `<width> <height>\n255\n` and the raw samples. Readers accept any
//! whitespace and `#` comment placement allowed by the Netpbm grammar and
//! return the comments so artifact metadata survives a round trip.

use std::path::Path;

use super::{RasterImage, TissueMask};
use crate::error::{Error, Result};

fn bad(detail: impl Into<String>) -> Error {
    Error::Format {
        what: "pnm",
        detail: detail.into(),
    }
}

fn encode(magic: &str, width: usize, height: usize, comments: &[String], body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 64);
    out.extend_from_slice(magic.as_bytes());
    out.push(b'\n');
    for c in comments {
        out.extend_from_slice(b"# ");
        out.extend_from_slice(c.replace('\n', " ").as_bytes());
        out.push(b'\n');
    }
    out.extend_from_slice(format!("{width} {height}\n255\n").as_bytes());
    out.extend_from_slice(body);
    out
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    comments: Vec<String>,
    body_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(bad("file too short"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut comments = Vec::new();
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // skip whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    let end = bytes[pos..]
                        .iter()
                        .position(|&b| b == b'\n')
                        .map_or(bytes.len(), |e| pos + e);
                    let text = String::from_utf8_lossy(&bytes[pos + 1..end]);
                    comments.push(text.strip_prefix(' ').unwrap_or(&text).to_string());
                    pos = end;
                }
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad(format!("expected a number at byte {start}")));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header number out of range"))?;
    }
    if fields[2] != 255 {
        return Err(bad(format!("maxval {} unsupported (need 255)", fields[2])));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(bad("missing whitespace after maxval")),
    }
    Ok(Header {
        magic,
        width: fields[0],
        height: fields[1],
        comments,
        body_start: pos,
    })
}

pub fn encode_ppm(image: &RasterImage, comments: &[String]) -> Vec<u8> {
    encode("P6", image.width(), image.height(), comments, image.samples())
}

pub fn decode_ppm(bytes: &[u8]) -> Result<(RasterImage, Vec<String>)> {
    let h = parse_header(bytes)?;
    if &h.magic != b"P6" {
        return Err(bad("not a binary PPM (P6)"));
    }
    let need = h.width * h.height * 3;
    let body = &bytes[h.body_start..];
    if body.len() != need {
        return Err(bad(format!("expected {need} sample bytes, found {}", body.len())));
    }
    Ok((RasterImage::new(h.width, h.height, body.to_vec())?, h.comments))
}

pub fn write_ppm(path: &Path, image: &RasterImage, comments: &[String]) -> Result<()> {
    std::fs::write(path, encode_ppm(image, comments))?;
    Ok(())
}

pub fn read_ppm(path: &Path) -> Result<(RasterImage, Vec<String>)> {
    decode_ppm(&std::fs::read(path)?)
}

/// Masks are stored as PGM with tissue = 0 (black), background = 255.
pub fn encode_mask(mask: &TissueMask, comments: &[String]) -> Vec<u8> {
    let body: Vec<u8> = mask.flags().iter().map(|&t| if t { 0 } else { 255 }).collect();
    encode("P5", mask.width(), mask.height(), comments, &body)
}

pub fn decode_mask(bytes: &[u8]) -> Result<(TissueMask, Vec<String>)> {
    let h = parse_header(bytes)?;
    if &h.magic != b"P5" {
        return Err(bad("not a binary PGM (P5)"));
    }
    let body = &bytes[h.body_start..];
    if body.len() != h.width * h.height {
        return Err(bad("mask body length mismatch"));
    }
    let flags = body.iter().map(|&v| v < 128).collect();
    Ok((TissueMask::from_flags(h.width, h.height, flags)?, h.comments))
}
