//! Middlebury `.flo` interchange format.
//!
//! Layout: 4-byte magic `"PIEH"` (the float 202021.25 in little-endian),
//! `i32` width, `i32` height, then row-major interleaved `f32` `(u, v)` pairs.
//! Invalid pixels are stored as the conventional large sentinel; any component
//! with magnitude above `1e9` is treated as invalid on read. The wrapped /
//! classical representation flag is not stored in the file: every `.flo` reads
//! back as `Classical`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};
use crate::flow::{FlowField, FlowRepresentation};

/// The `.flo` magic bytes.
pub const FLO_MAGIC: [u8; 4] = *b"PIEH";

const SENTINEL_THRESHOLD: f32 = 1e9;
const SENTINEL: f32 = 1e10;

pub fn read_flo(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if magic != FLO_MAGIC {
        return Err(Error::format(format!(
            "{}: bad magic {:?}, not a .flo file",
            path.display(),
            magic
        )));
    }
    let width = r.read_i32::<LittleEndian>().map_err(|e| Error::io(path, e))?;
    let height = r.read_i32::<LittleEndian>().map_err(|e| Error::io(path, e))?;
    if width <= 0 || height <= 0 {
        return Err(Error::format(format!(
            "{}: nonpositive dimensions {}x{}",
            path.display(),
            width,
            height
        )));
    }
    let (width, height) = (width as usize, height as usize);

    let mut flow = FlowField::zeros(width, height);
    for y in 0..height {
        for x in 0..width {
            let u = r.read_f32::<LittleEndian>().map_err(|e| Error::io(path, e))?;
            let v = r.read_f32::<LittleEndian>().map_err(|e| Error::io(path, e))?;
            flow.set(x, y, u, v);
            if !u.is_finite()
                || !v.is_finite()
                || u.abs() > SENTINEL_THRESHOLD
                || v.abs() > SENTINEL_THRESHOLD
            {
                flow.set_valid(x, y, false);
            }
        }
    }
    debug_assert_eq!(flow.representation(), FlowRepresentation::Classical);
    Ok(flow)
}

pub fn write_flo(flow: &FlowField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);

    w.write_all(&FLO_MAGIC).map_err(|e| Error::io(path, e))?;
    w.write_i32::<LittleEndian>(flow.width() as i32)
        .map_err(|e| Error::io(path, e))?;
    w.write_i32::<LittleEndian>(flow.height() as i32)
        .map_err(|e| Error::io(path, e))?;
    for y in 0..flow.height() {
        for x in 0..flow.width() {
            let (u, v) = flow.get(x, y);
            let (u, v) = if flow.is_valid(x, y) {
                (u, v)
            } else {
                (SENTINEL, SENTINEL)
            };
            w.write_f32::<LittleEndian>(u).map_err(|e| Error::io(path, e))?;
            w.write_f32::<LittleEndian>(v).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let flow = FlowField::from_fn(6, 3, FlowRepresentation::Classical, |x, y| {
            (x as f32 * 0.3 - 1.7, y as f32 * -2.1 + 0.5)
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.flo");
        write_flo(&flow, &path).unwrap();
        let back = read_flo(&path).unwrap();
        assert_eq!(flow.u(), back.u());
        assert_eq!(flow.v(), back.v());
        assert_eq!(flow.valid_mask(), back.valid_mask());
    }

    #[test]
    fn invalid_pixels_survive_round_trip() {
        let mut flow = FlowField::zeros(4, 2);
        flow.set(1, 1, 3.0, 4.0);
        flow.set_valid(2, 0, false);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.flo");
        write_flo(&flow, &path).unwrap();
        let back = read_flo(&path).unwrap();
        assert!(!back.is_valid(2, 0));
        assert!(back.is_valid(1, 1));
        assert_eq!(back.get(1, 1), (3.0, 4.0));
    }

    #[test]
    fn bad_magic_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.flo");
        std::fs::File::create(&path)
            .unwrap()
            .write_all(b"XXXX\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00\x00")
            .unwrap();
        match read_flo(&path) {
            Err(crate::Error::Format(_)) => {}
            other => panic!("expected format error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn truncated_payload_is_io_error() {
        let flow = FlowField::zeros(4, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.flo");
        write_flo(&flow, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 7]).unwrap();
        match read_flo(&path) {
            Err(crate::Error::Io { .. }) => {}
            other => panic!("expected io error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn nonpositive_dims_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.flo");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(&FLO_MAGIC).unwrap();
        f.write_all(&0i32.to_le_bytes()).unwrap();
        f.write_all(&2i32.to_le_bytes()).unwrap();
        drop(f);
        assert!(matches!(read_flo(&path), Err(crate::Error::Format(_))));
    }

    #[test]
    fn one_by_one_flow_is_twenty_bytes() {
        let mut flow = FlowField::zeros(1, 1);
        flow.set(0, 0, 1.5, -2.5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tiny.flo");
        write_flo(&flow, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 20);
    }

    #[test]
    fn zero_flow_payload_is_all_zero() {
        let flow = FlowField::zeros(2, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.flo");
        write_flo(&flow, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 12 + 2 * 2 * 2 * 4);
        assert!(bytes[12..].iter().all(|&b| b == 0));
    }
}
