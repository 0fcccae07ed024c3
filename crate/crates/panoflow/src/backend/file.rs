//! Backend that replays precomputed flow fields from a directory of `.flo`
//! files, keyed by pair identifier. Integration point for estimators that run
//! elsewhere; it has no encode/decode split, so cyclic estimation is limited
//! to image-level modes.

use std::path::PathBuf;

use crate::backend::{BackendCapabilities, EstimatorBackend};
use crate::error::{Error, Result};
use crate::flow::{read_flo, EquirectImage, FlowField};

#[derive(Debug, Clone)]
pub struct FileBackend {
    flow_dir: PathBuf,
    pair_id: String,
}

impl FileBackend {
    /// Reads `<flow_dir>/<pair_id>.flo` on every estimate call.
    pub fn new(flow_dir: impl Into<PathBuf>, pair_id: impl Into<String>) -> Self {
        FileBackend {
            flow_dir: flow_dir.into(),
            pair_id: pair_id.into(),
        }
    }

    pub fn pair_id(&self) -> &str {
        &self.pair_id
    }
}

impl EstimatorBackend for FileBackend {
    fn name(&self) -> &str {
        "file"
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            has_encode_decode_split: false,
            horizontally_circular: false,
        }
    }

    fn estimate(&self, i1: &EquirectImage, _i2: &EquirectImage) -> Result<FlowField> {
        let path = self.flow_dir.join(format!("{}.flo", self.pair_id));
        if !path.is_file() {
            return Err(Error::Lookup(format!(
                "no flow stored for pair '{}' under {}",
                self.pair_id,
                self.flow_dir.display()
            )));
        }
        let flow = read_flo(&path)?;
        if flow.width() != i1.width() || flow.height() != i1.height() {
            return Err(Error::contract(format!(
                "stored flow is {}x{} but the frames are {}x{}",
                flow.width(),
                flow.height(),
                i1.width(),
                i1.height()
            )));
        }
        Ok(flow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{write_flo, FlowRepresentation};
    use std::io::Write as _;

    fn frames(w: usize, h: usize) -> (EquirectImage, EquirectImage) {
        let img = EquirectImage::from_fn(w, h, 1, |x, y, _| ((x + y) % 5) as f32 / 4.0).unwrap();
        (img.clone(), img)
    }

    #[test]
    fn replays_stored_flow_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let flow = FlowField::from_fn(16, 8, FlowRepresentation::Classical, |x, y| {
            (x as f32 * 0.25 - 1.0, y as f32 * -0.5)
        });
        write_flo(&flow, dir.path().join("x.flo")).unwrap();
        let (i1, i2) = frames(16, 8);
        let got = FileBackend::new(dir.path(), "x").estimate(&i1, &i2).unwrap();
        assert_eq!(got.u(), flow.u());
        assert_eq!(got.v(), flow.v());
    }

    #[test]
    fn missing_pair_is_lookup_error() {
        let dir = tempfile::tempdir().unwrap();
        let (i1, i2) = frames(16, 8);
        assert!(matches!(
            FileBackend::new(dir.path(), "absent").estimate(&i1, &i2),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn corrupt_file_surfaces_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.flo");
        std::fs::File::create(&path)
            .unwrap()
            .write_all(b"not a flow file")
            .unwrap();
        let (i1, i2) = frames(16, 8);
        assert!(matches!(
            FileBackend::new(dir.path(), "bad").estimate(&i1, &i2),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn no_split_capability() {
        let b = FileBackend::new("/tmp", "x");
        assert!(!b.capabilities().has_encode_decode_split);
        let (i1, i2) = frames(16, 8);
        assert!(b.encode(&i1, &i2).is_err());
    }
}
