//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "RBLSTM01"
//! config_fp    u64
//! vocab_hash   u64
//! n_blocks     u32
//! per block:   name_len u32, name (UTF-8), rows u64, cols u64, rows*cols × f64 (LE bits)
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 8] = b"RBLSTM01";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_fingerprint: u64,
    pub vocab_hash: u64,
    pub blocks: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.config_fingerprint.to_le_bytes());
        out.extend_from_slice(&self.vocab_hash.to_le_bytes());
        out.extend_from_slice(&(self.blocks.len() as u32).to_le_bytes());
        for (name, t) in &self.blocks {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(t.rows() as u64).to_le_bytes());
            out.extend_from_slice(&(t.cols() as u64).to_le_bytes());
            for v in t.data() {
                out.extend_from_slice(&v.to_bits().to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(r.err("bad magic"));
        }
        let config_fingerprint = r.u64()?;
        let vocab_hash = r.u64()?;
        let n = r.u32()? as usize;
        let mut blocks = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| r.err("block name is not UTF-8"))?
                .to_string();
            let rows = r.u64()? as usize;
            let cols = r.u64()? as usize;
            let count = rows.checked_mul(cols).ok_or_else(|| r.err("block too large"))?;
            if count > (bytes.len() - r.pos) / 8 {
                return Err(r.err("truncated block data"));
            }
            let mut data = Vec::with_capacity(count);
            for _ in 0..count {
                data.push(f64::from_bits(r.u64()?));
            }
            blocks.push((name, Tensor::from_vec(rows, cols, data)?));
        }
        if r.pos != bytes.len() {
            return Err(r.err("trailing bytes"));
        }
        Ok(Checkpoint {
            config_fingerprint,
            vocab_hash,
            blocks,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse {
                path: path.display().to_string(),
                line,
                message,
            },
            other => other,
        })
    }

    pub fn block(&self, name: &str) -> Option<&Tensor> {
        self.blocks.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Parse {
            path: "<checkpoint>".into(),
            line: 0,
            message: format!("{message} at byte {}", self.pos),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err("unexpected end of checkpoint"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    #[test]
    fn file_round_trip_is_bit_exact() {
        let mut rng = SeededRng::new(1);
        let ck = Checkpoint {
            config_fingerprint: 0xDEAD_BEEF,
            vocab_hash: 42,
            blocks: vec![
                ("a".into(), Tensor::init_uniform(3, 2, &mut rng, 1.0)),
                ("b".into(), Tensor::column(&[f64::MIN_POSITIVE, -0.0, 1e308])),
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        ck.write(&path).unwrap();
        let back = Checkpoint::read(&path).unwrap();
        assert_eq!(back.to_bytes(), ck.to_bytes());
        assert_eq!(back.block("b").unwrap().data()[1].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn rejects_garbage() {
        assert!(Checkpoint::from_bytes(b"nope").is_err());
        let mut bytes = Checkpoint {
            config_fingerprint: 1,
            vocab_hash: 2,
            blocks: vec![("x".into(), Tensor::zeros(2, 2))],
        }
        .to_bytes();
        bytes.pop();
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn bytes_round_trip(fp in any::<u64>(), vh in any::<u64>(), vals in proptest::collection::vec(any::<f64>(), 0..20)) {
            let n = vals.len();
            let ck = Checkpoint {
                config_fingerprint: fp,
                vocab_hash: vh,
                blocks: vec![("blk".into(), Tensor::from_vec(n, 1, vals).unwrap())],
            };
            let bytes = ck.to_bytes();
            let back = Checkpoint::from_bytes(&bytes).unwrap();
            prop_assert_eq!(back.to_bytes(), bytes);
        }
    }
}
