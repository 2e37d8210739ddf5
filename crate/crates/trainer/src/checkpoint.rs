//! Binary checkpoint format: magic, version, architecture, parameter
//! tensors as little-endian f64, optional embedded run record, and a
//! trailing SHA-256 over everything before it.

use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use pino::{Activation, ArchConfig, Case, ModelParams, OperatorModel};

use crate::{Result, RunRecord, TrainError};

const MAGIC: &[u8; 8] = b"WRCKPT01";
const VERSION: u32 = 1;

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn encode_config(buf: &mut Vec<u8>, cfg: &ArchConfig) {
    buf.push(match cfg.case {
        Case::Buoy => 0,
        Case::Radar => 1,
    });
    buf.push(match cfg.activation {
        Activation::Gelu => 0,
        Activation::Identity => 1,
    });
    for v in [
        cfg.n_fourier,
        cfg.n_modes,
        cfg.n_width,
        cfg.pad,
        cfg.input_rows,
        cfg.input_cols,
        cfg.out_nx,
        cfg.out_nt,
    ] {
        push_u32(buf, v as u32);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(TrainError::Checkpoint(
                "truncated checkpoint: integrity check failed".into(),
            ));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
}

fn decode_config(r: &mut Reader) -> Result<ArchConfig> {
    let case = match r.byte()? {
        0 => Case::Buoy,
        1 => Case::Radar,
        other => {
            return Err(TrainError::Checkpoint(format!(
                "unknown case tag {other}"
            )))
        }
    };
    let activation = match r.byte()? {
        0 => Activation::Gelu,
        1 => Activation::Identity,
        other => {
            return Err(TrainError::Checkpoint(format!(
                "unknown activation tag {other}"
            )))
        }
    };
    let mut vals = [0usize; 8];
    for v in vals.iter_mut() {
        *v = r.u32()? as usize;
    }
    Ok(ArchConfig {
        case,
        n_fourier: vals[0],
        n_modes: vals[1],
        n_width: vals[2],
        pad: vals[3],
        input_rows: vals[4],
        input_cols: vals[5],
        out_nx: vals[6],
        out_nt: vals[7],
        activation,
    })
}

/// Serialize the model (and optionally its run record) to `path`.
/// The round trip is bit-exact for every parameter.
pub fn save_checkpoint(
    model: &OperatorModel,
    record: Option<&RunRecord>,
    path: &Path,
) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    push_u32(&mut buf, VERSION);
    encode_config(&mut buf, &model.cfg);

    let record_json = match record {
        Some(r) => serde_json::to_vec(r).expect("run record"),
        None => Vec::new(),
    };
    push_u64(&mut buf, record_json.len() as u64);
    buf.extend_from_slice(&record_json);

    let slices = model.param_slices();
    push_u32(&mut buf, slices.len() as u32);
    for s in &slices {
        push_u64(&mut buf, s.len() as u64);
        for v in s.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    std::fs::write(path, &buf).map_err(|e| TrainError::Checkpoint(format!("write: {e}")))?;
    Ok(())
}

/// Load a checkpoint, verifying magic, version and checksum.
pub fn load_checkpoint_full(path: &Path) -> Result<(OperatorModel, Option<RunRecord>)> {
    let mut data = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut data))
        .map_err(|e| TrainError::Checkpoint(format!("read: {e}")))?;
    if data.len() < 32 + 12 {
        return Err(TrainError::Checkpoint(
            "truncated checkpoint: integrity check failed".into(),
        ));
    }
    let (body, digest) = data.split_at(data.len() - 32);
    let expect = Sha256::digest(body);
    if digest != expect.as_slice() {
        return Err(TrainError::Checkpoint(
            "checksum mismatch: file corrupt or truncated".into(),
        ));
    }
    let mut r = Reader {
        data: body,
        pos: 0,
    };
    if r.take(8)? != MAGIC {
        return Err(TrainError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(TrainError::Checkpoint(format!(
            "unsupported checkpoint version {version}, this build reads {VERSION}"
        )));
    }
    let cfg = decode_config(&mut r)?;
    let record_len = r.u64()? as usize;
    let record = if record_len > 0 {
        let raw = r.take(record_len)?;
        Some(
            serde_json::from_slice(raw)
                .map_err(|e| TrainError::Checkpoint(format!("run record: {e}")))?,
        )
    } else {
        None
    };

    let mut model =
        ModelParams::<f64>::zeros(&cfg).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
    let n_tensors = r.u32()? as usize;
    {
        let mut slices = model.param_slices_mut();
        if n_tensors != slices.len() {
            return Err(TrainError::Checkpoint(format!(
                "tensor count {n_tensors} does not match architecture ({})",
                slices.len()
            )));
        }
        for s in slices.iter_mut() {
            let n = r.u64()? as usize;
            if n != s.len() {
                return Err(TrainError::Checkpoint(format!(
                    "tensor length {n} does not match architecture ({})",
                    s.len()
                )));
            }
            for v in s.iter_mut() {
                *v = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
            }
        }
    }
    Ok((model, record))
}

pub fn load_checkpoint(path: &Path) -> Result<OperatorModel> {
    Ok(load_checkpoint_full(path)?.0)
}

/// Write a run record as a line-delimited structured log next to a
/// checkpoint.
pub fn write_run_log(record: &RunRecord, path: &Path) -> Result<()> {
    std::fs::write(path, record.to_jsonl())
        .map_err(|e| TrainError::Checkpoint(format!("write log: {e}")))
}
