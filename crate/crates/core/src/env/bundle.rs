//! Bundle files: one environment plus its solved airflow and recorded gas
//! sequence, in a single `.gdm` file.
//!
//! Layout: a one-line JSON header (format tag, version, environment
//! geometry, grid shapes) terminated by `\n`, followed by a little-endian
//! binary payload: blocked-cell mask (u8), face velocities (f64), then gas
//! frames (f32). Loading verifies the exact payload length, so truncated or
//! padded files fail loudly.

use super::flow::FlowField;
use super::gas::GasFieldSequence;
use super::Environment;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvBundle {
    pub env: Environment,
    pub flow: FlowField,
    pub gas: GasFieldSequence,
}

#[derive(Serialize, Deserialize)]
struct FlowMeta {
    cell: f64,
    nx: usize,
    ny: usize,
}

#[derive(Serialize, Deserialize)]
struct GasMeta {
    cell: f64,
    nx: usize,
    ny: usize,
    frame_interval: f64,
    frames: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    env: Environment,
    flow: FlowMeta,
    gas: GasMeta,
}

impl EnvBundle {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            format: "gdm".to_string(),
            version: BUNDLE_VERSION,
            env: self.env.clone(),
            flow: FlowMeta {
                cell: self.flow.cell,
                nx: self.flow.nx,
                ny: self.flow.ny,
            },
            gas: GasMeta {
                cell: self.gas.cell,
                nx: self.gas.nx,
                ny: self.gas.ny,
                frame_interval: self.gas.frame_interval,
                frames: self.gas.frames.len(),
            },
        };
        let mut out = serde_json::to_vec(&header)?;
        out.push(b'\n');
        for &s in self.flow.solid_slice() {
            out.push(u8::from(s));
        }
        for &x in self.flow.u_slice() {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for &x in self.flow.v_slice() {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for frame in &self.gas.frames {
            if frame.len() != self.gas.nx * self.gas.ny {
                return Err(Error::Bundle("gas frame size mismatch".to_string()));
            }
            for &c in frame {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let nl = data
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Bundle("missing header line".to_string()))?;
        let header: Header = serde_json::from_slice(&data[..nl])
            .map_err(|e| Error::Bundle(format!("bad header: {e}")))?;
        if header.format != "gdm" {
            return Err(Error::Bundle(format!(
                "not a bundle file (format {:?})",
                header.format
            )));
        }
        if header.version != BUNDLE_VERSION {
            return Err(Error::Bundle(format!(
                "unsupported bundle version {} (expected {BUNDLE_VERSION})",
                header.version
            )));
        }
        let (fnx, fny) = (header.flow.nx, header.flow.ny);
        let (gnx, gny) = (header.gas.nx, header.gas.ny);
        let n_solid = fnx * fny;
        let n_u = (fnx + 1) * fny;
        let n_v = fnx * (fny + 1);
        let n_gas = header.gas.frames * gnx * gny;
        let expected = n_solid + 8 * (n_u + n_v) + 4 * n_gas;
        let payload = &data[nl + 1..];
        if payload.len() < expected {
            return Err(Error::Bundle(format!(
                "truncated payload: {} bytes, expected {expected}",
                payload.len()
            )));
        }
        if payload.len() > expected {
            return Err(Error::Bundle(format!(
                "trailing bytes after payload: {} extra",
                payload.len() - expected
            )));
        }
        let solid: Vec<bool> = payload[..n_solid].iter().map(|&b| b != 0).collect();
        let mut off = n_solid;
        let read_f64 = |n: usize, off: &mut usize| -> Vec<f64> {
            let out = payload[*off..*off + 8 * n]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            *off += 8 * n;
            out
        };
        let u = read_f64(n_u, &mut off);
        let v = read_f64(n_v, &mut off);
        let mut frames = Vec::with_capacity(header.gas.frames);
        for _ in 0..header.gas.frames {
            let frame: Vec<f64> = payload[off..off + 4 * gnx * gny]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            off += 4 * gnx * gny;
            frames.push(frame);
        }
        let flow = FlowField::from_raw(header.flow.cell, fnx, fny, u, v, solid)?;
        Ok(EnvBundle {
            env: header.env,
            flow,
            gas: GasFieldSequence {
                cell: header.gas.cell,
                nx: gnx,
                ny: gny,
                frame_interval: header.gas.frame_interval,
                frames,
            },
        })
    }
}

pub fn save_bundle(bundle: &EnvBundle, path: &Path) -> Result<()> {
    let bytes = bundle.to_bytes()?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn load_bundle(path: &Path) -> Result<EnvBundle> {
    let data = std::fs::read(path)?;
    EnvBundle::from_bytes(&data)
}
