//! `WWS1` binary snapshots.
//!
//! Layout (little-endian): the magic bytes `WWS1`, `u32 nx`, `u32 ny`,
//! `f64 lx`, `f64 ly`, `f64 t`, then `h` and `phi_omega` as row-major `f64`
//! arrays of `nx * ny` entries each. Round trips are bit-exact.

use std::path::Path;

use rotwave_core::dynamics::SurfaceState;
use rotwave_core::spectral::{Grid2D, RealField};

use crate::error::{HarnessError, Result};

pub const MAGIC: &[u8; 4] = b"WWS1";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 * 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub nx: u32,
    pub ny: u32,
    pub lx: f64,
    pub ly: f64,
    pub t: f64,
    pub h: Vec<f64>,
    pub phi_omega: Vec<f64>,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Snapshot(msg.into())
}

impl Snapshot {
    pub fn from_state(state: &SurfaceState) -> Self {
        let g = state.grid();
        Self {
            nx: g.nx() as u32,
            ny: g.ny() as u32,
            lx: g.lx(),
            ly: g.ly(),
            t: state.t,
            h: state.h.values().to_vec(),
            phi_omega: state.phi_omega.values().to_vec(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.h.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.nx.to_le_bytes());
        out.extend_from_slice(&self.ny.to_le_bytes());
        for v in [self.lx, self.ly, self.t] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in self.h.iter().chain(&self.phi_omega) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses and checks a byte buffer; never panics on malformed input.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the {HEADER_LEN}-byte header", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("missing WWS1 magic"));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let (nx, ny) = (u32_at(4), u32_at(8));
        let (lx, ly, t) = (f64_at(12), f64_at(20), f64_at(28));
        let n = (nx as usize)
            .checked_mul(ny as usize)
            .filter(|&n| n > 0)
            .ok_or_else(|| bad(format!("invalid dimensions {nx} x {ny}")))?;
        let expected = n.checked_mul(16).and_then(|b| b.checked_add(HEADER_LEN));
        if expected != Some(bytes.len()) {
            return Err(bad(format!("{nx} x {ny} snapshot needs {expected:?} bytes, found {}", bytes.len())));
        }
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return Err(bad(format!("box lengths must be positive, got {lx} x {ly}")));
        }
        if !t.is_finite() {
            return Err(bad("non-finite time"));
        }
        let values: Vec<f64> = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite field values"));
        }
        let phi_omega = values[n..].to_vec();
        let mut h = values;
        h.truncate(n);
        Ok(Self { nx, ny, lx, ly, t, h, phi_omega })
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx as usize, self.ny as usize, self.lx, self.ly).map_err(|e| bad(e.to_string()))
    }

    pub fn to_state(&self) -> Result<SurfaceState> {
        let g = self.grid()?;
        Ok(SurfaceState::new(RealField::new(&g, self.h.clone())?, RealField::new(&g, self.phi_omega.clone())?, self.t)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        Self::decode(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let g = Grid2D::square(8).unwrap();
        let state = SurfaceState::new(
            RealField::from_fn(&g, |x, y| (x + 0.1).sin() * y.cos() / 3.0),
            RealField::from_fn(&g, |x, _| 1e-300 * x - 7.25),
            0.1 + 0.2,
        )
        .unwrap();
        Snapshot::from_state(&state)
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let bytes = s.encode();
        assert_eq!(&bytes[..4], b"WWS1");
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 64);
        let back = Snapshot::decode(&bytes).unwrap();
        assert_eq!(back.encode(), bytes);
        assert_eq!(back.t.to_bits(), s.t.to_bits());
        let state = back.to_state().unwrap();
        assert_eq!(Snapshot::from_state(&state), s);
    }

    #[test]
    fn header_layout() {
        let bytes = sample().encode();
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 2.0 * std::f64::consts::PI);
        assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 0.1 + 0.2);
    }

    #[test]
    fn rejects_malformed_input() {
        let good = sample().encode();
        assert!(Snapshot::decode(&good[..10]).is_err());
        assert!(Snapshot::decode(&good[..good.len() - 1]).is_err());
        let mut m = good.clone();
        m[0] = b'X';
        assert!(Snapshot::decode(&m).is_err());
        let mut m = good.clone();
        m[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
        m[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(Snapshot::decode(&m).is_err());
        let mut m = good.clone();
        m[12..20].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(Snapshot::decode(&m).is_err());
        let mut m = good.clone();
        let at = HEADER_LEN + 8 * 5;
        m[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(Snapshot::decode(&m).is_err());
        // Decodes but is not a valid grid.
        let mut m = good;
        m[4..8].copy_from_slice(&16u32.to_le_bytes());
        m[8..12].copy_from_slice(&4u32.to_le_bytes());
        assert!(Snapshot::decode(&m).unwrap().to_state().is_err());
    }
}
