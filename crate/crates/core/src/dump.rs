//! `QSTATE01` binary state dumps.
//!
//! Layout, all little-endian: the 8-byte magic, `nx` and `ny` as `u64`,
//! `x_min, x_max, y_min, y_max, t` as `f64`, then `nx * ny` pairs
//! `(re, im)` of `f64` in row-major, `y`-outer order.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, QuantumState};

pub const MAGIC: &[u8; 8] = b"QSTATE01";
pub const HEADER_LEN: usize = 8 + 2 * 8 + 5 * 8;

pub fn encode(state: &QuantumState) -> Vec<u8> {
    let g = &state.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * state.amplitudes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.nx as u64).to_le_bytes());
    out.extend_from_slice(&(g.ny as u64).to_le_bytes());
    for v in [g.x_min, g.x_max, g.y_min, g.y_max, state.t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for a in &state.amplitudes {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

fn f64_at(bytes: &[u8], offset: usize) -> f64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&bytes[offset..offset + 8]);
    f64::from_le_bytes(b)
}

fn u64_at(bytes: &[u8], offset: usize) -> u64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&bytes[offset..offset + 8]);
    u64::from_le_bytes(b)
}

pub fn decode(bytes: &[u8]) -> Result<QuantumState> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Dump(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let nx = usize::try_from(u64_at(bytes, 8)).map_err(|_| Error::Dump("nx overflows".into()))?;
    let ny = usize::try_from(u64_at(bytes, 16)).map_err(|_| Error::Dump("ny overflows".into()))?;
    let grid = GridSpec {
        nx,
        ny,
        x_min: f64_at(bytes, 24),
        x_max: f64_at(bytes, 32),
        y_min: f64_at(bytes, 40),
        y_max: f64_at(bytes, 48),
    };
    grid.validate().map_err(|e| Error::Dump(e.to_string()))?;
    let t = f64_at(bytes, 56);
    if !t.is_finite() {
        return Err(Error::Dump("non-finite time".into()));
    }
    let expected = grid
        .len()
        .checked_mul(16)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Dump("size overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Dump(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let amplitudes = bytes[HEADER_LEN..].chunks_exact(16).map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8))).collect();
    Ok(QuantumState { grid, t, amplitudes })
}

pub fn write_file(path: &Path, state: &QuantumState) -> Result<()> {
    std::fs::write(path, encode(state))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<QuantumState> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_trip() {
        let g = GridSpec::new(16, 17, -1.0, 2.0, -3.0, 4.0).unwrap();
        let s = QuantumState::from_fn(g, 0.25, |x, y| Complex64::new(x, -y));
        let bytes = encode(&s);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 16 * 17);
        assert_eq!(decode(&bytes).unwrap(), s);
    }

    #[test]
    fn rejects_truncation_and_magic() {
        let g = GridSpec::square(16, 1.0).unwrap();
        let bytes = encode(&QuantumState::zeros(g, 0.0));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut huge = bytes;
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(&huge).is_err());
    }

    proptest! {
        #[test]
        fn decode_never_panics(data in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = decode(&data);
        }

        #[test]
        fn decoding_header_mutations(byte in 0usize..HEADER_LEN, val in any::<u8>()) {
            let g = GridSpec::square(16, 1.0).unwrap();
            let mut bytes = encode(&QuantumState::zeros(g, 0.0));
            bytes[byte] = val;
            if let Ok(s) = decode(&bytes) {
                prop_assert_eq!(encode(&s), bytes);
            }
        }
    }
}
