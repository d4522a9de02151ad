//! Binary on-disk cache of unit-coupling generator tables.
//!
//! Layout: magic, parameter key, tables, then a SHA-256 of everything before
//! it. A file whose checksum or key does not match is ignored and rebuilt.

use crate::bath::BathSpec;
use crate::chebyshev::NODES;
use crate::error::Result;
use crate::generator::{ChannelTable, Order, TablePanel, UnitGenerators};
use crate::kernel::PanelGrid;
use crate::qubit::QubitSpec;
use crate::superop::Super;
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "IQI_CACHE_DIR";
const MAGIC: &[u8; 8] = b"IQIGEN\x00\x01";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    /// Built and stored (a corrupt or mismatched file counts as a miss).
    Miss,
}

/// Directory from the environment, if set and non-empty.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn key_bytes(bath: &BathSpec<f64>, qubit: &QubitSpec<f64>, order: Order) -> Vec<u8> {
    let mut out = Vec::new();
    for x in [bath.s(), bath.omega_c(), qubit.theta(), qubit.delta()] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.push(match order {
        Order::Tcl2 => 2,
        Order::Tcl4 => 4,
    });
    out
}

/// Cache file for a parameter set; λ² is not part of the key.
pub fn cache_path(dir: &Path, bath: &BathSpec<f64>, qubit: &QubitSpec<f64>, order: Order) -> PathBuf {
    let digest = Sha256::digest(key_bytes(bath, qubit, order));
    let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("generator-{order}-{hex}.bin"))
}

fn put_f64(out: &mut Vec<u8>, x: f64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_series(out: &mut Vec<u8>, c: &[Super]) {
    for s in c {
        for z in s.0.iter().flatten() {
            put_f64(out, z.re);
            put_f64(out, z.im);
        }
    }
}

fn put_table(out: &mut Vec<u8>, t: &ChannelTable<Super>) {
    let breaks = t.grid().breaks();
    out.extend_from_slice(&(breaks.len() as u64).to_le_bytes());
    breaks.iter().for_each(|&b| put_f64(out, b));
    put_f64(out, t.delta());
    for p in t.panels() {
        out.push(p.separated as u8);
        put_series(out, &p.base);
        out.push(p.harmonics.len() as u8);
        for (n, c) in &p.harmonics {
            out.push(*n as u8);
            put_series(out, c);
        }
    }
}

pub fn encode(bath: &BathSpec<f64>, qubit: &QubitSpec<f64>, gens: &UnitGenerators) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&key_bytes(bath, qubit, gens.order()));
    put_table(&mut out, &gens.tcl2);
    if let Some(t4) = &gens.tcl4 {
        put_table(&mut out, t4);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let s = self.buf.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn u8(&mut self) -> Option<u8> {
        Some(self.take(1)?[0])
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
    fn series(&mut self) -> Option<Vec<Super>> {
        let mut v = Vec::with_capacity(NODES);
        for _ in 0..NODES {
            let mut s = Super::zero();
            for z in s.0.iter_mut().flatten() {
                *z = Complex64::new(self.f64()?, self.f64()?);
            }
            v.push(s);
        }
        Some(v)
    }
    fn table(&mut self) -> Option<ChannelTable<Super>> {
        let nb = self.u64()? as usize;
        if nb > 1 << 20 {
            return None;
        }
        let breaks = (0..nb).map(|_| self.f64()).collect::<Option<Vec<f64>>>()?;
        let grid = PanelGrid::from_breaks(breaks).ok()?;
        let delta = self.f64()?;
        let mut panels = Vec::with_capacity(grid.panels());
        for _ in 0..grid.panels() {
            let separated = self.u8()? != 0;
            let base = self.series()?;
            let nh = self.u8()?;
            let harmonics = (0..nh).map(|_| Some((self.u8()? as i8, self.series()?))).collect::<Option<Vec<_>>>()?;
            panels.push(TablePanel { base, harmonics, separated });
        }
        ChannelTable::from_parts(grid, delta, panels).ok()
    }
}

/// Decode and verify; `None` on any mismatch.
pub fn decode(bytes: &[u8], bath: &BathSpec<f64>, qubit: &QubitSpec<f64>, order: Order) -> Option<UnitGenerators> {
    if bytes.len() < MAGIC.len() + 32 {
        return None;
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return None;
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(8)? != MAGIC || r.take(key_bytes(bath, qubit, order).len())? != key_bytes(bath, qubit, order).as_slice() {
        return None;
    }
    let tcl2 = r.table()?;
    let tcl4 = match order {
        Order::Tcl2 => None,
        Order::Tcl4 => Some(r.table()?),
    };
    (r.pos == body.len()).then_some(UnitGenerators { tcl2, tcl4 })
}

/// Load tables covering [0, t_max] from `dir`, or build and store them.
pub fn load_or_build(bath: &BathSpec<f64>, qubit: &QubitSpec<f64>, order: Order, t_max: f64, dir: Option<&Path>) -> Result<(UnitGenerators, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((UnitGenerators::build(bath, qubit, order, t_max)?, CacheStatus::Disabled));
    };
    let path = cache_path(dir, bath, qubit, order);
    if let Ok(bytes) = fs::read(&path) {
        if let Some(g) = decode(&bytes, bath, qubit, order) {
            if g.t_max() >= t_max {
                return Ok((g, CacheStatus::Hit));
            }
        }
    }
    let gens = UnitGenerators::build(bath, qubit, order, t_max)?;
    // a failed write only costs a rebuild next time
    let _ = store(&path, &encode(bath, qubit, &gens));
    Ok((gens, CacheStatus::Miss))
}

fn store(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> (BathSpec<f64>, QubitSpec<f64>) {
        (BathSpec::new(1.0, 0.5, 10.0).unwrap(), QubitSpec::new(1.0, 0.3).unwrap())
    }

    #[test]
    fn round_trip_and_corruption() {
        let (b, q) = params();
        let dir = std::env::temp_dir().join(format!("iqi-cache-test-{}", std::process::id()));
        let (g, st) = load_or_build(&b, &q, Order::Tcl2, 30.0, Some(&dir)).unwrap();
        assert_eq!(st, CacheStatus::Miss);
        let (g2, st2) = load_or_build(&b, &q, Order::Tcl2, 20.0, Some(&dir)).unwrap();
        assert_eq!(st2, CacheStatus::Hit);
        assert_eq!(g, g2);

        let path = cache_path(&dir, &b, &q, Order::Tcl2);
        let mut bytes = fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        fs::write(&path, &bytes).unwrap();
        assert!(decode(&bytes, &b, &q, Order::Tcl2).is_none());
        let (g3, st3) = load_or_build(&b, &q, Order::Tcl2, 30.0, Some(&dir)).unwrap();
        assert_eq!(st3, CacheStatus::Miss);
        assert_eq!(g, g3);

        // other parameters never match this file
        let other = QubitSpec::new(1.0, 0.31).unwrap();
        assert!(decode(&fs::read(&path).unwrap(), &b, &other, Order::Tcl2).is_none());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn longer_request_rebuilds() {
        let (b, q) = params();
        let dir = std::env::temp_dir().join(format!("iqi-cache-len-{}", std::process::id()));
        load_or_build(&b, &q, Order::Tcl2, 10.0, Some(&dir)).unwrap();
        let (g, st) = load_or_build(&b, &q, Order::Tcl2, 100.0, Some(&dir)).unwrap();
        assert_eq!(st, CacheStatus::Miss);
        assert!(g.t_max() >= 100.0);
        fs::remove_dir_all(&dir).unwrap();
    }
}
