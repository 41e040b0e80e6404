//! Disk cache for solved oracle tables.
//!
//! Exact tables for the larger sailing lakes take a while to build, so they
//! are cached in a versioned little-endian binary format keyed by the model's
//! name, configuration hash, and horizon. Floating-point values are stored
//! as raw bits, so a round trip reproduces the table bit-for-bit.
//!
//! The cache directory is the `mcplan-oracle-cache` folder under the system
//! temp directory; the `MCPLAN_ORACLE_CACHE` environment variable overrides
//! it (set it to an empty string to disable caching). All cache traffic is
//! best-effort: corrupt, stale, or unwritable cache files are treated as
//! misses, never as errors.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{ReadBytesExt, WriteBytesExt, LE};

use crate::mdp::{ActionId, GenerativeMdp, StateId};
use crate::Result;

use super::{BoundParams, OracleTable, VEntry};

const MAGIC: &[u8; 4] = b"MCOR";
const VERSION: u32 = 1;
const BEST_NONE: u16 = u16::MAX;

/// Resolved cache directory, or `None` when caching is disabled.
pub fn cache_dir() -> Option<PathBuf> {
    match std::env::var_os("MCPLAN_ORACLE_CACHE") {
        Some(dir) if dir.is_empty() => None,
        Some(dir) => Some(PathBuf::from(dir)),
        None => Some(std::env::temp_dir().join("mcplan-oracle-cache")),
    }
}

/// Load the table for `mdp` from the cache if present, otherwise build it
/// with [`OracleTable::build`] and cache the result.
pub fn load_or_build(mdp: &dyn GenerativeMdp, cell_cap: u64) -> Result<OracleTable> {
    let dir = cache_dir();
    if let Some(dir) = &dir {
        if let Some(table) = load_from_dir(dir, mdp) {
            return Ok(table);
        }
    }
    let table = OracleTable::build(mdp, cell_cap)?;
    if let Some(dir) = &dir {
        store_to_dir(dir, &table);
    }
    Ok(table)
}

/// File name for a model key (path-safe).
fn file_name(key: &str) -> String {
    let safe: String = key
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    format!("{safe}.mcor")
}

/// Try to read the cached table for `mdp` from `dir`. Any failure is a miss.
pub fn load_from_dir(dir: &Path, mdp: &dyn GenerativeMdp) -> Option<OracleTable> {
    let key = super::model_key(mdp);
    let path = dir.join(file_name(&key));
    let bytes = fs::read(path).ok()?;
    read_table(&mut &bytes[..], &key).ok()
}

/// Best-effort write of `table` into `dir`.
pub fn store_to_dir(dir: &Path, table: &OracleTable) {
    let _ = try_store(dir, table);
}

fn try_store(dir: &Path, table: &OracleTable) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file_name(table.model_key()));
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    let mut buf = Vec::new();
    write_table(&mut buf, table)?;
    fs::write(&tmp, &buf)?;
    // Atomic publish so concurrent builders never observe a torn file.
    fs::rename(&tmp, &path)
}

fn write_table<W: Write>(w: &mut W, table: &OracleTable) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(VERSION)?;
    let key = table.model_key().as_bytes();
    w.write_u32::<LE>(key.len() as u32)?;
    w.write_all(key)?;
    w.write_u64::<LE>(table.horizon() as u64)?;
    let p = table.params();
    w.write_u32::<LE>(p.max_actions)?;
    w.write_u32::<LE>(p.max_outcomes)?;
    w.write_u64::<LE>(p.min_probability.to_bits())?;
    w.write_u8(p.one_step_gap.is_some() as u8)?;
    w.write_u64::<LE>(p.one_step_gap.unwrap_or(0.0).to_bits())?;
    let entries = table.sorted_entries();
    w.write_u64::<LE>(entries.len() as u64)?;
    for (&(state, h), e) in entries {
        w.write_u64::<LE>(state)?;
        w.write_u32::<LE>(h)?;
        w.write_u8(e.maximizing as u8)?;
        w.write_u16::<LE>(e.best.unwrap_or(BEST_NONE))?;
        w.write_u32::<LE>(e.q.len() as u32)?;
        w.write_u64::<LE>(e.v.to_bits())?;
        for &q in &e.q {
            w.write_u64::<LE>(q.to_bits())?;
        }
    }
    Ok(())
}

fn read_table<R: Read>(r: &mut R, expect_key: &str) -> io::Result<OracleTable> {
    let bad = |what: &str| io::Error::new(io::ErrorKind::InvalidData, what.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("magic mismatch"));
    }
    if r.read_u32::<LE>()? != VERSION {
        return Err(bad("version mismatch"));
    }
    let key_len = r.read_u32::<LE>()? as usize;
    if key_len > 4096 {
        return Err(bad("oversized key"));
    }
    let mut key = vec![0u8; key_len];
    r.read_exact(&mut key)?;
    let key = String::from_utf8(key).map_err(|_| bad("key not utf-8"))?;
    if key != expect_key {
        return Err(bad("key mismatch"));
    }
    let horizon = r.read_u64::<LE>()? as usize;
    let max_actions = r.read_u32::<LE>()?;
    let max_outcomes = r.read_u32::<LE>()?;
    let min_probability = f64::from_bits(r.read_u64::<LE>()?);
    let has_gap = r.read_u8()? != 0;
    let gap_bits = r.read_u64::<LE>()?;
    let one_step_gap = has_gap.then(|| f64::from_bits(gap_bits));
    let count = r.read_u64::<LE>()?;
    if count > 1_000_000_000 {
        return Err(bad("oversized table"));
    }
    let mut entries: HashMap<(StateId, u32), VEntry> = HashMap::with_capacity(count as usize);
    for _ in 0..count {
        let state = r.read_u64::<LE>()?;
        let h = r.read_u32::<LE>()?;
        let maximizing = r.read_u8()? != 0;
        let best_raw = r.read_u16::<LE>()?;
        let best = (best_raw != BEST_NONE).then_some(best_raw as ActionId);
        let q_len = r.read_u32::<LE>()? as usize;
        if q_len > 1_000_000 {
            return Err(bad("oversized action list"));
        }
        let v = f64::from_bits(r.read_u64::<LE>()?);
        let mut q = Vec::with_capacity(q_len);
        for _ in 0..q_len {
            q.push(f64::from_bits(r.read_u64::<LE>()?));
        }
        entries.insert((state, h), VEntry { q, v, best, maximizing });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(OracleTable {
        horizon,
        entries,
        params: BoundParams { max_actions, max_outcomes, min_probability, one_step_gap },
        model_key: key,
    })
}
