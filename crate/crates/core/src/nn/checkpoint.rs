use std::io::{Read, Write};
use std::path::Path;

use super::{Denoiser, DenoiserConfig, Module, NnError};

const MAGIC: &[u8; 8] = b"FAUGCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> NnError {
    NnError::Checkpoint(msg.into())
}

/// Layout: magic, version (u32), config JSON (u32 length + bytes), array
/// count (u32), then per array: name (u32 length + UTF-8), rank (u32), dims
/// (u64 each), values (f64 each). All integers and floats little-endian.
pub fn write_checkpoint<W: Write>(net: &Denoiser, mut w: W) -> Result<(), NnError> {
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    let cfg = serde_json::to_vec(&net.config).map_err(|e| bad(e.to_string()))?;
    w.write_all(&(cfg.len() as u32).to_le_bytes())?;
    w.write_all(&cfg)?;
    let mut count = 0u32;
    net.visit(&mut |_| count += 1);
    w.write_all(&count.to_le_bytes())?;
    let mut result = Ok(());
    net.visit(&mut |p| {
        if result.is_err() {
            return;
        }
        result = (|| {
            w.write_all(&(p.name.len() as u32).to_le_bytes())?;
            w.write_all(p.name.as_bytes())?;
            w.write_all(&(p.shape.len() as u32).to_le_bytes())?;
            for &d in &p.shape {
                w.write_all(&(d as u64).to_le_bytes())?;
            }
            for v in &p.value {
                w.write_all(&v.to_le_bytes())?;
            }
            Ok::<(), std::io::Error>(())
        })();
    });
    result?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NnError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NnError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Denoiser, NnError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let len = read_u32(&mut r)? as usize;
    let mut cfg = vec![0u8; len];
    r.read_exact(&mut cfg)?;
    let config: DenoiserConfig = serde_json::from_slice(&cfg).map_err(|e| bad(e.to_string()))?;

    let count = read_u32(&mut r)? as usize;
    let mut arrays = Vec::with_capacity(count);
    for _ in 0..count {
        let n = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; n];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| bad("parameter name is not UTF-8"))?;
        let rank = read_u32(&mut r)? as usize;
        let shape = (0..rank).map(|_| read_u64(&mut r).map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let len: usize = shape.iter().product();
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f64::from_bits(read_u64(&mut r)?));
        }
        arrays.push((name, shape, values));
    }

    // Structure comes from the config; the seed is irrelevant since every
    // value is overwritten below.
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    let mut net = Denoiser::new(config, &mut rng)?;
    let mut expected = 0;
    net.visit(&mut |_| expected += 1);
    if expected != arrays.len() {
        return Err(bad(format!("expected {expected} arrays, found {}", arrays.len())));
    }
    let mut k = 0;
    let mut err = None;
    net.visit_mut(&mut |p| {
        let (name, shape, values) = &arrays[k];
        k += 1;
        if err.is_some() {
            return;
        }
        if *name != p.name || *shape != p.shape {
            err = Some(bad(format!("array `{name}` {shape:?} does not match `{}` {:?}", p.name, p.shape)));
            return;
        }
        p.value.clone_from(values);
    });
    match err {
        Some(e) => Err(e),
        None => Ok(net),
    }
}

pub fn save_checkpoint(net: &Denoiser, path: &Path) -> Result<(), NnError> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_checkpoint(net, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Denoiser, NnError> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
