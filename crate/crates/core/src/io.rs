//! Binary file formats. All integers are little-endian `u32`, all values
//! little-endian `f64`.
//!
//! - `.dnt` tensor: `"DNT1"`, order `N`, `N` dims, then the entries in flat order.
//! - `.tnc` component: `"TNC1"`, `N`, connection limit `t`, the `N x N` rank
//!   matrix row-major, then each factor as a complete `.dnt` record.
//! - `.mtnr` model: `"MTNR"`, component count, then the `.tnc` records.
//! - `.msk` mask: `"MSK1"`, `N`, `N` dims, then a bitset over the flat index
//!   (least significant bit first, 1 = observed).

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::network::{MtnrModel, RankMatrix, TnComponent};
use crate::tensor::DenseTensor;

const DNT_MAGIC: &[u8; 4] = b"DNT1";
const TNC_MAGIC: &[u8; 4] = b"TNC1";
const MTNR_MAGIC: &[u8; 4] = b"MTNR";
const MSK_MAGIC: &[u8; 4] = b"MSK1";

/// Refuse to allocate more entries than this from a file header.
const MAX_ENTRIES: usize = 1 << 32;

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::invalid(format!("{what} {v} does not fit in u32")))
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], kind: &'static str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            Error::format(kind, "unexpected end of data")
        } else {
            Error::Io(e)
        }
    })
}

fn read_u32<R: Read>(r: &mut R, kind: &'static str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, kind)?;
    Ok(u32::from_le_bytes(b))
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4], kind: &'static str) -> Result<()> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, kind)?;
    if &b != magic {
        return Err(Error::format(kind, format!("bad magic {b:?}")));
    }
    Ok(())
}

fn write_dims<W: Write>(w: &mut W, dims: &[usize]) -> Result<()> {
    write_u32(w, to_u32(dims.len(), "order")?)?;
    for &d in dims {
        write_u32(w, to_u32(d, "dimension")?)?;
    }
    Ok(())
}

fn read_dims<R: Read>(r: &mut R, kind: &'static str) -> Result<(Vec<usize>, usize)> {
    let n = read_u32(r, kind)? as usize;
    if n == 0 || n > 64 {
        return Err(Error::format(kind, format!("unsupported order {n}")));
    }
    let mut dims = Vec::with_capacity(n);
    let mut len = 1usize;
    for _ in 0..n {
        let d = read_u32(r, kind)? as usize;
        if d == 0 {
            return Err(Error::format(kind, "zero dimension"));
        }
        len = len
            .checked_mul(d)
            .filter(|&l| l <= MAX_ENTRIES)
            .ok_or_else(|| Error::format(kind, "tensor too large"))?;
        dims.push(d);
    }
    Ok((dims, len))
}

pub fn write_tensor<W: Write>(w: &mut W, t: &DenseTensor) -> Result<()> {
    w.write_all(DNT_MAGIC)?;
    write_dims(w, t.dims())?;
    let mut buf = Vec::with_capacity(t.len() * 8);
    for v in t.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_tensor<R: Read>(r: &mut R) -> Result<DenseTensor> {
    expect_magic(r, DNT_MAGIC, "dnt")?;
    let (dims, len) = read_dims(r, "dnt")?;
    let mut bytes = vec![0u8; len * 8];
    read_exact(r, &mut bytes, "dnt")?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DenseTensor::new(dims, data)
}

pub fn write_component<W: Write>(w: &mut W, c: &TnComponent) -> Result<()> {
    w.write_all(TNC_MAGIC)?;
    let n = c.order();
    write_u32(w, to_u32(n, "order")?)?;
    write_u32(w, to_u32(c.max_connections(), "connection limit")?)?;
    for row in c.ranks().to_rows() {
        for v in row {
            write_u32(w, to_u32(v, "rank")?)?;
        }
    }
    for f in c.factors() {
        write_tensor(w, f)?;
    }
    Ok(())
}

pub fn read_component<R: Read>(r: &mut R) -> Result<TnComponent> {
    expect_magic(r, TNC_MAGIC, "tnc")?;
    let n = read_u32(r, "tnc")? as usize;
    if n == 0 || n > 64 {
        return Err(Error::format("tnc", format!("unsupported order {n}")));
    }
    let t = read_u32(r, "tnc")? as usize;
    let mut rows = vec![vec![0usize; n]; n];
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            *v = read_u32(r, "tnc")? as usize;
        }
    }
    let ranks = RankMatrix::from_rows(&rows).map_err(|e| Error::format("tnc", e.to_string()))?;
    let factors = (0..n).map(|_| read_tensor(r)).collect::<Result<Vec<_>>>()?;
    TnComponent::new(factors, ranks, t).map_err(|e| Error::format("tnc", e.to_string()))
}

pub fn write_model<W: Write>(w: &mut W, m: &MtnrModel) -> Result<()> {
    w.write_all(MTNR_MAGIC)?;
    write_u32(w, to_u32(m.len(), "component count")?)?;
    for c in m.components() {
        write_component(w, c)?;
    }
    Ok(())
}

/// Reads a model. The physical dimensions come from the first component, so
/// the file must hold at least one.
pub fn read_model<R: Read>(r: &mut R) -> Result<MtnrModel> {
    expect_magic(r, MTNR_MAGIC, "mtnr")?;
    let count = read_u32(r, "mtnr")? as usize;
    if count == 0 {
        return Err(Error::format("mtnr", "model has no components"));
    }
    let first = read_component(r)?;
    let mut model = MtnrModel::new(&first.physical_dims());
    model.push(first)?;
    for _ in 1..count {
        let c = read_component(r)?;
        model.push(c).map_err(|e| Error::format("mtnr", e.to_string()))?;
    }
    Ok(model)
}

pub fn write_mask<W: Write>(w: &mut W, m: &ObservationMask) -> Result<()> {
    w.write_all(MSK_MAGIC)?;
    write_dims(w, m.dims())?;
    let mut bytes = vec![0u8; m.len().div_ceil(8)];
    for (i, &o) in m.as_slice().iter().enumerate() {
        if o {
            bytes[i / 8] |= 1 << (i % 8);
        }
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_mask<R: Read>(r: &mut R) -> Result<ObservationMask> {
    expect_magic(r, MSK_MAGIC, "msk")?;
    let (dims, len) = read_dims(r, "msk")?;
    let mut bytes = vec![0u8; len.div_ceil(8)];
    read_exact(r, &mut bytes, "msk")?;
    let observed = (0..len).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect();
    ObservationMask::new(dims, observed)
}

fn save<T: ?Sized>(path: &Path, value: &T, write: impl Fn(&mut BufWriter<File>, &T) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write(&mut w, value)?;
    w.flush()?;
    Ok(())
}

fn load<T>(path: &Path, read: impl Fn(&mut BufReader<File>) -> Result<T>) -> Result<T> {
    let mut r = BufReader::new(File::open(path)?);
    read(&mut r)
}

pub fn save_tensor(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    save(path.as_ref(), t, write_tensor)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    load(path.as_ref(), read_tensor)
}

pub fn save_component(path: impl AsRef<Path>, c: &TnComponent) -> Result<()> {
    save(path.as_ref(), c, write_component)
}

pub fn load_component(path: impl AsRef<Path>) -> Result<TnComponent> {
    load(path.as_ref(), read_component)
}

pub fn save_model(path: impl AsRef<Path>, m: &MtnrModel) -> Result<()> {
    save(path.as_ref(), m, write_model)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MtnrModel> {
    load(path.as_ref(), read_model)
}

pub fn save_mask(path: impl AsRef<Path>, m: &ObservationMask) -> Result<()> {
    save(path.as_ref(), m, write_mask)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<ObservationMask> {
    load(path.as_ref(), read_mask)
}
