//! Binary file formats. All integers and floats are little-endian.
//!
//! FID file, 64-byte header then data:
//!
//! | offset | type     | field                         |
//! |--------|----------|-------------------------------|
//! | 0      | [u8; 4]  | magic `FID2`                  |
//! | 4      | u32      | version (1)                   |
//! | 8      | u32      | n_t1                          |
//! | 12     | u32      | components (2)                |
//! | 16     | u32      | n_t2                          |
//! | 20     | f64      | sw1 (Hz)                      |
//! | 28     | f64      | sw2 (Hz)                      |
//! | 36     | u32      | quadrature (0 States, 1 echo-antiecho) |
//! | 40     | [u8; 24] | reserved, zero                |
//! | 64     | f64 × 2  | re, im for each point in [t1][component][t2] order |
//!
//! Spectrum file, 64-byte header then data:
//!
//! | offset | type     | field                         |
//! |--------|----------|-------------------------------|
//! | 0      | [u8; 4]  | magic `SPC2`                  |
//! | 4      | u32      | version (1)                   |
//! | 8      | u32      | n1                            |
//! | 12     | u32      | n2                            |
//! | 16     | f64      | f1 of first row (Hz)          |
//! | 24     | f64      | f1 step (Hz)                  |
//! | 32     | f64      | f2 of first column (Hz)       |
//! | 40     | f64      | f2 step (Hz)                  |
//! | 48     | u32      | provenance length in bytes    |
//! | 52     | [u8; 12] | reserved, zero                |
//! | 64     | f64      | n1·n2 values, row-major [f1][f2] |
//! | …      | UTF-8    | provenance, one `key=value` per line |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{ReadBytesExt, WriteBytesExt, LE};
use ndarray::{Array2, Array3};
use num_complex::Complex64 as C64;

use super::{Fid2D, Quadrature, Spectrum2D};
use crate::error::{Error, Result};

pub const FID_MAGIC: &[u8; 4] = b"FID2";
pub const SPC_MAGIC: &[u8; 4] = b"SPC2";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

// keeps a hostile header from requesting absurd allocations
const MAX_POINTS: u64 = 1 << 28;

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

fn check_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m).map_err(truncated)?;
    if &m != magic {
        return Err(Error::Format(format!("bad magic {:?}, expected {:?}", m, std::str::from_utf8(magic).unwrap())));
    }
    let v = r.read_u32::<LE>().map_err(truncated)?;
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {v}")));
    }
    Ok(())
}

pub fn write_fid(w: &mut impl Write, fid: &Fid2D) -> Result<()> {
    let shape = fid.data.shape();
    w.write_all(FID_MAGIC)?;
    w.write_u32::<LE>(FORMAT_VERSION)?;
    w.write_u32::<LE>(shape[0] as u32)?;
    w.write_u32::<LE>(shape[1] as u32)?;
    w.write_u32::<LE>(shape[2] as u32)?;
    w.write_f64::<LE>(fid.sw1_hz)?;
    w.write_f64::<LE>(fid.sw2_hz)?;
    w.write_u32::<LE>(fid.quadrature.code())?;
    w.write_all(&[0u8; 24])?;
    for v in fid.data.iter() {
        w.write_f64::<LE>(v.re)?;
        w.write_f64::<LE>(v.im)?;
    }
    Ok(())
}

pub fn read_fid(r: &mut impl Read) -> Result<Fid2D> {
    check_magic(r, FID_MAGIC)?;
    let n_t1 = r.read_u32::<LE>().map_err(truncated)? as usize;
    let comps = r.read_u32::<LE>().map_err(truncated)? as usize;
    let n_t2 = r.read_u32::<LE>().map_err(truncated)? as usize;
    let sw1 = r.read_f64::<LE>().map_err(truncated)?;
    let sw2 = r.read_f64::<LE>().map_err(truncated)?;
    let quadrature = Quadrature::from_code(r.read_u32::<LE>().map_err(truncated)?)?;
    let mut reserved = [0u8; 24];
    r.read_exact(&mut reserved).map_err(truncated)?;
    if comps != 2 {
        return Err(Error::Format(format!("expected 2 components, found {comps}")));
    }
    if n_t1 == 0 || n_t2 == 0 || (n_t1 as u64) * (n_t2 as u64) * 2 > MAX_POINTS {
        return Err(Error::Format(format!("implausible size {n_t1}×{n_t2}")));
    }
    if !(sw1.is_finite() && sw1 > 0.0 && sw2.is_finite() && sw2 > 0.0) {
        return Err(Error::Format("spectral widths must be positive".into()));
    }
    let mut data = Array3::zeros((n_t1, comps, n_t2));
    for v in data.iter_mut() {
        let re = r.read_f64::<LE>().map_err(truncated)?;
        let im = r.read_f64::<LE>().map_err(truncated)?;
        *v = C64::new(re, im);
    }
    Ok(Fid2D { data, sw1_hz: sw1, sw2_hz: sw2, quadrature })
}

pub fn write_spectrum(w: &mut impl Write, s: &Spectrum2D) -> Result<()> {
    let (n1, n2) = s.dim();
    let prov: String = s.provenance.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
    w.write_all(SPC_MAGIC)?;
    w.write_u32::<LE>(FORMAT_VERSION)?;
    w.write_u32::<LE>(n1 as u32)?;
    w.write_u32::<LE>(n2 as u32)?;
    for v in [s.f1_first, s.f1_step, s.f2_first, s.f2_step] {
        w.write_f64::<LE>(v)?;
    }
    w.write_u32::<LE>(prov.len() as u32)?;
    w.write_all(&[0u8; 12])?;
    for v in s.data.iter() {
        w.write_f64::<LE>(*v)?;
    }
    w.write_all(prov.as_bytes())?;
    Ok(())
}

pub fn read_spectrum(r: &mut impl Read) -> Result<Spectrum2D> {
    check_magic(r, SPC_MAGIC)?;
    let n1 = r.read_u32::<LE>().map_err(truncated)? as usize;
    let n2 = r.read_u32::<LE>().map_err(truncated)? as usize;
    let mut axes = [0.0; 4];
    for a in axes.iter_mut() {
        *a = r.read_f64::<LE>().map_err(truncated)?;
    }
    let prov_len = r.read_u32::<LE>().map_err(truncated)? as usize;
    let mut reserved = [0u8; 12];
    r.read_exact(&mut reserved).map_err(truncated)?;
    if n1 == 0 || n2 == 0 || (n1 as u64) * (n2 as u64) > MAX_POINTS || prov_len > 1 << 20 {
        return Err(Error::Format(format!("implausible size {n1}×{n2}")));
    }
    let mut data = Array2::zeros((n1, n2));
    for v in data.iter_mut() {
        *v = r.read_f64::<LE>().map_err(truncated)?;
    }
    let mut prov = vec![0u8; prov_len];
    r.read_exact(&mut prov).map_err(truncated)?;
    let prov = String::from_utf8(prov).map_err(|_| Error::Format("provenance is not UTF-8".into()))?;
    let provenance =
        prov.lines().filter_map(|l| l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string()))).collect();
    Ok(Spectrum2D { data, f1_first: axes[0], f1_step: axes[1], f2_first: axes[2], f2_step: axes[3], provenance })
}

pub fn save_fid(path: impl AsRef<Path>, fid: &Fid2D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_fid(&mut w, fid)?;
    w.flush()?;
    Ok(())
}

pub fn load_fid(path: impl AsRef<Path>) -> Result<Fid2D> {
    read_fid(&mut BufReader::new(File::open(path)?))
}

pub fn save_spectrum(path: impl AsRef<Path>, s: &Spectrum2D) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_spectrum(&mut w, s)?;
    w.flush()?;
    Ok(())
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum2D> {
    read_spectrum(&mut BufReader::new(File::open(path)?))
}
