//! Binary dataset files.
//!
//! Layout: `QFRG`, u32 version, u64 item count, tagged items, then the
//! SHA-256 of every preceding byte. All numbers little-endian; reals are f64.

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;
use qforge_core::linalg::CMatrix;
use qforge_core::qcore::{DensityMatrix, TauVector};
use qforge_core::tomography::TomographyRecord;
use sha2::{Digest, Sha256};

use crate::error::{Result, WbError};

pub const MAGIC: &[u8; 4] = b"QFRG";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8;
const HASH_LEN: usize = 32;

const TAG_STATE: u8 = 1;
const TAG_TAU: u8 = 2;
const TAG_RECORD: u8 = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    State(DensityMatrix<f64>),
    Tau(TauVector<f64>),
    Record(TomographyRecord<f64>),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub items: Vec<Item>,
}

impl Dataset {
    pub fn from_states(states: impl IntoIterator<Item = DensityMatrix<f64>>) -> Self {
        Self { items: states.into_iter().map(Item::State).collect() }
    }

    pub fn from_records(records: impl IntoIterator<Item = TomographyRecord<f64>>) -> Self {
        Self { items: records.into_iter().map(Item::Record).collect() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn states(&self) -> Vec<&DensityMatrix<f64>> {
        self.items.iter().filter_map(|i| if let Item::State(s) = i { Some(s) } else { None }).collect()
    }

    pub fn records(&self) -> Vec<&TomographyRecord<f64>> {
        self.items.iter().filter_map(|i| if let Item::Record(r) = i { Some(r) } else { None }).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        put_u32(&mut buf, VERSION);
        buf.write_u64::<LittleEndian>(self.items.len() as u64).expect("vec write");
        for item in &self.items {
            match item {
                Item::State(rho) => {
                    buf.push(TAG_STATE);
                    put_state(&mut buf, rho);
                }
                Item::Tau(tau) => {
                    buf.push(TAG_TAU);
                    put_u32(&mut buf, tau.qubits() as u32);
                    put_reals(&mut buf, tau.as_slice());
                }
                Item::Record(rec) => {
                    buf.push(TAG_RECORD);
                    put_u32(&mut buf, rec.qubits() as u32);
                    buf.write_u64::<LittleEndian>(rec.shots()).expect("vec write");
                    for f in rec.frequencies() {
                        put_reals(&mut buf, f);
                    }
                    match rec.ground_truth() {
                        Some(rho) => {
                            buf.push(1);
                            put_state(&mut buf, rho);
                        }
                        None => buf.push(0),
                    }
                }
            }
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN + HASH_LEN {
            return Err(WbError::Integrity("file shorter than header and checksum".into()));
        }
        if &bytes[..4] != MAGIC {
            return Err(WbError::Integrity("not a dataset file".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(WbError::Version(version));
        }
        let (body, stored) = bytes.split_at(bytes.len() - HASH_LEN);
        if Sha256::digest(body).as_slice() != stored {
            return Err(WbError::Integrity("checksum mismatch (truncated or corrupted)".into()));
        }
        let mut r = Cursor::new(&body[8..]);
        let count = r.read_u64::<LittleEndian>().map_err(short)?;
        let mut items = Vec::new();
        for _ in 0..count {
            let item = match r.read_u8().map_err(short)? {
                TAG_STATE => Item::State(get_state(&mut r)?),
                TAG_TAU => {
                    let qubits = get_u32(&mut r)? as usize;
                    let values = get_reals(&mut r, 1usize << (2 * qubits))?;
                    Item::Tau(TauVector::new(qubits, values)?)
                }
                TAG_RECORD => {
                    let qubits = get_u32(&mut r)? as usize;
                    let shots = r.read_u64::<LittleEndian>().map_err(short)?;
                    let settings = 3usize.pow(qubits as u32);
                    let frequencies = (0..settings)
                        .map(|_| get_reals(&mut r, 1 << qubits))
                        .collect::<Result<Vec<_>>>()?;
                    let truth = match r.read_u8().map_err(short)? {
                        0 => None,
                        1 => Some(get_state(&mut r)?),
                        t => return Err(WbError::Integrity(format!("bad ground-truth flag {t}"))),
                    };
                    Item::Record(TomographyRecord::new(qubits, shots, frequencies, truth)?)
                }
                tag => return Err(WbError::Integrity(format!("unknown item tag {tag}"))),
            };
            items.push(item);
        }
        if (r.position() as usize) != body.len() - 8 {
            return Err(WbError::Integrity("trailing bytes after the last item".into()));
        }
        Ok(Self { items })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn short(_: std::io::Error) -> WbError {
    WbError::Integrity("item stream ends early".into())
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.write_u32::<LittleEndian>(v).expect("vec write");
}

fn put_reals(buf: &mut Vec<u8>, xs: &[f64]) {
    for &x in xs {
        buf.write_f64::<LittleEndian>(x).expect("vec write");
    }
}

fn put_state(buf: &mut Vec<u8>, rho: &DensityMatrix<f64>) {
    let dim = rho.dim();
    put_u32(buf, dim as u32);
    for i in 0..dim {
        for j in 0..dim {
            let z = rho.entry(i, j);
            put_reals(buf, &[z.re, z.im]);
        }
    }
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32> {
    r.read_u32::<LittleEndian>().map_err(short)
}

fn get_reals<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| r.read_f64::<LittleEndian>().map_err(short)).collect()
}

fn get_state<R: Read>(r: &mut R) -> Result<DensityMatrix<f64>> {
    let dim = get_u32(r)? as usize;
    if dim == 0 || dim > 1 << 8 {
        return Err(WbError::Integrity(format!("implausible dimension {dim}")));
    }
    let raw = get_reals(r, 2 * dim * dim)?;
    let m = CMatrix::from_fn(dim, dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex::new(raw[k], raw[k + 1])
    });
    Ok(DensityMatrix::new(m)?)
}
