//! Binary checkpoints: `QFNN`, u32 version, the network shape, then every
//! parameter block as little-endian f64 in layer order.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::config::NetConfig;
use crate::error::{NnError, Result};
use crate::network::{Network, Params};
use crate::NnReal;

pub const MAGIC: &[u8; 4] = b"QFNN";
pub const VERSION: u32 = 1;

impl<T: NnReal> Network<T> {
    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        let cfg = self.config();
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        for v in [cfg.qubits, cfg.dense1, cfg.dense2, cfg.conv_filters] {
            w.write_u32::<LittleEndian>(v as u32)?;
        }
        w.write_f64::<LittleEndian>(cfg.dropout_rate)?;
        for block in self.params.blocks() {
            for &x in block {
                w.write_f64::<LittleEndian>(x.to_f64())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(NnError::Checkpoint("not a network checkpoint".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
        if version != VERSION {
            return Err(NnError::Checkpoint(format!("unsupported version {version}")));
        }
        let mut dims = [0usize; 4];
        for d in dims.iter_mut() {
            *d = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        }
        let cfg = NetConfig {
            qubits: dims[0],
            dense1: dims[1],
            dense2: dims[2],
            conv_filters: dims[3],
            dropout_rate: r.read_f64::<LittleEndian>().map_err(truncated)?,
        };
        cfg.validate()?;
        let mut params = Params::zeros(&cfg);
        for block in params.blocks_mut() {
            for x in block.iter_mut() {
                *x = T::lit(r.read_f64::<LittleEndian>().map_err(truncated)?);
            }
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(NnError::Checkpoint("trailing bytes after parameters".into()));
        }
        Network::from_params(cfg, params)
    }
}

fn truncated(e: std::io::Error) -> NnError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        NnError::Checkpoint("file is truncated".into())
    } else {
        NnError::Io(e)
    }
}
