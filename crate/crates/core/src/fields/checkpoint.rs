//! Binary checkpoint format.
//!
//! All integers and floats are little-endian:
//!
//! | offset | size        | content                                   |
//! |--------|-------------|-------------------------------------------|
//! | 0      | 4           | magic `QWLB`                              |
//! | 4      | 2           | version (`u16`, currently 1)              |
//! | 6      | 2           | dims (`u16`, 1 or 2)                      |
//! | 8      | 8·dims      | grid shape (`u64` each; 2-D is `nz, ny`)  |
//! | …      | 8           | dz (`f64`)                                |
//! | …      | 8           | dt (`f64`)                                |
//! | …      | 8           | step index (`u64`)                        |
//! | …      | 16·c·sites  | payload: `(re, im)` `f64` pairs           |
//!
//! The payload is site-major with components interleaved per site; 1-D
//! fields carry `c = 2` components, 2-D fields `c = 4`. 2-D sites are
//! ordered `z·ny + y`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::C64;

use super::{Boundary, Lattice1D, SpinorField1D};

pub const MAGIC: [u8; 4] = *b"QWLB";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    OneD(usize),
    TwoD { nz: usize, ny: usize },
}

impl Shape {
    pub fn dims(&self) -> u16 {
        match self {
            Shape::OneD(_) => 1,
            Shape::TwoD { .. } => 2,
        }
    }

    pub fn sites(&self) -> usize {
        match *self {
            Shape::OneD(n) => n,
            Shape::TwoD { nz, ny } => nz * ny,
        }
    }

    pub fn components(&self) -> usize {
        match self {
            Shape::OneD(_) => 2,
            Shape::TwoD { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub shape: Shape,
    pub dz: f64,
    pub dt: f64,
    pub step_index: u64,
    /// `components × sites` amplitudes, site-major.
    pub payload: Vec<C64>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos as u64,
                message: format!("truncated while reading {what}"),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + self.payload.len() * 16);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.shape.dims().to_le_bytes());
        match self.shape {
            Shape::OneD(n) => out.extend_from_slice(&(n as u64).to_le_bytes()),
            Shape::TwoD { nz, ny } => {
                out.extend_from_slice(&(nz as u64).to_le_bytes());
                out.extend_from_slice(&(ny as u64).to_le_bytes());
            }
        }
        out.extend_from_slice(&self.dz.to_le_bytes());
        out.extend_from_slice(&self.dt.to_le_bytes());
        out.extend_from_slice(&self.step_index.to_le_bytes());
        for z in &self.payload {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        let magic = r.take(4, "magic")?;
        if magic != MAGIC {
            return Err(Error::Format {
                offset: 0,
                message: format!("bad magic {magic:?}, expected \"QWLB\""),
            });
        }
        let version = r.u16("version")?;
        if version != VERSION {
            return Err(Error::Format {
                offset: 4,
                message: format!("unsupported version {version}, this build reads version {VERSION}"),
            });
        }
        let dims = r.u16("dims")?;
        let shape = match dims {
            1 => Shape::OneD(r.u64("shape")? as usize),
            2 => {
                let nz = r.u64("shape")? as usize;
                let ny = r.u64("shape")? as usize;
                Shape::TwoD { nz, ny }
            }
            d => {
                return Err(Error::Format {
                    offset: 6,
                    message: format!("dims must be 1 or 2, found {d}"),
                })
            }
        };
        if shape.sites() == 0 {
            return Err(Error::Format {
                offset: 8,
                message: "grid shape has zero sites".into(),
            });
        }
        let dz = r.f64("dz")?;
        let dt = r.f64("dt")?;
        let step_index = r.u64("step index")?;
        let header = r.pos;
        let expected = shape
            .sites()
            .checked_mul(shape.components() * 16)
            .ok_or_else(|| Error::Format {
                offset: 8,
                message: "grid shape overflows".into(),
            })?;
        let found = buf.len() - header;
        if found != expected {
            return Err(Error::Format {
                offset: header as u64,
                message: format!("payload is {found} bytes, shape requires {expected}"),
            });
        }
        let mut payload = Vec::with_capacity(expected / 16);
        for _ in 0..expected / 16 {
            let at = r.pos;
            let re = r.f64("payload")?;
            let im = r.f64("payload")?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::Format {
                    offset: at as u64,
                    message: "non-finite amplitude in payload".into(),
                });
            }
            payload.push(C64::new(re, im));
        }
        Ok(Checkpoint {
            shape,
            dz,
            dt,
            step_index,
            payload,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&buf)
    }

    pub fn from_field(f: &SpinorField1D, lat: &Lattice1D) -> Self {
        Checkpoint {
            shape: Shape::OneD(f.len()),
            dz: lat.dz(),
            dt: lat.dt(),
            step_index: f.step_index,
            payload: f.data.iter().flatten().copied().collect(),
        }
    }

    /// The 1-D field and its lattice. Boundary conditions are not stored; the
    /// lattice comes back periodic.
    pub fn into_field(self) -> Result<(SpinorField1D, Lattice1D)> {
        let Shape::OneD(n) = self.shape else {
            return Err(Error::Format {
                offset: 6,
                message: "expected a 1-D checkpoint, found 2-D".into(),
            });
        };
        let lat = Lattice1D::new(n, self.dz, self.dt, Boundary::Periodic).map_err(|e| Error::Format {
            offset: 8,
            message: e.to_string(),
        })?;
        let data = self.payload.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        let mut f = SpinorField1D::new(data, &lat)?;
        f.step_index = self.step_index;
        Ok((f, lat))
    }
}

pub fn save_checkpoint(f: &SpinorField1D, lat: &Lattice1D, path: impl AsRef<Path>) -> Result<()> {
    Checkpoint::from_field(f, lat).save(path)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(SpinorField1D, Lattice1D)> {
    Checkpoint::load(path)?.into_field()
}
