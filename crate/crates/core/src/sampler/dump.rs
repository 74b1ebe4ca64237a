//! Raw sample dump: a little-endian binary file for external analysis.
//!
//! Layout: 8-byte magic, `u32` version, `u64` graph fingerprint, `f64`
//! level, `u64` sample count, `u64` vertex count, then for each sample its
//! vertex values as `f64`.

use std::io::{Read, Write};

use super::SamplerError;

pub const DUMP_MAGIC: [u8; 8] = *b"CBLFIELD";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    pub graph_hash: u64,
    pub level: f64,
    pub samples: u64,
    pub vertices: u64,
}

pub struct DumpWriter<W: Write> {
    out: W,
    header: DumpHeader,
    written: u64,
}

fn io_error(e: std::io::Error) -> SamplerError {
    SamplerError::Dump(e.to_string())
}

impl<W: Write> DumpWriter<W> {
    pub fn new(mut out: W, header: DumpHeader) -> Result<Self, SamplerError> {
        out.write_all(&DUMP_MAGIC).map_err(io_error)?;
        out.write_all(&DUMP_VERSION.to_le_bytes()).map_err(io_error)?;
        out.write_all(&header.graph_hash.to_le_bytes()).map_err(io_error)?;
        out.write_all(&header.level.to_le_bytes()).map_err(io_error)?;
        out.write_all(&header.samples.to_le_bytes()).map_err(io_error)?;
        out.write_all(&header.vertices.to_le_bytes()).map_err(io_error)?;
        Ok(Self {
            out,
            header,
            written: 0,
        })
    }

    pub fn push(&mut self, phi: &[f64]) -> Result<(), SamplerError> {
        if phi.len() as u64 != self.header.vertices {
            return Err(SamplerError::Dump(format!(
                "sample has {} values, header says {}",
                phi.len(),
                self.header.vertices
            )));
        }
        if self.written == self.header.samples {
            return Err(SamplerError::Dump("more samples than declared".into()));
        }
        for v in phi {
            self.out.write_all(&v.to_le_bytes()).map_err(io_error)?;
        }
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, SamplerError> {
        if self.written != self.header.samples {
            return Err(SamplerError::Dump(format!(
                "declared {} samples, wrote {}",
                self.header.samples, self.written
            )));
        }
        self.out.flush().map_err(io_error)?;
        Ok(self.out)
    }
}

fn take<const N: usize>(input: &mut impl Read) -> Result<[u8; N], SamplerError> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(io_error)?;
    Ok(buf)
}

pub fn read_dump(mut input: impl Read) -> Result<(DumpHeader, Vec<Vec<f64>>), SamplerError> {
    if take::<8>(&mut input)? != DUMP_MAGIC {
        return Err(SamplerError::Dump("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut input)?);
    if version != DUMP_VERSION {
        return Err(SamplerError::Dump(format!("unsupported version {version}")));
    }
    let header = DumpHeader {
        graph_hash: u64::from_le_bytes(take(&mut input)?),
        level: f64::from_le_bytes(take(&mut input)?),
        samples: u64::from_le_bytes(take(&mut input)?),
        vertices: u64::from_le_bytes(take(&mut input)?),
    };
    let mut samples = Vec::with_capacity(header.samples as usize);
    for _ in 0..header.samples {
        let phi = (0..header.vertices)
            .map(|_| take::<8>(&mut input).map(f64::from_le_bytes))
            .collect::<Result<Vec<_>, _>>()?;
        samples.push(phi);
    }
    Ok((header, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let header = DumpHeader {
            graph_hash: 0xdead_beef,
            level: -0.25,
            samples: 2,
            vertices: 3,
        };
        let mut w = DumpWriter::new(Vec::new(), header).unwrap();
        w.push(&[1.0, -2.5, 3.0e-300]).unwrap();
        assert!(w.push(&[1.0]).is_err());
        w.push(&[0.0, f64::MIN_POSITIVE, 7.0]).unwrap();
        let bytes = w.finish().unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 8 * 4 + 6 * 8);
        let (h, s) = read_dump(bytes.as_slice()).unwrap();
        assert_eq!(h, header);
        assert_eq!(s[0], vec![1.0, -2.5, 3.0e-300]);
        assert!(read_dump(&bytes[..20]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_dump(bad.as_slice()).is_err());
    }
}
