//! Binary timestamp file format.
//!
//! Layout (all little-endian): magic `"CGTS"`, `u32` version (currently 1),
//! `u64` record count, then 16-byte records of `u64` time in picoseconds,
//! `u8` channel id, `u8` origin flag (0 signal, 1 dark), and 6 zero pad
//! bytes. Records are stored merged in `(time, channel, origin)` order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{ClickOrigin, TimestampStream};

pub const MAGIC: [u8; 4] = *b"CGTS";
pub const VERSION: u32 = 1;
const RECORD_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum TagFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes, not a timestamp file")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u32),
    #[error("unknown origin flag {0}")]
    BadOrigin(u8),
    #[error("record count {expected} does not match payload ({got} records)")]
    CountMismatch { expected: u64, got: u64 },
    #[error("mixed-origin streams cannot be serialized; split signal and dark first")]
    MixedOrigin,
    #[error("decoded stream for channel {channel} is not strictly increasing")]
    NotMonotone { channel: u8 },
}

pub fn write_streams<W: Write>(
    writer: &mut W,
    streams: &[TimestampStream],
) -> Result<(), TagFileError> {
    let mut records: Vec<(u64, u8, u8)> = Vec::new();
    for stream in streams {
        let flag = match stream.origin {
            ClickOrigin::Signal => 0u8,
            ClickOrigin::Dark => 1u8,
            ClickOrigin::Mixed => return Err(TagFileError::MixedOrigin),
        };
        records.extend(stream.times.iter().map(|&t| (t, stream.channel, flag)));
    }
    records.sort_unstable();

    writer.write_all(&MAGIC)?;
    writer.write_all(&VERSION.to_le_bytes())?;
    writer.write_all(&(records.len() as u64).to_le_bytes())?;
    let mut buf = [0u8; RECORD_LEN];
    for (t, channel, flag) in records {
        buf[..8].copy_from_slice(&t.to_le_bytes());
        buf[8] = channel;
        buf[9] = flag;
        writer.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_streams<R: Read>(reader: &mut R) -> Result<Vec<TimestampStream>, TagFileError> {
    let mut header = [0u8; 16];
    reader.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(TagFileError::BadMagic);
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(TagFileError::BadVersion(version));
    }
    let expected = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));

    // (channel, origin flag) -> stream index, dense over the u8 x 2 space.
    let mut slots: Vec<Option<usize>> = vec![None; 512];
    let mut streams: Vec<TimestampStream> = Vec::new();
    let mut buf = [0u8; RECORD_LEN];
    let mut got = 0u64;
    loop {
        match reader.read_exact(&mut buf) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                if got == expected {
                    break;
                }
                return Err(TagFileError::CountMismatch { expected, got });
            }
            Err(e) => return Err(e.into()),
        }
        if got == expected {
            return Err(TagFileError::CountMismatch { expected, got: got + 1 });
        }
        let t = u64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let channel = buf[8];
        let origin = match buf[9] {
            0 => ClickOrigin::Signal,
            1 => ClickOrigin::Dark,
            other => return Err(TagFileError::BadOrigin(other)),
        };
        let key = channel as usize * 2 + (buf[9] as usize);
        let idx = match slots[key] {
            Some(idx) => idx,
            None => {
                streams.push(TimestampStream { channel, times: Vec::new(), origin });
                slots[key] = Some(streams.len() - 1);
                streams.len() - 1
            }
        };
        streams[idx].times.push(t);
        got += 1;
    }
    if got != expected {
        return Err(TagFileError::CountMismatch { expected, got });
    }
    for stream in &streams {
        if stream.validate().is_err() {
            return Err(TagFileError::NotMonotone { channel: stream.channel });
        }
    }
    streams.sort_by_key(|s| (s.channel, matches!(s.origin, ClickOrigin::Dark)));
    Ok(streams)
}

pub fn write_streams_to_path<P: AsRef<Path>>(
    path: P,
    streams: &[TimestampStream],
) -> Result<(), TagFileError> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_streams(&mut writer, streams)?;
    writer.flush()?;
    Ok(())
}

pub fn read_streams_from_path<P: AsRef<Path>>(
    path: P,
) -> Result<Vec<TimestampStream>, TagFileError> {
    read_streams(&mut BufReader::new(File::open(path)?))
}
