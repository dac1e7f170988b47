use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::stream::{TimeTag, TimeTagStream};
use crate::error::{Error, Result};

/// Magic bytes opening a binary time-tag file.
pub const BINARY_MAGIC: [u8; 8] = *b"PHOTTAGS";
pub const BINARY_VERSION: u32 = 1;
const RECORD_LEN: usize = 9;

/// On-disk encodings of a [`TimeTagStream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamFormat {
    Csv,
    Binary,
}

impl StreamFormat {
    /// Chooses by file extension: `.csv` is text, anything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => StreamFormat::Csv,
            _ => StreamFormat::Binary,
        }
    }
}

/// Writes `channel,timestamp_ps` rows after a header line.
pub fn write_csv<W: Write>(stream: &TimeTagStream, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "channel,timestamp_ps")?;
    for r in stream.records() {
        writeln!(w, "{},{}", r.channel, r.timestamp_ps)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the CSV form. The duration is set just past the last record.
pub fn read_csv<R: Read>(reader: R) -> Result<TimeTagStream> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "channel,timestamp_ps" {
        return Err(Error::Format(
            "expected header `channel,timestamp_ps`".into(),
        ));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || {
            Error::Format(format!(
                "line {}: expected `channel,timestamp_ps`, got `{line}`",
                i + 2
            ))
        };
        let (ch, ts) = line.split_once(',').ok_or_else(bad)?;
        let channel: u8 = ch.trim().parse().map_err(|_| bad())?;
        let ts: u64 = ts.trim().parse().map_err(|_| bad())?;
        records.push(TimeTag::new(channel, ts));
    }
    finish(records)
}

/// Writes the 16-byte header and 9-byte little-endian records.
pub fn write_binary<W: Write>(stream: &TimeTagStream, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&BINARY_VERSION.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for r in stream.records() {
        w.write_all(&[r.channel])?;
        w.write_all(&r.timestamp_ps.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the binary form. The duration is set just past the last record.
pub fn read_binary<R: Read>(reader: R) -> Result<TimeTagStream> {
    let mut r = BufReader::new(reader);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|_| Error::Format("truncated binary header".into()))?;
    if header[..8] != BINARY_MAGIC {
        return Err(Error::Format("bad magic, not a time-tag file".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
    if version != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % RECORD_LEN != 0 {
        return Err(Error::Format(format!(
            "record section of {} bytes is not a multiple of {RECORD_LEN}",
            body.len()
        )));
    }
    let records = body
        .chunks_exact(RECORD_LEN)
        .map(|c| {
            TimeTag::new(
                c[0],
                u64::from_le_bytes(c[1..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    finish(records)
}

fn finish(records: Vec<TimeTag>) -> Result<TimeTagStream> {
    let duration = records.last().map_or(0, |r| r.timestamp_ps + 1);
    TimeTagStream::new(records, duration)
}

/// Reads a stream file in the format implied by its extension.
pub fn read_stream(path: &Path) -> Result<TimeTagStream> {
    let file = File::open(path)?;
    match StreamFormat::from_path(path) {
        StreamFormat::Csv => read_csv(file),
        StreamFormat::Binary => read_binary(file),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TimeTagStream {
        TimeTagStream::new(
            vec![
                TimeTag::new(1, 0),
                TimeTag::new(0, 17),
                TimeTag::new(1, 17),
                TimeTag::new(0, u64::MAX - 1),
            ],
            u64::MAX,
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * 9);
        assert_eq!(&buf[..8], b"PHOTTAGS");
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(back.records(), sample().records());
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        assert!(buf.starts_with(b"channel,timestamp_ps\n1,0\n"));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.records(), sample().records());
    }

    #[test]
    fn rejects_truncated_binary() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        buf.pop();
        assert!(read_binary(&buf[..]).is_err());
        assert!(read_binary(&b"NOTATAGFILE....."[..]).is_err());
    }

    #[test]
    fn rejects_malformed_csv() {
        assert!(read_csv(&b"channel,timestamp_ps\n0,x\n"[..]).is_err());
        assert!(read_csv(&b"a,b\n"[..]).is_err());
        assert!(matches!(
            read_csv(&b"channel,timestamp_ps\n0,5\n1,4\n"[..]),
            Err(Error::UnsortedStream { .. })
        ));
    }
}
