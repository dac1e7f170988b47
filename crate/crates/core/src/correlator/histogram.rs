use std::io::{BufRead, BufReader, BufWriter, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Binned coincidence counts over `[t_min_ps, t_max_ps)`.
///
/// Bin `k` covers `[t_min_ps + k·bin_width_ps, t_min_ps + (k+1)·bin_width_ps)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width_ps: u64,
    pub t_min_ps: i64,
    pub t_max_ps: i64,
    pub counts: Vec<u64>,
    /// Pairs counted into the histogram.
    pub total_pairs: u64,
}

impl Histogram {
    pub fn zeros(bin_width_ps: u64, t_min_ps: i64, t_max_ps: i64) -> Result<Self> {
        ensure(bin_width_ps >= 1, "bin_width_ps", "must be >= 1")?;
        ensure(t_max_ps > t_min_ps, "t_max_ps", "must exceed t_min_ps")?;
        let span = (t_max_ps - t_min_ps) as u64;
        ensure(
            span % bin_width_ps == 0,
            "bin_width_ps",
            format!("span {span} ps is not a multiple of the bin width {bin_width_ps} ps"),
        )?;
        Ok(Self {
            bin_width_ps,
            t_min_ps,
            t_max_ps,
            counts: vec![0; (span / bin_width_ps) as usize],
            total_pairs: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin_width_ns(&self) -> f64 {
        self.bin_width_ps as f64 * 1e-3
    }

    pub fn bin_center_ps(&self, k: usize) -> f64 {
        self.t_min_ps as f64 + (k as f64 + 0.5) * self.bin_width_ps as f64
    }

    pub fn bin_center_ns(&self, k: usize) -> f64 {
        self.bin_center_ps(k) * 1e-3
    }

    /// Bin holding delay `delay_ps`, if inside the range.
    pub fn bin_of(&self, delay_ps: i64) -> Option<usize> {
        if delay_ps < self.t_min_ps || delay_ps >= self.t_max_ps {
            None
        } else {
            Some(((delay_ps - self.t_min_ps) as u64 / self.bin_width_ps) as usize)
        }
    }

    /// Sum of the counts of bins whose centres lie in `[lo_ps, hi_ps)`.
    pub fn sum_centres_in(&self, lo_ps: f64, hi_ps: f64) -> u64 {
        let bw = self.bin_width_ps as f64;
        let first = ((lo_ps - self.t_min_ps as f64) / bw - 0.5).ceil().max(0.0) as usize;
        let end = ((hi_ps - self.t_min_ps as f64) / bw - 0.5).ceil().max(0.0) as usize;
        let end = end.min(self.len());
        if first >= end {
            0
        } else {
            self.counts[first..end].iter().sum()
        }
    }

    /// Adds another histogram of identical geometry.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        ensure(
            self.bin_width_ps == other.bin_width_ps
                && self.t_min_ps == other.t_min_ps
                && self.t_max_ps == other.t_max_ps,
            "histogram",
            "cannot merge histograms with different binning",
        )?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_pairs += other.total_pairs;
        Ok(())
    }

    /// Writes the `# key=value` header, `provenance` comment lines and
    /// `bin_center_ps,counts` rows.
    pub fn write_csv<W: Write>(&self, writer: W, provenance: &[(String, String)]) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "# bin_width_ps={}", self.bin_width_ps)?;
        writeln!(w, "# t_min_ps={}", self.t_min_ps)?;
        for (k, v) in provenance {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "bin_center_ps,counts")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{c}", self.bin_center_ps(k))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the CSV form; other `#` lines are ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut bin_width = None;
        let mut t_min = None;
        let mut header_seen = false;
        let mut counts = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let lineno = i + 1;
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    let parse = || {
                        v.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Format(format!("line {lineno}: bad value for {k}")))
                    };
                    match k.trim() {
                        "bin_width_ps" => bin_width = Some(parse()?),
                        "t_min_ps" => t_min = Some(parse()?),
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if !header_seen {
                if line != "bin_center_ps,counts" {
                    return Err(Error::Format(format!(
                        "line {lineno}: expected header `bin_center_ps,counts`"
                    )));
                }
                header_seen = true;
                continue;
            }
            let (_, c) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {lineno}: expected two columns")))?;
            counts.push(
                c.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Format(format!("line {lineno}: bad count `{c}`")))?,
            );
        }
        let bw = bin_width.ok_or_else(|| Error::Format("missing `# bin_width_ps=`".into()))?;
        let t_min = t_min.ok_or_else(|| Error::Format("missing `# t_min_ps=`".into()))?;
        if bw < 1 {
            return Err(Error::Format("bin_width_ps must be >= 1".into()));
        }
        if counts.is_empty() {
            return Err(Error::InsufficientData("histogram file has no bins".into()));
        }
        let t_max = t_min + bw * counts.len() as i64;
        let total_pairs = counts.iter().sum();
        Ok(Self {
            bin_width_ps: bw as u64,
            t_min_ps: t_min,
            t_max_ps: t_max,
            counts,
            total_pairs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let h = Histogram::zeros(50, -1000, 1000).unwrap();
        assert_eq!(h.len(), 40);
        assert_eq!(h.bin_of(-1000), Some(0));
        assert_eq!(h.bin_of(999), Some(39));
        assert_eq!(h.bin_of(1000), None);
        assert_eq!(h.bin_center_ps(0), -975.0);
        assert!(Histogram::zeros(30, -1000, 1000).is_err());
    }

    #[test]
    fn centre_window_sum() {
        let mut h = Histogram::zeros(10, -50, 50).unwrap();
        h.counts = (1..=10).collect();
        // centres −45, −35, …, 45
        assert_eq!(h.sum_centres_in(-10.0, 10.0), 5 + 6);
        assert_eq!(h.sum_centres_in(-45.0, -35.0), 1);
        assert_eq!(h.sum_centres_in(-1000.0, 1000.0), 55);
    }

    #[test]
    fn csv_round_trip() {
        let mut h = Histogram::zeros(25, -100, 100).unwrap();
        h.counts = vec![0, 3, 1, 4, 1, 5, 9, 2];
        h.total_pairs = 25;
        let mut buf = Vec::new();
        h.write_csv(&mut buf, &[("seed".into(), "4".into())])
            .unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "# bin_width_ps=25\n# t_min_ps=-100\n# seed=4\nbin_center_ps,counts\n-87.5,0\n"
        ));
        assert_eq!(Histogram::read_csv(&buf[..]).unwrap(), h);
    }

    #[test]
    fn empty_file_rejected() {
        let text = "# bin_width_ps=50\n# t_min_ps=0\nbin_center_ps,counts\n";
        assert!(matches!(
            Histogram::read_csv(text.as_bytes()),
            Err(Error::InsufficientData(_))
        ));
    }
}
