use rayon::prelude::*;

use super::histogram::Histogram;
use crate::error::{ensure, Result};
use crate::simulator::TimeTagStream;

/// Largest accepted correlation window (1 s).
pub const MAX_WINDOW_PS: u64 = 1_000_000_000_000;

fn empty(bin_width_ps: u64, window_ps: u64) -> Result<Histogram> {
    ensure(bin_width_ps >= 1, "bin_width_ps", "must be >= 1 ps")?;
    ensure(
        window_ps >= bin_width_ps && window_ps <= MAX_WINDOW_PS,
        "window_ps",
        format!("must lie in [bin_width, 1 s], got {window_ps} ps"),
    )?;
    let w = window_ps as i64;
    Histogram::zeros(bin_width_ps, -w, w)
}

/// Adds the pairs of `starts` (channel 0) against `stops` (channel 1).
fn accumulate(hist: &mut Histogram, starts: &[u64], stops: &[u64]) {
    let w = hist.t_max_ps;
    let t_min = hist.t_min_ps;
    let bw = hist.bin_width_ps;
    let mut lo = 0;
    for &t0 in starts {
        let from = t0.saturating_sub(w as u64);
        while lo < stops.len() && stops[lo] < from {
            lo += 1;
        }
        for &t1 in &stops[lo..] {
            let d = t1 as i64 - t0 as i64;
            if d >= w {
                break;
            }
            hist.counts[((d - t_min) as u64 / bw) as usize] += 1;
            hist.total_pairs += 1;
        }
    }
}

/// Full cross-correlation of channel 1 against channel 0 over
/// `[−window, +window)` with a sliding window over the sorted stream.
pub fn correlate(stream: &TimeTagStream, bin_width_ps: u64, window_ps: u64) -> Result<Histogram> {
    let mut hist = empty(bin_width_ps, window_ps)?;
    let starts = stream.channel_times(0);
    let stops = stream.channel_times(1);
    accumulate(&mut hist, &starts, &stops);
    Ok(hist)
}

/// Same result as [`correlate`], computed on `n_slices` contiguous time
/// slices in parallel and summed.
pub fn correlate_sliced(
    stream: &TimeTagStream,
    bin_width_ps: u64,
    window_ps: u64,
    n_slices: usize,
) -> Result<Histogram> {
    ensure(n_slices >= 1, "n_slices", "must be >= 1")?;
    let template = empty(bin_width_ps, window_ps)?;
    let starts = stream.channel_times(0);
    let stops = stream.channel_times(1);
    let chunk = starts.len().div_ceil(n_slices).max(1);
    let partials: Vec<Histogram> = starts
        .par_chunks(chunk)
        .map(|slice| {
            let mut h = template.clone();
            let first = slice[0].saturating_sub(window_ps);
            let last = slice[slice.len() - 1].saturating_add(window_ps);
            let a = stops.partition_point(|&t| t < first);
            let b = stops.partition_point(|&t| t < last);
            accumulate(&mut h, slice, &stops[a..b]);
            h
        })
        .collect();
    let mut out = template;
    for p in &partials {
        out.merge(p)?;
    }
    Ok(out)
}

/// All-pairs reference implementation, quadratic in the record count.
pub fn brute_force(stream: &TimeTagStream, bin_width_ps: u64, window_ps: u64) -> Result<Histogram> {
    let mut hist = empty(bin_width_ps, window_ps)?;
    for a in stream.records().iter().filter(|r| r.channel == 0) {
        for b in stream.records().iter().filter(|r| r.channel == 1) {
            let d = b.timestamp_ps as i64 - a.timestamp_ps as i64;
            if let Some(k) = hist.bin_of(d) {
                hist.counts[k] += 1;
                hist.total_pairs += 1;
            }
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::TimeTag;

    fn stream(records: &[(u8, u64)]) -> TimeTagStream {
        TimeTagStream::from_unsorted(
            records.iter().map(|&(c, t)| TimeTag::new(c, t)).collect(),
            1 << 40,
        )
        .unwrap()
    }

    #[test]
    fn single_record_gives_empty_histogram() {
        let h = correlate(&stream(&[(0, 100)]), 10, 1000).unwrap();
        assert!(h.counts.iter().all(|&c| c == 0));
        assert_eq!(h.total_pairs, 0);
    }

    #[test]
    fn signed_delays() {
        let s = stream(&[(0, 1000), (1, 1250), (1, 700), (1, 5000)]);
        let h = correlate(&s, 100, 1000).unwrap();
        assert_eq!(h.total_pairs, 2);
        assert_eq!(h.counts[h.bin_of(250).unwrap()], 1);
        assert_eq!(h.counts[h.bin_of(-300).unwrap()], 1);
    }

    #[test]
    fn window_edges() {
        let s = stream(&[(0, 1000), (1, 0), (1, 2000)]);
        let h = correlate(&s, 100, 1000).unwrap();
        // −1000 is inside, +1000 is outside
        assert_eq!(h.total_pairs, 1);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h, brute_force(&s, 100, 1000).unwrap());
    }

    #[test]
    fn rejects_bad_geometry() {
        let s = stream(&[(0, 1)]);
        assert!(correlate(&s, 0, 100).is_err());
        assert!(correlate(&s, 100, 10).is_err());
        assert!(correlate(&s, 100, MAX_WINDOW_PS + 100).is_err());
        assert!(correlate(&s, 30, 100).is_err());
    }
}
