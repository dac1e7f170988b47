use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One detector click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeTag {
    pub timestamp_ps: u64,
    pub channel: u8,
}

impl TimeTag {
    pub fn new(channel: u8, timestamp_ps: u64) -> Self {
        Self {
            timestamp_ps,
            channel,
        }
    }
}

/// Time-ordered detector clicks of a two-channel measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeTagStream {
    records: Vec<TimeTag>,
    /// Length of the acquisition (ps).
    pub duration_ps: u64,
    /// Digest of the configuration that produced the stream.
    pub config_digest: Option<String>,
}

impl TimeTagStream {
    /// Wraps records, checking order and channel labels.
    pub fn new(records: Vec<TimeTag>, duration_ps: u64) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.channel > 1 {
                return Err(Error::Format(format!(
                    "record {i}: channel {} not in {{0, 1}}",
                    r.channel
                )));
            }
        }
        if let Some(i) = records
            .windows(2)
            .position(|w| w[1].timestamp_ps < w[0].timestamp_ps)
        {
            return Err(Error::UnsortedStream { index: i + 1 });
        }
        Ok(Self {
            records,
            duration_ps,
            config_digest: None,
        })
    }

    /// Sorts records by (timestamp, channel) before wrapping them.
    pub fn from_unsorted(mut records: Vec<TimeTag>, duration_ps: u64) -> Result<Self> {
        records.sort_unstable();
        Self::new(records, duration_ps)
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = Some(digest.into());
        self
    }

    pub fn records(&self) -> &[TimeTag] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TimeTag> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Timestamps of one channel in stream order.
    pub fn channel_times(&self, channel: u8) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.channel == channel)
            .map(|r| r.timestamp_ps)
            .collect()
    }

    pub fn count(&self, channel: u8) -> usize {
        self.records.iter().filter(|r| r.channel == channel).count()
    }

    /// Shifts every timestamp by `offset_ps`.
    pub fn translated(&self, offset_ps: u64) -> Result<Self> {
        let records = self
            .records
            .iter()
            .map(|r| {
                r.timestamp_ps
                    .checked_add(offset_ps)
                    .map(|t| TimeTag::new(r.channel, t))
                    .ok_or_else(|| Error::TimestampOverflow("translation".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let duration_ps = self
            .duration_ps
            .checked_add(offset_ps)
            .ok_or_else(|| Error::TimestampOverflow("translation".into()))?;
        Ok(Self {
            records,
            duration_ps,
            config_digest: self.config_digest.clone(),
        })
    }
}
