//! Redundancy filter for raw ultrasonic readings.
//!
//! A reading only leaves the filter after `max_hits` consecutive raw values
//! agree with the first of the run to within `max_error` microseconds. One
//! outlier restarts the run with itself as the new reference, so a noisy
//! sensor cannot push a one-off glitch into the encoder.

use thiserror::Error;

/// Agreement requirements for validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterConfig {
    /// Consecutive agreeing readings required before the reference is
    /// emitted. Must be at least 1 (1 means pass-through).
    pub max_hits: u32,
    /// Largest |raw - reference| still counted as agreement, µs.
    pub max_error_us: u32,
}

impl Default for FilterConfig {
    /// Four agreeing readings within 120 µs (about 2 cm of round trip).
    fn default() -> Self {
        FilterConfig { max_hits: 4, max_error_us: 120 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FilterError {
    #[error("max_hits must be at least 1")]
    MaxHitsZero,
}

/// The filter itself: a pure state machine, one instance per sensor stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementFilter {
    cfg: FilterConfig,
    hits: u32,
    first_us: u32,
}

impl MeasurementFilter {
    pub fn new(cfg: FilterConfig) -> Result<Self, FilterError> {
        if cfg.max_hits == 0 {
            return Err(FilterError::MaxHitsZero);
        }
        Ok(MeasurementFilter { cfg, hits: 0, first_us: 0 })
    }

    pub fn config(&self) -> FilterConfig {
        self.cfg
    }

    /// Readings accumulated toward the next emission.
    pub fn hits(&self) -> u32 {
        self.hits
    }

    /// The reference reading the current run is compared against, if a run
    /// is open.
    pub fn reference(&self) -> Option<u32> {
        (self.hits > 0).then_some(self.first_us)
    }

    /// Consume one raw reading; returns the validated value when this
    /// reading completes a run of `max_hits` agreeing measurements.
    pub fn ingest(&mut self, raw_us: u32) -> Option<u32> {
        if self.hits == 0 {
            self.first_us = raw_us;
            self.hits = 1;
        } else if raw_us.abs_diff(self.first_us) <= self.cfg.max_error_us {
            self.hits += 1;
        } else {
            self.first_us = raw_us;
            self.hits = 1;
        }

        if self.hits == self.cfg.max_hits {
            self.hits = 0;
            Some(self.first_us)
        } else {
            None
        }
    }

    /// Run a whole stream through a clone of this filter's configuration,
    /// returning every emitted value in order.
    pub fn run_stream(cfg: FilterConfig, stream: &[u32]) -> Result<Vec<u32>, FilterError> {
        let mut f = MeasurementFilter::new(cfg)?;
        Ok(stream.iter().filter_map(|&raw| f.ingest(raw)).collect())
    }
}
