//! Rate encoder: time-of-flight readings in, spike train out.
//!
//! The inter-spike interval is a quadratic function of the (clamped)
//! time-of-flight, so near obstacles produce fast trains and far or absent
//! obstacles produce the slow default rhythm. The mapping saturates at the
//! sensor ceiling and never drops below a 1 ms floor.

use thiserror::Error;

use crate::lif::SpikeEvent;

/// Time-of-flight reported when nothing reflects: the sensor ceiling, µs.
pub const DEFAULT_TOF_US: f64 = 5883.0;
/// Round-trip microseconds per centimetre of obstacle distance.
pub const TOF_US_PER_CM: f64 = 58.83;
/// Shortest and longest encodable inter-spike intervals, seconds.
pub const ISI_FLOOR_S: f64 = 0.001;
pub const ISI_CEIL_S: f64 = 1.001;

#[derive(Debug, Error, PartialEq)]
pub enum EncodeError {
    #[error("time of flight must be a finite nonnegative value, got {0}")]
    BadTof(f64),
    #[error("distance must be a finite nonnegative value, got {0}")]
    BadDistance(f64),
}

/// Map a time-of-flight to an inter-spike interval in seconds:
/// `(min(tof, 5883) / 5883)^2 + 0.001`.
pub fn isi_from_tof(tof_us: f64) -> Result<f64, EncodeError> {
    if !tof_us.is_finite() || tof_us < 0.0 {
        return Err(EncodeError::BadTof(tof_us));
    }
    Ok(isi_from_tof_clamped(tof_us))
}

fn isi_from_tof_clamped(tof_us: f64) -> f64 {
    let x = tof_us.min(DEFAULT_TOF_US) / DEFAULT_TOF_US;
    x * x + ISI_FLOOR_S
}

/// Round-trip time of flight for an obstacle at `d_cm` centimetres, µs.
pub fn tof_from_distance(d_cm: f64) -> Result<f64, EncodeError> {
    if !d_cm.is_finite() || d_cm < 0.0 {
        return Err(EncodeError::BadDistance(d_cm));
    }
    Ok(d_cm * TOF_US_PER_CM)
}

/// Obstacle distance implied by a time of flight, cm.
pub fn distance_from_tof(tof_us: f64) -> Result<f64, EncodeError> {
    if !tof_us.is_finite() || tof_us < 0.0 {
        return Err(EncodeError::BadTof(tof_us));
    }
    Ok(tof_us / TOF_US_PER_CM)
}

/// A validated sensor reading handed to the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TofMeasurement {
    pub tof_us: u32,
    /// When the reading reached the encoder host, ms.
    pub t_recv_ms: u64,
}

/// Millisecond-tick spike generator driven by the latest measurement.
///
/// A fresh encoder behaves as if it had just seen the no-obstacle ceiling:
/// it idles at the slowest rate until a measurement arrives.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    current_isi_s: f64,
    last_fire_ms: u64,
}

impl EncoderState {
    pub fn new() -> Self {
        EncoderState { current_isi_s: isi_from_tof_clamped(DEFAULT_TOF_US), last_fire_ms: 0 }
    }

    /// Current inter-spike interval, seconds. Always within
    /// `[ISI_FLOOR_S, ISI_CEIL_S]`.
    pub fn current_isi_s(&self) -> f64 {
        self.current_isi_s
    }

    /// Adopt a new measurement. Takes effect on the next tick; the firing
    /// phase (`last_fire`) is deliberately left alone so a burst of
    /// measurements cannot silence or accelerate the train by itself.
    pub fn update_tof(&mut self, m: &TofMeasurement) {
        self.current_isi_s = isi_from_tof_clamped(f64::from(m.tof_us));
    }

    /// Advance the encoder clock to `now_ms` (called once per millisecond,
    /// monotonically). Emits a spike when at least the current interval has
    /// elapsed since the last one.
    pub fn tick(&mut self, now_ms: u64) -> Option<SpikeEvent> {
        assert!(now_ms >= self.last_fire_ms, "encoder clock must not run backwards");
        let elapsed_ms = (now_ms - self.last_fire_ms) as f64;
        if elapsed_ms >= self.current_isi_s * 1000.0 {
            self.last_fire_ms = now_ms;
            Some(SpikeEvent::injector(now_ms))
        } else {
            None
        }
    }
}

impl Default for EncoderState {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReplayError {
    #[error("measurements are not sorted by receive time at index {0}")]
    Unsorted(usize),
    #[error("measurement at {t_ms} ms lies at or beyond the {horizon_ms} ms horizon")]
    BeyondHorizon { t_ms: u64, horizon_ms: u64 },
}

/// Replay a sorted measurement log through a fresh encoder for
/// `horizon_ms` one-millisecond ticks. Measurements are applied before the
/// tick of the same timestamp, matching the live pipeline ordering.
pub fn replay(
    measurements: &[TofMeasurement],
    horizon_ms: u64,
) -> Result<Vec<SpikeEvent>, ReplayError> {
    for (idx, pair) in measurements.windows(2).enumerate() {
        if pair[1].t_recv_ms < pair[0].t_recv_ms {
            return Err(ReplayError::Unsorted(idx + 1));
        }
    }
    if let Some(m) = measurements.iter().find(|m| m.t_recv_ms >= horizon_ms) {
        return Err(ReplayError::BeyondHorizon { t_ms: m.t_recv_ms, horizon_ms });
    }

    let mut enc = EncoderState::new();
    let mut next = 0usize;
    let mut spikes = Vec::new();
    for now in 0..horizon_ms {
        while next < measurements.len() && measurements[next].t_recv_ms == now {
            enc.update_tof(&measurements[next]);
            next += 1;
        }
        if let Some(spike) = enc.tick(now) {
            spikes.push(spike);
        }
    }
    Ok(spikes)
}
