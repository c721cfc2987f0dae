//! Simulated ultrasonic ranging: distance in, quantized time-of-flight out.
//!
//! The sensor reports whole microseconds and saturates at the 5883 µs
//! ceiling (about one metre); anything farther, or no obstacle at all,
//! reads as the ceiling. An optional uniform noise model jitters the
//! distance by a few millimetres, seeded for reproducibility.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoder::{DEFAULT_TOF_US, TOF_US_PER_CM};

/// Quantized reading for an obstacle at `distance_cm` (`None` = nothing in
/// range). Clamped to `[0, 5883]` µs.
pub fn tof_reading_us(distance_cm: Option<f64>) -> u32 {
    match distance_cm {
        None => DEFAULT_TOF_US as u32,
        Some(d) => {
            let tof = (d.max(0.0) * TOF_US_PER_CM).round();
            tof.min(DEFAULT_TOF_US) as u32
        }
    }
}

/// Serializable recipe for a [`SensorNoise`] instance.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseCfg {
    pub seed: u64,
    pub amplitude_cm: f64,
}

impl NoiseCfg {
    pub fn build(&self) -> SensorNoise {
        SensorNoise::new(self.seed, self.amplitude_cm)
    }
}

/// Uniform ±`amplitude_cm` jitter on the measured distance.
#[derive(Debug, Clone)]
pub struct SensorNoise {
    rng: ChaCha8Rng,
    amplitude_cm: f64,
}

/// Default noise amplitude: ±3 mm, the ranging accuracy of a typical
/// hobby-grade ultrasonic module.
pub const DEFAULT_NOISE_CM: f64 = 0.3;

impl SensorNoise {
    pub fn new(seed: u64, amplitude_cm: f64) -> Self {
        SensorNoise { rng: ChaCha8Rng::seed_from_u64(seed), amplitude_cm: amplitude_cm.abs() }
    }

    /// One noisy reading. An absent obstacle stays absent — noise cannot
    /// conjure an echo.
    pub fn reading_us(&mut self, distance_cm: Option<f64>) -> u32 {
        match distance_cm {
            None => tof_reading_us(None),
            Some(d) => {
                let jitter = if self.amplitude_cm == 0.0 {
                    0.0
                } else {
                    self.rng.gen_range(-self.amplitude_cm..=self.amplitude_cm)
                };
                tof_reading_us(Some(d + jitter))
            }
        }
    }
}

/// Reading with optional noise, shared by the scenario loop and the robot
/// endpoint so both modes quantize identically.
pub fn sample_tof_us(distance_cm: Option<f64>, noise: Option<&mut SensorNoise>) -> u32 {
    match noise {
        Some(n) => n.reading_us(distance_cm),
        None => tof_reading_us(distance_cm),
    }
}
