//! Wire format: fixed-size binary frames, one datagram per event.
//!
//! ```text
//! offset 0: version  (0x01)
//! offset 1: kind     (0x01 = time-of-flight, 0x02 = spike event)
//! offset 2: payload  (TOF: u32-LE µs, 4 bytes; SPIKE: u64-LE ms, 8 bytes)
//! ```
//!
//! Total frame sizes are exactly 6 and 10 bytes. Fixed sizes keep
//! loss/reorder handling trivial: any datagram parses on its own or is
//! dropped whole.

use thiserror::Error;

pub const WIRE_VERSION: u8 = 0x01;
pub const KIND_TOF: u8 = 0x01;
pub const KIND_SPIKE: u8 = 0x02;

pub const TOF_FRAME_LEN: usize = 6;
pub const SPIKE_FRAME_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Datagram {
    /// A validated time-of-flight measurement, µs.
    Tof { tof_us: u32 },
    /// A spike stamped with the sender's tick time, ms.
    Spike { t_ms: u64 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("frame too short: {0} bytes")]
    TooShort(usize),
    #[error("unknown wire version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown datagram kind {0:#04x}")]
    BadKind(u8),
    #[error("kind {kind:#04x} expects {expected} bytes, got {actual}")]
    BadLength { kind: u8, expected: usize, actual: usize },
}

impl Datagram {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            Datagram::Tof { tof_us } => {
                let mut buf = Vec::with_capacity(TOF_FRAME_LEN);
                buf.push(WIRE_VERSION);
                buf.push(KIND_TOF);
                buf.extend_from_slice(&tof_us.to_le_bytes());
                buf
            }
            Datagram::Spike { t_ms } => {
                let mut buf = Vec::with_capacity(SPIKE_FRAME_LEN);
                buf.push(WIRE_VERSION);
                buf.push(KIND_SPIKE);
                buf.extend_from_slice(&t_ms.to_le_bytes());
                buf
            }
        }
    }

    pub fn decode(buf: &[u8]) -> Result<Datagram, WireError> {
        if buf.len() < 2 {
            return Err(WireError::TooShort(buf.len()));
        }
        if buf[0] != WIRE_VERSION {
            return Err(WireError::BadVersion(buf[0]));
        }
        match buf[1] {
            KIND_TOF => {
                if buf.len() != TOF_FRAME_LEN {
                    return Err(WireError::BadLength {
                        kind: KIND_TOF,
                        expected: TOF_FRAME_LEN,
                        actual: buf.len(),
                    });
                }
                let tof_us = u32::from_le_bytes(buf[2..6].try_into().unwrap());
                Ok(Datagram::Tof { tof_us })
            }
            KIND_SPIKE => {
                if buf.len() != SPIKE_FRAME_LEN {
                    return Err(WireError::BadLength {
                        kind: KIND_SPIKE,
                        expected: SPIKE_FRAME_LEN,
                        actual: buf.len(),
                    });
                }
                let t_ms = u64::from_le_bytes(buf[2..10].try_into().unwrap());
                Ok(Datagram::Spike { t_ms })
            }
            kind => Err(WireError::BadKind(kind)),
        }
    }
}
