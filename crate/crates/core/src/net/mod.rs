//! The three-endpoint pipeline: robot emulator, bridge (encoder host) and
//! spike engine, talking in small UDP-style datagrams.
//!
//! The endpoints are transport-agnostic tick functions. [`harness`] wires
//! them together in-memory with a simulated clock (deterministic, used by
//! tests); [`udp`] binds them to real loopback sockets driven by the wall
//! clock. Both present exactly one datagram hop of latency per link in the
//! simulated mode, which realises the engine's one-step synaptic delay.

pub mod endpoint;
pub mod harness;
pub mod udp;
pub mod wire;

pub use endpoint::{AvoidanceState, BridgeEndpoint, EngineEndpoint, Mode, RobotEndpoint};
pub use harness::{constant_shift, run_loopback, LogEvent, PipelineConfig, PipelineRun};
pub use udp::{run_udp, NetError, UdpPorts};
pub use wire::{Datagram, WireError};
