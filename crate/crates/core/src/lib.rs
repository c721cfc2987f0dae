//! Spiking obstacle detection without the hardware.
//!
//! This crate reimplements an ultrasonic obstacle-detection pipeline as pure
//! software: a discrete-time leaky integrate-and-fire engine with
//! decaying-exponential synapses, a rate encoder that turns time-of-flight
//! readings into spike trains, a redundancy filter for raw sensor values,
//! firing-window analytics, and a three-endpoint loopback pipeline
//! (robot, bridge, engine) with a scripted scenario harness.
//!
//! Everything is deterministic: fixed 1 ms timestep, no wall-clock
//! dependence in the simulated paths, seeded RNG where noise is requested.

pub mod analysis;
pub mod encoder;
pub mod filter;
pub mod lif;
pub mod net;
pub mod scenario;
pub mod sensor;
pub mod trace;
pub mod world;

pub use lif::{NeuronParams, NeuronState, Source, SpikeEvent, Trace};
