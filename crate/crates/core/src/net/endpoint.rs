//! The three pipeline endpoints as transport-agnostic tick functions.
//!
//! Each endpoint consumes the datagrams that arrived since its last tick
//! and pushes outgoing frames onto an outbox; the caller owns delivery.
//! Malformed or unexpected frames are counted and dropped — a flaky link
//! must never take a loop down.

use crate::encoder::{EncoderState, TofMeasurement};
use crate::filter::{FilterConfig, FilterError, MeasurementFilter};
use crate::lif::{LifEngine, NeuronParams, ParamError};
use crate::net::wire::Datagram;
use crate::sensor::{sample_tof_us, SensorNoise};

/// Silence on the spike channel required before the robot resumes driving
/// forward, ms.
pub const TURN_HOLD_MS: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Turning,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Forward => "forward",
            Mode::Turning => "turning",
        }
    }
}

/// The avoidance rule: any spike means "obstacle" and flips the robot into
/// a right turn; 500 ms without spikes flips it back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvoidanceState {
    mode: Mode,
    last_spike_at_ms: Option<u64>,
}

impl AvoidanceState {
    pub fn new() -> Self {
        AvoidanceState { mode: Mode::Forward, last_spike_at_ms: None }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn last_spike_at_ms(&self) -> Option<u64> {
        self.last_spike_at_ms
    }

    pub fn on_spike(&mut self, now_ms: u64) {
        self.last_spike_at_ms = Some(now_ms);
        self.mode = Mode::Turning;
    }

    /// Timeout check; call once per tick after processing arrivals, so that
    /// the flip to forward happens exactly `TURN_HOLD_MS` after the last
    /// spike.
    pub fn tick(&mut self, now_ms: u64) {
        if self.mode == Mode::Turning {
            let last = self.last_spike_at_ms.expect("turning implies a spike was seen");
            if now_ms - last >= TURN_HOLD_MS {
                self.mode = Mode::Forward;
            }
        }
    }
}

impl Default for AvoidanceState {
    fn default() -> Self {
        Self::new()
    }
}

/// A spike datagram as the robot saw it: wall-tick of arrival plus the
/// timestamp the engine stamped into the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeRx {
    pub arrived_at_ms: u64,
    pub stamped_ms: u64,
}

/// Robot emulator: samples the (simulated) sensor on a fixed cadence, runs
/// the redundancy filter, ships validated readings out, and lets incoming
/// spikes drive the avoidance state machine.
#[derive(Debug)]
pub struct RobotEndpoint {
    filter: MeasurementFilter,
    pub avoidance: AvoidanceState,
    sensor_period_ms: u64,
    noise: Option<SensorNoise>,
    pub malformed: u64,
    /// Every spike datagram received, in arrival order.
    pub spike_log: Vec<SpikeRx>,
    /// Every validated reading sent, as (tick, µs).
    pub tof_log: Vec<(u64, u32)>,
    /// Raw reading taken at the most recent sample tick.
    pub last_raw_us: u32,
}

impl RobotEndpoint {
    pub fn new(
        cfg: FilterConfig,
        sensor_period_ms: u64,
        noise: Option<SensorNoise>,
    ) -> Result<Self, FilterError> {
        assert!(sensor_period_ms > 0, "sensor cadence must be nonzero");
        Ok(RobotEndpoint {
            filter: MeasurementFilter::new(cfg)?,
            avoidance: AvoidanceState::new(),
            sensor_period_ms,
            noise,
            malformed: 0,
            spike_log: Vec::new(),
            tof_log: Vec::new(),
            last_raw_us: crate::sensor::tof_reading_us(None),
        })
    }

    pub fn mode(&self) -> Mode {
        self.avoidance.mode()
    }

    pub fn tick(
        &mut self,
        now_ms: u64,
        distance_cm: Option<f64>,
        inbox: &[Vec<u8>],
        outbox: &mut Vec<Vec<u8>>,
    ) {
        for frame in inbox {
            match Datagram::decode(frame) {
                Ok(Datagram::Spike { t_ms }) => {
                    self.spike_log.push(SpikeRx { arrived_at_ms: now_ms, stamped_ms: t_ms });
                    self.avoidance.on_spike(now_ms);
                }
                // A ToF frame bounced back at the robot is as wrong as noise.
                Ok(Datagram::Tof { .. }) | Err(_) => self.malformed += 1,
            }
        }
        self.avoidance.tick(now_ms);

        if now_ms.is_multiple_of(self.sensor_period_ms) {
            let raw = sample_tof_us(distance_cm, self.noise.as_mut());
            self.last_raw_us = raw;
            if let Some(valid) = self.filter.ingest(raw) {
                self.tof_log.push((now_ms, valid));
                outbox.push(Datagram::Tof { tof_us: valid }.encode());
            }
        }
    }
}

/// Bridge (encoder host): validated readings in, injector spikes out to the
/// engine, engine output relayed back to the robot within the same tick.
#[derive(Debug)]
pub struct BridgeEndpoint {
    pub encoder: EncoderState,
    pub malformed: u64,
    /// Injector spike times, ms.
    pub injected: Vec<u64>,
    /// Engine output frames relayed toward the robot.
    pub relayed: u64,
}

impl BridgeEndpoint {
    pub fn new() -> Self {
        BridgeEndpoint {
            encoder: EncoderState::new(),
            malformed: 0,
            injected: Vec::new(),
            relayed: 0,
        }
    }

    pub fn tick(
        &mut self,
        now_ms: u64,
        from_robot: &[Vec<u8>],
        from_engine: &[Vec<u8>],
        to_engine: &mut Vec<Vec<u8>>,
        to_robot: &mut Vec<Vec<u8>>,
    ) {
        // Apply measurements before ticking the encoder so a reading takes
        // effect on the tick it arrives.
        for frame in from_robot {
            match Datagram::decode(frame) {
                Ok(Datagram::Tof { tof_us }) => {
                    self.encoder.update_tof(&TofMeasurement { tof_us, t_recv_ms: now_ms });
                }
                Ok(Datagram::Spike { .. }) | Err(_) => self.malformed += 1,
            }
        }

        if let Some(spike) = self.encoder.tick(now_ms) {
            self.injected.push(spike.t_ms);
            to_engine.push(Datagram::Spike { t_ms: spike.t_ms }.encode());
        }

        for frame in from_engine {
            match Datagram::decode(frame) {
                Ok(Datagram::Spike { t_ms }) => {
                    self.relayed += 1;
                    to_robot.push(Datagram::Spike { t_ms }.encode());
                }
                Ok(Datagram::Tof { .. }) | Err(_) => self.malformed += 1,
            }
        }
    }
}

impl Default for BridgeEndpoint {
    fn default() -> Self {
        Self::new()
    }
}

/// Spike engine host: one LIF neuron stepping at the tick rate.
///
/// The datagram hop from the bridge already costs one tick, which is
/// exactly the engine's synaptic delay; arriving spikes are therefore
/// inserted with the remaining delay (zero at the default operating point),
/// keeping the loopback train aligned with an offline run of the same
/// inputs.
#[derive(Debug)]
pub struct EngineEndpoint {
    engine: LifEngine,
    pub malformed: u64,
    /// Output spike times, ms.
    pub fires: Vec<u64>,
}

impl EngineEndpoint {
    pub fn new(params: NeuronParams) -> Result<Self, ParamError> {
        Ok(EngineEndpoint { engine: LifEngine::new(params)?, malformed: 0, fires: Vec::new() })
    }

    pub fn engine(&self) -> &LifEngine {
        &self.engine
    }

    pub fn tick(&mut self, now_ms: u64, inbox: &[Vec<u8>], outbox: &mut Vec<Vec<u8>>) {
        debug_assert_eq!(self.engine.steps_done(), now_ms, "engine clock skew");
        let remaining_delay = self.engine.params().syn_delay - 1;
        for frame in inbox {
            match Datagram::decode(frame) {
                Ok(Datagram::Spike { .. }) => self.engine.schedule_in(remaining_delay),
                Ok(Datagram::Tof { .. }) | Err(_) => self.malformed += 1,
            }
        }
        if self.engine.tick() {
            self.fires.push(now_ms);
            outbox.push(Datagram::Spike { t_ms: now_ms }.encode());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn avoidance_turns_on_spike_and_releases_after_exactly_500_ms() {
        let mut av = AvoidanceState::new();
        assert_eq!(av.mode(), Mode::Forward);
        av.on_spike(1000);
        av.tick(1000);
        assert_eq!(av.mode(), Mode::Turning);
        for now in 1001..1500 {
            av.tick(now);
            assert_eq!(av.mode(), Mode::Turning, "still holding at {now}");
        }
        av.tick(1500);
        assert_eq!(av.mode(), Mode::Forward);
    }

    #[test]
    fn fresh_spikes_extend_the_turn() {
        let mut av = AvoidanceState::new();
        av.on_spike(0);
        av.tick(0);
        av.on_spike(400);
        for now in 401..900 {
            av.tick(now);
            assert_eq!(av.mode(), Mode::Turning);
        }
        av.tick(900);
        assert_eq!(av.mode(), Mode::Forward);
    }

    #[test]
    fn robot_sends_only_validated_readings() {
        let mut robot = RobotEndpoint::new(FilterConfig::default(), 20, None).unwrap();
        let mut out = Vec::new();
        for t in 0..100 {
            robot.tick(t, Some(10.0), &[], &mut out);
        }
        // Samples at 0,20,40,60,80 -> first emission on the 4th (t=60),
        // the 5th sample opens the next run.
        assert_eq!(robot.tof_log, vec![(60, 588)]);
        assert_eq!(out.len(), 1);
        assert_eq!(Datagram::decode(&out[0]).unwrap(), Datagram::Tof { tof_us: 588 });
        assert_eq!(robot.mode(), Mode::Forward);
    }

    #[test]
    fn robot_counts_garbage_without_dying() {
        let mut robot = RobotEndpoint::new(FilterConfig::default(), 20, None).unwrap();
        let mut out = Vec::new();
        let junk: Vec<Vec<u8>> = vec![
            vec![],
            vec![0xff, 0xff, 0xff],
            Datagram::Tof { tof_us: 1 }.encode(), // wrong direction
            Datagram::Spike { t_ms: 3 }.encode(), // the one good frame
        ];
        robot.tick(0, None, &junk, &mut out);
        assert_eq!(robot.malformed, 3);
        assert_eq!(robot.spike_log, vec![SpikeRx { arrived_at_ms: 0, stamped_ms: 3 }]);
        assert_eq!(robot.mode(), Mode::Turning);
    }

    #[test]
    fn bridge_maps_a_reading_onto_the_documented_isi() {
        let mut bridge = BridgeEndpoint::new();
        let (mut to_engine, mut to_robot) = (Vec::new(), Vec::new());
        let tof = Datagram::Tof { tof_us: 2294 }.encode();
        bridge.tick(0, &[tof], &[], &mut to_engine, &mut to_robot);
        let isi_ms = bridge.encoder.current_isi_s() * 1000.0;
        assert!((isi_ms - 153.0).abs() <= 0.5, "got {isi_ms} ms");
    }

    #[test]
    fn bridge_relays_engine_spikes_within_the_same_tick() {
        let mut bridge = BridgeEndpoint::new();
        let (mut to_engine, mut to_robot) = (Vec::new(), Vec::new());
        let spike = Datagram::Spike { t_ms: 41 }.encode();
        bridge.tick(42, &[spike], &[], &mut to_engine, &mut to_robot);
        assert_eq!(bridge.malformed, 1, "spike frames from the robot side are unexpected");

        let spike = Datagram::Spike { t_ms: 41 }.encode();
        bridge.tick(43, &[], std::slice::from_ref(&spike), &mut to_engine, &mut to_robot);
        assert_eq!(to_robot, vec![spike]);
        assert_eq!(bridge.relayed, 1);
    }

    #[test]
    fn idle_bridge_injects_at_the_default_rhythm_and_engine_stays_silent() {
        let mut bridge = BridgeEndpoint::new();
        let mut engine = EngineEndpoint::new(NeuronParams::default()).unwrap();
        let mut to_robot = Vec::new();
        let mut in_flight: Vec<Vec<u8>> = Vec::new();
        for now in 0..5000u64 {
            let mut to_engine = Vec::new();
            bridge.tick(now, &[], &[], &mut to_engine, &mut to_robot);
            let mut out = Vec::new();
            engine.tick(now, &in_flight, &mut out);
            in_flight = to_engine; // one-tick hop
            to_robot.clear();
        }
        // Injector runs at the 1.001 s ceiling interval...
        assert_eq!(bridge.injected, vec![1001, 2002, 3003, 4004]);
        // ...which is far below the rate the neuron needs.
        assert!(engine.fires.is_empty());
    }

    #[test]
    fn driven_engine_fires_and_stamps_frames_with_its_tick() {
        let mut engine = EngineEndpoint::new(NeuronParams::default()).unwrap();
        let mut outbox = Vec::new();
        for now in 0..1000u64 {
            // 100 Hz injector: a frame arrives every 10th tick.
            let inbox: Vec<Vec<u8>> = if now % 10 == 0 {
                vec![Datagram::Spike { t_ms: now.saturating_sub(1) }.encode()]
            } else {
                vec![]
            };
            engine.tick(now, &inbox, &mut outbox);
        }
        assert!(!engine.fires.is_empty());
        let first = engine.fires[0];
        assert_eq!(
            Datagram::decode(&outbox[0]).unwrap(),
            Datagram::Spike { t_ms: first }
        );
    }
}
