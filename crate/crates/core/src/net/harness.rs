//! Simulated-clock loopback: all three endpoints on one thread, one
//! millisecond per iteration, every link exactly one tick of latency.
//!
//! Frames sent during tick `t` become readable at tick `t+1`, regardless of
//! endpoint order within the tick — the links are double-buffered. That
//! fixed one-tick hop is what lets the networked run reproduce the offline
//! scenario runner's spike train up to a small constant shift.

use std::io::{self, Write};
use std::mem;

use crate::filter::FilterConfig;
use crate::lif::NeuronParams;
use crate::net::endpoint::{BridgeEndpoint, EngineEndpoint, Mode, RobotEndpoint, SpikeRx};
use crate::scenario::{ScenarioError, ScenarioOptions, ScenarioScript};

/// Everything needed to stand up the three endpoints.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub params: NeuronParams,
    pub filter: FilterConfig,
    pub opts: ScenarioOptions,
}

/// One-tick-latency unidirectional link.
#[derive(Debug, Default)]
struct Link {
    staged: Vec<Vec<u8>>,
    deliverable: Vec<Vec<u8>>,
}

impl Link {
    fn advance(&mut self) {
        self.deliverable = mem::take(&mut self.staged);
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEvent {
    pub t_ms: u64,
    pub endpoint: &'static str,
    pub event: &'static str,
    pub detail: String,
}

/// Everything observable from a loopback run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    /// Spike datagrams as the robot received them.
    pub spike_arrivals: Vec<SpikeRx>,
    /// Injector spike times at the bridge, ms.
    pub injector_spikes: Vec<u64>,
    /// Engine output spike times, ms.
    pub engine_fires: Vec<u64>,
    /// Validated readings the robot sent, as (tick, µs).
    pub tof_emissions: Vec<(u64, u32)>,
    /// Robot mode per tick.
    pub mode_by_tick: Vec<Mode>,
    /// Malformed datagrams dropped across all endpoints.
    pub malformed: u64,
    pub log: Vec<LogEvent>,
}

impl PipelineRun {
    /// Timestamps stamped into the spike frames the robot received.
    pub fn robot_stamped_train(&self) -> Vec<u64> {
        self.spike_arrivals.iter().map(|s| s.stamped_ms).collect()
    }

    pub fn log_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_ms,endpoint,event,detail")?;
        for e in &self.log {
            writeln!(w, "{},{},{},{}", e.t_ms, e.endpoint, e.event, e.detail)?;
        }
        Ok(())
    }
}

/// Run the robot/bridge/engine loop over a script under the simulated
/// clock. Deterministic: same script and config, same run, bit for bit.
pub fn run_loopback(
    script: &ScenarioScript,
    cfg: &PipelineConfig,
) -> Result<PipelineRun, ScenarioError> {
    script.validate()?;
    cfg.params.validate()?;
    let horizon = script.total_ms();

    let noise = cfg.opts.noise.map(|n| n.build());
    let mut robot = RobotEndpoint::new(cfg.filter, cfg.opts.sensor_period_ms, noise)?;
    let mut bridge = BridgeEndpoint::new();
    let mut engine = EngineEndpoint::new(cfg.params.clone())?;

    let mut robot_to_bridge = Link::default();
    let mut bridge_to_engine = Link::default();
    let mut engine_to_bridge = Link::default();
    let mut bridge_to_robot = Link::default();

    let mut mode_by_tick = Vec::with_capacity(horizon as usize);
    let mut mode_changes: Vec<(u64, Mode)> = Vec::new();
    let mut last_mode = Mode::Forward;

    for t in 0..horizon {
        let dist = script.distance_at(t);
        robot.tick(t, dist, &bridge_to_robot.deliverable, &mut robot_to_bridge.staged);
        bridge.tick(
            t,
            &robot_to_bridge.deliverable,
            &engine_to_bridge.deliverable,
            &mut bridge_to_engine.staged,
            &mut bridge_to_robot.staged,
        );
        engine.tick(t, &bridge_to_engine.deliverable, &mut engine_to_bridge.staged);

        robot_to_bridge.advance();
        bridge_to_engine.advance();
        engine_to_bridge.advance();
        bridge_to_robot.advance();

        let mode = robot.mode();
        mode_by_tick.push(mode);
        if mode != last_mode {
            mode_changes.push((t, mode));
            last_mode = mode;
        }
    }

    Ok(assemble_run(robot, bridge, engine, mode_by_tick, mode_changes))
}

/// Fold the endpoints' records into one run record with a chronological log.
/// Shared by the simulated-clock and UDP runners.
pub(crate) fn assemble_run(
    robot: RobotEndpoint,
    bridge: BridgeEndpoint,
    engine: EngineEndpoint,
    mode_by_tick: Vec<Mode>,
    mode_changes: Vec<(u64, Mode)>,
) -> PipelineRun {
    let mut log: Vec<LogEvent> = Vec::new();
    for &(t, us) in &robot.tof_log {
        log.push(LogEvent { t_ms: t, endpoint: "robot", event: "tof_tx", detail: us.to_string() });
    }
    for &t in &bridge.injected {
        log.push(LogEvent { t_ms: t, endpoint: "bridge", event: "inject", detail: String::new() });
    }
    for &t in &engine.fires {
        log.push(LogEvent { t_ms: t, endpoint: "engine", event: "fire", detail: String::new() });
    }
    for rx in &robot.spike_log {
        log.push(LogEvent {
            t_ms: rx.arrived_at_ms,
            endpoint: "robot",
            event: "spike_rx",
            detail: rx.stamped_ms.to_string(),
        });
    }
    for &(t, mode) in &mode_changes {
        log.push(LogEvent {
            t_ms: t,
            endpoint: "robot",
            event: "mode",
            detail: mode.as_str().to_string(),
        });
    }
    log.sort_by(|a, b| (a.t_ms, a.endpoint, a.event).cmp(&(b.t_ms, b.endpoint, b.event)));

    PipelineRun {
        spike_arrivals: robot.spike_log,
        injector_spikes: bridge.injected,
        engine_fires: engine.fires,
        tof_emissions: robot.tof_log,
        mode_by_tick,
        malformed: robot.malformed + bridge.malformed + engine.malformed,
        log,
    }
}

/// If `b` is `a` shifted by one constant nonnegative delay, return that
/// delay in ticks. Tolerates one unmatched trailing element of `a` (a spike
/// still in flight when the run ended).
pub fn constant_shift(a: &[u64], b: &[u64]) -> Option<u64> {
    if b.len() > a.len() || a.len() - b.len() > 1 {
        return None;
    }
    if b.is_empty() {
        return Some(0);
    }
    let shift = b[0].checked_sub(a[0])?;
    a.iter().zip(b.iter()).all(|(&x, &y)| y == x + shift).then_some(shift)
}
