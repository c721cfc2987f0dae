//! The same robot/bridge/engine loop over real UDP sockets on localhost.
//!
//! One thread still drives all three endpoints — what changes is that every
//! frame crosses an actual socket, so delivery timing depends on the kernel
//! rather than on the double-buffered links of the simulated clock. The run
//! record has the same shape either way.

use std::collections::VecDeque;
use std::io;
use std::net::{SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::net::endpoint::{BridgeEndpoint, EngineEndpoint, Mode, RobotEndpoint};
use crate::net::harness::{assemble_run, PipelineConfig, PipelineRun};
use crate::scenario::{ScenarioError, ScenarioScript};

/// UDP ports for the three endpoints, all bound on 127.0.0.1. Port 0 asks
/// the OS for an ephemeral port, which is what tests should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UdpPorts {
    pub robot: u16,
    pub bridge: u16,
    pub engine: u16,
}

impl UdpPorts {
    /// All-ephemeral: safe to run concurrently with anything.
    pub fn ephemeral() -> Self {
        UdpPorts { robot: 0, bridge: 0, engine: 0 }
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Cap on frames parked while a socket reports a full send buffer. Beyond
/// this the oldest parked frame is dropped and counted.
const SEND_BACKLOG_LIMIT: usize = 1024;

/// Nonblocking socket with a bounded retry queue for sends.
struct UdpPeer {
    sock: UdpSocket,
    backlog: VecDeque<(SocketAddr, Vec<u8>)>,
    /// Frames dropped because the backlog overflowed.
    dropped: u64,
}

impl UdpPeer {
    fn bind(port: u16) -> io::Result<Self> {
        let sock = UdpSocket::bind(("127.0.0.1", port))?;
        sock.set_nonblocking(true)?;
        Ok(UdpPeer { sock, backlog: VecDeque::new(), dropped: 0 })
    }

    fn addr(&self) -> io::Result<SocketAddr> {
        self.sock.local_addr()
    }

    fn send(&mut self, dest: SocketAddr, frame: Vec<u8>) {
        self.backlog.push_back((dest, frame));
        if self.backlog.len() > SEND_BACKLOG_LIMIT {
            self.backlog.pop_front();
            self.dropped += 1;
        }
        self.flush();
    }

    /// Try to push parked frames out; stop at the first full buffer.
    fn flush(&mut self) {
        while let Some((dest, frame)) = self.backlog.front() {
            match self.sock.send_to(frame, dest) {
                Ok(_) => {
                    self.backlog.pop_front();
                }
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => break,
                // A hard send error can't be retried usefully; drop the frame.
                Err(_) => {
                    self.backlog.pop_front();
                    self.dropped += 1;
                }
            }
        }
    }

    /// Drain everything currently readable as (source, payload) pairs.
    fn drain(&mut self, into: &mut Vec<(SocketAddr, Vec<u8>)>) {
        let mut buf = [0u8; 1500];
        loop {
            match self.sock.recv_from(&mut buf) {
                Ok((n, src)) => into.push((src, buf[..n].to_vec())),
                Err(e) if e.kind() == io::ErrorKind::WouldBlock => break,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(_) => break,
            }
        }
    }
}

/// Run the pipeline over localhost UDP. With `pace` set, ticks are held to
/// one wall-clock millisecond each; otherwise the loop free-runs, which is
/// fine on loopback where delivery outruns the loop anyway.
pub fn run_udp(
    script: &ScenarioScript,
    cfg: &PipelineConfig,
    ports: UdpPorts,
    pace: bool,
) -> Result<PipelineRun, NetError> {
    script.validate()?;
    cfg.params.validate().map_err(ScenarioError::from)?;
    let horizon = script.total_ms();

    let mut robot_peer = UdpPeer::bind(ports.robot)?;
    let mut bridge_peer = UdpPeer::bind(ports.bridge)?;
    let mut engine_peer = UdpPeer::bind(ports.engine)?;
    let robot_addr = robot_peer.addr()?;
    let bridge_addr = bridge_peer.addr()?;
    let engine_addr = engine_peer.addr()?;

    let noise = cfg.opts.noise.map(|n| n.build());
    let mut robot = RobotEndpoint::new(cfg.filter, cfg.opts.sensor_period_ms, noise)
        .map_err(ScenarioError::from)?;
    let mut bridge = BridgeEndpoint::new();
    let mut engine = EngineEndpoint::new(cfg.params.clone()).map_err(ScenarioError::from)?;

    let mut mode_by_tick = Vec::with_capacity(horizon as usize);
    let mut mode_changes: Vec<(u64, Mode)> = Vec::new();
    let mut last_mode = Mode::Forward;

    let mut incoming: Vec<(SocketAddr, Vec<u8>)> = Vec::new();
    let mut inbox: Vec<Vec<u8>> = Vec::new();
    let mut from_robot: Vec<Vec<u8>> = Vec::new();
    let mut from_engine: Vec<Vec<u8>> = Vec::new();
    let mut outbox: Vec<Vec<u8>> = Vec::new();
    let mut to_robot: Vec<Vec<u8>> = Vec::new();

    let start = Instant::now();
    for t in 0..horizon {
        if pace {
            let target = start + Duration::from_millis(t);
            let now = Instant::now();
            if target > now {
                std::thread::sleep(target - now);
            }
        }

        robot_peer.flush();
        bridge_peer.flush();
        engine_peer.flush();

        // Robot: spikes in, validated readings out.
        incoming.clear();
        inbox.clear();
        robot_peer.drain(&mut incoming);
        inbox.extend(incoming.drain(..).map(|(_, frame)| frame));
        outbox.clear();
        robot.tick(t, script.distance_at(t), &inbox, &mut outbox);
        for frame in outbox.drain(..) {
            robot_peer.send(bridge_addr, frame);
        }

        // Bridge: readings and engine spikes in, classified by source.
        incoming.clear();
        from_robot.clear();
        from_engine.clear();
        bridge_peer.drain(&mut incoming);
        for (src, frame) in incoming.drain(..) {
            if src == robot_addr {
                from_robot.push(frame);
            } else if src == engine_addr {
                from_engine.push(frame);
            } else {
                bridge.malformed += 1; // stray traffic on our port
            }
        }
        outbox.clear();
        to_robot.clear();
        bridge.tick(t, &from_robot, &from_engine, &mut outbox, &mut to_robot);
        for frame in outbox.drain(..) {
            bridge_peer.send(engine_addr, frame);
        }
        for frame in to_robot.drain(..) {
            bridge_peer.send(robot_addr, frame);
        }

        // Engine: one membrane step per tick.
        incoming.clear();
        inbox.clear();
        engine_peer.drain(&mut incoming);
        inbox.extend(incoming.drain(..).map(|(_, frame)| frame));
        outbox.clear();
        engine.tick(t, &inbox, &mut outbox);
        for frame in outbox.drain(..) {
            engine_peer.send(bridge_addr, frame);
        }

        let mode = robot.mode();
        mode_by_tick.push(mode);
        if mode != last_mode {
            mode_changes.push((t, mode));
            last_mode = mode;
        }
    }

    let dropped = robot_peer.dropped + bridge_peer.dropped + engine_peer.dropped;
    let mut run = assemble_run(robot, bridge, engine, mode_by_tick, mode_changes);
    run.malformed += dropped;
    Ok(run)
}
