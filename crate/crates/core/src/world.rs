//! Tiny 2-D world for closed-loop avoidance runs: axis-aligned boxes, a
//! robot that drives straight or turns in place, and a forward range ray
//! standing in for the sonar.
//!
//! The per-tick sensing/encoding/engine chain is exactly the offline
//! scenario runner's; only the distance source differs — it comes from ray
//! casting against the boxes instead of from a script.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{EncoderState, TofMeasurement};
use crate::filter::{FilterConfig, MeasurementFilter};
use crate::lif::{LifEngine, NeuronParams};
use crate::net::endpoint::{AvoidanceState, Mode};
use crate::scenario::{ReportRow, RunReport, ScenarioError, ScenarioOptions};
use crate::sensor::{sample_tof_us, SensorNoise};

/// Axis-aligned box obstacle, cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    fn well_formed(&self) -> bool {
        self.x_min.is_finite()
            && self.y_min.is_finite()
            && self.x_max.is_finite()
            && self.y_max.is_finite()
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }
}

/// Robot pose: position in cm, heading in degrees (0° = +x, counterclockwise
/// positive). The heading is left unnormalized so turns accumulate
/// monotonically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
}

fn default_forward_speed() -> f64 {
    10.0
}

fn default_turn_rate() -> f64 {
    45.0
}

/// World description: obstacles, start pose, motion rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    pub boxes: Vec<Rect>,
    pub start: Pose,
    /// Drive speed while in forward mode, cm/s.
    #[serde(default = "default_forward_speed")]
    pub forward_speed_cmps: f64,
    /// Turn-in-place rate while avoiding, degrees/s (clockwise).
    #[serde(default = "default_turn_rate")]
    pub turn_rate_dps: f64,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("bad world: {0}")]
    BadWorld(&'static str),
    /// The robot left the bounding box of a closed world — avoidance failed
    /// and it drove through a wall.
    #[error("robot escaped the arena at t={t_ms} ms (x={x:.1}, y={y:.1})")]
    Escaped { t_ms: u64, x: f64, y: f64 },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl WorldModel {
    pub fn validate(&self) -> Result<(), WorldError> {
        if self.boxes.is_empty() {
            return Err(WorldError::BadWorld("no boxes"));
        }
        if self.boxes.iter().any(|b| !b.well_formed()) {
            return Err(WorldError::BadWorld("box must have x_min < x_max and y_min < y_max"));
        }
        if !(self.start.x.is_finite() && self.start.y.is_finite() && self.start.heading_deg.is_finite()) {
            return Err(WorldError::BadWorld("start pose must be finite"));
        }
        if self.boxes.iter().any(|b| b.contains(self.start.x, self.start.y)) {
            return Err(WorldError::BadWorld("start pose is inside an obstacle"));
        }
        if !(self.forward_speed_cmps > 0.0 && self.forward_speed_cmps.is_finite()) {
            return Err(WorldError::BadWorld("forward speed must be positive"));
        }
        if !(self.turn_rate_dps > 0.0 && self.turn_rate_dps.is_finite()) {
            return Err(WorldError::BadWorld("turn rate must be positive"));
        }
        Ok(())
    }

    /// 3 m × 3 m closed arena: four 10 cm-thick walls around the interior
    /// [0, 300]², robot starting dead center facing +x.
    pub fn boxed_arena() -> Self {
        WorldModel {
            boxes: vec![
                Rect { x_min: -10.0, y_min: -10.0, x_max: 310.0, y_max: 0.0 },
                Rect { x_min: -10.0, y_min: 300.0, x_max: 310.0, y_max: 310.0 },
                Rect { x_min: -10.0, y_min: 0.0, x_max: 0.0, y_max: 300.0 },
                Rect { x_min: 300.0, y_min: 0.0, x_max: 310.0, y_max: 300.0 },
            ],
            start: Pose { x: 150.0, y: 150.0, heading_deg: 0.0 },
            forward_speed_cmps: default_forward_speed(),
            turn_rate_dps: default_turn_rate(),
        }
    }

    /// Axis-aligned bounding box over all obstacles.
    fn bounds(&self) -> Rect {
        let mut b = self.boxes[0];
        for r in &self.boxes[1..] {
            b.x_min = b.x_min.min(r.x_min);
            b.y_min = b.y_min.min(r.y_min);
            b.x_max = b.x_max.max(r.x_max);
            b.y_max = b.y_max.max(r.y_max);
        }
        b
    }
}

/// Distance from `(px, py)` along the unit direction `(dx, dy)` to a box,
/// or `None` if the ray misses. A ray starting inside returns 0.
fn ray_rect(px: f64, py: f64, dx: f64, dy: f64, r: &Rect) -> Option<f64> {
    let mut t_near = 0.0f64;
    let mut t_far = f64::INFINITY;
    for (p, d, lo, hi) in [(px, dx, r.x_min, r.x_max), (py, dy, r.y_min, r.y_max)] {
        if d.abs() < 1e-12 {
            // Parallel to this slab: must already sit between its planes.
            if p < lo || p > hi {
                return None;
            }
        } else {
            let (ta, tb) = ((lo - p) / d, (hi - p) / d);
            let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t_near = t_near.max(ta);
            t_far = t_far.min(tb);
            if t_near > t_far {
                return None;
            }
        }
    }
    Some(t_near)
}

/// Forward range reading: nearest box hit along the pose's heading, cm.
pub fn ray_distance(pose: &Pose, boxes: &[Rect]) -> Option<f64> {
    let rad = pose.heading_deg.to_radians();
    let (dx, dy) = (rad.cos(), rad.sin());
    boxes
        .iter()
        .filter_map(|r| ray_rect(pose.x, pose.y, dx, dy, r))
        .min_by(|a, b| a.partial_cmp(b).expect("distances are finite"))
}

/// Pose trace sample, one per tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t_ms: u64,
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldRun {
    pub report: RunReport,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Smallest forward range reading seen over the run (∞ if the ray never
    /// hit anything).
    pub min_ray_cm: f64,
}

/// Drive the robot around `world` for `duration_ms`, closing the loop from
/// ray-cast range readings through the filter, encoder and engine to the
/// avoidance state machine. Rows and the trajectory record the pre-move
/// state of each tick.
pub fn run_world(
    world: &WorldModel,
    duration_ms: u64,
    params: &NeuronParams,
    filter_cfg: FilterConfig,
    opts: &ScenarioOptions,
) -> Result<WorldRun, WorldError> {
    world.validate()?;
    params.validate().map_err(ScenarioError::from)?;
    assert!(opts.sensor_period_ms > 0, "sensor cadence must be nonzero");

    let mut filter = MeasurementFilter::new(filter_cfg).map_err(ScenarioError::from)?;
    let mut encoder = EncoderState::new();
    let mut engine = LifEngine::new(params.clone()).map_err(ScenarioError::from)?;
    let mut avoidance = AvoidanceState::new();
    let mut noise: Option<SensorNoise> = opts.noise.map(|cfg| cfg.build());

    // Escapes are only detectable when the walls actually enclose the start.
    let bounds = world.bounds();
    let enclosed = bounds.contains(world.start.x, world.start.y);

    let mut pose = world.start;
    let mut rows = Vec::with_capacity(duration_ms as usize);
    let mut trajectory = Vec::with_capacity(duration_ms as usize);
    let mut input_spikes = Vec::new();
    let mut output_spikes = Vec::new();
    let mut tof_last = crate::sensor::tof_reading_us(None);
    let mut min_ray_cm = f64::INFINITY;

    for t in 0..duration_ms {
        let dist = ray_distance(&pose, &world.boxes);
        if let Some(d) = dist {
            min_ray_cm = min_ray_cm.min(d);
        }
        if t % opts.sensor_period_ms == 0 {
            let raw = sample_tof_us(dist, noise.as_mut());
            tof_last = raw;
            if let Some(valid) = filter.ingest(raw) {
                encoder.update_tof(&TofMeasurement { tof_us: valid, t_recv_ms: t });
            }
        }
        let in_spike = encoder.tick(t).is_some();
        if in_spike {
            engine.push_spike();
            input_spikes.push(t);
        }
        let out_spike = engine.tick();
        if out_spike {
            output_spikes.push(t);
            avoidance.on_spike(t);
        }
        avoidance.tick(t);
        let mode = avoidance.mode();

        rows.push(ReportRow {
            t_ms: t,
            dist_cm: dist,
            tof_us: tof_last,
            isi_ms: encoder.current_isi_s() * 1000.0,
            in_spike,
            out_spike,
            mode,
        });
        trajectory.push(TrajectoryPoint {
            t_ms: t,
            x: pose.x,
            y: pose.y,
            heading_deg: pose.heading_deg,
            mode,
        });

        // Integrate one millisecond of motion.
        match mode {
            Mode::Forward => {
                let rad = pose.heading_deg.to_radians();
                let step = world.forward_speed_cmps * 1e-3;
                pose.x += step * rad.cos();
                pose.y += step * rad.sin();
            }
            Mode::Turning => {
                pose.heading_deg -= world.turn_rate_dps * 1e-3;
            }
        }

        if enclosed && !bounds.contains(pose.x, pose.y) {
            return Err(WorldError::Escaped { t_ms: t, x: pose.x, y: pose.y });
        }
    }

    Ok(WorldRun {
        report: RunReport { rows, input_spikes, output_spikes },
        trajectory,
        min_ray_cm,
    })
}

pub const TRAJECTORY_CSV_HEADER: &str = "t_ms,x_cm,y_cm,heading_deg,mode";

pub fn trajectory_csv<W: Write>(run: &WorldRun, mut w: W) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
    for p in &run.trajectory {
        writeln!(w, "{},{},{},{},{}", p.t_ms, p.x, p.y, p.heading_deg, p.mode.as_str())?;
    }
    Ok(())
}

/// Write `run.csv`, `spikes.csv` and `trajectory.csv` under `dir`.
pub fn emit_world(run: &WorldRun, dir: &Path) -> io::Result<()> {
    crate::scenario::emit_report(&run.report, dir)?;
    let mut traj = fs::File::create(dir.join("trajectory.csv"))?;
    trajectory_csv(run, &mut traj)
}
