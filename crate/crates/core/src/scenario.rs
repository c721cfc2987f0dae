//! Scripted experiments: distance profiles in, tick-aligned run reports out.
//!
//! A scenario script tiles the timeline with distance profiles (constant,
//! ramp, step, or no obstacle). The offline runner drives the whole chain —
//! sensor, redundancy filter, rate encoder, engine, avoidance rule — on one
//! simulated millisecond clock, producing a deterministic [`RunReport`]
//! with one row per tick. The same scripts feed the loopback pipeline, so
//! offline and networked runs are directly comparable.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{firing_windows, FiringWindow};
use crate::encoder::{EncoderState, TofMeasurement};
use crate::filter::{FilterConfig, FilterError, MeasurementFilter};
use crate::lif::{run, LifEngine, NeuronParams, ParamError, RunError, Trace};
use crate::net::endpoint::{AvoidanceState, Mode};
use crate::sensor::{sample_tof_us, NoiseCfg, SensorNoise};

/// Distance profile of one script segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// Fixed obstacle at `distance_cm`.
    Constant { distance_cm: f64 },
    /// Linear sweep from `from_cm` at the segment start to `to_cm` at its
    /// end.
    Ramp { from_cm: f64, to_cm: f64 },
    /// Abrupt jump from `before_cm` to `after_cm` at `at_ms` into the
    /// segment.
    Step { before_cm: f64, after_cm: f64, at_ms: u64 },
    /// Nothing in sensor range.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration_ms: u64,
    pub profile: Profile,
}

/// A full experiment script; segments tile the timeline without gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("script has no segments")]
    EmptyScript,
    #[error("segment {idx}: {reason}")]
    BadSegment { idx: usize, reason: &'static str },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("search bracket [{lo}, {hi}] cm must satisfy lo < hi")]
    BadBracket { lo: f64, hi: f64 },
    #[error("bracket low end {0} cm is already undetectable; nothing to bisect")]
    LoUndetectable(f64),
    #[error("bracket high end {0} cm is still detectable; nothing to bisect")]
    HiDetectable(f64),
}

impl ScenarioScript {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.segments.is_empty() {
            return Err(ScenarioError::EmptyScript);
        }
        for (idx, seg) in self.segments.iter().enumerate() {
            if seg.duration_ms == 0 {
                return Err(ScenarioError::BadSegment { idx, reason: "duration must be > 0" });
            }
            let ok = |d: f64| d.is_finite() && d >= 0.0;
            match seg.profile {
                Profile::Constant { distance_cm } if !ok(distance_cm) => {
                    return Err(ScenarioError::BadSegment {
                        idx,
                        reason: "distance must be finite and nonnegative",
                    });
                }
                Profile::Ramp { from_cm, to_cm } if !ok(from_cm) || !ok(to_cm) => {
                    return Err(ScenarioError::BadSegment {
                        idx,
                        reason: "ramp endpoints must be finite and nonnegative",
                    });
                }
                Profile::Step { before_cm, after_cm, at_ms } => {
                    if !ok(before_cm) || !ok(after_cm) {
                        return Err(ScenarioError::BadSegment {
                            idx,
                            reason: "step levels must be finite and nonnegative",
                        });
                    }
                    if at_ms > seg.duration_ms {
                        return Err(ScenarioError::BadSegment {
                            idx,
                            reason: "step time lies outside the segment",
                        });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn total_ms(&self) -> u64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    /// Obstacle distance at absolute time `t_ms`; `None` means nothing in
    /// range. Times at or past the end of the script read as absent.
    pub fn distance_at(&self, t_ms: u64) -> Option<f64> {
        let mut start = 0u64;
        for seg in &self.segments {
            let end = start + seg.duration_ms;
            if t_ms < end {
                let local = t_ms - start;
                return match seg.profile {
                    Profile::Constant { distance_cm } => Some(distance_cm),
                    Profile::Ramp { from_cm, to_cm } => {
                        let frac = local as f64 / seg.duration_ms as f64;
                        Some(from_cm + (to_cm - from_cm) * frac)
                    }
                    Profile::Step { before_cm, after_cm, at_ms } => {
                        Some(if local < at_ms { before_cm } else { after_cm })
                    }
                    Profile::Absent => None,
                };
            }
            start = end;
        }
        None
    }

    /// One constant-distance segment.
    pub fn constant(distance_cm: f64, duration_ms: u64) -> Self {
        ScenarioScript {
            segments: vec![Segment { duration_ms, profile: Profile::Constant { distance_cm } }],
        }
    }

    /// Empty range for `absent_ms`, then a constant obstacle.
    pub fn appear(absent_ms: u64, distance_cm: f64, present_ms: u64) -> Self {
        ScenarioScript {
            segments: vec![
                Segment { duration_ms: absent_ms, profile: Profile::Absent },
                Segment { duration_ms: present_ms, profile: Profile::Constant { distance_cm } },
            ],
        }
    }

    /// Symmetric out-and-back sweep: `lo -> hi` over the first half of
    /// `total_ms`, `hi -> lo` over the second.
    pub fn ramp_out_and_back(lo_cm: f64, hi_cm: f64, total_ms: u64) -> Self {
        let half = total_ms / 2;
        ScenarioScript {
            segments: vec![
                Segment { duration_ms: half, profile: Profile::Ramp { from_cm: lo_cm, to_cm: hi_cm } },
                Segment {
                    duration_ms: total_ms - half,
                    profile: Profile::Ramp { from_cm: hi_cm, to_cm: lo_cm },
                },
            ],
        }
    }
}

/// Knobs shared by the offline runner and the loopback pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    /// Raw sensor cadence, ms per reading.
    pub sensor_period_ms: u64,
    /// Optional measurement jitter; `None` (the default) is noise-free.
    pub noise: Option<NoiseCfg>,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions { sensor_period_ms: 20, noise: None }
    }
}

/// Evaluation convention: the first two seconds of a run are charging
/// transient and are skipped when judging steady-state behaviour.
pub const TRANSIENT_MS: u64 = 2000;

/// One simulated millisecond of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub t_ms: u64,
    /// True obstacle distance, if any.
    pub dist_cm: Option<f64>,
    /// Raw reading held from the most recent sensor sample.
    pub tof_us: u32,
    /// Encoder's current inter-spike interval, ms.
    pub isi_ms: f64,
    pub in_spike: bool,
    pub out_spike: bool,
    pub mode: Mode,
}

/// Tick-aligned record of a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub input_spikes: Vec<u64>,
    pub output_spikes: Vec<u64>,
}

impl RunReport {
    /// Output spikes at or after `from_ms`.
    pub fn output_spikes_from(&self, from_ms: u64) -> Vec<u64> {
        self.output_spikes.iter().copied().filter(|&t| t >= from_ms).collect()
    }

    /// Gaps of the output train over the whole run, including the leading
    /// gap from t = 0 and the trailing gap to the horizon. Returned as
    /// (length, start, end).
    pub fn output_gaps(&self) -> Vec<(u64, u64, u64)> {
        let horizon = self.rows.len() as u64;
        let mut gaps = Vec::new();
        let mut prev = 0u64;
        for &t in &self.output_spikes {
            gaps.push((t - prev, prev, t));
            prev = t;
        }
        gaps.push((horizon - prev, prev, horizon));
        gaps
    }
}

/// Drive the full chain offline: sensor -> filter -> encoder -> engine ->
/// avoidance, all on one simulated clock. Deterministic for a given script,
/// parameters and options.
pub fn run_scenario(
    script: &ScenarioScript,
    params: &NeuronParams,
    filter_cfg: FilterConfig,
    opts: &ScenarioOptions,
) -> Result<RunReport, ScenarioError> {
    script.validate()?;
    params.validate()?;
    assert!(opts.sensor_period_ms > 0, "sensor cadence must be nonzero");

    let horizon = script.total_ms();
    let mut filter = MeasurementFilter::new(filter_cfg)?;
    let mut encoder = EncoderState::new();
    let mut engine = LifEngine::new(params.clone())?;
    let mut avoidance = AvoidanceState::new();
    let mut noise: Option<SensorNoise> = opts.noise.map(|cfg| cfg.build());

    let mut rows = Vec::with_capacity(horizon as usize);
    let mut input_spikes = Vec::new();
    let mut output_spikes = Vec::new();
    let mut tof_last = crate::sensor::tof_reading_us(None);

    for t in 0..horizon {
        let dist = script.distance_at(t);
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
        rows.push(ReportRow {
            t_ms: t,
            dist_cm: dist,
            tof_us: tof_last,
            isi_ms: encoder.current_isi_s() * 1000.0,
            in_spike,
            out_spike,
            mode: avoidance.mode(),
        });
    }

    Ok(RunReport { rows, input_spikes, output_spikes })
}

/// Horizon and steady-state convention for detectability probes.
const PROBE_HORIZON_MS: u64 = 20_000;

/// Does a constant obstacle at `distance_cm` keep the system firing? The
/// probe runs 20 s and requires an output spike in the final third.
pub fn detectable(
    distance_cm: f64,
    params: &NeuronParams,
    filter_cfg: FilterConfig,
    opts: &ScenarioOptions,
) -> Result<bool, ScenarioError> {
    let script = ScenarioScript::constant(distance_cm, PROBE_HORIZON_MS);
    let report = run_scenario(&script, params, filter_cfg, opts)?;
    Ok(!report.output_spikes_from(PROBE_HORIZON_MS * 2 / 3).is_empty())
}

/// Bisect the detection boundary: the distance separating obstacles that
/// keep the system firing from those it never reports. Resolution 0.1 cm.
pub fn threshold_search(
    params: &NeuronParams,
    filter_cfg: FilterConfig,
    lo_cm: f64,
    hi_cm: f64,
    opts: &ScenarioOptions,
) -> Result<f64, ScenarioError> {
    if lo_cm >= hi_cm || !lo_cm.is_finite() || !hi_cm.is_finite() || lo_cm < 0.0 {
        return Err(ScenarioError::BadBracket { lo: lo_cm, hi: hi_cm });
    }
    if !detectable(lo_cm, params, filter_cfg, opts)? {
        return Err(ScenarioError::LoUndetectable(lo_cm));
    }
    if detectable(hi_cm, params, filter_cfg, opts)? {
        return Err(ScenarioError::HiDetectable(hi_cm));
    }
    let (mut lo, mut hi) = (lo_cm, hi_cm);
    while hi - lo > 0.1 {
        let mid = 0.5 * (lo + hi);
        if detectable(mid, params, filter_cfg, opts)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The three-rate demonstration replayed through the engine, packaged as a
/// report plus the analysis artifacts (trace, windows, input ISIs).
pub struct DemoRun {
    pub report: RunReport,
    pub trace: Trace,
    pub windows: Vec<FiringWindow>,
}

/// Replay the 1/2/10 Hz demonstration train directly into the engine (no
/// sensor, no encoder) and run the window analysis over the result.
pub fn demo_run(params: &NeuronParams) -> Result<DemoRun, ScenarioError> {
    let train = crate::analysis::three_rate_demo_train();
    let horizon = crate::analysis::THREE_RATE_DEMO_HORIZON_MS;
    let out = run(params, &train, horizon)?;
    let windows = firing_windows(&out.trace, params, &train)
        .expect("demo trace and train are consistent by construction");

    let input_spikes: Vec<u64> = train.iter().map(|s| s.t_ms).collect();
    let output_spikes: Vec<u64> = out.output_train.iter().map(|s| s.t_ms).collect();
    let mut avoidance = AvoidanceState::new();
    let mut rows = Vec::with_capacity(horizon as usize);
    let mut last_gap = 0u64; // gap between the two most recent input spikes
    let mut prev_input: Option<u64> = None;
    let mut in_idx = 0usize;
    let mut out_idx = 0usize;
    for t in 0..horizon {
        let in_spike = in_idx < input_spikes.len() && input_spikes[in_idx] == t;
        if in_spike {
            if let Some(p) = prev_input {
                last_gap = t - p;
            }
            prev_input = Some(t);
            in_idx += 1;
        }
        let out_spike = out_idx < output_spikes.len() && output_spikes[out_idx] == t;
        if out_spike {
            avoidance.on_spike(t);
            out_idx += 1;
        }
        avoidance.tick(t);
        rows.push(ReportRow {
            t_ms: t,
            dist_cm: None,
            tof_us: 0,
            isi_ms: last_gap as f64,
            in_spike,
            out_spike,
            mode: avoidance.mode(),
        });
    }
    Ok(DemoRun {
        report: RunReport { rows, input_spikes, output_spikes },
        trace: out.trace,
        windows,
    })
}

pub const RUN_CSV_HEADER: &str = "t_ms,dist_cm,tof_us,isi_ms,in_spike,out_spike,mode";

pub fn run_csv<W: Write>(report: &RunReport, mut w: W) -> io::Result<()> {
    writeln!(w, "{RUN_CSV_HEADER}")?;
    for r in &report.rows {
        let dist = r.dist_cm.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.t_ms,
            dist,
            r.tof_us,
            r.isi_ms,
            u8::from(r.in_spike),
            u8::from(r.out_spike),
            r.mode.as_str()
        )?;
    }
    Ok(())
}

pub fn spikes_csv<W: Write>(report: &RunReport, mut w: W) -> io::Result<()> {
    writeln!(w, "t_ms,train")?;
    let mut all: Vec<(u64, &str)> = report
        .input_spikes
        .iter()
        .map(|&t| (t, "input"))
        .chain(report.output_spikes.iter().map(|&t| (t, "output")))
        .collect();
    all.sort_by_key(|&(t, kind)| (t, kind == "output"));
    for (t, kind) in all {
        writeln!(w, "{t},{kind}")?;
    }
    Ok(())
}

/// Write `run.csv` and `spikes.csv` into `dir` (created if missing).
pub fn emit_report(report: &RunReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut run_file = fs::File::create(dir.join("run.csv"))?;
    run_csv(report, &mut run_file)?;
    let mut spikes_file = fs::File::create(dir.join("spikes.csv"))?;
    spikes_csv(report, &mut spikes_file)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> (NeuronParams, FilterConfig, ScenarioOptions) {
        (NeuronParams::default(), FilterConfig::default(), ScenarioOptions::default())
    }

    #[test]
    fn script_json_round_trips() {
        let script = ScenarioScript {
            segments: vec![
                Segment { duration_ms: 2000, profile: Profile::Absent },
                Segment { duration_ms: 1000, profile: Profile::Constant { distance_cm: 25.0 } },
                Segment { duration_ms: 500, profile: Profile::Ramp { from_cm: 10.0, to_cm: 60.0 } },
                Segment {
                    duration_ms: 300,
                    profile: Profile::Step { before_cm: 50.0, after_cm: 20.0, at_ms: 100 },
                },
            ],
        };
        let json = serde_json::to_string_pretty(&script).unwrap();
        let back: ScenarioScript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, script);
        assert!(json.contains("\"kind\": \"ramp\""));
    }

    #[test]
    fn validation_catches_bad_scripts() {
        assert!(matches!(
            ScenarioScript { segments: vec![] }.validate(),
            Err(ScenarioError::EmptyScript)
        ));
        let zero = ScenarioScript {
            segments: vec![Segment { duration_ms: 0, profile: Profile::Absent }],
        };
        assert!(matches!(zero.validate(), Err(ScenarioError::BadSegment { idx: 0, .. })));
        let neg = ScenarioScript::constant(-1.0, 100);
        assert!(neg.validate().is_err());
        let step = ScenarioScript {
            segments: vec![Segment {
                duration_ms: 100,
                profile: Profile::Step { before_cm: 1.0, after_cm: 2.0, at_ms: 200 },
            }],
        };
        assert!(step.validate().is_err());
    }

    #[test]
    fn profiles_evaluate_as_documented() {
        let script = ScenarioScript {
            segments: vec![
                Segment { duration_ms: 1000, profile: Profile::Ramp { from_cm: 0.0, to_cm: 100.0 } },
                Segment {
                    duration_ms: 1000,
                    profile: Profile::Step { before_cm: 50.0, after_cm: 20.0, at_ms: 500 },
                },
                Segment { duration_ms: 1000, profile: Profile::Absent },
            ],
        };
        assert_eq!(script.distance_at(0), Some(0.0));
        assert_eq!(script.distance_at(500), Some(50.0));
        assert_eq!(script.distance_at(1000), Some(50.0)); // step, before
        assert_eq!(script.distance_at(1499), Some(50.0));
        assert_eq!(script.distance_at(1500), Some(20.0)); // step, after
        assert_eq!(script.distance_at(2500), None); // absent
        assert_eq!(script.distance_at(9999), None); // past the end
        assert_eq!(script.total_ms(), 3000);
    }

    #[test]
    fn report_has_one_row_per_tick_and_starts_at_the_default_reading() {
        let (params, cfg, opts) = defaults();
        let report =
            run_scenario(&ScenarioScript::constant(25.0, 500), &params, cfg, &opts).unwrap();
        assert_eq!(report.rows.len(), 500);
        assert_eq!(report.rows[0].tof_us, 1471); // first sample lands at t=0
        assert!((report.rows[0].isi_ms - 1001.0).abs() < 1e-9); // encoder still at default
        // Filter validates on the 4th sample (t=60); encoder follows.
        assert!(report.rows[59].isi_ms > 1000.0);
        assert!((report.rows[60].isi_ms - 63.5).abs() < 0.5);
    }

    #[test]
    fn steady_39_cm_fires_and_100_cm_never_does() {
        let (params, cfg, opts) = defaults();
        let close =
            run_scenario(&ScenarioScript::constant(39.0, 20_000), &params, cfg, &opts).unwrap();
        assert!(!close.output_spikes_from(TRANSIENT_MS).is_empty());
        // Firing persists to the end of the run, not just the transient.
        assert!(!close.output_spikes_from(18_000).is_empty());

        let far =
            run_scenario(&ScenarioScript::constant(100.0, 20_000), &params, cfg, &opts).unwrap();
        assert!(far.output_spikes.is_empty());
        assert!(far.rows.iter().all(|r| r.mode == Mode::Forward));
    }

    #[test]
    fn firing_rate_strictly_decreases_with_distance() {
        let (params, cfg, opts) = defaults();
        let mut counts = Vec::new();
        for d in [10.0, 20.0, 30.0] {
            let report =
                run_scenario(&ScenarioScript::constant(d, 10_000), &params, cfg, &opts).unwrap();
            counts.push(report.output_spikes_from(TRANSIENT_MS).len());
        }
        assert!(
            counts[0] > counts[1] && counts[1] > counts[2],
            "steady-state spike counts must fall with distance: {counts:?}"
        );
    }

    #[test]
    fn threshold_search_finds_the_documented_boundary() {
        let (params, cfg, opts) = defaults();
        let boundary = threshold_search(&params, cfg, 10.0, 100.0, &opts).unwrap();
        assert!((39.0..=39.5).contains(&boundary), "got {boundary}");
    }

    #[test]
    fn threshold_search_rejects_degenerate_brackets() {
        let (params, cfg, opts) = defaults();
        assert!(matches!(
            threshold_search(&params, cfg, 50.0, 40.0, &opts),
            Err(ScenarioError::BadBracket { .. })
        ));
        assert!(matches!(
            threshold_search(&params, cfg, 80.0, 100.0, &opts),
            Err(ScenarioError::LoUndetectable(_))
        ));
        assert!(matches!(
            threshold_search(&params, cfg, 10.0, 20.0, &opts),
            Err(ScenarioError::HiDetectable(_))
        ));
    }

    #[test]
    fn harder_threshold_moves_the_boundary_closer() {
        let (_, cfg, opts) = defaults();
        let base = threshold_search(&NeuronParams::default(), cfg, 10.0, 100.0, &opts).unwrap();
        let hard = NeuronParams { v_thresh: -50.0, ..Default::default() };
        let closer = threshold_search(&hard, cfg, 10.0, 100.0, &opts).unwrap();
        assert!(closer < base, "harder threshold: {closer} vs {base}");
    }

    #[test]
    fn ramp_out_and_back_goes_silent_strictly_inside_the_far_span() {
        let (params, cfg, opts) = defaults();
        let script = ScenarioScript::ramp_out_and_back(10.0, 60.0, 60_000);
        let report = run_scenario(&script, &params, cfg, &opts).unwrap();
        let big: Vec<_> =
            report.output_gaps().into_iter().filter(|&(len, _, _)| len > 5000).collect();
        assert_eq!(big.len(), 1, "exactly one long silence: {big:?}");
        let (_, start, end) = big[0];
        // Distance exceeds 39.5 cm on (17700, 42300): silence covers it...
        assert!(start < 17_700 && end > 42_300, "gap ({start},{end})");
        // ...and stays within the >39.0 cm span plus 2 s hysteresis each side.
        assert!(start > 17_400 - 2000 && end < 42_600 + 2000, "gap ({start},{end})");
    }

    #[test]
    fn demo_run_report_shows_three_isi_plateaus() {
        let demo = demo_run(&NeuronParams::default()).unwrap();
        let mut plateaus: Vec<u64> = demo
            .report
            .rows
            .iter()
            .filter(|r| r.in_spike && r.isi_ms > 0.0)
            .map(|r| r.isi_ms as u64)
            .collect();
        plateaus.dedup();
        assert_eq!(plateaus, vec![1000, 500, 100]);
        assert_eq!(demo.report.rows.len(), 5000);
        assert!(!demo.windows.is_empty());
        assert!(!demo.report.output_spikes.is_empty());
    }

    #[test]
    fn csv_emission_round_trips_through_the_filesystem() {
        let (params, cfg, opts) = defaults();
        let report =
            run_scenario(&ScenarioScript::appear(100, 25.0, 400), &params, cfg, &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&report, dir.path()).unwrap();

        let run_text = std::fs::read_to_string(dir.path().join("run.csv")).unwrap();
        let mut lines = run_text.lines();
        assert_eq!(lines.next(), Some(RUN_CSV_HEADER));
        assert_eq!(lines.count(), 500);
        // Absent distance serializes as an empty field.
        assert!(run_text.lines().nth(1).unwrap().starts_with("0,,5883,"));

        let spikes_text = std::fs::read_to_string(dir.path().join("spikes.csv")).unwrap();
        assert!(spikes_text.starts_with("t_ms,train\n"));
        assert_eq!(
            spikes_text.lines().filter(|l| l.ends_with(",input")).count(),
            report.input_spikes.len()
        );
    }

    #[test]
    fn noise_keeps_runs_deterministic_per_seed() {
        let (params, cfg, _) = defaults();
        let opts = ScenarioOptions {
            noise: Some(NoiseCfg { seed: 11, amplitude_cm: 0.3 }),
            ..Default::default()
        };
        let script = ScenarioScript::constant(30.0, 5000);
        let a = run_scenario(&script, &params, cfg, &opts).unwrap();
        let b = run_scenario(&script, &params, cfg, &opts).unwrap();
        assert_eq!(a, b);
        let other_seed = ScenarioOptions {
            noise: Some(NoiseCfg { seed: 12, amplitude_cm: 0.3 }),
            ..Default::default()
        };
        let c = run_scenario(&script, &params, cfg, &other_seed).unwrap();
        // Different seed, different raw readings somewhere in the run.
        assert!(a.rows.iter().zip(&c.rows).any(|(x, y)| x.tof_us != y.tof_us));
    }
}
