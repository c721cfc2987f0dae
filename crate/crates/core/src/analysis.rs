//! Post-hoc analytics over engine traces: the minimum firing potential,
//! firing windows, inter-spike-interval series, and the input-rate cutoff
//! below which the neuron never sustains output.
//!
//! The neuron acts as a high-pass filter on input rate. These routines
//! quantify that: `min_firing_potential` finds the membrane level from which
//! one more spike still reaches threshold, `firing_windows` turns a trace
//! into the intervals during which a follow-up spike would fire, and
//! `cutoff_rate` locates the rate threshold by bisection.

use std::io::{self, Write};

use thiserror::Error;

use crate::lif::{run, step, NeuronParams, NeuronState, ParamError, SpikeEvent, Trace};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("threshold must be finite for firing analysis")]
    UnboundedThreshold,
    #[error("neuron never fires, even from just under threshold")]
    NeverFires,
    #[error("input train is not sorted by time at index {0}")]
    Unsorted(usize),
    #[error("input spike at {t_ms} ms does not fit the {trace_ms} ms trace")]
    TraceMismatch { t_ms: u64, trace_ms: u64 },
    #[error("no input rate up to {0} Hz produces sustained output")]
    CutoffNotFound(f64),
    #[error("output is sustained even at {0} Hz input; nothing to bisect")]
    AlwaysSustained(f64),
    #[error(transparent)]
    Run(#[from] crate::lif::RunError),
}

/// The two phases of a firing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// From an input spike's arrival to the membrane's local maximum.
    SpikeToPeak,
    /// From the local maximum until the membrane drops back below the
    /// minimum firing potential.
    PeakToMinFire,
}

impl WindowKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WindowKind::SpikeToPeak => "spike_to_peak",
            WindowKind::PeakToMinFire => "peak_to_minfire",
        }
    }
}

/// A closed time interval during which a further input spike would push the
/// neuron over threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiringWindow {
    pub t_start_ms: f64,
    pub t_end_ms: f64,
    pub kind: WindowKind,
}

/// Consecutive inter-spike intervals of one train, each stamped with the
/// time of the later spike.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IsiSeries {
    pub points: Vec<(u64, u64)>,
}

impl IsiSeries {
    pub fn intervals(&self) -> Vec<u64> {
        self.points.iter().map(|&(_, isi)| isi).collect()
    }
}

/// Inter-spike intervals of a sorted train. Fewer than two spikes give an
/// empty series.
pub fn isi_series(train: &[SpikeEvent]) -> IsiSeries {
    let points = train
        .windows(2)
        .map(|pair| {
            assert!(pair[1].t_ms >= pair[0].t_ms, "isi_series needs a sorted train");
            (pair[1].t_ms, pair[1].t_ms - pair[0].t_ms)
        })
        .collect();
    IsiSeries { points }
}

/// Number of steps after which a single spike's response has provably come
/// and gone: several membrane time constants plus the synaptic tail.
fn settle_steps(params: &NeuronParams) -> usize {
    (((10.0 * params.tau_m + 20.0 * params.tau_syn_e) / params.dt).ceil() as usize).max(100)
}

/// Does a neuron starting at membrane `v0` (quiescent currents) fire after
/// receiving exactly one input spike?
fn fires_from(v0: f64, params: &NeuronParams) -> bool {
    let mut state = NeuronState { v: v0, ..NeuronState::quiescent(params) };
    for k in 0..settle_steps(params) {
        let (next, fired) = step(&state, params, u32::from(k == 0));
        if fired {
            return true;
        }
        state = next;
    }
    false
}

/// The lowest membrane potential from which one more input spike still
/// reaches threshold, found by bisection to 1e-4 mV.
///
/// At the default operating point this sits around -63.57 mV: a membrane
/// more than ~1.4 mV above rest is "pre-charged" enough that any single
/// spike fires it.
pub fn min_firing_potential(params: &NeuronParams) -> Result<f64, AnalysisError> {
    params.validate()?;
    if !params.v_thresh.is_finite() {
        return Err(AnalysisError::UnboundedThreshold);
    }
    let mut lo = params.v_rest;
    let mut hi = params.v_thresh - 1e-9;
    if !fires_from(hi, params) {
        return Err(AnalysisError::NeverFires);
    }
    if fires_from(lo, params) {
        // Even a resting membrane fires from one spike; rest is the infimum.
        return Ok(lo);
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if fires_from(mid, params) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Firing windows of a trace, one or two per input spike.
///
/// Each input spike opens an episode at its arrival step (timestamp plus
/// synaptic delay). Within the episode the membrane rises to a local
/// maximum — that rise is the spike-to-peak window. If the peak clears the
/// minimum firing potential, a second window runs from the peak until the
/// membrane first drops back below that potential. Episodes truncate at the
/// next input arrival or at an output spike, whichever comes first; a
/// truncated window ends exactly at the truncation step.
pub fn firing_windows(
    trace: &Trace,
    params: &NeuronParams,
    input_train: &[SpikeEvent],
) -> Result<Vec<FiringWindow>, AnalysisError> {
    params.validate()?;
    let len = trace.rows.len();
    let trace_ms = (len as f64 * trace.dt).round() as u64;
    for (idx, pair) in input_train.windows(2).enumerate() {
        if pair[1].t_ms < pair[0].t_ms {
            return Err(AnalysisError::Unsorted(idx + 1));
        }
    }

    let mut arrivals = Vec::with_capacity(input_train.len());
    for ev in input_train {
        let step_idx = (ev.t_ms as f64 / params.dt).round() as usize;
        if step_idx >= len {
            return Err(AnalysisError::TraceMismatch { t_ms: ev.t_ms, trace_ms });
        }
        arrivals.push(step_idx + params.syn_delay as usize);
    }
    arrivals.dedup();

    if arrivals.is_empty() {
        return Ok(Vec::new());
    }
    let m = min_firing_potential(params)?;
    let fires = trace.fire_steps();
    let v = |k: usize| trace.rows[k].v;
    let mut windows = Vec::new();

    for (j, &s) in arrivals.iter().enumerate() {
        if s >= len {
            continue; // arrival fell off the end of the trace
        }
        let next_arrival = arrivals[j + 1..].iter().copied().find(|&a| a > s).unwrap_or(len);
        let fire_at = fires.iter().copied().find(|&f| f >= s);
        // Steps at or past `lim` belong to the next episode (or are the
        // post-fire reset), so the peak search must stay strictly below it.
        let lim = next_arrival.min(fire_at.unwrap_or(len)).min(len);
        let truncation = if lim < len { lim } else { len - 1 };

        // Local maximum: strict rise into the step, no rise out of it.
        let mut peak = None;
        let mut p = s + 1;
        while p + 1 < lim {
            if v(p) > v(p - 1) && v(p + 1) <= v(p) {
                peak = Some(p);
                break;
            }
            p += 1;
        }

        match peak {
            None => {
                // Still rising (or already truncated) when the episode ends.
                windows.push(FiringWindow {
                    t_start_ms: trace.time_at(s),
                    t_end_ms: trace.time_at(truncation),
                    kind: WindowKind::SpikeToPeak,
                });
            }
            Some(p) => {
                windows.push(FiringWindow {
                    t_start_ms: trace.time_at(s),
                    t_end_ms: trace.time_at(p),
                    kind: WindowKind::SpikeToPeak,
                });
                if v(p) >= m {
                    let drop = (p + 1..lim).find(|&k| v(k) < m);
                    let end = drop.unwrap_or(truncation);
                    windows.push(FiringWindow {
                        t_start_ms: trace.time_at(p),
                        t_end_ms: trace.time_at(end),
                        kind: WindowKind::PeakToMinFire,
                    });
                }
            }
        }
    }
    Ok(windows)
}

/// True when a 30 s constant-rate train keeps the neuron firing through the
/// final 10 s (ignoring the charging transient at the start).
pub fn sustained_at_rate(params: &NeuronParams, rate_hz: f64) -> Result<bool, AnalysisError> {
    const HORIZON_MS: u64 = 30_000;
    const STEADY_FROM_MS: u64 = 20_000;
    let period = 1000.0 / rate_hz;
    let mut train = Vec::new();
    let mut k = 0u64;
    loop {
        let t = (k as f64 * period).round() as u64;
        if t >= HORIZON_MS {
            break;
        }
        train.push(SpikeEvent::injector(t));
        k += 1;
    }
    let out = run(params, &train, HORIZON_MS)?;
    Ok(out.output_train.iter().any(|s| s.t_ms >= STEADY_FROM_MS))
}

/// Smallest constant input rate (to 0.01 Hz) that keeps the neuron firing:
/// the corner frequency of the high-pass behaviour. Around 6.45 Hz at the
/// default operating point.
pub fn cutoff_rate(params: &NeuronParams) -> Result<f64, AnalysisError> {
    params.validate()?;
    let mut lo = 0.5f64;
    if sustained_at_rate(params, lo)? {
        return Err(AnalysisError::AlwaysSustained(lo));
    }
    // Grow the upper bracket; 1000 Hz is the densest encodable train.
    let mut hi = 20.0f64;
    while !sustained_at_rate(params, hi)? {
        hi *= 2.0;
        if hi > 1000.0 {
            return Err(AnalysisError::CutoffNotFound(1000.0));
        }
    }
    while hi - lo > 0.01 {
        let mid = 0.5 * (lo + hi);
        if sustained_at_rate(params, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The three-rate demonstration train: five seconds of input stepping
/// through 1 Hz, 2 Hz and 10 Hz segments. Only the last segment drives the
/// default neuron over threshold.
pub fn three_rate_demo_train() -> Vec<SpikeEvent> {
    let mut times: Vec<u64> = vec![0, 1000, 2000, 2500, 3000, 3500];
    times.extend((4000..5000).step_by(100));
    times.into_iter().map(SpikeEvent::injector).collect()
}

/// Horizon that covers [`three_rate_demo_train`], ms.
pub const THREE_RATE_DEMO_HORIZON_MS: u64 = 5000;

pub fn windows_to_csv<W: Write>(windows: &[FiringWindow], mut w: W) -> io::Result<()> {
    writeln!(w, "t_start_ms,t_end_ms,kind")?;
    for win in windows {
        writeln!(w, "{},{},{}", win.t_start_ms, win.t_end_ms, win.kind.as_str())?;
    }
    Ok(())
}

pub fn isi_to_csv<W: Write>(series: &IsiSeries, mut w: W) -> io::Result<()> {
    writeln!(w, "t_ms,isi_ms")?;
    for (t, isi) in &series.points {
        writeln!(w, "{t},{isi}")?;
    }
    Ok(())
}
