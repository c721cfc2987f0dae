//! Discrete-time leaky integrate-and-fire neuron with current-based
//! decaying-exponential synapses.
//!
//! The update order within one step is fixed and load-bearing:
//!
//! 1. insert this step's input spikes into the excitatory current
//! 2. integrate the membrane (or sit out the refractory period)
//! 3. decay both synaptic currents
//! 4. threshold test, reset on fire
//!
//! Units: potentials in mV, currents in nA, capacitance in nF, times in ms.
//! With those choices the membrane resistance `tau_m / c_m` comes out in
//! megaohms and `nA * MOhm = mV`, so no hidden conversion factors appear.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::trace::{Trace, TraceRow};

/// Where a spike came from. The pipeline only distinguishes spikes injected
/// into the engine from spikes the engine itself produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    /// Encoder-driven input spike.
    Injector,
    /// Spike fired by the engine neuron.
    Output,
}

/// A single spike at an integer millisecond timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub source: Source,
    pub t_ms: u64,
}

impl SpikeEvent {
    pub fn injector(t_ms: u64) -> Self {
        SpikeEvent { source: Source::Injector, t_ms }
    }

    pub fn output(t_ms: u64) -> Self {
        SpikeEvent { source: Source::Output, t_ms }
    }
}

/// Neuron and integration parameters.
///
/// `Default` gives the operating point used throughout: a 100 ms membrane,
/// 5 ms synapses, no refractory period, rest and reset at -65 mV, threshold
/// at -59.5 mV, 1 ms timestep, unit input weight, one step of synaptic delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NeuronParams {
    /// Membrane capacitance, nF.
    pub c_m: f64,
    /// Membrane time constant, ms.
    pub tau_m: f64,
    /// Refractory period, ms.
    pub tau_refrac: f64,
    /// Excitatory synapse time constant, ms.
    pub tau_syn_e: f64,
    /// Inhibitory synapse time constant, ms.
    pub tau_syn_i: f64,
    /// Resting potential, mV.
    pub v_rest: f64,
    /// Post-spike reset potential, mV.
    pub v_reset: f64,
    /// Firing threshold, mV.
    pub v_thresh: f64,
    /// Integration timestep, ms.
    pub dt: f64,
    /// Weight of one input spike, nA.
    pub w_in: f64,
    /// Synaptic delay in whole timesteps.
    pub syn_delay: u32,
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            c_m: 1.0,
            tau_m: 100.0,
            tau_refrac: 0.0,
            tau_syn_e: 5.0,
            tau_syn_i: 5.0,
            v_rest: -65.0,
            v_reset: -65.0,
            v_thresh: -59.5,
            dt: 1.0,
            w_in: 1.0,
            syn_delay: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("tau_refrac must be nonnegative and finite")]
    NegativeRefractory,
    #[error("syn_delay must be at least one timestep")]
    ZeroDelay,
    #[error("v_reset must not exceed v_thresh")]
    ResetAboveThreshold,
    #[error("v_rest must lie below v_thresh")]
    RestAtOrAboveThreshold,
    #[error("{0} must be finite")]
    NotFinite(&'static str),
}

impl NeuronParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positives = [
            (self.c_m, "c_m"),
            (self.tau_m, "tau_m"),
            (self.tau_syn_e, "tau_syn_e"),
            (self.tau_syn_i, "tau_syn_i"),
            (self.dt, "dt"),
        ];
        for (value, name) in positives {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive(name));
            }
        }
        if !(self.tau_refrac.is_finite() && self.tau_refrac >= 0.0) {
            return Err(ParamError::NegativeRefractory);
        }
        for (value, name) in [
            (self.v_rest, "v_rest"),
            (self.v_reset, "v_reset"),
            (self.w_in, "w_in"),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NotFinite(name));
            }
        }
        // v_thresh may be +inf (useful for sub-threshold measurements), but
        // not NaN or -inf.
        if self.v_thresh.is_nan() || self.v_thresh == f64::NEG_INFINITY {
            return Err(ParamError::NotFinite("v_thresh"));
        }
        if self.syn_delay == 0 {
            return Err(ParamError::ZeroDelay);
        }
        if self.v_reset > self.v_thresh {
            return Err(ParamError::ResetAboveThreshold);
        }
        if self.v_rest >= self.v_thresh {
            return Err(ParamError::RestAtOrAboveThreshold);
        }
        Ok(())
    }

    /// Charge injected into the excitatory current by one input spike, nA.
    ///
    /// One spike deposits `w_in * (tau_syn_e / dt) * (1 - exp(-dt / tau_syn_e))`,
    /// which normalises the discrete decaying-exponential kernel so its
    /// time-integral matches the continuous one. At the default operating
    /// point this is about 0.9063 nA.
    pub fn charge_increment(&self) -> f64 {
        self.w_in * (self.tau_syn_e / self.dt) * (1.0 - (-self.dt / self.tau_syn_e).exp())
    }

    /// Membrane resistance `tau_m / c_m`, in megaohms.
    pub fn membrane_resistance(&self) -> f64 {
        self.tau_m / self.c_m
    }

    /// Refractory period expressed in whole timesteps.
    pub fn refrac_steps(&self) -> u32 {
        (self.tau_refrac / self.dt).round() as u32
    }
}

/// Instantaneous neuron state between steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronState {
    /// Membrane potential, mV.
    pub v: f64,
    /// Excitatory synaptic current, nA.
    pub i_syn_e: f64,
    /// Inhibitory synaptic current, nA.
    pub i_syn_i: f64,
    /// Remaining refractory steps; membrane is clamped while nonzero.
    pub refrac_remaining: u32,
}

impl NeuronState {
    /// State of a neuron that has been at rest forever: membrane at
    /// `v_rest`, both synaptic currents empty.
    pub fn quiescent(params: &NeuronParams) -> Self {
        NeuronState {
            v: params.v_rest,
            i_syn_e: 0.0,
            i_syn_i: 0.0,
            refrac_remaining: 0,
        }
    }
}

/// Advance the neuron by one timestep with `spikes_in` input spikes arriving
/// on this step. Returns the next state and whether the neuron fired.
pub fn step(state: &NeuronState, params: &NeuronParams, spikes_in: u32) -> (NeuronState, bool) {
    let mut s = *state;

    // 1. Deposit arriving spikes into the excitatory current. Same-step
    //    arrivals accumulate additively.
    if spikes_in > 0 {
        s.i_syn_e += f64::from(spikes_in) * params.charge_increment();
    }

    // 2. Integrate the membrane, unless refractory: then burn one step with
    //    the membrane clamped to the reset potential.
    if s.refrac_remaining > 0 {
        s.refrac_remaining -= 1;
        s.v = params.v_reset;
    } else {
        let i_total = s.i_syn_e - s.i_syn_i;
        let v_driven = params.v_rest + i_total * params.membrane_resistance();
        s.v = v_driven + (s.v - v_driven) * (-params.dt / params.tau_m).exp();
    }

    // 3. Both synaptic currents decay exponentially.
    s.i_syn_e *= (-params.dt / params.tau_syn_e).exp();
    s.i_syn_i *= (-params.dt / params.tau_syn_i).exp();

    // 4. Threshold test.
    let fired = s.v >= params.v_thresh;
    if fired {
        s.v = params.v_reset;
        s.refrac_remaining = params.refrac_steps();
    }

    (s, fired)
}

#[derive(Debug, Error, PartialEq)]
pub enum RunError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("input train is not sorted by time at index {0}")]
    Unsorted(usize),
    #[error("input spike at {t_ms} ms lies at or beyond the {horizon_ms} ms horizon")]
    BeyondHorizon { t_ms: u64, horizon_ms: u64 },
    #[error("horizon must cover at least one timestep")]
    EmptyHorizon,
}

/// Result of a batch run: every spike the neuron fired plus the full
/// per-step trace.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub output_train: Vec<SpikeEvent>,
    pub trace: Trace,
}

/// Simulate a quiescent neuron for `horizon_ms`, feeding it `input_train`.
///
/// Input events must be sorted by time (ties across sources are allowed and
/// accumulate) and lie strictly inside the horizon. Each event is inserted
/// `syn_delay` steps after its timestamp; insertions that would land past
/// the horizon silently fall off the end. The trace holds exactly
/// `horizon_ms / dt` rows.
pub fn run(
    params: &NeuronParams,
    input_train: &[SpikeEvent],
    horizon_ms: u64,
) -> Result<RunOutput, RunError> {
    params.validate()?;
    let steps = (horizon_ms as f64 / params.dt).round() as usize;
    if steps == 0 {
        return Err(RunError::EmptyHorizon);
    }
    for (idx, pair) in input_train.windows(2).enumerate() {
        if pair[1].t_ms < pair[0].t_ms {
            return Err(RunError::Unsorted(idx + 1));
        }
    }

    // Bucket arrivals by insertion step.
    let mut arrivals = vec![0u32; steps];
    for ev in input_train {
        if ev.t_ms >= horizon_ms {
            return Err(RunError::BeyondHorizon { t_ms: ev.t_ms, horizon_ms });
        }
        let insert = (ev.t_ms as f64 / params.dt).round() as usize + params.syn_delay as usize;
        if insert < steps {
            arrivals[insert] += 1;
        }
    }

    let mut state = NeuronState::quiescent(params);
    let mut trace = Trace::with_capacity(params.dt, steps);
    let mut output_train = Vec::new();
    for (idx, &n_in) in arrivals.iter().enumerate() {
        let (next, fired) = step(&state, params, n_in);
        state = next;
        if fired {
            output_train.push(SpikeEvent::output((idx as f64 * params.dt).round() as u64));
        }
        trace.push(TraceRow {
            v: state.v,
            i_syn_e: state.i_syn_e,
            i_syn_i: state.i_syn_i,
            fired,
        });
    }

    Ok(RunOutput { output_train, trace })
}

/// Incremental engine wrapper around [`step`] for tick-at-a-time callers
/// (the pipeline endpoints and the scenario loop).
///
/// `push_spike` schedules an input spike the full synaptic delay ahead of
/// the current step; `insert_delayed` lets transport layers that already
/// account for part of the delay shorten it.
#[derive(Debug, Clone)]
pub struct LifEngine {
    params: NeuronParams,
    state: NeuronState,
    /// pending[k] = spikes to insert k ticks from now (index 0 = next tick()).
    pending: std::collections::VecDeque<u32>,
    step_idx: u64,
}

impl LifEngine {
    pub fn new(params: NeuronParams) -> Result<Self, ParamError> {
        params.validate()?;
        let state = NeuronState::quiescent(&params);
        Ok(LifEngine { params, state, pending: Default::default(), step_idx: 0 })
    }

    pub fn params(&self) -> &NeuronParams {
        &self.params
    }

    pub fn state(&self) -> &NeuronState {
        &self.state
    }

    /// Steps completed so far; with dt = 1 ms this is the current time in ms.
    pub fn steps_done(&self) -> u64 {
        self.step_idx
    }

    /// Schedule one input spike, to be inserted `syn_delay` ticks from now.
    pub fn push_spike(&mut self) {
        self.schedule_in(self.params.syn_delay);
    }

    /// Schedule one input spike `delay_steps` ticks from now. Zero means the
    /// very next `tick()` call. Used when a transport hop has already
    /// consumed part of the synaptic delay.
    pub fn schedule_in(&mut self, delay_steps: u32) {
        let idx = delay_steps as usize;
        if self.pending.len() <= idx {
            self.pending.resize(idx + 1, 0);
        }
        self.pending[idx] += 1;
    }

    /// Advance one timestep; returns whether the neuron fired on it.
    pub fn tick(&mut self) -> bool {
        let n_in = self.pending.pop_front().unwrap_or(0);
        let (next, fired) = step(&self.state, &self.params, n_in);
        self.state = next;
        self.step_idx += 1;
        fired
    }
}
