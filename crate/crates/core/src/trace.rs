//! Per-step membrane traces and their CSV form.

use std::io::{self, BufRead, Write};

use thiserror::Error;

/// One integration step of recorded neuron state (values after the step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub v: f64,
    pub i_syn_e: f64,
    pub i_syn_i: f64,
    pub fired: bool,
}

/// A complete membrane trace: one row per step, step k covering time
/// `k * dt` ms.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Timestep of the run that produced this trace, ms.
    pub dt: f64,
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str = "t_ms,v_mV,i_e_nA,i_i_nA,fired";

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("expected header `{TRACE_HEADER}`, got `{0}`")]
    BadHeader(String),
    #[error("line {0}: expected 5 comma-separated fields")]
    BadShape(usize),
    #[error("line {0}: unparseable field `{1}`")]
    BadField(usize, String),
}

impl Trace {
    pub fn with_capacity(dt: f64, n: usize) -> Self {
        Trace { dt, rows: Vec::with_capacity(n) }
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    /// Time covered by row `idx`, in ms.
    pub fn time_at(&self, idx: usize) -> f64 {
        idx as f64 * self.dt
    }

    /// Step indices at which the neuron fired.
    pub fn fire_steps(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.fired.then_some(k))
            .collect()
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for (k, row) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                self.time_at(k),
                row.v,
                row.i_syn_e,
                row.i_syn_i,
                u8::from(row.fired)
            )?;
        }
        Ok(())
    }

    /// Parse a trace written by [`Trace::to_csv`]. The timestep is inferred
    /// from the first two timestamps (1 ms for traces shorter than two rows).
    pub fn from_csv<R: BufRead>(r: R) -> Result<Self, TraceCsvError> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != TRACE_HEADER {
            return Err(TraceCsvError::BadHeader(header));
        }
        let mut times = Vec::new();
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(TraceCsvError::BadShape(lineno + 2));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| TraceCsvError::BadField(lineno + 2, s.to_string()))
            };
            times.push(num(fields[0])?);
            rows.push(TraceRow {
                v: num(fields[1])?,
                i_syn_e: num(fields[2])?,
                i_syn_i: num(fields[3])?,
                fired: num(fields[4])? != 0.0,
            });
        }
        let dt = if times.len() >= 2 { times[1] - times[0] } else { 1.0 };
        Ok(Trace { dt, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trace {
        Trace {
            dt: 1.0,
            rows: vec![
                TraceRow { v: -65.0, i_syn_e: 0.0, i_syn_i: 0.0, fired: false },
                TraceRow { v: -64.25781, i_syn_e: 0.7420764, i_syn_i: 0.0, fired: false },
                TraceRow { v: -59.5, i_syn_e: 0.60756, i_syn_i: 0.1, fired: true },
            ],
        }
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let t = sample();
        let mut buf = Vec::new();
        t.to_csv(&mut buf).unwrap();
        let parsed = Trace::from_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed.dt, t.dt);
        assert_eq!(parsed.rows.len(), t.rows.len());
        for (a, b) in parsed.rows.iter().zip(&t.rows) {
            assert_eq!(a.v.to_bits(), b.v.to_bits());
            assert_eq!(a.i_syn_e.to_bits(), b.i_syn_e.to_bits());
            assert_eq!(a.i_syn_i.to_bits(), b.i_syn_i.to_bits());
            assert_eq!(a.fired, b.fired);
        }
    }

    #[test]
    fn header_and_shape_are_enforced() {
        let bad = "time,volts\n0,1\n";
        assert!(matches!(
            Trace::from_csv(bad.as_bytes()),
            Err(TraceCsvError::BadHeader(_))
        ));
        let short = format!("{TRACE_HEADER}\n0,-65,0\n");
        assert!(matches!(
            Trace::from_csv(short.as_bytes()),
            Err(TraceCsvError::BadShape(2))
        ));
        let garbled = format!("{TRACE_HEADER}\n0,-65,x,0,0\n");
        assert!(matches!(
            Trace::from_csv(garbled.as_bytes()),
            Err(TraceCsvError::BadField(2, _))
        ));
    }

    #[test]
    fn fire_steps_picks_out_fired_rows() {
        assert_eq!(sample().fire_steps(), vec![2]);
    }
}
