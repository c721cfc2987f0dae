//! Command-line front end: replay the encoder and filter over CSV files,
//! run scripted or closed-loop experiments, analyze traces, and drive the
//! three-endpoint pipeline over UDP or the simulated clock.

use std::error::Error;
use std::fmt;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use echospike::analysis::{firing_windows, isi_series, isi_to_csv, windows_to_csv};
use echospike::encoder::{replay, TofMeasurement};
use echospike::filter::{FilterConfig, MeasurementFilter};
use echospike::lif::{NeuronParams, SpikeEvent};
use echospike::net::{run_loopback, run_udp, PipelineConfig, UdpPorts};
use echospike::scenario::{
    demo_run, emit_report, run_scenario, threshold_search, ScenarioOptions, ScenarioScript,
};
use echospike::sensor::{NoiseCfg, DEFAULT_NOISE_CM};
use echospike::trace::Trace;
use echospike::world::{emit_world, run_world, WorldModel};

#[derive(Parser)]
#[command(name = "echospike", version, about = "Spiking obstacle-detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a `t_ms,tof_us` CSV through the rate encoder into a spike CSV.
    Encode {
        /// Measurements as CSV with header `t_ms,tof_us`, sorted by time.
        #[arg(long)]
        tof_csv: PathBuf,
        /// Clock horizon; defaults to 2 s past the last measurement.
        #[arg(long)]
        horizon_ms: Option<u64>,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate raw readings (CSV header `tof_us`) with the redundancy
    /// filter; emits the validated-measurement CSV.
    Filter {
        #[arg(long)]
        raw_csv: PathBuf,
        /// Matching readings required per validated measurement.
        #[arg(long, default_value_t = 4)]
        max_hits: u32,
        /// Agreement tolerance between readings, µs.
        #[arg(long, default_value_t = 120)]
        max_error: u32,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute firing windows and the ISI series from a membrane trace and
    /// its input spike train; writes windows.csv and isi.csv.
    Analyze {
        /// Membrane trace CSV (`t_ms,v_mV,i_e_nA,i_i_nA,fired`).
        #[arg(long)]
        trace: PathBuf,
        /// Spike CSV: header `t_ms`, or `t_ms,train` of which only the
        /// `input` rows are read.
        #[arg(long)]
        spikes: PathBuf,
        /// Neuron parameters as JSON (defaults apply to omitted fields).
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the robot/bridge/engine loop over a script and print the run log
    /// as CSV (`t_ms,endpoint,event,detail`).
    Pipeline {
        /// Scenario script, JSON.
        #[arg(long)]
        script: PathBuf,
        /// UDP ports as robot,bridge,engine; 0 picks an ephemeral port.
        /// Ignored under --sim-clock.
        #[arg(long, default_value = "0,0,0", value_parser = parse_ports)]
        ports: UdpPorts,
        /// Use the deterministic in-process clock instead of real sockets.
        #[arg(long)]
        sim_clock: bool,
        /// Neuron parameters as JSON.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Log file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scripted experiments and their CSV reports.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Drive the offline chain over a script; writes run.csv and spikes.csv.
    Run {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Raw sensor cadence, ms.
        #[arg(long, default_value_t = 20)]
        sensor_period_ms: u64,
        /// Turn on measurement noise with this RNG seed.
        #[arg(long)]
        noise_seed: Option<u64>,
        /// Noise amplitude, cm (only with --noise-seed).
        #[arg(long, default_value_t = DEFAULT_NOISE_CM)]
        noise_amplitude_cm: f64,
    },
    /// Bisect the farthest constant distance that still keeps the system
    /// firing; prints the boundary in cm.
    Threshold {
        #[arg(long)]
        params: Option<PathBuf>,
        /// Bracket low end, cm (must be detectable).
        #[arg(long, default_value_t = 10.0)]
        lo: f64,
        /// Bracket high end, cm (must be undetectable).
        #[arg(long, default_value_t = 100.0)]
        hi: f64,
        /// Also write threshold.csv under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Close the loop in a 2-D box world; writes run.csv, spikes.csv and
    /// trajectory.csv.
    World {
        /// World JSON; defaults to the 3 m × 3 m boxed arena.
        #[arg(long)]
        world: Option<PathBuf>,
        #[arg(long, default_value_t = 60_000)]
        duration_ms: u64,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay the three-rate demonstration train; writes trace.csv,
    /// windows.csv, isi.csv, run.csv and spikes.csv.
    Fig3 {
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_ports(s: &str) -> Result<UdpPorts, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated ports: robot,bridge,engine".into());
    }
    let mut ports = [0u16; 3];
    for (slot, part) in ports.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| format!("bad port {part:?}"))?;
    }
    Ok(UdpPorts { robot: ports[0], bridge: ports[1], engine: ports[2] })
}

/// One-line CSV shape error with the offending file and line.
#[derive(Debug)]
struct CsvError {
    path: PathBuf,
    line: usize,
    what: String,
}

impl fmt::Display for CsvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.path.display(), self.line, self.what)
    }
}

impl Error for CsvError {}

fn csv_err(path: &Path, line: usize, what: impl Into<String>) -> Box<dyn Error> {
    Box::new(CsvError { path: path.to_owned(), line, what: what.into() })
}

fn load_params(path: Option<&Path>) -> Result<NeuronParams, Box<dyn Error>> {
    let params = match path {
        None => NeuronParams::default(),
        Some(p) => serde_json::from_reader(BufReader::new(fs::File::open(p)?))?,
    };
    params.validate()?;
    Ok(params)
}

fn load_script(path: &Path) -> Result<ScenarioScript, Box<dyn Error>> {
    let script: ScenarioScript = serde_json::from_reader(BufReader::new(fs::File::open(path)?))?;
    script.validate()?;
    Ok(script)
}

fn read_tof_csv(path: &Path) -> Result<Vec<TofMeasurement>, Box<dyn Error>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "t_ms,tof_us")) => {}
        _ => return Err(csv_err(path, 1, "expected header `t_ms,tof_us`")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let (t, us) = line
            .split_once(',')
            .ok_or_else(|| csv_err(path, idx + 1, "expected two fields"))?;
        out.push(TofMeasurement {
            t_recv_ms: t.parse().map_err(|_| csv_err(path, idx + 1, "bad t_ms"))?,
            tof_us: us.parse().map_err(|_| csv_err(path, idx + 1, "bad tof_us"))?,
        });
    }
    Ok(out)
}

fn read_raw_csv(path: &Path) -> Result<Vec<u32>, Box<dyn Error>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "tof_us")) => {}
        _ => return Err(csv_err(path, 1, "expected header `tof_us`")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        out.push(line.trim().parse().map_err(|_| csv_err(path, idx + 1, "bad tof_us"))?);
    }
    Ok(out)
}

/// Reads either a bare `t_ms` column or a `t_ms,train` spike file, keeping
/// only the injector (`input`) rows of the latter.
fn read_spikes_csv(path: &Path) -> Result<Vec<SpikeEvent>, Box<dyn Error>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let tagged = match lines.next() {
        Some((_, "t_ms")) => false,
        Some((_, "t_ms,train")) => true,
        _ => return Err(csv_err(path, 1, "expected header `t_ms` or `t_ms,train`")),
    };
    let mut out = Vec::new();
    for (idx, line) in lines {
        let t_ms = if tagged {
            let (t, train) = line
                .split_once(',')
                .ok_or_else(|| csv_err(path, idx + 1, "expected two fields"))?;
            match train {
                "input" => t.parse().map_err(|_| csv_err(path, idx + 1, "bad t_ms"))?,
                "output" => continue,
                other => return Err(csv_err(path, idx + 1, format!("bad train tag {other:?}"))),
            }
        } else {
            line.trim().parse().map_err(|_| csv_err(path, idx + 1, "bad t_ms"))?
        };
        out.push(SpikeEvent::injector(t_ms));
    }
    Ok(out)
}

fn out_writer(out: Option<&Path>) -> Result<Box<dyn Write>, Box<dyn Error>> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(command: Command) -> Result<(), Box<dyn Error>> {
    match command {
        Command::Encode { tof_csv, horizon_ms, out } => {
            let measurements = read_tof_csv(&tof_csv)?;
            let horizon = horizon_ms
                .unwrap_or_else(|| measurements.last().map_or(2000, |m| m.t_recv_ms + 2000));
            let spikes = replay(&measurements, horizon)?;
            let mut w = out_writer(out.as_deref())?;
            writeln!(w, "t_ms")?;
            for s in &spikes {
                writeln!(w, "{}", s.t_ms)?;
            }
            eprintln!("{} measurements -> {} spikes over {horizon} ms", measurements.len(), spikes.len());
        }
        Command::Filter { raw_csv, max_hits, max_error, out } => {
            let raw = read_raw_csv(&raw_csv)?;
            let cfg = FilterConfig { max_hits, max_error_us: max_error };
            let valid = MeasurementFilter::run_stream(cfg, &raw)?;
            let mut w = out_writer(out.as_deref())?;
            writeln!(w, "tof_us")?;
            for v in &valid {
                writeln!(w, "{v}")?;
            }
            eprintln!("{} raw readings -> {} validated", raw.len(), valid.len());
        }
        Command::Analyze { trace, spikes, params, out } => {
            let trace = Trace::from_csv(BufReader::new(fs::File::open(&trace)?))?;
            let train = read_spikes_csv(&spikes)?;
            let params = load_params(params.as_deref())?;
            let windows = firing_windows(&trace, &params, &train)?;
            let series = isi_series(&train);
            fs::create_dir_all(&out)?;
            windows_to_csv(&windows, fs::File::create(out.join("windows.csv"))?)?;
            isi_to_csv(&series, fs::File::create(out.join("isi.csv"))?)?;
            eprintln!("{} windows, {} ISI points -> {}", windows.len(), series.points.len(), out.display());
        }
        Command::Pipeline { script, ports, sim_clock, params, out } => {
            let script = load_script(&script)?;
            let cfg = PipelineConfig {
                params: load_params(params.as_deref())?,
                ..PipelineConfig::default()
            };
            let run = if sim_clock {
                run_loopback(&script, &cfg)?
            } else {
                run_udp(&script, &cfg, ports, true)?
            };
            let mut w = out_writer(out.as_deref())?;
            run.log_csv(&mut w)?;
            eprintln!(
                "{} ticks, {} spikes at robot, {} malformed frames",
                run.mode_by_tick.len(),
                run.spike_arrivals.len(),
                run.malformed
            );
        }
        Command::Scenario(cmd) => run_scenario_cmd(cmd)?,
    }
    Ok(())
}

fn run_scenario_cmd(cmd: ScenarioCmd) -> Result<(), Box<dyn Error>> {
    match cmd {
        ScenarioCmd::Run { script, params, out, sensor_period_ms, noise_seed, noise_amplitude_cm } => {
            let script = load_script(&script)?;
            let params = load_params(params.as_deref())?;
            let opts = ScenarioOptions {
                sensor_period_ms,
                noise: noise_seed.map(|seed| NoiseCfg { seed, amplitude_cm: noise_amplitude_cm }),
            };
            let report = run_scenario(&script, &params, FilterConfig::default(), &opts)?;
            emit_report(&report, &out)?;
            eprintln!(
                "{} ticks, {} input / {} output spikes -> {}",
                report.rows.len(),
                report.input_spikes.len(),
                report.output_spikes.len(),
                out.display()
            );
        }
        ScenarioCmd::Threshold { params, lo, hi, out } => {
            let params = load_params(params.as_deref())?;
            let boundary =
                threshold_search(&params, FilterConfig::default(), lo, hi, &ScenarioOptions::default())?;
            println!("{boundary:.1}");
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("threshold.csv"), format!("threshold_cm\n{boundary:.1}\n"))?;
            }
        }
        ScenarioCmd::World { world, duration_ms, params, out } => {
            let world = match world {
                Some(p) => {
                    let w: WorldModel = serde_json::from_reader(BufReader::new(fs::File::open(p)?))?;
                    w.validate()?;
                    w
                }
                None => WorldModel::boxed_arena(),
            };
            let params = load_params(params.as_deref())?;
            let run = run_world(
                &world,
                duration_ms,
                &params,
                FilterConfig::default(),
                &ScenarioOptions::default(),
            )?;
            emit_world(&run, &out)?;
            eprintln!(
                "{} ticks, {} output spikes, min ray {:.1} cm -> {}",
                run.trajectory.len(),
                run.report.output_spikes.len(),
                run.min_ray_cm,
                out.display()
            );
        }
        ScenarioCmd::Fig3 { params, out } => {
            let params = load_params(params.as_deref())?;
            let demo = demo_run(&params)?;
            fs::create_dir_all(&out)?;
            emit_report(&demo.report, &out)?;
            demo.trace.to_csv(fs::File::create(out.join("trace.csv"))?)?;
            windows_to_csv(&demo.windows, fs::File::create(out.join("windows.csv"))?)?;
            let train: Vec<SpikeEvent> =
                demo.report.input_spikes.iter().map(|&t| SpikeEvent::injector(t)).collect();
            isi_to_csv(&isi_series(&train), fs::File::create(out.join("isi.csv"))?)?;
            eprintln!(
                "{} input / {} output spikes, {} windows -> {}",
                demo.report.input_spikes.len(),
                demo.report.output_spikes.len(),
                demo.windows.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
