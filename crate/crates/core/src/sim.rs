//! Experiment harness: offline data collection, closed-loop simulation with
//! step schedules, and controller comparison.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controllers::{build_cbc, build_imc, build_unified, Controller};
use crate::error::{Error, Result};
use crate::lti::{realize, zoh_discretize, ContinuousTransferFunction, DiscreteStateSpace};
use crate::trajectory::Trajectory;

/// Piecewise-constant schedule: value jumps to `level` at each `time` and
/// holds; zero before the first step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepSchedule {
    pub steps: Vec<(f64, f64)>,
}

impl StepSchedule {
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        if steps.windows(2).any(|w| w[0].0 > w[1].0) {
            return Err(Error::Config("schedule times must be sorted".into()));
        }
        Ok(Self { steps })
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let mut v = 0.0;
        for &(time, level) in &self.steps {
            if t >= time {
                v = level;
            } else {
                break;
            }
        }
        v
    }
}

/// Which controllers an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerChoice {
    Cbc,
    Unified,
    Imc,
}

impl ControllerChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "cbc" => Ok(Self::Cbc),
            "unified" => Ok(Self::Unified),
            "imc" => Ok(Self::Imc),
            other => Err(Error::Config(format!(
                "unknown controller {other:?} (expected cbc, unified, or imc)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cbc => "cbc",
            Self::Unified => "unified",
            Self::Imc => "imc",
        }
    }
}

/// Everything one closed-loop experiment needs, reproducible from the seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub plant: ContinuousTransferFunction,
    pub ts: f64,
    pub order: usize,
    pub delay: usize,
    pub tp: usize,
    pub td: usize,
    pub tau: f64,
    pub duration: f64,
    pub reference: StepSchedule,
    pub disturbance: StepSchedule,
    pub seed: u64,
    pub rank_tol: f64,
    pub controllers: Vec<ControllerChoice>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tp < self.order {
            return Err(Error::Config(format!(
                "tp = {} must be at least n = {}",
                self.tp, self.order
            )));
        }
        if self.duration <= 0.0 {
            return Err(Error::Config("duration must be positive".into()));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(Error::Config("rank_tol must lie in (0, 1)".into()));
        }
        if self.controllers.is_empty() {
            return Err(Error::Config("no controllers selected".into()));
        }
        Ok(())
    }

    pub fn discrete_plant(&self) -> Result<DiscreteStateSpace> {
        zoh_discretize(&realize(&self.plant)?, self.ts)
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.ts).round() as usize
    }
}

/// Seeded uniform draw on [-1, 1] from the raw 64-bit stream; fixed mapping
/// so collected data is reproducible independent of library distribution
/// changes.
fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    let bits = rng.next_u64() >> 11;
    bits as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Excite the plant from rest with a seeded uniform input for T_d + L steps;
/// the returned record keeps T_d input samples and all T_d + L output
/// samples, ready for both forward and inverse use.
pub fn collect_offline(plant: &DiscreteStateSpace, td: usize, delay: usize, seed: u64) -> Trajectory {
    assert!(td >= 1, "need at least one offline sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u_full: Vec<f64> = (0..td + delay).map(|_| uniform_pm1(&mut rng)).collect();
    let y = plant.simulate_from_rest(&u_full);
    Trajectory::new(u_full[..td].to_vec(), y, plant.ts)
        .expect("collection lengths are consistent by construction")
}

/// One record per sample of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub r: f64,
    pub d: f64,
    pub u: f64,
    pub y: f64,
    pub yhat: Option<f64>,
    pub e: Option<f64>,
}

/// Uniform-grid log of a closed-loop experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub ts: f64,
    pub controller: &'static str,
    pub records: Vec<SimRecord>,
}

impl SimLog {
    /// CSV with header t,r,d,u,y and, when the controller exposes a model
    /// path, yhat,e.
    pub fn to_csv(&self) -> String {
        let with_model = self.records.first().map(|r| r.yhat.is_some()).unwrap_or(false);
        let mut out = String::from(if with_model { "t,r,d,u,y,yhat,e\n" } else { "t,r,d,u,y\n" });
        for rec in &self.records {
            let _ = write!(out, "{},{},{},{},{}", rec.t, rec.r, rec.d, rec.u, rec.y);
            if with_model {
                let _ = write!(out, ",{},{}", rec.yhat.unwrap_or(0.0), rec.e.unwrap_or(0.0));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Build the selected controller from a config. The unified variant consumes
/// the equal-length prefix of T_d - L samples, which keeps its offline-data
/// budget exactly L samples leaner than the component-by-component variant
/// built from the same record.
pub fn build_controller(cfg: &ExperimentConfig, choice: ControllerChoice) -> Result<Box<dyn Controller>> {
    let plant = cfg.discrete_plant()?;
    let offline = collect_offline(&plant, cfg.td, cfg.delay, cfg.seed);
    match choice {
        ControllerChoice::Cbc => Ok(Box::new(build_cbc(
            &offline,
            cfg.tp,
            cfg.order,
            cfg.delay,
            cfg.tau,
            cfg.rank_tol,
        )?)),
        ControllerChoice::Unified => {
            let len = cfg.td.checked_sub(cfg.delay).ok_or_else(|| {
                Error::Config(format!("td = {} smaller than l_delay = {}", cfg.td, cfg.delay))
            })?;
            Ok(Box::new(build_unified(
                &offline.prefix(len)?,
                cfg.tp,
                cfg.order,
                cfg.delay,
                cfg.tau,
                cfg.rank_tol,
            )?))
        }
        ControllerChoice::Imc => Ok(Box::new(build_imc(&plant, cfg.tau, cfg.delay)?)),
    }
}

/// Run one controller in closed loop over the configured schedules. The
/// plant starts at rest; within each sample the measurement is produced
/// first, then the controller acts, and the plant state advances on
/// u(t) + d(t).
pub fn run_closed_loop(cfg: &ExperimentConfig, choice: ControllerChoice) -> Result<SimLog> {
    cfg.validate()?;
    let plant = cfg.discrete_plant()?;
    let mut controller = build_controller(cfg, choice)?;
    run_closed_loop_with(cfg, &plant, controller.as_mut())
}

/// Closed-loop run against an explicit plant and a pre-built controller.
/// This is the mismatch entry point: the controller may have been built from
/// another system's data or model.
pub fn run_closed_loop_with(
    cfg: &ExperimentConfig,
    plant: &DiscreteStateSpace,
    controller: &mut dyn Controller,
) -> Result<SimLog> {
    cfg.validate()?;
    if !plant.is_stable() {
        return Err(Error::UnstablePlant(plant.spectral_radius()));
    }
    if plant.d != 0.0 {
        return Err(Error::Config(
            "closed-loop plant must be strictly proper (no direct feedthrough)".into(),
        ));
    }
    let mut x = plant.zero_state();
    let mut records = Vec::with_capacity(cfg.samples());
    for k in 0..cfg.samples() {
        let t = k as f64 * cfg.ts;
        let r = cfg.reference.value_at(t);
        let d = cfg.disturbance.value_at(t);
        let y = plant.output(&x, 0.0);
        let u = controller.step(r, y);
        if !u.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite {
                step: k,
                signal: if u.is_finite() { "y" } else { "u" },
            });
        }
        let (yhat, e) = match controller.diagnostics() {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        records.push(SimRecord { t, r, d, u, y, yhat, e });
        x = plant.next_state(&x, u + d);
    }
    Ok(SimLog {
        ts: cfg.ts,
        controller: controller.name(),
        records,
    })
}

/// Pairwise deviation statistics between two logs.
#[derive(Debug, Clone)]
pub struct PairDeviation {
    pub first: &'static str,
    pub second: &'static str,
    pub max_du: f64,
    pub rms_du: f64,
    pub max_dy: f64,
    pub rms_dy: f64,
}

/// Per-controller summary of one comparison run.
#[derive(Debug, Clone)]
pub struct ControllerSummary {
    pub name: &'static str,
    pub steady_state_error: f64,
    pub mean_step_time_us: f64,
    pub online_memory_pairs: usize,
}

/// Result of running several controllers on identical schedules and seed.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub summaries: Vec<ControllerSummary>,
    pub pairs: Vec<PairDeviation>,
    pub logs: Vec<SimLog>,
}

impl ComparisonReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "controller  steady-state |y-r|   mean step (us)   online window (pairs)");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<10}  {:>18.3e}   {:>14.2}   {:>20}",
                s.name, s.steady_state_error, s.mean_step_time_us, s.online_memory_pairs
            );
        }
        if !self.pairs.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "pair                 max|du|      rms du      max|dy|      rms dy");
            for p in &self.pairs {
                let _ = writeln!(
                    out,
                    "{:<8} vs {:<8} {:>10.3e} {:>11.3e} {:>11.3e} {:>11.3e}",
                    p.first, p.second, p.max_du, p.rms_du, p.max_dy, p.rms_dy
                );
            }
        }
        out
    }
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (v.map(|x| x * x).sum::<f64>() / n as f64).sqrt()
}

/// Run every configured controller on identical schedules and seed and
/// report pairwise deviations, steady-state errors, timing, and the online
/// memory footprint.
pub fn compare_controllers(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    if cfg.controllers.len() < 2 {
        return Err(Error::Config("compare needs at least two controllers".into()));
    }
    let mut logs = Vec::new();
    let mut summaries = Vec::new();
    for &choice in &cfg.controllers {
        let memory = build_controller(cfg, choice)?.online_memory_pairs();
        let started = Instant::now();
        let log = run_closed_loop(cfg, choice)?;
        let elapsed = started.elapsed();
        let last = log.records.last().expect("duration > 0 yields samples");
        summaries.push(ControllerSummary {
            name: choice.name(),
            steady_state_error: (last.y - last.r).abs(),
            mean_step_time_us: elapsed.as_secs_f64() * 1e6 / log.records.len() as f64,
            online_memory_pairs: memory,
        });
        logs.push(log);
    }
    let mut pairs = Vec::new();
    for i in 0..logs.len() {
        for j in i + 1..logs.len() {
            let (a, b) = (&logs[i], &logs[j]);
            let n = a.records.len();
            let du = a.records.iter().zip(&b.records).map(|(x, y)| x.u - y.u);
            let dy = a.records.iter().zip(&b.records).map(|(x, y)| x.y - y.y);
            pairs.push(PairDeviation {
                first: a.controller,
                second: b.controller,
                max_du: du.clone().fold(0.0f64, |m, v| m.max(v.abs())),
                rms_du: rms(du, n),
                max_dy: dy.clone().fold(0.0f64, |m, v| m.max(v.abs())),
                rms_dy: rms(dy, n),
            });
        }
    }
    Ok(ComparisonReport {
        summaries,
        pairs,
        logs,
    })
}
