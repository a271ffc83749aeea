//! Flat `key = value` experiment configuration files.
//!
//! Keys: plant.num, plant.den, ts, n, l_delay, tp, td, tau, duration,
//! ref.steps, dist.steps, seed, rank_tol, controllers. Step schedules are
//! semicolon-separated `time:level` entries; coefficient lists accept
//! spaces or commas. Lines starting with `#` are comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lti::ContinuousTransferFunction;
use crate::sim::{ControllerChoice, ExperimentConfig, StepSchedule};

fn parse_numbers(v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        })
        .collect()
}

fn parse_schedule(v: &str) -> Result<StepSchedule> {
    let mut steps = Vec::new();
    for entry in v.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (time, level) = entry
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("schedule entry {entry:?} is not time:level")))?;
        steps.push((
            time.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad schedule time {time:?}: {e}")))?,
            level
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad schedule level {level:?}: {e}")))?,
        ));
    }
    StepSchedule::new(steps)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut kv: HashMap<String, String> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |key: &str| -> Result<&String> {
        kv.get(key)
            .ok_or_else(|| Error::Config(format!("missing key {key:?}")))
    };
    let num = |key: &str| -> Result<f64> {
        get(key)?
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("key {key}: {e}")))
    };
    let int = |key: &str| -> Result<usize> {
        get(key)?
            .parse::<usize>()
            .map_err(|e| Error::Config(format!("key {key}: {e}")))
    };

    let plant = ContinuousTransferFunction::new(
        parse_numbers(get("plant.num")?)?,
        parse_numbers(get("plant.den")?)?,
    )?;
    let controllers = get("controllers")?
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(ControllerChoice::parse)
        .collect::<Result<Vec<_>>>()?;

    let known = [
        "plant.num", "plant.den", "ts", "n", "l_delay", "tp", "td", "tau", "duration",
        "ref.steps", "dist.steps", "seed", "rank_tol", "controllers",
    ];
    for key in kv.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
    }

    let cfg = ExperimentConfig {
        plant,
        ts: num("ts")?,
        order: int("n")?,
        delay: int("l_delay")?,
        tp: int("tp")?,
        td: int("td")?,
        tau: num("tau")?,
        duration: num("duration")?,
        reference: parse_schedule(kv.get("ref.steps").map(String::as_str).unwrap_or(""))?,
        disturbance: parse_schedule(kv.get("dist.steps").map(String::as_str).unwrap_or(""))?,
        seed: get("seed")?
            .parse::<u64>()
            .map_err(|e| Error::Config(format!("key seed: {e}")))?,
        rank_tol: num("rank_tol")?,
        controllers,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub fn render_config(cfg: &ExperimentConfig) -> String {
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let sched = |s: &StepSchedule| {
        s.steps
            .iter()
            .map(|(t, l)| format!("{t}:{l}"))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let mut out = String::new();
    let _ = writeln!(out, "plant.num = {}", join(cfg.plant.num()));
    let _ = writeln!(out, "plant.den = {}", join(cfg.plant.den()));
    let _ = writeln!(out, "ts = {}", cfg.ts);
    let _ = writeln!(out, "n = {}", cfg.order);
    let _ = writeln!(out, "l_delay = {}", cfg.delay);
    let _ = writeln!(out, "tp = {}", cfg.tp);
    let _ = writeln!(out, "td = {}", cfg.td);
    let _ = writeln!(out, "tau = {}", cfg.tau);
    let _ = writeln!(out, "duration = {}", cfg.duration);
    let _ = writeln!(out, "ref.steps = {}", sched(&cfg.reference));
    let _ = writeln!(out, "dist.steps = {}", sched(&cfg.disturbance));
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "rank_tol = {}", cfg.rank_tol);
    let _ = writeln!(
        out,
        "controllers = {}",
        cfg.controllers
            .iter()
            .map(|c| c.name())
            .collect::<Vec<_>>()
            .join(", ")
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# second-order demonstration plant
plant.num = 10 10
plant.den = 1 6 8
ts = 0.01
n = 2
l_delay = 1
tp = 2
td = 8
tau = 0.5
duration = 25
ref.steps = 1:1
dist.steps = 13:0.2
seed = 1
rank_tol = 1e-8
controllers = cbc, unified, imc
";

    #[test]
    fn parses_the_demonstration_config() {
        let cfg = parse_config(SAMPLE).unwrap();
        assert_eq!(cfg.order, 2);
        assert_eq!(cfg.td, 8);
        assert_eq!(cfg.controllers.len(), 3);
        assert_eq!(cfg.reference.value_at(1.0), 1.0);
        assert_eq!(cfg.disturbance.value_at(13.0), 0.2);
        assert_eq!(cfg.samples(), 2500);
    }

    #[test]
    fn round_trips_through_render() {
        let cfg = parse_config(SAMPLE).unwrap();
        let cfg2 = parse_config(&render_config(&cfg)).unwrap();
        assert_eq!(cfg2.seed, cfg.seed);
        assert_eq!(cfg2.reference, cfg.reference);
        assert_eq!(cfg2.plant, cfg.plant);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(parse_config(&format!("{SAMPLE}\nbogus = 1\n")).is_err());
        assert!(parse_config(&SAMPLE.replace("controllers = cbc, unified, imc", "controllers = pid")).is_err());
        assert!(parse_config(&SAMPLE.replace("tp = 2", "tp = 1")).is_err());
    }
}
