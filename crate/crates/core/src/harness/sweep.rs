use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::report::ReportBody;
use super::run::run_simulation;
use crate::{Error, Result};

/// A configuration key and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    /// Dotted path into the configuration, e.g. `horizon`.
    pub path: String,
    pub values: Vec<toml::Value>,
}

impl SweepAxis {
    /// Parses `path=v1,v2,...`; values are read as TOML literals, falling
    /// back to strings.
    pub fn parse(spec: &str) -> Result<Self> {
        let (path, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis `{spec}` is not of the form path=v1,v2")))?;
        let values = values
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                toml::from_str::<toml::Table>(&format!("v = {v}"))
                    .ok()
                    .and_then(|mut t| t.remove("v"))
                    .unwrap_or_else(|| toml::Value::String(v.to_string()))
            })
            .collect::<Vec<_>>();
        if path.trim().is_empty() || values.is_empty() {
            return Err(Error::Config(format!("axis `{spec}` needs a path and at least one value")));
        }
        Ok(Self {
            path: path.trim().to_string(),
            values,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepMember {
    pub axis_value: String,
    pub seed: u64,
    /// The report body, or the error that ended the run.
    pub outcome: std::result::Result<ReportBody, String>,
}

impl SweepMember {
    pub fn report(&self) -> Option<&ReportBody> {
        self.outcome.as_ref().ok()
    }
}

/// Means and maxima over the seeds of one axis value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub axis_value: String,
    /// Numeric axis value, when it has one.
    pub x: Option<f64>,
    pub runs: usize,
    pub failures: usize,
    pub mean_max_ccv: f64,
    pub max_ccv: f64,
    pub mean_max_bias: f64,
    pub max_bias: f64,
    pub mean_max_swap: f64,
    pub max_swap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutput {
    pub axis: String,
    pub members: Vec<SweepMember>,
    pub aggregate: Vec<AggregateRow>,
    /// Least-squares slope of `ln max(mean max-bias, 1)` against `ln x`.
    pub bias_slope: Option<f64>,
}

/// Largest signed CCV over every agent and scope.
pub fn max_ccv(body: &ReportBody) -> f64 {
    body.agents
        .iter()
        .flat_map(|a| &a.scopes)
        .map(|m| m.ccv)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest whole-horizon swap regret over the agents with a defined value.
pub fn max_swap(body: &ReportBody) -> f64 {
    body.agents
        .iter()
        .filter_map(|a| a.scopes.first().and_then(|m| m.swap_regret.value()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Least-squares slope of `ln y` on `ln x`. Needs two distinct positive `x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn axis_label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn axis_number(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::Float(f) => Some(*f),
        _ => None,
    }
}

/// Runs every (axis value, seed) pair concurrently. A failing member is
/// recorded and the sweep continues; an axis value that does not patch into a
/// valid configuration is a configuration error.
pub fn run_sweep(template: &RunConfig, axis: &SweepAxis, seeds: &[u64]) -> Result<SweepOutput> {
    if seeds.is_empty() {
        return Err(Error::Config("a sweep needs at least one seed".into()));
    }
    let mut jobs = Vec::with_capacity(axis.values.len() * seeds.len());
    for value in &axis.values {
        let patched = template.patched(&axis.path, value.clone())?;
        for &seed in seeds {
            let mut config = patched.clone();
            config.seed = seed;
            jobs.push((axis_label(value), config));
        }
    }
    let members: Vec<SweepMember> = jobs
        .into_par_iter()
        .map(|(axis_value, config)| SweepMember {
            axis_value,
            seed: config.seed,
            outcome: run_simulation(&config)
                .map(|out| out.report.body)
                .map_err(|e| e.to_string()),
        })
        .collect();

    let aggregate: Vec<AggregateRow> = axis
        .values
        .iter()
        .map(|value| {
            let label = axis_label(value);
            let group: Vec<&SweepMember> = members.iter().filter(|m| m.axis_value == label).collect();
            let ok: Vec<&ReportBody> = group.iter().filter_map(|m| m.report()).collect();
            let stats = |f: &dyn Fn(&ReportBody) -> f64| {
                let vals: Vec<f64> = ok.iter().map(|b| f(b)).collect();
                let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
                let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (mean, max)
            };
            let (mean_max_ccv, max_ccv) = stats(&max_ccv);
            let (mean_max_bias, max_bias) = stats(&|b| b.max_bias());
            let (mean_max_swap, max_swap) = stats(&max_swap);
            AggregateRow {
                axis_value: label,
                x: axis_number(value),
                runs: group.len(),
                failures: group.len() - ok.len(),
                mean_max_ccv,
                max_ccv,
                mean_max_bias,
                max_bias,
                mean_max_swap,
                max_swap,
            }
        })
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = aggregate
        .iter()
        .filter_map(|r| r.x.map(|x| (x, r.mean_max_bias.max(1.0))))
        .unzip();
    Ok(SweepOutput {
        axis: axis.path.clone(),
        members,
        bias_slope: loglog_slope(&xs, &ys),
        aggregate,
    })
}

impl SweepOutput {
    /// The aggregate table as CSV.
    pub fn aggregate_csv(&self) -> String {
        let mut out = String::from(
            "axis_value,runs,failures,mean_max_ccv,max_ccv,mean_max_bias,max_bias,mean_max_swap,max_swap\n",
        );
        for r in &self.aggregate {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.axis_value,
                r.runs,
                r.failures,
                r.mean_max_ccv,
                r.max_ccv,
                r.mean_max_bias,
                r.max_bias,
                r.mean_max_swap,
                r.max_swap
            ));
        }
        out
    }
}
