use std::io::{self, Write};

use encircle::evolve::{adiabaticity, propagate, transfer_fidelity};
use encircle::path::splitmix64;
use encircle::transport::detect_transitions;
use encircle::Family;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigSource, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::scenario::{initial_vector, VORTICITY_GRID};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepParam {
    Period,
    Radius,
    NoiseIntensity,
    Seed,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            Self::Period => "period",
            Self::Radius => "radius",
            Self::NoiseIntensity => "noise_intensity",
            Self::Seed => "seed_axis",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FidelityAlpha,
    FidelityBeta,
    Crossings,
    Vorticity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ConfigSource,
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
}

fn default_metric() -> Metric {
    Metric::FidelityBeta
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cell: usize,
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub seed: u64,
    pub fidelity_alpha: f64,
    pub fidelity_beta: f64,
    pub crossings: Option<usize>,
    pub dynamic_vorticity: f64,
    pub tau_crit_over_period: f64,
    pub value: f64,
    pub errors: Vec<String>,
}

fn check_axis(axis: &Axis, field: &str) -> CliResult<()> {
    if axis.values.is_empty() {
        return Err(CliError::invalid(format!("{field}.values"), "must not be empty"));
    }
    for &v in &axis.values {
        let ok = match axis.param {
            SweepParam::Period | SweepParam::Radius => v.is_finite() && v > 0.0,
            SweepParam::NoiseIntensity => v.is_finite() && v >= 0.0,
            SweepParam::Seed => v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53),
        };
        if !ok {
            return Err(CliError::invalid(format!("{field}.values"), format!("{v} is not a valid {:?}", axis.param)));
        }
    }
    Ok(())
}

impl SweepSpec {
    pub fn validate(&self) -> CliResult<ScenarioConfig> {
        check_axis(&self.axis1, "axis1")?;
        if let Some(a) = &self.axis2 {
            check_axis(a, "axis2")?;
            if a.param == self.axis1.param {
                return Err(CliError::invalid("axis2.param", "must differ from axis1.param"));
            }
        }
        let base = self.base.resolve()?;
        if base.hamiltonian.family == Family::Custom && self.metric == Metric::Vorticity {
            return Err(CliError::invalid("metric", "vorticity needs a parametrized family"));
        }
        Ok(base)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn apply(cfg: &mut ScenarioConfig, param: SweepParam, v: f64) {
    match param {
        SweepParam::Period => cfg.path.period = v,
        SweepParam::Radius => cfg.path.radius = v,
        SweepParam::NoiseIntensity => cfg.path.noise_intensity = v,
        SweepParam::Seed => cfg.path.seed = v as u64,
    }
}

fn evaluate(base: &ScenarioConfig, spec: &SweepSpec, cell: usize, a1: f64, a2: Option<f64>) -> SweepRow {
    let mut cfg = base.clone();
    let seeded = spec.axis1.param == SweepParam::Seed || spec.axis2.as_ref().is_some_and(|a| a.param == SweepParam::Seed);
    if !seeded {
        cfg.path.seed = base.path.seed ^ splitmix64(cell as u64);
    }
    apply(&mut cfg, spec.axis1.param, a1);
    if let (Some(ax), Some(v)) = (&spec.axis2, a2) {
        apply(&mut cfg, ax.param, v);
    }
    let mut row = SweepRow {
        cell,
        axis1: a1,
        axis2: a2,
        seed: cfg.path.seed,
        fidelity_alpha: f64::NAN,
        fidelity_beta: f64::NAN,
        crossings: None,
        dynamic_vorticity: f64::NAN,
        tau_crit_over_period: f64::NAN,
        value: f64::NAN,
        errors: Vec::new(),
    };
    let (h, l) = (&cfg.hamiltonian, &cfg.path);
    let run = initial_vector(&cfg).and_then(|(psi0, targets)| {
        let traj = propagate(h, l, psi0, l.samples)?;
        let crossings = detect_transitions(&traj)?.len();
        Ok((transfer_fidelity(&traj, targets), crossings))
    });
    match run {
        Ok(((fa, fb), n)) => {
            row.fidelity_alpha = fa;
            row.fidelity_beta = fb;
            row.crossings = Some(n);
        }
        Err(e) => row.errors.push(format!("propagate: {e}")),
    }
    match adiabaticity(h, l, 2048) {
        Ok(a) => row.tau_crit_over_period = a.ratio,
        Err(e) => row.errors.push(format!("adiabaticity: {e}")),
    }
    if h.family != Family::Custom {
        match encircle::topology::dynamic_vorticity(h, l, VORTICITY_GRID) {
            Ok(v) => row.dynamic_vorticity = v.quantized,
            Err(e) => row.errors.push(format!("vorticity: {e}")),
        }
    }
    row.value = match spec.metric {
        Metric::FidelityAlpha => row.fidelity_alpha,
        Metric::FidelityBeta => row.fidelity_beta,
        Metric::Crossings => row.crossings.map_or(f64::NAN, |n| n as f64),
        Metric::Vorticity => row.dynamic_vorticity,
    };
    row
}

/// Evaluates every grid cell on `workers` threads. Rows come back sorted by
/// `(axis1, axis2)` whatever the scheduling.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> CliResult<Vec<SweepRow>> {
    if workers == 0 {
        return Err(CliError::invalid("workers", "must be ≥ 1"));
    }
    let base = spec.validate()?;
    let second: Vec<Option<f64>> = match &spec.axis2 {
        Some(a) => a.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    let cells: Vec<(usize, f64, Option<f64>)> = spec
        .axis1
        .values
        .iter()
        .flat_map(|&a| second.iter().map(move |&b| (a, b)))
        .enumerate()
        .map(|(i, (a, b))| (i, a, b))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::invalid("workers", e.to_string()))?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| cells.par_iter().map(|&(i, a, b)| evaluate(&base, spec, i, a, b)).collect());
    rows.sort_by(|x, y| {
        x.axis1
            .total_cmp(&y.axis1)
            .then(x.axis2.unwrap_or(0.0).total_cmp(&y.axis2.unwrap_or(0.0)))
            .then(x.cell.cmp(&y.cell))
    });
    Ok(rows)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_sweep_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], w: &mut W) -> io::Result<()> {
    let mut header = vec!["cell", spec.axis1.param.column()];
    if let Some(a) = &spec.axis2 {
        header.push(a.param.column());
    }
    header.extend([
        "seed",
        "fidelity_alpha",
        "fidelity_beta",
        "crossings",
        "dynamic_vorticity",
        "tau_crit_over_period",
        "value",
        "errors",
    ]);
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut f = vec![r.cell.to_string(), num(r.axis1)];
        if let Some(v) = r.axis2 {
            f.push(num(v));
        }
        f.extend([
            r.seed.to_string(),
            num(r.fidelity_alpha),
            num(r.fidelity_beta),
            r.crossings.map_or(String::new(), |n| n.to_string()),
            num(r.dynamic_vorticity),
            num(r.tau_crit_over_period),
            num(r.value),
            format!("\"{}\"", r.errors.join("; ").replace('"', "\"\"")),
        ]);
        writeln!(w, "{}", f.join(","))?;
    }
    Ok(())
}
