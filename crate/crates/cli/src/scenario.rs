use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use encircle::classify::{chirality_test, reciprocity_test, ChiralityReport, ReciprocityReport};
use encircle::evolve::{adiabaticity, initial_eigenbasis, propagate, transfer_fidelity, TrajectoryRecord};
use encircle::linalg::CVec2;
use encircle::model::{riemann_mesh, MeshBounds};
use encircle::topology::{dynamic_vorticity, enclosed_ep_count, spectral_vorticity, VorticityResult};
use encircle::transport::{detect_transitions, frame_at, integrate_r, Amplitude, Crossing, RSeries};
use encircle::{Family, HamiltonianSpec, LoopSpec};
use serde::Serialize;

use crate::config::{Emit, InitialState, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::mesh::write_mesh_csv;

/// Loop-angle samples for the winding integrals.
pub const VORTICITY_GRID: usize = 512;
pub const MESH_RESOLUTION: usize = 65;

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub chirality: ChiralityReport,
    pub reciprocity: ReciprocityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct VorticitySummary {
    pub dynamic_vorticity: f64,
    pub dynamic_raw: f64,
    pub dynamic_residual: f64,
    pub spectral_vorticity: f64,
    pub enclosed_eps: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: Option<String>,
    pub hamiltonian: HamiltonianSpec,
    #[serde(rename = "loop")]
    pub path: LoopSpec,
    pub initial_state: InitialState,
    pub fidelity_alpha: f64,
    pub fidelity_beta: f64,
    pub final_state: &'static str,
    pub final_log_norm: f64,
    pub tau_crit: f64,
    pub tau_crit_over_period: f64,
    pub min_gap: f64,
    pub crossings: usize,
    pub crossing_events: Vec<Crossing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_amplitude: Option<Amplitude>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vorticity: Option<VorticitySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
}

impl Summary {
    pub fn dynamic_vorticity(&self) -> Option<f64> {
        self.vorticity.as_ref().map(|v| v.dynamic_vorticity)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub summary: Summary,
    pub trajectory: TrajectoryRecord,
    pub r_series: Option<RSeries>,
    pub vorticity: Option<VorticityResult>,
}

pub fn initial_vector(cfg: &ScenarioConfig) -> CliResult<(CVec2, (CVec2, CVec2))> {
    let eig = initial_eigenbasis(&cfg.hamiltonian, &cfg.path)?;
    let targets = (eig.v_plus.normalize(), eig.v_minus.normalize());
    let psi0 = match cfg.initial_state {
        InitialState::Alpha => eig.v_plus,
        InitialState::Beta => eig.v_minus,
        InitialState::Custom(_) => cfg.initial_state.custom_vector().expect("custom state"),
    };
    Ok((psi0, targets))
}

fn label(fa: f64, fb: f64) -> &'static str {
    let band = 0.4..=0.6;
    if band.contains(&fa) && band.contains(&fb) {
        "ambiguous"
    } else if fa >= fb {
        "alpha"
    } else {
        "beta"
    }
}

pub fn vorticity_summary(hspec: &HamiltonianSpec, lspec: &LoopSpec) -> CliResult<(VorticitySummary, VorticityResult)> {
    let dynamic = dynamic_vorticity(hspec, lspec, VORTICITY_GRID)?;
    let spectral = spectral_vorticity(hspec, lspec, VORTICITY_GRID)?;
    let summary = VorticitySummary {
        dynamic_vorticity: dynamic.quantized,
        dynamic_raw: dynamic.raw,
        dynamic_residual: dynamic.residual,
        spectral_vorticity: spectral.quantized,
        enclosed_eps: Some(enclosed_ep_count(lspec, hspec.gamma)?),
    };
    Ok((summary, dynamic))
}

/// Runs every stage the config asks for, without touching the filesystem.
pub fn simulate(cfg: &ScenarioConfig) -> CliResult<ScenarioOutput> {
    cfg.validate()?;
    let (h, l) = (&cfg.hamiltonian, &cfg.path);
    let (psi0, targets) = initial_vector(cfg)?;
    let trajectory = propagate(h, l, psi0, l.samples)?;
    let (fa, fb) = transfer_fidelity(&trajectory, targets);
    let adiabatic = adiabaticity(h, l, 2048)?;
    let crossing_events = detect_transitions(&trajectory)?;
    let framed = h.family != Family::Custom;

    let r_amplitude = match cfg.initial_state {
        InitialState::Alpha => Some(Amplitude::R1),
        InitialState::Beta => Some(Amplitude::R2),
        InitialState::Custom(_) => None,
    };
    let r_series = match r_amplitude {
        Some(which) if framed && cfg.emit.contains(&Emit::RSeries) => Some(integrate_r(h, l, which, l.samples)?),
        _ => None,
    };
    let (vsum, vorticity) = if framed && cfg.emit.contains(&Emit::Vorticity) {
        let (s, v) = vorticity_summary(h, l)?;
        (Some(s), Some(v))
    } else {
        (None, None)
    };
    let classification = if framed && cfg.emit.contains(&Emit::Classification) {
        Some(Classification {
            chirality: chirality_test(&frame_at(h, l, 0.0)?.h_tilde),
            reciprocity: reciprocity_test(&psi0, h, l)?,
        })
    } else {
        None
    };
    let summary = Summary {
        name: cfg.name.clone(),
        hamiltonian: *h,
        path: *l,
        initial_state: cfg.initial_state,
        fidelity_alpha: fa,
        fidelity_beta: fb,
        final_state: label(fa, fb),
        final_log_norm: trajectory.last().raw_log_norm,
        tau_crit: adiabatic.tau_crit,
        tau_crit_over_period: adiabatic.ratio,
        min_gap: adiabatic.min_gap,
        crossings: crossing_events.len(),
        crossing_events,
        r_amplitude: r_series.as_ref().and(r_amplitude),
        vorticity: vsum,
        classification,
    };
    Ok(ScenarioOutput { summary, trajectory, r_series, vorticity })
}

pub(crate) fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

pub(crate) fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

/// Writes the requested files into `dir` and returns their paths.
pub fn write_outputs(cfg: &ScenarioConfig, out: &ScenarioOutput, dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    if cfg.emit.contains(&Emit::Trajectory) {
        let p = dir.join("trajectory.csv");
        write_with(&p, |w| out.trajectory.write_csv(w))?;
        written.push(p);
    }
    if let Some(r) = &out.r_series {
        let p = dir.join("r_series.csv");
        write_with(&p, |w| r.write_csv(w))?;
        written.push(p);
    }
    if let Some(v) = &out.vorticity {
        let p = dir.join("vorticity.csv");
        write_with(&p, |w| v.write_csv(w))?;
        written.push(p);
    }
    if cfg.emit.contains(&Emit::RiemannMesh) {
        let g = cfg.hamiltonian.gamma.abs().max(1e-3);
        let bounds = MeshBounds { delta: (-g, g), j: (0.0, 2.0 * g) };
        let mesh = riemann_mesh(&cfg.hamiltonian, &bounds, MESH_RESOLUTION)?;
        let p = dir.join("riemann_mesh.csv");
        write_with(&p, |w| write_mesh_csv(&mesh, w))?;
        written.push(p);
    }
    let p = dir.join("summary.json");
    write_json(&p, &out.summary)?;
    written.push(p);
    Ok(written)
}

pub fn run_scenario(cfg: &ScenarioConfig) -> CliResult<Summary> {
    let out = simulate(cfg)?;
    write_outputs(cfg, &out, &cfg.outputs)?;
    Ok(out.summary)
}
