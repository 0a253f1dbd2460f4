//! Browser bindings: eigenvalue sheets, a trajectory's eigenstate overlaps
//! and the vorticity of a draggable loop.

use encircle::classify::{run_trajectory, trajectory_setup};
use encircle::evolve::transfer_fidelity;
use encircle::model::{riemann_mesh, MeshBounds};
use encircle::topology::{dynamic_vorticity, enclosed_ep_count};
use encircle::transport::detect_transitions;
use encircle::{Direction, Family, HamiltonianSpec, LoopSpec};
use wasm_bindgen::prelude::*;

fn family(apt: bool) -> Family {
    if apt {
        Family::AptPassive
    } else {
        Family::PtPassive
    }
}

fn js(e: encircle::EncircleError) -> JsError {
    JsError::new(&e.to_string())
}

/// Flat `[Δ, J, Re λ₊, Im λ₊, Re λ₋, Im λ₋]` rows over `Δ ∈ [−2γ, 2γ]`,
/// `J ∈ [0, 2γ]`.
#[wasm_bindgen]
pub fn sheets(apt: bool, gamma: f64, resolution: usize) -> Result<Vec<f64>, JsError> {
    let spec = HamiltonianSpec::new(family(apt), gamma);
    let g = gamma.abs();
    let mesh = riemann_mesh(&spec, &MeshBounds { delta: (-2.0 * g, 2.0 * g), j: (0.0, 2.0 * g) }, resolution).map_err(js)?;
    Ok(mesh
        .iter()
        .flat_map(|p| [p.delta, p.j, p.lambda_plus.re, p.lambda_plus.im, p.lambda_minus.re, p.lambda_minus.im])
        .collect())
}

#[wasm_bindgen]
pub struct Run {
    samples: Vec<f64>,
    fidelity_alpha: f64,
    fidelity_beta: f64,
    crossings: usize,
}

#[wasm_bindgen]
impl Run {
    /// Flat `[t, Δ, J, ov_α, ov_β]` rows.
    #[wasm_bindgen(getter)]
    pub fn samples(&self) -> Vec<f64> {
        self.samples.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn fidelity_alpha(&self) -> f64 {
        self.fidelity_alpha
    }

    #[wasm_bindgen(getter)]
    pub fn fidelity_beta(&self) -> f64 {
        self.fidelity_beta
    }

    #[wasm_bindgen(getter)]
    pub fn crossings(&self) -> usize {
        self.crossings
    }
}

/// Trajectory `n` (1–8) on the standard loop with the given period and
/// noise.
#[wasm_bindgen]
pub fn trajectory(apt: bool, n: u8, period: f64, noise: f64, seed: u64) -> Result<Run, JsError> {
    trajectory_setup(n).ok_or_else(|| JsError::new("trajectory must be 1..=8"))?;
    let spec = HamiltonianSpec::new(family(apt), 0.06);
    let template = LoopSpec { period, noise_intensity: noise, seed, samples: 401, ..LoopSpec::start_a(Direction::Clockwise) };
    let (traj, eig) = run_trajectory(&spec, &template, n).map_err(js)?;
    let (fa, fb) = transfer_fidelity(&traj, (eig.v_plus.normalize(), eig.v_minus.normalize()));
    Ok(Run {
        samples: traj.samples.iter().flat_map(|s| [s.t(), s.point.delta, s.point.j, s.ov_alpha, s.ov_beta]).collect(),
        fidelity_alpha: fa,
        fidelity_beta: fb,
        crossings: detect_transitions(&traj).map_err(js)?.len(),
    })
}

/// `[quantized, raw, enclosed EPs]` for a loop centred at `(0, j_center)`.
#[wasm_bindgen]
pub fn vorticity(apt: bool, j_center: f64, radius: f64, clockwise: bool) -> Result<Vec<f64>, JsError> {
    let spec = HamiltonianSpec::new(family(apt), 0.06);
    let dir = if clockwise { Direction::Clockwise } else { Direction::CounterClockwise };
    let l = LoopSpec { j_center, radius, samples: 201, ..LoopSpec::start_a(dir) };
    let v = dynamic_vorticity(&spec, &l, 512).map_err(js)?;
    Ok(vec![v.quantized, v.raw, f64::from(enclosed_ep_count(&l, 0.06).map_err(js)?)])
}
