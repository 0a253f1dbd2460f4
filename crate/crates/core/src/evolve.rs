//! Non-Hermitian Schrödinger propagation along a loop, projection onto the
//! instantaneous eigenbasis, and adiabaticity measures.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{EncircleError, Result};
use crate::linalg::{mat_exp, CMat2, CVec2, C64, I};
use crate::model::{build, eigensystem, eigensystem_continued, eigenvalues, EigenPair, HamiltonianSpec, EP_TOLERANCE};
use crate::ode::{DormandPrince, Tolerances};
use crate::path::{path_at, sample_grid, LoopSpec, PathPoint};

/// Dominant Riemann sheet of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sheet {
    Plus,
    Minus,
}

impl Sheet {
    pub fn sign(self) -> i32 {
        match self {
            Sheet::Plus => 1,
            Sheet::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub point: PathPoint,
    /// Normalized state.
    pub psi: CVec2,
    /// `ln` of the norm the unnormalized state would have.
    pub raw_log_norm: f64,
    pub c1: C64,
    pub c2: C64,
    pub ov_alpha: f64,
    pub ov_beta: f64,
    pub sheet: Sheet,
    pub lambda_proj: C64,
    /// Eigenbasis continued along the loop from `t = 0`; `c1`, `c2`, the
    /// sheet and `lambda_proj` refer to it.
    pub eigen: EigenPair,
    /// Eigenbasis labelled pointwise by the fixed sheet convention, so that
    /// `|α(T)⟩ = |α(0)⟩` on a closed loop; the overlaps refer to it.
    pub labels: EigenPair,
}

impl Sample {
    pub fn t(&self) -> f64 {
        self.point.t
    }

    /// The unnormalized state.
    pub fn raw_psi(&self) -> CVec2 {
        self.psi.scale(self.raw_log_norm.exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub hamiltonian: HamiltonianSpec,
    pub path: LoopSpec,
    pub samples: Vec<Sample>,
}

impl TrajectoryRecord {
    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least two samples")
    }

    pub const CSV_HEADER: &'static str = "t_us,theta_rad,delta,j,kappa,re_psi0,im_psi0,re_psi1,im_psi1,raw_log_norm,abs_c1,abs_c2,ov_alpha,ov_beta,sheet,re_lambda_proj,im_lambda_proj";

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            let p = &s.point;
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}",
                p.t,
                p.theta,
                p.delta,
                p.j,
                p.kappa,
                s.psi.a0.re,
                s.psi.a0.im,
                s.psi.a1.re,
                s.psi.a1.im,
                s.raw_log_norm,
                s.c1.norm(),
                s.c2.norm(),
                s.ov_alpha,
                s.ov_beta,
                s.sheet.sign(),
                s.lambda_proj.re,
                s.lambda_proj.im,
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    pub tau_crit: f64,
    pub ratio: f64,
    pub min_gap: f64,
    pub argmax_theta: f64,
}

/// `−i·H·ψ` on the packed real state.
pub(crate) fn schrodinger_rhs(h: &CMat2, y: &[f64; 4]) -> [f64; 4] {
    let psi = CVec2::from_array(y);
    h.apply(&psi).scale_c(-I).to_array()
}

/// Condition number `‖B‖·‖B⁻¹‖` (Frobenius) of the eigenbasis.
pub fn basis_condition(eig: &EigenPair) -> f64 {
    let b = eig.basis();
    match b.inverse() {
        Some(inv) => b.norm() * inv.norm(),
        None => f64::INFINITY,
    }
}

/// Solves `[v₊ v₋]·(C₁, C₂)ᵀ = ψ`.
pub fn decompose(psi: &CVec2, eig: &EigenPair) -> Result<(C64, C64)> {
    let cond = basis_condition(eig);
    if !(cond < 1e8) {
        return Err(EncircleError::IllConditionedBasis { condition: cond });
    }
    let inv = eig.basis().inverse().expect("finite condition number");
    let c = inv.apply(psi);
    Ok((c.a0, c.a1))
}

/// `(|⟨α̂|ψ̂⟩|, |⟨β̂|ψ̂⟩|)` with the Hermitian product.
pub fn overlaps(psi: &CVec2, eig: &EigenPair) -> (f64, f64) {
    (eig.v_plus.overlap(psi), eig.v_minus.overlap(psi))
}

fn make_sample(
    point: PathPoint,
    psi: CVec2,
    raw_log_norm: f64,
    eigen: EigenPair,
    labels: EigenPair,
    prev: Option<Sheet>,
) -> Result<Sample> {
    let (c1, c2) = decompose(&psi, &eigen)?;
    let (ov_alpha, ov_beta) = overlaps(&psi, &labels);
    let (m1, m2) = (c1.norm(), c2.norm());
    let sheet = if m1 > m2 {
        Sheet::Plus
    } else if m2 > m1 {
        Sheet::Minus
    } else {
        prev.unwrap_or(Sheet::Plus)
    };
    let (w1, w2) = (m1 * m1, m2 * m2);
    let lambda_proj = (eigen.lambda_plus * w1 + eigen.lambda_minus * w2) / (w1 + w2);
    Ok(Sample { point, psi, raw_log_norm, c1, c2, ov_alpha, ov_beta, sheet, lambda_proj, eigen, labels })
}

/// Eigenbases at the sample points, continued from the one at `t = 0`.
pub fn tracked_eigenbases(hspec: &HamiltonianSpec, points: &[PathPoint]) -> Result<Vec<EigenPair>> {
    let mut out: Vec<EigenPair> = Vec::with_capacity(points.len());
    for p in points {
        let e = match out.last() {
            None => eigensystem(hspec, p.delta, p.j)?,
            Some(prev) => eigensystem_continued(hspec, p.delta, p.j, prev)?,
        };
        out.push(e);
    }
    Ok(out)
}

/// Eigenbasis at the loop's start point.
pub fn initial_eigenbasis(hspec: &HamiltonianSpec, lspec: &LoopSpec) -> Result<EigenPair> {
    let p = path_at(lspec, 0.0)?;
    eigensystem(hspec, p.delta, p.j)
}

/// Raw (unnormalized-equivalent) states on `times`, as `(ψ̂, ln‖ψ‖)`.
pub(crate) fn propagate_states(
    hspec: &HamiltonianSpec,
    lspec: &LoopSpec,
    psi0: CVec2,
    times: &[f64],
    tol: Tolerances,
) -> Result<Vec<(CVec2, f64)>> {
    let norm0 = psi0.norm();
    if !(norm0 > 0.0) || !psi0.is_finite() {
        return Err(EncircleError::InvalidSpec { field: "initial_state", reason: "must have nonzero finite norm".into() });
    }
    let mut dp = DormandPrince::new(tol);
    let mut out = Vec::with_capacity(times.len());
    let mut psi = psi0.normalize();
    let mut log_norm = norm0.ln();
    out.push((psi, log_norm));
    for w in times.windows(2) {
        let mut y = psi.to_array();
        for (a, b, seg) in lspec.pieces(w[0], w[1]) {
            y = dp.advance(
                |t, y| {
                    let p = lspec.point_in_segment(t, seg);
                    let h = build(hspec, p.delta, p.j).expect("validated spec");
                    schrodinger_rhs(&h, y)
                },
                a,
                y,
                b,
            )?;
        }
        let raw = CVec2::from_array(&y);
        let n = raw.norm();
        if !(n > 1e-300) {
            return Err(EncircleError::DecayUnderflow { t: w[1] });
        }
        psi = raw.scale(1.0 / n);
        log_norm += n.ln();
        out.push((psi, log_norm));
    }
    Ok(out)
}

fn record(hspec: &HamiltonianSpec, lspec: &LoopSpec, times: &[f64], states: &[(CVec2, f64)]) -> Result<TrajectoryRecord> {
    let points: Vec<PathPoint> = times.iter().map(|&t| path_at(lspec, t)).collect::<Result<_>>()?;
    let eigs = tracked_eigenbases(hspec, &points)?;
    let mut samples: Vec<Sample> = Vec::with_capacity(times.len());
    for ((p, e), (psi, ln)) in points.iter().zip(eigs).zip(states) {
        let prev = samples.last().map(|s| s.sheet);
        let labels = eigensystem(hspec, p.delta, p.j)?;
        samples.push(make_sample(*p, *psi, *ln, e, labels, prev)?);
    }
    Ok(TrajectoryRecord { hamiltonian: *hspec, path: *lspec, samples })
}

pub fn propagate(hspec: &HamiltonianSpec, lspec: &LoopSpec, psi0: CVec2, samples: usize) -> Result<TrajectoryRecord> {
    propagate_with_tolerance(hspec, lspec, psi0, samples, Tolerances::default())
}

pub fn propagate_with_tolerance(
    hspec: &HamiltonianSpec,
    lspec: &LoopSpec,
    psi0: CVec2,
    samples: usize,
    tol: Tolerances,
) -> Result<TrajectoryRecord> {
    hspec.validate()?;
    lspec.validate()?;
    if samples < 2 {
        return Err(EncircleError::InvalidSpec { field: "loop.samples", reason: format!("must be ≥ 2, got {samples}") });
    }
    let times = sample_grid(lspec.period, samples);
    let states = propagate_states(hspec, lspec, psi0, &times, tol)?;
    record(hspec, lspec, &times, &states)
}

/// The segmented laboratory protocol: each segment starts from the exact
/// continuous state at `t_{n−1}` and is held at `H(t_{n−1})` for `T/N`.
pub fn piecewise_emulate(hspec: &HamiltonianSpec, lspec: &LoopSpec, psi0: CVec2, n_segments: usize) -> Result<TrajectoryRecord> {
    if n_segments < 1 {
        return Err(EncircleError::InvalidSpec { field: "n_segments", reason: "must be ≥ 1".into() });
    }
    let continuous = propagate(hspec, lspec, psi0, n_segments + 1)?;
    let dt = lspec.period / n_segments as f64;
    let mut samples = vec![continuous.samples[0]];
    for k in 1..=n_segments {
        let from = &continuous.samples[k - 1];
        let h = build(hspec, from.point.delta, from.point.j)?;
        let stepped = mat_exp(&h, dt).apply(&from.psi);
        let n = stepped.norm();
        if !(n > 1e-300) {
            return Err(EncircleError::DecayUnderflow { t: continuous.samples[k].t() });
        }
        let to = &continuous.samples[k];
        let prev = samples.last().map(|s| s.sheet);
        samples.push(make_sample(to.point, stepped.scale(1.0 / n), from.raw_log_norm + n.ln(), to.eigen, to.labels, prev)?);
    }
    Ok(TrajectoryRecord { hamiltonian: *hspec, path: *lspec, samples })
}

fn gap_on_circle(hspec: &HamiltonianSpec, lspec: &LoopSpec, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (lp, lm) = eigenvalues(hspec, lspec.radius * s, lspec.j_center + lspec.radius * c).expect("validated spec");
    (lp - lm).norm()
}

/// `τ_crit = max 1/|λ₊ − λ₋|` over the noise-free loop.
pub fn adiabaticity(hspec: &HamiltonianSpec, lspec: &LoopSpec, grid: usize) -> Result<AdiabaticityReport> {
    hspec.validate()?;
    lspec.validate()?;
    if grid < 64 {
        return Err(EncircleError::InvalidSpec { field: "grid", reason: format!("must be ≥ 64, got {grid}") });
    }
    let step = std::f64::consts::TAU / grid as f64;
    let (mut best_k, mut best) = (0usize, f64::INFINITY);
    for k in 0..grid {
        let g = gap_on_circle(hspec, lspec, k as f64 * step);
        if g < best {
            best = g;
            best_k = k;
        }
    }
    // golden-section refinement on the bracketing interval
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best_k as f64 - 1.0) * step, (best_k as f64 + 1.0) * step);
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let (mut f1, mut f2) = (gap_on_circle(hspec, lspec, x1), gap_on_circle(hspec, lspec, x2));
    for _ in 0..100 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = gap_on_circle(hspec, lspec, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = gap_on_circle(hspec, lspec, x2);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let (theta, min_gap) = if f1.min(f2) < best {
        if f1 < f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    } else {
        (best_k as f64 * step, best)
    };
    if min_gap < EP_TOLERANCE {
        return Err(EncircleError::LoopThroughEP { min_gap });
    }
    let tau_crit = 1.0 / min_gap;
    Ok(AdiabaticityReport {
        tau_crit,
        ratio: tau_crit / lspec.period,
        min_gap,
        argmax_theta: theta.rem_euclid(std::f64::consts::TAU),
    })
}

/// `(|⟨α̂|ψ̂(T)⟩|², |⟨β̂|ψ̂(T)⟩|²)`.
pub fn transfer_fidelity(traj: &TrajectoryRecord, targets: (CVec2, CVec2)) -> (f64, f64) {
    let psi = traj.last().psi;
    let fa = targets.0.overlap(&psi);
    let fb = targets.1.overlap(&psi);
    (fa * fa, fb * fb)
}
