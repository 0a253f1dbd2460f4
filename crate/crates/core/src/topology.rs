//! Winding numbers of eigenvalue gaps around the loop.
//!
//! The gap `E₊ − E₋ = 2·sqrt(g)` is double-valued, but `g` itself (`λ²` for
//! the bare spectrum, `λ² − f²` in the transported frame) is single-valued
//! along the parameter loop. The winding of the gap is therefore half the
//! winding of `g`, which is computed by phase unwrapping with adaptive
//! bisection:
//!
//! ```text
//! 𝒱 = −(1/2π)·∮ d arg(E₊ − E₋) = −(1/4π)·∮ d arg g
//! ```
//!
//! The integral follows the loop in time, so clockwise traversal of a
//! single EP gives `−1/2`.
//!
//! Since `λ² = (J − γ + iΔ/2)(J + γ − iΔ/2)`, the mirror EP at `J = −γ`
//! enters through a factor that winds backwards. The two EPs carry
//! opposite charge and a loop around both has zero winding.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{EncircleError, Result};
use crate::linalg::C64;
use crate::model::{build, lambda_squared, Family, HamiltonianSpec, EP_TOLERANCE};
use crate::path::{sample_grid, LoopSpec};
use crate::transport::coupling;

pub const QUANTIZATION_TOLERANCE: f64 = 1e-3;

const MAX_BISECTIONS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    /// Bare eigenvalues of `H`.
    Spectral,
    /// Eigenvalues of the transported-frame `H̃`.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingSample {
    pub t: f64,
    pub theta: f64,
    /// Continuity-tracked `E₊ − E₋`.
    pub gap: C64,
    /// Unwrapped `arg(E₊ − E₋)`.
    pub unwrapped_arg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VorticityResult {
    pub raw: f64,
    pub quantized: f64,
    pub residual: f64,
    /// `residual < QUANTIZATION_TOLERANCE`.
    pub is_quantized: bool,
    /// `None` when an EP sits on the loop.
    pub enclosed_eps: Option<u32>,
    pub gap_min: f64,
    #[serde(skip)]
    pub trace: Vec<WindingSample>,
}

impl VorticityResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "theta_rad,re_gap,im_gap,unwrapped_arg")?;
        for s in &self.trace {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", s.theta, s.gap.re, s.gap.im, s.unwrapped_arg)?;
        }
        Ok(())
    }
}

fn squared_gap(kind: GapKind, hspec: &HamiltonianSpec, lspec: &LoopSpec, t: f64, seg: usize) -> C64 {
    let p = lspec.point_in_segment(t, seg);
    let w = match hspec.family {
        Family::Custom => {
            let m = build(hspec, p.delta, p.j).expect("validated spec");
            let k = (m.m00 - m.m11) * 0.5;
            k * k + m.m01 * m.m10
        }
        _ => lambda_squared(p.delta, p.j, hspec.gamma),
    };
    match kind {
        GapKind::Spectral => w,
        GapKind::Dynamic => {
            let f = coupling(hspec.gamma, &p, &lspec.rate_in_segment(t, seg));
            w - f * f
        }
    }
}

struct Unwrapper<'a> {
    kind: GapKind,
    hspec: &'a HamiltonianSpec,
    lspec: &'a LoopSpec,
    total: f64,
    gap_min: f64,
}

impl Unwrapper<'_> {
    fn eval(&mut self, t: f64, seg: usize) -> Result<C64> {
        let g = squared_gap(self.kind, self.hspec, self.lspec, t, seg);
        let gap = 2.0 * g.norm().sqrt();
        self.gap_min = self.gap_min.min(gap);
        if !(gap >= EP_TOLERANCE) {
            let theta = self.lspec.point_in_segment(t, seg).theta;
            return Err(match self.kind {
                GapKind::Spectral => EncircleError::GapCollapse { gap },
                GapKind::Dynamic => EncircleError::EffectiveGapCollapse { gap, theta },
            });
        }
        Ok(g)
    }

    fn span(&mut self, a: f64, b: f64, ga: C64, gb: C64, seg: usize, depth: u32) -> Result<()> {
        let d = (gb / ga).arg();
        if d.abs() < PI / 2.0 {
            self.total += d;
            return Ok(());
        }
        if depth >= MAX_BISECTIONS {
            return Err(EncircleError::RefinementLimit);
        }
        let m = 0.5 * (a + b);
        let gm = self.eval(m, seg)?;
        self.span(a, m, ga, gm, seg, depth + 1)?;
        self.span(m, b, gm, gb, seg, depth + 1)
    }
}

fn vorticity(kind: GapKind, hspec: &HamiltonianSpec, lspec: &LoopSpec, grid: usize) -> Result<VorticityResult> {
    hspec.validate()?;
    lspec.validate()?;
    if grid < 256 {
        return Err(EncircleError::InvalidSpec { field: "grid", reason: format!("must be ≥ 256, got {grid}") });
    }
    if kind == GapKind::Dynamic && hspec.family == Family::Custom {
        return Err(EncircleError::InvalidSpec {
            field: "hamiltonian.family",
            reason: "the transported frame needs a PT or APT family".into(),
        });
    }
    let mut u = Unwrapper { kind, hspec, lspec, total: 0.0, gap_min: f64::INFINITY };
    let times = sample_grid(lspec.period, grid + 1);
    let mut seg = lspec.segment_index(0.0);
    let mut g = u.eval(0.0, seg)?;
    let first = g;
    let record = |t: f64, seg: usize, g: C64, total: f64| {
        let half = 0.5 * (first.arg() + total);
        WindingSample {
            t,
            theta: lspec.point_in_segment(t, seg).theta,
            gap: C64::from_polar(2.0 * g.norm().sqrt(), half),
            unwrapped_arg: half,
        }
    };
    let mut trace = vec![record(0.0, seg, g, 0.0)];
    for w in times.windows(2) {
        for (a, b, s) in lspec.pieces(w[0], w[1]) {
            if s != seg {
                // the radius jumps at a noise boundary; take the short way
                let after = u.eval(a, s)?;
                u.total += (after / g).arg();
                g = after;
                seg = s;
            }
            let gb = u.eval(b, s)?;
            u.span(a, b, g, gb, s, 0)?;
            g = gb;
        }
        trace.push(record(w[1], seg, g, u.total));
    }
    // close the loop on the starting slice
    let end_seg = lspec.segment_index(lspec.period);
    if end_seg != seg {
        let closing = u.eval(lspec.period, end_seg)?;
        u.total += (closing / g).arg();
    }

    let raw = -u.total / (2.0 * TAU);
    let quantized = (2.0 * raw).round() / 2.0;
    let residual = (raw - quantized).abs();
    Ok(VorticityResult {
        raw,
        quantized,
        residual,
        is_quantized: residual < QUANTIZATION_TOLERANCE,
        enclosed_eps: enclosed_ep_count(lspec, hspec.gamma).ok(),
        gap_min: u.gap_min,
        trace,
    })
}

/// Winding of the bare gap `λ₊ − λ₋`.
pub fn spectral_vorticity(hspec: &HamiltonianSpec, lspec: &LoopSpec, grid: usize) -> Result<VorticityResult> {
    vorticity(GapKind::Spectral, hspec, lspec, grid)
}

/// Winding of the transported-frame gap `Ẽ₊ − Ẽ₋ = 2·sqrt(λ² − f²)`.
pub fn dynamic_vorticity(hspec: &HamiltonianSpec, lspec: &LoopSpec, grid: usize) -> Result<VorticityResult> {
    vorticity(GapKind::Dynamic, hspec, lspec, grid)
}

/// Distance from `(Δ = 0, J = j_ep)` to the (possibly noisy) loop.
fn distance_to_loop(lspec: &LoopSpec, j_ep: f64) -> f64 {
    let d = (j_ep - lspec.j_center).abs();
    if !lspec.is_noisy() {
        return (d - lspec.radius).abs();
    }
    // direction of the EP seen from the loop center
    let phi = if j_ep >= lspec.j_center { 0.0 } else { PI };
    let n = lspec.noise_segments;
    let width = lspec.period / n as f64;
    (0..n)
        .map(|k| {
            let rho = lspec.radius * (1.0 + lspec.kappa(k));
            let (t0, t1) = (k as f64 * width, (k + 1) as f64 * width);
            let th0 = lspec.omega() * t0 + lspec.theta0;
            let sweep = lspec.omega() * (t1 - t0);
            let (lo, len) = if sweep >= 0.0 { (th0, sweep) } else { (th0 + sweep, -sweep) };
            if (phi - lo).rem_euclid(TAU) <= len {
                (d - rho).abs()
            } else {
                [lo, lo + len]
                    .iter()
                    .map(|&th| {
                        let (s, c) = th.sin_cos();
                        (rho * s).hypot(lspec.j_center + rho * c - j_ep)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Winding of the loop about `(Δ = 0, J = j_ep)`, sampled along the traversal.
fn loop_winding(lspec: &LoopSpec, j_ep: f64) -> i64 {
    let per_slice = 32;
    let n = lspec.noise_segments;
    let width = lspec.period / n as f64;
    let angle = |t: f64, k: usize| {
        let p = lspec.point_in_segment(t, k);
        (p.j - j_ep).atan2(p.delta)
    };
    let mut total = 0.0;
    let mut prev = angle(0.0, 0);
    for k in 0..n {
        for i in 0..=per_slice {
            let t = (k as f64 + i as f64 / per_slice as f64) * width;
            let a = angle(t, k);
            total += (a - prev + PI).rem_euclid(TAU) - PI;
            prev = a;
        }
    }
    total += (angle(0.0, 0) - prev + PI).rem_euclid(TAU) - PI;
    (total / TAU).round() as i64
}

/// Number of EPs (`Δ = 0, J = ±γ`) encircled by the loop.
pub fn enclosed_ep_count(lspec: &LoopSpec, gamma: f64) -> Result<u32> {
    let eps: Vec<f64> = if gamma == 0.0 { vec![0.0] } else { vec![gamma, -gamma] };
    let mut count = 0;
    for j_ep in eps {
        let distance = distance_to_loop(lspec, j_ep);
        if distance < EP_TOLERANCE {
            return Err(EncircleError::EPOnPath { distance });
        }
        if loop_winding(lspec, j_ep) != 0 {
            count += 1;
        }
    }
    Ok(count)
}
