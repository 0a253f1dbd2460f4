//! The parallel-transported eigenframe.
//!
//! With `T = [α β]` (columns in the bilinear normalization, so `T⁻¹ = Tᵀ`),
//! `ψ = T·ψ̃` turns the Schrödinger equation into `i∂ₜψ̃ = H̃ψ̃` with
//!
//! ```text
//! H̃ = [[s + λ₊,  f    ],
//!      [−f,      s − λ₊]],   f = [J(Δ̇/2 + iγ̇) − J̇(Δ/2 + iγ)] / (2iλ²)
//! ```
//!
//! where `s` is the `−iγ` shift of the passive families. The components of
//! `ψ̃` are exactly the eigen-coefficients `(C₁, C₂)`, and their ratios obey
//!
//! ```text
//! Ṙ₁ =  2iλ₊R₁ + if(1 + R₁²),   R₁ = C₂/C₁
//! Ṙ₂ = −2iλ₊R₂ − if(1 + R₂²),   R₂ = C₁/C₂
//! ```
//!
//! The APT frame is the PT frame rotated by `R_y(π/2)`, so `H̃` and the
//! Riccati equations are shared by both families.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{EncircleError, Result};
use crate::evolve::{adiabaticity, schrodinger_rhs, TrajectoryRecord};
use crate::linalg::{c, nearest_sign, CMat2, CVec2, C64, I};
use crate::model::{
    build, complex_detuning, eigen_root, eigensystem, eigensystem_continued, lambda_squared, EigenPair, HamiltonianSpec,
    EP_TOLERANCE,
};
use crate::ode::{DormandPrince, Tolerances};
use crate::path::{sample_grid, LoopSpec, PathPoint, PathRate};

/// Default `τ_crit/T` below which a crossing is attributed to dissipation.
pub const SNAT_THRESHOLD: f64 = 0.1;

const BLOWUP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportFrame {
    pub t: f64,
    /// Complex mixing angle, `tan θ = J/(Δ/2 + iγ)`.
    pub theta_c: C64,
    /// `[α β]`, with `T·Tᵀ = I`.
    pub t_mat: CMat2,
    pub f: C64,
    pub h_tilde: CMat2,
    pub e_plus: C64,
    pub e_minus: C64,
    /// Traceless root `λ₊` in this frame's labelling.
    pub lambda: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Amplitude {
    /// `C₂/C₁`
    R1,
    /// `C₁/C₂`
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TransitionKind {
    Dnat,
    SnatCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t_us: f64,
    pub kind: TransitionKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RSeries {
    pub which: Amplitude,
    pub t: Vec<f64>,
    pub r: Vec<C64>,
    /// Interpolated times where `|R|` crosses 1.
    pub crossing_times: Vec<f64>,
}

impl RSeries {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t_us,re_R,im_R,abs_R")?;
        for (t, r) in self.t.iter().zip(&self.r) {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", t, r.re, r.im, r.norm())?;
        }
        Ok(())
    }
}

fn require_frame_family(hspec: &HamiltonianSpec) -> Result<()> {
    if hspec.family == crate::model::Family::Custom {
        return Err(EncircleError::InvalidSpec {
            field: "hamiltonian.family",
            reason: "the transported frame needs a PT or APT family".into(),
        });
    }
    Ok(())
}

/// Nonadiabatic coupling `f`. Independent of the sign of `λ`.
pub fn coupling(gamma: f64, point: &PathPoint, rate: &PathRate) -> C64 {
    let a = complex_detuning(point.delta, gamma);
    let w = lambda_squared(point.delta, point.j, gamma);
    (c(point.j * rate.delta / 2.0, 0.0) - a * rate.j) / (I * 2.0 * w)
}

fn effective_gap_root(lambda: C64, f: C64, reference: C64) -> C64 {
    nearest_sign((lambda * lambda - f * f).sqrt(), reference)
}

fn assemble(hspec: &HamiltonianSpec, point: &PathPoint, rate: &PathRate, eig: &EigenPair, gap_ref: C64) -> Result<TransportFrame> {
    if eig.gap.norm() < EP_TOLERANCE {
        return Err(EncircleError::EPSingularity { t: point.t });
    }
    let lambda = eig.root;
    let f = coupling(hspec.gamma, point, rate);
    let s = hspec.shift();
    let h_tilde = CMat2::new(s + lambda, f, -f, s - lambda);
    let a = complex_detuning(point.delta, hspec.gamma);
    let theta_c = -I * ((a + I * point.j) / lambda).ln();
    let root = effective_gap_root(lambda, f, gap_ref);
    Ok(TransportFrame {
        t: point.t,
        theta_c,
        t_mat: eig.basis(),
        f,
        h_tilde,
        e_plus: s + root,
        e_minus: s - root,
        lambda,
    })
}

/// Frame at `t`, with the pointwise sheet labelling of [`eigensystem`].
pub fn frame_at(hspec: &HamiltonianSpec, lspec: &LoopSpec, t: f64) -> Result<TransportFrame> {
    require_frame_family(hspec)?;
    let point = crate::path::path_at(lspec, t)?;
    let rate = crate::path::path_rate(lspec, t)?;
    let eig = eigensystem(hspec, point.delta, point.j).map_err(|_| EncircleError::EPSingularity { t })?;
    assemble(hspec, &point, &rate, &eig, eig.root)
}

/// Frames at `times`, continued from the one at the first time so that `T`,
/// `λ₊` and `Ẽ±` are continuous along the loop.
pub fn frames_along(hspec: &HamiltonianSpec, lspec: &LoopSpec, times: &[f64]) -> Result<Vec<TransportFrame>> {
    require_frame_family(hspec)?;
    let mut out: Vec<TransportFrame> = Vec::with_capacity(times.len());
    let mut eig: Option<EigenPair> = None;
    for &t in times {
        let point = crate::path::path_at(lspec, t)?;
        let rate = crate::path::path_rate(lspec, t)?;
        let next = match &eig {
            None => eigensystem(hspec, point.delta, point.j),
            Some(prev) => eigensystem_continued(hspec, point.delta, point.j, prev),
        }
        .map_err(|_| EncircleError::EPSingularity { t })?;
        let gap_ref = out.last().map(|f| f.e_plus - hspec.shift()).unwrap_or(next.root);
        out.push(assemble(hspec, &point, &rate, &next, gap_ref)?);
        eig = Some(next);
    }
    Ok(out)
}

/// `−i·Tᵀ·Ṫ + Tᵀ·H·T` with `Ṫ` from a central difference of step `dt`
/// inside the noise slice containing `t`.
pub fn h_tilde_finite_difference(hspec: &HamiltonianSpec, lspec: &LoopSpec, t: f64, dt: f64) -> Result<CMat2> {
    require_frame_family(hspec)?;
    let seg = lspec.segment_index(t);
    let at = |tt: f64| lspec.point_in_segment(tt, seg);
    let p0 = at(t);
    let e0 = eigensystem(hspec, p0.delta, p0.j)?;
    let (pm, pp) = (at(t - dt), at(t + dt));
    let em = eigensystem_continued(hspec, pm.delta, pm.j, &e0)?;
    let ep = eigensystem_continued(hspec, pp.delta, pp.j, &e0)?;
    let t_mat = e0.basis();
    let t_dot = (ep.basis() - em.basis()) * (1.0 / (2.0 * dt));
    let h = build(hspec, p0.delta, p0.j)?;
    Ok(t_mat.transpose() * t_dot * (-I) + t_mat.transpose() * h * t_mat)
}

/// Local `(λ₊, f)` with `λ₊` kept on the sheet of `reference`.
fn local_root_and_coupling(hspec: &HamiltonianSpec, lspec: &LoopSpec, t: f64, seg: usize, reference: C64) -> (C64, C64) {
    let p = lspec.point_in_segment(t, seg);
    let r = lspec.rate_in_segment(t, seg);
    let root = nearest_sign(eigen_root(lambda_squared(p.delta, p.j, hspec.gamma)), reference);
    (root, coupling(hspec.gamma, &p, &r))
}

/// Change of frame at a noise jump: `C_after = T_afterᵀ·T_before·C_before`.
fn jump_matrix(hspec: &HamiltonianSpec, lspec: &LoopSpec, t: f64, before: usize, after: usize, eig: &EigenPair) -> Result<(CMat2, EigenPair)> {
    let pb = lspec.point_in_segment(t, before);
    let pa = lspec.point_in_segment(t, after);
    let eb = eigensystem_continued(hspec, pb.delta, pb.j, eig)?;
    let ea = eigensystem_continued(hspec, pa.delta, pa.j, &eb)?;
    Ok((ea.basis().transpose() * eb.basis(), ea))
}

fn crossings_of_one(t: &[f64], mag: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..t.len() {
        let (a, b) = (mag[k - 1] - 1.0, mag[k] - 1.0);
        if (a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0) {
            out.push(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
        }
    }
    out
}

/// Integrates the Riccati equation for `R₁` or `R₂` from `R(0) = 0`.
pub fn integrate_r(hspec: &HamiltonianSpec, lspec: &LoopSpec, which: Amplitude, samples: usize) -> Result<RSeries> {
    hspec.validate()?;
    lspec.validate()?;
    require_frame_family(hspec)?;
    let times = sample_grid(lspec.period, samples.max(2));
    let p0 = crate::path::path_at(lspec, 0.0)?;
    let mut eig = eigensystem(hspec, p0.delta, p0.j).map_err(|_| EncircleError::EPSingularity { t: 0.0 })?;
    let sign = match which {
        Amplitude::R1 => 1.0,
        Amplitude::R2 => -1.0,
    };
    let mut dp = DormandPrince::new(Tolerances::default());
    let mut r = C64::new(0.0, 0.0);
    let mut out_r = vec![r];
    let mut reference = eig.root;
    let mut cur_seg = lspec.segment_index(0.0);
    let remap = |m: CMat2, r: C64| match which {
        Amplitude::R1 => (m.m10 + m.m11 * r) / (m.m00 + m.m01 * r),
        Amplitude::R2 => (m.m00 * r + m.m01) / (m.m10 * r + m.m11),
    };
    for w in times.windows(2) {
        for (a, b, seg) in lspec.pieces(w[0], w[1]) {
            if seg != cur_seg {
                let (m, after) = jump_matrix(hspec, lspec, a, cur_seg, seg, &eig)?;
                r = remap(m, r);
                eig = after;
                reference = eig.root;
                cur_seg = seg;
            }
            let mut last = reference;
            let y = dp
                .advance(
                    |t, y: &[f64; 2]| {
                        let (root, f) = local_root_and_coupling(hspec, lspec, t, seg, last);
                        last = root;
                        let rr = C64::new(y[0], y[1]);
                        let d = (I * 2.0 * root * rr + I * f * (rr * rr + 1.0)) * sign;
                        [d.re, d.im]
                    },
                    a,
                    [r.re, r.im],
                    b,
                )
                .map_err(|e| match e {
                    EncircleError::StepSizeUnderflow { t } => EncircleError::BlowUp { t },
                    other => other,
                })?;
            r = C64::new(y[0], y[1]);
            if !(r.norm() <= BLOWUP) {
                return Err(EncircleError::BlowUp { t: b });
            }
            let p = lspec.point_in_segment(b, seg);
            eig = eigensystem_continued(hspec, p.delta, p.j, &eig)?;
            reference = eig.root;
        }
        // a sample on a noise boundary is reported in the slice that starts there
        let end_seg = lspec.segment_index(w[1]);
        if end_seg != cur_seg {
            let (m, after) = jump_matrix(hspec, lspec, w[1], cur_seg, end_seg, &eig)?;
            r = remap(m, r);
            eig = after;
            reference = eig.root;
            cur_seg = end_seg;
        }
        out_r.push(r);
    }
    let mags: Vec<f64> = out_r.iter().map(|x| x.norm()).collect();
    let crossing_times = crossings_of_one(&times, &mags);
    Ok(RSeries { which, t: times, r: out_r, crossing_times })
}

/// Times where `|C₁|` and `|C₂|` exchange dominance, labelled by the
/// adiabaticity of the run.
pub fn detect_transitions(traj: &TrajectoryRecord) -> Result<Vec<Crossing>> {
    detect_transitions_with_threshold(traj, SNAT_THRESHOLD)
}

pub fn detect_transitions_with_threshold(traj: &TrajectoryRecord, snat_threshold: f64) -> Result<Vec<Crossing>> {
    let ratio = adiabaticity(&traj.hamiltonian, &traj.path, 1024)?.ratio;
    let kind = if ratio < snat_threshold { TransitionKind::Dnat } else { TransitionKind::SnatCandidate };
    let t: Vec<f64> = traj.samples.iter().map(|s| s.t()).collect();
    let ratio_mag: Vec<f64> = traj.samples.iter().map(|s| s.c2.norm() / s.c1.norm()).collect();
    Ok(crossings_of_one(&t, &ratio_mag).into_iter().map(|t_us| Crossing { t_us, kind }).collect())
}

/// Propagates `ψ̃` under `H̃` and maps back with `T`; the result should be
/// the directly propagated normalized state.
pub fn propagate_transported(hspec: &HamiltonianSpec, lspec: &LoopSpec, psi0: CVec2, samples: usize) -> Result<Vec<CVec2>> {
    hspec.validate()?;
    lspec.validate()?;
    require_frame_family(hspec)?;
    let times = sample_grid(lspec.period, samples.max(2));
    let p0 = crate::path::path_at(lspec, 0.0)?;
    let mut eig = eigensystem(hspec, p0.delta, p0.j).map_err(|_| EncircleError::EPSingularity { t: 0.0 })?;
    let mut coeff = eig.basis().transpose().apply(&psi0.normalize());
    let mut dp = DormandPrince::new(Tolerances::default());
    let mut out = vec![eig.basis().apply(&coeff).normalize()];
    let mut cur_seg = lspec.segment_index(0.0);
    for w in times.windows(2) {
        for (a, b, seg) in lspec.pieces(w[0], w[1]) {
            if seg != cur_seg {
                let (m, after) = jump_matrix(hspec, lspec, a, cur_seg, seg, &eig)?;
                coeff = m.apply(&coeff);
                eig = after;
                cur_seg = seg;
            }
            let mut last = eig.root;
            let shift = hspec.shift();
            let y = dp.advance(
                |t, y| {
                    let (root, f) = local_root_and_coupling(hspec, lspec, t, seg, last);
                    last = root;
                    schrodinger_rhs(&CMat2::new(shift + root, f, -f, shift - root), y)
                },
                a,
                coeff.to_array(),
                b,
            )?;
            coeff = CVec2::from_array(&y);
            let p = lspec.point_in_segment(b, seg);
            eig = eigensystem_continued(hspec, p.delta, p.j, &eig)?;
        }
        let end_seg = lspec.segment_index(w[1]);
        if end_seg != cur_seg {
            let (m, after) = jump_matrix(hspec, lspec, w[1], cur_seg, end_seg, &eig)?;
            coeff = m.apply(&coeff);
            eig = after;
            cur_seg = end_seg;
        }
        let n = coeff.norm();
        if !(n > 1e-300) {
            return Err(EncircleError::DecayUnderflow { t: w[1] });
        }
        coeff = coeff.scale(1.0 / n);
        out.push(eig.basis().apply(&coeff).normalize());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{initial_eigenbasis, propagate};
    use crate::model::Family;
    use crate::path::Direction;

    fn pt() -> HamiltonianSpec {
        HamiltonianSpec::new(Family::PtPassive, 0.06)
    }

    #[test]
    fn static_parameters_give_no_coupling() {
        let p = PathPoint { t: 0.0, theta: 0.0, delta: 0.01, j: 0.08, kappa: 0.0 };
        let f = coupling(0.06, &p, &PathRate { delta: 0.0, j: 0.0 });
        assert_eq!(f, C64::new(0.0, 0.0));
    }

    #[test]
    fn start_a_coupling_is_imaginary() {
        let fr = frame_at(&pt(), &LoopSpec::start_a(Direction::Clockwise), 0.0).unwrap();
        assert!(fr.f.re.abs() < 1e-15 * fr.f.norm());
        // J̇ = 0 at the start, so f = J·Δ̇/(4iλ²)
        let omega = std::f64::consts::TAU / 250.0;
        let expected = c(0.09 * 0.03 * omega / 2.0, 0.0) / (I * 2.0 * (0.09f64 * 0.09 - 0.0036));
        assert!((fr.f - expected).norm() < 1e-15);
        assert!((fr.t_mat * fr.t_mat.transpose()).max_abs_diff(&CMat2::identity()) < 1e-12);
    }

    #[test]
    fn h_tilde_matches_finite_difference() {
        for fam in [Family::PtPassive, Family::PtTraceless, Family::AptPassive, Family::AptPseudo] {
            let spec = HamiltonianSpec::new(fam, 0.06);
            for (th0, dir) in [(0.0, Direction::Clockwise), (std::f64::consts::PI, Direction::CounterClockwise)] {
                let l = LoopSpec::standard(th0, dir);
                for t in [0.0, 31.0, 97.5, 180.0, 250.0] {
                    let fr = frame_at(&spec, &l, t).unwrap();
                    let fd = h_tilde_finite_difference(&spec, &l, t, 1e-3).unwrap();
                    assert!(fd.max_abs_diff(&fr.h_tilde) < 1e-6, "{fam:?} {t}");
                }
            }
        }
    }

    #[test]
    fn coupling_flips_with_direction() {
        let l = LoopSpec::start_a(Direction::Clockwise);
        for k in 0..20 {
            let t = 250.0 * k as f64 / 20.0;
            let a = frame_at(&pt(), &l, t).unwrap();
            let b = frame_at(&pt(), &l.reversed(), 250.0 - t).unwrap();
            assert!((a.f + b.f).norm() < 1e-14);
        }
    }

    #[test]
    fn effective_gap_is_continuous() {
        let l = LoopSpec::start_a(Direction::Clockwise);
        let frames = frames_along(&pt(), &l, &sample_grid(250.0, 1001)).unwrap();
        for w in frames.windows(2) {
            assert!(((w[1].e_plus - w[1].e_minus) - (w[0].e_plus - w[0].e_minus)).norm() < 0.01);
            let d = w[1].e_plus - w[1].e_minus;
            let lf = w[1].lambda * w[1].lambda - w[1].f * w[1].f;
            assert!((d * d - lf * 4.0).norm() < 1e-14);
        }
    }

    #[test]
    fn riccati_matches_direct_propagation() {
        for (th0, dir) in [(0.0, Direction::Clockwise), (0.0, Direction::CounterClockwise)] {
            let l = LoopSpec::standard(th0, dir);
            let e0 = initial_eigenbasis(&pt(), &l).unwrap();
            let traj = propagate(&pt(), &l, e0.v_plus, 1001).unwrap();
            let rs = integrate_r(&pt(), &l, Amplitude::R1, 1001).unwrap();
            for (s, r) in traj.samples.iter().zip(&rs.r) {
                let direct = s.c2 / s.c1;
                if direct.norm() < 10.0 {
                    assert!((direct - r).norm() < 1e-6, "t = {}", s.t());
                }
            }
        }
    }

    #[test]
    fn dnat_only_counterclockwise_from_a() {
        let l = LoopSpec::start_a(Direction::Clockwise);
        assert!(integrate_r(&pt(), &l, Amplitude::R1, 1001).unwrap().crossing_times.is_empty());
        let ccw = integrate_r(&pt(), &l.reversed(), Amplitude::R1, 1001).unwrap();
        assert_eq!(ccw.crossing_times.len(), 1);
        let e0 = initial_eigenbasis(&pt(), &l).unwrap();
        let traj = propagate(&pt(), &l.reversed(), e0.v_plus, 1001).unwrap();
        let events = detect_transitions(&traj).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].kind, TransitionKind::Dnat);
        assert!((events[0].t_us - ccw.crossing_times[0]).abs() < 0.5);
    }

    #[test]
    fn second_amplitude_from_beta() {
        let l = LoopSpec::start_b(Direction::Clockwise);
        let e0 = initial_eigenbasis(&pt(), &l).unwrap();
        let traj = propagate(&pt(), &l, e0.v_minus, 501).unwrap();
        let rs = integrate_r(&pt(), &l, Amplitude::R2, 501).unwrap();
        for (s, r) in traj.samples.iter().zip(&rs.r) {
            let direct = s.c1 / s.c2;
            if direct.norm() < 10.0 {
                assert!((direct - r).norm() < 1e-6, "t = {}", s.t());
            }
        }
    }

    #[test]
    fn transported_frame_is_exact() {
        let l = LoopSpec::start_a(Direction::CounterClockwise);
        let psi0 = CVec2::new(c(0.3, 0.2), c(-0.5, 0.4));
        let direct = propagate(&pt(), &l, psi0, 201).unwrap();
        let framed = propagate_transported(&pt(), &l, psi0, 201).unwrap();
        for (s, v) in direct.samples.iter().zip(&framed) {
            assert!((s.psi - *v).norm() < 1e-6);
        }
    }

    #[test]
    fn noisy_riccati_matches_direct_propagation() {
        let l = LoopSpec { noise_intensity: 0.5, seed: 11, ..LoopSpec::start_a(Direction::Clockwise) };
        let e0 = initial_eigenbasis(&pt(), &l).unwrap();
        let traj = propagate(&pt(), &l, e0.v_plus, 401).unwrap();
        let rs = integrate_r(&pt(), &l, Amplitude::R1, 401).unwrap();
        for (s, r) in traj.samples.iter().zip(&rs.r).skip(1) {
            let direct = s.c2 / s.c1;
            if direct.norm() < 10.0 {
                assert!((direct - r).norm() < 1e-6, "t = {}", s.t());
            }
        }
        let framed = propagate_transported(&pt(), &l, e0.v_plus, 401).unwrap();
        for (s, v) in traj.samples.iter().zip(&framed) {
            assert!((s.psi - *v).norm() < 1e-6);
        }
    }

    #[test]
    fn custom_family_has_no_frame() {
        let spec = HamiltonianSpec::custom(CMat2::identity());
        assert!(frame_at(&spec, &LoopSpec::start_a(Direction::Clockwise), 0.0).is_err());
    }
}
