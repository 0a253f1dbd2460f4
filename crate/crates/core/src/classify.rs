//! Chirality and reciprocity: symmetry-based predictions and verdicts from
//! simulated endpoints.
//!
//! Chirality is predicted from the initial transported-frame Hamiltonian:
//! the loop is chiral when `H̃(0)` anticommutes with the antilinear
//! `𝒮 = 𝒞𝒫𝒯`, `𝒮[M] = U·M̄·U⁻¹` with `U = σ_z·σ_x`.
//!
//! Reciprocity is predicted from the sign of the leading nonvanishing
//! time derivative of the normalized `⟨O⟩` at `t = 0`, where `O = σ_z` for
//! PT families and the rotated `R_y(π/2)·σ_z·R_y(−π/2)` for APT ones. For an
//! eigenstate on the symmetric side of the loop the expectation and its
//! first two derivatives all vanish, so the sign comes from the Taylor
//! series of `⟨O⟩(t)` at higher order.

use serde::{Deserialize, Serialize};

use crate::error::{EncircleError, Result};
use crate::evolve::{initial_eigenbasis, propagate, schrodinger_rhs, transfer_fidelity, TrajectoryRecord};
use crate::linalg::{pauli, CMat2, CVec2, Pauli, I, ZERO};
use crate::model::{build, time_derivative, EigenPair, HamiltonianSpec};
use crate::ode::{DormandPrince, Tolerances};
use crate::path::LoopSpec;
use crate::transport::{detect_transitions, frame_at};

/// `|⟨O⟩|` below which derivatives decide.
pub const DERIV_GATE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiralityReport {
    pub anticommutator_residual: f64,
    pub tolerance: f64,
    pub predicted_chiral: bool,
    pub operator_used: String,
}

/// `U·M̄·U⁻¹` with `U = σ_z·σ_x`.
pub fn antilinear_image(m: &CMat2) -> CMat2 {
    CMat2::new(m.m11.conj(), -m.m10.conj(), -m.m01.conj(), m.m00.conj())
}

pub fn chirality_test(h_tilde0: &CMat2) -> ChiralityReport {
    let residual = (antilinear_image(h_tilde0) + *h_tilde0).norm();
    let tolerance = 1e-8 * h_tilde0.norm();
    ChiralityReport {
        anticommutator_residual: residual,
        tolerance,
        predicted_chiral: residual <= tolerance,
        operator_used: "S = CPT, S[M] = U conj(M) U^-1, U = sigma_z sigma_x".into(),
    }
}

/// Highest Taylor order inspected for the sign of `⟨O⟩(t)`.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocityReport {
    /// `⟨O⟩` at `t = 0`.
    pub sz_expectation: f64,
    /// `d⟨O⟩/dt` at 0 by symmetric finite difference.
    pub sz_derivative: f64,
    pub sz_derivative_analytic: f64,
    /// `d²⟨O⟩/dt²` at 0 by finite difference.
    pub sz_second_derivative: f64,
    pub sz_second_derivative_analytic: f64,
    /// Taylor coefficients `s_k` of `⟨O⟩(t) = Σ s_k t^k`, `k = 0..=MAX_ORDER`.
    pub taylor: Vec<f64>,
    /// Order whose sign decided the prediction (0 for `⟨O⟩` itself).
    pub decided_by_order: usize,
    pub predicted_reciprocal: bool,
}

/// The population-imbalance observable for a family.
pub fn reciprocity_observable(hspec: &HamiltonianSpec) -> CMat2 {
    let f = hspec.frame_rotation();
    f * pauli(Pauli::Z) * f.transpose()
}

fn expectation(o: &CMat2, psi: &CVec2) -> f64 {
    psi.inner(&o.apply(psi)).re / psi.norm_sqr()
}

/// Taylor coefficients of `H(t)` about 0 on the first slice of the loop.
fn hamiltonian_series(hspec: &HamiltonianSpec, lspec: &LoopSpec, order: usize) -> Result<Vec<CMat2>> {
    let seg = lspec.segment_index(0.0);
    let p = lspec.point_in_segment(0.0, seg);
    let rho = lspec.radius * (1.0 + p.kappa);
    let w = lspec.omega();
    let mut out = vec![build(hspec, p.delta, p.j)?];
    let mut fact = 1.0;
    for k in 1..=order {
        fact *= k as f64;
        let phase = p.theta + k as f64 * std::f64::consts::FRAC_PI_2;
        let scale = rho * w.powi(k as i32) / fact;
        out.push(time_derivative(hspec, scale * phase.sin(), scale * phase.cos()));
    }
    Ok(out)
}

/// Taylor coefficients of `⟨ψ|O|ψ⟩/⟨ψ|ψ⟩` for `iψ̇ = Hψ`.
fn expectation_series(o: &CMat2, hs: &[CMat2], psi0: &CVec2) -> Vec<f64> {
    let n = hs.len();
    let mut psi = vec![*psi0];
    for k in 0..n - 1 {
        // (k+1) ψ_{k+1} = −i Σ_j H_j ψ_{k−j}
        let mut acc = CVec2::new(ZERO, ZERO);
        for j in 0..=k {
            acc = acc + hs[j].apply(&psi[k - j]);
        }
        psi.push(acc.scale_c(-I).scale(1.0 / (k + 1) as f64));
    }
    let id = CMat2::identity();
    let series = |m: &CMat2| -> Vec<f64> {
        (0..n)
            .map(|k| (0..=k).map(|j| psi[j].inner(&m.apply(&psi[k - j])).re).sum())
            .collect()
    };
    let (num, den) = (series(o), series(&id));
    let mut q = vec![0.0; n];
    for k in 0..n {
        let mut r = num[k];
        for j in 0..k {
            r -= q[j] * den[k - j];
        }
        q[k] = r / den[0];
    }
    q
}

/// `⟨O⟩` after propagating `ψ0` from 0 to `t` (either sign) on the first
/// slice's analytic path.
fn propagated_expectation(hspec: &HamiltonianSpec, lspec: &LoopSpec, o: &CMat2, psi0: &CVec2, t: f64) -> Result<f64> {
    let mut dp = DormandPrince::new(Tolerances { rtol: 1e-14, atol: 1e-16 });
    let seg = lspec.segment_index(0.0);
    let y = dp.advance(
        |tt, y| {
            let p = lspec.point_in_segment(tt, seg);
            schrodinger_rhs(&build(hspec, p.delta, p.j).expect("validated spec"), y)
        },
        0.0,
        psi0.to_array(),
        t,
    )?;
    Ok(expectation(o, &CVec2::from_array(&y)))
}

pub fn reciprocity_test(psi0: &CVec2, hspec: &HamiltonianSpec, lspec: &LoopSpec) -> Result<ReciprocityReport> {
    hspec.validate()?;
    lspec.validate()?;
    if hspec.family == crate::model::Family::Custom {
        return Err(EncircleError::InvalidSpec {
            field: "hamiltonian.family",
            reason: "reciprocity needs a path-dependent Hamiltonian".into(),
        });
    }
    let psi = psi0.normalize();
    let o = reciprocity_observable(hspec);
    let hs = hamiltonian_series(hspec, lspec, MAX_ORDER)?;
    let taylor = expectation_series(&o, &hs, &psi);
    let s0 = taylor[0];

    let h1 = lspec.period * 1e-6;
    let (sp, sm) = (
        propagated_expectation(hspec, lspec, &o, &psi, h1)?,
        propagated_expectation(hspec, lspec, &o, &psi, -h1)?,
    );
    let s1 = (sp - sm) / (2.0 * h1);
    let h2 = lspec.period * 1e-4;
    let (sp, sm) = (
        propagated_expectation(hspec, lspec, &o, &psi, h2)?,
        propagated_expectation(hspec, lspec, &o, &psi, -h2)?,
    );
    let s2 = (sp - 2.0 * s0 + sm) / (h2 * h2);

    // s_k carries units of rate^k; compare against the natural rate scale.
    let rate = hs[0].norm() + lspec.omega();
    let mut decided = (0, s0 > 0.0);
    if s0.abs() < DERIV_GATE {
        decided = (MAX_ORDER, taylor[MAX_ORDER] > 0.0);
        for (k, &sk) in taylor.iter().enumerate().skip(1) {
            if sk.abs() >= DERIV_GATE * rate.powi(k as i32) {
                decided = (k, sk > 0.0);
                break;
            }
        }
    }
    Ok(ReciprocityReport {
        sz_expectation: s0,
        sz_derivative: s1,
        sz_derivative_analytic: taylor[1],
        sz_second_derivative: s2,
        sz_second_derivative_analytic: 2.0 * taylor[2],
        taylor,
        decided_by_order: decided.0,
        predicted_reciprocal: decided.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Chiral,
    Nonchiral,
    Reciprocal,
    Nonreciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Same initial state, opposite directions.
    Chirality,
    /// The second run starts where the first ended and goes back.
    Reciprocity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunEvidence {
    pub initial: Endpoint,
    pub final_state: Endpoint,
    pub fidelity_alpha: f64,
    pub fidelity_beta: f64,
    pub crossings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub kind: PairKind,
    pub relation: Relation,
    pub first: RunEvidence,
    pub second: RunEvidence,
}

fn dominant(fa: f64, fb: f64) -> Result<Endpoint> {
    let band = 0.4..=0.6;
    if band.contains(&fa) && band.contains(&fb) {
        return Err(EncircleError::AmbiguousEndpoint { f_alpha: fa, f_beta: fb });
    }
    Ok(if fa >= fb { Endpoint::Alpha } else { Endpoint::Beta })
}

fn evidence(run: &TrajectoryRecord, eig0: &EigenPair) -> Result<RunEvidence> {
    let targets = (eig0.v_plus.normalize(), eig0.v_minus.normalize());
    let psi0 = run.first().psi;
    let (ia, ib) = (targets.0.overlap(&psi0), targets.1.overlap(&psi0));
    let initial = if ia >= ib { Endpoint::Alpha } else { Endpoint::Beta };
    let (fa, fb) = transfer_fidelity(run, targets);
    Ok(RunEvidence {
        initial,
        final_state: dominant(fa, fb)?,
        fidelity_alpha: fa,
        fidelity_beta: fb,
        crossings: detect_transitions(run)?.len(),
    })
}

/// Empirical relation of two runs sharing the loop geometry. `eig0` is the
/// eigenbasis at the common start point.
pub fn classify_pair(first: &TrajectoryRecord, second: &TrajectoryRecord, kind: PairKind, eig0: &EigenPair) -> Result<PairVerdict> {
    let a = evidence(first, eig0)?;
    let b = evidence(second, eig0)?;
    let relation = match kind {
        PairKind::Chirality => {
            if a.final_state != b.final_state {
                Relation::Chiral
            } else {
                Relation::Nonchiral
            }
        }
        PairKind::Reciprocity => {
            if b.final_state == a.initial {
                Relation::Reciprocal
            } else {
                Relation::Nonreciprocal
            }
        }
    };
    Ok(PairVerdict { kind, relation, first: a, second: b })
}

/// One row of the pairing table: trajectories are numbered 1–8 with
/// 1–4 starting in the PT-symmetric regime and 5–8 in the broken one;
/// odd numbers start in `α` or `β` per [`trajectory_setup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRow {
    pub kind: PairKind,
    pub first: u8,
    pub second: u8,
    pub relation: Relation,
}

/// The published pairing of the eight trajectories.
pub const PAIR_TABLE: [PairRow; 12] = [
    PairRow { kind: PairKind::Chirality, first: 1, second: 2, relation: Relation::Chiral },
    PairRow { kind: PairKind::Chirality, first: 3, second: 4, relation: Relation::Chiral },
    PairRow { kind: PairKind::Chirality, first: 5, second: 6, relation: Relation::Nonchiral },
    PairRow { kind: PairKind::Chirality, first: 7, second: 8, relation: Relation::Nonchiral },
    PairRow { kind: PairKind::Reciprocity, first: 1, second: 4, relation: Relation::Reciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 4, second: 1, relation: Relation::Reciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 5, second: 6, relation: Relation::Reciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 6, second: 5, relation: Relation::Reciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 2, second: 1, relation: Relation::Nonreciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 3, second: 4, relation: Relation::Nonreciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 7, second: 6, relation: Relation::Nonreciprocal },
    PairRow { kind: PairKind::Reciprocity, first: 8, second: 5, relation: Relation::Nonreciprocal },
];

/// Start angle, direction and initial eigenstate of trajectory `n` (1–8).
///
/// | n | start | direction | state |
/// |---|-------|-----------|-------|
/// | 1 | θ₀=0  | CW  | α |
/// | 2 | θ₀=0  | CCW | α |
/// | 3 | θ₀=0  | CW  | β |
/// | 4 | θ₀=0  | CCW | β |
/// | 5–8 | θ₀=π | as 1–4 | as 1–4 |
pub fn trajectory_setup(n: u8) -> Option<(f64, crate::path::Direction, Endpoint)> {
    use crate::path::Direction::{Clockwise, CounterClockwise};
    if !(1..=8).contains(&n) {
        return None;
    }
    let theta0 = if n <= 4 { 0.0 } else { std::f64::consts::PI };
    let k = (n - 1) % 4;
    let dir = if k.is_multiple_of(2) { Clockwise } else { CounterClockwise };
    let state = if k < 2 { Endpoint::Alpha } else { Endpoint::Beta };
    Some((theta0, dir, state))
}

/// The Relation predicted by the symmetry tests for a table row.
pub fn predict(row: &PairRow, chirality: &ChiralityReport, reciprocity: &ReciprocityReport) -> Relation {
    match row.kind {
        PairKind::Chirality => {
            if chirality.predicted_chiral {
                Relation::Chiral
            } else {
                Relation::Nonchiral
            }
        }
        PairKind::Reciprocity => {
            if reciprocity.predicted_reciprocal {
                Relation::Reciprocal
            } else {
                Relation::Nonreciprocal
            }
        }
    }
}

/// Noise-free run of trajectory `n` on the standard loop with `loop_template`'s
/// geometry, plus the eigenbasis at its start point.
pub fn run_trajectory(hspec: &HamiltonianSpec, loop_template: &LoopSpec, n: u8) -> Result<(TrajectoryRecord, EigenPair)> {
    let (theta0, direction, state) = trajectory_setup(n).ok_or_else(|| EncircleError::InvalidSpec {
        field: "trajectory",
        reason: format!("{n} is not in 1..=8"),
    })?;
    let lspec = LoopSpec { theta0, direction, ..*loop_template };
    let eig = initial_eigenbasis(hspec, &lspec)?;
    let psi0 = match state {
        Endpoint::Alpha => eig.v_plus,
        Endpoint::Beta => eig.v_minus,
    };
    Ok((propagate(hspec, &lspec, psi0, lspec.samples)?, eig))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub row: PairRow,
    pub empirical: PairVerdict,
    pub predicted: Relation,
    pub chirality: ChiralityReport,
    pub reciprocity: ReciprocityReport,
}

impl RowReport {
    pub fn agrees(&self) -> bool {
        self.empirical.relation == self.row.relation && self.predicted == self.row.relation
    }
}

/// Runs every row of [`PAIR_TABLE`] for one family.
pub fn pair_table_report(hspec: &HamiltonianSpec, loop_template: &LoopSpec) -> Result<Vec<RowReport>> {
    let mut runs = Vec::with_capacity(8);
    for n in 1..=8 {
        runs.push(run_trajectory(hspec, loop_template, n)?);
    }
    PAIR_TABLE
        .iter()
        .map(|row| {
            let (first, eig) = &runs[row.first as usize - 1];
            let (second, _) = &runs[row.second as usize - 1];
            let empirical = classify_pair(first, second, row.kind, eig)?;
            let frame = frame_at(hspec, &first.path, 0.0)?;
            let chirality = chirality_test(&frame.h_tilde);
            let reciprocity = reciprocity_test(&first.first().psi, hspec, &first.path)?;
            let predicted = predict(row, &chirality, &reciprocity);
            Ok(RowReport { row: *row, empirical, predicted, chirality, reciprocity })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::model::Family;
    use crate::path::Direction;

    fn pt() -> HamiltonianSpec {
        HamiltonianSpec::new(Family::PtPassive, 0.06)
    }

    #[test]
    fn start_a_is_chiral_start_b_is_not() {
        let a = frame_at(&pt(), &LoopSpec::start_a(Direction::Clockwise), 0.0).unwrap();
        let r = chirality_test(&a.h_tilde);
        assert!(r.predicted_chiral && r.anticommutator_residual < 1e-10);
        let b = frame_at(&pt(), &LoopSpec::start_b(Direction::Clockwise), 0.0).unwrap();
        assert!(!chirality_test(&b.h_tilde).predicted_chiral);
    }

    #[test]
    fn chirality_is_scale_invariant() {
        let b = frame_at(&pt(), &LoopSpec::start_b(Direction::Clockwise), 0.0).unwrap();
        let a = frame_at(&pt(), &LoopSpec::start_a(Direction::Clockwise), 0.0).unwrap();
        for k in [-3.0, 0.5, 7.0] {
            assert!(!chirality_test(&(b.h_tilde * k)).predicted_chiral);
            assert!(chirality_test(&(a.h_tilde * k)).predicted_chiral);
        }
    }

    #[test]
    fn hermitian_diagonal_anticommutes() {
        let lam = 0.05;
        let h = CMat2::diag(c(lam, 0.0), c(-lam, 0.0));
        assert_eq!(antilinear_image(&h), -h);
    }

    #[test]
    fn apt_duality() {
        let apt = HamiltonianSpec::new(Family::AptPassive, 0.06);
        for th0 in [0.0, std::f64::consts::PI] {
            let l = LoopSpec::standard(th0, Direction::Clockwise);
            let a = chirality_test(&frame_at(&apt, &l, 0.0).unwrap().h_tilde);
            let p = chirality_test(&frame_at(&pt(), &l, 0.0).unwrap().h_tilde);
            assert_eq!(a.predicted_chiral, p.predicted_chiral);
        }
    }

    #[test]
    fn basis_state_expectation() {
        let r = reciprocity_test(&CVec2::from_real(1.0, 0.0), &pt(), &LoopSpec::start_a(Direction::Clockwise)).unwrap();
        assert!((r.sz_expectation - 1.0).abs() < 1e-15);
        assert_eq!(r.decided_by_order, 0);
    }

    #[test]
    fn analytic_rates_match_finite_differences() {
        let l = LoopSpec::start_a(Direction::Clockwise);
        for psi in [CVec2::new(c(0.3, 0.2), c(-0.5, 0.4)), CVec2::from_real(0.6, 0.8)] {
            for fam in [Family::PtPassive, Family::AptPassive] {
                let r = reciprocity_test(&psi, &HamiltonianSpec::new(fam, 0.06), &l).unwrap();
                assert!((r.sz_derivative - r.sz_derivative_analytic).abs() <= 1e-6 * r.sz_derivative_analytic.abs().max(1e-6));
                assert!((r.sz_second_derivative - r.sz_second_derivative_analytic).abs() <= 1e-4 * r.sz_second_derivative_analytic.abs().max(1e-6));
            }
        }
    }

    #[test]
    fn start_a_eigenstates_decided_at_third_order() {
        let l = LoopSpec::start_a(Direction::Clockwise);
        let e = initial_eigenbasis(&pt(), &l).unwrap();
        let a = reciprocity_test(&e.v_plus, &pt(), &l).unwrap();
        assert!(a.sz_expectation.abs() < 1e-12);
        assert!(a.sz_derivative_analytic.abs() < 1e-15);
        assert!(a.decided_by_order >= 3, "{a:?}");
        assert!(a.predicted_reciprocal);
        let b = reciprocity_test(&e.v_plus, &pt(), &l.reversed()).unwrap();
        assert!(!b.predicted_reciprocal);
    }

    #[test]
    fn start_b_beta_is_negative() {
        let l = LoopSpec::start_b(Direction::Clockwise);
        let e = initial_eigenbasis(&pt(), &l).unwrap();
        let r = reciprocity_test(&e.v_minus, &pt(), &l).unwrap();
        // |β|² split (γ−|λ|, γ+|λ|)/(2γ) at J = 0.03
        let lam = (0.06f64 * 0.06 - 0.03 * 0.03).sqrt();
        assert!((r.sz_expectation + lam / 0.06).abs() < 1e-12);
        assert!(!r.predicted_reciprocal);
    }

    #[test]
    fn first_pair_verdicts() {
        let l = LoopSpec::start_a(Direction::Clockwise);
        let e = initial_eigenbasis(&pt(), &l).unwrap();
        let t1 = propagate(&pt(), &l, e.v_plus, 501).unwrap();
        let t2 = propagate(&pt(), &l.reversed(), e.v_plus, 501).unwrap();
        let v = classify_pair(&t1, &t2, PairKind::Chirality, &e).unwrap();
        assert_eq!(v.relation, Relation::Chiral);
        assert_eq!((v.first.crossings, v.second.crossings), (0, 1));
        let v = classify_pair(&t2, &t1, PairKind::Reciprocity, &e).unwrap();
        assert_eq!(v.relation, Relation::Nonreciprocal);
    }

    #[test]
    fn taylor_series_matches_propagation() {
        let h = pt();
        let l = LoopSpec::start_a(Direction::CounterClockwise);
        let e = initial_eigenbasis(&h, &l).unwrap();
        let r = reciprocity_test(&e.v_minus, &h, &l).unwrap();
        let o = reciprocity_observable(&h);
        for t in [0.5, 1.0, 2.0] {
            let direct = propagated_expectation(&h, &l, &o, &e.v_minus, t).unwrap();
            let series: f64 = r.taylor.iter().enumerate().map(|(k, s)| s * t.powi(k as i32)).sum();
            assert!((direct - series).abs() < 1e-9 * t.powi(7).max(1.0), "t={t}: {direct} vs {series}");
        }
    }

    #[test]
    fn ambiguous_endpoints_are_reported() {
        assert!(matches!(dominant(0.5, 0.45), Err(EncircleError::AmbiguousEndpoint { .. })));
        assert_eq!(dominant(0.99, 0.45).unwrap(), Endpoint::Alpha);
    }

    #[test]
    fn setups_cover_the_table() {
        assert_eq!(trajectory_setup(1), Some((0.0, Direction::Clockwise, Endpoint::Alpha)));
        assert_eq!(trajectory_setup(4), Some((0.0, Direction::CounterClockwise, Endpoint::Beta)));
        assert_eq!(trajectory_setup(7).unwrap().2, Endpoint::Beta);
        assert_eq!(trajectory_setup(9), None);
    }
}
