//! Hamiltonian families, their closed-form spectra, and eigenbases in the
//! parallel-transport gauge.
//!
//! All rates are in μs⁻¹ with ħ = 1. The experimental "MHz" figures are used
//! numerically as μs⁻¹, which is what makes `T = 15/γ = 250 μs` at
//! `γ = 0.06` consistent.
//!
//! Sign convention: `λ₊` is the square root of `(Δ/2 + iγ)² + J²` with
//! argument in `(−π/4, 3π/4]`, paired with `α = (cos θ/2, sin θ/2)`. On the
//! `Δ = 0` axis this is the principal root (`+|λ|` for `J > γ`, `+i|λ|` for
//! `J < γ`), but the cut lies along `Re λ² = 0, Im λ² < 0` instead of on the
//! axis itself, so labels do not flip when a loop starts on that axis.

use serde::{Deserialize, Serialize};

use crate::error::{EncircleError, Result};
use crate::linalg::{c, nearest_sign, pauli, rotation_y, sqrt_principal, CMat2, CVec2, Pauli, C64, ZERO};

/// Default radius around an EP inside which eigenvectors are not returned.
pub const EP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// `[[Δ/2+iγ, J], [J, −Δ/2−iγ]]`
    PtTraceless,
    /// `PtTraceless − iγ·I`, the loss-only realization.
    PtPassive,
    /// `R_y(π/2)·PtPassive·R_y(−π/2)`
    AptPassive,
    /// `AptPassive + iγ·I`
    AptPseudo,
    Custom,
}

impl Family {
    pub fn is_apt(self) -> bool {
        matches!(self, Family::AptPassive | Family::AptPseudo)
    }

    pub fn is_passive(self) -> bool {
        matches!(self, Family::PtPassive | Family::AptPassive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub family: Family,
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom_matrix: Option<CMat2>,
}

impl HamiltonianSpec {
    pub fn new(family: Family, gamma: f64) -> Self {
        Self { family, gamma, custom_matrix: None }
    }

    pub fn custom(m: CMat2) -> Self {
        Self { family: Family::Custom, gamma: 0.0, custom_matrix: Some(m) }
    }

    /// Scalar shift `−iγ` carried by the passive families.
    pub fn shift(&self) -> C64 {
        if self.family.is_passive() {
            c(0.0, -self.gamma)
        } else {
            ZERO
        }
    }

    /// Fixed real rotation mapping PT eigenvectors onto this family's.
    pub fn frame_rotation(&self) -> CMat2 {
        if self.family.is_apt() {
            rotation_y(std::f64::consts::FRAC_PI_2)
        } else {
            CMat2::identity()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(EncircleError::InvalidSpec {
                field: "hamiltonian.gamma",
                reason: format!("must be finite and ≥ 0, got {}", self.gamma),
            });
        }
        if self.family == Family::Custom && self.custom_matrix.is_none() {
            return Err(EncircleError::MissingCustomMatrix);
        }
        Ok(())
    }
}

/// `a = Δ/2 + iγ`, the complex detuning that appears in every closed form.
#[inline]
pub fn complex_detuning(delta: f64, gamma: f64) -> C64 {
    c(delta / 2.0, gamma)
}

/// `λ² = (Δ/2 + iγ)² + J²`.
#[inline]
pub fn lambda_squared(delta: f64, j: f64, gamma: f64) -> C64 {
    let a = complex_detuning(delta, gamma);
    a * a + j * j
}

/// Root of `λ²` used to label the sheets; see the module docs.
pub fn eigen_root(w: C64) -> C64 {
    let eighth = c(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
    eighth * sqrt_principal(c(w.im, -w.re))
}

pub fn build(spec: &HamiltonianSpec, delta: f64, j: f64) -> Result<CMat2> {
    let a = complex_detuning(delta, spec.gamma);
    let jc = c(j, 0.0);
    let m = match spec.family {
        Family::PtTraceless => CMat2::new(a, jc, jc, -a),
        Family::PtPassive => CMat2::new(a, jc, jc, -a) + CMat2::identity().scale(spec.shift()),
        Family::AptPseudo => CMat2::new(-jc, a, a, jc),
        Family::AptPassive => CMat2::new(-jc, a, a, jc) + CMat2::identity().scale(spec.shift()),
        Family::Custom => spec.custom_matrix.ok_or(EncircleError::MissingCustomMatrix)?,
    };
    Ok(m)
}

/// `dH/dt` along a path moving at `(Δ̇, J̇)`. Zero for `Custom`.
pub fn time_derivative(spec: &HamiltonianSpec, d_delta: f64, d_j: f64) -> CMat2 {
    let h = c(d_delta / 2.0, 0.0);
    let jd = c(d_j, 0.0);
    match spec.family {
        Family::PtTraceless | Family::PtPassive => CMat2::new(h, jd, jd, -h),
        Family::AptPseudo | Family::AptPassive => CMat2::new(-jd, h, h, jd),
        Family::Custom => CMat2::zero(),
    }
}

/// `R_y(π/2)·H·R_y(−π/2)`: turns a passive PT matrix into its passive APT partner.
pub fn apt_from_pt(pt_passive: &CMat2) -> CMat2 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    rotation_y(half_pi) * *pt_passive * rotation_y(-half_pi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Pts,
    Ptb,
    Ep,
}

/// Eigen-decomposition of one Hamiltonian sample.
///
/// `v_plus` (= |α⟩) belongs to `lambda_plus` and `v_minus` (= |β⟩) to
/// `lambda_minus`. For the built-in families the pair is the columns of the
/// complex rotation `T` (times the fixed frame rotation for APT), so
/// `v·v = 1` in the bilinear sense rather than the Hermitian one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub v_plus: CVec2,
    pub v_minus: CVec2,
    pub regime: Regime,
    pub gap: C64,
    /// The traceless root `λ₊` before any `−iγ` shift.
    pub root: C64,
    /// `(cos θ/2, sin θ/2)` for the built-in families.
    pub half_angle: Option<(C64, C64)>,
}

impl EigenPair {
    /// Columns `[v₊ v₋]`.
    pub fn basis(&self) -> CMat2 {
        CMat2::from_columns(self.v_plus, self.v_minus)
    }
}

fn classify_regime(root: C64, gap: C64, ep_tol: f64) -> Regime {
    if gap.norm() < ep_tol {
        Regime::Ep
    } else if root.im.abs() < root.re.abs() {
        Regime::Pts
    } else {
        Regime::Ptb
    }
}

/// Half-angle pair for a given root. The relative sign makes
/// `2·sin(θ/2)·cos(θ/2)·λ₊ = J`.
fn half_angle(root: C64, a: C64, j: f64) -> (C64, C64) {
    let two_root = root * 2.0;
    let cos = -((root + a) / two_root).sqrt();
    let sin = ((root - a) / two_root).sqrt();
    let target = c(j, 0.0);
    if (sin * cos * two_root - target).norm() <= (sin * cos * two_root + target).norm() {
        (cos, sin)
    } else {
        (cos, -sin)
    }
}

fn closed_form_pair(spec: &HamiltonianSpec, delta: f64, j: f64, root: C64, ep_tol: f64) -> EigenPair {
    let a = complex_detuning(delta, spec.gamma);
    let (cos, sin) = half_angle(root, a, j);
    finish_closed_form_pair(spec, root, cos, sin, ep_tol)
}

fn finish_closed_form_pair(spec: &HamiltonianSpec, root: C64, cos: C64, sin: C64, ep_tol: f64) -> EigenPair {
    let rot = spec.frame_rotation();
    let shift = spec.shift();
    let gap = root * 2.0;
    EigenPair {
        lambda_plus: shift + root,
        lambda_minus: shift - root,
        v_plus: rot * CVec2::new(cos, sin),
        v_minus: rot * CVec2::new(-sin, cos),
        regime: classify_regime(root, gap, ep_tol),
        gap,
        root,
        half_angle: Some((cos, sin)),
    }
}

/// Eigenvector of `m` for eigenvalue `lam`, scaled to `v·v = 1` where possible.
fn custom_vector(m: &CMat2, lam: C64) -> CVec2 {
    let v1 = CVec2::new(m.m01, lam - m.m00);
    let v2 = CVec2::new(lam - m.m11, m.m10);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    if v.norm() == 0.0 {
        // m is a multiple of the identity
        return CVec2::from_real(1.0, 0.0);
    }
    let bil = v.dot(&v);
    if bil.norm() > 1e-12 * v.norm_sqr() {
        v.scale_c(bil.sqrt().inv())
    } else {
        v.normalize()
    }
}

fn custom_pair(m: &CMat2, root: C64, ep_tol: f64) -> EigenPair {
    let mu = m.trace() * 0.5;
    let (lp, lm) = (mu + root, mu - root);
    let gap = root * 2.0;
    let (vp, vm) = if gap.norm() < ep_tol {
        let v = custom_vector(m, lp);
        (v, v)
    } else if m.m01 == ZERO && m.m10 == ZERO {
        // diagonal: pick the unit vectors directly to avoid 0/0
        let e0 = CVec2::from_real(1.0, 0.0);
        let e1 = CVec2::from_real(0.0, 1.0);
        if (m.m00 - lp).norm() <= (m.m11 - lp).norm() {
            (e0, e1)
        } else {
            (e1, e0)
        }
    } else {
        (custom_vector(m, lp), custom_vector(m, lm))
    };
    EigenPair {
        lambda_plus: lp,
        lambda_minus: lm,
        v_plus: vp,
        v_minus: vm,
        regime: classify_regime(root, gap, ep_tol),
        gap,
        root,
        half_angle: None,
    }
}

/// Eigenvalues `(λ₊, λ₋)` of the built matrix. Total, including at the EP.
pub fn eigenvalues(spec: &HamiltonianSpec, delta: f64, j: f64) -> Result<(C64, C64)> {
    let e = eigen_unchecked(spec, delta, j, EP_TOLERANCE)?;
    Ok((e.lambda_plus, e.lambda_minus))
}

fn eigen_unchecked(spec: &HamiltonianSpec, delta: f64, j: f64, ep_tol: f64) -> Result<EigenPair> {
    match spec.family {
        Family::Custom => {
            let m = build(spec, delta, j)?;
            let k = (m.m00 - m.m11) * 0.5;
            let root = eigen_root(k * k + m.m01 * m.m10);
            Ok(custom_pair(&m, root, ep_tol))
        }
        _ => {
            let root = eigen_root(lambda_squared(delta, j, spec.gamma));
            Ok(closed_form_pair(spec, delta, j, root, ep_tol))
        }
    }
}

pub fn eigensystem(spec: &HamiltonianSpec, delta: f64, j: f64) -> Result<EigenPair> {
    eigensystem_with_tolerance(spec, delta, j, EP_TOLERANCE)
}

pub fn eigensystem_with_tolerance(spec: &HamiltonianSpec, delta: f64, j: f64, ep_tol: f64) -> Result<EigenPair> {
    let e = eigen_unchecked(spec, delta, j, ep_tol)?;
    if e.regime == Regime::Ep {
        return Err(EncircleError::DegenerateAtEP { gap: e.gap.norm() });
    }
    Ok(e)
}

/// Continues an eigenbasis along a path: the root sign and the vector signs
/// are chosen closest to `prev`, so the labels follow the Riemann sheets
/// instead of jumping at the square-root cut.
pub fn eigensystem_continued(spec: &HamiltonianSpec, delta: f64, j: f64, prev: &EigenPair) -> Result<EigenPair> {
    let fresh = eigen_unchecked(spec, delta, j, EP_TOLERANCE)?;
    let root = nearest_sign(fresh.root, prev.root);
    let mut next = match spec.family {
        Family::Custom => {
            let m = build(spec, delta, j)?;
            custom_pair(&m, root, EP_TOLERANCE)
        }
        _ => closed_form_pair(spec, delta, j, root, EP_TOLERANCE),
    };
    if next.regime == Regime::Ep {
        return Err(EncircleError::DegenerateAtEP { gap: next.gap.norm() });
    }
    let flip = |v: CVec2, p: CVec2| if (v - p).norm() <= (v + p).norm() { v } else { -v };
    match next.half_angle {
        Some((cos, sin)) => {
            let (pc, ps) = prev.half_angle.unwrap_or((cos, sin));
            let keep = (cos - pc).norm_sqr() + (sin - ps).norm_sqr() <= (cos + pc).norm_sqr() + (sin + ps).norm_sqr();
            if !keep {
                next = finish_closed_form_pair(spec, root, -cos, -sin, EP_TOLERANCE);
            }
        }
        None => {
            next.v_plus = flip(next.v_plus, prev.v_plus);
            next.v_minus = flip(next.v_minus, prev.v_minus);
        }
    }
    Ok(next)
}

/// `σ_z⁻¹·H·σ_z − H†`, zero for a σ_z-pseudo-Hermitian matrix.
pub fn pseudo_hermiticity_defect(h: &CMat2) -> f64 {
    let z = pauli(Pauli::Z);
    (z * *h * z).max_abs_diff(&h.adjoint())
}

/// Eigenvector residual `max ‖H·v − λ·v‖` over both pairs.
pub fn eigen_residual(h: &CMat2, e: &EigenPair) -> f64 {
    let r1 = (h.apply(&e.v_plus) - e.v_plus.scale_c(e.lambda_plus)).norm();
    let r2 = (h.apply(&e.v_minus) - e.v_minus.scale_c(e.lambda_minus)).norm();
    r1.max(r2)
}

/// Rectangle in `(Δ, J)` for [`riemann_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshBounds {
    pub delta: (f64, f64),
    pub j: (f64, f64),
}

impl Default for MeshBounds {
    fn default() -> Self {
        Self { delta: (-0.06, 0.06), j: (0.0, 0.12) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshPoint {
    pub delta: f64,
    pub j: f64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
}

/// Both eigenvalue sheets on a `resolution × resolution` grid, rows of
/// constant `J`. Sheets are followed along each row from the row's first
/// point, which in turn continues the previous row's first point.
pub fn riemann_mesh(spec: &HamiltonianSpec, bounds: &MeshBounds, resolution: usize) -> Result<Vec<MeshPoint>> {
    spec.validate()?;
    if resolution < 8 {
        return Err(EncircleError::InvalidSpec { field: "resolution", reason: format!("must be ≥ 8, got {resolution}") });
    }
    let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
    if !ok(bounds.delta) {
        return Err(EncircleError::InvalidSpec { field: "bounds.delta", reason: "need finite lo < hi".into() });
    }
    if !ok(bounds.j) {
        return Err(EncircleError::InvalidSpec { field: "bounds.j", reason: "need finite lo < hi".into() });
    }
    let axis = |(lo, hi): (f64, f64), k: usize| lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    let mut row_start: Option<C64> = None;
    for r in 0..resolution {
        let j = axis(bounds.j, r);
        let mut prev = row_start;
        for k in 0..resolution {
            let delta = axis(bounds.delta, k);
            let (lp, lm) = eigenvalues(spec, delta, j)?;
            let centre = (lp + lm) * 0.5;
            let mut half = (lp - lm) * 0.5;
            if let Some(p) = prev {
                half = nearest_sign(half, p);
            }
            if k == 0 {
                row_start = Some(half);
            }
            prev = Some(half);
            out.push(MeshPoint { delta, j, lambda_plus: centre + half, lambda_minus: centre - half });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const G: f64 = 0.06;

    /// Generic 2×2 eigenvalues from the characteristic polynomial, used as
    /// an oracle independent of the closed forms above.
    fn char_poly_eigs(m: &CMat2) -> (C64, C64) {
        let tr = m.trace();
        let disc = (tr * tr - m.det() * 4.0).sqrt();
        ((tr + disc) * 0.5, (tr - disc) * 0.5)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn build_pt_traceless_at_start_a() {
        let h = build(&HamiltonianSpec::new(Family::PtTraceless, G), 0.0, 0.09).unwrap();
        assert_eq!(h, CMat2::new(c(0.0, 0.06), c(0.09, 0.0), c(0.09, 0.0), c(0.0, -0.06)));
    }

    #[test]
    fn build_apt_passive_values() {
        let h = build(&HamiltonianSpec::new(Family::AptPassive, G), 0.0, 0.06).unwrap();
        let expected = CMat2::new(c(-0.06, -0.06), c(0.0, 0.06), c(0.0, 0.06), c(0.06, -0.06));
        assert!(h.max_abs_diff(&expected) < 1e-17);
    }

    #[test]
    fn build_without_dissipation_is_hermitian() {
        let j = 0.07;
        for fam in [Family::PtTraceless, Family::PtPassive] {
            let h = build(&HamiltonianSpec::new(fam, 0.0), 0.0, j).unwrap();
            assert_eq!(h, pauli(Pauli::X).scale(c(j, 0.0)));
        }
        for fam in [Family::AptPseudo, Family::AptPassive] {
            let h = build(&HamiltonianSpec::new(fam, 0.0), 0.0, j).unwrap();
            assert_eq!(h, pauli(Pauli::Z).scale(c(-j, 0.0)));
        }
    }

    #[test]
    fn custom_requires_matrix() {
        let spec = HamiltonianSpec { family: Family::Custom, gamma: 0.0, custom_matrix: None };
        assert_eq!(build(&spec, 0.0, 0.0), Err(EncircleError::MissingCustomMatrix));
        let m = pauli(Pauli::Y);
        assert_eq!(build(&HamiltonianSpec::custom(m), 1.0, 2.0).unwrap(), m);
    }

    #[test]
    fn exceptional_point_detected() {
        let spec = HamiltonianSpec::new(Family::PtTraceless, G);
        let (lp, lm) = eigenvalues(&spec, 0.0, G).unwrap();
        assert!(lp.norm() < 1e-12 && lm.norm() < 1e-12);
        assert!(matches!(eigensystem(&spec, 0.0, G), Err(EncircleError::DegenerateAtEP { .. })));
    }

    #[test]
    fn pts_start_point_spectrum() {
        let spec = HamiltonianSpec::new(Family::PtTraceless, G);
        let h = build(&spec, 0.0, 0.09).unwrap();
        let (o1, o2) = char_poly_eigs(&h);
        let e = eigensystem(&spec, 0.0, 0.09).unwrap();
        assert_eq!(e.regime, Regime::Pts);
        assert!((e.lambda_plus.re - 0.067082).abs() < 1e-6 && e.lambda_plus.im.abs() < 1e-15);
        assert!(close(e.lambda_plus, o1, 1e-14) || close(e.lambda_plus, o2, 1e-14));
        assert!(close(e.lambda_minus, -e.lambda_plus, 1e-15));
    }

    #[test]
    fn ptb_start_point_spectrum() {
        let spec = HamiltonianSpec::new(Family::PtTraceless, G);
        let h = build(&spec, 0.0, 0.03).unwrap();
        let (o1, o2) = char_poly_eigs(&h);
        let e = eigensystem(&spec, 0.0, 0.03).unwrap();
        assert_eq!(e.regime, Regime::Ptb);
        assert!((e.lambda_plus.im - 0.051962).abs() < 1e-6 && e.lambda_plus.re.abs() < 1e-15);
        assert!(close(e.lambda_plus, o1, 1e-14) || close(e.lambda_plus, o2, 1e-14));
        // the label does not hinge on the sign of a vanishing detuning
        let e2 = eigensystem(&spec, -1e-18, 0.03).unwrap();
        assert!(close(e.lambda_plus, e2.lambda_plus, 1e-12));
    }

    #[test]
    fn apt_from_pt_matches_built_apt() {
        let (j, g) = (0.06, 0.06);
        let pt = build(&HamiltonianSpec::new(Family::PtPassive, g), 0.0, j).unwrap();
        let apt = build(&HamiltonianSpec::new(Family::AptPassive, g), 0.0, j).unwrap();
        assert!(apt_from_pt(&pt).max_abs_diff(&apt) < 1e-12);
    }

    #[test]
    fn apt_from_pt_limits() {
        let j = 0.05;
        let rotated = apt_from_pt(&pauli(Pauli::X).scale(c(j, 0.0)));
        assert!(rotated.max_abs_diff(&pauli(Pauli::Z).scale(c(-j, 0.0))) < 1e-15);
        // J = 0: iγ(σ_z − I) → iγσ_x − iγI, i.e. 2iγI_x − iγI
        let g = 0.04;
        let h = (pauli(Pauli::Z) - CMat2::identity()).scale(c(0.0, g));
        let expected = pauli(Pauli::X).scale(c(0.0, g)) - CMat2::identity().scale(c(0.0, g));
        assert!(apt_from_pt(&h).max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn apt_with_detuning_is_rotated_pt() {
        for &(d, j) in &[(0.02, 0.07), (-0.03, 0.04), (0.01, 0.0)] {
            let pt = build(&HamiltonianSpec::new(Family::PtPassive, G), d, j).unwrap();
            let apt = build(&HamiltonianSpec::new(Family::AptPassive, G), d, j).unwrap();
            assert!(apt_from_pt(&pt).max_abs_diff(&apt) < 1e-15);
        }
    }

    #[test]
    fn pseudo_hermitian_on_detuning_free_axis() {
        for k in 0..50 {
            let j = -0.1 + 0.2 * k as f64 / 49.0;
            for g in [0.0, 0.03, 0.06, 0.1] {
                let h = build(&HamiltonianSpec::new(Family::AptPseudo, g), 0.0, j).unwrap();
                assert!(pseudo_hermiticity_defect(&h) <= 1e-14);
            }
        }
    }

    #[test]
    fn gauge_relations_on_grid() {
        for fam in [Family::PtTraceless, Family::PtPassive, Family::AptPassive, Family::AptPseudo] {
            let spec = HamiltonianSpec::new(fam, G);
            for i in 0..50 {
                for k in 0..50 {
                    let d = -0.1 + 0.2 * i as f64 / 49.0;
                    let j = -0.1 + 0.2 * k as f64 / 49.0;
                    let h = build(&spec, d, j).unwrap();
                    let e = match eigensystem(&spec, d, j) {
                        Ok(e) => e,
                        Err(_) => continue,
                    };
                    assert!(eigen_residual(&h, &e) < 1e-10 * h.norm().max(1e-3), "{fam:?} {d} {j}");
                    let (cs, sn) = e.half_angle.unwrap();
                    assert!((cs * cs + sn * sn - 1.0).norm() < 1e-10);
                    assert!((sn * cs * e.root * 2.0 - j).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn passive_spectrum_is_shifted_traceless() {
        let tl = HamiltonianSpec::new(Family::PtTraceless, G);
        let pa = HamiltonianSpec::new(Family::PtPassive, G);
        for i in 0..50 {
            for k in 0..50 {
                let d = -0.1 + 0.2 * i as f64 / 49.0;
                let j = -0.1 + 0.2 * k as f64 / 49.0;
                let (a1, a2) = eigenvalues(&tl, d, j).unwrap();
                let (b1, b2) = eigenvalues(&pa, d, j).unwrap();
                assert!(close(b1, a1 - c(0.0, G), 1e-12) && close(b2, a2 - c(0.0, G), 1e-12));
            }
        }
    }

    #[test]
    fn continuation_swaps_labels_around_the_ep() {
        // one full turn around the EP returns λ₊ → −λ₊ and |α⟩ → ±|β⟩
        let spec = HamiltonianSpec::new(Family::PtTraceless, G);
        let r = 0.03;
        let first = eigensystem(&spec, 0.0, G + r).unwrap();
        let mut e = first;
        let n = 400;
        for k in 1..=n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            e = eigensystem_continued(&spec, r * th.sin(), G + r * th.cos(), &e).unwrap();
        }
        assert!(close(e.root, -first.root, 1e-12));
        assert!(e.v_plus.overlap(&first.v_minus) > 1.0 - 1e-12);
    }

    #[test]
    fn custom_eigensystem() {
        let m = CMat2::new(c(0.3, 0.1), c(0.2, 0.0), c(-0.4, 0.05), c(-0.1, 0.0));
        let e = eigensystem(&HamiltonianSpec::custom(m), 0.0, 0.0).unwrap();
        assert!(eigen_residual(&m, &e) < 1e-12);
        let d = CMat2::diag(c(1.0, 0.0), c(-2.0, 0.0));
        let e = eigensystem(&HamiltonianSpec::custom(d), 0.0, 0.0).unwrap();
        assert!(eigen_residual(&d, &e) < 1e-15);
    }

    #[test]
    fn regime_labels_off_axis() {
        let spec = HamiltonianSpec::new(Family::PtTraceless, G);
        assert_eq!(eigensystem(&spec, 0.01, 0.1).unwrap().regime, Regime::Pts);
        assert_eq!(eigensystem(&spec, 0.01, 0.01).unwrap().regime, Regime::Ptb);
    }
}

#[cfg(test)]
mod mesh_tests {
    use super::*;

    #[test]
    fn mesh_pinches_at_the_ep() {
        let spec = HamiltonianSpec::new(Family::PtTraceless, 0.06);
        let mesh = riemann_mesh(&spec, &MeshBounds::default(), 9).unwrap();
        assert_eq!(mesh.len(), 81);
        let ep = mesh.iter().find(|p| p.delta == 0.0 && (p.j - 0.06).abs() < 1e-15).unwrap();
        assert!(ep.lambda_plus.norm() < 1e-12 && ep.lambda_minus.norm() < 1e-12);
        for p in mesh.iter().filter(|p| p.delta == 0.0) {
            if p.j > 0.06 + 1e-12 {
                assert!(p.lambda_plus.im.abs() < 1e-15 && p.lambda_minus.im.abs() < 1e-15);
            } else if p.j < 0.06 - 1e-12 {
                assert!(p.lambda_plus.re.abs() < 1e-15 && p.lambda_minus.re.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mesh_rows_are_continuous() {
        let spec = HamiltonianSpec::new(Family::PtPassive, 0.06);
        let n = 41;
        let mesh = riemann_mesh(&spec, &MeshBounds { delta: (0.01, 0.1), j: (0.0, 0.12) }, n).unwrap();
        for row in mesh.chunks(n) {
            for w in row.windows(2) {
                assert!((w[1].lambda_plus - w[0].lambda_plus).norm() < (w[1].lambda_plus - w[0].lambda_minus).norm());
            }
        }
    }

    #[test]
    fn mesh_rejects_coarse_grids() {
        let spec = HamiltonianSpec::new(Family::PtPassive, 0.06);
        assert!(riemann_mesh(&spec, &MeshBounds::default(), 7).is_err());
    }
}
