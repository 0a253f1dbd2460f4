//! The encircling loop in `(Δ, J)` parameter space.
//!
//! ```text
//! θ(t) = ω·t + θ₀,   ω = ±2π/T  (+ clockwise)
//! Δ(t) = r·(1 + κ(t))·sin θ(t)
//! J(t) = J₀ + r·(1 + κ(t))·cos θ(t)
//! ```
//!
//! `κ` is piecewise constant over `noise_segments` equal slices of the
//! period. Slice `k` draws `κ_k = ir·(2u − 1)` with `u` the top 53 bits of
//! `splitmix64(seed + k·0x9E3779B97F4A7C15)` scaled to `[0, 1)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{EncircleError, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One splitmix64 output for state `x` (state is advanced before mixing).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `κ_k` for a single slice.
pub fn noise_value(seed: u64, intensity: f64, index: usize) -> f64 {
    if intensity == 0.0 {
        return 0.0;
    }
    let bits = splitmix64(seed.wrapping_add(GOLDEN.wrapping_mul(index as u64))) >> 11;
    let u = bits as f64 / (1u64 << 53) as f64;
    intensity * (2.0 * u - 1.0)
}

pub fn noise_sequence(seed: u64, intensity: f64, segments: usize) -> Vec<f64> {
    (0..segments).map(|k| noise_value(seed, intensity, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "CW")]
    Clockwise,
    #[serde(rename = "CCW")]
    CounterClockwise,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Clockwise => 1.0,
            Direction::CounterClockwise => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Clockwise => Direction::CounterClockwise,
            Direction::CounterClockwise => Direction::Clockwise,
        }
    }
}

fn default_segments() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub j_center: f64,
    pub radius: f64,
    pub theta0: f64,
    pub direction: Direction,
    pub period: f64,
    pub samples: usize,
    #[serde(default)]
    pub noise_intensity: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_segments")]
    pub noise_segments: usize,
}

/// One point of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub theta: f64,
    pub delta: f64,
    pub j: f64,
    pub kappa: f64,
}

/// Time derivatives `(Δ̇, J̇)` of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRate {
    pub delta: f64,
    pub j: f64,
}

impl LoopSpec {
    /// `r = 0.03`, `J₀ = 0.06`, `T = 250 μs`, 1001 samples, noise off.
    pub fn standard(theta0: f64, direction: Direction) -> Self {
        Self {
            j_center: 0.06,
            radius: 0.03,
            theta0,
            direction,
            period: 250.0,
            samples: 1001,
            noise_intensity: 0.0,
            seed: 0,
            noise_segments: 100,
        }
    }

    pub fn start_a(direction: Direction) -> Self {
        Self::standard(0.0, direction)
    }

    pub fn start_b(direction: Direction) -> Self {
        Self::standard(PI, direction)
    }

    pub fn omega(&self) -> f64 {
        self.direction.sign() * TAU / self.period
    }

    pub fn reversed(&self) -> Self {
        Self { direction: self.direction.reversed(), ..*self }
    }

    pub fn noise_free(&self) -> Self {
        Self { noise_intensity: 0.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(EncircleError::InvalidSpec { field, reason });
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("loop.radius", format!("must be > 0, got {}", self.radius));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad("loop.period", format!("must be > 0, got {}", self.period));
        }
        if self.samples < 2 {
            return bad("loop.samples", format!("must be ≥ 2, got {}", self.samples));
        }
        if !(self.noise_intensity >= 0.0 && self.noise_intensity.is_finite()) {
            return bad("loop.noise_intensity", format!("must be ≥ 0, got {}", self.noise_intensity));
        }
        if self.noise_segments < 1 {
            return bad("loop.noise_segments", "must be ≥ 1".into());
        }
        if !self.j_center.is_finite() {
            return bad("loop.j_center", "must be finite".into());
        }
        if !self.theta0.is_finite() {
            return bad("loop.theta0", "must be finite".into());
        }
        Ok(())
    }

    pub fn is_noisy(&self) -> bool {
        self.noise_intensity > 0.0
    }

    /// Noise slice containing `t`; `t = T` wraps to slice 0.
    pub fn segment_index(&self, t: f64) -> usize {
        let n = self.noise_segments;
        if t >= self.period {
            return 0;
        }
        let width = self.period / n as f64;
        let mut k = (t / width).floor();
        // agree exactly with the break times `k·width`
        if (k + 1.0) * width <= t {
            k += 1.0;
        } else if k * width > t {
            k -= 1.0;
        }
        if k < 0.0 {
            0
        } else {
            (k as usize) % n
        }
    }

    pub fn kappa(&self, segment: usize) -> f64 {
        noise_value(self.seed, self.noise_intensity, segment)
    }

    /// Times in `(t0, t1)` where `κ` jumps.
    pub fn noise_breaks(&self, t0: f64, t1: f64) -> Vec<f64> {
        if !self.is_noisy() {
            return Vec::new();
        }
        let n = self.noise_segments as f64;
        let width = self.period / n;
        let first = (t0 / width).floor() as i64 + 1;
        let last = ((t1 / width).ceil() as i64 - 1).min(self.noise_segments as i64 - 1);
        (first..=last)
            .map(|k| k as f64 * width)
            .filter(|&b| b > t0 && b < t1)
            .collect()
    }

    /// Splits `[t0, t1]` into pieces of constant `κ`, each tagged with its slice.
    pub fn pieces(&self, t0: f64, t1: f64) -> Vec<(f64, f64, usize)> {
        let mut cuts = vec![t0];
        cuts.extend(self.noise_breaks(t0, t1));
        cuts.push(t1);
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.segment_index(0.5 * (w[0] + w[1]))))
            .collect()
    }

    /// Path point at `t` using slice `segment`'s noise. No range check, so it
    /// also gives the analytic continuation of that slice.
    pub fn point_in_segment(&self, t: f64, segment: usize) -> PathPoint {
        let theta = self.omega() * t + self.theta0;
        let kappa = self.kappa(segment);
        let rho = self.radius * (1.0 + kappa);
        let (s, c) = theta.sin_cos();
        PathPoint { t, theta, delta: rho * s, j: self.j_center + rho * c, kappa }
    }

    pub fn rate_in_segment(&self, t: f64, segment: usize) -> PathRate {
        let w = self.omega();
        let theta = w * t + self.theta0;
        let rho = self.radius * (1.0 + self.kappa(segment));
        let (s, c) = theta.sin_cos();
        PathRate { delta: rho * w * c, j: -rho * w * s }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        sample_grid(self.period, self.samples)
    }
}

/// `n` equally spaced times from 0 to `period` inclusive.
pub fn sample_grid(period: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { period } else { period * k as f64 / last }).collect()
}

pub fn path_at(spec: &LoopSpec, t: f64) -> Result<PathPoint> {
    if !(0.0..=spec.period).contains(&t) {
        return Err(EncircleError::OutOfRange { t, period: spec.period });
    }
    Ok(spec.point_in_segment(t, spec.segment_index(t)))
}

pub fn path_rate(spec: &LoopSpec, t: f64) -> Result<PathRate> {
    if !(0.0..=spec.period).contains(&t) {
        return Err(EncircleError::OutOfRange { t, period: spec.period });
    }
    Ok(spec.rate_in_segment(t, spec.segment_index(t)))
}
