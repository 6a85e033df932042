//! Finite-difference gradients and Laplacians, and the classical approximate
//! subgradient built from them.
//!
//! For a convex `L`-Lipschitz `f` and a `delta`-accurate evaluator `f~`, the
//! central difference `∇^(r2) f~(z)` at a uniformly random grid point `z` of
//! `B_inf(0, r1)` satisfies, with probability at least `1 - rho`,
//!
//! ```text
//! f(y) >= f(0) + <g~, y> - a |y| - b    for all y,
//! a = (3 n^(3/4) / 2) sqrt(delta L / (rho r1)),    b = 2 L sqrt(n) r1,
//! ```
//!
//! when `r2 = sqrt(delta r1 rho / (sqrt(n) L))`.

use rand::Rng;
use serde::Serialize;

use crate::error::invalid;
use crate::geometry::Vector;
use crate::Result;

/// Central-difference gradient `(f(x + r e_i) - f(x - r e_i)) / (2r)`.
pub fn fd_gradient<F>(f: &mut F, x: &Vector, r: f64) -> Result<Vector>
where
    F: FnMut(&Vector) -> Result<f64>,
{
    if !(r > 0.0) {
        return Err(invalid("difference radius must be positive"));
    }
    let mut g = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + r;
        let up = f(&probe)?;
        probe[i] = x[i] - r;
        let down = f(&probe)?;
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * r);
    }
    Ok(g)
}

/// Finite-difference Laplacian `sum_i (f(x + r e_i) - 2 f(x) + f(x - r e_i)) / r^2`.
pub fn fd_laplacian<F>(f: &mut F, x: &Vector, r: f64) -> Result<f64>
where
    F: FnMut(&Vector) -> Result<f64>,
{
    if !(r > 0.0) {
        return Err(invalid("difference radius must be positive"));
    }
    let center = f(x)?;
    let mut probe = x.clone();
    let mut total = 0.0;
    for i in 0..x.len() {
        probe[i] = x[i] + r;
        let up = f(&probe)?;
        probe[i] = x[i] - r;
        let down = f(&probe)?;
        probe[i] = x[i];
        total += (up - 2.0 * center + down) / (r * r);
    }
    Ok(total)
}

/// Parameters of the classical finite-difference subgradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdParams {
    pub dim: usize,
    /// Half-width of the sampling cube `B_inf(0, r1)`.
    pub r1: f64,
    /// Difference radius, snapped to the sampling grid.
    pub r2: f64,
    /// Evaluation error bound.
    pub delta: f64,
    pub rho: f64,
    pub lipschitz: f64,
    /// The sampling grid has spacing `r1 / 2^grid_bits`.
    pub grid_bits: u32,
}

/// Relative resolution of the default grid with respect to `r2`.
const DEFAULT_GRID_RESOLUTION_BITS: i32 = 20;
const MAX_GRID_BITS: u32 = 60;

impl FdParams {
    /// Checks the premises `rho ∈ (0, 1/3]` and `delta <= r1 sqrt(n) L / rho`
    /// and sets `r2 = sqrt(delta r1 rho / (sqrt(n) L))`, snapped to a grid of
    /// spacing `r1 / 2^k` fine enough to resolve `r2` to 20 bits.
    pub fn classical(dim: usize, r1: f64, delta: f64, rho: f64, lipschitz: f64) -> Result<Self> {
        let n = dim.max(1) as f64;
        validate(r1, delta, rho, lipschitz)?;
        if delta > r1 * n.sqrt() * lipschitz / rho {
            return Err(invalid("delta exceeds r1 sqrt(n) L / rho"));
        }
        let r2 = (delta * r1 * rho / (n.sqrt() * lipschitz)).sqrt();
        let bits = default_grid_bits(r1, r2);
        Ok(Self {
            dim,
            r1,
            r2: snap(r1, r2, bits),
            delta,
            rho,
            lipschitz,
            grid_bits: bits,
        })
    }

    /// Same parameters on a grid of spacing `r1 / 2^bits`.
    pub fn with_grid_bits(self, bits: u32) -> Result<Self> {
        if bits > MAX_GRID_BITS {
            return Err(invalid("grid too fine"));
        }
        let n = self.dim.max(1) as f64;
        let raw = (self.delta * self.r1 * self.rho / (n.sqrt() * self.lipschitz)).sqrt();
        Ok(Self {
            r2: snap(self.r1, raw, bits),
            grid_bits: bits,
            ..self
        })
    }

    pub fn spacing(&self) -> f64 {
        self.r1 / 2f64.powi(self.grid_bits as i32)
    }

    /// `(3 n^(3/4) / 2) sqrt(delta L / (rho r1))`.
    pub fn slack_a(&self) -> f64 {
        let n = self.dim as f64;
        1.5 * n.powf(0.75) * (self.delta * self.lipschitz / (self.rho * self.r1)).sqrt()
    }

    /// `2 L sqrt(n) r1`.
    pub fn slack_b(&self) -> f64 {
        2.0 * self.lipschitz * (self.dim as f64).sqrt() * self.r1
    }
}

pub(crate) fn validate(r1: f64, delta: f64, rho: f64, lipschitz: f64) -> Result<()> {
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(invalid("r1 must be positive"));
    }
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(invalid("Lipschitz constant must be positive"));
    }
    if !(rho > 0.0 && rho <= 1.0 / 3.0) {
        return Err(invalid("rho must lie in (0, 1/3]"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta must be positive"));
    }
    Ok(())
}

pub(crate) fn default_grid_bits(r1: f64, r2: f64) -> u32 {
    let bits = ((r1 / r2).log2().ceil() as i32 + DEFAULT_GRID_RESOLUTION_BITS).max(0) as u32;
    bits.min(MAX_GRID_BITS)
}

fn snap(r1: f64, r2: f64, bits: u32) -> f64 {
    let spacing = r1 / 2f64.powi(bits as i32);
    (r2 / spacing).round().max(1.0) * spacing
}

/// A uniformly random point of the grid `{j * r1 / 2^bits : |j| <= 2^bits}^n`.
pub fn sample_grid_point<R: Rng + ?Sized>(dim: usize, r1: f64, bits: u32, rng: &mut R) -> Vector {
    let half = 1i64 << bits;
    let spacing = r1 / half as f64;
    Vector::from_fn(dim, |_, _| rng.gen_range(-half..=half) as f64 * spacing)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    ClassicalFd,
    JordanSim,
}

/// An approximate subgradient at 0 with the slack it is certified under:
/// `f(y) >= f(0) + <gradient, y> - slack_a |y| - slack_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    pub gradient: Vector,
    pub slack_a: f64,
    pub slack_b: f64,
    pub z: Vector,
    pub method: GradientMethod,
    /// Classical evaluator calls, or phase-oracle queries for the quantum path.
    pub queries: u64,
}

impl GradientReport {
    /// Whether the certified lower bound holds at `y` given exact values.
    pub fn holds_at(&self, f_at_zero: f64, y: &Vector, f_at_y: f64) -> bool {
        f_at_y >= f_at_zero + self.gradient.dot(y) - self.slack_a * y.norm() - self.slack_b
    }
}

/// Central difference of `f~` at a random grid point of `B_inf(0, r1)`;
/// exactly `2n` evaluations.
pub fn classical_subgradient<F, R>(
    f: &mut F,
    params: &FdParams,
    rng: &mut R,
) -> Result<GradientReport>
where
    F: FnMut(&Vector) -> Result<f64>,
    R: Rng + ?Sized,
{
    let z = sample_grid_point(params.dim, params.r1, params.grid_bits, rng);
    let mut calls = 0u64;
    let mut counted = |x: &Vector| {
        calls += 1;
        f(x)
    };
    let gradient = fd_gradient(&mut counted, &z, params.r2)?;
    Ok(GradientReport {
        gradient,
        slack_a: params.slack_a(),
        slack_b: params.slack_b(),
        z,
        method: GradientMethod::ClassicalFd,
        queries: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn gradient_is_exact_on_affine_and_quadratic() {
        let a = v(&[0.3, -1.2, 2.0]);
        let mut affine = |x: &Vector| Ok(a.dot(x) + 0.7);
        let g = fd_gradient(&mut affine, &v(&[0.1, 0.2, -0.4]), 0.37).unwrap();
        assert!((g - &a).norm() < 1e-12);

        let mut square = |x: &Vector| Ok(x[0] * x[0]);
        let g = fd_gradient(&mut square, &v(&[0.8]), 0.1).unwrap();
        assert!((g[0] - 1.6).abs() < 1e-12);

        let mut abs = |x: &Vector| Ok(x[0].abs());
        assert_eq!(fd_gradient(&mut abs, &v(&[0.0]), 0.25).unwrap()[0], 0.0);
    }

    #[test]
    fn laplacian_examples() {
        let mut sq = |x: &Vector| Ok(x.norm_squared());
        let lap = fd_laplacian(&mut sq, &v(&[0.4, -2.0, 1.0, 0.0]), 0.3).unwrap();
        assert!((lap - 8.0).abs() < 1e-10);
        let mut affine = |x: &Vector| Ok(2.0 * x[0] - x[1]);
        assert!(
            fd_laplacian(&mut affine, &v(&[1.0, 1.0]), 0.5)
                .unwrap()
                .abs()
                < 1e-12
        );
        let mut abs = |x: &Vector| Ok(x[0].abs());
        assert!((fd_laplacian(&mut abs, &v(&[0.0]), 0.2).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_gradient_gap_is_tight_for_abs_at_zero() {
        // n = 1, f = |x|, z = 0: |g - ∇f(0)|_1 = 1 = r Δf(0) / 2 for g = ±1.
        let r = 0.125;
        let mut abs = |x: &Vector| Ok(x[0].abs());
        let grad = fd_gradient(&mut abs, &v(&[0.0]), r).unwrap()[0];
        let lap = fd_laplacian(&mut abs, &v(&[0.0]), r).unwrap();
        for g in [-1.0, 1.0] {
            assert_eq!((g - grad).abs(), 1.0);
        }
        assert_eq!(r * lap / 2.0, 1.0);
    }

    #[test]
    fn params_and_slack() {
        let p = FdParams::classical(4, 0.1, 1e-4, 0.1, 2.0).unwrap();
        let raw = (1e-4 * 0.1 * 0.1 / (2.0 * 2.0f64)).sqrt();
        assert!((p.r2 - raw).abs() <= raw * 2f64.powi(-20));
        assert!(p.r2 <= p.r1);
        let k = (p.r2 / p.spacing()).round();
        assert!((p.r2 - k * p.spacing()).abs() < 1e-12 * p.r2);
        assert!(
            (p.slack_a() - 1.5 * 4f64.powf(0.75) * (1e-4 * 2.0 / (0.1 * 0.1f64)).sqrt()).abs()
                < 1e-15
        );
        assert!((p.slack_b() - 0.8).abs() < 1e-15);
        assert!(FdParams::classical(4, 0.1, 10.0, 0.1, 2.0).is_err());
        assert!(FdParams::classical(4, 0.1, 1e-4, 0.5, 2.0).is_err());
    }

    #[test]
    fn affine_report_recovers_slope_with_2n_calls() {
        let a = v(&[0.5, -0.25, 1.0]);
        let p = FdParams::classical(3, 0.05, 1e-6, 0.2, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut calls = 0;
        let mut f = |x: &Vector| {
            calls += 1;
            Ok(a.dot(x))
        };
        let rep = classical_subgradient(&mut f, &p, &mut rng).unwrap();
        assert_eq!(calls, 6);
        assert_eq!(rep.queries, 6);
        assert!((rep.gradient - &a).norm() < 1e-9);
        assert!(rep.z.iter().all(|zi| zi.abs() <= p.r1));
    }
}
