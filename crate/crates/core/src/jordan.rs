//! Statevector simulation of Jordan's gradient algorithm.
//!
//! A run prepares the uniform superposition over the hypergrid
//! `x0 + r * G_m^n`, where `G_m = { j / 2^m - 1/2 + 2^(-m-1) }`, applies the
//! phase `exp(2πi 2^m h(x))`, Fourier transforms every `m`-qubit register and
//! measures. Outcome `k` decodes to `signed(k) / 2^m`.
//!
//! Register `i` occupies bits `i*m .. (i+1)*m` of the basis index.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error};
use crate::geometry::Vector;
use crate::oracles::majority_error;
use crate::subgrad::{
    default_grid_bits, sample_grid_point, validate, GradientMethod, GradientReport,
};
use crate::Result;

/// Largest simulated register width unless overridden by [`MAX_QUBITS_ENV`].
pub const DEFAULT_MAX_QUBITS: u32 = 22;
pub const MAX_QUBITS_ENV: &str = "CONVEX_ORACLES_MAX_QUBITS";

const NORM_TOL: f64 = 1e-10;

pub fn max_qubits() -> u32 {
    std::env::var(MAX_QUBITS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

fn check_qubits(qubits: u32) -> Result<()> {
    let cap = max_qubits();
    if qubits > cap {
        return Err(Error::Capability { qubits, cap });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    bits: u32,
    origin: Vector,
    scale: f64,
}

impl GridSpec {
    pub fn new(bits: u32, origin: Vector, scale: f64) -> Result<Self> {
        let dim = origin.len();
        if dim == 0 || bits == 0 {
            return Err(invalid("grid needs at least one register of one qubit"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("grid scale must be positive"));
        }
        let qubits = (dim as u64 * bits as u64).min(u32::MAX as u64) as u32;
        check_qubits(qubits)?;
        Ok(Self {
            dim,
            bits,
            origin,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn qubits(&self) -> u32 {
        self.dim as u32 * self.bits
    }

    pub fn origin(&self) -> &Vector {
        &self.origin
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn per_axis(&self) -> usize {
        1 << self.bits
    }

    pub fn len(&self) -> usize {
        1 << self.qubits()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Register contents of basis state `index`.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        let mask = self.per_axis() - 1;
        (0..self.dim)
            .map(|i| (index >> (i as u32 * self.bits)) & mask)
            .collect()
    }

    /// The unit-grid coordinate `j / 2^m - 1/2 + 2^(-m-1)`.
    pub fn unit_coordinate(&self, j: usize) -> f64 {
        let side = self.per_axis() as f64;
        (j as f64 + 0.5) / side - 0.5
    }

    pub fn unit_point(&self, index: usize) -> Vector {
        Vector::from_iterator(
            self.dim,
            self.digits(index)
                .into_iter()
                .map(|j| self.unit_coordinate(j)),
        )
    }

    /// The physical point `x0 + r x`.
    pub fn point(&self, index: usize) -> Vector {
        &self.origin + self.unit_point(index) * self.scale
    }
}

/// `((k + 2^(m-1)) mod 2^m - 2^(m-1)) / 2^m`.
pub fn decode(k: usize, bits: u32) -> f64 {
    let side = 1i64 << bits;
    let half = side / 2;
    let signed = (k as i64 + half).rem_euclid(side) - half;
    signed as f64 / side as f64
}

#[derive(Clone, Debug)]
pub struct Statevector {
    dim: usize,
    bits: u32,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn uniform(grid: &GridSpec) -> Self {
        let len = grid.len();
        let a = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Self {
            dim: grid.dim(),
            bits: grid.bits(),
            amps: vec![a; len],
        }
    }

    /// Wraps raw amplitudes over `dim` registers of `bits` qubits.
    pub fn from_amplitudes(dim: usize, bits: u32, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << (dim as u32 * bits) {
            return Err(invalid("amplitude count does not match register layout"));
        }
        let s = Self { dim, bits, amps };
        s.check_norm()?;
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_norm(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InconsistentOracle(format!(
                "state norm drifted to {norm}"
            )));
        }
        Ok(())
    }

    /// Multiplies basis state `x` by `exp(2πi turns[x])`.
    pub fn apply_phase(&mut self, turns: &[f64]) -> Result<()> {
        if turns.len() != self.amps.len() {
            return Err(invalid("phase table does not match state length"));
        }
        for (a, t) in self.amps.iter_mut().zip(turns) {
            *a *= Complex64::from_polar(1.0, 2.0 * PI * t);
        }
        self.check_norm()
    }

    /// Unitary DFT with kernel `exp(-2πi jk / 2^m)` on every register.
    pub fn fourier_registers(&mut self) -> Result<()> {
        fourier_in_place(&mut self.amps, self.dim, self.bits);
        self.check_norm()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn fourier_in_place(amps: &mut [Complex64], dim: usize, bits: u32) {
    let side = 1usize << bits;
    let fft = FftPlanner::new().plan_fft_forward(side);
    let norm = 1.0 / (side as f64).sqrt();
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    for axis in 0..dim {
        let stride = 1usize << (axis as u32 * bits);
        let block = stride * side;
        for base in (0..amps.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = amps[start + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    amps[start + j * stride] = v * norm;
                }
            }
        }
    }
}

/// Exact joint outcome distribution of one run.
#[derive(Clone, Debug)]
pub struct MeasurementDistribution {
    dim: usize,
    bits: u32,
    probs: Vec<f64>,
}

impl MeasurementDistribution {
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Outcome distribution of register `axis`.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let side = 1usize << self.bits;
        let shift = axis as u32 * self.bits;
        let mut out = vec![0.0; side];
        for (index, p) in self.probs.iter().enumerate() {
            out[(index >> shift) & (side - 1)] += p;
        }
        out
    }

    /// Probability that decoded coordinate `axis` is farther than `tol` from `target`.
    pub fn miss_probability(&self, axis: usize, target: f64, tol: f64) -> f64 {
        self.marginal(axis)
            .iter()
            .enumerate()
            .filter(|(k, _)| (decode(*k, self.bits) - target).abs() > tol)
            .map(|(_, p)| p)
            .sum()
    }

    /// Total-variation distance to another distribution over the same registers.
    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn sampler(&self) -> Result<Sampler<'_>> {
        let index = WeightedIndex::new(&self.probs)
            .map_err(|e| invalid(&format!("bad distribution: {e}")))?;
        Ok(Sampler { dist: self, index })
    }

    /// Per-register marginals as `register,outcome,value,probability` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("register,outcome,value,probability\n");
        for axis in 0..self.dim {
            for (k, p) in self.marginal(axis).iter().enumerate() {
                let _ = writeln!(out, "{axis},{k},{},{p:.12e}", decode(k, self.bits));
            }
        }
        out
    }
}

pub struct Sampler<'a> {
    dist: &'a MeasurementDistribution,
    index: WeightedIndex<f64>,
}

impl Sampler<'_> {
    /// One measurement, decoded to `signed(k) / 2^m` per register.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let outcome = self.index.sample(rng);
        let mask = (1usize << self.dist.bits) - 1;
        Vector::from_fn(self.dist.dim, |i, _| {
            decode(
                (outcome >> (i as u32 * self.dist.bits)) & mask,
                self.dist.bits,
            )
        })
    }
}

/// Distribution of one run with phase `exp(2πi 2^m h(x))`, `h` tabulated over the grid.
pub fn jordan_distribution(grid: &GridSpec, h: &[f64]) -> Result<MeasurementDistribution> {
    let side = grid.per_axis() as f64;
    let turns: Vec<f64> = h.iter().map(|v| side * v).collect();
    let mut state = Statevector::uniform(grid);
    state.apply_phase(&turns)?;
    state.fourier_registers()?;
    Ok(MeasurementDistribution {
        dim: grid.dim(),
        bits: grid.bits(),
        probs: state.probabilities(),
    })
}

/// One run of the algorithm on `h` (tabulated in basis order).
pub fn jordan_core<R: Rng + ?Sized>(grid: &GridSpec, h: &[f64], rng: &mut R) -> Result<Vector> {
    let dist = jordan_distribution(grid, h)?;
    let sample = dist.sampler()?.sample(rng);
    Ok(sample)
}

/// Tabulates `h` over the unit grid `G_m^n`.
pub fn tabulate<F>(grid: &GridSpec, mut h: F) -> Result<Vec<f64>>
where
    F: FnMut(&Vector) -> Result<f64>,
{
    (0..grid.len()).map(|i| h(&grid.unit_point(i))).collect()
}

/// Phase resolution for a `delta`-accurate evaluator with range bound `B`:
/// `m = ceil(log2(B / (28π δ)))`, with `B` rounded up so that `B / (28π δ) = 2^m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseScale {
    pub bits: u32,
    pub range_bound: f64,
    pub delta: f64,
    /// Fixed-point width of evaluator outputs, `ceil(log2(B / δ)) + 4`.
    pub value_bits: u32,
}

impl PhaseScale {
    pub fn new(range_bound: f64, delta: f64) -> Result<Self> {
        if !(range_bound > 0.0 && delta > 0.0 && range_bound.is_finite()) {
            return Err(invalid("range bound and delta must be positive"));
        }
        let ratio = range_bound / (28.0 * PI * delta);
        let bits = ratio.log2().ceil().max(1.0) as u32;
        let range_bound = 28.0 * PI * delta * 2f64.powi(bits as i32);
        let value_bits = (range_bound / delta).log2().ceil() as u32 + 4;
        Ok(Self {
            bits,
            range_bound,
            delta,
            value_bits,
        })
    }

    /// `M = 2^m`.
    pub fn m(&self) -> f64 {
        2f64.powi(self.bits as i32)
    }

    pub fn resolution(&self) -> f64 {
        self.range_bound * 2f64.powi(-(self.value_bits as i32))
    }

    /// Rounds to the fixed-point grid.
    pub fn quantize(&self, value: f64) -> f64 {
        let q = self.resolution();
        (value / q).round() * q
    }

    /// Coordinatewise error bound `8 * 42π δ / r`.
    pub fn error_bound(&self, r: f64) -> f64 {
        8.0 * 42.0 * PI * self.delta / r
    }
}

/// Medians of `ceil(c ln(2 n' / ρ))` runs, `n' = max(n, 22)`, fail with probability
/// at most `ρ / 2` when every coordinate of a run fails with probability at most `p`;
/// `c = 1 / (2 (1/2 - p)^2)`. Using `n' >= 22` makes the count independent of `n`.
pub fn median_repetitions(rho: f64, single_run_failure: f64) -> Result<usize> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid("rho must lie in (0, 1]"));
    }
    if !(single_run_failure < 0.5) {
        return Err(invalid("single-run failure must be below 1/2"));
    }
    let c = 1.0 / (2.0 * (0.5 - single_run_failure).powi(2));
    let n = DEFAULT_MAX_QUBITS as f64;
    Ok((c * (2.0 * n / rho).ln()).ceil() as usize)
}

/// Standard-oracle runs fail per coordinate with probability at most 1/3.
pub const STANDARD_RUN_FAILURE: f64 = 1.0 / 3.0;
/// Relational runs add at most 1/16 in total variation: 1/3 + 1/16 < 2/5.
pub const RELATIONAL_RUN_FAILURE: f64 = 0.4;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumGradient {
    pub gradient: Vector,
    pub scale: PhaseScale,
    pub repetitions: usize,
    /// Applications of `U` and `U†`.
    pub phase_queries: u64,
    /// Pointwise evaluator calls spent tabulating the grid.
    pub evaluations: u64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn median_gradient<R: Rng + ?Sized>(
    dist: &MeasurementDistribution,
    repetitions: usize,
    factor: f64,
    rng: &mut R,
) -> Result<Vector> {
    let sampler = dist.sampler()?;
    let runs: Vec<Vector> = (0..repetitions).map(|_| sampler.sample(rng)).collect();
    Ok(Vector::from_fn(dist.dim, |i, _| {
        let mut column: Vec<f64> = runs.iter().map(|v| v[i]).collect();
        factor * median(&mut column)
    }))
}

/// Evaluates `f` once on every point of `x0 + r G_m^n`.
fn tabulate_physical<F>(grid: &GridSpec, f: &mut F) -> Result<Vec<f64>>
where
    F: FnMut(&Vector) -> Result<f64>,
{
    (0..grid.len()).map(|i| f(&grid.point(i))).collect()
}

/// Gradient of an approximately linear `f` on `x0 + r G_m^n` from a standard
/// evaluation oracle. Each run applies `U`, a phase `exp(2πi (M / 3B) y)` on the
/// fixed-point output `y`, and `U†`, so two oracle queries per run.
///
/// The grid is tabulated once and reused by every run; this is only faithful
/// for deterministic evaluators.
pub fn grad_via_standard_oracle<F, R>(
    f: &mut F,
    origin: &Vector,
    r: f64,
    range_bound: f64,
    delta: f64,
    rho: f64,
    rng: &mut R,
) -> Result<QuantumGradient>
where
    F: FnMut(&Vector) -> Result<f64>,
    R: Rng + ?Sized,
{
    let scale = PhaseScale::new(range_bound, delta)?;
    let grid = GridSpec::new(scale.bits, origin.clone(), r)?;
    let values = tabulate_physical(&grid, f)?;
    let offset = values[0];
    let h: Vec<f64> = values
        .iter()
        .map(|v| scale.quantize(v - offset) / (3.0 * scale.range_bound))
        .collect();
    let dist = jordan_distribution(&grid, &h)?;
    let repetitions = median_repetitions(rho, STANDARD_RUN_FAILURE)?;
    let gradient = median_gradient(&dist, repetitions, 3.0 * scale.range_bound / r, rng)?;
    Ok(QuantumGradient {
        gradient,
        scale,
        repetitions,
        phase_queries: 2 * repetitions as u64,
        evaluations: grid.len() as u64,
    })
}

/// A relational evaluator: on input `x` it returns the fixed-point value of
/// `f(x)` with probability `1 - junk`, and `f(x) + junk_shift` otherwise, each
/// branch carrying its own ancilla state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelationalApproximator {
    pub junk: f64,
    pub junk_shift: f64,
    /// Calls per `U` application whose median is used; 1 for no amplification.
    pub median_of: usize,
}

impl RelationalApproximator {
    pub fn new(junk: f64, junk_shift: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&junk) {
            return Err(invalid("junk probability must lie in [0, 1]"));
        }
        Ok(Self {
            junk,
            junk_shift,
            median_of: 1,
        })
    }

    /// Takes medians of enough calls to push the junk probability to 1/1200.
    pub fn amplified(self) -> Result<Self> {
        if self.junk >= 0.5 {
            return Err(invalid("median amplification needs junk below 1/2"));
        }
        let mut k = 1;
        while majority_error(k as u32, self.junk) > 1.0 / 1200.0 {
            k += 2;
        }
        Ok(Self {
            median_of: k,
            ..self
        })
    }

    /// Junk probability after median amplification.
    pub fn effective_junk(&self) -> f64 {
        if self.median_of <= 1 {
            self.junk
        } else {
            majority_error(self.median_of as u32, self.junk)
        }
    }
}

/// Exact outcome of one relational run next to the ideal one.
#[derive(Clone, Debug)]
pub struct RelationalRun {
    pub ideal: MeasurementDistribution,
    pub actual: MeasurementDistribution,
    /// `|| O|ψ> - U† cP U |ψ> ||` on the uniform superposition.
    pub state_distance: f64,
}

impl RelationalRun {
    pub fn total_variation(&self) -> f64 {
        self.ideal.total_variation(&self.actual)
    }
}

/// Simulates `U† (I ⊗ cP ⊗ I) U` against the ideal phase oracle with the
/// exact `f`. With `U|0> = φ = sqrt(1-p)|good> + sqrt(p)|junk>` and
/// `U|1'> = sqrt(p)|good> - sqrt(1-p)|junk>`, the output keeps
/// `<φ|cP φ>` on ancilla `|0>` and `<φ'|cP φ>` on `|1'>`.
pub fn relational_run<F>(
    grid: &GridSpec,
    f: &mut F,
    scale: &PhaseScale,
    oracle: &RelationalApproximator,
) -> Result<RelationalRun>
where
    F: FnMut(&Vector) -> Result<f64>,
{
    check_qubits(grid.qubits() + 1)?;
    let exact = tabulate_physical(grid, f)?;
    let offset = exact[0];
    let p = oracle.effective_junk();
    let rate = 2.0 * PI * scale.m() / (3.0 * scale.range_bound);
    let len = grid.len();
    let norm = 1.0 / (len as f64).sqrt();
    let mut ideal = Vec::with_capacity(len);
    let mut kept = Vec::with_capacity(len);
    let mut leaked = Vec::with_capacity(len);
    for v in &exact {
        let value = v - offset;
        let good = scale.quantize(value);
        let junk = good + oracle.junk_shift;
        let e_ideal = Complex64::from_polar(1.0, rate * value);
        let e_good = Complex64::from_polar(1.0, rate * good);
        let e_junk = Complex64::from_polar(1.0, rate * junk);
        ideal.push(e_ideal * norm);
        kept.push((e_good * (1.0 - p) + e_junk * p) * norm);
        leaked.push((e_good - e_junk) * (p * (1.0 - p)).sqrt() * norm);
    }
    let state_distance = ideal
        .iter()
        .zip(&kept)
        .zip(&leaked)
        .map(|((a, b), c)| (a - b).norm_sqr() + c.norm_sqr())
        .sum::<f64>()
        .sqrt();

    let total: f64 = kept.iter().chain(&leaked).map(|a| a.norm_sqr()).sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::InconsistentOracle(format!(
            "state norm drifted to {}",
            total.sqrt()
        )));
    }
    let ideal_state = Statevector::from_amplitudes(grid.dim(), grid.bits(), ideal)?;
    let ideal = finish(ideal_state)?;
    fourier_in_place(&mut kept, grid.dim(), grid.bits());
    fourier_in_place(&mut leaked, grid.dim(), grid.bits());
    let probs: Vec<f64> = kept
        .iter()
        .zip(&leaked)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    let actual = MeasurementDistribution {
        dim: grid.dim(),
        bits: grid.bits(),
        probs,
    };
    Ok(RelationalRun {
        ideal,
        actual,
        state_distance,
    })
}

fn finish(mut state: Statevector) -> Result<MeasurementDistribution> {
    state.fourier_registers()?;
    Ok(MeasurementDistribution {
        dim: state.dim,
        bits: state.bits,
        probs: state.probabilities(),
    })
}

/// As [`grad_via_standard_oracle`] with a relational evaluator. Each `U`
/// application costs `median_of` evaluator queries.
pub fn grad_via_relational_oracle<F, R>(
    f: &mut F,
    oracle: &RelationalApproximator,
    origin: &Vector,
    r: f64,
    range_bound: f64,
    delta: f64,
    rho: f64,
    rng: &mut R,
) -> Result<(QuantumGradient, RelationalRun)>
where
    F: FnMut(&Vector) -> Result<f64>,
    R: Rng + ?Sized,
{
    let scale = PhaseScale::new(range_bound, delta)?;
    let grid = GridSpec::new(scale.bits, origin.clone(), r)?;
    let run = relational_run(&grid, f, &scale, oracle)?;
    let repetitions = median_repetitions(rho, RELATIONAL_RUN_FAILURE)?;
    let gradient = median_gradient(&run.actual, repetitions, 3.0 * scale.range_bound / r, rng)?;
    let gradient = QuantumGradient {
        gradient,
        scale,
        repetitions,
        phase_queries: 2 * (repetitions * oracle.median_of.max(1)) as u64,
        evaluations: grid.len() as u64,
    };
    Ok((gradient, run))
}

/// Parameters of the quantum approximate subgradient at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantumParams {
    pub dim: usize,
    pub r1: f64,
    /// `sqrt(δ r1 ρ / (n L))`.
    pub r2: f64,
    pub delta: f64,
    pub rho: f64,
    pub lipschitz: f64,
    pub grid_bits: u32,
}

impl QuantumParams {
    pub fn new(dim: usize, r1: f64, delta: f64, rho: f64, lipschitz: f64) -> Result<Self> {
        validate(r1, delta, rho, lipschitz)?;
        let n = dim.max(1) as f64;
        if delta > r1 * n * lipschitz / rho {
            return Err(invalid("delta exceeds r1 n L / rho"));
        }
        let r2 = (delta * r1 * rho / (n * lipschitz)).sqrt();
        let grid_bits = default_grid_bits(r1, r2);
        Ok(Self {
            dim,
            r1,
            r2,
            delta,
            rho,
            lipschitz,
            grid_bits,
        })
    }

    /// `(23 n)^2 sqrt(δ L / (ρ r1))`.
    pub fn slack_a(&self) -> f64 {
        let n = self.dim as f64;
        (23.0 * n).powi(2) * (self.delta * self.lipschitz / (self.rho * self.r1)).sqrt()
    }

    /// `2 L sqrt(n) r1`.
    pub fn slack_b(&self) -> f64 {
        2.0 * self.lipschitz * (self.dim as f64).sqrt() * self.r1
    }

    /// Side of the Jordan grid, `2 r2 / n`.
    pub fn jordan_scale(&self) -> f64 {
        2.0 * self.r2 / self.dim.max(1) as f64
    }
}

/// Extra data from a quantum subgradient call.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumSubgradient {
    pub report: GradientReport,
    pub repetitions: usize,
    pub evaluations: u64,
    pub phase_bits: u32,
}

/// Picks `z` on a grid of `B_inf(0, r1)` and runs the standard-oracle gradient
/// over `z + (2 r2 / n) G_m^n` with `B = L r`. In dimension 0 the gradient is empty.
pub fn quantum_subgradient<F, R>(
    f: &mut F,
    params: &QuantumParams,
    rng: &mut R,
) -> Result<QuantumSubgradient>
where
    F: FnMut(&Vector) -> Result<f64>,
    R: Rng + ?Sized,
{
    let z = sample_grid_point(params.dim, params.r1, params.grid_bits, rng);
    let (gradient, repetitions, evaluations, bits) = if params.dim == 0 {
        let repetitions = median_repetitions(params.rho, STANDARD_RUN_FAILURE)?;
        f(&z)?;
        (Vector::zeros(0), repetitions, 1, 0)
    } else {
        let r = params.jordan_scale();
        let q = grad_via_standard_oracle(
            f,
            &z,
            r,
            params.lipschitz * r,
            params.delta,
            params.rho,
            rng,
        )?;
        (q.gradient, q.repetitions, q.evaluations, q.scale.bits)
    };
    Ok(QuantumSubgradient {
        report: GradientReport {
            gradient,
            slack_a: params.slack_a(),
            slack_b: params.slack_b(),
            z,
            method: GradientMethod::JordanSim,
            queries: 2 * repetitions as u64,
        },
        repetitions,
        evaluations,
        phase_bits: bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear_h(grid: &GridSpec, g: &[f64]) -> Vec<f64> {
        let g = Vector::from_column_slice(g);
        tabulate(grid, |x| Ok(g.dot(x))).unwrap()
    }

    #[test]
    fn grid_points_are_centred_cells() {
        let grid = GridSpec::new(2, Vector::from_vec(vec![1.0, 0.0]), 4.0).unwrap();
        assert_eq!(grid.unit_coordinate(0), -0.375);
        assert_eq!(grid.unit_coordinate(3), 0.375);
        assert_eq!(grid.digits(0b1101), vec![1, 3]);
        assert_eq!(grid.point(0b1101), Vector::from_vec(vec![0.5, 1.5]));
    }

    #[test]
    fn decode_window() {
        assert_eq!(decode(0, 4), 0.0);
        assert_eq!(decode(3, 4), 3.0 / 16.0);
        assert_eq!(decode(8, 4), -0.5);
        assert_eq!(decode(15, 4), -1.0 / 16.0);
    }

    #[test]
    fn constant_phase_concentrates_on_zero() {
        let grid = GridSpec::new(3, Vector::zeros(2), 1.0).unwrap();
        let dist = jordan_distribution(&grid, &linear_h(&grid, &[0.0, 0.0])).unwrap();
        assert!((dist.probabilities()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integral_frequency_is_exact() {
        let grid = GridSpec::new(5, Vector::zeros(1), 1.0).unwrap();
        let dist = jordan_distribution(&grid, &linear_h(&grid, &[0.25])).unwrap();
        assert!((dist.probabilities()[8] - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(
                jordan_core(&grid, &linear_h(&grid, &[0.25]), &mut rng).unwrap()[0],
                0.25
            );
        }
    }

    #[test]
    fn negative_frequency_decodes_with_sign() {
        let grid = GridSpec::new(4, Vector::zeros(1), 1.0).unwrap();
        let dist = jordan_distribution(&grid, &linear_h(&grid, &[-0.25])).unwrap();
        assert!((dist.probabilities()[12] - 1.0).abs() < 1e-12);
        assert_eq!(decode(12, 4), -0.25);
    }

    #[test]
    fn marginals_match_fejer_kernel() {
        let g = [0.30, -0.20];
        let grid = GridSpec::new(4, Vector::zeros(2), 1.0).unwrap();
        let dist = jordan_distribution(&grid, &linear_h(&grid, &g)).unwrap();
        let side = 16.0;
        for (axis, gi) in g.iter().enumerate() {
            for (k, p) in dist.marginal(axis).iter().enumerate() {
                let t = gi - k as f64 / side;
                // |sum_j exp(2πi j t)|^2 / L^2 by direct summation.
                let s: Complex64 = (0..16)
                    .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 * t))
                    .sum();
                assert!((p - s.norm_sqr() / (side * side)).abs() < 1e-12);
            }
            assert!(dist.miss_probability(axis, *gi, 0.25) <= 1.0 / 3.0);
        }
    }

    #[test]
    fn capability_cap() {
        let err = GridSpec::new(12, Vector::zeros(2), 1.0).unwrap_err();
        assert!(matches!(
            err,
            Error::Capability {
                qubits: 24,
                cap: 22
            }
        ));
    }

    #[test]
    fn phase_scale_power_of_two() {
        let s = PhaseScale::new(1.0, 1e-4).unwrap();
        assert_eq!(s.bits, (1.0 / (28.0 * PI * 1e-4)).log2().ceil() as u32);
        assert!((s.range_bound / (28.0 * PI * 1e-4) - s.m()).abs() < 1e-9 * s.m());
        assert!(s.range_bound >= 1.0);
        assert!(s.resolution() <= s.delta / 16.0 + 1e-18);
    }

    #[test]
    fn repetitions_are_dimension_free() {
        assert_eq!(
            median_repetitions(0.05, STANDARD_RUN_FAILURE).unwrap(),
            (18.0 * (44.0f64 / 0.05).ln()).ceil() as usize
        );
        assert!(median_repetitions(0.05, 0.5).is_err());
    }

    #[test]
    fn standard_oracle_recovers_linear_gradient() {
        let g = Vector::from_vec(vec![0.7, -1.1, 0.4]);
        let (r, delta) = (0.5, 1e-5);
        let mut f = |x: &Vector| Ok(g.dot(x) + 3.0);
        let origin = Vector::from_vec(vec![0.1, 0.0, -0.2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bound = 1.2 * r;
        let scale = PhaseScale::new(bound, delta).unwrap();
        if scale.bits * 3 > DEFAULT_MAX_QUBITS {
            return;
        }
        let q = grad_via_standard_oracle(&mut f, &origin, r, bound, delta, 0.05, &mut rng).unwrap();
        assert!((q.gradient - &g).amax() <= scale.error_bound(r));
        assert_eq!(q.phase_queries, 2 * q.repetitions as u64);
    }

    #[test]
    fn relational_reduces_to_standard_without_junk() {
        let grid = GridSpec::new(4, Vector::zeros(1), 1.0).unwrap();
        let scale = PhaseScale::new(1.0, 1.0 / (28.0 * PI * 16.0)).unwrap();
        assert_eq!(scale.bits, 4);
        let mut f = |x: &Vector| Ok(0.3 * x[0]);
        let oracle = RelationalApproximator::new(0.0, 0.0).unwrap();
        let run = relational_run(&grid, &mut f, &scale, &oracle).unwrap();
        assert!(run.state_distance < 1.0 / 42.0 + 1e-12);
    }

    #[test]
    fn amplified_junk_meets_budget() {
        let o = RelationalApproximator::new(0.2, 1.0)
            .unwrap()
            .amplified()
            .unwrap();
        assert!(o.median_of > 1);
        assert!(o.effective_junk() <= 1.0 / 1200.0);
    }

    #[test]
    fn quantum_slack_spot_value() {
        let p = QuantumParams::new(2, 0.01, 1e-6, 0.1, 1.0).unwrap();
        assert!((p.slack_a() - 2116.0 * 1e-3f64.sqrt()).abs() < 1e-9);
        assert!((p.slack_b() - 0.02 * 2f64.sqrt()).abs() < 1e-15);
    }
}
