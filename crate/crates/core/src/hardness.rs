//! Lower-bound instances: codeword caps, corner boxes, first-difference
//! learning, and a numerical check of the adversary-matrix norm bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, invalid};
use crate::geometry::{ConvexBody, Hyperplane, Vector};
use crate::oracles::{
    Oracle, OracleHandle, QueryLedger, SepAnswer, SeparationOracle, ValAnswer, ValidityOracle,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Codeword caps

/// Largest cap accuracy for which separation answers decode uniquely.
pub const MAX_CAP_EPS: f64 = 1.0 / 48.0;
/// Decoding threshold on `|<g, h_j>|`.
pub const DECODE_THRESHOLD: f64 = 19.0 / 20.0;
/// Bound on pairwise inner products of codewords.
pub const MAX_CODEWORD_COSINE: f64 = 0.51;

/// Rejection-sampling thresholds for codewords.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CodewordParams {
    /// Minimum Hamming weight as a fraction of `n`.
    pub min_weight: f64,
    /// Maximum pairwise overlap as a fraction of `n`.
    pub max_overlap: f64,
    /// Target family size is `2^floor(n / growth)`.
    pub growth: usize,
    pub max_attempts: u64,
}

impl Default for CodewordParams {
    fn default() -> Self {
        Self {
            min_weight: 0.495,
            max_overlap: 0.252,
            growth: 10,
            max_attempts: 1_000_000,
        }
    }
}

impl CodewordParams {
    pub fn target_size(&self, n: usize) -> usize {
        1usize << (n / self.growth).min(30)
    }
}

/// Rejections in a row before the greedy family is discarded.
const RESTART_AFTER: u64 = 20_000;

/// Entrywise nonnegative unit vectors with pairwise inner products at most 0.51.
#[derive(Clone, Debug, PartialEq)]
pub struct CodewordFamily {
    pub n: usize,
    pub words: Vec<Vector>,
    /// Candidates drawn but rejected.
    pub rejected: u64,
}

impl CodewordFamily {
    pub fn generate(n: usize, params: &CodewordParams, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("codewords need n >= 1"));
        }
        let target = params.target_size(n);
        let min_weight = (params.min_weight * n as f64).ceil() as u32;
        let max_overlap = (params.max_overlap * n as f64).floor() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut accepted: Vec<Vec<bool>> = Vec::new();
        let mut rejected = 0u64;
        let mut attempts = 0u64;
        let mut since_accept = 0u64;
        while accepted.len() < target {
            if attempts >= params.max_attempts {
                return Err(Error::IterationCap(params.max_attempts as usize));
            }
            attempts += 1;
            // A greedy family can get stuck near-maximal; start over.
            if since_accept >= RESTART_AFTER {
                accepted.clear();
                since_accept = 0;
            }
            since_accept += 1;
            let bits: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let weight = bits.iter().filter(|&&b| b).count() as u32;
            let ok = weight >= min_weight.max(1)
                && accepted.iter().all(|w| overlap(w, &bits) <= max_overlap);
            if ok {
                accepted.push(bits);
                since_accept = 0;
            } else {
                rejected += 1;
            }
        }
        let words = accepted
            .iter()
            .map(|bits| {
                let v = Vector::from_iterator(n, bits.iter().map(|&b| if b { 1.0 } else { 0.0 }));
                v.normalize()
            })
            .collect();
        let family = Self { n, words, rejected };
        family.verify()?;
        Ok(family)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Re-checks unit norm, nonnegativity and the pairwise bound.
    pub fn verify(&self) -> Result<()> {
        for (i, h) in self.words.iter().enumerate() {
            if (h.norm() - 1.0).abs() > 1e-12 || h.iter().any(|&x| x < 0.0) {
                return Err(invalid(format!(
                    "codeword {i} is not a nonnegative unit vector"
                )));
            }
            for (j, other) in self.words.iter().enumerate().skip(i + 1) {
                if h.dot(other) > MAX_CODEWORD_COSINE {
                    return Err(invalid(format!("codewords {i} and {j} overlap too much")));
                }
            }
        }
        Ok(())
    }

    /// The unique index `j` with `|<g, h_j>| >= 19/20`.
    pub fn decode(&self, g: &Vector) -> Option<usize> {
        let mut hits = self
            .words
            .iter()
            .enumerate()
            .filter(|(_, h)| h.dot(g).abs() >= DECODE_THRESHOLD);
        let first = hits.next()?.0;
        hits.next().is_none().then_some(first)
    }
}

fn overlap(a: &[bool], b: &[bool]) -> u32 {
    a.iter().zip(b).filter(|(x, y)| **x && **y).count() as u32
}

/// Bodies `K_i = B({<h_i, x> <= 0} ∩ B(0, sqrt n), eps)`.
#[derive(Clone, Debug)]
pub struct CodewordCaps {
    pub family: CodewordFamily,
    pub eps: f64,
    pub bodies: Vec<ConvexBody>,
    /// `-e/3`, with `B(x0, 1/3) ⊆ K_i ⊆ B(x0, 2 sqrt n)` for every `i`.
    pub anchor: Vector,
}

pub fn gen_codeword_caps(
    n: usize,
    eps: f64,
    params: &CodewordParams,
    seed: u64,
) -> Result<CodewordCaps> {
    if !(eps > 0.0 && eps <= MAX_CAP_EPS) {
        return Err(invalid(format!(
            "cap accuracy must lie in (0, 1/48], got {eps}"
        )));
    }
    let family = CodewordFamily::generate(n, params, seed)?;
    let radius = (n as f64).sqrt();
    let anchor = Vector::from_element(n, -1.0 / 3.0);
    let mut bodies = Vec::with_capacity(family.len());
    for h in &family.words {
        let body = ConvexBody::capped_ball(h.clone(), radius)?.shrink_expand(eps)?;
        check_cap_bounds(&body, h, &anchor, radius, eps)?;
        bodies.push(body);
    }
    Ok(CodewordCaps {
        family,
        eps,
        bodies,
        anchor,
    })
}

/// `B(x0, 1/3)` lies in the half-space and the ball; `K` lies in `B(x0, 2 sqrt n)`.
fn check_cap_bounds(
    body: &ConvexBody,
    h: &Vector,
    x0: &Vector,
    radius: f64,
    eps: f64,
) -> Result<()> {
    let inner_halfspace = h.dot(x0) + 1.0 / 3.0 <= 0.0;
    let inner_ball = x0.norm() + 1.0 / 3.0 <= radius;
    let mut outer = true;
    for i in 0..x0.len() {
        for sign in [1.0, -1.0] {
            let mut u = Vector::zeros(x0.len());
            u[i] = sign;
            outer &= body.support(&u)? - u.dot(x0) <= 2.0 * radius;
        }
    }
    outer &= radius + eps + x0.norm() <= 2.0 * radius;
    if inner_halfspace && inner_ball && outer {
        Ok(())
    } else {
        Err(invalid(
            "codeword cap violates B(x0,1/3) ⊆ K ⊆ B(x0,2 sqrt n)",
        ))
    }
}

impl CodewordCaps {
    /// The query point `3 eps e`.
    pub fn probe(&self) -> Vector {
        Vector::from_element(self.family.n, 3.0 * self.eps)
    }

    /// Queries a weak separation oracle for `K_i` at the probe and decodes.
    pub fn decode_trial(&self, i: usize, seed: u64) -> Result<Option<usize>> {
        let body = self
            .bodies
            .get(i)
            .ok_or_else(|| invalid("cap index out of range"))?
            .clone();
        let mut sep = OracleHandle::new(body, self.eps, 0.0, seed)?;
        match sep.query_sep(&self.probe())? {
            SepAnswer::Separated(plane) => Ok(self.family.decode(plane.normal())),
            SepAnswer::InExpanded => Err(Error::InconsistentOracle(
                "probe reported inside a cap".into(),
            )),
        }
    }
}

// ---------------------------------------------------------------------------
// Corner boxes

/// `K_z = prod [-1, z_i]` for `z` of Hamming weight at most one.
pub fn gen_corner_box(z: &[bool]) -> Result<ConvexBody> {
    if z.is_empty() {
        return Err(invalid("corner box needs n >= 1"));
    }
    if z.iter().filter(|&&b| b).count() > 1 {
        return Err(invalid("corner box needs |z| <= 1"));
    }
    let n = z.len();
    let upper = Vector::from_iterator(n, z.iter().map(|&b| if b { 1.0 } else { 0.0 }));
    ConvexBody::axis_box(Vector::from_element(n, -1.0), upper)
}

/// Strong separation for `K_z` using at most one query to a bit of `z`.
#[derive(Clone, Debug)]
pub struct CornerBoxSep {
    z: Vec<bool>,
    bit_queries: u64,
    ledger: QueryLedger,
}

impl CornerBoxSep {
    pub fn new(z: Vec<bool>) -> Result<Self> {
        gen_corner_box(&z)?;
        Ok(Self {
            z,
            bit_queries: 0,
            ledger: QueryLedger::default(),
        })
    }

    pub fn bit_queries(&self) -> u64 {
        self.bit_queries
    }

    fn bit(&mut self, i: usize) -> bool {
        self.bit_queries += 1;
        self.z[i]
    }
}

fn axis_cut(n: usize, i: usize, sign: f64, y: &Vector) -> Result<SepAnswer> {
    let mut normal = Vector::zeros(n);
    normal[i] = sign;
    Ok(SepAnswer::Separated(Hyperplane::through(normal, y)?))
}

/// Separates `y` from `[lo, hi]^n` along the most violated coordinate, if any.
fn cube_cut(y: &Vector, lo: f64, hi: f64) -> Result<Option<SepAnswer>> {
    let mut worst: Option<(usize, f64, f64)> = None;
    for (i, &v) in y.iter().enumerate() {
        let (excess, sign) = if v > hi {
            (v - hi, 1.0)
        } else if v < lo {
            (lo - v, -1.0)
        } else {
            continue;
        };
        if worst.is_none_or(|(_, e, _)| excess > e) {
            worst = Some((i, excess, sign));
        }
    }
    worst
        .map(|(i, _, sign)| axis_cut(y.len(), i, sign, y))
        .transpose()
}

impl Oracle for CornerBoxSep {
    fn dim(&self) -> usize {
        self.z.len()
    }
    fn eps(&self) -> f64 {
        0.0
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl SeparationOracle for CornerBoxSep {
    fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer> {
        let n = self.z.len();
        check_dim(n, y.len())?;
        self.ledger.sep += 1;
        let before = self.bit_queries;
        let answer = if y.iter().all(|&v| (-1.0..=0.0).contains(&v)) {
            SepAnswer::InExpanded
        } else if let Some(cut) = cube_cut(y, -1.0, 1.0)? {
            cut
        } else {
            let positive: Vec<usize> = (0..n).filter(|&j| y[j] > 0.0).collect();
            let i = positive[0];
            if self.bit(i) {
                match positive.get(1) {
                    None => SepAnswer::InExpanded,
                    Some(&j) => axis_cut(n, j, 1.0, y)?,
                }
            } else {
                axis_cut(n, i, 1.0, y)?
            }
        };
        assert!(
            self.bit_queries - before <= 1,
            "corner-box separation used more than one bit query"
        );
        Ok(answer)
    }
}

/// Parameters of the validity game on a corner box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValGame {
    pub n: usize,
    pub gamma: f64,
    pub eps: f64,
}

impl ValGame {
    /// `c = e/sqrt n`, `gamma = 1/(2 sqrt n)`, `eps = 1/(5n)`.
    pub fn new(n: usize) -> Self {
        let s = (n as f64).sqrt();
        Self {
            n,
            gamma: 1.0 / (2.0 * s),
            eps: 1.0 / (5.0 * n as f64),
        }
    }

    pub fn objective(&self) -> Vector {
        Vector::from_element(self.n, 1.0 / (self.n as f64).sqrt())
    }

    /// The answer every valid oracle must give on `K_z`, if only one is valid.
    pub fn forced_answer(&self, z: &[bool]) -> Result<Option<ValAnswer>> {
        check_dim(self.n, z.len())?;
        let body = gen_corner_box(z)?;
        let c = self.objective();
        let above_possible = body.shrink_expand(self.eps)?.support(&c)? >= self.gamma - self.eps;
        let below_possible = match body.try_shrink(self.eps) {
            Some(shrunk) => shrunk.support(&c)? <= self.gamma + self.eps,
            None => true,
        };
        Ok(match (below_possible, above_possible) {
            (true, false) => Some(ValAnswer::AllBelow),
            (false, true) => Some(ValAnswer::SomeAbove),
            _ => None,
        })
    }

    /// Runs a weak validity oracle for `K_z` and reads off `|z|`.
    pub fn play<V: ValidityOracle>(&self, val: &mut V) -> Result<usize> {
        Ok(match val.query_val(&self.objective(), self.gamma)? {
            ValAnswer::AllBelow => 0,
            ValAnswer::SomeAbove => 1,
        })
    }

    /// Validity oracle for `K_z` with this game's accuracy.
    pub fn oracle(&self, z: &[bool], seed: u64) -> Result<OracleHandle> {
        OracleHandle::new(gen_corner_box(z)?, self.eps, 0.0, seed)
    }
}

// ---------------------------------------------------------------------------
// First-difference learning

/// Answers `f(g, z)`: the first (1-based) index where `g` and `z` differ, or
/// `n + 1` if they agree.
#[derive(Clone, Debug)]
pub struct FirstDiffOracle {
    z: Vec<bool>,
    queries: u64,
}

impl FirstDiffOracle {
    pub fn new(z: Vec<bool>) -> Self {
        Self { z, queries: 0 }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self::new((0..n).map(|_| rng.gen()).collect())
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn hidden(&self) -> &[bool] {
        &self.z
    }

    pub fn query(&mut self, g: &[bool]) -> Result<usize> {
        check_dim(self.z.len(), g.len())?;
        self.queries += 1;
        Ok(first_diff(g, &self.z))
    }
}

pub fn first_diff(g: &[bool], z: &[bool]) -> usize {
    g.iter()
        .zip(z)
        .position(|(a, b)| a != b)
        .map_or(g.len() + 1, |i| i + 1)
}

/// Query the current guess, flip the returned index, repeat.
pub fn greedy_learner(oracle: &mut FirstDiffOracle) -> Result<Vec<bool>> {
    let n = oracle.n();
    let mut guess = vec![false; n];
    loop {
        let i = oracle.query(&guess)?;
        if i == n + 1 {
            return Ok(guess);
        }
        guess[i - 1] = !guess[i - 1];
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameOutcome {
    pub recovered: bool,
    pub queries: u64,
}

pub fn first_diff_game(oracle: &mut FirstDiffOracle) -> Result<GameOutcome> {
    let guess = greedy_learner(oracle)?;
    Ok(GameOutcome {
        recovered: guess == oracle.hidden(),
        queries: oracle.queries(),
    })
}

/// Strong separation for `K_z = B_inf(z, 1/3)` using one first-difference
/// query per call.
#[derive(Debug)]
pub struct FirstDiffSep<'a> {
    oracle: &'a mut FirstDiffOracle,
    ledger: QueryLedger,
}

impl<'a> FirstDiffSep<'a> {
    pub fn new(oracle: &'a mut FirstDiffOracle) -> Self {
        Self {
            oracle,
            ledger: QueryLedger::default(),
        }
    }

    pub fn first_diff_queries(&self) -> u64 {
        self.oracle.queries()
    }
}

impl Oracle for FirstDiffSep<'_> {
    fn dim(&self) -> usize {
        self.oracle.n()
    }
    fn eps(&self) -> f64 {
        0.0
    }
    fn rho(&self) -> f64 {
        0.0
    }
    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl SeparationOracle for FirstDiffSep<'_> {
    fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer> {
        let n = self.oracle.n();
        check_dim(n, y.len())?;
        self.ledger.sep += 1;
        if let Some(cut) = cube_cut(y, -1.0 / 3.0, 4.0 / 3.0)? {
            return Ok(cut);
        }
        let before = self.oracle.queries();
        let corner: Vec<bool> = y.iter().map(|&v| v >= 0.5).collect();
        let i = self.oracle.query(&corner)?;
        assert_eq!(self.oracle.queries() - before, 1);
        if i == n + 1 {
            let mut lo = Vector::zeros(n);
            let mut hi = Vector::zeros(n);
            for (k, &b) in corner.iter().enumerate() {
                let c = if b { 1.0 } else { 0.0 };
                lo[k] = c - 1.0 / 3.0;
                hi[k] = c + 1.0 / 3.0;
            }
            for k in 0..n {
                if y[k] > hi[k] {
                    return axis_cut(n, k, 1.0, y);
                }
                if y[k] < lo[k] {
                    return axis_cut(n, k, -1.0, y);
                }
            }
            return Ok(SepAnswer::InExpanded);
        }
        axis_cut(n, i - 1, if corner[i - 1] { 1.0 } else { -1.0 }, y)
    }
}

/// Rounds each coordinate to the nearer of 0 and 1.
pub fn round_to_corner(x: &Vector) -> Vec<bool> {
    x.iter().map(|&v| v >= 0.5).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub trial: u64,
    pub queries: u64,
    pub recovered: bool,
}

/// Greedy learner on `trials` random strings; trial `t` draws `z` from the
/// ChaCha stream `(seed, t)`.
pub fn first_diff_bench(n: usize, trials: u64, seed: u64) -> Result<Vec<BenchRow>> {
    if n == 0 {
        return Err(invalid("first-difference bench needs n >= 1"));
    }
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let mut oracle = FirstDiffOracle::random(n, &mut rng);
            let outcome = first_diff_game(&mut oracle)?;
            Ok(BenchRow {
                trial,
                queries: outcome.queries,
                recovered: outcome.recovered,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Adversary matrices

pub const MAX_ADVERSARY_N: usize = 10;
/// Above this `n` the masks are a random sample.
pub const EXHAUSTIVE_MASK_N: usize = 8;
pub const SAMPLED_MASKS: usize = 256;

/// `f` on bit strings stored as integers, position `i` at bit `i - 1`.
fn first_diff_bits(a: u64, b: u64, n: usize) -> usize {
    let d = a ^ b;
    if d == 0 {
        n + 1
    } else {
        d.trailing_zeros() as usize + 1
    }
}

/// `Gamma[z, z'] = 2^f(z, z')` off the diagonal, as exact integers.
pub fn gamma_matrix(n: usize) -> Vec<Vec<u64>> {
    let size = 1u64 << n;
    (0..size)
        .map(|z| {
            (0..size)
                .map(|w| {
                    if z == w {
                        0
                    } else {
                        1u64 << first_diff_bits(z, w, n)
                    }
                })
                .collect()
        })
        .collect()
}

/// `Gamma ∘ Delta_g`: keeps entries with `f(g, z) != f(g, z')`.
pub fn masked_gamma(n: usize, g: u64) -> DMatrix<f64> {
    let size = 1usize << n;
    DMatrix::from_fn(size, size, |z, w| {
        let (z, w) = (z as u64, w as u64);
        if z != w && first_diff_bits(g, z, n) != first_diff_bits(g, w, n) {
            (1u64 << first_diff_bits(z, w, n)) as f64
        } else {
            0.0
        }
    })
}

/// Upper part `2^f(z, z') [f(g, z) < f(g, z')]`.
pub fn upper_gamma(n: usize, g: u64) -> DMatrix<f64> {
    let size = 1usize << n;
    DMatrix::from_fn(size, size, |z, w| {
        let (fz, fw) = (
            first_diff_bits(g, z as u64, n),
            first_diff_bits(g, w as u64, n),
        );
        if fz < fw {
            (1u64 << first_diff_bits(z as u64, w as u64, n)) as f64
        } else {
            0.0
        }
    })
}

/// `G = V' Gamma_g^U V` with `V` the normalized block indicators.
pub fn reduced_block_matrix(n: usize, g: u64, upper: &DMatrix<f64>) -> DMatrix<f64> {
    let size = 1usize << n;
    let mut basis = DMatrix::zeros(size, n + 1);
    for y in 0..size {
        let k = first_diff_bits(g, y as u64, n);
        let block = if k == n + 1 {
            1.0
        } else {
            2f64.powi((n - k) as i32)
        };
        basis[(y, k - 1)] = 1.0 / block.sqrt();
    }
    basis.transpose() * upper * basis
}

/// `G[k, l] = 2^(n - (l - k)/2) [k < l]`, times `sqrt 2` when `l = n + 1`.
pub fn block_entry(n: usize, k: usize, l: usize) -> f64 {
    if k >= l {
        return 0.0;
    }
    let base = 2f64.powf(n as f64 - (l - k) as f64 / 2.0);
    if l == n + 1 {
        2f64.sqrt() * base
    } else {
        base
    }
}

/// Spectral norm of a symmetric matrix with the residual of its top eigenpair.
pub fn symmetric_norm(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(a.clone());
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .unwrap_or((0, 0.0));
    if a.nrows() == 0 {
        return (0.0, 0.0);
    }
    let v = eig.eigenvectors.column(idx);
    let residual = (a * v - v * lambda).norm();
    (lambda.abs(), residual)
}

fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskCheck {
    pub mask: u64,
    pub masked_norm: f64,
    pub residual: f64,
    pub upper_norm: f64,
    pub block_norm: f64,
    pub block_formula_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversaryReport {
    pub n: usize,
    pub exhaustive: bool,
    pub masks_checked: usize,
    /// Every row sum of `Gamma`, which must all equal `n 2^n`.
    pub row_sum: u64,
    pub row_sums_exact: bool,
    pub gamma_norm: f64,
    pub max_masked_norm: f64,
    pub masked_bound: f64,
    pub max_block_norm: f64,
    pub block_bound: f64,
    /// Largest `| |Gamma_g^U| - |G| | / |G|`.
    pub block_reduction_error: f64,
    pub block_formula_error: f64,
    /// Largest `|Av - lambda v| / |A|`.
    pub max_relative_residual: f64,
    pub lower_bound_ratio: f64,
    pub masks: Vec<MaskCheck>,
}

impl AdversaryReport {
    pub fn eigen_ok(&self) -> bool {
        self.row_sums_exact
    }

    pub fn masked_ok(&self) -> bool {
        self.max_masked_norm <= self.masked_bound && self.max_relative_residual <= 1e-8
    }

    pub fn block_ok(&self) -> bool {
        self.max_block_norm <= self.block_bound
            && self.block_reduction_error <= 1e-9
            && self.block_formula_error <= 1e-9
    }
}

/// Builds `Gamma` and checks `Gamma e = n 2^n e` and the masked-norm bounds.
pub fn verify_adversary_bounds(n: usize, seed: u64) -> Result<AdversaryReport> {
    if n == 0 || n > MAX_ADVERSARY_N {
        return Err(invalid(format!(
            "adversary check supports 1 <= n <= {MAX_ADVERSARY_N}"
        )));
    }
    let gamma = gamma_matrix(n);
    let expected = n as u64 * (1u64 << n);
    let row_sums_exact = gamma.iter().all(|row| row.iter().sum::<u64>() == expected);
    let gamma_f = DMatrix::from_fn(gamma.len(), gamma.len(), |i, j| gamma[i][j] as f64);
    let (gamma_norm, _) = symmetric_norm(&gamma_f);

    let exhaustive = n <= EXHAUSTIVE_MASK_N;
    let full = 1u64 << n;
    let masks: Vec<u64> = if exhaustive {
        (0..full).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = vec![0, full - 1];
        m.extend((0..SAMPLED_MASKS).map(|_| rng.gen_range(0..full)));
        m
    };

    let checks: Vec<MaskCheck> = masks
        .par_iter()
        .map(|&g| {
            let masked = masked_gamma(n, g);
            let (masked_norm, residual) = symmetric_norm(&masked);
            let upper = upper_gamma(n, g);
            let upper_norm = spectral_norm(&upper);
            let block = reduced_block_matrix(n, g, &upper);
            let block_norm = spectral_norm(&block);
            let mut formula = 0.0f64;
            for k in 0..=n {
                for l in 0..=n {
                    let want = block_entry(n, k + 1, l + 1);
                    formula = formula.max((block[(k, l)] - want).abs() / want.max(1.0));
                }
            }
            MaskCheck {
                mask: g,
                masked_norm,
                residual,
                upper_norm,
                block_norm,
                block_formula_error: formula,
            }
        })
        .collect();

    let max_masked_norm = checks.iter().map(|c| c.masked_norm).fold(0.0, f64::max);
    let max_block_norm = checks.iter().map(|c| c.block_norm).fold(0.0, f64::max);
    let block_reduction_error = checks
        .iter()
        .map(|c| (c.upper_norm - c.block_norm).abs() / c.block_norm.max(1.0))
        .fold(0.0, f64::max);
    let block_formula_error = checks
        .iter()
        .map(|c| c.block_formula_error)
        .fold(0.0, f64::max);
    let max_relative_residual = checks
        .iter()
        .map(|c| c.residual / c.masked_norm.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(AdversaryReport {
        n,
        exhaustive,
        masks_checked: checks.len(),
        row_sum: expected,
        row_sums_exact,
        gamma_norm,
        max_masked_norm,
        masked_bound: 2f64.powi(n as i32 + 3),
        max_block_norm,
        block_bound: 2f64.powi(n as i32 + 2),
        block_reduction_error,
        block_formula_error,
        max_relative_residual,
        lower_bound_ratio: expected as f64 / max_masked_norm,
        masks: checks,
    })
}
