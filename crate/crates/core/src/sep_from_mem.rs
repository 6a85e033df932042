//! Separation from membership.
//!
//! To separate `x` from `K` with `B(x0, r) ⊆ K ⊆ B(x0, R)`, translate `x0` to
//! the origin and rotate so that `x = -|x| e_n`. The height function
//! `h(y) = inf { t : (y, t) ∈ K }` on `R^(n-1)` is convex and `2R/r`-Lipschitz on
//! `B(0, r/2)`, and each value costs one binary search over membership queries.
//! An approximate subgradient `g` of `h` at 0 turns into the normal
//! `(-g, 1) / |(-g, 1)|`, flipped and rotated back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, invalid};
use crate::geometry::{ConvexBody, Hyperplane, Vector};
use crate::jordan::{quantum_subgradient, QuantumParams};
use crate::oracles::{
    MemAnswer, MembershipOracle, Oracle, OracleKind, QueryLedger, SepAnswer, SeparationOracle,
};
use crate::subgrad::{classical_subgradient, FdParams, GradientReport};
use crate::{Error, Result};

/// Orthogonal map sending a given direction to `-e_n`, stored as Givens
/// rotations on coordinate pairs `(k, n-1)` for `k = n-2, ..., 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    dim: usize,
    /// `(k, cos, sin)` acting as `a' = c a + s b`, `b' = -s a + c b`.
    steps: Vec<(usize, f64, f64)>,
    /// Used in one dimension, where no plane rotation exists.
    flip: bool,
}

impl Rotation {
    pub fn toward_negative_last_axis(v: &Vector) -> Result<Self> {
        let dim = v.len();
        if dim == 0 {
            return Err(invalid("empty direction"));
        }
        if v.norm() == 0.0 {
            return Err(invalid("cannot rotate the zero vector"));
        }
        let last = dim - 1;
        let mut w = v.clone();
        let mut steps = Vec::with_capacity(last);
        for k in (0..last).rev() {
            let (a, b) = (w[k], w[last]);
            let rho = a.hypot(b);
            if rho == 0.0 {
                continue;
            }
            let (c, s) = (-b / rho, a / rho);
            steps.push((k, c, s));
            w[k] = 0.0;
            w[last] = -rho;
        }
        let flip = dim == 1 && v[0] > 0.0;
        Ok(Self { dim, steps, flip })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            steps: Vec::new(),
            flip: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let mut w = v.clone();
        let last = self.dim - 1;
        for &(k, c, s) in &self.steps {
            let (a, b) = (w[k], w[last]);
            w[k] = c * a + s * b;
            w[last] = -s * a + c * b;
        }
        if self.flip {
            w[0] = -w[0];
        }
        w
    }

    pub fn apply_inverse(&self, v: &Vector) -> Vector {
        let mut w = v.clone();
        let last = self.dim - 1;
        if self.flip {
            w[0] = -w[0];
        }
        for &(k, c, s) in self.steps.iter().rev() {
            let (a, b) = (w[k], w[last]);
            w[k] = c * a - s * b;
            w[last] = s * a + c * b;
        }
        w
    }
}

/// Lipschitz constant `R / (r - d)` of the height function on `B(0, d)`.
pub fn lipschitz_bound(r: f64, big_r: f64, ball: f64) -> Result<f64> {
    if !(r > 0.0 && big_r >= r) {
        return Err(invalid("need 0 < r <= R"));
    }
    if !(ball >= 0.0 && ball < r) {
        return Err(invalid("ball radius must lie in [0, r)"));
    }
    Ok(big_r / (r - ball))
}

/// What the reduction knows about the body: `B(center, r) ⊆ K ⊆ B(center, R)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BodyBounds {
    pub center: Vec<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

impl BodyBounds {
    pub fn new(center: Vector, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && outer_radius >= inner_radius && outer_radius.is_finite()) {
            return Err(invalid("need 0 < r <= R"));
        }
        Ok(Self {
            center: center.iter().copied().collect(),
            inner_radius,
            outer_radius,
        })
    }

    pub fn of(body: &ConvexBody) -> Self {
        Self {
            center: body.center().iter().copied().collect(),
            inner_radius: body.inner_radius(),
            outer_radius: body.outer_radius(),
        }
    }

    pub fn center(&self) -> Vector {
        Vector::from_column_slice(&self.center)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Search interval for `h`: the top `-r/2` is inside `K`, the bottom is
/// outside `B(0, R)`.
fn bracket(bounds: &BodyBounds, eps: f64) -> (f64, f64) {
    (-bounds.outer_radius - 2.0 * eps, -bounds.inner_radius / 2.0)
}

/// Halvings until the bracket is at most `δ/3` wide.
pub fn search_steps(bounds: &BodyBounds, eps: f64, delta: f64) -> u64 {
    let (lo, hi) = bracket(bounds, eps);
    let mut width = hi - lo;
    let mut steps = 0;
    while width > delta / 3.0 {
        width *= 0.5;
        steps += 1;
    }
    steps
}

/// `h(y) = inf { t : (y, t) ∈ Q(K - x0) }` evaluated by binary search.
pub struct HeightFunction<'a, M> {
    mem: &'a mut M,
    bounds: &'a BodyBounds,
    center: Vector,
    rotation: Rotation,
    delta: f64,
}

/// `C` in the query bound `C log2(R/δ) + 3`.
pub const SEARCH_CONSTANT: f64 = 1.0;

impl<'a, M: MembershipOracle> HeightFunction<'a, M> {
    /// Checks `eps <= r δ / (3R)` before any query is made.
    pub fn new(
        mem: &'a mut M,
        bounds: &'a BodyBounds,
        rotation: Rotation,
        delta: f64,
    ) -> Result<Self> {
        check_dim(bounds.dim(), mem.dim())?;
        check_dim(bounds.dim(), rotation.dim())?;
        if !(delta > 0.0) {
            return Err(invalid("delta must be positive"));
        }
        let limit = bounds.inner_radius / (3.0 * bounds.outer_radius) * delta;
        if mem.eps() > limit * (1.0 + 1e-12) {
            return Err(invalid(format!(
                "membership precision {} exceeds r δ / (3R) = {limit}",
                mem.eps()
            )));
        }
        Ok(Self {
            center: bounds.center(),
            mem,
            bounds,
            rotation,
            delta,
        })
    }

    /// Height function seen from `x`, i.e. with `x - x0` rotated onto `-e_n`.
    pub fn toward(mem: &'a mut M, bounds: &'a BodyBounds, x: &Vector, delta: f64) -> Result<Self> {
        check_dim(bounds.dim(), x.len())?;
        let rotation = Rotation::toward_negative_last_axis(&(x - bounds.center()))?;
        Self::new(mem, bounds, rotation, delta)
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of membership queries one evaluation makes.
    pub fn search_steps(&self) -> u64 {
        search_steps(self.bounds, self.mem.eps(), self.delta)
    }

    /// Original-space point for rotated coordinates `(y, t)`.
    pub fn lift(&self, y: &Vector, t: f64) -> Vector {
        let n = self.rotation.dim();
        let mut p = Vector::zeros(n);
        p.rows_mut(0, n - 1).copy_from(y);
        p[n - 1] = t;
        &self.center + self.rotation.apply_inverse(&p)
    }

    /// A value within `δ` of `h(y)`, certified for `|y| <= r/2`.
    ///
    /// The top of the bracket `(y, -r/2)` lies in `B(0, r)` and the bottom lies
    /// outside `B(0, R)`; neither is queried. The search stops once the bracket
    /// is at most `δ/3` wide and returns its top. Points with
    /// `r/2 < |y| < r sqrt(3)/2` still have a valid bracket and are accepted,
    /// but the `δ` guarantee is only proven on `B(0, r/2)`.
    pub fn eval(&mut self, y: &Vector) -> Result<f64> {
        check_dim(self.rotation.dim() - 1, y.len())?;
        let r = self.bounds.inner_radius;
        let norm = y.norm();
        if norm > r / 2.0 * (1.0 + 1e-12) && norm >= r * 3f64.sqrt() / 2.0 {
            return Err(invalid(
                "height function is only evaluated on B(0, r sqrt(3)/2)",
            ));
        }
        let (mut lo, mut hi) = bracket(self.bounds, self.mem.eps());
        while hi - lo > self.delta / 3.0 {
            let mid = 0.5 * (lo + hi);
            let p = self.lift(y, mid);
            match self.mem.query_mem(&p)? {
                MemAnswer::InExpanded => hi = mid,
                MemAnswer::NotInShrunk => lo = mid,
            }
        }
        let ceiling = -(r * r - norm * norm).max(0.0).sqrt() + self.delta;
        if hi > ceiling {
            return Err(Error::InconsistentOracle(format!(
                "height {hi} above -sqrt(r^2 - |y|^2) + δ = {ceiling}"
            )));
        }
        Ok(hi)
    }
}

/// A normal in rotated coordinates and its certified slack.
#[derive(Clone, Debug, PartialEq)]
pub struct RotatedCut {
    /// `(-g, 1) / |(-g, 1)|`.
    pub normal: Vector,
    /// `(a R + b + (2R/r) eps) / |(-g, 1)|`.
    pub slack: f64,
}

/// Converts an approximate subgradient `g` of `h` at 0, certified as
/// `h(y) >= h(0) + <g, y> - a|y| - b`, into `s` with
/// `<s, z> >= <s, x> - slack` for all `z ∈ K`.
pub fn subgradient_to_cut(g: &Vector, a: f64, b: f64, r: f64, big_r: f64, eps: f64) -> RotatedCut {
    let d = g.len();
    let mut s = Vector::zeros(d + 1);
    for i in 0..d {
        s[i] = -g[i];
    }
    s[d] = 1.0;
    let norm = s.norm();
    RotatedCut {
        normal: s / norm,
        slack: (a * big_r + b + 2.0 * big_r / r * eps) / norm,
    }
}

/// The cut as a hyperplane through `x` in original coordinates, oriented so
/// that `<normal, z> <= <normal, x> + slack` on `K`.
pub fn cut_to_hyperplane(cut: &RotatedCut, rotation: &Rotation, x: &Vector) -> Result<Hyperplane> {
    let normal = rotation.apply_inverse(&(-&cut.normal));
    Hyperplane::through(normal, x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    Classical,
    Quantum,
}

/// Derived accuracies for a target separation accuracy `eta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SepParams {
    pub mode: GradientMode,
    pub dim: usize,
    pub eta: f64,
    pub rho: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Height-function accuracy.
    pub delta: f64,
    /// Sampling half-width `(r / (12 sqrt n)) (eta / R)`.
    pub r1: f64,
    /// Lipschitz constant `2R/r` of `h` on `B(0, r/2)`.
    pub lipschitz: f64,
    /// Largest admissible membership precision.
    pub mem_eps: f64,
}

impl SepParams {
    /// `δ = η n^-2 / 216 (r/R · η/R)^2 ρ`, `ε <= η (26n)^-2 (r/R)^3 (η/R)^2 ρ`.
    pub fn classical(dim: usize, r: f64, big_r: f64, eta: f64, rho: f64) -> Result<Self> {
        let n = dim as f64;
        let shape = (r / big_r * eta / big_r).powi(2) * rho;
        let delta = eta * n.powi(-2) / 216.0 * shape;
        let mem_eps = eta * (26.0 * n).powi(-2) * (r / big_r).powi(3) * (eta / big_r).powi(2) * rho;
        Self::finish(
            GradientMode::Classical,
            dim,
            r,
            big_r,
            eta,
            rho,
            delta,
            mem_eps,
        )
    }

    /// `δ = η 23^-4 / 96 n^-9/2 (r/R · η/R)^2 ρ`, `ε <= η (58n)^-9/2 (r/R)^3 (η/R)^2 ρ`.
    pub fn quantum(dim: usize, r: f64, big_r: f64, eta: f64, rho: f64) -> Result<Self> {
        let n = dim as f64;
        let shape = (r / big_r * eta / big_r).powi(2) * rho;
        let delta = eta * 23f64.powi(-4) / 96.0 * n.powf(-4.5) * shape;
        let mem_eps =
            eta * (58.0 * n).powf(-4.5) * (r / big_r).powi(3) * (eta / big_r).powi(2) * rho;
        Self::finish(
            GradientMode::Quantum,
            dim,
            r,
            big_r,
            eta,
            rho,
            delta,
            mem_eps,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        mode: GradientMode,
        dim: usize,
        r: f64,
        big_r: f64,
        eta: f64,
        rho: f64,
        delta: f64,
        mem_eps: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !(r > 0.0 && big_r >= r && big_r.is_finite()) {
            return Err(invalid("need 0 < r <= R"));
        }
        if !(eta > 0.0 && eta <= big_r) {
            return Err(invalid("eta must lie in (0, R]"));
        }
        if !(rho > 0.0 && rho <= 1.0 / 3.0) {
            return Err(invalid("rho must lie in (0, 1/3]"));
        }
        let p = Self {
            mode,
            dim,
            eta,
            rho,
            inner_radius: r,
            outer_radius: big_r,
            delta,
            r1: r / (12.0 * (dim as f64).sqrt()) * (eta / big_r),
            lipschitz: 2.0 * big_r / r,
            mem_eps,
        };
        assert!(
            p.mem_eps <= r / (3.0 * big_r) * p.delta,
            "membership precision bound must imply eps <= r δ / 3R"
        );
        Ok(p)
    }
}

/// Counters of a reduction instance, beyond its SEP ledger.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SepStats {
    /// Membership queries actually issued.
    pub mem_queries: u64,
    /// Calls answered `InExpanded` by the first membership query.
    pub inside: u64,
    /// Calls that produced a hyperplane.
    pub separated: u64,
    /// Height-function evaluations (pointwise, for the quantum path).
    pub height_evaluations: u64,
    /// Phase-oracle applications: superposition queries to the height evaluator.
    pub superposition_queries: u64,
}

/// `SEP_{eta, rho}(K)` built on `MEM_{eps, 0}(K)`.
pub struct SepFromMem<M> {
    mem: M,
    bounds: BodyBounds,
    params: SepParams,
    rng: ChaCha8Rng,
    ledger: QueryLedger,
    stats: SepStats,
    last_gradient: Option<GradientReport>,
}

impl<M: MembershipOracle> SepFromMem<M> {
    pub fn new(mem: M, bounds: BodyBounds, params: SepParams, seed: u64) -> Result<Self> {
        check_dim(bounds.dim(), mem.dim())?;
        check_dim(params.dim, mem.dim())?;
        if mem.eps() > params.mem_eps {
            return Err(invalid(format!(
                "membership precision {} exceeds the admissible {}",
                mem.eps(),
                params.mem_eps
            )));
        }
        Ok(Self {
            mem,
            bounds,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ledger: QueryLedger::default(),
            stats: SepStats::default(),
            last_gradient: None,
        })
    }

    pub fn params(&self) -> &SepParams {
        &self.params
    }

    pub fn stats(&self) -> &SepStats {
        &self.stats
    }

    pub fn membership(&self) -> &M {
        &self.mem
    }

    pub fn into_membership(self) -> M {
        self.mem
    }

    /// The subgradient behind the most recent hyperplane.
    pub fn last_gradient(&self) -> Option<&GradientReport> {
        self.last_gradient.as_ref()
    }

    /// Membership queries per separating call: one initial query plus the
    /// binary searches behind `2(n-1)` classical or `2^(m(n-1))` grid evaluations.
    pub fn mem_queries_per_separation(&self, evaluations: u64) -> u64 {
        let steps = self.search_steps();
        1 + evaluations * steps
    }

    fn search_steps(&self) -> u64 {
        search_steps(&self.bounds, self.mem.eps(), self.params.delta)
    }

    fn separate(&mut self, x: &Vector) -> Result<Hyperplane> {
        let p = self.params;
        let before = self.mem.ledger().mem;
        let mut hf = HeightFunction::toward(&mut self.mem, &self.bounds, x, p.delta)?;
        let d = p.dim - 1;
        let mut evaluations = 0u64;
        let report = {
            let mut h = |y: &Vector| {
                evaluations += 1;
                hf.eval(y)
            };
            match p.mode {
                GradientMode::Classical => {
                    let fd = FdParams::classical(d, p.r1, p.delta, p.rho, p.lipschitz)?;
                    classical_subgradient(&mut h, &fd, &mut self.rng)?
                }
                GradientMode::Quantum => {
                    let q = QuantumParams::new(d, p.r1, p.delta, p.rho, p.lipschitz)?;
                    let out = quantum_subgradient(&mut h, &q, &mut self.rng)?;
                    self.stats.superposition_queries += out.report.queries;
                    out.report
                }
            }
        };
        let rotation = hf.rotation().clone();
        let cut = subgradient_to_cut(
            &report.gradient,
            report.slack_a,
            report.slack_b,
            p.inner_radius,
            p.outer_radius,
            self.mem.eps(),
        );
        self.stats.height_evaluations += evaluations;
        self.stats.mem_queries += self.mem.ledger().mem - before;
        self.last_gradient = Some(report);
        cut_to_hyperplane(&cut, &rotation, x)
    }
}

impl<M: MembershipOracle> Oracle for SepFromMem<M> {
    fn dim(&self) -> usize {
        self.params.dim
    }
    fn eps(&self) -> f64 {
        self.params.eta
    }
    fn rho(&self) -> f64 {
        self.params.rho
    }
    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl<M: MembershipOracle> SeparationOracle for SepFromMem<M> {
    fn query_sep(&mut self, x: &Vector) -> Result<SepAnswer> {
        check_dim(self.params.dim, x.len())?;
        self.ledger.record(OracleKind::Sep);
        self.stats.mem_queries += 1;
        if self.mem.query_mem(x)? == MemAnswer::InExpanded {
            self.stats.inside += 1;
            return Ok(SepAnswer::InExpanded);
        }
        let plane = self.separate(x)?;
        self.stats.separated += 1;
        Ok(SepAnswer::Separated(plane))
    }
}
