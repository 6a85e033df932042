//! Weak MEM/SEP/OPT/VIOL/VAL oracles over analytic bodies.
//!
//! [`OracleHandle`] answers all five query types for a [`ConvexBody`] with
//! error parameters `(eps, rho)`. Answers are sound up to the `eps` slack;
//! inside the ambiguous region where both answers are legal, the
//! [`BoundaryPolicy`] decides. With probability `rho` an answer is replaced by
//! a wrong one, drawn from the handle's seeded RNG.
//!
//! Reductions implement the same traits, so they compose with each other and
//! with the analytic handles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, invalid};
use crate::geometry::{ConvexBody, Hyperplane, Vector};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleKind {
    Mem,
    Sep,
    Opt,
    Viol,
    Val,
}

/// Per-kind query counters. Counts only ever increase.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QueryLedger {
    pub mem: u64,
    pub sep: u64,
    pub opt: u64,
    pub viol: u64,
    pub val: u64,
}

impl QueryLedger {
    pub fn record(&mut self, kind: OracleKind) {
        *self.slot(kind) += 1;
    }

    pub fn get(&self, kind: OracleKind) -> u64 {
        match kind {
            OracleKind::Mem => self.mem,
            OracleKind::Sep => self.sep,
            OracleKind::Opt => self.opt,
            OracleKind::Viol => self.viol,
            OracleKind::Val => self.val,
        }
    }

    pub fn total(&self) -> u64 {
        self.mem + self.sep + self.opt + self.viol + self.val
    }

    fn slot(&mut self, kind: OracleKind) -> &mut u64 {
        match kind {
            OracleKind::Mem => &mut self.mem,
            OracleKind::Sep => &mut self.sep,
            OracleKind::Opt => &mut self.opt,
            OracleKind::Viol => &mut self.viol,
            OracleKind::Val => &mut self.val,
        }
    }
}

/// How ambiguous queries are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Deterministic: a hash of `(seed, query)` picks the answer, and witnesses,
    /// normals and maximizers are pushed to the edge of what is legal.
    #[default]
    Adversarial,
    /// Fair coin flips and uniformly random legal slack.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MemAnswer {
    /// `y ∈ B(K, eps)`.
    InExpanded,
    /// `y ∉ B(K, -eps)`.
    NotInShrunk,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SepAnswer {
    InExpanded,
    /// `<g, x> <= <g, y> + eps` for every `x ∈ B(K, -eps)`.
    Separated(Hyperplane),
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptAnswer {
    /// `y ∈ B(K, eps)` with `<c, x> <= <c, y> + eps` on `B(K, -eps)`.
    Maximizer(Vector),
    ShrunkEmpty,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolAnswer {
    /// `<c, x> <= gamma + eps` on `B(K, -eps)`.
    AllBelow,
    /// `y ∈ B(K, eps)` with `<c, y> >= gamma - eps`.
    Witness(Vector),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ValAnswer {
    AllBelow,
    SomeAbove,
}

/// Any oracle answer, for reports.
#[derive(Clone, Debug, PartialEq)]
pub enum OracleAnswer {
    Mem(MemAnswer),
    Sep(SepAnswer),
    Opt(OptAnswer),
    Viol(ViolAnswer),
    Val(ValAnswer),
}

macro_rules! answer_from {
    ($($ty:ident => $variant:ident),*) => {
        $(impl From<$ty> for OracleAnswer {
            fn from(a: $ty) -> Self {
                OracleAnswer::$variant(a)
            }
        })*
    };
}
answer_from!(MemAnswer => Mem, SepAnswer => Sep, OptAnswer => Opt, ViolAnswer => Viol, ValAnswer => Val);

/// Shared oracle metadata.
pub trait Oracle {
    fn dim(&self) -> usize;
    fn eps(&self) -> f64;
    fn rho(&self) -> f64;
    fn ledger(&self) -> &QueryLedger;
}

pub trait MembershipOracle: Oracle {
    fn query_mem(&mut self, y: &Vector) -> Result<MemAnswer>;
}

pub trait SeparationOracle: Oracle {
    fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer>;
}

pub trait OptimizationOracle: Oracle {
    fn query_opt(&mut self, c: &Vector) -> Result<OptAnswer>;
}

pub trait ViolationOracle: Oracle {
    fn query_viol(&mut self, c: &Vector, gamma: f64) -> Result<ViolAnswer>;
}

pub trait ValidityOracle: Oracle {
    fn query_val(&mut self, c: &Vector, gamma: f64) -> Result<ValAnswer>;
}

impl<T: Oracle + ?Sized> Oracle for &mut T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eps(&self) -> f64 {
        (**self).eps()
    }
    fn rho(&self) -> f64 {
        (**self).rho()
    }
    fn ledger(&self) -> &QueryLedger {
        (**self).ledger()
    }
}

impl<T: MembershipOracle + ?Sized> MembershipOracle for &mut T {
    fn query_mem(&mut self, y: &Vector) -> Result<MemAnswer> {
        (**self).query_mem(y)
    }
}

impl<T: SeparationOracle + ?Sized> SeparationOracle for &mut T {
    fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer> {
        (**self).query_sep(y)
    }
}

impl<T: OptimizationOracle + ?Sized> OptimizationOracle for &mut T {
    fn query_opt(&mut self, c: &Vector) -> Result<OptAnswer> {
        (**self).query_opt(c)
    }
}

impl<T: ViolationOracle + ?Sized> ViolationOracle for &mut T {
    fn query_viol(&mut self, c: &Vector, gamma: f64) -> Result<ViolAnswer> {
        (**self).query_viol(c, gamma)
    }
}

impl<T: ValidityOracle + ?Sized> ValidityOracle for &mut T {
    fn query_val(&mut self, c: &Vector, gamma: f64) -> Result<ValAnswer> {
        (**self).query_val(c, gamma)
    }
}

/// Largest `log2(nR/(r eps))` for which 64-bit floats are treated as exact.
pub const PRECISION_BITS: f64 = 52.0;

/// Checks that `eps` is resolvable in double precision for a body of the given
/// dimension and radii, returning the number of bits used.
pub fn check_precision(n: usize, r: f64, big_r: f64, eps: f64) -> Result<f64> {
    if eps <= 0.0 {
        return Ok(0.0);
    }
    let bits = (n as f64 * big_r / (r * eps)).log2();
    if bits > PRECISION_BITS {
        Err(Error::Precision(bits))
    } else {
        Ok(bits)
    }
}

/// A weak oracle for an analytic body.
#[derive(Clone, Debug)]
pub struct OracleHandle {
    body: ConvexBody,
    shrunk: Option<ConvexBody>,
    eps: f64,
    rho: f64,
    seed: u64,
    policy: BoundaryPolicy,
    rng: ChaCha8Rng,
    ledger: QueryLedger,
}

impl OracleHandle {
    pub fn new(body: ConvexBody, eps: f64, rho: f64, seed: u64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(invalid("eps must be finite and nonnegative"));
        }
        if !(0.0..=1.0 / 3.0).contains(&rho) {
            return Err(invalid("rho must lie in [0, 1/3]"));
        }
        check_precision(body.dim(), body.inner_radius(), body.outer_radius(), eps)?;
        let shrunk = body.try_shrink(eps);
        Ok(Self {
            body,
            shrunk,
            eps,
            rho,
            seed,
            policy: BoundaryPolicy::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            ledger: QueryLedger::default(),
        })
    }

    /// An exact (`eps = 0`, `rho = 0`) oracle.
    pub fn strong(body: ConvexBody, seed: u64) -> Result<Self> {
        Self::new(body, 0.0, 0.0, seed)
    }

    pub fn with_policy(mut self, policy: BoundaryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn policy(&self) -> BoundaryPolicy {
        self.policy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_point(&self, y: &Vector) -> Result<()> {
        check_dim(self.body.dim(), y.len())?;
        if y.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(invalid("query has non-finite coordinates"))
        }
    }

    fn inject_error(&mut self) -> bool {
        self.rho > 0.0 && self.rng.gen_bool(self.rho)
    }

    fn in_shrunk(&self, y: &Vector) -> bool {
        self.shrunk
            .as_ref()
            .is_some_and(|s| s.contains_unchecked(y))
    }

    fn in_expanded(&self, y: &Vector) -> bool {
        let tol = crate::geometry::BOUNDARY_TOL * (1.0 + self.body.outer_radius());
        self.body.distance_unchecked(y) <= self.eps + tol
    }

    /// Picks between two legal answers; `true` selects the first.
    fn choose(&mut self, tag: u64, point: &Vector, extra: f64) -> bool {
        match self.policy {
            BoundaryPolicy::Adversarial => query_hash(self.seed, tag, point, extra) % 2 == 0,
            BoundaryPolicy::Random => self.rng.gen_bool(0.5),
        }
    }

    /// Fraction of the legal slack to use: all of it when adversarial.
    fn slack_fraction(&mut self) -> f64 {
        match self.policy {
            BoundaryPolicy::Adversarial => 1.0,
            BoundaryPolicy::Random => self.rng.gen::<f64>(),
        }
    }

    fn random_unit(&mut self) -> Vector {
        let n = self.body.dim();
        loop {
            let v = Vector::from_fn(n, |_, _| self.rng.gen::<f64>() * 2.0 - 1.0);
            let norm = v.norm();
            if norm > 1e-3 && norm <= 1.0 {
                return v / norm;
            }
        }
    }

    fn separating_normal(&mut self, y: &Vector) -> Result<Hyperplane> {
        let base = match &self.shrunk {
            Some(s) => {
                let d = y - s.project_unchecked(y);
                if d.norm() > 0.0 {
                    d
                } else {
                    y - self.body.center()
                }
            }
            None => y - self.body.center(),
        };
        let mut base = if base.norm() > 0.0 {
            base.normalize()
        } else {
            self.random_unit()
        };
        // Iterative polytope projections can leave the normal slightly
        // illegal; a violated facet separates exactly.
        if let Some(s) = &self.shrunk {
            if s.support(&base)? > base.dot(y) + self.eps {
                if let Some(facet) = s.violated_facet(y) {
                    base = facet;
                }
            }
        }
        let tilted = self.tilt_normal(&base, y)?;
        Hyperplane::through(tilted, y)
    }

    /// Rotates `base` toward a policy-chosen direction as far as the
    /// separation inequality still allows.
    fn tilt_normal(&mut self, base: &Vector, y: &Vector) -> Result<Vector> {
        let Some(shrunk) = self.shrunk.clone() else {
            return Ok(base.clone());
        };
        let n = base.len();
        if n < 2 {
            return Ok(base.clone());
        }
        let raw = match self.policy {
            BoundaryPolicy::Adversarial => {
                let mut state = query_hash(self.seed, 0x5e9, y, 0.0);
                Vector::from_fn(n, |_, _| {
                    state = splitmix64(state);
                    (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
                })
            }
            BoundaryPolicy::Random => self.random_unit(),
        };
        let perp = &raw - base * base.dot(&raw);
        if perp.norm() < 1e-9 {
            return Ok(base.clone());
        }
        let perp = perp.normalize();
        let fraction = self.slack_fraction();
        let margin = 1e-12 * (1.0 + y.norm() + self.body.outer_radius());
        let eps = self.eps;
        let legal = |theta: f64| -> Result<bool> {
            let g = base * theta.cos() + &perp * theta.sin();
            Ok(shrunk.support(&g)? <= g.dot(y) + eps - margin)
        };
        if !legal(0.0)? {
            return Ok(base.clone());
        }
        let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
        if legal(hi)? {
            lo = hi;
        } else {
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if legal(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let theta = lo * fraction;
        if legal(theta)? {
            Ok(base * theta.cos() + &perp * theta.sin())
        } else {
            Ok(base.clone())
        }
    }

    fn check_direction(&self, c: &Vector) -> Result<()> {
        self.check_point(c)?;
        if c.norm() == 0.0 {
            return Err(invalid("objective direction must be nonzero"));
        }
        Ok(())
    }

    /// Which VIOL/VAL answers are legal: `(all_below, some_above)`.
    fn legal_threshold_answers(&self, c: &Vector, gamma: f64) -> Result<(bool, bool)> {
        let all_below = match &self.shrunk {
            Some(s) => s.support(c)? <= gamma + self.eps,
            None => true,
        };
        let some_above = self.body.support(c)? + self.eps * c.norm() >= gamma - self.eps;
        Ok((all_below, some_above))
    }
}

impl Oracle for OracleHandle {
    fn dim(&self) -> usize {
        self.body.dim()
    }
    fn eps(&self) -> f64 {
        self.eps
    }
    fn rho(&self) -> f64 {
        self.rho
    }
    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl MembershipOracle for OracleHandle {
    fn query_mem(&mut self, y: &Vector) -> Result<MemAnswer> {
        self.check_point(y)?;
        self.ledger.record(OracleKind::Mem);
        let truthful = if self.in_shrunk(y) {
            MemAnswer::InExpanded
        } else if !self.in_expanded(y) {
            MemAnswer::NotInShrunk
        } else if self.choose(1, y, 0.0) {
            MemAnswer::InExpanded
        } else {
            MemAnswer::NotInShrunk
        };
        Ok(if self.inject_error() {
            match truthful {
                MemAnswer::InExpanded => MemAnswer::NotInShrunk,
                MemAnswer::NotInShrunk => MemAnswer::InExpanded,
            }
        } else {
            truthful
        })
    }
}

impl SeparationOracle for OracleHandle {
    fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer> {
        self.check_point(y)?;
        self.ledger.record(OracleKind::Sep);
        let separate = if self.in_shrunk(y) {
            false
        } else if !self.in_expanded(y) {
            true
        } else {
            !self.choose(2, y, 0.0)
        };
        if self.inject_error() {
            return Ok(if separate {
                SepAnswer::InExpanded
            } else {
                let g = self.random_unit();
                SepAnswer::Separated(Hyperplane::through(g, y)?)
            });
        }
        if separate {
            Ok(SepAnswer::Separated(self.separating_normal(y)?))
        } else {
            Ok(SepAnswer::InExpanded)
        }
    }
}

impl OptimizationOracle for OracleHandle {
    fn query_opt(&mut self, c: &Vector) -> Result<OptAnswer> {
        self.check_direction(c)?;
        self.ledger.record(OracleKind::Opt);
        let flip = self.inject_error();
        let Some(shrunk) = self.shrunk.clone() else {
            return Ok(if flip {
                OptAnswer::Maximizer(self.body.center().clone())
            } else {
                OptAnswer::ShrunkEmpty
            });
        };
        if flip {
            return Ok(OptAnswer::ShrunkEmpty);
        }
        // The maximizer over B(K,-eps) pushed back against c by up to eps/|c|
        // stays in B(K, eps) and keeps the eps-optimality inequality.
        let (_, best) = shrunk.support_point(c)?;
        let cn = c.norm();
        let step = 0.999 * self.eps / cn * self.slack_fraction();
        Ok(OptAnswer::Maximizer(best - c * (step / cn)))
    }
}

impl ViolationOracle for OracleHandle {
    fn query_viol(&mut self, c: &Vector, gamma: f64) -> Result<ViolAnswer> {
        self.check_direction(c)?;
        if !gamma.is_finite() {
            return Err(invalid("threshold must be finite"));
        }
        self.ledger.record(OracleKind::Viol);
        let (below_ok, above_ok) = self.legal_threshold_answers(c, gamma)?;
        let witness = match (below_ok, above_ok) {
            (true, false) => false,
            (false, _) => true,
            (true, true) => !self.choose(3, c, gamma),
        };
        let witness = witness != self.inject_error();
        if !witness {
            return Ok(ViolAnswer::AllBelow);
        }
        // Slide from the center toward the maximizer of B(K, eps) and stop as
        // soon as the witness inequality holds.
        let center = self.body.center().clone();
        let (_, top) = self.body.shrink_expand(self.eps)?.support_point(c)?;
        let (c0, c1) = (c.dot(&center), c.dot(&top));
        let t_min = if c1 > c0 {
            ((gamma - self.eps - c0) / (c1 - c0)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let t = t_min + (1.0 - t_min) * (1.0 - self.slack_fraction());
        Ok(ViolAnswer::Witness(&center + (top - &center) * t))
    }
}

impl ValidityOracle for OracleHandle {
    fn query_val(&mut self, c: &Vector, gamma: f64) -> Result<ValAnswer> {
        self.check_direction(c)?;
        if !gamma.is_finite() {
            return Err(invalid("threshold must be finite"));
        }
        self.ledger.record(OracleKind::Val);
        let (below_ok, above_ok) = self.legal_threshold_answers(c, gamma)?;
        let above = match (below_ok, above_ok) {
            (true, false) => false,
            (false, _) => true,
            (true, true) => !self.choose(4, c, gamma),
        };
        Ok(if above != self.inject_error() {
            ValAnswer::SomeAbove
        } else {
            ValAnswer::AllBelow
        })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn query_hash(seed: u64, tag: u64, point: &Vector, extra: f64) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(tag));
    for x in point.iter().chain(std::iter::once(&extra)) {
        h = splitmix64(h ^ x.to_bits());
    }
    h
}

/// Probability that a majority of `k` (odd) independent answers, each wrong
/// with probability `rho`, is wrong.
pub fn majority_error(k: u32, rho: f64) -> f64 {
    let need = k / 2 + 1;
    let mut total = 0.0;
    let mut coeff = 1.0f64; // C(k, j), built incrementally
    for j in 0..=k {
        if j >= need {
            total += coeff * rho.powi(j as i32) * (1.0 - rho).powi((k - j) as i32);
        }
        coeff = coeff * (k - j) as f64 / (j + 1) as f64;
    }
    total
}

/// Smallest odd repetition count whose majority vote errs with probability at
/// most `target`, computed from the exact binomial tail.
pub fn repetitions_for(rho: f64, target: f64) -> Result<u32> {
    if !(target > 0.0) {
        return Err(invalid("target failure probability must be positive"));
    }
    if !(0.0..=1.0 / 3.0).contains(&rho) {
        return Err(invalid("base failure probability must lie in [0, 1/3]"));
    }
    if rho == 0.0 || target >= rho {
        return Ok(1);
    }
    let mut k = 1;
    while majority_error(k, rho) > target {
        k += 2;
        if k > 100_001 {
            return Err(invalid("target failure probability too small"));
        }
    }
    Ok(k)
}

/// A membership oracle made more reliable by majority vote.
#[derive(Debug)]
pub struct Amplified<M> {
    inner: M,
    repetitions: u32,
    rho: f64,
    ledger: QueryLedger,
}

/// Wraps `inner` so that each query is answered by a majority over
/// [`repetitions_for`] inner queries.
pub fn amplify<M: MembershipOracle>(inner: M, target_rho: f64) -> Result<Amplified<M>> {
    let repetitions = repetitions_for(inner.rho(), target_rho)?;
    let rho = if repetitions == 1 {
        inner.rho()
    } else {
        majority_error(repetitions, inner.rho())
    };
    Ok(Amplified {
        inner,
        repetitions,
        rho,
        ledger: QueryLedger::default(),
    })
}

impl<M> Amplified<M> {
    pub fn repetitions(&self) -> u32 {
        self.repetitions
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn into_inner(self) -> M {
        self.inner
    }
}

impl<M: MembershipOracle> Oracle for Amplified<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eps(&self) -> f64 {
        self.inner.eps()
    }
    fn rho(&self) -> f64 {
        self.rho
    }
    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl<M: MembershipOracle> MembershipOracle for Amplified<M> {
    fn query_mem(&mut self, y: &Vector) -> Result<MemAnswer> {
        self.ledger.record(OracleKind::Mem);
        let mut yes = 0;
        for _ in 0..self.repetitions {
            if self.inner.query_mem(y)? == MemAnswer::InExpanded {
                yes += 1;
            }
        }
        Ok(if 2 * yes > self.repetitions {
            MemAnswer::InExpanded
        } else {
            MemAnswer::NotInShrunk
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    fn unit_ball() -> ConvexBody {
        ConvexBody::ball(Vector::zeros(2), 1.0).unwrap()
    }

    #[test]
    fn mem_examples() {
        let mut h = OracleHandle::new(unit_ball(), 0.05, 0.0, 1).unwrap();
        assert_eq!(h.query_mem(&v(&[0.0, 0.0])).unwrap(), MemAnswer::InExpanded);
        assert_eq!(
            h.query_mem(&v(&[3.0, 0.0])).unwrap(),
            MemAnswer::NotInShrunk
        );
        // Both answers are legal in the shell; any answer is accepted.
        h.query_mem(&v(&[1.01, 0.0])).unwrap();
        assert_eq!(h.ledger().mem, 3);
    }

    #[test]
    fn shell_answers_depend_on_policy_only() {
        let mut seen = [false; 2];
        for seed in 0..64 {
            let mut h = OracleHandle::new(unit_ball(), 0.05, 0.0, seed).unwrap();
            let a = h.query_mem(&v(&[1.01, 0.0])).unwrap();
            assert_eq!(
                a,
                h.query_mem(&v(&[1.01, 0.0])).unwrap(),
                "adversarial policy is deterministic"
            );
            seen[(a == MemAnswer::InExpanded) as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn val_examples() {
        let mut h = OracleHandle::new(unit_ball(), 0.1, 0.0, 3).unwrap();
        let e1 = v(&[1.0, 0.0]);
        assert_eq!(h.query_val(&e1, 2.0).unwrap(), ValAnswer::AllBelow);
        assert_eq!(h.query_val(&e1, 0.5).unwrap(), ValAnswer::SomeAbove);
        h.query_val(&e1, 1.0).unwrap();
    }

    #[test]
    fn viol_witness_is_legal() {
        for policy in [BoundaryPolicy::Adversarial, BoundaryPolicy::Random] {
            let mut h = OracleHandle::new(unit_ball(), 0.1, 0.0, 5)
                .unwrap()
                .with_policy(policy);
            let c = v(&[0.6, 0.8]);
            for gamma in [-0.5, 0.0, 0.5, 0.85] {
                match h.query_viol(&c, gamma).unwrap() {
                    ViolAnswer::Witness(y) => {
                        assert!(y.norm() <= 1.1 + 1e-12);
                        assert!(c.dot(&y) >= gamma - 0.1 - 1e-12);
                    }
                    ViolAnswer::AllBelow => panic!("gamma {gamma} is below the shrunk support"),
                }
            }
        }
    }

    #[test]
    fn sep_normal_satisfies_inequality_after_tilt() {
        let body = ConvexBody::axis_box(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let shrunk = body.try_shrink(0.05).unwrap();
        for policy in [BoundaryPolicy::Adversarial, BoundaryPolicy::Random] {
            let mut h = OracleHandle::new(body.clone(), 0.05, 0.0, 9)
                .unwrap()
                .with_policy(policy);
            let y = v(&[1.5, 0.3]);
            let SepAnswer::Separated(hp) = h.query_sep(&y).unwrap() else {
                panic!("must separate")
            };
            let g = hp.normal();
            assert!(shrunk.support(g).unwrap() <= g.dot(&y) + 0.05 + 1e-9);
        }
    }

    #[test]
    fn opt_maximizer_is_legal() {
        let mut h = OracleHandle::new(unit_ball(), 0.01, 0.0, 2).unwrap();
        let c = v(&[1.0, 0.0]);
        let OptAnswer::Maximizer(y) = h.query_opt(&c).unwrap() else {
            panic!()
        };
        assert!(y.norm() <= 1.01 + 1e-12);
        assert!(0.99 <= y[0] + 0.01 + 1e-12);
    }

    #[test]
    fn opt_reports_empty_shrink() {
        let tiny = ConvexBody::ball(Vector::zeros(2), 0.01).unwrap();
        let mut h = OracleHandle::new(tiny, 0.02, 0.0, 0).unwrap();
        assert_eq!(
            h.query_opt(&v(&[1.0, 0.0])).unwrap(),
            OptAnswer::ShrunkEmpty
        );
    }

    #[test]
    fn precision_guard() {
        assert!(check_precision(2, 1.0, 1.0, 1e-6).is_ok());
        assert!(matches!(
            check_precision(2, 1.0, 1.0, 1e-17),
            Err(Error::Precision(_))
        ));
        assert!(OracleHandle::new(unit_ball(), 1e-17, 0.0, 0).is_err());
    }

    #[test]
    fn repetition_counts() {
        assert_eq!(repetitions_for(1.0 / 3.0, 1.0 / 3.0).unwrap(), 1);
        assert_eq!(repetitions_for(0.0, 1e-9).unwrap(), 1);
        // No odd k below 81 brings the binomial tail at p = 1/3 under 1e-3;
        // k = 45 still errs with probability about 0.0103.
        let k = repetitions_for(1.0 / 3.0, 1e-3).unwrap();
        assert_eq!(k, 81);
        assert!((majority_error(45, 1.0 / 3.0) - 0.010301713).abs() < 1e-8);
        assert!(majority_error(k, 1.0 / 3.0) <= 1e-3);
        assert!(majority_error(k - 2, 1.0 / 3.0) > 1e-3);
        assert!(repetitions_for(0.1, 0.0).is_err());
    }

    #[test]
    fn majority_error_small_cases() {
        // k = 3: P[>= 2 wrong] = 3 p^2 (1-p) + p^3.
        let p: f64 = 0.2;
        assert!((majority_error(3, p) - (3.0 * p * p * (1.0 - p) + p.powi(3))).abs() < 1e-15);
        assert!((majority_error(1, p) - p).abs() < 1e-15);
    }
}
