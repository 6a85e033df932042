//! Polar duality `K* = { y : <y, x> <= 1 for all x ∈ K }` for bodies with
//! `0 ∈ int K`.
//!
//! Strong membership in `K*` is strong validity on `K`, and strong separation
//! from `K*` is strong violation on `K`. Each adapter spends exactly one query
//! to its source oracle. Optimization and violation are linked by binary
//! search.
//!
//! The adapters also accept weak oracles. Translating their error parameters
//! by `max(1/r, R)` is a heuristic, not a proven bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_dim, invalid};
use crate::geometry::{ConvexBody, Hyperplane, Shape, Vector};
use crate::oracles::{
    MemAnswer, MembershipOracle, OptAnswer, OptimizationOracle, Oracle, OracleHandle, OracleKind,
    QueryLedger, SepAnswer, SeparationOracle, ValAnswer, ValidityOracle, ViolAnswer,
    ViolationOracle,
};
use crate::{Error, Result};

const TOL: f64 = 1e-9;

/// Closed-form polar for balls around the origin and boxes with `0` inside
/// (giving the polytope `<v, y> <= 1` over box vertices `v`), and back.
pub fn polar_body(body: &ConvexBody) -> Result<ConvexBody> {
    let n = body.dim();
    match body.shape() {
        Shape::Ball { center, radius } if center.norm() == 0.0 => {
            ConvexBody::ball(Vector::zeros(n), 1.0 / radius)
        }
        Shape::AxisBox { lower, upper } => {
            if !(lower.iter().all(|l| *l < 0.0) && upper.iter().all(|u| *u > 0.0)) {
                return Err(invalid("origin must be interior to the box"));
            }
            if n > 16 {
                return Err(invalid("box polar has 2^n facets; dimension too large"));
            }
            let normals: Vec<Vector> = (0..1usize << n)
                .map(|mask| {
                    Vector::from_fn(n, |i, _| {
                        if mask >> i & 1 == 1 {
                            upper[i]
                        } else {
                            lower[i]
                        }
                    })
                })
                .collect();
            let offsets = vec![1.0; normals.len()];
            ConvexBody::polytope(normals, offsets, &Vector::zeros(n))
        }
        Shape::Polytope { normals, offsets } => {
            if offsets.iter().any(|b| *b <= 0.0) {
                return Err(invalid("origin must be interior to the polytope"));
            }
            let points: Vec<Vector> = normals.iter().zip(offsets).map(|(a, b)| a / *b).collect();
            box_from_vertices(&points, n)
                .ok_or_else(|| invalid("no closed-form polar for this polytope"))?
        }
        _ => Err(invalid("no closed-form polar for this body")),
    }
}

/// The box whose vertex set is exactly `points`, if there is one.
fn box_from_vertices(points: &[Vector], n: usize) -> Option<Result<ConvexBody>> {
    if points.len() != 1 << n {
        return None;
    }
    let lower = Vector::from_fn(n, |i, _| {
        points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)
    });
    let upper = Vector::from_fn(n, |i, _| {
        points
            .iter()
            .map(|p| p[i])
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let mut seen = vec![false; 1 << n];
    for p in points {
        let mut mask = 0;
        for i in 0..n {
            let scale = 1.0 + upper[i].abs().max(lower[i].abs());
            if (p[i] - upper[i]).abs() <= TOL * scale {
                mask |= 1 << i;
            } else if (p[i] - lower[i]).abs() > TOL * scale {
                return None;
            }
        }
        if std::mem::replace(&mut seen[mask], true) {
            return None;
        }
    }
    Some(ConvexBody::axis_box(lower, upper))
}

/// Error scale `max(1/r, R)` used when feeding weak oracles through the adapters.
pub fn weak_factor(r: f64, big_r: f64) -> f64 {
    (1.0 / r).max(big_r)
}

/// Membership of `c` in `K*` from one validity query `(c, 1)` on `K`.
pub fn mem_polar_via_val<V: ValidityOracle + ?Sized>(val: &mut V, c: &Vector) -> Result<MemAnswer> {
    Ok(match val.query_val(c, 1.0)? {
        ValAnswer::AllBelow => MemAnswer::InExpanded,
        ValAnswer::SomeAbove => MemAnswer::NotInShrunk,
    })
}

/// Validity of `(c, gamma)` on `K` from one membership query `c / gamma` to `K*`.
/// `gamma <= 0` is answered without a query, since `0 ∈ K`.
pub fn val_via_mem_polar<M: MembershipOracle + ?Sized>(
    mem_star: &mut M,
    c: &Vector,
    gamma: f64,
) -> Result<ValAnswer> {
    if gamma <= 0.0 {
        return Ok(ValAnswer::SomeAbove);
    }
    Ok(match mem_star.query_mem(&(c / gamma))? {
        MemAnswer::InExpanded => ValAnswer::AllBelow,
        MemAnswer::NotInShrunk => ValAnswer::SomeAbove,
    })
}

/// Separation of `y` from `K*` from one violation query `(y, 1)` on `K`: a
/// witness `x` with `<x, y> >= 1` separates, since `<x, w> <= 1` on `K*`.
pub fn sep_polar_via_viol<V: ViolationOracle + ?Sized>(
    viol: &mut V,
    y: &Vector,
) -> Result<SepAnswer> {
    match viol.query_viol(y, 1.0)? {
        ViolAnswer::AllBelow => Ok(SepAnswer::InExpanded),
        ViolAnswer::Witness(x) => {
            if x.norm() == 0.0 {
                return Err(Error::InconsistentOracle(
                    "zero witness for a threshold of 1".into(),
                ));
            }
            Ok(SepAnswer::Separated(Hyperplane::through(x, y)?))
        }
    }
}

/// Violation of `(c, gamma)` on `K` from one separation query `c / gamma` to
/// `K*`. A separating normal `y` yields the witness `y / <c/gamma, y>`, which
/// lies in `K` and attains `<c, .> = gamma`.
pub fn viol_via_sep_polar<S: SeparationOracle + ?Sized>(
    sep_star: &mut S,
    c: &Vector,
    gamma: f64,
) -> Result<ViolAnswer> {
    if gamma <= 0.0 {
        return Ok(ViolAnswer::Witness(Vector::zeros(c.len())));
    }
    let point = c / gamma;
    match sep_star.query_sep(&point)? {
        SepAnswer::InExpanded => Ok(ViolAnswer::AllBelow),
        SepAnswer::Separated(plane) => {
            let y = plane.normal();
            let scale = point.dot(y);
            if scale <= 0.0 {
                return Err(Error::InconsistentOracle(format!(
                    "separating normal has <c/γ, y> = {scale}"
                )));
            }
            Ok(ViolAnswer::Witness(y / scale))
        }
    }
}

/// Maximizer of `<c, .>` from violation queries, `|c| = 1`. The known centre
/// `x0` starts the search as a witness; the threshold is bisected over
/// `[<c, x0>, <c, x0> + R]` until the gap, plus twice the violation slack, is
/// at most `eps`. Uses `ceil(log2(R / (eps - 2 eps_viol)))` queries.
pub fn opt_via_viol<V: ViolationOracle + ?Sized>(
    viol: &mut V,
    c: &Vector,
    eps: f64,
    center: &Vector,
    big_r: f64,
) -> Result<OptAnswer> {
    check_dim(viol.dim(), c.len())?;
    check_dim(viol.dim(), center.len())?;
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("objective must be a unit vector"));
    }
    let width = eps - 2.0 * viol.eps();
    if !(width > 0.0) {
        return Err(invalid("violation slack must be below eps/2"));
    }
    let mut lo = c.dot(center);
    let mut hi = lo + big_r;
    let mut best = center.clone();
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        match viol.query_viol(c, mid)? {
            ViolAnswer::Witness(w) => {
                lo = mid;
                best = w;
            }
            ViolAnswer::AllBelow => hi = mid,
        }
    }
    Ok(OptAnswer::Maximizer(best))
}

/// Violation from one optimization query.
pub fn viol_via_opt<O: OptimizationOracle + ?Sized>(
    opt: &mut O,
    c: &Vector,
    gamma: f64,
    eps: f64,
) -> Result<ViolAnswer> {
    Ok(match opt.query_opt(c)? {
        OptAnswer::Maximizer(y) if c.dot(&y) >= gamma - eps => ViolAnswer::Witness(y),
        _ => ViolAnswer::AllBelow,
    })
}

/// Oracles for `K*` backed by oracles for `K`: membership through validity and
/// separation through violation.
pub struct Polar<O> {
    inner: O,
    ledger: QueryLedger,
}

impl<O: Oracle> Polar<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            ledger: QueryLedger::default(),
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Oracle> Oracle for Polar<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eps(&self) -> f64 {
        self.inner.eps()
    }
    fn rho(&self) -> f64 {
        self.inner.rho()
    }
    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }
}

impl<O: ValidityOracle> MembershipOracle for Polar<O> {
    fn query_mem(&mut self, y: &Vector) -> Result<MemAnswer> {
        self.ledger.record(OracleKind::Mem);
        mem_polar_via_val(&mut self.inner, y)
    }
}

impl<O: ViolationOracle> SeparationOracle for Polar<O> {
    fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer> {
        self.ledger.record(OracleKind::Sep);
        sep_polar_via_viol(&mut self.inner, y)
    }
}

/// Agreement of one adapter with the closed-form polar.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AgreementStats {
    pub queries: usize,
    pub agreed: usize,
    /// Source-oracle queries per adapter call; all equal to 1 when correct.
    pub max_source_queries: u64,
    pub min_source_queries: u64,
}

impl AgreementStats {
    fn record(&mut self, agreed: bool, source_queries: u64) {
        if self.queries == 0 {
            self.min_source_queries = source_queries;
        }
        self.queries += 1;
        self.agreed += agreed as usize;
        self.max_source_queries = self.max_source_queries.max(source_queries);
        self.min_source_queries = self.min_source_queries.min(source_queries);
    }

    pub fn rate(&self) -> f64 {
        if self.queries == 0 {
            1.0
        } else {
            self.agreed as f64 / self.queries as f64
        }
    }

    pub fn exact(&self) -> bool {
        self.agreed == self.queries && self.min_source_queries == 1 && self.max_source_queries == 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PolarCheck {
    pub dim: usize,
    pub mem_polar_via_val: AgreementStats,
    pub val_via_mem_polar: AgreementStats,
    pub sep_polar_via_viol: AgreementStats,
    pub viol_via_sep_polar: AgreementStats,
}

impl PolarCheck {
    pub fn all_exact(&self) -> bool {
        self.mem_polar_via_val.exact()
            && self.val_via_mem_polar.exact()
            && self.sep_polar_via_viol.exact()
            && self.viol_via_sep_polar.exact()
    }
}

fn random_point<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-scale..=scale))
}

/// Runs every strong adapter `queries` times on random inputs and compares
/// with exact membership and support on `body` and its closed-form polar.
pub fn agreement_check(body: &ConvexBody, queries: usize, seed: u64) -> Result<PolarCheck> {
    let polar = polar_body(body)?;
    let n = body.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut on_k = OracleHandle::strong(body.clone(), seed ^ 0x9e37)?;
    let mut on_polar = OracleHandle::strong(polar.clone(), seed ^ 0x79b9)?;
    let mut check = PolarCheck {
        dim: n,
        ..Default::default()
    };
    // Queries are drawn from a box that covers both bodies and their exteriors.
    let span = 1.5 * (polar.outer_radius() + polar.center().norm());
    let span_k = 1.5 * (body.outer_radius() + body.center().norm());

    for _ in 0..queries {
        let c = random_point(&mut rng, n, span);
        let before = on_k.ledger().val;
        let answer = mem_polar_via_val(&mut on_k, &c)?;
        let truth = polar.contains(&c)?;
        check.mem_polar_via_val.record(
            (answer == MemAnswer::InExpanded) == truth,
            on_k.ledger().val - before,
        );

        let c = random_point(&mut rng, n, 1.0);
        let gamma = rng.gen_range(0.05..1.5) * span_k;
        let before = on_polar.ledger().mem;
        let answer = val_via_mem_polar(&mut on_polar, &c, gamma)?;
        let truth = body.support(&c)? >= gamma;
        check.val_via_mem_polar.record(
            (answer == ValAnswer::SomeAbove) == truth,
            on_polar.ledger().mem - before,
        );

        let y = random_point(&mut rng, n, span);
        let before = on_k.ledger().viol;
        let answer = sep_polar_via_viol(&mut on_k, &y)?;
        let ok = match &answer {
            SepAnswer::InExpanded => polar.contains(&y)?,
            SepAnswer::Separated(plane) => {
                !polar.contains(&y)?
                    && polar.support(plane.normal())? <= plane.normal().dot(&y) + TOL
            }
        };
        check
            .sep_polar_via_viol
            .record(ok, on_k.ledger().viol - before);

        let c = random_point(&mut rng, n, 1.0);
        let gamma = rng.gen_range(0.05..1.5) * span_k;
        let before = on_polar.ledger().sep;
        let answer = viol_via_sep_polar(&mut on_polar, &c, gamma)?;
        let ok = match &answer {
            ViolAnswer::AllBelow => body.support(&c)? <= gamma,
            ViolAnswer::Witness(w) => {
                body.distance(w)? <= TOL && (c.dot(w) - gamma).abs() <= TOL * (1.0 + gamma)
            }
        };
        check
            .viol_via_sep_polar
            .record(ok, on_polar.ledger().sep - before);
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn closed_form_polars() {
        let ball = ConvexBody::ball(Vector::zeros(2), 2.0).unwrap();
        let p = polar_body(&ball).unwrap();
        assert!((p.outer_radius() - 0.5).abs() < 1e-15);

        let cube = ConvexBody::axis_box(v(&[-1.0, -1.0, -1.0]), v(&[1.0, 1.0, 1.0])).unwrap();
        let cross = polar_body(&cube).unwrap();
        assert!(cross.contains(&v(&[0.5, 0.3, -0.2])).unwrap());
        assert!(!cross.contains(&v(&[0.5, 0.3, -0.3])).unwrap());
        let back = polar_body(&cross).unwrap();
        let Shape::AxisBox { lower, upper } = back.shape() else {
            panic!("expected a box")
        };
        assert!((lower - v(&[-1.0, -1.0, -1.0])).norm() < 1e-12);
        assert!((upper - v(&[1.0, 1.0, 1.0])).norm() < 1e-12);
    }

    #[test]
    fn spec_examples() {
        let cube = ConvexBody::axis_box(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let mut val = OracleHandle::strong(cube, 0).unwrap();
        assert_eq!(
            mem_polar_via_val(&mut val, &v(&[0.4, -0.5])).unwrap(),
            MemAnswer::InExpanded
        );
        assert_eq!(val.ledger().val, 1);

        let ball = ConvexBody::ball(Vector::zeros(2), 2.0).unwrap();
        let mut val = OracleHandle::strong(ball, 0).unwrap();
        assert_eq!(
            mem_polar_via_val(&mut val, &v(&[0.6, 0.0])).unwrap(),
            MemAnswer::NotInShrunk
        );

        let unit = ConvexBody::ball(Vector::zeros(2), 1.0).unwrap();
        let mut viol = OracleHandle::strong(unit.clone(), 0).unwrap();
        let SepAnswer::Separated(plane) = sep_polar_via_viol(&mut viol, &v(&[2.0, 0.0])).unwrap()
        else {
            panic!("expected a cut")
        };
        assert!(plane.normal()[0] > 0.0);
        assert!(unit.support(plane.normal()).unwrap() <= plane.normal().dot(&v(&[2.0, 0.0])));
        assert_eq!(
            sep_polar_via_viol(&mut viol, &v(&[0.5, 0.5])).unwrap(),
            SepAnswer::InExpanded
        );
    }

    #[test]
    fn opt_via_viol_on_ball() {
        let ball = ConvexBody::ball(Vector::zeros(3), 1.0).unwrap();
        let mut viol = OracleHandle::strong(ball, 3).unwrap();
        let c = v(&[1.0, 0.0, 0.0]);
        let OptAnswer::Maximizer(y) =
            opt_via_viol(&mut viol, &c, 1e-3, &Vector::zeros(3), 1.0).unwrap()
        else {
            panic!("expected a maximizer")
        };
        assert!((y[0] - 1.0).abs() <= 1e-3);
        assert!(viol.ledger().viol <= 12);
        assert!(opt_via_viol(
            &mut viol,
            &v(&[2.0, 0.0, 0.0]),
            1e-3,
            &Vector::zeros(3),
            1.0
        )
        .is_err());
    }

    #[test]
    fn viol_via_one_opt_query() {
        let ball = ConvexBody::ball(Vector::zeros(2), 1.0).unwrap();
        let mut opt = OracleHandle::strong(ball, 3).unwrap();
        let c = v(&[0.0, 1.0]);
        assert!(matches!(
            viol_via_opt(&mut opt, &c, 0.5, 0.0).unwrap(),
            ViolAnswer::Witness(_)
        ));
        assert_eq!(
            viol_via_opt(&mut opt, &c, 1.5, 0.0).unwrap(),
            ViolAnswer::AllBelow
        );
        assert_eq!(opt.ledger().opt, 2);
    }

    #[test]
    fn agreement_on_small_pairs() {
        let ball = ConvexBody::ball(Vector::zeros(3), 1.5).unwrap();
        assert!(agreement_check(&ball, 100, 1).unwrap().all_exact());
        let cube = ConvexBody::axis_box(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let check = agreement_check(&cube, 100, 2).unwrap();
        assert!(check.all_exact(), "{check:?}");
    }
}
