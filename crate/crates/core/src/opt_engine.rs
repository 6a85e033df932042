//! Optimization from separation with the central-cut ellipsoid method.
//!
//! Starting from `B(x0, R)`, each iteration queries the separation oracle at
//! the centre `a`. A separating normal `g` keeps `<g, x> <= <g, a>`; an
//! `InExpanded` answer records `a` as a candidate and keeps `<c, x> >= <c, a>`.
//!
//! With separation accuracy `eta <= eps/4`, no point of `B(K, -eps/2)` is ever
//! removed by a feasibility cut. Hence:
//!
//! - once `<c, a> + sqrt(c' P c) <= best + eps/2`, the best candidate is an
//!   `eps`-maximizer;
//! - if no candidate was found and `vol(E) < vol(B(eps/2))`, then `B(K, -eps)`
//!   is empty.
//!
//! In one dimension the update is plain bisection.

use nalgebra::{Cholesky, DMatrix};
use serde::Serialize;

use crate::error::{check_dim, invalid};
use crate::geometry::Vector;
use crate::oracles::{MembershipOracle, OptAnswer, Oracle, SepAnswer, SeparationOracle};
use crate::sep_from_mem::{BodyBounds, GradientMode, SepFromMem, SepParams, SepStats};
use crate::{Error, Result};

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

/// Ellipsoid `{ x : (x - a)' P^-1 (x - a) <= 1 }`.
#[derive(Clone, Debug)]
pub struct EllipsoidState {
    pub center: Vector,
    pub shape: DMatrix<f64>,
    pub iterations: usize,
    pub best: Option<(Vector, f64)>,
}

impl EllipsoidState {
    pub fn ball(center: Vector, radius: f64) -> Self {
        let n = center.len();
        Self {
            center,
            shape: DMatrix::identity(n, n) * (radius * radius),
            iterations: 0,
            best: None,
        }
    }

    /// `log det P`, failing if `P` is not positive definite.
    pub fn log_det(&self) -> Result<f64> {
        let chol = Cholesky::new(self.shape.clone()).ok_or_else(|| {
            Error::InconsistentOracle("ellipsoid shape lost positive definiteness".into())
        })?;
        Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
    }

    /// `log vol(B(radius)) - log vol(unit ball)` in dimension `n`, for comparison
    /// with `log det P / 2`.
    fn log_ball_scale(n: usize, radius: f64) -> f64 {
        n as f64 * radius.ln()
    }

    /// `sqrt(c' P c)`: half-width of the ellipsoid along unit `c`.
    pub fn half_width(&self, c: &Vector) -> f64 {
        c.dot(&(&self.shape * c)).max(0.0).sqrt()
    }

    /// Keeps `{ x : <w, x - a> <= 0 }`.
    pub fn cut(&mut self, w: &Vector) -> Result<()> {
        let n = self.center.len();
        let pw = &self.shape * w;
        let wpw = w.dot(&pw);
        if !(wpw > 0.0 && wpw.is_finite()) {
            return Err(Error::InconsistentOracle("degenerate cut direction".into()));
        }
        let b = pw / wpw.sqrt();
        if n == 1 {
            self.center -= &b / 2.0;
            self.shape /= 4.0;
        } else {
            let nf = n as f64;
            self.center -= &b / (nf + 1.0);
            let shrink = nf * nf / (nf * nf - 1.0);
            self.shape = (&self.shape - (&b * b.transpose()) * (2.0 / (nf + 1.0))) * shrink;
            self.shape = (&self.shape + self.shape.transpose()) * 0.5;
        }
        self.iterations += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeReport {
    /// `Some(y)` for a maximizer, `None` when `B(K, -eps)` is empty.
    pub maximizer: Option<Vec<f64>>,
    pub value: Option<f64>,
    pub iterations: usize,
    pub sep_queries: u64,
    /// `log det P` after every iteration, starting with the initial ball.
    pub log_dets: Vec<f64>,
}

impl OptimizeReport {
    pub fn answer(&self) -> OptAnswer {
        match &self.maximizer {
            Some(y) => OptAnswer::Maximizer(Vector::from_column_slice(y)),
            None => OptAnswer::ShrunkEmpty,
        }
    }
}

/// Maximizes `<c, .>` over `K` with `B(x0, r) ⊆ K ⊆ B(x0, R)` using a
/// separation oracle of accuracy at most `eps / 4`; `|c| = 1`.
pub fn optimize<S: SeparationOracle + ?Sized>(
    sep: &mut S,
    c: &Vector,
    eps: f64,
    center: &Vector,
    big_r: f64,
    max_iterations: usize,
) -> Result<OptimizeReport> {
    let n = sep.dim();
    check_dim(n, c.len())?;
    check_dim(n, center.len())?;
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(invalid("objective must be a unit vector"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    if sep.eps() > eps / 4.0 {
        return Err(invalid(format!(
            "separation accuracy {} exceeds eps/4",
            sep.eps()
        )));
    }
    let mut state = EllipsoidState::ball(center.clone(), big_r);
    let empty_threshold = 2.0 * EllipsoidState::log_ball_scale(n, eps / 2.0);
    let mut log_dets = vec![state.log_det()?];
    let mut queries = 0u64;
    loop {
        if let Some((_, best)) = &state.best {
            if c.dot(&state.center) + state.half_width(c) <= best + eps / 2.0 {
                break;
            }
        } else if *log_dets.last().unwrap() < empty_threshold {
            break;
        }
        if state.iterations >= max_iterations {
            return Err(Error::IterationCap(max_iterations));
        }
        let a = state.center.clone();
        queries += 1;
        let w = match sep.query_sep(&a)? {
            SepAnswer::Separated(plane) => plane.normal().clone(),
            SepAnswer::InExpanded => {
                let value = c.dot(&a);
                if state.best.as_ref().is_none_or(|(_, b)| value > *b) {
                    state.best = Some((a, value));
                }
                -c
            }
        };
        state.cut(&w)?;
        let log_det = state.log_det()?;
        if log_det >= *log_dets.last().unwrap() {
            return Err(Error::InconsistentOracle(
                "ellipsoid volume did not decrease".into(),
            ));
        }
        log_dets.push(log_det);
    }
    Ok(OptimizeReport {
        maximizer: state
            .best
            .as_ref()
            .map(|(y, _)| y.iter().copied().collect()),
        value: state.best.as_ref().map(|(_, v)| *v),
        iterations: state.iterations,
        sep_queries: queries,
        log_dets,
    })
}

/// Separation accuracy used by the membership pipeline: `eps / 5`.
pub fn pipeline_eta(eps: f64) -> f64 {
    eps / 5.0
}

/// Failure probability of each separation call in the membership pipeline.
pub const PIPELINE_SEP_RHO: f64 = 0.1;

/// Separation parameters the membership pipeline will use; the membership
/// oracle passed to [`optimize_via_membership`] must have `eps <= mem_eps`.
pub fn pipeline_params(bounds: &BodyBounds, eps: f64, mode: GradientMode) -> Result<SepParams> {
    let (n, r, big_r) = (bounds.dim(), bounds.inner_radius, bounds.outer_radius);
    let eta = pipeline_eta(eps);
    match mode {
        GradientMode::Classical => SepParams::classical(n, r, big_r, eta, PIPELINE_SEP_RHO),
        GradientMode::Quantum => SepParams::quantum(n, r, big_r, eta, PIPELINE_SEP_RHO),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub optimize: OptimizeReport,
    pub sep: SepStats,
    pub params: SepParams,
    pub mem_queries: u64,
    /// Membership queries of one separating call (one initial query plus the
    /// height-function binary searches).
    pub mem_per_separation: u64,
}

impl PipelineReport {
    /// Total membership queries predicted from the separation counts.
    pub fn predicted_mem_queries(&self) -> u64 {
        self.sep.inside + self.sep.separated * self.mem_per_separation
    }
}

/// OPT from MEM: the ellipsoid method over [`SepFromMem`].
pub fn optimize_via_membership<M: MembershipOracle>(
    mem: M,
    bounds: &BodyBounds,
    c: &Vector,
    eps: f64,
    mode: GradientMode,
    seed: u64,
) -> Result<PipelineReport> {
    let params = pipeline_params(bounds, eps, mode)?;
    let mut sep = SepFromMem::new(mem, bounds.clone(), params, seed)?;
    let optimize = optimize(
        &mut sep,
        c,
        eps,
        &bounds.center(),
        bounds.outer_radius,
        DEFAULT_MAX_ITERATIONS,
    )?;
    let stats = sep.stats().clone();
    let per_call = if stats.separated > 0 {
        stats.height_evaluations / stats.separated
    } else {
        0
    };
    let mem_per_separation = sep.mem_queries_per_separation(per_call);
    let mem_queries = sep.membership().ledger().mem;
    Ok(PipelineReport {
        optimize,
        sep: stats,
        params,
        mem_queries,
        mem_per_separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexBody;
    use crate::oracles::OracleHandle;

    fn v(x: &[f64]) -> Vector {
        Vector::from_vec(x.to_vec())
    }

    #[test]
    fn ball_maximum() {
        let ball = ConvexBody::ball(Vector::zeros(2), 1.0).unwrap();
        let mut sep = OracleHandle::new(ball, 2e-3, 0.0, 4).unwrap();
        let rep = optimize(
            &mut sep,
            &v(&[1.0, 0.0]),
            1e-2,
            &Vector::zeros(2),
            1.0,
            10_000,
        )
        .unwrap();
        assert!(rep.value.unwrap() >= 0.99);
        assert_eq!(rep.sep_queries, sep.ledger().sep);
        assert!(rep.log_dets.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn box_diagonal() {
        let cube = ConvexBody::axis_box(v(&[-1.0, -1.0]), v(&[1.0, 1.0])).unwrap();
        let mut sep = OracleHandle::new(cube.clone(), 2e-3, 0.0, 4).unwrap();
        let c = v(&[1.0, 1.0]).normalize();
        let rep = optimize(&mut sep, &c, 1e-2, &Vector::zeros(2), 2f64.sqrt(), 10_000).unwrap();
        assert!(rep.value.unwrap() >= 2f64.sqrt() - 1e-2);
    }

    #[test]
    fn one_dimension_bisects() {
        let seg = ConvexBody::axis_box(v(&[-1.0]), v(&[2.0])).unwrap();
        let mut sep = OracleHandle::new(seg, 1e-3, 0.0, 4).unwrap();
        let rep = optimize(&mut sep, &v(&[1.0]), 1e-2, &v(&[0.5]), 1.5, 1000).unwrap();
        assert!(rep.value.unwrap() >= 2.0 - 1e-2);
    }

    #[test]
    fn rejects_loose_separation() {
        let ball = ConvexBody::ball(Vector::zeros(2), 1.0).unwrap();
        let mut sep = OracleHandle::new(ball, 0.1, 0.0, 4).unwrap();
        assert!(optimize(&mut sep, &v(&[1.0, 0.0]), 0.1, &Vector::zeros(2), 1.0, 100).is_err());
    }

    #[test]
    fn empty_shrunk_body_is_reported() {
        // A ball of radius 0.01 next to eps = 0.05: B(K, -eps) is empty, and the
        // oracle says so by always separating the centre from a far-off point.
        struct Far;
        impl Oracle for Far {
            fn dim(&self) -> usize {
                2
            }
            fn eps(&self) -> f64 {
                0.01
            }
            fn rho(&self) -> f64 {
                0.0
            }
            fn ledger(&self) -> &crate::oracles::QueryLedger {
                unimplemented!()
            }
        }
        impl SeparationOracle for Far {
            fn query_sep(&mut self, y: &Vector) -> Result<SepAnswer> {
                let target = v(&[0.3, -0.2]);
                Ok(SepAnswer::Separated(crate::geometry::Hyperplane::through(
                    target - y,
                    y,
                )?))
            }
        }
        let rep = optimize(
            &mut Far,
            &v(&[1.0, 0.0]),
            0.05,
            &Vector::zeros(2),
            1.0,
            10_000,
        )
        .unwrap();
        assert_eq!(rep.answer(), OptAnswer::ShrunkEmpty);
    }
}
