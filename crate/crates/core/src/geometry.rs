//! Analytic convex bodies.
//!
//! Every body is closed and carries a center `x0` with radii `r <= R` such that
//! `B(x0, r) ⊆ K ⊆ B(x0, R)`. Membership, support values, support points and
//! Euclidean projections are computed in closed form, except for polytopes,
//! whose support uses vertex enumeration (n <= 3) or a simplex LP, and whose
//! projection uses Dykstra's alternating projections.
//!
//! `shrink_expand(eps)` implements `B(K, eps)` for `eps >= 0` as an
//! [`Shape::Expanded`] wrapper, and `B(K, -eps)` by exact erosion into a body
//! of the same kind.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid};
use crate::lp;
use crate::{Error, Result};

pub type Vector = DVector<f64>;

/// Relative slack for boundary comparisons in [`ConvexBody::contains`].
pub const BOUNDARY_TOL: f64 = 1e-14;

const DYKSTRA_SWEEPS: usize = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Ball {
        center: Vector,
        radius: f64,
    },
    AxisBox {
        lower: Vector,
        upper: Vector,
    },
    /// `{x : <a_i, x> <= b_i for all i}`.
    Polytope {
        normals: Vec<Vector>,
        offsets: Vec<f64>,
    },
    /// `{x : <h, x> <= level} ∩ B(0, radius)` with `h` a unit vector.
    CappedBall {
        normal: Vector,
        level: f64,
        radius: f64,
    },
    /// `B(base, by)` with `by > 0`.
    Expanded {
        base: Box<ConvexBody>,
        by: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBody {
    shape: Shape,
    center: Vector,
    inner_radius: f64,
    outer_radius: f64,
}

/// An affine hyperplane `<normal, x> = offset` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
}

impl Hyperplane {
    /// Normalizes `normal` and scales `offset` accordingly.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let norm = normal.norm();
        if !(norm.is_finite() && norm > 0.0) || !offset.is_finite() {
            return Err(invalid("hyperplane normal must be finite and nonzero"));
        }
        Ok(Self {
            normal: normal / norm,
            offset: offset / norm,
        })
    }

    /// The hyperplane with the given normal direction passing through `point`.
    pub fn through(normal: Vector, point: &Vector) -> Result<Self> {
        check_dim(normal.len(), point.len())?;
        let norm = normal.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("hyperplane normal must be finite and nonzero"));
        }
        let unit = normal / norm;
        let offset = unit.dot(point);
        Ok(Self {
            normal: unit,
            offset,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed value `<normal, p> - offset`.
    pub fn eval(&self, p: &Vector) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

fn finite(v: &Vector) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl ConvexBody {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() || !finite(&center) {
            return Err(invalid("ball center must be a finite nonempty vector"));
        }
        if !positive(radius) {
            return Err(invalid("ball radius must be positive"));
        }
        Ok(Self::ball_unchecked(center, radius))
    }

    fn ball_unchecked(center: Vector, radius: f64) -> Self {
        Self {
            shape: Shape::Ball {
                center: center.clone(),
                radius,
            },
            center,
            inner_radius: radius,
            outer_radius: radius,
        }
    }

    pub fn axis_box(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() || !finite(&lower) || !finite(&upper) {
            return Err(invalid("box corners must be finite nonempty vectors"));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| u <= l) {
            return Err(invalid(
                "box upper corner must exceed lower corner in every coordinate",
            ));
        }
        Ok(Self::axis_box_unchecked(lower, upper))
    }

    fn axis_box_unchecked(lower: Vector, upper: Vector) -> Self {
        let half = (&upper - &lower) / 2.0;
        let center = (&upper + &lower) / 2.0;
        let inner = half.min();
        let outer = half.norm();
        Self {
            shape: Shape::AxisBox { lower, upper },
            center,
            inner_radius: inner,
            outer_radius: outer,
        }
    }

    /// `{x : <a_i, x> <= b_i}`. `interior` must be a strictly feasible point;
    /// the stored center is the Chebyshev center found from it.
    pub fn polytope(normals: Vec<Vector>, offsets: Vec<f64>, interior: &Vector) -> Result<Self> {
        let n = interior.len();
        if n == 0 || normals.is_empty() || normals.len() != offsets.len() {
            return Err(invalid(
                "polytope needs matching nonempty normals and offsets",
            ));
        }
        for (a, b) in normals.iter().zip(&offsets) {
            check_dim(n, a.len())?;
            if !finite(a) || a.norm() == 0.0 || !b.is_finite() {
                return Err(invalid(
                    "polytope facets must be finite with nonzero normals",
                ));
            }
            if a.dot(interior) >= *b {
                return Err(invalid(
                    "interior point is not strictly inside the polytope",
                ));
            }
        }
        let (center, inner) = chebyshev_center(&normals, &offsets, interior)?;
        let mut body = Self {
            shape: Shape::Polytope { normals, offsets },
            center: center.clone(),
            inner_radius: inner,
            outer_radius: 0.0,
        };
        body.outer_radius = body.polytope_outer_radius()?;
        Ok(body)
    }

    /// `{x : <h, x> <= 0} ∩ B(0, radius)`; `normal` is normalized.
    pub fn capped_ball(normal: Vector, radius: f64) -> Result<Self> {
        Self::capped_ball_at_level(normal, 0.0, radius)
    }

    /// `{x : <h, x> <= level} ∩ B(0, radius)` with `|level| < radius`.
    pub fn capped_ball_at_level(normal: Vector, level: f64, radius: f64) -> Result<Self> {
        let norm = normal.norm();
        if normal.is_empty() || !finite(&normal) || norm == 0.0 {
            return Err(invalid("cap normal must be finite and nonzero"));
        }
        if !positive(radius) || !level.is_finite() || level.abs() >= radius {
            return Err(invalid("capped ball needs radius > 0 and |level| < radius"));
        }
        Ok(Self::capped_unchecked(normal / norm, level, radius))
    }

    fn capped_unchecked(normal: Vector, level: f64, radius: f64) -> Self {
        let center = &normal * ((level - radius) / 2.0);
        let inner = (radius + level) / 2.0;
        let outer = (inner * inner + radius * radius - level * level)
            .max(0.0)
            .sqrt();
        Self {
            shape: Shape::CappedBall {
                normal,
                level,
                radius,
            },
            center,
            inner_radius: inner,
            outer_radius: outer,
        }
    }

    /// `B(K, eps)` for `eps >= 0`, `B(K, -|eps|)` for `eps < 0`.
    pub fn shrink_expand(&self, eps: f64) -> Result<Self> {
        if !eps.is_finite() {
            return Err(invalid("shift must be finite"));
        }
        if eps >= 0.0 {
            return Ok(self.expanded(eps));
        }
        let d = -eps;
        if d >= self.inner_radius {
            return Err(Error::EmptyBody(d));
        }
        self.try_shrink(d).ok_or(Error::EmptyBody(d))
    }

    fn expanded(&self, by: f64) -> Self {
        if by == 0.0 {
            return self.clone();
        }
        let (base, total) = match &self.shape {
            Shape::Expanded { base, by: inner } => ((**base).clone(), inner + by),
            _ => (self.clone(), by),
        };
        Self {
            center: base.center.clone(),
            inner_radius: base.inner_radius + total,
            outer_radius: base.outer_radius + total,
            shape: Shape::Expanded {
                base: Box::new(base),
                by: total,
            },
        }
    }

    /// Exact erosion `B(K, -d)`, or `None` when it is empty.
    pub fn try_shrink(&self, d: f64) -> Option<Self> {
        if d <= 0.0 {
            return Some(self.expanded(-d));
        }
        match &self.shape {
            Shape::Ball { center, radius } => {
                (*radius >= d).then(|| Self::ball_unchecked(center.clone(), radius - d))
            }
            Shape::AxisBox { lower, upper } => {
                if lower.iter().zip(upper.iter()).any(|(l, u)| u - l < 2.0 * d) {
                    return None;
                }
                Some(Self::axis_box_unchecked(
                    lower.add_scalar(d),
                    upper.add_scalar(-d),
                ))
            }
            Shape::Polytope { normals, offsets } => {
                if d > self.inner_radius {
                    return None;
                }
                let offsets = normals
                    .iter()
                    .zip(offsets)
                    .map(|(a, b)| b - d * a.norm())
                    .collect();
                Some(Self {
                    shape: Shape::Polytope {
                        normals: normals.clone(),
                        offsets,
                    },
                    center: self.center.clone(),
                    inner_radius: self.inner_radius - d,
                    outer_radius: self.outer_radius,
                })
            }
            Shape::CappedBall {
                normal,
                level,
                radius,
            } => {
                if radius - d < 0.0 || level + radius < 2.0 * d {
                    return None;
                }
                Some(Self::capped_unchecked(
                    normal.clone(),
                    level - d,
                    radius - d,
                ))
            }
            Shape::Expanded { base, by } => {
                if d < *by {
                    Some(base.expanded(by - d))
                } else {
                    base.try_shrink(d - by)
                }
            }
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    fn check(&self, p: &Vector) -> Result<()> {
        check_dim(self.dim(), p.len())?;
        if finite(p) {
            Ok(())
        } else {
            Err(invalid("point has non-finite coordinates"))
        }
    }

    /// Exact membership; boundary points are members.
    pub fn contains(&self, p: &Vector) -> Result<bool> {
        self.check(p)?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Vector) -> bool {
        let tol = BOUNDARY_TOL * (1.0 + self.outer_radius + self.center.norm());
        match &self.shape {
            Shape::Ball { center, radius } => (p - center).norm() <= radius + tol,
            Shape::AxisBox { lower, upper } => p
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(x, (l, u))| *x >= l - tol && *x <= u + tol),
            Shape::Polytope { normals, offsets } => normals
                .iter()
                .zip(offsets)
                .all(|(a, b)| a.dot(p) <= b + tol * a.norm()),
            Shape::CappedBall {
                normal,
                level,
                radius,
            } => normal.dot(p) <= level + tol && p.norm() <= radius + tol,
            Shape::Expanded { base, by } => base.distance_unchecked(p) <= by + tol,
        }
    }

    /// Euclidean projection onto the body.
    pub fn project(&self, p: &Vector) -> Result<Vector> {
        self.check(p)?;
        Ok(self.project_unchecked(p))
    }

    pub(crate) fn project_unchecked(&self, p: &Vector) -> Vector {
        match &self.shape {
            Shape::Ball { center, radius } => {
                let d = p - center;
                let norm = d.norm();
                if norm <= *radius {
                    p.clone()
                } else {
                    center + d * (radius / norm)
                }
            }
            Shape::AxisBox { lower, upper } => {
                Vector::from_fn(p.len(), |i, _| p[i].clamp(lower[i], upper[i]))
            }
            Shape::Polytope { normals, offsets } => dykstra(normals, offsets, p),
            Shape::CappedBall {
                normal,
                level,
                radius,
            } => project_capped(normal, *level, *radius, p),
            Shape::Expanded { base, by } => {
                let q = base.project_unchecked(p);
                let d = p - &q;
                let norm = d.norm();
                if norm <= *by {
                    p.clone()
                } else {
                    q + d * (by / norm)
                }
            }
        }
    }

    /// Unit normal of the most violated facet of a polytope, if `p` is outside it.
    pub(crate) fn violated_facet(&self, p: &Vector) -> Option<Vector> {
        let Shape::Polytope { normals, offsets } = &self.shape else {
            return None;
        };
        normals
            .iter()
            .zip(offsets)
            .map(|(a, b)| (a, (a.dot(p) - b) / a.norm()))
            .filter(|(_, gap)| *gap > 0.0)
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(a, _)| a.normalize())
    }

    /// Euclidean distance to the body (0 inside).
    pub fn distance(&self, p: &Vector) -> Result<f64> {
        self.check(p)?;
        Ok(self.distance_unchecked(p))
    }

    pub(crate) fn distance_unchecked(&self, p: &Vector) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => ((p - center).norm() - radius).max(0.0),
            Shape::Expanded { base, by } => (base.distance_unchecked(p) - by).max(0.0),
            _ => (p - self.project_unchecked(p)).norm(),
        }
    }

    /// `sup_{x in K} <c, x>` for any nonzero `c`.
    pub fn support(&self, c: &Vector) -> Result<f64> {
        Ok(self.support_point(c)?.0)
    }

    /// The support value together with a maximizer.
    pub fn support_point(&self, c: &Vector) -> Result<(f64, Vector)> {
        self.check(c)?;
        let cn = c.norm();
        if cn == 0.0 {
            return Err(invalid("support direction must be nonzero"));
        }
        let x = match &self.shape {
            Shape::Ball { center, radius } => center + c * (radius / cn),
            Shape::AxisBox { lower, upper } => {
                Vector::from_fn(c.len(), |i, _| if c[i] > 0.0 { upper[i] } else { lower[i] })
            }
            Shape::Polytope { normals, offsets } => {
                if c.len() <= 3 {
                    polytope_argmax_by_vertices(normals, offsets, c)?
                } else {
                    lp::maximize(c, normals, offsets, &self.center)?.point
                }
            }
            Shape::CappedBall {
                normal,
                level,
                radius,
            } => {
                let along = normal.dot(c);
                if along * radius / cn <= *level {
                    c * (radius / cn)
                } else {
                    let perp = c - normal * along;
                    let pn = perp.norm();
                    let lateral = (radius * radius - level * level).max(0.0).sqrt();
                    if pn == 0.0 {
                        normal * *level
                    } else {
                        normal * *level + perp * (lateral / pn)
                    }
                }
            }
            Shape::Expanded { base, by } => {
                let (_, x) = base.support_point(c)?;
                x + c * (by / cn)
            }
        };
        Ok((c.dot(&x), x))
    }

    fn polytope_outer_radius(&self) -> Result<f64> {
        let Shape::Polytope { normals, offsets } = &self.shape else {
            return Ok(self.outer_radius);
        };
        let n = self.dim();
        if n <= 3 {
            let vertices = polytope_vertices(normals, offsets);
            if vertices.is_empty() {
                return Err(Error::Unbounded);
            }
            return Ok(vertices
                .iter()
                .map(|v| (v - &self.center).norm())
                .fold(0.0, f64::max));
        }
        let mut sq = 0.0;
        for i in 0..n {
            let e = Vector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
            let hi = lp::maximize(&e, normals, offsets, &self.center)?.value - self.center[i];
            let lo = lp::maximize(&(-&e), normals, offsets, &self.center)?.value + self.center[i];
            sq += hi.max(lo).powi(2);
        }
        Ok(sq.sqrt())
    }
}

fn chebyshev_center(
    normals: &[Vector],
    offsets: &[f64],
    interior: &Vector,
) -> Result<(Vector, f64)> {
    let n = interior.len();
    let rows: Vec<Vector> = normals
        .iter()
        .map(|a| Vector::from_fn(n + 1, |i, _| if i < n { a[i] } else { a.norm() }))
        .collect();
    let objective = Vector::from_fn(n + 1, |i, _| if i == n { 1.0 } else { 0.0 });
    let start = Vector::from_fn(n + 1, |i, _| if i < n { interior[i] } else { 0.0 });
    let sol = lp::maximize(&objective, &rows, offsets, &start)?;
    Ok((sol.point.rows(0, n).into_owned(), sol.point[n]))
}

fn project_capped(normal: &Vector, level: f64, radius: f64, p: &Vector) -> Vector {
    let excess = normal.dot(p) - level;
    let onto_half = if excess > 0.0 {
        p - normal * excess
    } else {
        p.clone()
    };
    if onto_half.norm() <= radius {
        return onto_half;
    }
    let pn = p.norm();
    let onto_ball = p * (radius / pn);
    if normal.dot(&onto_ball) <= level {
        return onto_ball;
    }
    // Closest point of the rim {<h,x> = level, |x| = radius}.
    let perp = p - normal * normal.dot(p);
    let lateral = (radius * radius - level * level).max(0.0).sqrt();
    let pp = perp.norm();
    if pp == 0.0 {
        let mut any = Vector::zeros(p.len());
        let k = (0..p.len())
            .min_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()))
            .unwrap_or(0);
        any[k] = 1.0;
        let dir = &any - normal * normal[k];
        return normal * level + dir.normalize() * lateral;
    }
    normal * level + perp * (lateral / pp)
}

fn dykstra(normals: &[Vector], offsets: &[f64], p: &Vector) -> Vector {
    if normals.iter().zip(offsets).all(|(a, b)| a.dot(p) <= *b) {
        return p.clone();
    }
    let mut x = p.clone();
    let mut corrections = vec![Vector::zeros(p.len()); normals.len()];
    for _ in 0..DYKSTRA_SWEEPS {
        let mut moved = 0.0f64;
        for ((a, b), q) in normals.iter().zip(offsets).zip(corrections.iter_mut()) {
            let y = &x + &*q;
            let excess = a.dot(&y) - b;
            let next = if excess > 0.0 {
                &y - a * (excess / a.norm_squared())
            } else {
                y.clone()
            };
            *q = y - &next;
            moved = moved.max((&next - &x).norm());
            x = next;
        }
        if moved < 1e-15 * (1.0 + x.norm()) {
            break;
        }
    }
    x
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

fn polytope_vertices(normals: &[Vector], offsets: &[f64]) -> Vec<Vector> {
    let n = normals[0].len();
    let scale = offsets.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
    let mut vertices = Vec::new();
    for combo in combinations(normals.len(), n) {
        let a = DMatrix::from_fn(n, n, |i, j| normals[combo[i]][j]);
        let b = DVector::from_fn(n, |i, _| offsets[combo[i]]);
        if a.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(x) = a.lu().solve(&b) else { continue };
        let feasible = normals
            .iter()
            .zip(offsets)
            .all(|(a, b)| a.dot(&x) <= b + 1e-10 * scale * a.norm().max(1.0));
        if feasible {
            vertices.push(x);
        }
    }
    vertices
}

fn polytope_argmax_by_vertices(normals: &[Vector], offsets: &[f64], c: &Vector) -> Result<Vector> {
    polytope_vertices(normals, offsets)
        .into_iter()
        .max_by(|a, b| c.dot(a).total_cmp(&c.dot(b)))
        .ok_or(Error::Unbounded)
}

/// JSON description of a body.
///
/// ```json
/// {"kind": "ball", "center": [0, 0], "radius": 1}
/// {"kind": "box", "lower": [-1, -1], "upper": [1, 1]}
/// {"kind": "polytope", "normals": [[1, 0], [0, 1], [-1, -1]], "offsets": [1, 1, 1], "interior": [0, 0]}
/// {"kind": "capped_ball", "normal": [1, 0], "radius": 1.5}
/// {"kind": "shifted", "base": {"kind": "ball", "center": [0, 0], "radius": 1}, "offset": -0.1}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(rename = "box")]
    AxisBox {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        interior: Vec<f64>,
    },
    CappedBall {
        normal: Vec<f64>,
        radius: f64,
        #[serde(default)]
        level: f64,
    },
    Shifted {
        base: Box<BodySpec>,
        offset: f64,
    },
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        let v = |x: &Vec<f64>| Vector::from_vec(x.clone());
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(v(center), *radius),
            BodySpec::AxisBox { lower, upper } => ConvexBody::axis_box(v(lower), v(upper)),
            BodySpec::Polytope {
                normals,
                offsets,
                interior,
            } => ConvexBody::polytope(
                normals.iter().map(v).collect(),
                offsets.clone(),
                &v(interior),
            ),
            BodySpec::CappedBall {
                normal,
                radius,
                level,
            } => ConvexBody::capped_ball_at_level(v(normal), *level, *radius),
            BodySpec::Shifted { base, offset } => base.build()?.shrink_expand(*offset),
        }
    }
}

impl From<&ConvexBody> for BodySpec {
    fn from(body: &ConvexBody) -> Self {
        let v = |x: &Vector| x.iter().copied().collect::<Vec<f64>>();
        match &body.shape {
            Shape::Ball { center, radius } => BodySpec::Ball {
                center: v(center),
                radius: *radius,
            },
            Shape::AxisBox { lower, upper } => BodySpec::AxisBox {
                lower: v(lower),
                upper: v(upper),
            },
            Shape::Polytope { normals, offsets } => BodySpec::Polytope {
                normals: normals.iter().map(v).collect(),
                offsets: offsets.clone(),
                interior: v(&body.center),
            },
            Shape::CappedBall {
                normal,
                level,
                radius,
            } => BodySpec::CappedBall {
                normal: v(normal),
                radius: *radius,
                level: *level,
            },
            Shape::Expanded { base, by } => BodySpec::Shifted {
                base: Box::new(BodySpec::from(&**base)),
                offset: *by,
            },
        }
    }
}
