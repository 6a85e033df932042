//! Dense tableau simplex for `max <c, x>` subject to `Ax <= b`.
//!
//! The caller supplies a feasible starting point, so the slack basis is
//! feasible from the outset and no phase one is needed. The shifted variables
//! `u = x - start` are free; once basic they never leave the basis.

use crate::geometry::Vector;
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;

pub(crate) struct LpSolution {
    pub value: f64,
    pub point: Vector,
}

pub(crate) fn maximize(
    objective: &Vector,
    rows: &[Vector],
    rhs: &[f64],
    start: &Vector,
) -> Result<LpSolution> {
    let n = objective.len();
    let m = rows.len();
    let width = n + m;
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    for (i, (a, bi)) in rows.iter().zip(rhs).enumerate() {
        let mut row = vec![0.0; width];
        row[..n].copy_from_slice(a.as_slice());
        row[n + i] = 1.0;
        tab.push(row);
        b.push((bi - a.dot(start)).max(0.0));
    }
    let mut reduced: Vec<f64> = objective
        .iter()
        .copied()
        .chain(std::iter::repeat_n(0.0, m))
        .collect();
    let mut basis: Vec<usize> = (n..width).collect();
    let mut is_basic = vec![false; width];
    for &j in &basis {
        is_basic[j] = true;
    }

    let cap = 50 * (width + 1) * (width + 1);
    for _ in 0..cap {
        let entering = (0..width).find_map(|j| {
            if is_basic[j] {
                return None;
            }
            let r = reduced[j];
            if j < n && r.abs() > PIVOT_TOL {
                Some((j, r.signum()))
            } else if j >= n && r > PIVOT_TOL {
                Some((j, 1.0))
            } else {
                None
            }
        });
        let Some((col, dir)) = entering else {
            let mut u = Vector::zeros(n);
            for (i, &var) in basis.iter().enumerate() {
                if var < n {
                    u[var] = b[i];
                }
            }
            let point = start + u;
            return Ok(LpSolution {
                value: objective.dot(&point),
                point,
            });
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if basis[i] < n {
                continue;
            }
            let a = tab[i][col] * dir;
            if a > PIVOT_TOL {
                let theta = b[i] / a;
                let better = match leave {
                    None => true,
                    Some((k, best)) => {
                        theta < best - 1e-15 || (theta <= best + 1e-15 && basis[i] < basis[k])
                    }
                };
                if better {
                    leave = Some((i, theta));
                }
            }
        }
        let (row, _) = leave.ok_or(Error::Unbounded)?;

        let pivot = tab[row][col];
        for v in tab[row].iter_mut() {
            *v /= pivot;
        }
        b[row] /= pivot;
        let pivot_row = tab[row].clone();
        let pivot_rhs = b[row];
        for i in 0..m {
            if i == row {
                continue;
            }
            let factor = tab[i][col];
            if factor != 0.0 {
                for (v, p) in tab[i].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                b[i] -= factor * pivot_rhs;
            }
        }
        let factor = reduced[col];
        for (v, p) in reduced.iter_mut().zip(&pivot_row) {
            *v -= factor * p;
        }
        is_basic[basis[row]] = false;
        is_basic[col] = true;
        basis[row] = col;
    }
    Err(Error::IterationCap(cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_corner() {
        let rows = vec![
            Vector::from_vec(vec![1.0, 0.0]),
            Vector::from_vec(vec![-1.0, 0.0]),
            Vector::from_vec(vec![0.0, 1.0]),
            Vector::from_vec(vec![0.0, -1.0]),
        ];
        let rhs = [1.0, 1.0, 2.0, 2.0];
        let sol = maximize(
            &Vector::from_vec(vec![1.0, 1.0]),
            &rows,
            &rhs,
            &Vector::zeros(2),
        )
        .unwrap();
        assert!((sol.value - 3.0).abs() < 1e-12);
        assert!((sol.point[0] - 1.0).abs() < 1e-12 && (sol.point[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_halfspace() {
        let rows = vec![Vector::from_vec(vec![1.0, 0.0])];
        let res = maximize(
            &Vector::from_vec(vec![0.0, 1.0]),
            &rows,
            &[1.0],
            &Vector::zeros(2),
        );
        assert!(matches!(res, Err(Error::Unbounded)));
    }

    #[test]
    fn degenerate_cross_polytope_vertex() {
        // |x|_1 <= 1 in R^4 has 16 facets and 4 facets meet at every vertex.
        let n = 4;
        let mut rows = Vec::new();
        for mask in 0..(1u32 << n) {
            rows.push(Vector::from_fn(n, |i, _| {
                if mask >> i & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            }));
        }
        let rhs = vec![1.0; rows.len()];
        let c = Vector::from_vec(vec![0.3, -0.9, 0.2, 0.1]);
        let sol = maximize(&c, &rows, &rhs, &Vector::zeros(n)).unwrap();
        assert!((sol.value - 0.9).abs() < 1e-12);
    }
}
