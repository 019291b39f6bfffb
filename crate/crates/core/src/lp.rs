//! Small dense simplex for `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The origin is feasible under `b >= 0`, so the slack basis is a valid
//! start and no phase one is needed. Pivoting uses Dantzig's rule and falls
//! back to Bland's rule after a run of degenerate pivots. The ratio test
//! runs on a right-hand side perturbed by distinct tiny amounts, which
//! breaks the ties of heavily degenerate problems (homogeneous cone rows);
//! the reported solution is the final basis evaluated at the exact `b`.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-11;
const DEGENERATE_RUN: usize = 64;
const PERTURBATION: f64 = 1e-10;
pub const DEFAULT_MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint row {row} has {found} coefficients, expected {expected}")]
    Shape { row: usize, found: usize, expected: usize },
    #[error("right-hand side {row} is negative ({value})")]
    NegativeRhs { row: usize, value: f64 },
    #[error("objective is unbounded")]
    Unbounded,
    #[error("pivot limit {0} reached")]
    PivotLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    maximize_with_limit(c, a, b, DEFAULT_MAX_PIVOTS)
}

pub fn maximize_with_limit(
    c: &[f64],
    a: &[Vec<f64>],
    b: &[f64],
    max_pivots: usize,
) -> Result<LpSolution, LpError> {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "one right-hand side per constraint row");
    for (row, coeffs) in a.iter().enumerate() {
        if coeffs.len() != n {
            return Err(LpError::Shape {
                row,
                found: coeffs.len(),
                expected: n,
            });
        }
        if b[row] < 0.0 {
            return Err(LpError::NegativeRhs { row, value: b[row] });
        }
    }
    // columns: n decision, m slack, exact rhs, perturbed rhs
    let width = n + m + 2;
    let (rhs, ratio_col) = (n + m, n + m + 1);
    let mut t = vec![0.0; (m + 1) * width];
    for r in 0..m {
        t[r * width..r * width + n].copy_from_slice(&a[r]);
        t[r * width + n + r] = 1.0;
        t[r * width + rhs] = b[r];
        // golden-ratio sequence: distinct values in [1, 2)
        let frac = (r as f64 * 0.618_033_988_749_895).fract();
        t[r * width + ratio_col] = b[r] + PERTURBATION * (1.0 + frac);
    }
    let z = m * width;
    for j in 0..n {
        t[z + j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut degenerate = 0usize;
    let mut pivots = 0usize;
    loop {
        let bland = degenerate >= DEGENERATE_RUN;
        let mut enter = None;
        let mut best = -PIVOT_EPS;
        for j in 0..n + m {
            let r = t[z + j];
            if r < best {
                enter = Some(j);
                if bland {
                    break;
                }
                best = r;
            }
        }
        let Some(e) = enter else { break };
        let mut leave: Option<usize> = None;
        let mut ratio = f64::INFINITY;
        for r in 0..m {
            let coef = t[r * width + e];
            if coef > PIVOT_EPS {
                let q = t[r * width + ratio_col] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => q < ratio - 1e-14 || (q <= ratio + 1e-14 && basis[r] < basis[l]),
                };
                if better {
                    ratio = q;
                    leave = Some(r);
                }
            }
        }
        let Some(l) = leave else {
            return Err(LpError::Unbounded);
        };
        if pivots >= max_pivots {
            return Err(LpError::PivotLimit(max_pivots));
        }
        pivots += 1;
        if ratio <= 1e-14 {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        pivot(&mut t, width, m, l, e);
        basis[l] = e;
    }
    let mut x = vec![0.0; n];
    for (r, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[r * width + rhs].max(0.0);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective, pivots })
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    let nonzero: Vec<usize> = (0..width).filter(|&j| pivot_row[j] != 0.0).collect();
    for r in (0..=m).filter(|&r| r != row) {
        let f = t[r * width + col];
        if f != 0.0 {
            let dst = &mut t[r * width..(r + 1) * width];
            for &j in &nonzero {
                dst[j] -= f * pivot_row[j];
            }
            dst[col] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates every basic solution of a 2-variable problem by
    /// intersecting pairs of constraint lines (including the axes).
    fn brute_force_2d(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
        let mut lines: Vec<(f64, f64, f64)> = a.iter().zip(b).map(|(r, &bi)| (r[0], r[1], bi)).collect();
        lines.push((1.0, 0.0, 0.0));
        lines.push((0.0, 1.0, 0.0));
        let feasible = |x: f64, y: f64| {
            x >= -1e-9 && y >= -1e-9 && a.iter().zip(b).all(|(r, &bi)| r[0] * x + r[1] * y <= bi + 1e-9)
        };
        let mut best = f64::NEG_INFINITY;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                if feasible(x, y) {
                    best = best.max(c[0] * x + c[1] * y);
                }
            }
        }
        best
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let sol = maximize(&[3.0, 5.0], &a, &[4.0, 12.0, 18.0]).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(maximize(&[1.0, 1.0], &a, &[1.0]), Err(LpError::Unbounded));
    }

    #[test]
    fn origin_optimal_when_costs_negative() {
        let a = vec![vec![1.0, 1.0]];
        let sol = maximize(&[-1.0, -2.0], &a, &[3.0]).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.pivots, 0);
    }

    #[test]
    fn degenerate_cone_problem_terminates() {
        // homogeneous constraints with a box: optimum at a vertex of the box
        let a = vec![
            vec![-1.0, 1.0, 0.0],
            vec![0.0, -1.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let b = [0.0, 0.0, 2.0, 2.0, 2.0];
        let sol = maximize(&[1.0, -3.0, 1.0], &a, &b).unwrap();
        // feasible: u2 <= u1, u3 <= u2; best is u1 = 2, u2 = u3 = 0 -> 2
        assert!((sol.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn shape_and_rhs_errors() {
        assert!(matches!(
            maximize(&[1.0], &[vec![1.0, 2.0]], &[1.0]),
            Err(LpError::Shape { .. })
        ));
        assert!(matches!(
            maximize(&[1.0], &[vec![1.0]], &[-1.0]),
            Err(LpError::NegativeRhs { .. })
        ));
    }

    #[test]
    fn random_problems_match_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let m = rng.random_range(1..6);
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| vec![rng.random_range(-1.0..3.0), rng.random_range(-1.0..3.0)])
                .collect();
            let mut a = a;
            // keep the region bounded
            a.push(vec![1.0, 1.0]);
            let b: Vec<f64> = (0..=m).map(|_| rng.random_range(0.0..5.0)).collect();
            let c = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let sol = maximize(&c, &a, &b).unwrap();
            let oracle = brute_force_2d(&c, &a, &b);
            assert!((sol.objective - oracle).abs() < 1e-7, "{} vs {}", sol.objective, oracle);
        }
    }
}
