//! Mean matrix, criticality, generating functions and the extinction
//! probability fixed point of the multi-type branching process.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::children::{children_distributions, ChildrenError, ChildrenPmf};
use crate::model::{ModelError, SystemModel};

/// Entries below this are treated as structural zeros.
pub const STRUCTURAL_ZERO: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchingError {
    #[error("children list is inconsistent: {0}")]
    InconsistentChildren(String),
    #[error("matrix data has {found} entries, expected {expected}")]
    Shape { found: usize, expected: usize },
    #[error("power iteration did not converge after {iterations} iterations (last estimates {history:?})")]
    NonConvergence { iterations: usize, history: Vec<f64> },
    #[error("fixed-point iteration budget of {iterations} exceeded (residual {residual:e})")]
    BudgetExceeded {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("seed system {seed} out of range for {n_systems} systems")]
    SeedOutOfRange { seed: usize, n_systems: usize },
    #[error(transparent)]
    Children(#[from] ChildrenError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Square nonnegative matrix of expected children counts, row = parent type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMatrix {
    order: usize,
    data: Vec<f64>,
}

impl MeanMatrix {
    pub fn new(order: usize, data: Vec<f64>) -> Result<Self, BranchingError> {
        if data.len() != order * order {
            return Err(BranchingError::Shape {
                found: data.len(),
                expected: order * order,
            });
        }
        Ok(Self { order, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, BranchingError> {
        let order = rows.len();
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(order, data)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.order..(row + 1) * self.order]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.order).map(|r| self.row(r).to_vec()).collect()
    }

    /// Breaches of the structure implied by the type definitions
    /// (`M[i][i] = M[i+][i] = 0`, `M[i][j+] = 0` for `j != i`,
    /// `M[i][i+] >= M[i+][i+]`). Only meaningful for `2N`-type matrices.
    pub fn structural_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if !self.order.is_multiple_of(2) {
            issues.push(format!("order {} is odd", self.order));
            return issues;
        }
        let n = self.order / 2;
        for i in 0..n {
            for (r, c) in [(i, i), (i + n, i)] {
                if self.get(r, c) > STRUCTURAL_ZERO {
                    issues.push(format!("M[{r}][{c}] = {} should be 0", self.get(r, c)));
                }
            }
            for j in (0..n).filter(|&j| j != i) {
                for r in [i, i + n] {
                    if self.get(r, j + n) > STRUCTURAL_ZERO {
                        issues.push(format!("M[{r}][{}] = {} should be 0", j + n, self.get(r, j + n)));
                    }
                }
            }
            if self.get(i, i + n) + 1e-12 < self.get(i + n, i + n) {
                issues.push(format!(
                    "M[{i}][{}] = {} is below M[{}][{}] = {}",
                    i + n,
                    self.get(i, i + n),
                    i + n,
                    i + n,
                    self.get(i + n, i + n)
                ));
            }
        }
        issues
    }
}

fn check_children(children: &[ChildrenPmf]) -> Result<usize, BranchingError> {
    let Some(first) = children.first() else {
        return Err(BranchingError::InconsistentChildren("empty".into()));
    };
    let n = first.n_systems();
    if children.len() != 2 * n {
        return Err(BranchingError::InconsistentChildren(format!(
            "{} laws for {} types",
            children.len(),
            2 * n
        )));
    }
    for (t, h) in children.iter().enumerate() {
        if h.origin() != t || h.n_systems() != n {
            return Err(BranchingError::InconsistentChildren(format!(
                "law #{t} has origin {} over {} systems",
                h.origin(),
                h.n_systems()
            )));
        }
    }
    Ok(n)
}

/// `M[i][j] = E[number of type-j children of a type-i agent]`.
pub fn mean_matrix(children: &[ChildrenPmf]) -> Result<MeanMatrix, BranchingError> {
    let n = check_children(children)?;
    let data: Vec<f64> = children.iter().flat_map(ChildrenPmf::mean).collect();
    let m = MeanMatrix::new(2 * n, data)?;
    debug_assert!(
        m.structural_issues()
            .iter()
            .all(|s| !s.contains("should be 0")),
        "zero pattern broken: {:?}",
        m.structural_issues()
    );
    Ok(m)
}

/// Whether some power `B^k` of the positivity pattern is all ones, for
/// `k <= n^2 - 2n + 2`.
pub fn is_positively_regular(m: &MeanMatrix) -> bool {
    let n = m.order();
    if n == 0 {
        return false;
    }
    let pattern: Vec<bool> = m.data.iter().map(|&v| v > STRUCTURAL_ZERO).collect();
    let bound = n * n - 2 * n + 2;
    let mut power = pattern.clone();
    for _ in 0..bound.max(1) {
        if power.iter().all(|&b| b) {
            return true;
        }
        let mut next = vec![false; n * n];
        for r in 0..n {
            for k in (0..n).filter(|&k| power[r * n + k]) {
                for c in 0..n {
                    next[r * n + c] |= pattern[k * n + c];
                }
            }
        }
        power = next;
    }
    power.iter().all(|&b| b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRadius {
    pub value: f64,
    pub iterations: usize,
}

pub const SPECTRAL_TOLERANCE: f64 = 1e-10;
pub const SPECTRAL_MAX_ITERATIONS: usize = 100_000;

/// Strongly connected components of the positivity graph, with the
/// reflexive reachability relation (row-major).
fn strong_components(m: &MeanMatrix) -> (Vec<Vec<usize>>, Vec<bool>) {
    let n = m.order();
    let mut reach: Vec<bool> = (0..n * n).map(|k| m.data[k] > 0.0 || k / n == k % n).collect();
    for k in 0..n {
        for r in 0..n {
            if reach[r * n + k] {
                for c in 0..n {
                    reach[r * n + c] |= reach[k * n + c];
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for r in 0..n {
        if seen[r] {
            continue;
        }
        let comp: Vec<usize> = (r..n).filter(|&c| reach[r * n + c] && reach[c * n + r]).collect();
        comp.iter().for_each(|&c| seen[c] = true);
        out.push(comp);
    }
    (out, reach)
}

fn block_of(m: &MeanMatrix, comp: &[usize]) -> Vec<Vec<f64>> {
    comp.iter().map(|&r| comp.iter().map(|&c| m.get(r, c)).collect()).collect()
}

/// Perron root of a nonnegative matrix.
///
/// The root is the largest over the irreducible diagonal blocks of the
/// positivity graph. Each block is solved by power iteration from the
/// all-ones vector on `B + cI` (`c` half the largest row sum), which is
/// primitive. Iteration stops when the Collatz-Wielandt bounds
/// `min (Bx)_i / x_i <= rho <= max (Bx)_i / x_i` agree to a relative
/// `1e-10`.
pub fn spectral_radius(m: &MeanMatrix) -> Result<SpectralRadius, BranchingError> {
    let mut best = SpectralRadius {
        value: 0.0,
        iterations: 0,
    };
    for comp in strong_components(m).0 {
        let r = irreducible_radius(&block_of(m, &comp))?;
        best.iterations += r.iterations;
        best.value = best.value.max(r.value);
    }
    Ok(best)
}

fn irreducible_radius(b: &[Vec<f64>]) -> Result<SpectralRadius, BranchingError> {
    let n = b.len();
    let max_row: f64 = b.iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
    if n == 0 || max_row <= 0.0 {
        return Ok(SpectralRadius {
            value: 0.0,
            iterations: 0,
        });
    }
    if n == 1 {
        return Ok(SpectralRadius {
            value: b[0][0],
            iterations: 0,
        });
    }
    let shift = 0.5 * max_row;
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut history: Vec<f64> = Vec::new();
    for it in 1..=SPECTRAL_MAX_ITERATIONS {
        for r in 0..n {
            y[r] = shift * x[r] + b[r].iter().zip(&x).map(|(a, v)| a * v).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= SPECTRAL_TOLERANCE * (hi - shift).abs().max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(SpectralRadius {
                value: (0.5 * (lo + hi) - shift).max(0.0),
                iterations: it,
            });
        }
        let norm: f64 = y.iter().sum();
        history.push(norm - shift);
        if history.len() > 10 {
            history.remove(0);
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Err(BranchingError::NonConvergence {
        iterations: SPECTRAL_MAX_ITERATIONS,
        history,
    })
}

/// `f(s) = sum_o h(o) prod_j s_j^{o_j}`, with `0^0 = 1`.
pub fn evaluate_generating_function(h: &ChildrenPmf, s: &[f64]) -> f64 {
    assert_eq!(s.len(), h.n_types(), "argument length must equal the number of types");
    h.iter()
        .map(|(o, m)| {
            o.iter()
                .zip(s)
                .filter(|(k, _)| **k > 0)
                .fold(m, |acc, (&k, &sj)| acc * sj.powi(k as i32))
        })
        .sum()
}

/// The vector generating function `(f_1, ..., f_2N)` in a compact sparse
/// form for repeated evaluation.
#[derive(Debug, Clone)]
pub struct GeneratingFunctions {
    n_types: usize,
    laws: Vec<SparseLaw>,
}

/// Outcome masses with their nonzero `(type, count)` pairs.
type SparseLaw = Vec<(f64, Vec<(usize, i32)>)>;

impl GeneratingFunctions {
    pub fn new(children: &[ChildrenPmf]) -> Result<Self, BranchingError> {
        let n = check_children(children)?;
        let laws = children
            .iter()
            .map(|h| {
                h.iter()
                    .map(|(o, m)| {
                        let powers = o
                            .iter()
                            .enumerate()
                            .filter(|(_, k)| **k > 0)
                            .map(|(j, &k)| (j, k as i32))
                            .collect();
                        (m, powers)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n_types: 2 * n, laws })
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn eval_into(&self, s: &[f64], out: &mut [f64]) {
        for (slot, law) in out.iter_mut().zip(&self.laws) {
            *slot = law
                .iter()
                .map(|(m, powers)| powers.iter().fold(*m, |acc, &(j, k)| acc * s[j].powi(k)))
                .sum();
        }
    }

    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_types];
        self.eval_into(s, &mut out);
        out
    }

    /// Whether every type produces exactly one child with probability one.
    pub fn is_singular(&self) -> bool {
        self.laws.iter().all(|law| {
            law.len() == 1 && law[0].1.len() == 1 && law[0].1[0].1 == 1 && (law[0].0 - 1.0).abs() < 1e-12
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Monotone fixed-point iteration from 0.
    Iteration,
    /// Every class of types is critical or subcritical and none of them
    /// is singular: extinction is certain.
    ExtinctionCertain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when successive iterates differ by less than this (max norm).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// `|rho - 1|` below this is reported as critical.
    pub critical_band: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 1_000_000,
            critical_band: 1e-9,
        }
    }
}

/// Extinction probabilities of all types plus solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoEVector {
    pub mu: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub spectral_radius: f64,
    pub regime: Regime,
    pub positively_regular: bool,
    pub method: SolveMethod,
}

impl PoEVector {
    /// Probability of cascading failures when the first failure hits type `t`.
    pub fn cascade_probability(&self, t: usize) -> f64 {
        1.0 - self.mu[t]
    }
}

/// Solves `f(mu) = mu` for the minimal fixed point in `[0, 1]^{2N}`.
pub fn extinction_from_children(
    children: &[ChildrenPmf],
    opts: &SolverOptions,
) -> Result<PoEVector, BranchingError> {
    let gf = GeneratingFunctions::new(children)?;
    let m = mean_matrix(children)?;
    let rho = spectral_radius(&m)?.value;
    let regular = is_positively_regular(&m);
    let regime = if (rho - 1.0).abs() <= opts.critical_band {
        Regime::Critical
    } else if rho < 1.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };
    let n_types = gf.n_types();
    let certain = certain_extinction(children, &m, opts.critical_band)?;
    if certain.iter().all(|&c| c) {
        return Ok(PoEVector {
            mu: vec![1.0; n_types],
            iterations: 0,
            residual: 0.0,
            spectral_radius: rho,
            regime,
            positively_regular: regular,
            method: SolveMethod::ExtinctionCertain,
        });
    }
    let (mu, iterations, residual) = iterate_fixed_point(&gf, &certain, opts)?;
    Ok(PoEVector {
        mu,
        iterations,
        residual,
        spectral_radius: rho,
        regime,
        positively_regular: regular,
        method: SolveMethod::Iteration,
    })
}

/// Types from which only dying classes are reachable. A class of types
/// (strongly connected block of the mean matrix) dies out unless its
/// Perron root exceeds `1 + band` or it is singular, meaning every member
/// has exactly one child inside the class almost surely.
fn certain_extinction(children: &[ChildrenPmf], m: &MeanMatrix, band: f64) -> Result<Vec<bool>, BranchingError> {
    let n = m.order();
    let (comps, reach) = strong_components(m);
    let mut dies = vec![true; n];
    for comp in &comps {
        let rho = irreducible_radius(&block_of(m, comp))?.value;
        let singular = comp.iter().all(|&t| {
            let one: f64 = children[t]
                .iter()
                .filter(|(o, _)| comp.iter().map(|&c| o[c]).sum::<u32>() == 1)
                .map(|(_, p)| p)
                .sum();
            one >= 1.0 - 1e-12
        });
        let class_dies = rho <= 1.0 + band && !singular;
        comp.iter().for_each(|&t| dies[t] = class_dies);
    }
    Ok((0..n).map(|t| (0..n).all(|u| !reach[t * n + u] || dies[u])).collect())
}

/// Monotone iteration from 0, with the coordinates in `pinned` held at 1.
/// Pinning keeps exactly critical classes from converging at the slow
/// `1 / k` rate.
fn iterate_fixed_point(
    gf: &GeneratingFunctions,
    pinned: &[bool],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize, f64), BranchingError> {
    let n = gf.n_types();
    let mut s: Vec<f64> = pinned.iter().map(|&p| if p { 1.0 } else { 0.0 }).collect();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        gf.eval_into(&s, &mut next);
        residual = 0.0;
        for ((a, b), &p) in next.iter_mut().zip(&s).zip(pinned) {
            debug_assert!(*a >= *b - 1e-14, "fixed-point iteration must be nondecreasing");
            *a = if p { 1.0 } else { a.min(1.0) };
            residual = residual.max((*a - *b).abs());
        }
        std::mem::swap(&mut s, &mut next);
        if residual < opts.tolerance {
            return Ok((s, it, residual));
        }
    }
    Err(BranchingError::BudgetExceeded {
        iterations: opts.max_iterations,
        residual,
        best: s,
    })
}

/// `P(extinct by generation k)` for `k = 0..=generations`, per seed type:
/// the iterates `f^k(0)`.
pub fn extinction_by_generation(
    children: &[ChildrenPmf],
    generations: usize,
) -> Result<Vec<Vec<f64>>, BranchingError> {
    let gf = GeneratingFunctions::new(children)?;
    let mut s = vec![0.0; gf.n_types()];
    let mut out = vec![s.clone()];
    for _ in 0..generations {
        s = gf.eval(&s);
        out.push(s.clone());
    }
    Ok(out)
}

pub fn extinction_probabilities(model: &SystemModel) -> Result<PoEVector, BranchingError> {
    extinction_probabilities_with(model, &SolverOptions::default())
}

pub fn extinction_probabilities_with(
    model: &SystemModel,
    opts: &SolverOptions,
) -> Result<PoEVector, BranchingError> {
    let children = children_distributions(model)?;
    extinction_from_children(&children, opts)
}

/// `1 - mu` for a random first failure in CS `seed_cs`.
pub fn cascade_probability(model: &SystemModel, seed_cs: usize) -> Result<f64, BranchingError> {
    if seed_cs >= model.n_systems() {
        return Err(BranchingError::SeedOutOfRange {
            seed: seed_cs,
            n_systems: model.n_systems(),
        });
    }
    Ok(extinction_probabilities(model)?.cascade_probability(seed_cs))
}
