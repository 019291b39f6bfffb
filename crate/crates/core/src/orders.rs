//! Certification and falsification of stochastic orders between pmfs.
//!
//! Every `compare_*`/`certify_*` function decides whether `X <= Y` in the
//! named order. A failing verdict carries a witness that violates the
//! defining inequality and can be re-checked independently.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::children::ChildrenPmf;
use crate::lp::{self, LpError};
use crate::model::{covariance, marginal, JointPmf, MarginalPmf, ModelError};

/// Slack for exact comparisons of sums of decimal inputs.
pub const ORDER_TOLERANCE: f64 = 1e-12;
/// LP optima above `-LP_TOLERANCE` certify the order.
pub const LP_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_GRID_LIMIT: usize = 400;
pub const DEFAULT_LT_POINTS: [f64; 6] = [0.01, 0.1, 0.5, 1.0, 2.0, 5.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("dimensions differ: {left} vs {right}")]
    DimensionsDiffer { left: usize, right: usize },
    #[error("Laplace grid point has length {found}, expected {expected}")]
    GridPointLength { found: usize, expected: usize },
    #[error("Laplace grid point coordinates must be positive")]
    NonPositiveGridPoint,
    #[error("LP failed: {0}")]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Fsd,
    Icv,
    Concordance,
    Supermodular,
    Idcv,
    LaplaceTransform,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Fsd => "<=st",
            Relation::Icv => "<=icv",
            Relation::Concordance => "<=c",
            Relation::Supermodular => "<=sm",
            Relation::Idcv => "<=idcv",
            Relation::LaplaceTransform => "<=lt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    LpCertified,
    /// Finite test grid: sound for falsification only.
    GridFalsification,
    NecessaryConditions,
}

/// A violated instance of a defining inequality. `lhs` belongs to `X`,
/// `rhs` to `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `F_X(t) < F_Y(t)`.
    Cdf { t: i64, lhs: f64, rhs: f64 },
    /// `sum_{u<=k} F_X(u) < sum_{u<=k} F_Y(u)`.
    IntegratedCdf { k: i64, lhs: f64, rhs: f64 },
    /// Marginal cdfs differ at `t` on `axis`.
    Marginal { axis: usize, t: i64, lhs: f64, rhs: f64 },
    /// Integrated-cdf violation of the marginal on `axis`.
    MarginalIntegratedCdf { axis: usize, k: i64, lhs: f64, rhs: f64 },
    /// `P(X <= t) > P(Y <= t)`.
    LowerOrthant { t: Vec<i64>, lhs: f64, rhs: f64 },
    /// `P(X > t) > P(Y > t)`.
    UpperOrthant { t: Vec<i64>, lhs: f64, rhs: f64 },
    /// Test function from the order's cone with `E xi(X) > E xi(Y)`.
    TestFunction {
        points: Vec<Vec<u32>>,
        values: Vec<f64>,
        lhs: f64,
        rhs: f64,
    },
    /// `E exp(-s.X) < E exp(-s.Y)`.
    Laplace { s: Vec<f64>, lhs: f64, rhs: f64 },
    /// `Cov(X_i, X_j) > Cov(Y_i, Y_j)`.
    Covariance { i: usize, j: usize, lhs: f64, rhs: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails { witness: Witness },
    Inconclusive { notes: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub outcome: Outcome,
    pub method: Method,
}

impl OrderVerdict {
    fn holds(relation: Relation, method: Method) -> Self {
        Self {
            relation,
            outcome: Outcome::Holds,
            method,
        }
    }

    fn fails(relation: Relation, method: Method, witness: Witness) -> Self {
        Self {
            relation,
            outcome: Outcome::Fails { witness },
            method,
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self.outcome, Outcome::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self.outcome, Outcome::Fails { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Fails { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self.outcome {
            Outcome::Holds => "holds",
            Outcome::Fails { .. } => "fails",
            Outcome::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Any finite-support law over nonnegative integer vectors.
pub trait SparseLaw {
    fn dimension(&self) -> usize;
    fn atoms(&self) -> Vec<(Vec<u32>, f64)>;
}

impl SparseLaw for JointPmf {
    fn dimension(&self) -> usize {
        JointPmf::dimension(self)
    }
    fn atoms(&self) -> Vec<(Vec<u32>, f64)> {
        self.entries().to_vec()
    }
}

impl SparseLaw for ChildrenPmf {
    fn dimension(&self) -> usize {
        self.n_types()
    }
    fn atoms(&self) -> Vec<(Vec<u32>, f64)> {
        self.entries().to_vec()
    }
}

impl SparseLaw for MarginalPmf {
    fn dimension(&self) -> usize {
        1
    }
    fn atoms(&self) -> Vec<(Vec<u32>, f64)> {
        self.iter().filter(|(_, m)| *m > 0.0).map(|(d, m)| (vec![d], m)).collect()
    }
}

fn check_dims(x: usize, y: usize) -> Result<(), OrderError> {
    if x != y {
        return Err(OrderError::DimensionsDiffer { left: x, right: y });
    }
    Ok(())
}

/// `X <=st Y` iff `F_X(t) >= F_Y(t)` for all `t`.
pub fn compare_fsd(x: &MarginalPmf, y: &MarginalPmf) -> OrderVerdict {
    let top = x.max_degree().max(y.max_degree()) as i64;
    for t in 0..=top {
        let (fx, fy) = (x.cdf(t), y.cdf(t));
        if fx < fy - ORDER_TOLERANCE {
            return OrderVerdict::fails(Relation::Fsd, Method::Exact, Witness::Cdf { t, lhs: fx, rhs: fy });
        }
    }
    OrderVerdict::holds(Relation::Fsd, Method::Exact)
}

/// `X <=icv Y` (second-order dominance) iff the running sums of `F_X`
/// dominate those of `F_Y`. Beyond the merged support both cdfs equal one,
/// so checking up to the largest support point suffices.
pub fn compare_icv(x: &MarginalPmf, y: &MarginalPmf) -> OrderVerdict {
    let top = x.max_degree().max(y.max_degree()) as i64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 0..=top {
        sx += x.cdf(k);
        sy += y.cdf(k);
        if sx < sy - ORDER_TOLERANCE {
            return OrderVerdict::fails(
                Relation::Icv,
                Method::Exact,
                Witness::IntegratedCdf { k, lhs: sx, rhs: sy },
            );
        }
    }
    OrderVerdict::holds(Relation::Icv, Method::Exact)
}

fn merged_axis_values(x: &JointPmf, y: &JointPmf, axis: usize) -> Vec<u32> {
    let mut v = x.axis_values(axis);
    v.extend(y.axis_values(axis));
    v.sort_unstable();
    v.dedup();
    v
}

/// All points of the product of `axes`.
fn product_grid<T: Copy>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

fn lower_orthant(law: &JointPmf, t: &[i64]) -> f64 {
    law.iter()
        .filter(|(v, _)| v.iter().zip(t).all(|(&a, &b)| (a as i64) <= b))
        .map(|(_, m)| m)
        .sum()
}

fn upper_orthant(law: &JointPmf, t: &[i64]) -> f64 {
    law.iter()
        .filter(|(v, _)| v.iter().zip(t).all(|(&a, &b)| (a as i64) > b))
        .map(|(_, m)| m)
        .sum()
}

fn marginal_mismatch(x: &JointPmf, y: &JointPmf) -> Result<Option<Witness>, OrderError> {
    for axis in 0..x.dimension() {
        let (mx, my) = (marginal(x, axis)?, marginal(y, axis)?);
        let top = mx.max_degree().max(my.max_degree()) as i64;
        for t in 0..=top {
            let (a, b) = (mx.cdf(t), my.cdf(t));
            if (a - b).abs() > ORDER_TOLERANCE {
                return Ok(Some(Witness::Marginal { axis, t, lhs: a, rhs: b }));
            }
        }
    }
    Ok(None)
}

fn orthant_violation(x: &JointPmf, y: &JointPmf) -> Option<Witness> {
    let dim = x.dimension();
    let axes: Vec<Vec<i64>> = (0..dim)
        .map(|a| merged_axis_values(x, y, a).into_iter().map(i64::from).collect())
        .collect();
    for t in product_grid(&axes) {
        let (a, b) = (lower_orthant(x, &t), lower_orthant(y, &t));
        if a > b + ORDER_TOLERANCE {
            return Some(Witness::LowerOrthant { t, lhs: a, rhs: b });
        }
    }
    // the sentinel min-1 leaves a coordinate unconstrained in P(X > t)
    let upper_axes: Vec<Vec<i64>> = axes
        .iter()
        .map(|vals| {
            let mut v = vec![vals[0] - 1];
            v.extend(vals);
            v
        })
        .collect();
    for t in product_grid(&upper_axes) {
        let (a, b) = (upper_orthant(x, &t), upper_orthant(y, &t));
        if a > b + ORDER_TOLERANCE {
            return Some(Witness::UpperOrthant { t, lhs: a, rhs: b });
        }
    }
    None
}

/// `X <=c Y`: equal marginals, `F_X <= F_Y` and `P(X > t) <= P(Y > t)` on
/// the merged support grid.
pub fn compare_concordance(x: &JointPmf, y: &JointPmf) -> Result<OrderVerdict, OrderError> {
    check_dims(x.dimension(), y.dimension())?;
    if let Some(w) = marginal_mismatch(x, y)? {
        return Ok(OrderVerdict::fails(Relation::Concordance, Method::Exact, w));
    }
    Ok(match orthant_violation(x, y) {
        Some(w) => OrderVerdict::fails(Relation::Concordance, Method::Exact, w),
        None => OrderVerdict::holds(Relation::Concordance, Method::Exact),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    /// Largest grid solved by LP; larger instances fall back to necessary
    /// conditions.
    pub grid_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            grid_limit: DEFAULT_GRID_LIMIT,
        }
    }
}

/// Grid with per-axis sorted values and row-major indexing.
#[derive(Debug, Clone)]
struct Grid {
    axes: Vec<Vec<u32>>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    fn new(axes: Vec<Vec<u32>>) -> Self {
        let mut strides = vec![1; axes.len()];
        for a in (0..axes.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].len();
        }
        let len = axes.iter().map(Vec::len).product();
        Self { axes, strides, len }
    }

    fn size_of(axes: &[Vec<u32>]) -> usize {
        axes.iter().map(Vec::len).fold(1usize, |acc, l| acc.saturating_mul(l))
    }

    fn index_of(&self, v: &[u32]) -> usize {
        v.iter()
            .enumerate()
            .map(|(a, val)| self.axes[a].binary_search(val).expect("value on grid") * self.strides[a])
            .sum()
    }

    fn coords(&self, mut idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let c = idx / s;
                idx %= s;
                c
            })
            .collect()
    }

    fn point(&self, idx: usize) -> Vec<u32> {
        self.coords(idx)
            .iter()
            .enumerate()
            .map(|(a, &c)| self.axes[a][c])
            .collect()
    }

    fn masses(&self, law: &JointPmf) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for (v, m) in law.iter() {
            out[self.index_of(v)] += m;
        }
        out
    }

    /// Elementary cells `(v, v+e_i, v+e_j, v+e_i+e_j)` for all `i < j`.
    fn cells(&self) -> Vec<[usize; 4]> {
        let dim = self.axes.len();
        let mut out = Vec::new();
        for idx in 0..self.len {
            let c = self.coords(idx);
            for i in 0..dim {
                for j in i + 1..dim {
                    if c[i] + 1 < self.axes[i].len() && c[j] + 1 < self.axes[j].len() {
                        let (si, sj) = (self.strides[i], self.strides[j]);
                        out.push([idx, idx + si, idx + sj, idx + si + sj]);
                    }
                }
            }
        }
        out
    }
}

/// Rows `a.u <= 0` for a grid-function cone, in the `u = xi + 1` variables.
/// Each row expresses `(constraint expression) >= 0` negated.
type ConeRow = Vec<(usize, f64)>;

fn supermodular_rows(grid: &Grid) -> Vec<ConeRow> {
    grid.cells()
        .into_iter()
        .map(|[v, vi, vj, vij]| vec![(v, -1.0), (vij, -1.0), (vi, 1.0), (vj, 1.0)])
        .collect()
}

fn idcv_rows(grid: &Grid) -> Vec<ConeRow> {
    let dim = grid.axes.len();
    let mut rows = Vec::new();
    for idx in 0..grid.len {
        let c = grid.coords(idx);
        for (a, &ca) in c.iter().enumerate().take(dim) {
            let s = grid.strides[a];
            if ca + 1 < grid.axes[a].len() {
                // increasing: xi(v+e_a) - xi(v) >= 0
                rows.push(vec![(idx + s, -1.0), (idx, 1.0)]);
            }
            if ca + 2 < grid.axes[a].len() {
                // concave along a: 2 xi(v+e_a) - xi(v) - xi(v+2e_a) >= 0
                rows.push(vec![(idx + s, -2.0), (idx, 1.0), (idx + 2 * s, 1.0)]);
            }
        }
    }
    // submodular: xi(v+e_i) + xi(v+e_j) - xi(v) - xi(v+e_i+e_j) >= 0
    rows.extend(
        grid.cells()
            .into_iter()
            .map(|[v, vi, vj, vij]| vec![(vi, -1.0), (vj, -1.0), (v, 1.0), (vij, 1.0)]),
    );
    rows
}

/// Minimizes `sum_g (p_Y(g) - p_X(g)) xi(g)` over the cone with
/// `xi in [-1, 1]`. Returns the minimum and the minimizer `xi`.
fn cone_lp(grid: &Grid, px: &[f64], py: &[f64], rows: &[ConeRow]) -> Result<(f64, Vec<f64>), LpError> {
    let n = grid.len;
    // max (p_X - p_Y).u subject to cone rows and u <= 2
    let c: Vec<f64> = px.iter().zip(py).map(|(a, b)| a - b).collect();
    let mut a = Vec::with_capacity(rows.len() + n);
    let mut b = Vec::with_capacity(rows.len() + n);
    for row in rows {
        let mut dense = vec![0.0; n];
        for &(j, v) in row {
            dense[j] += v;
        }
        a.push(dense);
        b.push(0.0);
    }
    for j in 0..n {
        let mut dense = vec![0.0; n];
        dense[j] = 1.0;
        a.push(dense);
        b.push(2.0);
    }
    let sol = lp::maximize(&c, &a, &b)?;
    // sum(c) = 0, so the constant from u = xi + 1 cancels
    let xi: Vec<f64> = sol.x.iter().map(|u| u - 1.0).collect();
    let min = -sol.objective;
    Ok((min, xi))
}

fn expectation(values: &[f64], masses: &[f64]) -> f64 {
    values.iter().zip(masses).map(|(v, m)| v * m).sum()
}

fn lp_verdict(
    relation: Relation,
    grid: &Grid,
    x: &JointPmf,
    y: &JointPmf,
    rows: &[ConeRow],
) -> Result<OrderVerdict, OrderError> {
    let (px, py) = (grid.masses(x), grid.masses(y));
    let (min, xi) = cone_lp(grid, &px, &py, rows)?;
    if min >= -LP_TOLERANCE {
        return Ok(OrderVerdict::holds(relation, Method::LpCertified));
    }
    let points = (0..grid.len).map(|i| grid.point(i)).collect();
    let (lhs, rhs) = (expectation(&xi, &px), expectation(&xi, &py));
    Ok(OrderVerdict::fails(
        relation,
        Method::LpCertified,
        Witness::TestFunction {
            points,
            values: xi,
            lhs,
            rhs,
        },
    ))
}

fn covariance_violation(x: &JointPmf, y: &JointPmf) -> Result<Option<Witness>, OrderError> {
    for i in 0..x.dimension() {
        for j in i + 1..x.dimension() {
            let (a, b) = (covariance(x, i, j)?, covariance(y, i, j)?);
            if a > b + ORDER_TOLERANCE {
                return Ok(Some(Witness::Covariance { i, j, lhs: a, rhs: b }));
            }
        }
    }
    Ok(None)
}

pub fn certify_supermodular(x: &JointPmf, y: &JointPmf) -> Result<OrderVerdict, OrderError> {
    certify_supermodular_with(x, y, &LpOptions::default())
}

/// `X <=sm Y`. In dimension at most two this is concordance (exact); above
/// that, an LP over supermodular functions on the merged product grid.
pub fn certify_supermodular_with(
    x: &JointPmf,
    y: &JointPmf,
    opts: &LpOptions,
) -> Result<OrderVerdict, OrderError> {
    check_dims(x.dimension(), y.dimension())?;
    if x.dimension() <= 2 {
        let mut v = compare_concordance(x, y)?;
        v.relation = Relation::Supermodular;
        return Ok(v);
    }
    let axes: Vec<Vec<u32>> = (0..x.dimension()).map(|a| merged_axis_values(x, y, a)).collect();
    let size = Grid::size_of(&axes);
    if size > opts.grid_limit {
        let necessary = Method::NecessaryConditions;
        if let Some(w) = marginal_mismatch(x, y)? {
            return Ok(OrderVerdict::fails(Relation::Supermodular, necessary, w));
        }
        if let Some(w) = orthant_violation(x, y) {
            return Ok(OrderVerdict::fails(Relation::Supermodular, necessary, w));
        }
        if let Some(w) = covariance_violation(x, y)? {
            return Ok(OrderVerdict::fails(Relation::Supermodular, necessary, w));
        }
        return Ok(OrderVerdict {
            relation: Relation::Supermodular,
            outcome: Outcome::Inconclusive {
                notes: vec![format!(
                    "grid of {size} points exceeds the LP limit {}; marginals, orthants and covariances are consistent",
                    opts.grid_limit
                )],
            },
            method: necessary,
        });
    }
    let grid = Grid::new(axes);
    lp_verdict(Relation::Supermodular, &grid, x, y, &supermodular_rows(&grid))
}

pub fn certify_idcv(x: &JointPmf, y: &JointPmf) -> Result<OrderVerdict, OrderError> {
    certify_idcv_with(x, y, &LpOptions::default())
}

/// `X <=idcv Y`: `E xi(X) <= E xi(Y)` for increasing, componentwise concave,
/// submodular `xi`. Concavity is imposed along the integers, so the grid is
/// the full integer box spanned by both supports.
pub fn certify_idcv_with(x: &JointPmf, y: &JointPmf, opts: &LpOptions) -> Result<OrderVerdict, OrderError> {
    check_dims(x.dimension(), y.dimension())?;
    let axes: Vec<Vec<u32>> = (0..x.dimension())
        .map(|a| {
            let v = merged_axis_values(x, y, a);
            (v[0]..=*v.last().expect("nonempty support")).collect()
        })
        .collect();
    let size = Grid::size_of(&axes);
    if size > opts.grid_limit {
        let necessary = Method::NecessaryConditions;
        for axis in 0..x.dimension() {
            let v = compare_icv(&marginal(x, axis)?, &marginal(y, axis)?);
            // t -> -(k + 1 - t_axis)^+ lies in the cone, so a marginal icv
            // violation is an idcv violation
            if let Some(Witness::IntegratedCdf { k, lhs, rhs }) = v.witness().cloned() {
                return Ok(OrderVerdict::fails(
                    Relation::Idcv,
                    necessary,
                    Witness::MarginalIntegratedCdf { axis, k, lhs, rhs },
                ));
            }
        }
        let lt = compare_lt(x, y, None)?;
        if let Some(w) = lt.witness().cloned() {
            return Ok(OrderVerdict::fails(Relation::Idcv, necessary, w));
        }
        return Ok(OrderVerdict {
            relation: Relation::Idcv,
            outcome: Outcome::Inconclusive {
                notes: vec![format!(
                    "grid of {size} points exceeds the LP limit {}; marginal icv and Laplace checks are consistent",
                    opts.grid_limit
                )],
            },
            method: necessary,
        });
    }
    let grid = Grid::new(axes);
    lp_verdict(Relation::Idcv, &grid, x, y, &idcv_rows(&grid))
}

/// Tensor grid of the default Laplace points in `dim` dimensions.
pub fn default_lt_grid(dim: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..dim).map(|_| DEFAULT_LT_POINTS.to_vec()).collect();
    product_grid(&axes)
}

pub fn laplace_transform<L: SparseLaw + ?Sized>(law: &L, s: &[f64]) -> f64 {
    laplace_of_atoms(&law.atoms(), s)
}

fn laplace_of_atoms(atoms: &[(Vec<u32>, f64)], s: &[f64]) -> f64 {
    atoms
        .iter()
        .map(|(v, m)| {
            let dot: f64 = v.iter().zip(s).map(|(&k, &sj)| k as f64 * sj).sum();
            m * (-dot).exp()
        })
        .sum()
}

/// `X <=lt Y` iff `E exp(-s.X) >= E exp(-s.Y)` for all `s > 0`, checked on
/// a finite grid (default tensor grid when `None`).
pub fn compare_lt<X, Y>(x: &X, y: &Y, grid: Option<&[Vec<f64>]>) -> Result<OrderVerdict, OrderError>
where
    X: SparseLaw + ?Sized,
    Y: SparseLaw + ?Sized,
{
    let dim = x.dimension();
    check_dims(dim, y.dimension())?;
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = default_lt_grid(dim);
            &owned
        }
    };
    let (ax, ay) = (x.atoms(), y.atoms());
    for s in grid {
        if s.len() != dim {
            return Err(OrderError::GridPointLength {
                found: s.len(),
                expected: dim,
            });
        }
        if s.iter().any(|&v| v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
            return Err(OrderError::NonPositiveGridPoint);
        }
        let (a, b) = (laplace_of_atoms(&ax, s), laplace_of_atoms(&ay, s));
        if a < b - ORDER_TOLERANCE {
            return Ok(OrderVerdict::fails(
                Relation::LaplaceTransform,
                Method::GridFalsification,
                Witness::Laplace { s: s.clone(), lhs: a, rhs: b },
            ));
        }
    }
    Ok(OrderVerdict::holds(Relation::LaplaceTransform, Method::GridFalsification))
}

/// Whether `values` over the product grid `points` (row-major, as carried by
/// a test-function witness) satisfy the supermodular cell inequalities.
pub fn grid_function_is_supermodular(points: &[Vec<u32>], values: &[f64], tol: f64) -> bool {
    let Some(grid) = grid_from_points(points) else {
        return false;
    };
    supermodular_rows(&grid).iter().all(|row| cone_row_ok(row, values, tol))
}

/// Same for the increasing / componentwise concave / submodular cone. The
/// points must form an integer box.
pub fn grid_function_is_idcv(points: &[Vec<u32>], values: &[f64], tol: f64) -> bool {
    let Some(grid) = grid_from_points(points) else {
        return false;
    };
    idcv_rows(&grid).iter().all(|row| cone_row_ok(row, values, tol))
}

fn cone_row_ok(row: &ConeRow, values: &[f64], tol: f64) -> bool {
    row.iter().map(|&(j, c)| c * values[j]).sum::<f64>() <= tol
}

fn grid_from_points(points: &[Vec<u32>]) -> Option<Grid> {
    let dim = points.first()?.len();
    let axes: Vec<Vec<u32>> = (0..dim)
        .map(|a| {
            let mut v: Vec<u32> = points.iter().map(|p| p[a]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let grid = Grid::new(axes);
    let consistent = grid.len == points.len() && points.iter().enumerate().all(|(i, p)| grid.point(i) == *p);
    consistent.then_some(grid)
}
