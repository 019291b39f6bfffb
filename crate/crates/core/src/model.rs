//! System model: joint degree distributions, inter-system infection
//! probabilities and internal vulnerability profiles, plus the summary
//! statistics used to compare models (marginals, means, entropy, KL
//! divergence, independence, correlation).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on total probability mass when validating a pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Tolerance used when comparing two probabilities for equality.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("pmf dimension must be positive")]
    ZeroDimension,
    #[error("support vector #{index} has length {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("mass {mass} of support vector #{index} is negative or not finite")]
    InvalidMass { index: usize, mass: f64 },
    #[error("masses sum to {sum}, expected 1")]
    MassSum { sum: f64 },
    #[error("pmf has empty support")]
    EmptySupport,
    #[error("axis {axis} out of range for dimension {dimension}")]
    AxisOutOfRange { axis: usize, dimension: usize },
    #[error("pmf dimensions differ ({left} vs {right})")]
    DimensionsDiffer { left: usize, right: usize },
    #[error("reference pmf has no mass at {support:?} where the other pmf has mass {mass}")]
    NotAbsolutelyContinuous { support: Vec<u32>, mass: f64 },
    #[error("coordinate {axis} has zero variance")]
    ZeroVariance { axis: usize },
    #[error("vulnerability table has no entry for degree {degree}")]
    VulnerabilityTableTooShort { degree: u32 },
    #[error("system index {index} out of range for {n_systems} systems")]
    SystemOutOfRange { index: usize, n_systems: usize },
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
}

/// Finite-support pmf over nonnegative integer vectors of a fixed dimension.
///
/// Entries are kept sorted and unique; zero-mass entries are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    dimension: usize,
    entries: Vec<(Vec<u32>, f64)>,
}

/// Structural and normalization problems of a raw list of pmf entries.
/// `path` prefixes every reported violation.
pub fn pmf_violations(dimension: usize, entries: &[(Vec<u32>, f64)], path: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    if dimension == 0 {
        out.push(Violation::new(
            ViolationKind::Dimension,
            path,
            "pmf dimension must be positive",
        ));
        return out;
    }
    if entries.is_empty() {
        out.push(Violation::new(ViolationKind::MassSum, path, "pmf has empty support"));
        return out;
    }
    let mut sum = 0.0;
    for (k, (v, m)) in entries.iter().enumerate() {
        if v.len() != dimension {
            out.push(Violation::new(
                ViolationKind::Dimension,
                &format!("{path}[{k}]"),
                &format!("degree vector has length {}, expected {dimension}", v.len()),
            ));
        }
        if !m.is_finite() || *m < 0.0 {
            out.push(Violation::new(
                ViolationKind::NegativeMass,
                &format!("{path}[{k}]"),
                &format!("mass {m} is negative or not finite"),
            ));
        } else {
            sum += m;
        }
    }
    if (sum - 1.0).abs() > MASS_TOLERANCE {
        out.push(Violation::new(
            ViolationKind::MassSum,
            path,
            &format!("masses sum to {sum}, expected 1"),
        ));
    }
    out
}

impl JointPmf {
    /// Builds a pmf, merging duplicate support vectors.
    pub fn new<I>(dimension: usize, entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        if dimension == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut sum = 0.0;
        for (index, (v, m)) in entries.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(ModelError::DimensionMismatch {
                    index,
                    found: v.len(),
                    expected: dimension,
                });
            }
            if !m.is_finite() || m < 0.0 {
                return Err(ModelError::InvalidMass { index, mass: m });
            }
            sum += m;
            *merged.entry(v).or_insert(0.0) += m;
        }
        if merged.is_empty() {
            return Err(ModelError::EmptySupport);
        }
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(ModelError::MassSum { sum });
        }
        let entries = merged.into_iter().filter(|(_, m)| *m > 0.0).collect();
        Ok(Self { dimension, entries })
    }

    pub fn point_mass(vector: Vec<u32>) -> Self {
        assert!(!vector.is_empty(), "point mass needs a positive dimension");
        Self {
            dimension: vector.len(),
            entries: vec![(vector, 1.0)],
        }
    }

    /// Product-form (independent coordinates) joint pmf.
    pub fn product(marginals: &[MarginalPmf]) -> Self {
        assert!(!marginals.is_empty(), "product needs at least one marginal");
        let mut entries: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 1.0)];
        for m in marginals {
            let mut next = Vec::with_capacity(entries.len() * m.support_len());
            for (v, p) in &entries {
                for (d, q) in m.iter() {
                    let mut w = v.clone();
                    w.push(d);
                    next.push((w, p * q));
                }
            }
            entries = next;
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            dimension: marginals.len(),
            entries,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(Vec<u32>, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.entries.iter().map(|(v, m)| (v.as_slice(), *m))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn mass(&self, vector: &[u32]) -> f64 {
        self.entries
            .binary_search_by(|(v, _)| v.as_slice().cmp(vector))
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn max_degree(&self, axis: usize) -> u32 {
        self.entries.iter().map(|(v, _)| v[axis]).max().unwrap_or(0)
    }

    /// Distinct values taken by coordinate `axis`, ascending.
    pub fn axis_values(&self, axis: usize) -> Vec<u32> {
        let mut vals: Vec<u32> = self.entries.iter().map(|(v, _)| v[axis]).collect();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    /// Same pmf with coordinates permuted: new coordinate `k` is old
    /// coordinate `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.dimension);
        let mut entries: Vec<(Vec<u32>, f64)> = self
            .entries
            .iter()
            .map(|(v, m)| (order.iter().map(|&k| v[k]).collect(), *m))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            dimension: self.dimension,
            entries,
        }
    }
}

/// Finite-support pmf over nonnegative integers, stored densely from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalPmf {
    mass: Vec<f64>,
}

impl MarginalPmf {
    /// `mass[d]` is the probability of `d`.
    pub fn new(mass: Vec<f64>) -> Result<Self, ModelError> {
        let mut sum = 0.0;
        for (index, &m) in mass.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(ModelError::InvalidMass { index, mass: m });
            }
            sum += m;
        }
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(ModelError::MassSum { sum });
        }
        Ok(Self::trimmed(mass))
    }

    pub fn point(d: u32) -> Self {
        let mut mass = vec![0.0; d as usize + 1];
        mass[d as usize] = 1.0;
        Self { mass }
    }

    /// Truncates a pmf on the nonnegative integers at `max_degree` and
    /// renormalizes. Returns the pmf and the discarded tail mass; a warning
    /// is logged when the tail is not negligible.
    pub fn truncated<F>(pmf: F, max_degree: u32) -> Result<(Self, f64), ModelError>
    where
        F: Fn(u32) -> f64,
    {
        let raw: Vec<f64> = (0..=max_degree).map(&pmf).collect();
        let kept: f64 = raw.iter().sum();
        if !kept.is_finite() || kept <= 0.0 {
            return Err(ModelError::MassSum { sum: kept });
        }
        let tail = (1.0 - kept).max(0.0);
        if tail > MASS_TOLERANCE {
            log::warn!("truncation at degree {max_degree} discards tail mass {tail:.3e}; renormalizing");
        }
        Self::new(raw.into_iter().map(|m| m / kept).collect()).map(|m| (m, tail))
    }

    fn trimmed(mut mass: Vec<f64>) -> Self {
        while mass.len() > 1 && mass.last() == Some(&0.0) {
            mass.pop();
        }
        if mass.is_empty() {
            mass.push(1.0);
        }
        Self { mass }
    }

    pub fn mass(&self, d: u32) -> f64 {
        self.mass.get(d as usize).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Support points with positive mass.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(d, m)| (d as u32, *m))
    }

    pub fn support_len(&self) -> usize {
        self.iter().count()
    }

    pub fn max_degree(&self) -> u32 {
        (self.mass.len() - 1) as u32
    }

    pub fn min_degree(&self) -> u32 {
        self.iter().next().map(|(d, _)| d).unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(d, m)| d as f64 * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.iter().map(|(d, m)| (d as f64 - mean).powi(2) * m).sum()
    }

    /// `P(X <= t)`.
    pub fn cdf(&self, t: i64) -> f64 {
        if t < 0 {
            return 0.0;
        }
        let end = (t as usize + 1).min(self.mass.len());
        self.mass[..end].iter().sum::<f64>().min(1.0)
    }
}

pub fn marginal(joint: &JointPmf, axis: usize) -> Result<MarginalPmf, ModelError> {
    if axis >= joint.dimension {
        return Err(ModelError::AxisOutOfRange {
            axis,
            dimension: joint.dimension,
        });
    }
    let max = joint.max_degree(axis) as usize;
    let mut mass = vec![0.0; max + 1];
    for (v, m) in joint.iter() {
        mass[v[axis] as usize] += m;
    }
    Ok(MarginalPmf::trimmed(mass))
}

pub fn mean_vector(joint: &JointPmf) -> Vec<f64> {
    let mut mean = vec![0.0; joint.dimension];
    for (v, m) in joint.iter() {
        for (acc, &d) in mean.iter_mut().zip(v) {
            *acc += d as f64 * m;
        }
    }
    mean
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy_bits(m: &MarginalPmf) -> f64 {
    m.iter().map(|(_, p)| -p * p.log2()).sum::<f64>().max(0.0)
}

/// `sum p ln(p / q)` in nats. Fails when `q` vanishes where `p` does not.
pub fn kl_divergence(p: &JointPmf, q: &JointPmf) -> Result<f64, ModelError> {
    if p.dimension != q.dimension {
        return Err(ModelError::DimensionsDiffer {
            left: p.dimension,
            right: q.dimension,
        });
    }
    let mut total = 0.0;
    for (v, pm) in p.iter() {
        let qm = q.mass(v);
        if qm <= 0.0 {
            return Err(ModelError::NotAbsolutelyContinuous {
                support: v.to_vec(),
                mass: pm,
            });
        }
        total += pm * (pm / qm).ln();
    }
    Ok(total.max(0.0))
}

/// Largest absolute deviation between the joint pmf and the product of its
/// marginals, over the product of the marginal supports.
pub fn independence_gap(joint: &JointPmf) -> f64 {
    let marginals: Vec<MarginalPmf> = (0..joint.dimension)
        .map(|k| marginal(joint, k).expect("axis in range"))
        .collect();
    let product = JointPmf::product(&marginals);
    let mut gap: f64 = 0.0;
    for (v, m) in product.iter() {
        gap = gap.max((joint.mass(v) - m).abs());
    }
    // cells of the joint outside the product grid cannot exist, since the
    // product grid contains every support vector
    gap
}

pub fn is_independent(joint: &JointPmf, tol: f64) -> bool {
    independence_gap(joint) <= tol
}

pub fn covariance(joint: &JointPmf, i: usize, j: usize) -> Result<f64, ModelError> {
    for axis in [i, j] {
        if axis >= joint.dimension {
            return Err(ModelError::AxisOutOfRange {
                axis,
                dimension: joint.dimension,
            });
        }
    }
    let mean = mean_vector(joint);
    Ok(joint
        .iter()
        .map(|(v, m)| m * (v[i] as f64 - mean[i]) * (v[j] as f64 - mean[j]))
        .sum())
}

/// Pearson correlation coefficient between coordinates `i` and `j`.
pub fn correlation(joint: &JointPmf, i: usize, j: usize) -> Result<f64, ModelError> {
    let cov = covariance(joint, i, j)?;
    let vi = covariance(joint, i, i)?;
    let vj = covariance(joint, j, j)?;
    for (axis, var) in [(i, vi), (j, vj)] {
        if var <= 0.0 {
            return Err(ModelError::ZeroVariance { axis });
        }
    }
    Ok(cov / (vi * vj).sqrt())
}

/// Probability that an agent is vulnerable to the failure of one internal
/// neighbor, as a function of its internal degree.
///
/// Degree 0 is evaluated as degree 1: an isolated agent is never anyone's
/// internal neighbor, so its value never enters a computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VulnerabilityProfile {
    /// `phi(d) = scale * d^(-exponent)`, clamped to `[0, 1]`.
    PowerLaw { scale: f64, exponent: f64 },
    /// `values[d - 1] = phi(d)` for `d = 1, 2, ...`.
    Table { values: Vec<f64> },
}

impl VulnerabilityProfile {
    /// `phi == 1`: every internal neighbor is vulnerable.
    pub fn always() -> Self {
        Self::PowerLaw {
            scale: 1.0,
            exponent: 0.0,
        }
    }

    pub fn phi(&self, degree: u32) -> Result<f64, ModelError> {
        let d = degree.max(1);
        match self {
            Self::PowerLaw { scale, exponent } => {
                Ok((scale * (d as f64).powf(-exponent)).clamp(0.0, 1.0))
            }
            Self::Table { values } => values
                .get(d as usize - 1)
                .map(|v| v.clamp(0.0, 1.0))
                .ok_or(ModelError::VulnerabilityTableTooShort { degree: d }),
        }
    }

    /// Largest degree the profile can be evaluated at, if bounded.
    pub fn max_covered_degree(&self) -> Option<u32> {
        match self {
            Self::PowerLaw { .. } => None,
            Self::Table { values } => Some(values.len() as u32),
        }
    }
}

/// How degree distributions are turned into children distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Internal neighbors are thinned by the vulnerability-derived
    /// probability, external neighbors by the infection matrix.
    #[default]
    Degree,
    /// The degree distributions are read directly as children
    /// distributions: all internal neighbors are infected; external ones are
    /// still thinned by the infection matrix.
    Children,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    MassSum,
    NegativeMass,
    Dimension,
    InfectionRange,
    DegreeFloor,
    VulnerabilityRange,
    VulnerabilityCoverage,
    MissingField,
    Shape,
    SystemCount,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        match self {
            Self::MassSum => "mass-sum",
            Self::NegativeMass => "negative-mass",
            Self::Dimension => "dimension",
            Self::InfectionRange => "infection-range",
            Self::DegreeFloor => "degree-floor",
            Self::VulnerabilityRange => "vulnerability-range",
            Self::VulnerabilityCoverage => "vulnerability-coverage",
            Self::MissingField => "missing-field",
            Self::Shape => "shape",
            Self::SystemCount => "system-count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Location in the model, e.g. `infection[0][1]`.
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, path: &str, message: &str) -> Self {
        Self {
            kind,
            path: path.to_owned(),
            message: message.to_owned(),
        }
    }
}

/// All problems found in a model; empty means valid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} at {}: {}", v.kind.code(), v.path, v.message)?;
        }
        Ok(())
    }
}

/// Interdependent system of `n_systems` constituent systems (CSes).
///
/// `degree_dists[i]` is the law of the degree vector of a CS-`i` agent; its
/// coordinate `i` is the internal degree. `infection[i][j]` (`i != j`) is the
/// probability that a failed CS-`i` agent takes down a CS-`j` dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    degree_dists: Vec<JointPmf>,
    infection: Vec<Vec<f64>>,
    vulnerability: Vec<VulnerabilityProfile>,
    internal_degree_floor: bool,
    mode: Mode,
}

impl SystemModel {
    pub fn new(
        degree_dists: Vec<JointPmf>,
        infection: Vec<Vec<f64>>,
        vulnerability: Vec<VulnerabilityProfile>,
        internal_degree_floor: bool,
        mode: Mode,
    ) -> Result<Self, ValidationReport> {
        let model = Self {
            degree_dists,
            infection,
            vulnerability,
            internal_degree_floor,
            mode,
        };
        let report = model.validate();
        if report.is_valid() {
            Ok(model)
        } else {
            Err(report)
        }
    }

    /// Checks every model assumption and lists all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.degree_dists.len();
        if n < 2 {
            report.push(Violation::new(
                ViolationKind::SystemCount,
                "degree_dists",
                &format!("need at least 2 systems, found {n}"),
            ));
        }
        for (i, p) in self.degree_dists.iter().enumerate() {
            if p.dimension() != n {
                report.push(Violation::new(
                    ViolationKind::Dimension,
                    &format!("degree_dists[{i}]"),
                    &format!("dimension {} does not match {n} systems", p.dimension()),
                ));
            }
        }
        report.violations.extend(infection_violations(&self.infection, n));
        if self.vulnerability.len() != n {
            report.push(Violation::new(
                ViolationKind::Shape,
                "vulnerability",
                &format!("expected {n} profiles, found {}", self.vulnerability.len()),
            ));
        }
        for (i, phi) in self.vulnerability.iter().enumerate() {
            report.violations.extend(vulnerability_violations(phi, &format!("vulnerability[{i}]")));
        }
        if !report.is_valid() {
            return report;
        }
        for i in 0..n {
            let internal = &self.degree_dists[i];
            if self.internal_degree_floor && internal.iter().any(|(v, _)| v[i] == 0) {
                report.push(Violation::new(
                    ViolationKind::DegreeFloor,
                    &format!("degree_dists[{i}]"),
                    "internal degree 0 has positive mass but the degree floor is enforced",
                ));
            }
            if self.mode == Mode::Degree {
                if let Some(cover) = self.vulnerability[i].max_covered_degree() {
                    let need = internal.max_degree(i);
                    if need > cover {
                        report.push(Violation::new(
                            ViolationKind::VulnerabilityCoverage,
                            &format!("vulnerability[{i}]"),
                            &format!("table covers degrees up to {cover}, model uses {need}"),
                        ));
                    }
                }
            }
        }
        report
    }

    pub fn n_systems(&self) -> usize {
        self.degree_dists.len()
    }

    pub fn n_types(&self) -> usize {
        2 * self.n_systems()
    }

    pub fn degree_dist(&self, i: usize) -> &JointPmf {
        &self.degree_dists[i]
    }

    pub fn degree_dists(&self) -> &[JointPmf] {
        &self.degree_dists
    }

    pub fn infection(&self, from: usize, to: usize) -> f64 {
        self.infection[from][to]
    }

    pub fn infection_matrix(&self) -> &[Vec<f64>] {
        &self.infection
    }

    pub fn vulnerability(&self, i: usize) -> &VulnerabilityProfile {
        &self.vulnerability[i]
    }

    pub fn vulnerabilities(&self) -> &[VulnerabilityProfile] {
        &self.vulnerability
    }

    pub fn internal_degree_floor(&self) -> bool {
        self.internal_degree_floor
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn internal_marginal(&self, i: usize) -> MarginalPmf {
        marginal(&self.degree_dists[i], i).expect("validated dimension")
    }

    /// Copy with CS `i`'s degree distribution replaced.
    pub fn with_degree_dist(&self, i: usize, pmf: JointPmf) -> Result<Self, ValidationReport> {
        let mut dists = self.degree_dists.clone();
        dists[i] = pmf;
        Self::new(
            dists,
            self.infection.clone(),
            self.vulnerability.clone(),
            self.internal_degree_floor,
            self.mode,
        )
    }

    /// Copy with every off-diagonal infection probability mapped by `f`.
    pub fn with_infection<F: Fn(usize, usize, f64) -> f64>(
        &self,
        f: F,
    ) -> Result<Self, ValidationReport> {
        let infection = self
            .infection
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &q)| if i == j { q } else { f(i, j, q) })
                    .collect()
            })
            .collect();
        Self::new(
            self.degree_dists.clone(),
            infection,
            self.vulnerability.clone(),
            self.internal_degree_floor,
            self.mode,
        )
    }

    pub fn with_vulnerability(
        &self,
        vulnerability: Vec<VulnerabilityProfile>,
    ) -> Result<Self, ValidationReport> {
        Self::new(
            self.degree_dists.clone(),
            self.infection.clone(),
            vulnerability,
            self.internal_degree_floor,
            self.mode,
        )
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self, ValidationReport> {
        Self::new(
            self.degree_dists.clone(),
            self.infection.clone(),
            self.vulnerability.clone(),
            self.internal_degree_floor,
            mode,
        )
    }
}

pub(crate) fn infection_violations(q: &[Vec<f64>], n: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    if q.len() != n {
        out.push(Violation::new(
            ViolationKind::Shape,
            "infection",
            &format!("expected {n} rows, found {}", q.len()),
        ));
    }
    for (i, row) in q.iter().enumerate() {
        if row.len() != n {
            out.push(Violation::new(
                ViolationKind::Shape,
                &format!("infection[{i}]"),
                &format!("expected {n} entries, found {}", row.len()),
            ));
        }
        for (j, &v) in row.iter().enumerate() {
            if i != j && !(v > 0.0 && v <= 1.0) {
                out.push(Violation::new(
                    ViolationKind::InfectionRange,
                    &format!("infection[{i}][{j}]"),
                    &format!("infection probability {v} outside (0, 1]"),
                ));
            }
        }
    }
    out
}

pub(crate) fn vulnerability_violations(phi: &VulnerabilityProfile, path: &str) -> Vec<Violation> {
    let mut out = Vec::new();
    match phi {
        VulnerabilityProfile::PowerLaw { scale, exponent } => {
            if !scale.is_finite() || *scale < 0.0 || !exponent.is_finite() {
                out.push(Violation::new(
                    ViolationKind::VulnerabilityRange,
                    path,
                    &format!("power law needs finite scale >= 0 and finite exponent, got ({scale}, {exponent})"),
                ));
            }
        }
        VulnerabilityProfile::Table { values } => {
            if values.is_empty() {
                out.push(Violation::new(
                    ViolationKind::VulnerabilityCoverage,
                    path,
                    "vulnerability table is empty",
                ));
            }
            for (k, v) in values.iter().enumerate() {
                if !(0.0..=1.0).contains(v) {
                    out.push(Violation::new(
                        ViolationKind::VulnerabilityRange,
                        &format!("{path}.values[{k}]"),
                        &format!("phi({}) = {v} outside [0, 1]", k + 1),
                    ));
                }
            }
        }
    }
    out
}
