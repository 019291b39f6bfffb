//! Children distributions of the multi-type branching approximation.
//!
//! Types are 0-based: type `i < N` is a failed CS-`i` agent none of whose
//! internal neighbors has failed, type `i + N` is a CS-`i` agent infected by
//! an internal neighbor. A children vector has one count per type.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{marginal, MarginalPmf, Mode, ModelError, SystemModel, VulnerabilityProfile};

/// Tolerance on the total mass of a children pmf.
pub const CHILDREN_MASS_TOLERANCE: f64 = 1e-10;
/// Hard limit on the support size of an exactly convolved children pmf.
pub const MAX_SUPPORT: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChildrenError {
    #[error("origin type {origin} out of range for {n_types} types")]
    OriginOutOfRange { origin: usize, n_types: usize },
    #[error("children vector #{index} has length {found}, expected {expected}")]
    Length {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("children vector {vector:?} has children of type {ty}, which type {origin} cannot produce")]
    ZeroPattern {
        vector: Vec<u32>,
        ty: usize,
        origin: usize,
    },
    #[error("mass {mass} of children vector #{index} is negative or not finite")]
    InvalidMass { index: usize, mass: f64 },
    #[error("children masses sum to {sum}, expected 1")]
    MassSum { sum: f64 },
    #[error("internal degree distribution has zero mean")]
    ZeroMeanDegree,
    #[error("children pmf would exceed {limit} support points")]
    SupportTooLarge { limit: usize },
    #[error("incoming-degree law must be supported on d >= 1 (mass {mass} at 0)")]
    IncomingDegreeZero { mass: f64 },
    #[error("eta({degree}) = {value} outside [0, 1]")]
    EtaRange { degree: u32, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Types a type-`origin` agent can produce: other systems' fresh types, and
/// its own system's infected type.
pub fn producible_types(n_systems: usize, origin: usize) -> Vec<usize> {
    let cs = origin % n_systems;
    (0..n_systems)
        .filter(|&j| j != cs)
        .chain(std::iter::once(cs + n_systems))
        .collect()
}

/// Finite-support law of the children vector of one type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildrenPmf {
    n_systems: usize,
    origin: usize,
    entries: Vec<(Vec<u32>, f64)>,
}

impl ChildrenPmf {
    /// Validates length, zero pattern and normalization; merges duplicates.
    pub fn new<I>(n_systems: usize, origin: usize, entries: I) -> Result<Self, ChildrenError>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let n_types = 2 * n_systems;
        if origin >= n_types {
            return Err(ChildrenError::OriginOutOfRange { origin, n_types });
        }
        let allowed = producible_types(n_systems, origin);
        let mut merged: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        let mut sum = 0.0;
        for (index, (v, m)) in entries.into_iter().enumerate() {
            if v.len() != n_types {
                return Err(ChildrenError::Length {
                    index,
                    found: v.len(),
                    expected: n_types,
                });
            }
            if !m.is_finite() || m < 0.0 {
                return Err(ChildrenError::InvalidMass { index, mass: m });
            }
            if m > 0.0 {
                if let Some(ty) = (0..n_types).find(|t| v[*t] > 0 && !allowed.contains(t)) {
                    return Err(ChildrenError::ZeroPattern {
                        vector: v,
                        ty,
                        origin,
                    });
                }
            }
            sum += m;
            *merged.entry(v).or_insert(0.0) += m;
        }
        if (sum - 1.0).abs() > CHILDREN_MASS_TOLERANCE {
            return Err(ChildrenError::MassSum { sum });
        }
        Ok(Self {
            n_systems,
            origin,
            entries: merged.into_iter().filter(|(_, m)| *m > 0.0).collect(),
        })
    }

    pub fn n_systems(&self) -> usize {
        self.n_systems
    }

    pub fn n_types(&self) -> usize {
        2 * self.n_systems
    }

    pub fn origin(&self) -> usize {
        self.origin
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

    /// Expected number of children of each type.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.n_types()];
        for (v, m) in self.iter() {
            for (acc, &o) in mean.iter_mut().zip(v) {
                *acc += o as f64 * m;
            }
        }
        mean
    }

    /// `h(0)`, the probability of producing no children.
    pub fn childless_mass(&self) -> f64 {
        self.mass(&vec![0; self.n_types()])
    }
}

/// Internal degree law of a randomly chosen internal neighbor:
/// `w(d) = d p(d) / E[D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeBiasedPmf {
    mass: Vec<f64>,
}

impl SizeBiasedPmf {
    pub fn new(p: &MarginalPmf) -> Result<Self, ChildrenError> {
        let mean = p.mean();
        if mean.is_nan() || mean <= 0.0 {
            return Err(ChildrenError::ZeroMeanDegree);
        }
        let mass = p
            .masses()
            .iter()
            .enumerate()
            .map(|(d, m)| d as f64 * m / mean)
            .collect();
        Ok(Self { mass })
    }

    pub fn mass(&self, d: u32) -> f64 {
        self.mass.get(d as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(d, m)| (d as u32, *m))
    }
}

/// Probability that a random internal neighbor is vulnerable:
/// `sum_d w(d) phi(d)`.
pub fn internal_vulnerability(
    p_internal: &MarginalPmf,
    phi: &VulnerabilityProfile,
) -> Result<f64, ChildrenError> {
    let w = SizeBiasedPmf::new(p_internal)?;
    let mut q = 0.0;
    for (d, m) in w.iter() {
        q += m * phi.phi(d)?;
    }
    Ok(q.clamp(0.0, 1.0))
}

/// Per-coordinate thinning probabilities for a CS-`i` agent: the infection
/// matrix off the diagonal, the internal vulnerability on it (1 in
/// children mode).
pub fn thinning_probabilities(model: &SystemModel, i: usize) -> Result<Vec<f64>, ChildrenError> {
    let n = model.n_systems();
    if i >= n {
        return Err(ModelError::SystemOutOfRange {
            index: i,
            n_systems: n,
        }
        .into());
    }
    let mut q: Vec<f64> = (0..n).map(|j| model.infection(i, j)).collect();
    q[i] = match model.mode() {
        Mode::Children => 1.0,
        Mode::Degree => internal_vulnerability(&model.internal_marginal(i), model.vulnerability(i))?,
    };
    Ok(q)
}

/// `P(Bin(n, p) = k)` for `k = 0..=n`.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    if p >= 1.0 {
        let mut v = vec![0.0; n_us + 1];
        v[n_us] = 1.0;
        return v;
    }
    if p <= 0.0 {
        let mut v = vec![0.0; n_us + 1];
        v[0] = 1.0;
        return v;
    }
    let mut coeff = 1.0f64;
    let mut out = Vec::with_capacity(n_us + 1);
    for k in 0..=n {
        if k > 0 {
            coeff *= (n - k + 1) as f64 / k as f64;
        }
        out.push(coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32));
    }
    out
}

fn thinned_children(
    model: &SystemModel,
    i: usize,
    infected: bool,
) -> Result<ChildrenPmf, ChildrenError> {
    let n = model.n_systems();
    let q = thinning_probabilities(model, i)?;
    let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (d, mass) in model.degree_dist(i).iter() {
        let mut counts = d.to_vec();
        if infected {
            counts[i] = counts[i].saturating_sub(1);
        }
        let per_axis: Vec<Vec<f64>> =
            counts.iter().zip(&q).map(|(&c, &p)| binomial_pmf(c, p)).collect();
        let combos: usize = per_axis.iter().map(Vec::len).product();
        if combos > MAX_SUPPORT {
            return Err(ChildrenError::SupportTooLarge { limit: MAX_SUPPORT });
        }
        // odometer over all thinning outcomes of this degree vector
        let mut k = vec![0usize; n];
        loop {
            let prob = k
                .iter()
                .zip(&per_axis)
                .fold(mass, |acc, (&kj, pmf)| acc * pmf[kj]);
            if prob > 0.0 {
                let mut o = vec![0u32; 2 * n];
                for (j, &kj) in k.iter().enumerate() {
                    let slot = if j == i { i + n } else { j };
                    o[slot] = kj as u32;
                }
                *acc.entry(o).or_insert(0.0) += prob;
                if acc.len() > MAX_SUPPORT {
                    return Err(ChildrenError::SupportTooLarge { limit: MAX_SUPPORT });
                }
            }
            let mut axis = 0;
            while axis < n {
                k[axis] += 1;
                if k[axis] < per_axis[axis].len() {
                    break;
                }
                k[axis] = 0;
                axis += 1;
            }
            if axis == n {
                break;
            }
        }
    }
    let origin = if infected { i + n } else { i };
    ChildrenPmf::new(n, origin, acc)
}

/// Children law of a fresh CS-`i` agent (type `i`): each coordinate of its
/// degree vector is binomially thinned; surviving internal neighbors become
/// type `i + N`.
pub fn children_distribution_fresh(model: &SystemModel, i: usize) -> Result<ChildrenPmf, ChildrenError> {
    thinned_children(model, i, false)
}

/// Children law of a CS-`i` agent infected by an internal neighbor (type
/// `i + N`): the parent is removed from its internal potential children,
/// which become `max(D_ii - 1, 0)`.
pub fn children_distribution_infected(
    model: &SystemModel,
    i: usize,
) -> Result<ChildrenPmf, ChildrenError> {
    thinned_children(model, i, true)
}

/// All `2N` children laws, indexed by type.
pub fn children_distributions(model: &SystemModel) -> Result<Vec<ChildrenPmf>, ChildrenError> {
    let n = model.n_systems();
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        out.push(children_distribution_fresh(model, i)?);
    }
    for i in 0..n {
        out.push(children_distribution_infected(model, i)?);
    }
    Ok(out)
}

/// Inter-system infection probability from the incoming-degree law `chi` of
/// a dependent and the per-incoming-degree infection probability `eta`:
/// `sum_d chi(d) eta(d)`.
pub fn inter_cs_infection_prob<F>(chi: &MarginalPmf, eta: F) -> Result<f64, ChildrenError>
where
    F: Fn(u32) -> f64,
{
    let at_zero = chi.mass(0);
    if at_zero > 0.0 {
        return Err(ChildrenError::IncomingDegreeZero { mass: at_zero });
    }
    let mut q = 0.0;
    for (d, m) in chi.iter() {
        let e = eta(d);
        if !(0.0..=1.0).contains(&e) {
            return Err(ChildrenError::EtaRange { degree: d, value: e });
        }
        q += m * e;
    }
    Ok(q.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiViolation {
    /// `phi*(d + 1) < phi*(d)`.
    Decreasing,
    /// `phi*(d + 2) - 2 phi*(d + 1) + phi*(d) > 0`.
    NotConcave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum AssumptionCheck {
    Holds,
    Violated { degree: u32, reason: PhiViolation },
}

impl AssumptionCheck {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds)
    }
}

/// Checks that `phi*(d) = d phi(d)` is non-decreasing and concave on
/// `1..=d_max`.
pub fn check_assumption_phi(
    phi: &VulnerabilityProfile,
    d_max: u32,
) -> Result<AssumptionCheck, ChildrenError> {
    const TOL: f64 = 1e-12;
    let star = (1..=d_max)
        .map(|d| phi.phi(d).map(|v| d as f64 * v))
        .collect::<Result<Vec<_>, _>>()?;
    for (k, w) in star.windows(2).enumerate() {
        if w[1] < w[0] - TOL {
            return Ok(AssumptionCheck::Violated {
                degree: k as u32 + 1,
                reason: PhiViolation::Decreasing,
            });
        }
    }
    for (k, w) in star.windows(3).enumerate() {
        if w[2] - 2.0 * w[1] + w[0] > TOL {
            return Ok(AssumptionCheck::Violated {
                degree: k as u32 + 1,
                reason: PhiViolation::NotConcave,
            });
        }
    }
    Ok(AssumptionCheck::Holds)
}

/// Convenience: assumption check on every system, up to its largest
/// internal degree.
pub fn model_satisfies_phi_assumption(model: &SystemModel) -> Result<bool, ChildrenError> {
    for i in 0..model.n_systems() {
        let d_max = marginal(model.degree_dist(i), i)?.max_degree().max(3);
        if !check_assumption_phi(model.vulnerability(i), d_max)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}
