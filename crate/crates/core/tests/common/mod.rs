//! Random models, ordered-pair constructions and brute-force oracles shared
//! by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cascade_lab::branching::{extinction_from_children, mean_matrix, spectral_radius, PoEVector, SolverOptions};
use cascade_lab::children::{children_distributions, producible_types, ChildrenPmf};
use cascade_lab::model::{JointPmf, Mode, SystemModel, VulnerabilityProfile};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const MAX_DEGREE: u32 = 4;
pub const THEOREM_SLACK: f64 = 1e-9;
pub const NEAR_CRITICAL: f64 = 0.05;

// ---------------------------------------------------------------- models

fn normalized(points: Vec<Vec<u32>>, rng: &mut impl Rng) -> Vec<(Vec<u32>, f64)> {
    let w: Vec<f64> = points.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    points.into_iter().zip(w).map(|(p, x)| (p, x / total)).collect()
}

/// Up to `max_support` distinct points with coordinates in `0..=max_degree`;
/// coordinate `floor_axis` is at least 1.
pub fn random_law(
    rng: &mut impl Rng,
    n: usize,
    max_support: usize,
    max_degree: u32,
    floor_axis: Option<usize>,
) -> JointPmf {
    let k = rng.random_range(1..=max_support);
    let mut points: Vec<Vec<u32>> = Vec::new();
    for _ in 0..4 * k {
        if points.len() == k {
            break;
        }
        let p: Vec<u32> = (0..n)
            .map(|a| {
                let lo = u32::from(floor_axis == Some(a));
                rng.random_range(lo..=max_degree)
            })
            .collect();
        if !points.contains(&p) {
            points.push(p);
        }
    }
    JointPmf::new(n, normalized(points, rng)).unwrap()
}

/// `phi(d) = c d^(-beta)` with `beta` in `[0, 1]`, so `d phi(d)` is
/// non-decreasing and concave.
pub fn random_phi(rng: &mut impl Rng) -> VulnerabilityProfile {
    VulnerabilityProfile::PowerLaw {
        scale: rng.random_range(0.2..=1.0),
        exponent: rng.random_range(0.0..=1.0),
    }
}

pub fn random_infection(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(0.05..=1.0) }).collect())
        .collect()
}

/// Degree-mode model with the internal degree floor, small supports and a
/// vulnerability profile satisfying the concavity assumption.
pub fn random_theorem_model(rng: &mut impl Rng, n: usize) -> SystemModel {
    let dists = (0..n).map(|i| random_law(rng, n, 8, MAX_DEGREE, Some(i))).collect();
    let phi = (0..n).map(|_| random_phi(rng)).collect();
    SystemModel::new(dists, random_infection(rng, n), phi, true, Mode::Degree).unwrap()
}

/// Small model in either mode, with or without the floor.
pub fn random_micro_model(rng: &mut impl Rng) -> SystemModel {
    let n = rng.random_range(2..=3);
    let floor = rng.random_bool(0.5);
    let mode = if rng.random_bool(0.5) { Mode::Degree } else { Mode::Children };
    let dists = (0..n)
        .map(|i| {
            loop {
                let law = random_law(rng, n, 8, MAX_DEGREE, floor.then_some(i));
                // the internal mean must be positive in degree mode
                if law.iter().any(|(v, _)| v[i] > 0) {
                    break law;
                }
            }
        })
        .collect();
    let phi = (0..n).map(|_| random_phi(rng)).collect();
    SystemModel::new(dists, random_infection(rng, n), phi, floor, mode).unwrap()
}

pub fn poe(model: &SystemModel) -> PoEVector {
    extinction_from_children(&children_distributions(model).unwrap(), &SolverOptions::default()).unwrap()
}

pub fn rho_of(children: &[ChildrenPmf]) -> f64 {
    spectral_radius(&mean_matrix(children).unwrap()).unwrap().value
}

pub fn near_critical(children: &[ChildrenPmf]) -> bool {
    (rho_of(children) - 1.0).abs() < NEAR_CRITICAL
}

/// `a <= b + slack` in every coordinate.
pub fn le_with_slack(a: &[f64], b: &[f64], slack: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= *y + slack)
}

// ---------------------------------------------------- ordered pairs

fn to_map(law: &JointPmf) -> BTreeMap<Vec<u32>, f64> {
    law.iter().map(|(v, m)| (v.to_vec(), m)).collect()
}

fn from_map(n: usize, map: BTreeMap<Vec<u32>, f64>) -> JointPmf {
    JointPmf::new(n, map.into_iter().filter(|(_, m)| *m > 0.0)).unwrap()
}

fn incomparable(x: &[u32], y: &[u32]) -> bool {
    x.iter().zip(y).any(|(a, b)| a < b) && x.iter().zip(y).any(|(a, b)| a > b)
}

/// Moves mass from incomparable pairs `x, y` to `x ^ y, x v y`, which
/// keeps every marginal and increases the law in the supermodular order.
/// `None` when the support is a chain.
pub fn supermodular_increase(law: &JointPmf, rng: &mut impl Rng, steps: usize) -> Option<JointPmf> {
    let n = law.dimension();
    let mut map = to_map(law);
    let mut moved = false;
    for _ in 0..steps {
        let keys: Vec<Vec<u32>> = map.keys().cloned().collect();
        let pairs: Vec<(usize, usize)> = (0..keys.len())
            .flat_map(|a| (a + 1..keys.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| incomparable(&keys[a], &keys[b]))
            .collect();
        let Some(&(a, b)) = pairs.choose(rng) else {
            break;
        };
        let (x, y) = (keys[a].clone(), keys[b].clone());
        let eps = rng.random_range(0.1..=1.0) * map[&x].min(map[&y]);
        let meet: Vec<u32> = x.iter().zip(&y).map(|(p, q)| *p.min(q)).collect();
        let join: Vec<u32> = x.iter().zip(&y).map(|(p, q)| *p.max(q)).collect();
        *map.get_mut(&x).unwrap() -= eps;
        *map.get_mut(&y).unwrap() -= eps;
        *map.entry(meet).or_insert(0.0) += eps;
        *map.entry(join).or_insert(0.0) += eps;
        map.retain(|_, m| *m > 1e-15);
        moved = true;
    }
    moved.then(|| renormalize(n, map))
}

fn renormalize(n: usize, mut map: BTreeMap<Vec<u32>, f64>) -> JointPmf {
    let total: f64 = map.values().sum();
    map.values_mut().for_each(|m| *m /= total);
    from_map(n, map)
}

/// Mean-preserving spread along `axis`: part of the mass at `z` goes half to
/// `z - e` and half to `z + e`. Coordinates stay within
/// `lower..=MAX_DEGREE`. The result is smaller in the idcv order.
pub fn mean_preserving_spread(
    law: &JointPmf,
    rng: &mut impl Rng,
    axis: usize,
    lower: u32,
    steps: usize,
) -> Option<JointPmf> {
    let n = law.dimension();
    let mut map = to_map(law);
    let mut moved = false;
    for _ in 0..steps {
        let centers: Vec<Vec<u32>> =
            map.keys().filter(|v| v[axis] > lower && v[axis] < MAX_DEGREE).cloned().collect();
        let Some(z) = centers.choose(rng).cloned() else {
            break;
        };
        let eps = rng.random_range(0.1..=1.0) * map[&z];
        let (mut lo, mut hi) = (z.clone(), z.clone());
        lo[axis] -= 1;
        hi[axis] += 1;
        *map.get_mut(&z).unwrap() -= eps;
        *map.entry(lo).or_insert(0.0) += eps / 2.0;
        *map.entry(hi).or_insert(0.0) += eps / 2.0;
        map.retain(|_, m| *m > 1e-15);
        moved = true;
    }
    moved.then(|| renormalize(n, map))
}

pub fn random_children(rng: &mut impl Rng, n: usize, origin: usize) -> ChildrenPmf {
    let allowed = producible_types(n, origin);
    let k = rng.random_range(1..=6);
    let mut points: Vec<Vec<u32>> = Vec::new();
    while points.len() < k {
        let mut v = vec![0u32; 2 * n];
        for &t in &allowed {
            v[t] = rng.random_range(0..=3);
        }
        if !points.contains(&v) {
            points.push(v);
        }
    }
    ChildrenPmf::new(n, origin, normalized(points, rng)).unwrap()
}

/// A law at least as large in the Laplace-transform order: a spread of the
/// input (smaller), the input itself, or the input with an extra child
/// (larger). Returns `(smaller, larger)` with at least one change applied.
pub fn lt_ordered_pair(base: &ChildrenPmf, rng: &mut impl Rng) -> (ChildrenPmf, ChildrenPmf) {
    let n = base.n_systems();
    let origin = base.origin();
    let allowed = producible_types(n, origin);
    let map: BTreeMap<Vec<u32>, f64> = base.iter().map(|(v, m)| (v.to_vec(), m)).collect();
    let choice = rng.random_range(0..3);
    let mut small = map.clone();
    let mut large = map.clone();
    if choice != 1 {
        // spread along a producible type
        let t = *allowed.choose(rng).unwrap();
        let zs: Vec<Vec<u32>> = small.keys().filter(|v| v[t] >= 1).cloned().collect();
        if let Some(z) = zs.choose(rng) {
            let eps = rng.random_range(0.1..=1.0) * small[z];
            let (mut lo, mut hi) = (z.clone(), z.clone());
            lo[t] -= 1;
            hi[t] += 1;
            *small.get_mut(z).unwrap() -= eps;
            *small.entry(lo).or_insert(0.0) += eps / 2.0;
            *small.entry(hi).or_insert(0.0) += eps / 2.0;
        }
    }
    if choice != 0 {
        // first-order increase: some mass gains a child
        let t = *allowed.choose(rng).unwrap();
        let keys: Vec<Vec<u32>> = large.keys().cloned().collect();
        let z = keys.choose(rng).unwrap().clone();
        let eps = rng.random_range(0.1..=1.0) * large[&z];
        let mut up = z.clone();
        up[t] += 1;
        *large.get_mut(&z).unwrap() -= eps;
        *large.entry(up).or_insert(0.0) += eps;
    }
    let build = |m: BTreeMap<Vec<u32>, f64>| {
        let total: f64 = m.values().sum();
        ChildrenPmf::new(n, origin, m.into_iter().filter(|(_, x)| *x > 1e-15).map(|(v, x)| (v, x / total)))
            .unwrap()
    };
    (build(small), build(large))
}

// ------------------------------------------------------------- oracles

fn phi_value(profile: &VulnerabilityProfile, d: u32) -> f64 {
    let d = d.max(1);
    match profile {
        VulnerabilityProfile::PowerLaw { scale, exponent } => (scale * (d as f64).powf(-exponent)).clamp(0.0, 1.0),
        VulnerabilityProfile::Table { values } => values[d as usize - 1].clamp(0.0, 1.0),
    }
}

/// Children law of type `i` (or `i+` when `infected`) by summing over every
/// subset of potential children, each neighbor failing independently.
pub fn enumerated_children(model: &SystemModel, i: usize, infected: bool) -> BTreeMap<Vec<u32>, f64> {
    let n = model.n_systems();
    let law = model.degree_dist(i);
    let q_internal = match model.mode() {
        Mode::Children => 1.0,
        Mode::Degree => {
            let (mut num, mut den) = (0.0, 0.0);
            for (v, m) in law.iter() {
                let d = v[i] as f64;
                num += d * m * phi_value(model.vulnerability(i), v[i]);
                den += d * m;
            }
            num / den
        }
    };
    let mut out = BTreeMap::new();
    for (v, m) in law.iter() {
        let mut slots = Vec::new();
        for (j, &vj) in v.iter().enumerate().take(n) {
            let mut count = vj;
            if infected && j == i {
                count = count.saturating_sub(1);
            }
            let (slot, q) = if j == i { (i + n, q_internal) } else { (j, model.infection(i, j)) };
            slots.extend(std::iter::repeat_n((slot, q), count as usize));
        }
        for mask in 0u32..(1 << slots.len()) {
            let mut o = vec![0u32; 2 * n];
            let mut p = m;
            for (b, &(slot, q)) in slots.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    o[slot] += 1;
                    p *= q;
                } else {
                    p *= 1.0 - q;
                }
            }
            *out.entry(o).or_insert(0.0) += p;
        }
    }
    out
}

/// Largest cellwise difference between a children law and an oracle map.
pub fn children_gap(h: &ChildrenPmf, oracle: &BTreeMap<Vec<u32>, f64>) -> f64 {
    let mut gap: f64 = 0.0;
    for (v, m) in oracle {
        gap = gap.max((h.mass(v) - m).abs());
    }
    for (v, m) in h.iter() {
        gap = gap.max((oracle.get(v).copied().unwrap_or(0.0) - m).abs());
    }
    gap
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C {
    pub re: f64,
    pub im: f64,
}

impl C {
    fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }
    fn add(self, o: C) -> C {
        C::new(self.re + o.re, self.im + o.im)
    }
    fn sub(self, o: C) -> C {
        C::new(self.re - o.re, self.im - o.im)
    }
    fn mul(self, o: C) -> C {
        C::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
    fn div(self, o: C) -> C {
        let d = o.re * o.re + o.im * o.im;
        C::new((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)
    }
    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Characteristic polynomial coefficients `c[0..=n]` (monic, `c[n] = 1`)
/// by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for r in 0..n {
            for s in 0..n {
                next[r][s] = (0..n).map(|t| a[r][t] * m[t][s]).sum::<f64>();
            }
            next[r][r] += c[n - k + 1];
        }
        m = next;
        let trace: f64 = (0..n).map(|r| (0..n).map(|t| a[r][t] * m[t][r]).sum::<f64>()).sum();
        c[n - k] = -trace / k as f64;
    }
    c
}

/// All roots of a monic polynomial by Durand-Kerner iteration.
pub fn polynomial_roots(c: &[f64]) -> Vec<C> {
    let n = c.len() - 1;
    let eval = |z: C| c.iter().rev().fold(C::new(0.0, 0.0), |acc, &k| acc.mul(z).add(C::new(k, 0.0)));
    let scale = 1.0 + c[..n].iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let seed = C::new(0.4, 0.9);
    let mut roots: Vec<C> = (0..n)
        .scan(C::new(scale, 0.0), |z, _| {
            *z = z.mul(seed);
            Some(*z)
        })
        .collect();
    for _ in 0..5000 {
        let mut delta: f64 = 0.0;
        for k in 0..n {
            let mut den = C::new(1.0, 0.0);
            for j in 0..n {
                if j != k {
                    den = den.mul(roots[k].sub(roots[j]));
                }
            }
            let step = eval(roots[k]).div(den);
            roots[k] = roots[k].sub(step);
            delta = delta.max(step.abs());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    roots
}

pub fn spectral_radius_oracle(a: &[Vec<f64>]) -> f64 {
    polynomial_roots(&characteristic_polynomial(a)).iter().map(|z| z.abs()).fold(0.0, f64::max)
}

/// Random nonnegative square matrix with some zero entries.
pub fn random_nonnegative_matrix(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    loop {
        let a: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..2.0) }).collect())
            .collect();
        if a.iter().flatten().any(|&x| x > 0.0) {
            return a;
        }
    }
}

// ------------------------------------------------------ theorem trials

use cascade_lab::model::MarginalPmf;
use cascade_lab::orders::{certify_idcv, certify_supermodular, compare_concordance, compare_icv, compare_lt};

/// One constructed ordered pair: whether the PoE inequality held and
/// whether the library certified the order of the constructed pair.
#[derive(Debug, Clone)]
pub struct TrialCheck {
    pub poe_ok: bool,
    pub certified: bool,
    pub detail: String,
}

fn solve_pair(one: &SystemModel, two: &SystemModel) -> Option<(Vec<f64>, Vec<f64>)> {
    let (h1, h2) = (children_distributions(one).unwrap(), children_distributions(two).unwrap());
    if near_critical(&h1) || near_critical(&h2) {
        return None;
    }
    let opts = SolverOptions::default();
    Some((
        extinction_from_children(&h1, &opts).unwrap().mu,
        extinction_from_children(&h2, &opts).unwrap().mu,
    ))
}

fn check(small: &[f64], large: &[f64], certified: bool, what: &str) -> TrialCheck {
    TrialCheck {
        poe_ok: le_with_slack(small, large, THEOREM_SLACK),
        certified,
        detail: format!("{what}: {small:?} vs {large:?}"),
    }
}

/// Supermodular increase of every degree law that allows one; expects
/// `mu(original) <= mu(increased)`.
pub fn supermodular_trial(rng: &mut impl Rng, n: usize) -> Option<TrialCheck> {
    let one = random_theorem_model(rng, n);
    let mut two = one.clone();
    let mut certified = true;
    let mut changed = false;
    for i in 0..n {
        if let Some(law) = supermodular_increase(one.degree_dist(i), rng, 3) {
            certified &= certify_supermodular(one.degree_dist(i), &law).unwrap().is_holds();
            if n == 2 {
                certified &= compare_concordance(one.degree_dist(i), &law).unwrap().is_holds();
            }
            two = two.with_degree_dist(i, law).unwrap();
            changed = true;
        }
    }
    if !changed {
        return None;
    }
    let (mu1, mu2) = solve_pair(&one, &two)?;
    Some(check(&mu1, &mu2, certified, "supermodular"))
}

/// Mean-preserving spreads of every degree law, keeping the internal floor;
/// expects `mu(original) <= mu(spread)`.
pub fn idcv_trial(rng: &mut impl Rng, n: usize) -> Option<TrialCheck> {
    let base = random_theorem_model(rng, n);
    let mut spread = base.clone();
    let mut certified = true;
    let mut changed = false;
    for i in 0..n {
        let axis = rng.random_range(0..n);
        let lower = u32::from(axis == i);
        if let Some(law) = mean_preserving_spread(base.degree_dist(i), rng, axis, lower, 3) {
            certified &= certify_idcv(&law, base.degree_dist(i)).unwrap().is_holds();
            spread = spread.with_degree_dist(i, law).unwrap();
            changed = true;
        }
    }
    if !changed {
        return None;
    }
    let (mu_base, mu_spread) = solve_pair(&base, &spread)?;
    Some(check(&mu_base, &mu_spread, certified, "idcv"))
}

/// Independent coordinates with mean-preserving spreads of the marginals;
/// expects `mu(original) <= mu(spread)`.
pub fn icv_product_trial(rng: &mut impl Rng, n: usize) -> Option<TrialCheck> {
    let mut base_dists = Vec::new();
    let mut spread_dists = Vec::new();
    let mut certified = true;
    let mut changed = false;
    for i in 0..n {
        let mut base_m = Vec::new();
        let mut spread_m = Vec::new();
        for a in 0..n {
            let lower = u32::from(a == i);
            let law = random_law(rng, 1, 4, MAX_DEGREE, (a == i).then_some(0));
            let pmf = marginal_of(&law);
            let spread = match mean_preserving_spread(&law, rng, 0, lower, 2) {
                Some(s) => {
                    changed = true;
                    marginal_of(&s)
                }
                None => pmf.clone(),
            };
            certified &= compare_icv(&spread, &pmf).is_holds();
            base_m.push(pmf);
            spread_m.push(spread);
        }
        base_dists.push(JointPmf::product(&base_m));
        spread_dists.push(JointPmf::product(&spread_m));
    }
    if !changed {
        return None;
    }
    let phi: Vec<VulnerabilityProfile> = (0..n).map(|_| random_phi(rng)).collect();
    let q = random_infection(rng, n);
    let base = SystemModel::new(base_dists, q.clone(), phi.clone(), true, Mode::Degree).unwrap();
    let spread = SystemModel::new(spread_dists, q, phi, true, Mode::Degree).unwrap();
    let (mu_base, mu_spread) = solve_pair(&base, &spread)?;
    Some(check(&mu_base, &mu_spread, certified, "icv"))
}

fn marginal_of(law: &JointPmf) -> MarginalPmf {
    cascade_lab::model::marginal(law, 0).unwrap()
}

/// Children families ordered type by type in the Laplace-transform order;
/// expects `mu(larger) <= mu(smaller)`.
pub fn laplace_trial(rng: &mut impl Rng, n: usize) -> Option<TrialCheck> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut certified = true;
    for t in 0..2 * n {
        let base = random_children(rng, n, t);
        let (s, l) = lt_ordered_pair(&base, rng);
        certified &= compare_lt(&s, &l, None).unwrap().is_holds();
        small.push(s);
        large.push(l);
    }
    if near_critical(&small) || near_critical(&large) {
        return None;
    }
    let opts = SolverOptions::default();
    let mu_small = extinction_from_children(&small, &opts).unwrap().mu;
    let mu_large = extinction_from_children(&large, &opts).unwrap().mu;
    Some(check(&mu_large, &mu_small, certified, "laplace"))
}

/// Runs `trial` until `wanted` pairs were checked (skips excluded), with
/// `N` alternating over 2 and 3.
pub fn run_suite<R: Rng>(
    rng: &mut R,
    wanted: usize,
    trial: impl Fn(&mut R, usize) -> Option<TrialCheck>,
) -> (Vec<TrialCheck>, usize) {
    let mut done = Vec::new();
    let mut skipped = 0;
    let mut k = 0;
    while done.len() < wanted && k < 50 * wanted {
        let n = 2 + k % 2;
        k += 1;
        match trial(rng, n) {
            Some(c) => done.push(c),
            None => skipped += 1,
        }
    }
    (done, skipped)
}
