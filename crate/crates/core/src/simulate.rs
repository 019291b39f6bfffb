//! Monte Carlo: direct branching-process sampling and finite-graph cascades.
//!
//! Every trial draws from its own ChaCha8 stream `(master seed, trial
//! index)`, so results do not depend on thread scheduling.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::children::{children_distributions, ChildrenError, ChildrenPmf};
use crate::model::{ModelError, Mode, SystemModel};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("seed type {seed} out of range for {n_types} types")]
    SeedTypeOutOfRange { seed: usize, n_types: usize },
    #[error("expected {expected} system sizes, found {found}")]
    SizesMismatch { expected: usize, found: usize },
    #[error("CS {from} agent needs {requested} distinct CS {to} dependents but CS {to} has {available} agents")]
    TargetTooSmall {
        from: usize,
        to: usize,
        requested: u32,
        available: usize,
    },
    #[error("agent {agent} out of range for {n_agents} agents")]
    AgentOutOfRange { agent: usize, n_agents: usize },
    #[error(transparent)]
    Children(#[from] ChildrenError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Binomial proportion with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub trials: u64,
    /// Trials in which the estimated event occurred.
    pub count: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub rng_seed: u64,
}

/// Estimate of an extinction probability; `count` is the number of trials
/// that went extinct.
pub type ExtinctionEstimate = ProportionEstimate;

impl ProportionEstimate {
    pub fn new(count: u64, trials: u64, rng_seed: u64) -> Self {
        assert!(trials > 0 && count <= trials);
        let (lo, hi) = wilson_interval(count, trials);
        Self {
            trials,
            count,
            estimate: count as f64 / trials as f64,
            ci_low: lo,
            ci_high: hi,
            rng_seed,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// 95% Wilson score interval for `count` successes out of `trials`.
pub fn wilson_interval(count: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if count == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if count == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    (lo, hi)
}

fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Extinct,
    GenerationCap,
    PopulationCap,
}

/// Per-generation type counts `N_j(k)` of one simulated process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeTrace {
    pub counts: Vec<Vec<u64>>,
    pub termination: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingSimConfig {
    pub seed_type: usize,
    /// Generations simulated before the run is declared surviving.
    pub generation_cap: usize,
    /// Alive individuals in one generation at which the run is declared
    /// surviving.
    pub population_cap: u64,
    pub trials: u64,
    pub rng_seed: u64,
    /// Number of leading trials whose full trace is kept.
    pub keep_traces: usize,
}

impl Default for BranchingSimConfig {
    fn default() -> Self {
        Self {
            seed_type: 0,
            generation_cap: 1000,
            population_cap: 1000,
            trials: 100_000,
            rng_seed: 0,
            keep_traces: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingSimReport {
    pub estimate: ExtinctionEstimate,
    pub seed_type: usize,
    pub generation_cap: usize,
    pub population_cap: u64,
    pub generation_cap_hits: u64,
    pub population_cap_hits: u64,
    pub traces: Vec<CascadeTrace>,
}

struct ChildSampler {
    vectors: Vec<Vec<Vec<u32>>>,
    index: Vec<WeightedIndex<f64>>,
}

impl ChildSampler {
    fn new(children: &[ChildrenPmf]) -> Self {
        let vectors = children
            .iter()
            .map(|h| h.entries().iter().map(|(v, _)| v.clone()).collect())
            .collect();
        let index = children
            .iter()
            .map(|h| WeightedIndex::new(h.entries().iter().map(|(_, m)| *m)).expect("valid children law"))
            .collect();
        Self { vectors, index }
    }

    fn sample<'a, R: Rng>(&'a self, ty: usize, rng: &mut R) -> &'a [u32] {
        &self.vectors[ty][self.index[ty].sample(rng)]
    }
}

pub fn simulate_branching(model: &SystemModel, cfg: &BranchingSimConfig) -> Result<BranchingSimReport, SimError> {
    simulate_branching_children(&children_distributions(model)?, cfg)
}

/// Samples the process from its children laws. A run that reaches either
/// cap counts as surviving.
pub fn simulate_branching_children(
    children: &[ChildrenPmf],
    cfg: &BranchingSimConfig,
) -> Result<BranchingSimReport, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::InvalidConfig("trials must be at least 1".into()));
    }
    if cfg.generation_cap == 0 || cfg.population_cap == 0 {
        return Err(SimError::InvalidConfig("caps must be at least 1".into()));
    }
    let n_types = children.len();
    if cfg.seed_type >= n_types {
        return Err(SimError::SeedTypeOutOfRange {
            seed: cfg.seed_type,
            n_types,
        });
    }
    let sampler = ChildSampler::new(children);
    let runs: Vec<(Termination, Option<CascadeTrace>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.rng_seed, trial);
            let keep = (trial as usize) < cfg.keep_traces;
            run_process(&sampler, n_types, cfg, &mut rng, keep)
        })
        .collect();
    let mut extinct = 0;
    let (mut gen_hits, mut pop_hits) = (0, 0);
    let mut traces = Vec::new();
    for (t, trace) in runs {
        match t {
            Termination::Extinct => extinct += 1,
            Termination::GenerationCap => gen_hits += 1,
            Termination::PopulationCap => pop_hits += 1,
        }
        traces.extend(trace);
    }
    Ok(BranchingSimReport {
        estimate: ProportionEstimate::new(extinct, cfg.trials, cfg.rng_seed),
        seed_type: cfg.seed_type,
        generation_cap: cfg.generation_cap,
        population_cap: cfg.population_cap,
        generation_cap_hits: gen_hits,
        population_cap_hits: pop_hits,
        traces,
    })
}

fn run_process(
    sampler: &ChildSampler,
    n_types: usize,
    cfg: &BranchingSimConfig,
    rng: &mut ChaCha8Rng,
    keep: bool,
) -> (Termination, Option<CascadeTrace>) {
    let mut current = vec![0u64; n_types];
    current[cfg.seed_type] = 1;
    let mut trace = keep.then(|| vec![current.clone()]);
    let mut next = vec![0u64; n_types];
    let mut termination = Termination::GenerationCap;
    for _ in 0..cfg.generation_cap {
        next.iter_mut().for_each(|c| *c = 0);
        for (ty, &count) in current.iter().enumerate() {
            for _ in 0..count {
                for (slot, &k) in next.iter_mut().zip(sampler.sample(ty, rng)) {
                    *slot += u64::from(k);
                }
            }
        }
        std::mem::swap(&mut current, &mut next);
        if let Some(t) = trace.as_mut() {
            t.push(current.clone());
        }
        let alive: u64 = current.iter().sum();
        if alive == 0 {
            termination = Termination::Extinct;
            break;
        }
        if alive >= cfg.population_cap {
            termination = Termination::PopulationCap;
            break;
        }
    }
    let trace = trace.map(|counts| CascadeTrace { counts, termination });
    (termination, trace)
}

/// Counts of edges removed or stubs dropped while wiring a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiringStats {
    pub self_loops_removed: usize,
    pub multi_edges_removed: usize,
    /// Per CS: 1 when the internal stub total was odd and a stub was dropped.
    pub dropped_stubs: Vec<usize>,
}

/// A sampled interdependent system. Agents are numbered globally; CS `i`
/// owns `offsets[i]..offsets[i+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    n_systems: usize,
    offsets: Vec<usize>,
    cs_of: Vec<u32>,
    internal_start: Vec<usize>,
    internal_adj: Vec<u32>,
    external_start: Vec<usize>,
    external_adj: Vec<u32>,
    /// Security state as a uniform quantile `u`; the agent is vulnerable to
    /// one failed internal neighbor iff `u < phi(internal degree)`.
    security: Vec<f64>,
    vulnerable: Vec<bool>,
    sampled_degrees: Vec<u32>,
    infection: Vec<Vec<f64>>,
    pub stats: WiringStats,
}

impl FiniteSystem {
    pub fn n_systems(&self) -> usize {
        self.n_systems
    }

    pub fn n_agents(&self) -> usize {
        self.cs_of.len()
    }

    pub fn size(&self, cs: usize) -> usize {
        self.offsets[cs + 1] - self.offsets[cs]
    }

    pub fn agents_of(&self, cs: usize) -> std::ops::Range<usize> {
        self.offsets[cs]..self.offsets[cs + 1]
    }

    pub fn cs_of(&self, agent: usize) -> usize {
        self.cs_of[agent] as usize
    }

    /// Internal (undirected) neighbors after erasure.
    pub fn internal_neighbors(&self, agent: usize) -> &[u32] {
        &self.internal_adj[self.internal_start[agent]..self.internal_start[agent + 1]]
    }

    /// Dependents in other systems (supporter -> dependent edges).
    pub fn external_dependents(&self, agent: usize) -> &[u32] {
        &self.external_adj[self.external_start[agent]..self.external_start[agent + 1]]
    }

    pub fn security(&self, agent: usize) -> f64 {
        self.security[agent]
    }

    pub fn is_vulnerable(&self, agent: usize) -> bool {
        self.vulnerable[agent]
    }

    /// Degree vector drawn for `agent` before erasure.
    pub fn sampled_degree(&self, agent: usize) -> &[u32] {
        &self.sampled_degrees[agent * self.n_systems..(agent + 1) * self.n_systems]
    }

    pub fn infection(&self, from: usize, to: usize) -> f64 {
        self.infection[from][to]
    }

    pub fn external_edge_count(&self) -> usize {
        self.external_adj.len()
    }

    /// Copy with every security state replaced by `f(agent, u)`, and
    /// vulnerability re-evaluated through `vulnerable(agent, u)`.
    pub fn with_security<F, G>(&self, f: F, vulnerable: G) -> Self
    where
        F: Fn(usize, f64) -> f64,
        G: Fn(usize, f64) -> bool,
    {
        let mut out = self.clone();
        for a in 0..out.n_agents() {
            out.security[a] = f(a, out.security[a]);
            out.vulnerable[a] = vulnerable(a, out.security[a]);
        }
        out
    }
}

pub fn generate_system_graph(model: &SystemModel, sizes: &[usize], rng_seed: u64) -> Result<FiniteSystem, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    generate_with_rng(model, sizes, &mut rng)
}

/// i.i.d. degree vectors from each CS's law, configuration-model internal
/// wiring with self-loop and multi-edge erasure, and distinct uniform
/// dependents for external stubs. In children mode every agent counts as
/// vulnerable, matching `q_ii = 1`.
pub fn generate_with_rng<R: Rng>(model: &SystemModel, sizes: &[usize], rng: &mut R) -> Result<FiniteSystem, SimError> {
    let n = model.n_systems();
    if sizes.len() != n {
        return Err(SimError::SizesMismatch {
            expected: n,
            found: sizes.len(),
        });
    }
    let mut offsets = vec![0usize];
    for &s in sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let total = offsets[n];
    let mut cs_of = vec![0u32; total];
    let mut degrees = vec![0u32; total * n];
    for i in 0..n {
        let law = model.degree_dist(i);
        let index = WeightedIndex::new(law.entries().iter().map(|(_, m)| *m)).expect("valid pmf");
        for a in offsets[i]..offsets[i + 1] {
            cs_of[a] = i as u32;
            let v = &law.entries()[index.sample(rng)].0;
            degrees[a * n..(a + 1) * n].copy_from_slice(v);
        }
    }
    let mut stats = WiringStats {
        dropped_stubs: vec![0; n],
        ..WiringStats::default()
    };
    // internal configuration model, per CS
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for i in 0..n {
        let mut stubs: Vec<u32> = Vec::new();
        for a in offsets[i]..offsets[i + 1] {
            for _ in 0..degrees[a * n + i] {
                stubs.push(a as u32);
            }
        }
        stubs.shuffle(rng);
        if stubs.len() % 2 == 1 {
            let dropped = stubs.pop().expect("odd length is nonzero");
            stats.dropped_stubs[i] = 1;
            log::debug!("CS {i}: odd internal stub total, dropped one stub of agent {dropped}");
        }
        for pair in stubs.chunks_exact(2) {
            if pair[0] == pair[1] {
                stats.self_loops_removed += 1;
            } else {
                edges.push((pair[0], pair[1]));
            }
        }
    }
    let mut count = vec![0usize; total + 1];
    for &(a, b) in &edges {
        count[a as usize] += 1;
        count[b as usize] += 1;
    }
    let mut start = vec![0usize; total + 1];
    for a in 0..total {
        start[a + 1] = start[a] + count[a];
    }
    let mut fill = start.clone();
    let mut adj = vec![0u32; start[total]];
    for &(a, b) in &edges {
        adj[fill[a as usize]] = b;
        fill[a as usize] += 1;
        adj[fill[b as usize]] = a;
        fill[b as usize] += 1;
    }
    // collapse multi-edges; both endpoints drop the duplicate
    let mut internal_start = vec![0usize; total + 1];
    let mut write = 0usize;
    let mut duplicates = 0usize;
    for a in 0..total {
        let row = write;
        for k in start[a]..start[a + 1] {
            let b = adj[k];
            if adj[row..write].contains(&b) {
                duplicates += 1;
            } else {
                adj[write] = b;
                write += 1;
            }
        }
        internal_start[a + 1] = write;
    }
    adj.truncate(write);
    let internal_adj = adj;
    stats.multi_edges_removed = duplicates / 2;
    // external wiring
    let mut external_start = vec![0usize; total + 1];
    let mut external_adj = Vec::new();
    for a in 0..total {
        let i = cs_of[a] as usize;
        for j in (0..n).filter(|&j| j != i) {
            let d = degrees[a * n + j];
            if d == 0 {
                continue;
            }
            if d as usize > sizes[j] {
                return Err(SimError::TargetTooSmall {
                    from: i,
                    to: j,
                    requested: d,
                    available: sizes[j],
                });
            }
            push_distinct_targets(rng, offsets[j], sizes[j], d as usize, &mut external_adj);
        }
        external_start[a + 1] = external_adj.len();
    }
    let security: Vec<f64> = (0..total).map(|_| rng.random::<f64>()).collect();
    let mut vulnerable = vec![true; total];
    if model.mode() == Mode::Degree {
        for i in 0..n {
            let range = offsets[i]..offsets[i + 1];
            let max_d = range.clone().map(|a| internal_start[a + 1] - internal_start[a]).max().unwrap_or(0);
            let phi: Vec<f64> = (0..=max_d as u32)
                .map(|d| model.vulnerability(i).phi(d.max(1)))
                .collect::<Result<_, _>>()?;
            for a in range {
                vulnerable[a] = security[a] < phi[internal_start[a + 1] - internal_start[a]];
            }
        }
    }
    Ok(FiniteSystem {
        n_systems: n,
        offsets,
        cs_of,
        internal_start,
        internal_adj,
        external_start,
        external_adj,
        security,
        vulnerable,
        sampled_degrees: degrees,
        infection: (0..n).map(|i| (0..n).map(|j| model.infection(i, j)).collect()).collect(),
        stats,
    })
}

/// Appends `count` distinct uniform agents of `offset..offset+size`.
fn push_distinct_targets<R: Rng>(rng: &mut R, offset: usize, size: usize, count: usize, out: &mut Vec<u32>) {
    if count > 8 {
        for idx in rand::seq::index::sample(rng, size, count) {
            out.push((offset + idx) as u32);
        }
        return;
    }
    // rejection keeps every ordered draw of distinct agents equally likely
    let start = out.len();
    while out.len() - start < count {
        let t = (offset + rng.random_range(0..size)) as u32;
        if !out[start..].contains(&t) {
            out.push(t);
        }
    }
}

/// Result of one finite-graph cascade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeOutcome {
    pub initial_agent: usize,
    /// Failed agents in failure order, starting with the initial agent.
    pub failed: Vec<u32>,
    pub failed_per_cs: Vec<usize>,
    /// New failures per CS in each BFS round; round 0 is the initial agent.
    pub generations: Vec<Vec<usize>>,
}

impl CascadeOutcome {
    pub fn total_failed(&self) -> usize {
        self.failed.len()
    }
}

pub fn run_cascade(system: &FiniteSystem, initial_agent: usize, rng_seed: u64) -> Result<CascadeOutcome, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    run_cascade_with_rng(system, initial_agent, &mut rng)
}

/// Breadth-first failure propagation. A vulnerable internal neighbor of a
/// failed agent fails; each external dependent fails with probability
/// `q_ij` per failed supporter. Agents fail at most once.
pub fn run_cascade_with_rng<R: Rng>(
    system: &FiniteSystem,
    initial_agent: usize,
    rng: &mut R,
) -> Result<CascadeOutcome, SimError> {
    let total = system.n_agents();
    if initial_agent >= total {
        return Err(SimError::AgentOutOfRange {
            agent: initial_agent,
            n_agents: total,
        });
    }
    let n = system.n_systems();
    let mut failed_flag = vec![false; total];
    failed_flag[initial_agent] = true;
    let mut failed = vec![initial_agent as u32];
    let mut failed_per_cs = vec![0usize; n];
    failed_per_cs[system.cs_of(initial_agent)] = 1;
    let mut round = vec![0usize; n];
    round[system.cs_of(initial_agent)] = 1;
    let mut generations = vec![round];
    let mut frontier_start = 0;
    while frontier_start < failed.len() {
        let frontier_end = failed.len();
        let mut round = vec![0usize; n];
        for k in frontier_start..frontier_end {
            let a = failed[k] as usize;
            for &b in system.internal_neighbors(a) {
                let b = b as usize;
                if !failed_flag[b] && system.vulnerable[b] {
                    failed_flag[b] = true;
                    failed.push(b as u32);
                    round[system.cs_of(b)] += 1;
                }
            }
            let i = system.cs_of(a);
            for &b in system.external_dependents(a) {
                let b = b as usize;
                if failed_flag[b] {
                    continue;
                }
                let j = system.cs_of(b);
                if rng.random::<f64>() < system.infection[i][j] {
                    failed_flag[b] = true;
                    failed.push(b as u32);
                    round[j] += 1;
                }
            }
        }
        frontier_start = frontier_end;
        if round.iter().any(|&c| c > 0) {
            for (t, c) in failed_per_cs.iter_mut().zip(&round) {
                *t += c;
            }
            generations.push(round);
        }
    }
    Ok(CascadeOutcome {
        initial_agent,
        failed,
        failed_per_cs,
        generations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicConfig {
    pub sizes: Vec<usize>,
    /// A trial is an epidemic when at least `gamma * total agents` fail.
    pub gamma: f64,
    pub trials: u64,
    pub rng_seed: u64,
    /// CS of the uniformly chosen initial agent.
    pub seed_cs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u64,
    pub seed_agent: usize,
    pub failed_per_cs: Vec<usize>,
    pub generations: usize,
    pub epidemic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicReport {
    /// Fraction of trials that were epidemics; `count` is the epidemic count.
    pub estimate: ProportionEstimate,
    pub sizes: Vec<usize>,
    pub gamma: f64,
    pub seed_cs: usize,
    pub trials: Vec<TrialSummary>,
}

impl EpidemicReport {
    /// Tab-separated per-trial rows, preceded by a comment line with the
    /// configuration and seed.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let sizes: Vec<String> = self.sizes.iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "# rng_seed={} gamma={} sizes={} seed_cs={} trials={} epidemics={}",
            self.estimate.rng_seed,
            self.gamma,
            sizes.join(","),
            self.seed_cs,
            self.estimate.trials,
            self.estimate.count
        )
        .unwrap();
        let cols: Vec<String> = (0..self.sizes.len()).map(|i| format!("failed_cs{i}")).collect();
        writeln!(out, "trial\tseed_agent\t{}\tgenerations\tepidemic", cols.join("\t")).unwrap();
        for t in &self.trials {
            let f: Vec<String> = t.failed_per_cs.iter().map(ToString::to_string).collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                t.trial,
                t.seed_agent,
                f.join("\t"),
                t.generations,
                u8::from(t.epidemic)
            )
            .unwrap();
        }
        out
    }
}

/// Fraction of trials (fresh graph and uniform initial agent in `seed_cs`
/// each time) whose final failure count reaches `gamma` of all agents.
pub fn estimate_epidemic_probability(model: &SystemModel, cfg: &EpidemicConfig) -> Result<EpidemicReport, SimError> {
    if cfg.trials == 0 {
        return Err(SimError::InvalidConfig("trials must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.gamma) {
        return Err(SimError::InvalidConfig(format!("gamma {} outside [0, 1]", cfg.gamma)));
    }
    if cfg.seed_cs >= model.n_systems() {
        return Err(SimError::InvalidConfig(format!("seed CS {} out of range", cfg.seed_cs)));
    }
    if cfg.sizes.get(cfg.seed_cs) == Some(&0) {
        return Err(SimError::InvalidConfig("seed CS has no agents".into()));
    }
    let total: usize = cfg.sizes.iter().sum();
    let threshold = cfg.gamma * total as f64;
    let rows: Vec<TrialSummary> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialSummary, SimError> {
            let mut rng = trial_rng(cfg.rng_seed, trial);
            let system = generate_with_rng(model, &cfg.sizes, &mut rng)?;
            let range = system.agents_of(cfg.seed_cs);
            let seed_agent = rng.random_range(range);
            let out = run_cascade_with_rng(&system, seed_agent, &mut rng)?;
            Ok(TrialSummary {
                trial,
                seed_agent,
                epidemic: out.total_failed() as f64 >= threshold,
                generations: out.generations.len() - 1,
                failed_per_cs: out.failed_per_cs,
            })
        })
        .collect::<Result<_, _>>()?;
    let epidemics = rows.iter().filter(|r| r.epidemic).count() as u64;
    Ok(EpidemicReport {
        estimate: ProportionEstimate::new(epidemics, cfg.trials, cfg.rng_seed),
        sizes: cfg.sizes.clone(),
        gamma: cfg.gamma,
        seed_cs: cfg.seed_cs,
        trials: rows,
    })
}
