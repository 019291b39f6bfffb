//! Reports behind the CLI commands, as serializable structs with
//! human-readable renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::branching::{
    extinction_by_generation, extinction_from_children, is_positively_regular, mean_matrix, BranchingError,
    PoEVector, Regime, SolverOptions,
};
use crate::children::{children_distributions, model_satisfies_phi_assumption, ChildrenError};
use crate::model::{is_independent, marginal, JointPmf, Mode, SystemModel, EQUALITY_TOLERANCE};
use crate::orders::{
    certify_idcv_with, certify_supermodular_with, compare_concordance, compare_icv, compare_lt, LpOptions, OrderError,
    OrderVerdict, Outcome, Witness,
};
use crate::simulate::{BranchingSimReport, EpidemicReport};

/// Slack for componentwise PoE inequalities.
pub const POE_SLACK: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Branching(#[from] BranchingError),
    #[error(transparent)]
    Children(#[from] ChildrenError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("models are not comparable: {0}")]
    Incomparable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub model: String,
    pub n_systems: usize,
    pub mode: Mode,
    pub mu: Vec<f64>,
    /// `1 - mu_i` for a first failure in CS `i`.
    pub pocf: Vec<f64>,
    pub spectral_radius: f64,
    pub regime: Regime,
    pub positively_regular: bool,
    pub iterations: usize,
    pub residual: f64,
    pub mean_matrix: Vec<Vec<f64>>,
    pub structural_issues: Vec<String>,
}

pub fn solve_report(name: &str, model: &SystemModel, opts: &SolverOptions) -> Result<SolveReport, ReportError> {
    let children = children_distributions(model)?;
    let m = mean_matrix(&children)?;
    let poe = extinction_from_children(&children, opts)?;
    let n = model.n_systems();
    Ok(SolveReport {
        model: name.to_owned(),
        n_systems: n,
        mode: model.mode(),
        pocf: (0..n).map(|i| poe.cascade_probability(i)).collect(),
        mu: poe.mu,
        spectral_radius: poe.spectral_radius,
        regime: poe.regime,
        positively_regular: is_positively_regular(&m),
        iterations: poe.iterations,
        residual: poe.residual,
        structural_issues: m.structural_issues(),
        mean_matrix: m.rows(),
    })
}

fn type_label(t: usize, n: usize) -> String {
    if t < n {
        format!("{}", t + 1)
    } else {
        format!("{}+", t - n + 1)
    }
}

fn fmt_row(values: &[f64], digits: usize) -> String {
    values.iter().map(|v| format!("{v:>9.digits$}")).collect::<Vec<_>>().join(" ")
}

impl SolveReport {
    pub fn render_human(&self) -> String {
        let n = self.n_systems;
        let labels: Vec<String> = (0..2 * n).map(|t| format!("{:>9}", type_label(t, n))).collect();
        let mut out = String::new();
        writeln!(out, "model: {}  ({} systems, {} mode)", self.model, n, mode_name(self.mode)).unwrap();
        match self.regime {
            Regime::Subcritical => writeln!(out, "SUBCRITICAL: rho(M) < 1, extinction is certain").unwrap(),
            Regime::Critical if self.mu.iter().all(|&m| m == 1.0) => {
                writeln!(out, "CRITICAL: rho(M) = 1 within tolerance, extinction is certain").unwrap()
            }
            Regime::Critical => {
                writeln!(out, "CRITICAL: rho(M) = 1 within tolerance, a singular class survives").unwrap()
            }
            Regime::Supercritical => {}
        }
        writeln!(out, "rho(M) = {:.6}  positively regular: {}", self.spectral_radius, self.positively_regular)
            .unwrap();
        writeln!(out, "mean matrix M (row = parent type):").unwrap();
        writeln!(out, "      {}", labels.join(" ")).unwrap();
        for (t, row) in self.mean_matrix.iter().enumerate() {
            writeln!(out, "{:>5} {}", type_label(t, n), fmt_row(row, 4)).unwrap();
        }
        writeln!(out, "type  {}", labels.join(" ")).unwrap();
        writeln!(out, "mu    {}", fmt_row(&self.mu, 6)).unwrap();
        for (i, p) in self.pocf.iter().enumerate() {
            writeln!(out, "PoCF (first failure in CS {}) = {:.6}", i + 1, p).unwrap();
        }
        writeln!(out, "iterations: {}  residual: {:.3e}", self.iterations, self.residual).unwrap();
        for issue in &self.structural_issues {
            writeln!(out, "warning: {issue}").unwrap();
        }
        out
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Degree => "degree",
        Mode::Children => "children",
    }
}

/// Both directions of one order between corresponding laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderPair {
    /// What is compared, e.g. `CS 1 external degree to CS 2`.
    pub subject: String,
    pub left_le_right: OrderVerdict,
    pub right_le_left: OrderVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdersReport {
    pub left: String,
    pub right: String,
    pub pairs: Vec<OrderPair>,
}

fn pair(subject: String, a: OrderVerdict, b: OrderVerdict) -> OrderPair {
    OrderPair {
        subject,
        left_le_right: a,
        right_le_left: b,
    }
}

fn check_comparable(left: &SystemModel, right: &SystemModel) -> Result<(), ReportError> {
    if left.n_systems() != right.n_systems() {
        return Err(ReportError::Incomparable(format!(
            "{} vs {} systems",
            left.n_systems(),
            right.n_systems()
        )));
    }
    Ok(())
}

fn axis_name(cs: usize, axis: usize) -> String {
    if cs == axis {
        format!("CS {} internal degree", cs + 1)
    } else {
        format!("CS {} degree to CS {}", cs + 1, axis + 1)
    }
}

/// Every order between corresponding degree laws (marginals and joints) and
/// between corresponding children laws, in both directions.
pub fn orders_report(
    names: (&str, &str),
    left: &SystemModel,
    right: &SystemModel,
    lp: &LpOptions,
) -> Result<OrdersReport, ReportError> {
    check_comparable(left, right)?;
    let n = left.n_systems();
    let mut pairs = Vec::new();
    for cs in 0..n {
        let (x, y) = (left.degree_dist(cs), right.degree_dist(cs));
        for axis in 0..n {
            let (mx, my) = (marginal(x, axis).map_err(OrderError::from)?, marginal(y, axis).map_err(OrderError::from)?);
            pairs.push(pair(
                format!("{} (icv)", axis_name(cs, axis)),
                compare_icv(&mx, &my),
                compare_icv(&my, &mx),
            ));
        }
        let label = format!("CS {} degree vector", cs + 1);
        pairs.push(pair(
            format!("{label} (concordance)"),
            compare_concordance(x, y)?,
            compare_concordance(y, x)?,
        ));
        pairs.push(pair(
            format!("{label} (supermodular)"),
            certify_supermodular_with(x, y, lp)?,
            certify_supermodular_with(y, x, lp)?,
        ));
        pairs.push(pair(
            format!("{label} (idcv)"),
            certify_idcv_with(x, y, lp)?,
            certify_idcv_with(y, x, lp)?,
        ));
    }
    let (hl, hr) = (children_distributions(left)?, children_distributions(right)?);
    for t in 0..2 * n {
        pairs.push(pair(
            format!("children of type {} (laplace)", type_label(t, n)),
            compare_lt(&hl[t], &hr[t], None)?,
            compare_lt(&hr[t], &hl[t], None)?,
        ));
    }
    Ok(OrdersReport {
        left: names.0.to_owned(),
        right: names.1.to_owned(),
        pairs,
    })
}

fn verdict_cell(v: &OrderVerdict) -> String {
    let method = serde_json::to_value(v.method).ok().and_then(|m| m.as_str().map(str::to_owned)).unwrap_or_default();
    match &v.outcome {
        Outcome::Holds => format!("holds [{method}]"),
        Outcome::Fails { witness } => format!("fails [{method}] {}", witness_summary(witness)),
        Outcome::Inconclusive { .. } => format!("inconclusive [{method}]"),
    }
}

fn witness_summary(w: &Witness) -> String {
    match w {
        Witness::Cdf { t, lhs, rhs } => format!("F_X({t})={lhs:.5} < F_Y({t})={rhs:.5}"),
        Witness::IntegratedCdf { k, lhs, rhs } => format!("sum F_X up to {k} = {lhs:.5} < {rhs:.5}"),
        Witness::Marginal { axis, t, lhs, rhs } => format!("marginal {axis} cdf at {t}: {lhs:.5} vs {rhs:.5}"),
        Witness::MarginalIntegratedCdf { axis, k, lhs, rhs } => {
            format!("marginal {axis} sum F up to {k}: {lhs:.5} < {rhs:.5}")
        }
        Witness::LowerOrthant { t, lhs, rhs } => format!("P(X<={t:?})={lhs:.5} > {rhs:.5}"),
        Witness::UpperOrthant { t, lhs, rhs } => format!("P(X>{t:?})={lhs:.5} > {rhs:.5}"),
        Witness::TestFunction { points, lhs, rhs, .. } => {
            format!("test function on {} points: E xi(X)={lhs:.6} > E xi(Y)={rhs:.6}", points.len())
        }
        Witness::Laplace { s, lhs, rhs } => format!("s={s:?}: {lhs:.6} < {rhs:.6}"),
        Witness::Covariance { i, j, lhs, rhs } => format!("Cov({i},{j}) {lhs:.5} > {rhs:.5}"),
    }
}

impl OrdersReport {
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        writeln!(out, "X = {}, Y = {}", self.left, self.right).unwrap();
        for p in &self.pairs {
            writeln!(out, "{}", p.subject).unwrap();
            writeln!(out, "  X <= Y: {}", verdict_cell(&p.left_le_right)).unwrap();
            writeln!(out, "  Y <= X: {}", verdict_cell(&p.right_le_left)).unwrap();
        }
        out
    }
}

/// Hypotheses of the comparison results, each tied to an implied PoE
/// inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// Independent degree coordinates, every marginal smaller in icv:
    /// the more variable side has the larger PoE.
    VariabilitySsd,
    /// Bivariate degrees with equal marginals ordered in concordance: the
    /// more positively dependent side has the larger PoE.
    DependenceConcordance,
    /// Degree vectors ordered supermodularly: larger PoE on the larger side.
    Supermodular,
    /// Degree vectors ordered in idcv: larger PoE on the smaller side.
    Idcv,
    /// Children laws ordered in Laplace transform: larger PoE on the smaller
    /// side.
    LaplaceTransform,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Self::VariabilitySsd => "variability-ssd",
            Self::DependenceConcordance => "dependence-concordance",
            Self::Supermodular => "supermodular",
            Self::Idcv => "idcv",
            Self::LaplaceTransform => "laplace-transform",
        }
    }

    /// Whether `X <= Y` implies `mu(X) <= mu(Y)` (else `mu(Y) <= mu(X)`).
    fn poe_increases(self) -> bool {
        matches!(self, Self::DependenceConcordance | Self::Supermodular)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusionCheck {
    pub hypothesis: Hypothesis,
    /// `left <= right` or `right <= left`.
    pub direction: String,
    /// Whether the order held for every system.
    pub order_holds: bool,
    /// Further conditions (shared parameters, independence, vulnerability
    /// shape); the implication is only claimed when these are met.
    pub premises_met: bool,
    pub notes: Vec<String>,
    /// The implied inequality, e.g. `mu(right) <= mu(left)`.
    pub implied: String,
    /// `Some(ok)` when the order and premises hold.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub left: String,
    pub right: String,
    pub poe_left: PoEVector,
    pub poe_right: PoEVector,
    pub orders: OrdersReport,
    pub conclusions: Vec<ConclusionCheck>,
}

/// `a <= b` componentwise with [`POE_SLACK`].
pub fn poe_le(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= *y + POE_SLACK)
}

fn shared_parameters(left: &SystemModel, right: &SystemModel) -> Vec<String> {
    let mut notes = Vec::new();
    if left.mode() != right.mode() {
        notes.push("modes differ".to_owned());
    }
    let n = left.n_systems();
    let q_same = (0..n).all(|i| (0..n).all(|j| i == j || (left.infection(i, j) - right.infection(i, j)).abs() <= EQUALITY_TOLERANCE));
    if !q_same {
        notes.push("infection matrices differ".to_owned());
    }
    if left.mode() == Mode::Degree && left.vulnerabilities() != right.vulnerabilities() {
        notes.push("vulnerability profiles differ".to_owned());
    }
    notes
}

fn phi_assumption(model: &SystemModel) -> Result<bool, ReportError> {
    Ok(model.mode() == Mode::Children || model_satisfies_phi_assumption(model)?)
}

pub fn compare_report(
    names: (&str, &str),
    left: &SystemModel,
    right: &SystemModel,
    solver: &SolverOptions,
    lp: &LpOptions,
) -> Result<CompareReport, ReportError> {
    check_comparable(left, right)?;
    let n = left.n_systems();
    let poe_left = extinction_from_children(&children_distributions(left)?, solver)?;
    let poe_right = extinction_from_children(&children_distributions(right)?, solver)?;
    let orders = orders_report(names, left, right, lp)?;
    let shared = shared_parameters(left, right);
    let phi_ok = phi_assumption(left)? && phi_assumption(right)?;
    let independent = (0..n).all(|i| {
        is_independent(left.degree_dist(i), EQUALITY_TOLERANCE) && is_independent(right.degree_dist(i), EQUALITY_TOLERANCE)
    });
    let all = |forward: bool, pred: &dyn Fn(&str) -> bool| -> bool {
        let matching: Vec<&OrderPair> = orders.pairs.iter().filter(|p| pred(&p.subject)).collect();
        !matching.is_empty()
            && matching.iter().all(|p| {
                if forward {
                    p.left_le_right.is_holds()
                } else {
                    p.right_le_left.is_holds()
                }
            })
    };
    let mut conclusions = Vec::new();
    for hypothesis in [
        Hypothesis::VariabilitySsd,
        Hypothesis::DependenceConcordance,
        Hypothesis::Supermodular,
        Hypothesis::Idcv,
        Hypothesis::LaplaceTransform,
    ] {
        for forward in [true, false] {
            let subject_tag = match hypothesis {
                Hypothesis::VariabilitySsd => "(icv)",
                Hypothesis::DependenceConcordance => "(concordance)",
                Hypothesis::Supermodular => "(supermodular)",
                Hypothesis::Idcv => "(idcv)",
                Hypothesis::LaplaceTransform => "(laplace)",
            };
            let order_holds = all(forward, &|s: &str| s.ends_with(subject_tag));
            let mut notes = shared.clone();
            match hypothesis {
                Hypothesis::VariabilitySsd if !independent => {
                    notes.push("degree coordinates are not independent".to_owned())
                }
                Hypothesis::DependenceConcordance if n != 2 => notes.push("needs two systems".to_owned()),
                Hypothesis::Supermodular | Hypothesis::Idcv if !phi_ok => {
                    notes.push("phi*(d) = d phi(d) is not non-decreasing and concave".to_owned())
                }
                _ => {}
            }
            let premises_met = notes.is_empty();
            let (small, large) = if forward { ("left", "right") } else { ("right", "left") };
            let (a, b, mu_a, mu_b) = if hypothesis.poe_increases() {
                (small, large, poe_of(forward, &poe_left, &poe_right).0, poe_of(forward, &poe_left, &poe_right).1)
            } else {
                (large, small, poe_of(forward, &poe_left, &poe_right).1, poe_of(forward, &poe_left, &poe_right).0)
            };
            conclusions.push(ConclusionCheck {
                hypothesis,
                direction: format!("{small} <= {large}"),
                order_holds,
                premises_met,
                notes,
                implied: format!("mu({a}) <= mu({b})"),
                satisfied: (order_holds && premises_met).then(|| poe_le(mu_a, mu_b)),
            });
        }
    }
    Ok(CompareReport {
        left: names.0.to_owned(),
        right: names.1.to_owned(),
        poe_left,
        poe_right,
        orders,
        conclusions,
    })
}

/// `(mu of the smaller side, mu of the larger side)`.
fn poe_of<'a>(forward: bool, left: &'a PoEVector, right: &'a PoEVector) -> (&'a [f64], &'a [f64]) {
    if forward {
        (&left.mu, &right.mu)
    } else {
        (&right.mu, &left.mu)
    }
}

impl CompareReport {
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        writeln!(out, "left  = {}: mu = {}", self.left, fmt_row(&self.poe_left.mu, 6)).unwrap();
        writeln!(out, "right = {}: mu = {}", self.right, fmt_row(&self.poe_right.mu, 6)).unwrap();
        writeln!(out).unwrap();
        writeln!(out, "{:<24} {:<15} {:>6} {:>9} {:<24} check", "hypothesis", "direction", "order", "premises", "implied")
            .unwrap();
        for c in &self.conclusions {
            let check = match c.satisfied {
                Some(true) => "confirmed".to_owned(),
                Some(false) => "VIOLATED".to_owned(),
                None => "-".to_owned(),
            };
            writeln!(
                out,
                "{:<24} {:<15} {:>6} {:>9} {:<24} {}",
                c.hypothesis.name(),
                c.direction,
                if c.order_holds { "holds" } else { "no" },
                if c.premises_met { "met" } else { "not met" },
                c.implied,
                check
            )
            .unwrap();
            for note in &c.notes {
                writeln!(out, "    note: {note}").unwrap();
            }
        }
        writeln!(out).unwrap();
        out.push_str(&self.orders.render_human());
        out
    }
}

/// Branching simulation with the analytic value and the exact bias of the
/// generation cap, `mu - P(extinct by generation cap)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchingSimSummary {
    pub model: String,
    #[serde(flatten)]
    pub sim: BranchingSimReport,
    pub analytic_mu: f64,
    pub extinct_by_generation_cap: f64,
    pub generation_cap_bias: f64,
    /// Upper bound on the extinction probability of a run stopped at the
    /// population cap: `max_t mu_t ^ population_cap`.
    pub population_cap_bias_bound: f64,
    pub analytic_in_ci: bool,
}

pub fn branching_sim_summary(
    name: &str,
    model: &SystemModel,
    sim: BranchingSimReport,
) -> Result<BranchingSimSummary, ReportError> {
    let children = children_distributions(model)?;
    let poe = extinction_from_children(&children, &SolverOptions::default())?;
    let by_cap = extinction_by_generation(&children, sim.generation_cap)?;
    let s_cap = by_cap[sim.generation_cap][sim.seed_type];
    let mu = poe.mu[sim.seed_type];
    let worst = poe.mu.iter().copied().fold(0.0, f64::max);
    Ok(BranchingSimSummary {
        model: name.to_owned(),
        analytic_mu: mu,
        extinct_by_generation_cap: s_cap,
        generation_cap_bias: mu - s_cap,
        population_cap_bias_bound: worst.powf(sim.population_cap as f64),
        analytic_in_ci: sim.estimate.contains(mu),
        sim,
    })
}

impl BranchingSimSummary {
    pub fn render_human(&self) -> String {
        let e = &self.sim.estimate;
        let mut out = String::new();
        writeln!(out, "model: {}  seed type: {}  rng seed: {}", self.model, self.sim.seed_type, e.rng_seed).unwrap();
        writeln!(out, "trials: {}  extinct: {}", e.trials, e.count).unwrap();
        writeln!(out, "extinction estimate: {:.6}  95% CI [{:.6}, {:.6}]", e.estimate, e.ci_low, e.ci_high).unwrap();
        writeln!(out, "analytic mu: {:.6}  inside CI: {}", self.analytic_mu, self.analytic_in_ci).unwrap();
        writeln!(
            out,
            "caps: {} generations ({} hits), {} alive ({} hits)",
            self.sim.generation_cap, self.sim.generation_cap_hits, self.sim.population_cap, self.sim.population_cap_hits
        )
        .unwrap();
        writeln!(
            out,
            "cap bias: generation {:.3e}, population <= {:.3e}",
            self.generation_cap_bias, self.population_cap_bias_bound
        )
        .unwrap();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicSummary {
    pub model: String,
    #[serde(flatten)]
    pub sim: EpidemicReport,
    pub analytic_pocf: f64,
}

pub fn epidemic_summary(name: &str, model: &SystemModel, sim: EpidemicReport) -> Result<EpidemicSummary, ReportError> {
    let poe = extinction_from_children(&children_distributions(model)?, &SolverOptions::default())?;
    Ok(EpidemicSummary {
        model: name.to_owned(),
        analytic_pocf: poe.cascade_probability(sim.seed_cs),
        sim,
    })
}

impl EpidemicSummary {
    pub fn render_human(&self) -> String {
        let e = &self.sim.estimate;
        let sizes: Vec<String> = self.sim.sizes.iter().map(ToString::to_string).collect();
        let mut out = String::new();
        writeln!(out, "model: {}  sizes: {}  gamma: {}  rng seed: {}", self.model, sizes.join(","), self.sim.gamma, e.rng_seed)
            .unwrap();
        writeln!(out, "trials: {}  epidemics: {}", e.trials, e.count).unwrap();
        writeln!(out, "epidemic frequency: {:.6}  95% CI [{:.6}, {:.6}]", e.estimate, e.ci_low, e.ci_high).unwrap();
        writeln!(out, "branching-process PoCF (CS {}): {:.6}", self.sim.seed_cs + 1, self.analytic_pocf).unwrap();
        out
    }
}

/// Two-system degree law as a table: rows are the external degree, columns
/// the internal degree.
pub fn degree_table(law: &JointPmf, internal_axis: usize) -> String {
    let external_axis = 1 - internal_axis;
    let (ci, ce) = (law.max_degree(internal_axis), law.max_degree(external_axis));
    let mut out = String::new();
    write!(out, "     ").unwrap();
    for d in 0..=ci {
        write!(out, " {d:>8}").unwrap();
    }
    writeln!(out).unwrap();
    for e in 0..=ce {
        write!(out, "{e:>5}").unwrap();
        for d in 0..=ci {
            let mut v = vec![0u32; 2];
            v[internal_axis] = d;
            v[external_axis] = e;
            write!(out, " {:>8.5}", law.mass(&v)).unwrap();
        }
        writeln!(out).unwrap();
    }
    out
}
