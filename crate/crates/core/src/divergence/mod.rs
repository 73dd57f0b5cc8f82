//! Statistical divergences between behaviors and the distance from a
//! behavior to the local polytope.
//!
//! The behavior distance is the average over all τ joint settings of a
//! per-setting divergence `D(p_m, q_m)`. Its minimum over local behaviors is
//! found with an exact linear program for total variation and with
//! away-step conditional gradient for KL. The averaged infidelity is not
//! convex; it gets a majorize-minimize search and a TV floor. Every result
//! carries a lower bound that downstream code consumes instead of the primal
//! value.

pub mod atoms;
pub mod frank_wolfe;

use std::f64::consts::LN_2;
use std::fmt;

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::inequality::BellFunctional;
use crate::scenario::{Behavior, Scenario, DEFAULT_VERTEX_CAP, NORMALIZATION_TOL};
pub use atoms::{AtomSet, AtomSource};
pub use frank_wolfe::{frank_wolfe_minimize, FnObjective, FwOptions, FwResult, Objective};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivergenceKind {
    /// Total variation `½ Σ |p - q|`.
    #[serde(rename = "TV")]
    Tv,
    /// Relative entropy `Σ p log₂(p/q)` in bits.
    #[serde(rename = "KL_BITS")]
    KlBits,
    /// `√(1 - F²)` with classical fidelity `F = Σ √(p q)`.
    #[serde(rename = "INFIDELITY")]
    Infidelity,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 3] = [
        DivergenceKind::Tv,
        DivergenceKind::KlBits,
        DivergenceKind::Infidelity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::Tv => "TV",
            DivergenceKind::KlBits => "KL_BITS",
            DivergenceKind::Infidelity => "INFIDELITY",
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_distribution(p: &[f64], label: &str) -> Result<()> {
    if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidDistribution(format!("{label} has entry {v}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution(format!("{label} sums to {sum}")));
    }
    Ok(())
}

/// Per-setting divergence between two distributions.
///
/// KL returns `+∞` when some `q_a = 0 < p_a`; terms with `p_a = 0` vanish.
pub fn divergence(kind: DivergenceKind, p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    Ok(divergence_unchecked(kind, p, q))
}

pub(crate) fn divergence_unchecked(kind: DivergenceKind, p: &[f64], q: &[f64]) -> f64 {
    match kind {
        DivergenceKind::Tv => 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>(),
        DivergenceKind::KlBits => {
            let mut total = 0.0;
            for (&a, &b) in p.iter().zip(q) {
                if a > 0.0 {
                    if b <= 0.0 {
                        return f64::INFINITY;
                    }
                    total += a * (a / b).ln();
                }
            }
            (total / LN_2).max(0.0)
        }
        DivergenceKind::Infidelity => {
            let fid = fidelity(p, q);
            (1.0 - fid * fid).max(0.0).sqrt()
        }
    }
}

fn fidelity(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt())
        .sum::<f64>()
        .min(1.0)
}

fn same_scenario(p: &Behavior, q: &Behavior) -> Result<()> {
    if p.scenario() != q.scenario() {
        return Err(Error::ScenarioMismatch(
            "behaviors are defined on different scenarios".into(),
        ));
    }
    Ok(())
}

/// `(1/τ) Σ_m D(p_m, q_m)`.
pub fn aggregate_distance(kind: DivergenceKind, p: &Behavior, q: &Behavior) -> Result<f64> {
    same_scenario(p, q)?;
    Ok(aggregate_tables(kind, p.scenario(), p.table(), q.table()))
}

fn aggregate_tables(kind: DivergenceKind, scenario: &Scenario, p: &[f64], q: &[f64]) -> f64 {
    let tau = scenario.joint_settings();
    let total: f64 = (0..tau)
        .map(|s| {
            let r = scenario.setting_range(s);
            divergence_unchecked(kind, &p[r.clone()], &q[r])
        })
        .sum();
    total / tau as f64
}

/// Aggregated smooth divergence as a function of the candidate table.
struct AggregateObjective<'a> {
    kind: DivergenceKind,
    scenario: &'a Scenario,
    p: &'a [f64],
}

impl Objective for AggregateObjective<'_> {
    fn value(&self, q: &[f64]) -> f64 {
        aggregate_tables(self.kind, self.scenario, self.p, q)
    }

    fn gradient(&self, q: &[f64], grad: &mut [f64]) {
        let tau = self.scenario.joint_settings() as f64;
        match self.kind {
            DivergenceKind::KlBits => {
                for ((g, &a), &b) in grad.iter_mut().zip(self.p).zip(q) {
                    *g = if a > 0.0 { -a / (b * LN_2 * tau) } else { 0.0 };
                }
            }
            DivergenceKind::Infidelity => {
                for s in 0..self.scenario.joint_settings() {
                    let r = self.scenario.setting_range(s);
                    let (ps, qs) = (&self.p[r.clone()], &q[r.clone()]);
                    let fid = fidelity(ps, qs);
                    let infid = (1.0 - fid * fid).max(0.0).sqrt();
                    for ((g, &a), &b) in grad[r].iter_mut().zip(ps).zip(qs) {
                        // zero is a subgradient at the kink q_m = p_m
                        *g = if a > 0.0 && infid > 0.0 {
                            -(fid / infid) * a.sqrt() / (2.0 * b.sqrt() * tau)
                        } else {
                            0.0
                        };
                    }
                }
            }
            DivergenceKind::Tv => unreachable!("total variation is solved as a linear program"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DistanceOptions {
    /// Target duality gap for the iterative solvers.
    pub tol: f64,
    pub max_iter: usize,
    pub vertex_cap: usize,
    pub away_steps: bool,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            tol: 1e-7,
            max_iter: 200_000,
            vertex_cap: DEFAULT_VERTEX_CAP,
            away_steps: true,
        }
    }
}

/// Minimal behavior distance to a local set together with its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult {
    pub kind: DivergenceKind,
    /// Distance at the returned local point (an upper bound on the minimum).
    pub primal: f64,
    /// A lower bound on the minimum. For TV it is the value of a dual point,
    /// for KL `max(0, primal - gap)`, and for infidelity the TV minimum,
    /// since IF ≥ TV per setting.
    pub certified_lower: f64,
    /// The conditional-gradient gap for KL, `primal - certified_lower`
    /// otherwise.
    pub gap: f64,
    /// Conditional-gradient iterations. Always 0 for TV, whose LP solver
    /// does not report a count.
    pub iterations: usize,
    pub converged: bool,
    /// Weights over the deterministic vertices in canonical order.
    pub weights: Vec<f64>,
}

impl DistanceResult {
    /// The local behavior the primal value was measured at.
    pub fn local_point(&self, scenario: &Scenario) -> Result<Behavior> {
        Behavior::mixture(scenario, &self.sparse_weights())
    }

    pub fn sparse_weights(&self) -> Vec<(usize, f64)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, &w)| (v, w))
            .collect()
    }
}

#[derive(Serialize)]
struct SparseWeight {
    vertex: usize,
    weight: f64,
}

impl Serialize for DistanceResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let weights: Vec<SparseWeight> = self
            .sparse_weights()
            .into_iter()
            .map(|(vertex, weight)| SparseWeight { vertex, weight })
            .collect();
        let mut st = serializer.serialize_struct("DistanceResult", 7)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("primal", &self.primal)?;
        st.serialize_field("certified_lower", &self.certified_lower)?;
        st.serialize_field("gap", &self.gap)?;
        st.serialize_field("iterations", &self.iterations)?;
        st.serialize_field("converged", &self.converged)?;
        st.serialize_field("weights", &weights)?;
        st.end()
    }
}

/// `min_{Q ∈ L} (1/τ) Σ_m D(p_m, q_m)` over the local polytope `L`.
pub fn distance_to_local(
    behavior: &Behavior,
    kind: DivergenceKind,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    let atoms = AtomSet::local_polytope(behavior.scenario(), opts.vertex_cap)?;
    distance_to_atoms(behavior, kind, &atoms, opts)
}

/// Distance to the local behaviors that also satisfy `β(Q) ≤ bound` for the
/// given functional.
pub fn distance_to_restricted_local(
    behavior: &Behavior,
    kind: DivergenceKind,
    functional: &BellFunctional,
    bound: f64,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    if functional.scenario() != behavior.scenario() {
        return Err(Error::ScenarioMismatch(
            "functional and behavior are defined on different scenarios".into(),
        ));
    }
    let atoms = AtomSet::restricted_local_polytope(
        behavior.scenario(),
        &functional.dense_coefficients(),
        bound,
        opts.vertex_cap,
    )?;
    distance_to_atoms(behavior, kind, &atoms, opts)
}

/// Minimizes the aggregated divergence over `conv(atoms)`.
pub fn distance_to_atoms(
    behavior: &Behavior,
    kind: DivergenceKind,
    atoms: &AtomSet,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if atoms.dim() != behavior.scenario().num_entries() {
        return Err(Error::LengthMismatch(
            atoms.dim(),
            behavior.scenario().num_entries(),
        ));
    }
    let violations = behavior.validate();
    if let Some(v) = violations.first() {
        return Err(Error::InvalidBehavior(v.to_string()));
    }
    match kind {
        DivergenceKind::Tv => tv_distance(behavior, atoms),
        DivergenceKind::KlBits | DivergenceKind::Infidelity => {
            smooth_distance(behavior, kind, atoms, opts)
        }
    }
}

fn clean_weights(mut weights: Vec<f64>) -> Vec<f64> {
    for w in weights.iter_mut() {
        if *w < 1e-15 {
            *w = 0.0;
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

fn primal_at(behavior: &Behavior, kind: DivergenceKind, weights: &[f64]) -> Result<f64> {
    let q = Behavior::mixture(
        behavior.scenario(),
        &weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, &w)| (v, w))
            .collect::<Vec<_>>(),
    )?;
    aggregate_distance(kind, behavior, &q)
}

/// Total variation as a linear program in the atom weights `w` and the split
/// residuals `u, v ≥ 0` with `Σ_a w_a atom_a - u + v = p`, `Σ w = 1`.
///
/// The lower bound comes from solving the dual separately,
///
/// ```text
/// maximize  y·p - t   subject to  y·atom_a ≤ t,  |y_e| ≤ 1/(2τ)
/// ```
///
/// and re-evaluating `y·p - max_a y·atom_a` at the returned `y`, which is a
/// valid lower bound for any `y` in the box whether or not it is optimal.
fn tv_distance(behavior: &Behavior, atoms: &AtomSet) -> Result<DistanceResult> {
    let p = behavior.table();
    let dim = atoms.dim();
    let n_atoms = atoms.len();
    let scale = 1.0 / (2.0 * behavior.scenario().joint_settings() as f64);
    let solver_err = |e: minilp::Error| Error::Solver(format!("total variation LP: {e}"));

    let mut primal_lp = Problem::new(OptimizationDirection::Minimize);
    let w: Vec<_> = (0..n_atoms)
        .map(|_| primal_lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let mut rows: Vec<LinearExpr> = (0..dim).map(|_| LinearExpr::empty()).collect();
    let mut simplex_row = LinearExpr::empty();
    for (a, &wa) in w.iter().enumerate() {
        let (idx, val) = atoms.atom(a);
        for (&e, &x) in idx.iter().zip(val) {
            rows[e].add(wa, x);
        }
        simplex_row.add(wa, 1.0);
    }
    for (e, mut row) in rows.into_iter().enumerate() {
        row.add(primal_lp.add_var(scale, (0.0, f64::INFINITY)), -1.0);
        row.add(primal_lp.add_var(scale, (0.0, f64::INFINITY)), 1.0);
        primal_lp.add_constraint(row, ComparisonOp::Eq, p[e]);
    }
    primal_lp.add_constraint(simplex_row, ComparisonOp::Eq, 1.0);
    let sol = primal_lp.solve().map_err(solver_err)?;

    let mut dual_lp = Problem::new(OptimizationDirection::Maximize);
    let y: Vec<_> = p
        .iter()
        .map(|&pe| dual_lp.add_var(pe, (-scale, scale)))
        .collect();
    let t = dual_lp.add_var(-1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for a in 0..n_atoms {
        let (idx, val) = atoms.atom(a);
        let mut row = LinearExpr::empty();
        for (&e, &x) in idx.iter().zip(val) {
            row.add(y[e], x);
        }
        row.add(t, -1.0);
        dual_lp.add_constraint(row, ComparisonOp::Le, 0.0);
    }
    let dual = dual_lp.solve().map_err(solver_err)?;

    let atom_weights = clean_weights(w.iter().map(|&v| *sol.var_value(v)).collect());
    let weights = clean_weights(atoms.vertex_weights(&atom_weights));
    let primal = primal_at(behavior, DivergenceKind::Tv, &weights)?;

    let y: Vec<f64> = y
        .iter()
        .map(|&v| dual.var_value(v).clamp(-scale, scale))
        .collect();
    let yp: f64 = y.iter().zip(p).map(|(a, b)| a * b).sum();
    let best = (0..n_atoms)
        .map(|a| atoms.dot(a, &y))
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = (yp - best).max(0.0).min(primal);

    Ok(DistanceResult {
        kind: DivergenceKind::Tv,
        primal,
        certified_lower: lower,
        gap: primal - lower,
        iterations: 0,
        converged: true,
        weights,
    })
}

/// `-(1/τ) Σ_m λ_m F(p_m, q_m)`, convex in `q`.
struct WeightedFidelity<'a> {
    scenario: &'a Scenario,
    p: &'a [f64],
    lambda: &'a [f64],
}

impl Objective for WeightedFidelity<'_> {
    fn value(&self, q: &[f64]) -> f64 {
        let tau = self.scenario.joint_settings();
        let total: f64 = (0..tau)
            .map(|s| {
                let r = self.scenario.setting_range(s);
                self.lambda[s] * fidelity(&self.p[r.clone()], &q[r])
            })
            .sum();
        -total / tau as f64
    }

    fn gradient(&self, q: &[f64], grad: &mut [f64]) {
        let tau = self.scenario.joint_settings();
        for s in 0..tau {
            let r = self.scenario.setting_range(s);
            for e in r {
                let a = self.p[e];
                grad[e] = if a > 0.0 {
                    -self.lambda[s] * a.sqrt() / (2.0 * q[e].sqrt() * tau as f64)
                } else {
                    0.0
                };
            }
        }
    }
}

const MM_MAX_STEPS: usize = 60;
const MM_MAX_STARTS: usize = 16;
const MM_SACRIFICE: f64 = 0.01;
const MM_LAMBDA_CAP: f64 = 1e8;
const MM_SUBPROBLEM_TOL: f64 = 1e-6;
const MM_PROGRESS: f64 = 1e-9;
const MM_SUBPROBLEM_ITER: usize = 500;

/// Searches for the minimum of the averaged infidelity, which is not convex.
///
/// In terms of the per-setting fidelities `f_m` the objective
/// `Σ √(1 - f_m²)` is concave and decreasing, and the achievable fidelity
/// vectors form a convex set. Linearizing at the current point gives the
/// convex problem `max Σ λ_m F_m` with `λ_m = f_m / √(1 - f_m²)`, whose
/// solution never increases the objective. Starts favor every setting
/// equally or all but one.
fn infidelity_search(
    behavior: &Behavior,
    atoms: &AtomSet,
    fw_opts: &FwOptions,
) -> Result<(Vec<f64>, usize)> {
    let scenario = behavior.scenario();
    let p = behavior.table();
    let tau = scenario.joint_settings();
    let n = atoms.len();
    let evaluate = |x: &[f64]| aggregate_tables(DivergenceKind::Infidelity, scenario, p, x);

    let mut starts = vec![vec![1.0; tau]];
    for m in 0..tau.min(MM_MAX_STARTS) {
        let mut lambda = vec![1.0; tau];
        lambda[m] = MM_SACRIFICE;
        starts.push(lambda);
    }

    // subproblems only need to make progress; the caller polishes the winner
    let sub_opts = FwOptions {
        tol: fw_opts.tol.max(MM_SUBPROBLEM_TOL),
        max_iter: fw_opts.max_iter.min(MM_SUBPROBLEM_ITER),
        ..*fw_opts
    };
    let run = |mut lambda: Vec<f64>, mut weights: Vec<f64>| -> Result<(f64, Vec<f64>, usize)> {
        let mut current = f64::INFINITY;
        let mut iterations = 0;
        for _ in 0..MM_MAX_STEPS {
            let objective = WeightedFidelity {
                scenario,
                p,
                lambda: &lambda,
            };
            let res = frank_wolfe_minimize(&objective, atoms, &weights, &sub_opts)?;
            iterations += res.iterations;
            let value = evaluate(&res.point);
            if value < current {
                weights = res.weights;
            }
            if !(value < current - MM_PROGRESS * current.min(1.0)) {
                current = current.min(value);
                break;
            }
            current = value;
            for (s, l) in lambda.iter_mut().enumerate() {
                let r = scenario.setting_range(s);
                let f = fidelity(&p[r.clone()], &res.point[r]);
                let infid = (1.0 - f * f).max(0.0).sqrt();
                *l = if infid * MM_LAMBDA_CAP > f {
                    f / infid
                } else {
                    MM_LAMBDA_CAP
                };
            }
            let top = lambda.iter().copied().fold(0.0, f64::max);
            if top > 0.0 {
                lambda.iter_mut().for_each(|l| *l /= top);
            }
        }
        Ok((current, weights, iterations))
    };

    // Each subproblem is convex, so the start weights only affect speed and
    // every start can reuse the first run's solution.
    let first = run(starts[0].clone(), vec![1.0 / n as f64; n])?;
    let mut runs = vec![first.clone()];
    for lambda in starts.into_iter().skip(1) {
        runs.push(run(lambda, first.1.clone())?);
    }
    let iterations = runs.iter().map(|r| r.2).sum();
    // first strict minimum
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 < runs[best].0 {
            best = i;
        }
    }
    let weights = runs.into_iter().nth(best).expect("at least one start").1;
    Ok((weights, iterations))
}

fn smooth_distance(
    behavior: &Behavior,
    kind: DivergenceKind,
    atoms: &AtomSet,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    let scenario = behavior.scenario();
    let objective = AggregateObjective {
        kind,
        scenario,
        p: behavior.table(),
    };
    let n = atoms.len();
    let uniform = vec![1.0 / n as f64; n];
    let at_start = objective.value(&atoms.combine(&uniform));
    if !at_start.is_finite() {
        return Err(Error::Solver(format!(
            "{kind} objective is infinite on the whole local set"
        )));
    }
    let fw_opts = FwOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        away_steps: opts.away_steps,
    };
    let mut best = frank_wolfe_minimize(&objective, atoms, &uniform, &fw_opts)?;
    let mut iterations = best.iterations;

    if kind == DivergenceKind::Infidelity {
        let (weights, iters) = infidelity_search(behavior, atoms, &fw_opts)?;
        iterations += iters;
        // polish the best candidate on the true objective
        let polished = frank_wolfe_minimize(&objective, atoms, &weights, &fw_opts)?;
        iterations += polished.iterations;
        if polished.primal < best.primal {
            best = polished;
        }
    }

    let mut weights = clean_weights(atoms.vertex_weights(&best.weights));
    let mut primal = primal_at(behavior, kind, &weights)?;
    let (certified_lower, gap) = match kind {
        DivergenceKind::Infidelity => {
            // IF ≥ TV setting by setting, so the exact TV minimum is a sound
            // floor where the conditional-gradient gap is not.
            let tv = tv_distance(behavior, atoms)?;
            // at a local behavior the LP point matches p to rounding, which
            // the square-root shape of IF keeps the iterative search from doing
            let at_tv = primal_at(behavior, kind, &tv.weights)?;
            if at_tv < primal {
                primal = at_tv;
                weights = tv.weights;
            }
            let lower = tv.certified_lower.min(primal);
            (lower, primal - lower)
        }
        _ => ((primal - best.gap).max(0.0), best.gap),
    };
    Ok(DistanceResult {
        kind,
        primal,
        certified_lower,
        gap,
        iterations,
        // for infidelity this only says the local search came to rest
        converged: best.converged
            || (kind == DivergenceKind::Infidelity && best.iterations < opts.max_iter),
        weights,
    })
}
