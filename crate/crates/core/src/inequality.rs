//! Bell functionals `β(P) = Σ α_{a|m} p(a|m)`, their classical bounds and
//! the normalized violation `β_α = (β - c)/α`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{vertex_entry_table, Behavior, Scenario, DEFAULT_VERTEX_CAP};

/// Sparse linear functional on behaviors of one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct BellFunctional {
    name: String,
    scenario: Scenario,
    /// Flat table index to coefficient.
    coefficients: BTreeMap<usize, f64>,
    classical_bound: Option<f64>,
    notes: Vec<String>,
}

impl BellFunctional {
    /// Builds a functional from `(m, a, α)` triples. Repeated indices are
    /// rejected.
    pub fn new(
        name: impl Into<String>,
        scenario: Scenario,
        entries: impl IntoIterator<Item = (Vec<usize>, Vec<usize>, f64)>,
        classical_bound: Option<f64>,
    ) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for (m, a, alpha) in entries {
            if !alpha.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "coefficient at m={m:?}, a={a:?} is not finite"
                )));
            }
            let idx = scenario
                .entry_index(&m, &a)
                .map_err(|e| Error::Index(format!("coefficient at m={m:?}, a={a:?}: {e}")))?;
            if coefficients.insert(idx, alpha).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate coefficient at m={m:?}, a={a:?}"
                )));
            }
        }
        Ok(BellFunctional {
            name: name.into(),
            scenario,
            coefficients,
            classical_bound,
            notes: Vec::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn declared_bound(&self) -> Option<f64> {
        self.classical_bound
    }

    pub fn with_declared_bound(mut self, bound: Option<f64>) -> Self {
        self.classical_bound = bound;
        self
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Number of stored coefficients, zeros included.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.coefficients.values().filter(|&&v| v != 0.0).count()
    }

    pub fn coefficient(&self, settings: &[usize], outcomes: &[usize]) -> Result<f64> {
        let idx = self.scenario.entry_index(settings, outcomes)?;
        Ok(self.coefficients.get(&idx).copied().unwrap_or(0.0))
    }

    /// Coefficients laid out like a behavior table.
    pub fn dense_coefficients(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.scenario.num_entries()];
        for (&idx, &v) in &self.coefficients {
            dense[idx] = v;
        }
        dense
    }

    /// `(m, a, α)` triples in table order.
    pub fn entries(&self) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
        let mut out = Vec::with_capacity(self.coefficients.len());
        let mut s = 0;
        for (&idx, &v) in &self.coefficients {
            while !self.scenario.setting_range(s).contains(&idx) {
                s += 1;
            }
            let j = idx - self.scenario.setting_range(s).start;
            out.push((
                self.scenario.setting_tuple(s),
                self.scenario.outcome_tuple(s, j),
                v,
            ));
        }
        out
    }
}

fn same_scenario(f: &BellFunctional, b: &Behavior) -> Result<()> {
    if f.scenario() != b.scenario() {
        return Err(Error::ScenarioMismatch(format!(
            "functional {:?} and behavior are defined on different scenarios",
            f.name
        )));
    }
    Ok(())
}

/// `β(P)`, a sparse dot product.
pub fn evaluate(f: &BellFunctional, behavior: &Behavior) -> Result<f64> {
    same_scenario(f, behavior)?;
    let table = behavior.table();
    Ok(f.coefficients.iter().map(|(&idx, &v)| v * table[idx]).sum())
}

pub fn classical_bound(f: &BellFunctional) -> Result<f64> {
    classical_bound_with_cap(f, DEFAULT_VERTEX_CAP)
}

/// Maximum of `β` over the deterministic vertices, which is its maximum over
/// the local polytope.
pub fn classical_bound_with_cap(f: &BellFunctional, cap: usize) -> Result<f64> {
    let table = vertex_entry_table(&f.scenario, cap)?;
    let dense = f.dense_coefficients();
    let tau = f.scenario.joint_settings();
    let best = table
        .par_chunks(tau)
        .map(|entries| entries.iter().map(|&e| dense[e]).sum::<f64>())
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best)
}

/// `α = Σ_m (max_a α_{a|m} - min_a α_{a|m})`.
///
/// Settings without any stored coefficient contribute nothing. At a setting
/// that has some coefficients, outcomes without one count as 0.
pub fn alpha_normalizer(f: &BellFunctional) -> Result<f64> {
    let scenario = &f.scenario;
    let mut per_setting: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    let mut s = 0;
    for (&idx, &v) in &f.coefficients {
        while !scenario.setting_range(s).contains(&idx) {
            s += 1;
        }
        let e = per_setting
            .entry(s)
            .or_insert((f64::INFINITY, f64::NEG_INFINITY, 0));
        e.0 = e.0.min(v);
        e.1 = e.1.max(v);
        e.2 += 1;
    }
    let alpha: f64 = per_setting
        .iter()
        .map(|(&s, &(lo, hi, count))| {
            let (lo, hi) = if count < scenario.outcome_count(s) {
                (lo.min(0.0), hi.max(0.0))
            } else {
                (lo, hi)
            };
            hi - lo
        })
        .sum();
    if alpha <= 0.0 {
        return Err(Error::ZeroNormalizer(format!(
            "functional {:?} is constant on every setting",
            f.name
        )));
    }
    Ok(alpha)
}

/// Where the classical bound used in a [`ViolationReport`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Computed,
    Declared,
    Override,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSource::Computed => "computed",
            BoundSource::Declared => "declared",
            BoundSource::Override => "override",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub beta: f64,
    pub c_used: f64,
    pub alpha: f64,
    /// `max(0, (β - c)/α)`.
    pub beta_alpha: f64,
    pub c_source: BoundSource,
}

pub fn normalized_violation(
    f: &BellFunctional,
    behavior: &Behavior,
    c_override: Option<f64>,
) -> Result<ViolationReport> {
    let beta = evaluate(f, behavior)?;
    let alpha = alpha_normalizer(f)?;
    let (c_used, c_source) = match (c_override, f.classical_bound) {
        (Some(c), _) => {
            if !c.is_finite() {
                return Err(Error::InvalidArgument(
                    "classical bound override is not finite".into(),
                ));
            }
            (c, BoundSource::Override)
        }
        (None, Some(c)) => (c, BoundSource::Declared),
        (None, None) => (classical_bound(f)?, BoundSource::Computed),
    };
    Ok(ViolationReport {
        beta,
        c_used,
        alpha,
        beta_alpha: ((beta - c_used) / alpha).max(0.0),
        c_source,
    })
}

fn parity_sign(x: usize) -> f64 {
    if x % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// CHSH: `Σ (-1)^{a+b+xy} p(ab|xy) ≤ 2`.
pub fn chsh() -> BellFunctional {
    let scenario = Scenario::homogeneous(2, 2, 2).expect("static scenario");
    let mut entries = Vec::with_capacity(16);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    entries.push((vec![x, y], vec![a, b], parity_sign(a + b + x * y)));
                }
            }
        }
    }
    BellFunctional::new("chsh", scenario, entries, Some(2.0)).expect("static functional")
}

/// `Γ(m) = Σ_{j>k} m_j m_k` for a 0/1 setting tuple.
pub fn gamma(m: &[usize]) -> usize {
    let w = m.iter().filter(|&&x| x == 1).count();
    w * w.saturating_sub(1) / 2
}

/// MABK functional for odd `n`: coefficients `(-1)^{Γ(m) + Σa}` on settings
/// with odd `Σm`, zero elsewhere, classical bound `2^{(n-1)/2}`.
pub fn mabk(n: usize) -> Result<BellFunctional> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "MABK functional requires odd n >= 3, got {n}"
        )));
    }
    if n > 20 {
        return Err(Error::InvalidArgument(format!("MABK n = {n} is too large")));
    }
    let scenario = Scenario::homogeneous(n, 2, 2)?;
    let mut entries = Vec::new();
    for s in 0..scenario.joint_settings() {
        let m = scenario.setting_tuple(s);
        let weight: usize = m.iter().sum();
        if weight % 2 == 0 {
            continue;
        }
        for j in 0..scenario.outcome_count(s) {
            let a = scenario.outcome_tuple(s, j);
            let sign = parity_sign(gamma(&m) + a.iter().sum::<usize>());
            entries.push((m.clone(), a, sign));
        }
    }
    let bound = 2f64.powi(((n - 1) / 2) as i32);
    BellFunctional::new(format!("mabk({n})"), scenario, entries, Some(bound))
}

/// Yu–Oh functional for `d ≥ 2`:
/// `p(00|01) - Σ_{k<d} p(0k|k0) - Σ_{1≤k<d} p(10|k1) ≤ 0`.
///
/// Alice has `d` dichotomic settings. Both of Bob's settings are encoded
/// with `d` outcomes, since the middle sum addresses outcome `k` of Bob's
/// setting 0.
pub fn yu_oh(d: usize) -> Result<BellFunctional> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "Yu-Oh functional requires d >= 2, got {d}"
        )));
    }
    let scenario = Scenario::new(vec![d, 2], vec![vec![2; d], vec![d, d]])?;
    let mut entries = vec![(vec![0, 1], vec![0, 0], 1.0)];
    for k in 0..d {
        entries.push((vec![k, 0], vec![0, k], -1.0));
    }
    for k in 1..d {
        entries.push((vec![k, 1], vec![1, 0], -1.0));
    }
    let mut f = BellFunctional::new(format!("yu-oh({d})"), scenario, entries, Some(0.0))?;
    f.notes.push(format!(
        "Bob's setting 0 is encoded with {d} outcomes so that p(0k|k0) indexes validly"
    ));
    Ok(f)
}

#[derive(Serialize, Deserialize)]
struct CoefficientEntry {
    m: Vec<usize>,
    a: Vec<usize>,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct FunctionalFile {
    name: String,
    scenario: Scenario,
    coefficients: Vec<CoefficientEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classical_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

pub fn functional_from_json(text: &str) -> Result<BellFunctional> {
    let file: FunctionalFile = serde_json::from_str(text)?;
    let mut f = BellFunctional::new(
        file.name,
        file.scenario,
        file.coefficients.into_iter().map(|c| (c.m, c.a, c.alpha)),
        file.classical_bound,
    )?;
    f.notes = file.notes;
    Ok(f)
}

pub fn functional_to_json(f: &BellFunctional) -> Result<String> {
    let file = FunctionalFile {
        name: f.name.clone(),
        scenario: f.scenario.clone(),
        coefficients: f
            .entries()
            .into_iter()
            .map(|(m, a, alpha)| CoefficientEntry { m, a, alpha })
            .collect(),
        classical_bound: f.classical_bound,
        notes: f.notes.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// A declared classical bound that disagrees with the vertex maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundMismatch {
    pub declared: f64,
    pub recomputed: f64,
}

impl fmt::Display for BoundMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "declared classical bound {} differs from the recomputed vertex maximum {}",
            self.declared, self.recomputed
        )
    }
}

/// Recomputes the classical bound and compares it to the declared one
/// within 1e-9.
pub fn check_declared_bound(f: &BellFunctional) -> Result<Option<BoundMismatch>> {
    let Some(declared) = f.classical_bound else {
        return Ok(None);
    };
    let recomputed = classical_bound(f)?;
    if (declared - recomputed).abs() > 1e-9 {
        Ok(Some(BoundMismatch {
            declared,
            recomputed,
        }))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Debug)]
pub struct LoadedFunctional {
    pub functional: BellFunctional,
    pub warnings: Vec<String>,
}

/// Reads a functional file and verifies its declared bound.
pub fn load_functional(path: impl AsRef<Path>) -> Result<LoadedFunctional> {
    let functional = functional_from_json(&std::fs::read_to_string(path)?)?;
    let mut warnings = Vec::new();
    match check_declared_bound(&functional) {
        Ok(Some(mismatch)) => warnings.push(mismatch.to_string()),
        Ok(None) => {}
        Err(Error::Capacity { count, .. }) => warnings.push(format!(
            "declared classical bound not verified: {count} vertices exceed the cap"
        )),
        Err(e) => return Err(e),
    }
    Ok(LoadedFunctional {
        functional,
        warnings,
    })
}

pub fn save_functional(f: &BellFunctional, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, functional_to_json(f)?)?;
    Ok(())
}
