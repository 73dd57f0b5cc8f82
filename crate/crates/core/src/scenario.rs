//! Bell scenarios, behaviors and the deterministic vertices of the local
//! polytope.
//!
//! Joint settings `m = (m_1, ..., m_N)` and joint outcomes `a = (a_1, ..., a_N)`
//! are enumerated lexicographically with party 0 as the most significant
//! digit. A behavior is stored as one flat table: the block for joint setting
//! `s` starts at `offsets[s]` and holds `Π_i K_{i, m_i}` outcome entries. This
//! order is part of the file format contract.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of deterministic vertices.
pub const DEFAULT_VERTEX_CAP: usize = 1 << 20;

/// Largest behavior table the library will allocate.
const MAX_ENTRIES: usize = 1 << 24;

/// Normalization tolerance for each conditional distribution.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Negative entries at or above this value are float noise and clamped to 0.
pub const NEGATIVE_CLAMP: f64 = -1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ScenarioShape {
    parties: usize,
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
}

/// Party count, per-party setting counts and per-setting outcome counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioShape", into = "ScenarioShape")]
pub struct Scenario {
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

impl TryFrom<ScenarioShape> for Scenario {
    type Error = Error;

    fn try_from(shape: ScenarioShape) -> Result<Self> {
        if shape.parties != shape.settings.len() {
            return Err(Error::InvalidScenario(format!(
                "parties = {} but {} setting counts given",
                shape.parties,
                shape.settings.len()
            )));
        }
        Scenario::new(shape.settings, shape.outcomes)
    }
}

impl From<Scenario> for ScenarioShape {
    fn from(s: Scenario) -> Self {
        ScenarioShape {
            parties: s.settings.len(),
            settings: s.settings,
            outcomes: s.outcomes,
        }
    }
}

impl Scenario {
    pub fn new(settings: Vec<usize>, outcomes: Vec<Vec<usize>>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::InvalidScenario("at least one party required".into()));
        }
        if outcomes.len() != settings.len() {
            return Err(Error::InvalidScenario(format!(
                "{} parties but {} outcome lists",
                settings.len(),
                outcomes.len()
            )));
        }
        for (i, (&m, ks)) in settings.iter().zip(&outcomes).enumerate() {
            if m == 0 {
                return Err(Error::InvalidScenario(format!("party {i} has no settings")));
            }
            if ks.len() != m {
                return Err(Error::InvalidScenario(format!(
                    "party {i}: {m} settings but {} outcome counts",
                    ks.len()
                )));
            }
            if let Some(pos) = ks.iter().position(|&k| k < 2) {
                return Err(Error::InvalidScenario(format!(
                    "party {i}, setting {pos}: outcome count {} < 2",
                    ks[pos]
                )));
            }
        }

        let mut tau: usize = 1;
        for &m in &settings {
            tau = tau
                .checked_mul(m)
                .filter(|&t| t <= MAX_ENTRIES)
                .ok_or_else(|| Error::InvalidScenario("too many joint settings".into()))?;
        }

        let mut scenario = Scenario {
            settings,
            outcomes,
            offsets: Vec::with_capacity(tau + 1),
        };
        let mut total = 0usize;
        scenario.offsets.push(0);
        for s in 0..tau {
            let tuple = scenario.setting_tuple(s);
            let mut count = 1usize;
            for (i, &m) in tuple.iter().enumerate() {
                count = count
                    .checked_mul(scenario.outcomes[i][m])
                    .ok_or_else(|| Error::InvalidScenario("outcome table too large".into()))?;
            }
            total = total
                .checked_add(count)
                .filter(|&t| t <= MAX_ENTRIES)
                .ok_or_else(|| Error::InvalidScenario("behavior table too large".into()))?;
            scenario.offsets.push(total);
        }
        Ok(scenario)
    }

    /// `parties` parties with `settings` settings of `outcomes` outcomes each.
    pub fn homogeneous(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        Scenario::new(
            vec![settings; parties],
            vec![vec![outcomes; settings]; parties],
        )
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    /// Number of joint setting tuples (τ).
    pub fn joint_settings(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total number of `(m, a)` entries in a behavior table.
    pub fn num_entries(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn outcome_count(&self, setting: usize) -> usize {
        self.offsets[setting + 1] - self.offsets[setting]
    }

    /// Flat table range holding the distribution of joint setting `setting`.
    pub fn setting_range(&self, setting: usize) -> Range<usize> {
        self.offsets[setting]..self.offsets[setting + 1]
    }

    pub fn setting_tuple(&self, mut setting: usize) -> Vec<usize> {
        let mut tuple = vec![0; self.parties()];
        for i in (0..self.parties()).rev() {
            tuple[i] = setting % self.settings[i];
            setting /= self.settings[i];
        }
        tuple
    }

    pub fn setting_index(&self, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.parties() {
            return Err(Error::Index(format!(
                "setting tuple {tuple:?} has {} components, expected {}",
                tuple.len(),
                self.parties()
            )));
        }
        let mut idx = 0;
        for (i, &m) in tuple.iter().enumerate() {
            if m >= self.settings[i] {
                return Err(Error::Index(format!(
                    "setting {m} of party {i} out of range (party has {})",
                    self.settings[i]
                )));
            }
            idx = idx * self.settings[i] + m;
        }
        Ok(idx)
    }

    pub fn outcome_tuple(&self, setting: usize, mut outcome: usize) -> Vec<usize> {
        let m = self.setting_tuple(setting);
        let mut tuple = vec![0; self.parties()];
        for i in (0..self.parties()).rev() {
            let k = self.outcomes[i][m[i]];
            tuple[i] = outcome % k;
            outcome /= k;
        }
        tuple
    }

    pub fn outcome_index(&self, setting: usize, tuple: &[usize]) -> Result<usize> {
        let m = self.setting_tuple(setting);
        if tuple.len() != self.parties() {
            return Err(Error::Index(format!(
                "outcome tuple {tuple:?} has {} components, expected {}",
                tuple.len(),
                self.parties()
            )));
        }
        let mut idx = 0;
        for (i, &a) in tuple.iter().enumerate() {
            let k = self.outcomes[i][m[i]];
            if a >= k {
                return Err(Error::Index(format!(
                    "outcome {a} of party {i} under setting {} out of range (has {k})",
                    m[i]
                )));
            }
            idx = idx * k + a;
        }
        Ok(idx)
    }

    /// Flat table index of `p(a|m)`.
    pub fn entry_index(&self, settings: &[usize], outcomes: &[usize]) -> Result<usize> {
        let s = self.setting_index(settings)?;
        Ok(self.offsets[s] + self.outcome_index(s, outcomes)?)
    }

    /// `Π_i Π_m K_{i,m}`, or `None` on overflow.
    pub fn vertex_count(&self) -> Option<u128> {
        self.outcomes
            .iter()
            .flatten()
            .try_fold(1u128, |acc, &k| acc.checked_mul(k as u128))
    }

    fn checked_vertex_count(&self, cap: usize) -> Result<usize> {
        let count = self.vertex_count().unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(Error::Capacity {
                what: "deterministic vertex",
                count,
                cap: cap as u128,
            });
        }
        Ok(count as usize)
    }

    /// Decodes vertex `index` in canonical order. The first (party, setting)
    /// pair is the most significant digit.
    pub fn vertex(&self, mut index: usize) -> DeterministicStrategy {
        let mut outcomes: Vec<Vec<usize>> = self.settings.iter().map(|&m| vec![0; m]).collect();
        for i in (0..self.parties()).rev() {
            for m in (0..self.settings[i]).rev() {
                let k = self.outcomes[i][m];
                outcomes[i][m] = index % k;
                index /= k;
            }
        }
        DeterministicStrategy { outcomes }
    }

    /// For each joint setting, the flat table index that `strategy` puts
    /// probability one on.
    pub fn vertex_entries(&self, strategy: &DeterministicStrategy) -> Vec<usize> {
        (0..self.joint_settings())
            .map(|s| {
                let m = self.setting_tuple(s);
                let mut idx = 0;
                for (i, &mi) in m.iter().enumerate() {
                    idx = idx * self.outcomes[i][mi] + strategy.outcomes[i][mi];
                }
                self.offsets[s] + idx
            })
            .collect()
    }

    fn check_strategy(&self, strategy: &DeterministicStrategy) -> Result<()> {
        if strategy.outcomes.len() != self.parties() {
            return Err(Error::Index(
                "strategy party count does not match scenario".into(),
            ));
        }
        for (i, row) in strategy.outcomes.iter().enumerate() {
            if row.len() != self.settings[i] {
                return Err(Error::Index(format!("strategy is not total for party {i}")));
            }
            for (m, &o) in row.iter().enumerate() {
                if o >= self.outcomes[i][m] {
                    return Err(Error::Index(format!(
                        "strategy outcome {o} out of range at party {i}, setting {m}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A fixed outcome `o(i, m)` for every party `i` and setting `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub outcomes: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn outcome(&self, party: usize, setting: usize) -> usize {
        self.outcomes[party][setting]
    }
}

/// All deterministic strategies of a scenario in canonical order.
#[derive(Clone, Debug)]
pub struct VertexSet {
    pub scenario: Scenario,
    pub strategies: Vec<DeterministicStrategy>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

pub fn enumerate_vertices(scenario: &Scenario) -> Result<VertexSet> {
    enumerate_vertices_with_cap(scenario, DEFAULT_VERTEX_CAP)
}

pub fn enumerate_vertices_with_cap(scenario: &Scenario, cap: usize) -> Result<VertexSet> {
    let count = scenario.checked_vertex_count(cap)?;
    let strategies = (0..count).map(|v| scenario.vertex(v)).collect();
    Ok(VertexSet {
        scenario: scenario.clone(),
        strategies,
    })
}

/// Entry indices of every vertex, `joint_settings()` per vertex, flattened
/// in canonical vertex order. This is the compact form the solvers use.
pub(crate) fn vertex_entry_table(scenario: &Scenario, cap: usize) -> Result<Vec<usize>> {
    let count = scenario.checked_vertex_count(cap)?;
    let tau = scenario.joint_settings();
    let tuples: Vec<Vec<usize>> = (0..tau).map(|s| scenario.setting_tuple(s)).collect();

    // odometer over the flattened (party, setting) digits
    let radices: Vec<usize> = scenario.outcomes.iter().flatten().copied().collect();
    let base: Vec<usize> = scenario
        .settings
        .iter()
        .scan(0, |acc, &m| {
            let b = *acc;
            *acc += m;
            Some(b)
        })
        .collect();
    let mut digits = vec![0usize; radices.len()];
    let mut table = Vec::with_capacity(count * tau);
    for _ in 0..count {
        for (s, m) in tuples.iter().enumerate() {
            let mut idx = 0;
            for (i, &mi) in m.iter().enumerate() {
                idx = idx * scenario.outcomes[i][mi] + digits[base[i] + mi];
            }
            table.push(scenario.offsets[s] + idx);
        }
        for d in (0..digits.len()).rev() {
            digits[d] += 1;
            if digits[d] < radices[d] {
                break;
            }
            digits[d] = 0;
        }
    }
    Ok(table)
}

pub fn vertex_behavior(scenario: &Scenario, strategy: &DeterministicStrategy) -> Result<Behavior> {
    scenario.check_strategy(strategy)?;
    let mut table = vec![0.0; scenario.num_entries()];
    for e in scenario.vertex_entries(strategy) {
        table[e] = 1.0;
    }
    Behavior::new(scenario.clone(), table)
}

/// A normalization or sign defect found by [`validate_behavior`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    Normalization {
        setting: Vec<usize>,
        sum: f64,
        residual: f64,
    },
    Negative {
        setting: Vec<usize>,
        outcome: Vec<usize>,
        value: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Normalization {
                setting,
                sum,
                residual,
            } => write!(
                f,
                "setting {setting:?}: probabilities sum to {sum} (residual {residual:e})"
            ),
            Violation::Negative {
                setting,
                outcome,
                value,
            } => write!(
                f,
                "setting {setting:?}, outcome {outcome:?}: negative value {value}"
            ),
        }
    }
}

/// Conditional probability table `p(a|m)` over a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<f64>,
}

impl Behavior {
    /// Wraps a flat table. Only the shape is checked here; tiny negatives are
    /// clamped to zero and the numeric invariants are left to
    /// [`validate_behavior`].
    pub fn new(scenario: Scenario, mut table: Vec<f64>) -> Result<Self> {
        if table.len() != scenario.num_entries() {
            return Err(Error::Structure(format!(
                "table has {} entries, scenario requires {}",
                table.len(),
                scenario.num_entries()
            )));
        }
        if let Some(pos) = table.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidBehavior(format!(
                "non-finite probability at flat index {pos}"
            )));
        }
        for p in &mut table {
            if *p < 0.0 && *p >= NEGATIVE_CLAMP {
                *p = 0.0;
            }
        }
        Ok(Behavior { scenario, table })
    }

    /// Builds a table from `f(m, a)`.
    pub fn from_fn(
        scenario: Scenario,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(scenario.num_entries());
        for s in 0..scenario.joint_settings() {
            let m = scenario.setting_tuple(s);
            for j in 0..scenario.outcome_count(s) {
                table.push(f(&m, &scenario.outcome_tuple(s, j)));
            }
        }
        Behavior::new(scenario, table)
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let table = (0..scenario.joint_settings())
            .flat_map(|s| {
                let k = scenario.outcome_count(s);
                std::iter::repeat(1.0 / k as f64).take(k)
            })
            .collect();
        Behavior { scenario, table }
    }

    /// Convex combination of vertices given as `(vertex index, weight)`.
    pub fn mixture(scenario: &Scenario, weights: &[(usize, f64)]) -> Result<Self> {
        let count = scenario.vertex_count().unwrap_or(u128::MAX);
        let mut table = vec![0.0; scenario.num_entries()];
        for &(v, w) in weights {
            if v as u128 >= count {
                return Err(Error::Index(format!("vertex {v} out of range ({count})")));
            }
            for e in scenario.vertex_entries(&scenario.vertex(v)) {
                table[e] += w;
            }
        }
        Behavior::new(scenario.clone(), table)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn into_table(self) -> Vec<f64> {
        self.table
    }

    /// Conditional distribution `p(·|m)` for joint setting index `setting`.
    pub fn distribution(&self, setting: usize) -> &[f64] {
        &self.table[self.scenario.setting_range(setting)]
    }

    pub fn prob(&self, settings: &[usize], outcomes: &[usize]) -> Result<f64> {
        Ok(self.table[self.scenario.entry_index(settings, outcomes)?])
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_behavior(self)
    }

    /// Convex combination `λ·self + (1-λ)·other`.
    pub fn mix(&self, other: &Behavior, lambda: f64) -> Result<Behavior> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch(
                "cannot mix behaviors of different scenarios".into(),
            ));
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(p, q)| lambda * p + (1.0 - lambda) * q)
            .collect();
        Behavior::new(self.scenario.clone(), table)
    }
}

/// Empty iff every conditional distribution is normalized within
/// [`NORMALIZATION_TOL`] and nonnegative.
pub fn validate_behavior(behavior: &Behavior) -> Vec<Violation> {
    let scenario = &behavior.scenario;
    let mut out = Vec::new();
    for s in 0..scenario.joint_settings() {
        let dist = behavior.distribution(s);
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            out.push(Violation::Normalization {
                setting: scenario.setting_tuple(s),
                sum,
                residual: sum - 1.0,
            });
        }
        for (j, &p) in dist.iter().enumerate() {
            if p < 0.0 {
                out.push(Violation::Negative {
                    setting: scenario.setting_tuple(s),
                    outcome: scenario.outcome_tuple(s, j),
                    value: p,
                });
            }
        }
    }
    out
}

/// Result of the no-signaling check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoSignaling {
    pub holds: bool,
    /// Largest variation of a marginal across the complementary settings.
    pub residual: f64,
}

/// Checks that the marginal of every proper subset of parties is independent
/// of the settings of the remaining parties.
pub fn is_no_signaling(behavior: &Behavior, tol: f64) -> NoSignaling {
    let scenario = &behavior.scenario;
    let n = scenario.parties();
    let tau = scenario.joint_settings();
    let tuples: Vec<Vec<usize>> = (0..tau).map(|s| scenario.setting_tuple(s)).collect();
    let mut residual: f64 = 0.0;

    for mask in 1u64..(1u64 << n).saturating_sub(1) {
        let in_subset = |i: usize| mask & (1 << i) != 0;
        let mut extremes: HashMap<(Vec<usize>, Vec<usize>), (f64, f64)> = HashMap::new();
        for (s, m) in tuples.iter().enumerate() {
            let key_m: Vec<usize> = (0..n).filter(|&i| in_subset(i)).map(|i| m[i]).collect();
            let mut marginal: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
            for (j, &p) in behavior.distribution(s).iter().enumerate() {
                let a = scenario.outcome_tuple(s, j);
                let key_a: Vec<usize> = (0..n).filter(|&i| in_subset(i)).map(|i| a[i]).collect();
                *marginal.entry(key_a).or_insert(0.0) += p;
            }
            for (key_a, p) in marginal {
                let e = extremes
                    .entry((key_m.clone(), key_a))
                    .or_insert((f64::INFINITY, f64::NEG_INFINITY));
                e.0 = e.0.min(p);
                e.1 = e.1.max(p);
            }
        }
        for (lo, hi) in extremes.values() {
            residual = residual.max(hi - lo);
        }
    }
    NoSignaling {
        holds: residual <= tol,
        residual,
    }
}

/// A random convex combination of `support_size` distinct vertices with
/// flat-Dirichlet weights. The returned `(vertex, weight)` list certifies
/// locality of the behavior.
pub fn random_local_behavior(
    scenario: &Scenario,
    seed: u64,
    support_size: usize,
) -> Result<(Behavior, Vec<(usize, f64)>)> {
    let count = scenario.checked_vertex_count(DEFAULT_VERTEX_CAP)?;
    if support_size == 0 || support_size > count {
        return Err(Error::InvalidArgument(format!(
            "support size {support_size} must be in 1..={count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = sample(&mut rng, count, support_size).into_vec();
    chosen.sort_unstable();
    let raw: Vec<f64> = (0..support_size)
        .map(|_| {
            let x: f64 = Exp1.sample(&mut rng);
            x + f64::MIN_POSITIVE
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<(usize, f64)> = chosen
        .into_iter()
        .zip(raw.iter().map(|x| x / total))
        .collect();
    let behavior = Behavior::mixture(scenario, &weights)?;
    Ok((behavior, weights))
}

#[derive(Serialize, Deserialize)]
struct BehaviorFile {
    parties: usize,
    settings: Vec<usize>,
    outcomes: Vec<Vec<usize>>,
    #[serde(default)]
    probabilities: BTreeMap<String, f64>,
}

fn parse_tuple(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Format(format!("bad index {t:?}: {e}")))
        })
        .collect()
}

fn join_tuple(t: &[usize]) -> String {
    t.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses the JSON behavior format. Structural problems (bad keys, indices
/// outside the scenario) are errors; numeric invariants are not checked.
pub fn behavior_from_json(text: &str) -> Result<Behavior> {
    let file: BehaviorFile = serde_json::from_str(text)?;
    let scenario = Scenario::try_from(ScenarioShape {
        parties: file.parties,
        settings: file.settings,
        outcomes: file.outcomes,
    })?;
    let mut table = vec![0.0; scenario.num_entries()];
    for (key, value) in &file.probabilities {
        let (m, a) = key
            .split_once('|')
            .ok_or_else(|| Error::Format(format!("probability key {key:?} lacks '|'")))?;
        let idx = scenario
            .entry_index(&parse_tuple(m)?, &parse_tuple(a)?)
            .map_err(|e| Error::Index(format!("entry {key:?}: {e}")))?;
        table[idx] = *value;
    }
    Behavior::new(scenario, table)
}

/// Serializes nonzero entries; unlisted entries read back as 0.
pub fn behavior_to_json(behavior: &Behavior) -> Result<String> {
    let scenario = &behavior.scenario;
    let mut probabilities = BTreeMap::new();
    for s in 0..scenario.joint_settings() {
        let m = join_tuple(&scenario.setting_tuple(s));
        for (j, &p) in behavior.distribution(s).iter().enumerate() {
            if p != 0.0 {
                let a = join_tuple(&scenario.outcome_tuple(s, j));
                probabilities.insert(format!("{m}|{a}"), p);
            }
        }
    }
    let file = BehaviorFile {
        parties: scenario.parties(),
        settings: scenario.settings.clone(),
        outcomes: scenario.outcomes.clone(),
        probabilities,
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Reads a behavior file and rejects it unless it passes
/// [`validate_behavior`].
pub fn load_behavior(path: impl AsRef<Path>) -> Result<Behavior> {
    let behavior = behavior_from_json(&std::fs::read_to_string(path)?)?;
    let violations = validate_behavior(&behavior);
    if !violations.is_empty() {
        let detail: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidBehavior(detail.join("; ")));
    }
    Ok(behavior)
}

pub fn save_behavior(behavior: &Behavior, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, behavior_to_json(behavior)?)?;
    Ok(())
}

/// Reads a bare scenario (`parties`, `settings`, `outcomes`); any
/// `probabilities` field is ignored.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let shape: ScenarioShape = serde_json::from_str(text)?;
    Scenario::try_from(shape)
}
