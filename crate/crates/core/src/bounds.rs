//! Lower bounds on entanglement measures from certified nonlocality.
//!
//! Theorem-1 style bounds take minimal behavior distances, Theorem-2 style
//! bounds take the normalized violation `β_α`. Both only ever read lower
//! bounds on their inputs.

use std::f64::consts::{LN_2, SQRT_2};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::divergence::{DistanceResult, DivergenceKind};
use crate::error::{Error, Result};
use crate::inequality::ViolationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    /// Trace-distance entanglement.
    #[serde(rename = "E_TR")]
    ETr,
    /// Relative entropy of entanglement.
    #[serde(rename = "E_RE")]
    ERe,
    /// Entanglement of formation.
    #[serde(rename = "E_F")]
    EF,
    /// Concurrence.
    #[serde(rename = "E_C")]
    EC,
    /// Geometric measure.
    #[serde(rename = "E_G")]
    EG,
    /// Robustness of entanglement.
    #[serde(rename = "E_ROB")]
    ERob,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::ETr,
        MeasureKind::ERe,
        MeasureKind::EF,
        MeasureKind::EC,
        MeasureKind::EG,
        MeasureKind::ERob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::ETr => "E_TR",
            MeasureKind::ERe => "E_RE",
            MeasureKind::EF => "E_F",
            MeasureKind::EC => "E_C",
            MeasureKind::EG => "E_G",
            MeasureKind::ERob => "E_ROB",
        }
    }

    /// The divergence a Theorem-1 bound on this measure is computed from.
    pub fn divergence(self) -> DivergenceKind {
        match self {
            MeasureKind::ETr | MeasureKind::ERob => DivergenceKind::Tv,
            MeasureKind::ERe | MeasureKind::EF => DivergenceKind::KlBits,
            MeasureKind::EC | MeasureKind::EG => DivergenceKind::Infidelity,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Theorem1,
    Theorem2,
    ChshRefined,
}

impl BoundMethod {
    pub fn name(self) -> &'static str {
        match self {
            BoundMethod::Theorem1 => "theorem1",
            BoundMethod::Theorem2 => "theorem2",
            BoundMethod::ChshRefined => "chsh_refined",
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The part of a [`DistanceResult`] a report depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSnapshot {
    pub kind: DivergenceKind,
    pub primal: f64,
    pub certified_lower: f64,
    pub gap: f64,
    pub converged: bool,
}

impl From<&DistanceResult> for DistanceSnapshot {
    fn from(d: &DistanceResult) -> Self {
        DistanceSnapshot {
            kind: d.kind,
            primal: d.primal,
            certified_lower: d.certified_lower,
            gap: d.gap,
            converged: d.converged,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundInputs {
    Distances {
        tv: DistanceSnapshot,
        kl: DistanceSnapshot,
        infidelity: DistanceSnapshot,
    },
    Violation(ViolationReport),
    BellValue {
        beta: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub measure: MeasureKind,
    /// `None` when the bound is undefined for these inputs.
    pub value: Option<f64>,
    pub method: BoundMethod,
    /// Short description of the scalar the value was computed from.
    pub input: String,
    /// A second, stronger reading of the same bound, reported alongside.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub inputs: BoundInputs,
    pub entries: Vec<BoundEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn entry(&self, measure: MeasureKind) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.measure == measure)
    }

    pub fn get(&self, measure: MeasureKind) -> Option<f64> {
        self.entry(measure).and_then(|e| e.value)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned text table: measure, bound, method, input, notes.
    pub fn render_table(&self) -> String {
        let header = ["measure", "bound", "method", "input", "notes"];
        let rows: Vec<[String; 5]> = self
            .entries
            .iter()
            .map(|e| {
                let mut notes = e.notes.clone();
                if let Some(v) = e.variant {
                    notes.insert(0, format!("variant {v:.6}"));
                }
                [
                    e.measure.to_string(),
                    e.value
                        .map_or_else(|| "-".to_string(), |v| format!("{v:.6}")),
                    e.method.to_string(),
                    e.input.clone(),
                    notes.join("; "),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
                if i + 1 == cells.len() {
                    s.push_str(cell);
                } else {
                    let _ = write!(s, "{cell:<w$}  ");
                }
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(&header.map(String::from));
        line(&widths.map(|w| "-".repeat(w)));
        for row in &rows {
            line(row);
        }
        for note in &self.notes {
            out.push_str("note: ");
            out.push_str(note);
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_table())
    }
}

fn robustness(x: f64) -> Option<f64> {
    (x < 1.0).then(|| x / (1.0 - x))
}

fn entry(
    measure: MeasureKind,
    value: Option<f64>,
    method: BoundMethod,
    input: String,
) -> BoundEntry {
    BoundEntry {
        measure,
        value,
        method,
        input,
        variant: None,
        notes: Vec::new(),
    }
}

fn check_kind(d: &DistanceResult, kind: DivergenceKind) -> Result<f64> {
    if d.kind != kind {
        return Err(Error::InvalidArgument(format!(
            "expected a {kind} distance, got {}",
            d.kind
        )));
    }
    let v = d.certified_lower;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{kind} lower bound {v} is not a distance"
        )));
    }
    Ok(v)
}

/// Bounds from the three minimal distances, using their certified lower
/// values only.
pub fn theorem1_bounds(
    d_tv: &DistanceResult,
    d_kl: &DistanceResult,
    d_if: &DistanceResult,
) -> Result<BoundReport> {
    let tv = check_kind(d_tv, DivergenceKind::Tv)?;
    let kl = check_kind(d_kl, DivergenceKind::KlBits)?;
    let inf = check_kind(d_if, DivergenceKind::Infidelity)?;
    let m = BoundMethod::Theorem1;

    let mut entries = vec![
        entry(MeasureKind::ETr, Some(tv), m, format!("D_TV = {tv:.6}")),
        entry(MeasureKind::ERe, Some(kl), m, format!("D_KL = {kl:.6}")),
        entry(MeasureKind::EF, Some(kl), m, format!("D_KL = {kl:.6}")),
        entry(MeasureKind::EC, Some(inf), m, format!("D_IF = {inf:.6}")),
        entry(
            MeasureKind::EG,
            Some(inf * inf),
            m,
            format!("D_IF = {inf:.6}"),
        ),
        entry(
            MeasureKind::ERob,
            robustness(tv),
            m,
            format!("D_TV = {tv:.6}"),
        ),
    ];
    entries[3].variant = Some(SQRT_2 * inf);
    entries[3]
        .notes
        .push("variant is sqrt(2) D_IF, from the state-level concurrence inequality".into());
    if d_if.primal > inf + 1e-9 {
        let note = format!(
            "infidelity minimum lies in [{inf:.6}, {:.6}]; the lower end is the TV floor",
            d_if.primal
        );
        entries[3].notes.push(note.clone());
        entries[4].notes.push(note);
    }
    if entries[5].value.is_none() {
        entries[5].notes.push("undefined: D_TV >= 1".into());
    }

    let mut notes = Vec::new();
    for d in [d_tv, d_kl, d_if] {
        if !d.converged {
            notes.push(format!(
                "{} solver stopped before convergence; its certified lower value is used",
                d.kind
            ));
        }
    }
    Ok(BoundReport {
        method: m,
        inputs: BoundInputs::Distances {
            tv: d_tv.into(),
            kl: d_kl.into(),
            infidelity: d_if.into(),
        },
        entries,
        notes,
    })
}

/// Bounds from the normalized violation `β_α`.
pub fn theorem2_bounds(v: &ViolationReport) -> Result<BoundReport> {
    let b = v.beta_alpha;
    if !b.is_finite() || b < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "normalized violation {b} is out of range"
        )));
    }
    let m = BoundMethod::Theorem2;
    let input = format!("beta_alpha = {b:.6}");
    let re = 2.0 / LN_2 * b * b;
    let mut entries = vec![
        entry(MeasureKind::ETr, Some(b), m, input.clone()),
        entry(MeasureKind::ERe, Some(re), m, input.clone()),
        entry(MeasureKind::EF, Some(re), m, input.clone()),
        entry(MeasureKind::EC, Some(SQRT_2 * b), m, input.clone()),
        entry(MeasureKind::EG, Some(b * b), m, input.clone()),
        entry(MeasureKind::ERob, robustness(b), m, input),
    ];
    if entries[5].value.is_none() {
        entries[5].notes.push("undefined: beta_alpha >= 1".into());
    }
    Ok(BoundReport {
        method: m,
        inputs: BoundInputs::Violation(v.clone()),
        entries,
        notes: vec![format!(
            "classical bound c = {} ({}), alpha = {}",
            v.c_used, v.c_source, v.alpha
        )],
    })
}

const TSIRELSON: f64 = 2.0 * SQRT_2;

/// Concurrence and geometric-measure bounds for the CHSH value `β` in the
/// two-party, two-setting, two-outcome scenario.
///
/// `E_C ≥ (β - 2)/(2√2 - 2)` and `E_G ≥ ½(1 - √(1 - E_C²))`.
pub fn chsh_refined_bounds(beta: f64) -> Result<BoundReport> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument("CHSH value is not finite".into()));
    }
    if beta > TSIRELSON + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "CHSH value {beta} exceeds 2*sqrt(2); no quantum behavior reaches it"
        )));
    }
    let beta = beta.min(TSIRELSON);
    let ec = ((beta - 2.0) / (TSIRELSON - 2.0)).clamp(0.0, 1.0);
    let eg = 0.5 * (1.0 - (1.0 - ec * ec).max(0.0).sqrt());
    let m = BoundMethod::ChshRefined;
    let input = format!("beta = {beta:.6}");
    let mut ec_entry = entry(MeasureKind::EC, Some(ec), m, input.clone());
    ec_entry.notes.push(format!(
        "two-qubit assumption (device-dependent): E_C >= {:.6}",
        two_qubit_concurrence_bound(beta)
    ));
    Ok(BoundReport {
        method: m,
        inputs: BoundInputs::BellValue { beta },
        entries: vec![ec_entry, entry(MeasureKind::EG, Some(eg), m, input)],
        notes: vec!["valid only for the (2,2,2) CHSH scenario".into()],
    })
}

/// `½√(β² - 4)` for a two-qubit state reaching CHSH value `β`, 0 below 2.
pub fn two_qubit_concurrence_bound(beta: f64) -> f64 {
    if beta.is_nan() || beta < 2.0 {
        0.0
    } else {
        0.5 * (beta * beta - 4.0).sqrt()
    }
}
