//! Golden recipes: recompute published example values and compare them with
//! the figures as printed.
//!
//! A printed figure with `k` decimals matches when the computed value is
//! within half a unit of its last digit. Mismatches listed in [`KNOWN`] are
//! reported as flagged rather than failed.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::Serialize;

use crate::bounds::{theorem1_bounds, theorem2_bounds, BoundReport, MeasureKind};
use crate::divergence::{
    distance_to_local, distance_to_restricted_local, DistanceOptions, DivergenceKind,
};
use crate::error::Result;
use crate::inequality::{
    alpha_normalizer, chsh, classical_bound, evaluate, mabk, normalized_violation, yu_oh,
};
use crate::presets::{chsh_tsirelson, yu_oh_synthetic};
use crate::quantum::ghz_mabk_behavior;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    /// A known, documented disagreement with the printed value.
    Flagged,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub recipe: String,
    pub quantity: String,
    /// The figure as printed, when the reference comes from a printed value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub printed: Option<String>,
    pub reference: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceReport {
    pub checks: Vec<Check>,
}

impl ReproduceReport {
    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Flagged)
    }

    /// Non-strict runs succeed with flagged checks; strict runs do not.
    pub fn success(&self, strict: bool) -> bool {
        self.count(CheckStatus::Fail) == 0 && (!strict || self.count(CheckStatus::Flagged) == 0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render_table(&self) -> String {
        let rows: Vec<[String; 6]> = self
            .checks
            .iter()
            .map(|c| {
                [
                    c.recipe.clone(),
                    c.quantity.clone(),
                    c.printed
                        .clone()
                        .unwrap_or_else(|| format!("{:.6}", c.reference)),
                    format!("{:.6}", c.computed),
                    format!("{:.1e}", c.tolerance),
                    match c.status {
                        CheckStatus::Pass => "ok".into(),
                        CheckStatus::Flagged => "FLAGGED".into(),
                        CheckStatus::Fail => "MISMATCH".into(),
                    },
                ]
            })
            .collect();
        let header = [
            "recipe",
            "quantity",
            "reference",
            "computed",
            "tol",
            "status",
        ];
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: [&str; 6]| {
            let mut s = String::new();
            for (cell, w) in cells.iter().zip(widths) {
                let _ = write!(s, "{cell:<w$}  ");
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(header);
        for row in &rows {
            line([&row[0], &row[1], &row[2], &row[3], &row[4], &row[5]]);
        }
        for c in self.checks.iter().filter(|c| c.status != CheckStatus::Pass) {
            if let Some(note) = &c.note {
                let _ = writeln!(out, "{} {}: {}", c.recipe, c.quantity, note);
            }
        }
        let _ = writeln!(
            out,
            "{} checks: {} ok, {} flagged, {} mismatched",
            self.checks.len(),
            self.count(CheckStatus::Pass),
            self.count(CheckStatus::Flagged),
            self.count(CheckStatus::Fail)
        );
        out
    }
}

/// Printed figures that the computation does not reproduce, with the reason.
pub const KNOWN: [(&str, &str, &str); 6] = [
    (
        "chsh-theorem1",
        "E_C",
        "0.30 is sqrt(2) times the infidelity at the symmetric point of the restricted set; \
         over the local polytope sqrt(2) D_IF is at most sqrt(2) * 0.109531 = 0.154899",
    ),
    (
        "chsh-theorem1",
        "E_G",
        "the averaged infidelity is not convex: its minimum 0.109531 puts all mismatch in one \
         setting, below the symmetric point 0.130526; the certified floor is D_TV",
    ),
    (
        "chsh-override",
        "E_TR",
        "D_TV to the restricted set is (2 sqrt(2) - sqrt(2))/8 = 0.176777",
    ),
    (
        "chsh-override",
        "E_G",
        "the restricted-set infidelity minimum is 0.176777, below the symmetric point 0.210431",
    ),
    (
        "chsh-override",
        "E_C",
        "the restricted-set infidelity minimum is 0.176777, below the symmetric point 0.210431",
    ),
    (
        "chsh-override",
        "E_RE, E_F",
        "D_KL to the restricted set is 0.118506",
    ),
];

fn known_reason(recipe: &str, quantity: &str) -> Option<&'static str> {
    KNOWN
        .iter()
        .find(|(r, q, _)| *r == recipe && *q == quantity)
        .map(|(_, _, why)| *why)
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn push(
        &mut self,
        recipe: &str,
        quantity: &str,
        printed: Option<&str>,
        reference: f64,
        computed: f64,
        tolerance: f64,
    ) {
        let ok = (computed - reference).abs() <= tolerance;
        let known = known_reason(recipe, quantity);
        let status = match (ok, known) {
            (true, _) => CheckStatus::Pass,
            (false, Some(_)) => CheckStatus::Flagged,
            (false, None) => CheckStatus::Fail,
        };
        self.checks.push(Check {
            recipe: recipe.into(),
            quantity: quantity.into(),
            printed: printed.map(String::from),
            reference,
            computed,
            tolerance,
            status,
            note: if ok { None } else { known.map(String::from) },
        });
    }

    /// Compares against a figure printed with some number of decimals.
    fn printed(&mut self, recipe: &str, quantity: &str, printed: &str, computed: f64) {
        let reference: f64 = printed.parse().expect("static figure");
        let decimals = printed.split('.').nth(1).map_or(0, str::len) as i32;
        let tol = 0.5 * 10f64.powi(-decimals) + 1e-12;
        self.push(recipe, quantity, Some(printed), reference, computed, tol);
    }

    fn exact(&mut self, recipe: &str, quantity: &str, reference: f64, computed: f64, tol: f64) {
        self.push(recipe, quantity, None, reference, computed, tol);
    }
}

fn value(r: &BoundReport, m: MeasureKind) -> f64 {
    r.get(m).unwrap_or(f64::NAN)
}

/// Concurrence is compared through its `√2 D_IF` reading when present.
fn concurrence(r: &BoundReport) -> f64 {
    let e = r.entry(MeasureKind::EC).expect("concurrence entry");
    e.variant.or(e.value).unwrap_or(f64::NAN)
}

fn theorem1_suite(
    rec: &mut Recorder,
    recipe: &str,
    report: &BoundReport,
    printed: &[(&str, &str)],
) {
    for &(q, fig) in printed {
        let v = match q {
            "E_TR" => value(report, MeasureKind::ETr),
            "E_G" => value(report, MeasureKind::EG),
            "E_RE, E_F" => value(report, MeasureKind::ERe),
            "E_C" => concurrence(report),
            "E_ROB" => value(report, MeasureKind::ERob),
            _ => unreachable!("unknown quantity {q}"),
        };
        rec.printed(recipe, q, fig, v);
    }
}

/// Runs every recipe with default solver options.
pub fn reproduce() -> Result<ReproduceReport> {
    reproduce_with(&DistanceOptions::default())
}

pub fn reproduce_with(opts: &DistanceOptions) -> Result<ReproduceReport> {
    let mut rec = Recorder { checks: Vec::new() };
    let p = chsh_tsirelson();
    let f = chsh();

    let tv = distance_to_local(&p, DivergenceKind::Tv, opts)?;
    let kl = distance_to_local(&p, DivergenceKind::KlBits, opts)?;
    let inf = distance_to_local(&p, DivergenceKind::Infidelity, opts)?;
    rec.exact(
        "chsh-distance",
        "D_TV",
        (SQRT_2 - 1.0) / 4.0,
        tv.certified_lower,
        1e-5,
    );
    rec.exact("chsh-distance", "D_KL gap", 0.0, kl.gap, opts.tol);

    let t1 = theorem1_bounds(&tv, &kl, &inf)?;
    theorem1_suite(
        &mut rec,
        "chsh-theorem1",
        &t1,
        &[
            ("E_TR", "0.104"),
            ("E_G", "0.02"),
            ("E_RE, E_F", "0.046"),
            ("E_C", "0.30"),
            ("E_ROB", "0.12"),
        ],
    );

    let t2 = theorem2_bounds(&normalized_violation(&f, &p, None)?)?;
    rec.printed(
        "chsh-theorem2",
        "E_TR",
        "0.104",
        value(&t2, MeasureKind::ETr),
    );
    rec.printed("chsh-theorem2", "E_G", "0.01", value(&t2, MeasureKind::EG));
    rec.printed("chsh-theorem2", "E_C", "0.15", value(&t2, MeasureKind::EC));
    rec.printed(
        "chsh-theorem2",
        "E_RE, E_F",
        "0.031",
        value(&t2, MeasureKind::ERe),
    );

    // separable value of CHSH under the self-tested measurements
    let c = SQRT_2;
    let rtv = distance_to_restricted_local(&p, DivergenceKind::Tv, &f, c, opts)?;
    let rkl = distance_to_restricted_local(&p, DivergenceKind::KlBits, &f, c, opts)?;
    let rif = distance_to_restricted_local(&p, DivergenceKind::Infidelity, &f, c, opts)?;
    let over = theorem1_bounds(&rtv, &rkl, &rif)?;
    theorem1_suite(
        &mut rec,
        "chsh-override",
        &over,
        &[
            ("E_TR", "0.125"),
            ("E_G", "0.04"),
            ("E_C", "0.30"),
            ("E_RE, E_F", "0.33"),
        ],
    );
    let ot2 = theorem2_bounds(&normalized_violation(&f, &p, Some(c))?)?;
    rec.exact(
        "chsh-override",
        "theorem2 E_TR",
        (2.0 * SQRT_2 - SQRT_2) / 8.0,
        value(&ot2, MeasureKind::ETr),
        1e-12,
    );

    for n in [3usize, 5] {
        let recipe = format!("mabk-{n}");
        let func = mabk(n)?;
        let ghz = ghz_mabk_behavior(n)?;
        let c_n = 2f64.powi(((n - 1) / 2) as i32);
        rec.exact(
            &recipe,
            "vertices",
            (1u64 << (2 * n)) as f64,
            func.scenario().vertex_count().unwrap_or(0) as f64,
            0.0,
        );
        rec.exact(
            &recipe,
            "classical bound",
            c_n,
            classical_bound(&func)?,
            0.0,
        );
        rec.exact(
            &recipe,
            "GHZ value",
            (1u64 << (n - 1)) as f64,
            evaluate(&func, &ghz)?,
            1e-12,
        );
        let t2 = theorem2_bounds(&normalized_violation(&func, &ghz, None)?)?;
        rec.exact(
            &recipe,
            "E_TR",
            0.5 - 2f64.powf(-((n + 1) as f64) / 2.0),
            value(&t2, MeasureKind::ETr),
            1e-12,
        );
    }

    for d in [2usize, 3, 4] {
        let recipe = format!("yu-oh-{d}");
        let func = yu_oh(d)?;
        rec.exact(
            &recipe,
            "alpha",
            2.0 * d as f64,
            alpha_normalizer(&func)?,
            0.0,
        );
        rec.exact(
            &recipe,
            "classical bound",
            0.0,
            classical_bound(&func)?,
            0.0,
        );
        let b = yu_oh_synthetic(d, 0.5)?;
        let beta = evaluate(&func, &b)?;
        let t2 = theorem2_bounds(&normalized_violation(&func, &b, None)?)?;
        rec.exact(
            &recipe,
            "E_TR",
            beta / (2.0 * d as f64),
            value(&t2, MeasureKind::ETr),
            1e-12,
        );
    }

    Ok(ReproduceReport { checks: rec.checks })
}
