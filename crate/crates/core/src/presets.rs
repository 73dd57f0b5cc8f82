//! Built-in example behaviors, each paired with the functional it violates.
//! Tables are built from closed forms, not read from floats on disk.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::inequality::{chsh, mabk, yu_oh, BellFunctional};
use crate::quantum::{behavior_from_quantum, werner, MeasurementAssemblage};
use crate::scenario::{Behavior, Scenario};

#[derive(Clone, Debug)]
pub struct Example {
    pub name: String,
    pub behavior: Behavior,
    pub functional: BellFunctional,
}

/// `(1 + (-1)^{a+b+xy} v)/4`; `v = 1/√2` is the Tsirelson behavior and
/// `v ≤ ½` is local.
pub fn chsh_family(visibility: f64) -> Result<Behavior> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidArgument(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    Behavior::from_fn(Scenario::homogeneous(2, 2, 2)?, |m, a| {
        let sign = if (a[0] + a[1] + m[0] * m[1]) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (1.0 + sign * visibility) / 4.0
    })
}

pub fn chsh_tsirelson() -> Behavior {
    chsh_family(FRAC_1_SQRT_2).expect("static behavior")
}

/// Werner state `p·Φ⁺ + (1-p)·I/4` measured with the CHSH-optimal settings.
pub fn chsh_werner(p: f64) -> Result<Behavior> {
    behavior_from_quantum(
        &werner(p)?,
        &MeasurementAssemblage::chsh_optimal(),
        &Scenario::homogeneous(2, 2, 2)?,
    )
}

/// A no-signaling behavior with Yu–Oh value `q`, for `0 ≤ q ≤ (d-1)/d`.
///
/// Bob's setting 0 is uniform over `d` outcomes and Alice answers 1 at
/// setting `k` exactly when Bob got `k`. At Bob's setting 1 he answers 0
/// with probability `q`, in which case Alice answers 0 at every setting.
pub fn yu_oh_synthetic(d: usize, q: f64) -> Result<Behavior> {
    let f = yu_oh(d)?;
    let dd = d as f64;
    if !(0.0..=(dd - 1.0) / dd).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "Yu-Oh synthetic value {q} outside [0, {}]",
            (dd - 1.0) / dd
        )));
    }
    Behavior::from_fn(f.scenario().clone(), |m, ab| {
        let (x, y, a, b) = (m[0], m[1], ab[0], ab[1]);
        if y == 0 {
            return if (a == 1) == (b == x) { 1.0 / dd } else { 0.0 };
        }
        match (a, b) {
            (0, 0) => q,
            (1, 0) => 0.0,
            (0, 1) => (dd - 1.0) / dd - q,
            (1, 1) => 1.0 / dd,
            _ => 0.0,
        }
    })
}

/// Looks up a named example. `n` selects the MABK party count, `d` the
/// Yu–Oh dimension and `p` the Werner visibility.
pub fn example(name: &str, n: Option<usize>, d: Option<usize>, p: Option<f64>) -> Result<Example> {
    let (behavior, functional, label) = match name {
        "chsh-tsirelson" => (chsh_tsirelson(), chsh(), name.to_string()),
        "chsh-werner" => {
            let p = p.unwrap_or(1.0);
            (chsh_werner(p)?, chsh(), format!("chsh-werner(p={p})"))
        }
        "mabk" => {
            let n = n.unwrap_or(3);
            (
                crate::quantum::ghz_mabk_behavior(n)?,
                mabk(n)?,
                format!("mabk(n={n})"),
            )
        }
        "yu-oh" => {
            let d = d.unwrap_or(3);
            (yu_oh_synthetic(d, 0.5)?, yu_oh(d)?, format!("yu-oh(d={d})"))
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown example {other:?}; expected one of {}",
                EXAMPLES.join(", ")
            )))
        }
    };
    Ok(Example {
        name: label,
        behavior,
        functional,
    })
}

pub const EXAMPLES: [&str; 4] = ["chsh-tsirelson", "chsh-werner", "mabk", "yu-oh"];
