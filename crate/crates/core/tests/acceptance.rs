//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 10 is reported as FAIL because the reproduction flags more
//! printed values than the three it names; the run still succeeds as long as
//! the flagged set is exactly the analyzed one.

use std::f64::consts::{LN_2, SQRT_2};
use std::process::ExitCode;

use bellbound_core::bounds::{chsh_refined_bounds, theorem1_bounds, theorem2_bounds, MeasureKind};
use bellbound_core::divergence::{
    aggregate_distance, distance_to_local, DistanceOptions, DivergenceKind,
};
use bellbound_core::inequality::{
    alpha_normalizer, chsh, classical_bound, evaluate, mabk, normalized_violation, yu_oh,
};
use bellbound_core::presets::{chsh_tsirelson, yu_oh_synthetic};
use bellbound_core::quantum::{
    behavior_from_quantum, ghz_graph_state, ghz_mabk_behavior, pauli_x, pauli_z, phi_plus,
    random_povm, random_state, state_fidelity, state_trace_distance, werner, wootters_concurrence,
    CMatrix, MeasurementAssemblage, C64,
};
use bellbound_core::reproduce::{reproduce, CheckStatus};
use bellbound_core::scenario::{random_local_behavior, Behavior, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: bellbound_core::Error) -> String {
    e.to_string()
}

fn opts() -> DistanceOptions {
    DistanceOptions::default()
}

fn theorem1(b: &Behavior) -> Result<bellbound_core::BoundReport, String> {
    let o = opts();
    let tv = distance_to_local(b, DivergenceKind::Tv, &o).map_err(err)?;
    let kl = distance_to_local(b, DivergenceKind::KlBits, &o).map_err(err)?;
    let inf = distance_to_local(b, DivergenceKind::Infidelity, &o).map_err(err)?;
    theorem1_bounds(&tv, &kl, &inf).map_err(err)
}

fn criterion_1() -> Outcome {
    let d = distance_to_local(&chsh_tsirelson(), DivergenceKind::Tv, &opts()).map_err(err)?;
    let expected = (SQRT_2 - 1.0) / 4.0;
    ensure(
        (d.certified_lower - expected).abs() <= 1e-5,
        format!("certified {}", d.certified_lower),
    )?;
    Ok(format!(
        "certified_lower = {:.9}, expected {expected:.9}",
        d.certified_lower
    ))
}

fn criterion_2() -> Outcome {
    let v = normalized_violation(&chsh(), &chsh_tsirelson(), None).map_err(err)?;
    let r = theorem2_bounds(&v).map_err(err)?;
    let b = (2.0 * SQRT_2 - 2.0) / 8.0;
    let checks = [
        (MeasureKind::ETr, b, 0.103553, "0.104"),
        (MeasureKind::EG, b * b, 0.010723, "0.01"),
        (MeasureKind::EC, SQRT_2 * b, 0.146447, "0.15"),
        (MeasureKind::ERe, 2.0 / LN_2 * b * b, 0.030940, "0.031"),
    ];
    let mut parts = Vec::new();
    for (m, exact, six, printed) in checks {
        let got = r.get(m).ok_or(format!("{m} missing"))?;
        ensure(
            (got - exact).abs() <= 1e-9,
            format!("{m} = {got}, closed form {exact}"),
        )?;
        ensure(
            (got - six).abs() <= 1e-6,
            format!("{m} = {got} is not {six}"),
        )?;
        let decimals = printed.len() - 2;
        let tol = 0.5 * 10f64.powi(-(decimals as i32)) + 1e-12;
        ensure(
            (got - printed.parse::<f64>().unwrap()).abs() <= tol,
            format!("{m} = {got} vs printed {printed}"),
        )?;
        parts.push(format!("{m} = {got:.6}"));
    }
    Ok(parts.join(", "))
}

fn criterion_3() -> Outcome {
    let o = opts();
    let b = chsh_tsirelson();
    let kl = distance_to_local(&b, DivergenceKind::KlBits, &o).map_err(err)?;
    let r = theorem1(&b)?;
    let re = r.get(MeasureKind::ERe).unwrap();
    let f = r.get(MeasureKind::EF).unwrap();
    let g = r.get(MeasureKind::EG).unwrap();
    let rob = r.get(MeasureKind::ERob).unwrap();
    ensure(re == f, "E_RE and E_F differ")?;
    ensure(
        (0.0309..=0.0463 + 1e-4).contains(&re),
        format!("E_RE = {re}"),
    )?;
    ensure(kl.gap <= 1e-7, format!("KL gap {}", kl.gap))?;
    ensure((0.0100..=0.01704 + 1e-4).contains(&g), format!("E_G = {g}"))?;
    ensure((rob - 0.11551).abs() <= 1e-3, format!("E_ROB = {rob}"))?;
    Ok(format!(
        "E_RE = E_F = {re:.6} (gap {:.1e}), E_G = {g:.6}, E_ROB = {rob:.6}",
        kl.gap
    ))
}

fn observable(theta: f64) -> CMatrix {
    pauli_z() * C64::new(theta.cos(), 0.0) + pauli_x() * C64::new(theta.sin(), 0.0)
}

/// Nonlocal CHSH behaviors: noisy Tsirelson mixtures and Werner states
/// measured at perturbed angles.
fn random_nonlocal(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<Behavior>, String> {
    let s = Scenario::homogeneous(2, 2, 2).map_err(err)?;
    let f = chsh();
    let mut out = Vec::new();
    while out.len() < count {
        let b = if out.len() % 2 == 0 {
            let (local, _) =
                random_local_behavior(&s, rng.gen(), rng.gen_range(1..=16)).map_err(err)?;
            chsh_tsirelson()
                .mix(&local, rng.gen_range(0.0..0.3))
                .map_err(err)?
        } else {
            let p = rng.gen_range(0.8..=1.0);
            let mut angle = |base: f64| base + rng.gen_range(-0.2..0.2);
            let q = std::f64::consts::FRAC_PI_4;
            let a = MeasurementAssemblage::from_observables(vec![
                vec![observable(angle(0.0)), observable(angle(2.0 * q))],
                vec![observable(angle(q)), observable(angle(-q))],
            ])
            .map_err(err)?;
            behavior_from_quantum(&werner(p).map_err(err)?, &a, &s).map_err(err)?
        };
        if evaluate(&f, &b).map_err(err)? > 2.0 + 1e-6 {
            out.push(b);
        }
    }
    Ok(out)
}

fn criterion_4() -> Outcome {
    let f = chsh();
    let t = chsh_tsirelson();
    let t1 = theorem1(&t)?.get(MeasureKind::ETr).unwrap();
    let t2 = theorem2_bounds(&normalized_violation(&f, &t, None).map_err(err)?)
        .map_err(err)?
        .get(MeasureKind::ETr)
        .unwrap();
    ensure(t2 <= t1 + 1e-6, format!("Tsirelson: {t2} > {t1}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    for (i, b) in random_nonlocal(&mut rng, 50)?.iter().enumerate() {
        // theorem-1 E_TR is the certified TV distance
        let d = distance_to_local(b, DivergenceKind::Tv, &opts()).map_err(err)?;
        let ba = normalized_violation(&f, b, None).map_err(err)?.beta_alpha;
        ensure(
            ba <= d.certified_lower + 1e-6,
            format!("behavior {i}: {ba} > {}", d.certified_lower),
        )?;
        worst = worst.min(d.certified_lower - ba);
    }
    Ok(format!(
        "Tsirelson {t2:.6} <= {t1:.6}; 50 random behaviors, smallest margin {worst:.2e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    let mut previous = 0.0;
    for (n, vertices, expected) in [
        (3usize, 64u128, Some(0.25)),
        (5, 1024, Some(0.375)),
        (7, 1 << 14, None),
    ] {
        let f = mabk(n).map_err(err)?;
        ensure(
            f.scenario().vertex_count() == Some(vertices),
            format!("n={n} vertex count"),
        )?;
        let c = classical_bound(&f).map_err(err)?;
        ensure(
            c == 2f64.powi((n as i32 - 1) / 2),
            format!("n={n}: classical bound {c}"),
        )?;
        let b = ghz_mabk_behavior(n).map_err(err)?;
        let beta = evaluate(&f, &b).map_err(err)?;
        ensure(
            beta == 2f64.powi(n as i32 - 1),
            format!("n={n}: GHZ value {beta}"),
        )?;
        let tr = theorem2_bounds(&normalized_violation(&f, &b, None).map_err(err)?)
            .map_err(err)?
            .get(MeasureKind::ETr)
            .unwrap();
        if let Some(e) = expected {
            ensure(tr == e, format!("n={n}: E_TR = {tr}"))?;
        }
        ensure(
            tr > previous && tr < 0.5,
            format!("n={n}: E_TR = {tr} breaks the trend toward 1/2"),
        )?;
        previous = tr;
        parts.push(format!("n={n}: c={c}, beta={beta}, E_TR={tr}"));
    }
    Ok(parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    for d in 2..=4usize {
        let f = yu_oh(d).map_err(err)?;
        let alpha = alpha_normalizer(&f).map_err(err)?;
        ensure(alpha == 2.0 * d as f64, format!("d={d}: alpha {alpha}"))?;
        let c = classical_bound(&f).map_err(err)?;
        ensure(c == 0.0, format!("d={d}: classical bound {c}"))?;
        let qmax = (d as f64 - 1.0) / d as f64;
        for q in [0.25 * qmax, 0.5 * qmax, qmax] {
            let b = yu_oh_synthetic(d, q).map_err(err)?;
            let beta = evaluate(&f, &b).map_err(err)?;
            let tr = theorem2_bounds(&normalized_violation(&f, &b, None).map_err(err)?)
                .map_err(err)?
                .get(MeasureKind::ETr)
                .unwrap();
            ensure(
                (tr - beta / (2.0 * d as f64)).abs() <= 1e-12,
                format!("d={d}, q={q}: E_TR {tr}"),
            )?;
        }
        parts.push(format!("d={d}: alpha={alpha}, c={c}"));
    }
    Ok(parts.join("; "))
}

fn criterion_7() -> Outcome {
    let s = Scenario::homogeneous(2, 2, 2).map_err(err)?;
    let q = behavior_from_quantum(&phi_plus(), &MeasurementAssemblage::chsh_optimal(), &s)
        .map_err(err)?;
    let dev = q
        .table()
        .iter()
        .zip(chsh_tsirelson().table())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(dev <= 1e-10, format!("Tsirelson table deviation {dev}"))?;
    let mut ghz_dev: f64 = 0.0;
    for n in [3, 5] {
        let a = MeasurementAssemblage::mabk_optimal(n).map_err(err)?;
        let s = Scenario::homogeneous(n, 2, 2).map_err(err)?;
        let traced =
            behavior_from_quantum(&ghz_graph_state(n).map_err(err)?, &a, &s).map_err(err)?;
        let closed = ghz_mabk_behavior(n).map_err(err)?;
        for (x, y) in traced.table().iter().zip(closed.table()) {
            ghz_dev = ghz_dev.max((x - y).abs());
        }
    }
    ensure(ghz_dev <= 1e-12, format!("GHZ deviation {ghz_dev}"))?;
    Ok(format!(
        "Tsirelson deviation {dev:.1e}, GHZ deviation {ghz_dev:.1e}"
    ))
}

fn criterion_8() -> Outcome {
    let s = Scenario::homogeneous(2, 2, 2).map_err(err)?;
    let f = chsh();
    let mut parts = Vec::new();
    for p in [0.75, 0.8, 0.9, 1.0] {
        let rho = werner(p).map_err(err)?;
        let conc = wootters_concurrence(&rho).map_err(err)?;
        let b =
            behavior_from_quantum(&rho, &MeasurementAssemblage::chsh_optimal(), &s).map_err(err)?;
        let e1 = theorem1(&b)?;
        let e1_entry = e1.entry(MeasureKind::EC).unwrap();
        let t2 = theorem2_bounds(&normalized_violation(&f, &b, None).map_err(err)?).map_err(err)?;
        let refined = chsh_refined_bounds(evaluate(&f, &b).map_err(err)?).map_err(err)?;
        let candidates = [
            ("theorem1", e1_entry.value),
            ("theorem1 variant", e1_entry.variant),
            ("theorem2", t2.get(MeasureKind::EC)),
            ("chsh_refined", refined.get(MeasureKind::EC)),
        ];
        let mut largest: f64 = 0.0;
        for (name, v) in candidates {
            let v = v.ok_or(format!("p={p}: {name} E_C missing"))?;
            ensure(
                v <= conc + 1e-6,
                format!("p={p}: {name} E_C {v} > concurrence {conc}"),
            )?;
            largest = largest.max(v);
        }
        parts.push(format!("p={p}: max E_C {largest:.4} <= C {conc:.4}"));
    }
    Ok(parts.join("; "))
}

/// `Tr ρ (log₂ ρ - log₂ σ)` for full-rank states.
fn quantum_relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let log = |m: &CMatrix| {
        let e = m.clone().symmetric_eigen();
        let d = CMatrix::from_diagonal(&e.eigenvalues.map(|v| C64::new(v.max(1e-300).log2(), 0.0)));
        &e.eigenvectors * d * e.eigenvectors.adjoint()
    };
    (rho * (log(rho) - log(sigma))).trace().re
}

fn criterion_9() -> Outcome {
    let o = opts();
    // Pinsker chain on the Werner family and random nonlocal behaviors
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut behaviors = random_nonlocal(&mut rng, 10)?;
    behaviors.push(chsh_tsirelson());
    for (i, b) in behaviors.iter().enumerate() {
        let tv = distance_to_local(b, DivergenceKind::Tv, &o).map_err(err)?;
        let kl = distance_to_local(b, DivergenceKind::KlBits, &o).map_err(err)?;
        let rhs = 2.0 / LN_2 * tv.primal * tv.primal;
        ensure(
            kl.certified_lower >= rhs - 1e-6,
            format!("Pinsker fails on behavior {i}"),
        )?;
    }

    // data processing on random states and local POVMs
    let s = Scenario::new(vec![2, 2], vec![vec![2, 3], vec![3, 2]]).map_err(err)?;
    for draw in 0..100 {
        let rho = random_state(vec![2, 2], &mut rng).map_err(err)?;
        let sigma = random_state(vec![2, 2], &mut rng).map_err(err)?;
        let parties = vec![
            vec![random_povm(2, 2, &mut rng), random_povm(2, 3, &mut rng)],
            vec![random_povm(2, 3, &mut rng), random_povm(2, 2, &mut rng)],
        ];
        let a = MeasurementAssemblage::new(parties).map_err(err)?;
        let p = behavior_from_quantum(&rho, &a, &s).map_err(err)?;
        let q = behavior_from_quantum(&sigma, &a, &s).map_err(err)?;
        let trace = state_trace_distance(&rho, &sigma).map_err(err)?;
        let fid = state_fidelity(&rho, &sigma).map_err(err)?;
        let rel = quantum_relative_entropy(rho.matrix(), sigma.matrix());
        let tv = aggregate_distance(DivergenceKind::Tv, &p, &q).map_err(err)?;
        let inf = aggregate_distance(DivergenceKind::Infidelity, &p, &q).map_err(err)?;
        let kl = aggregate_distance(DivergenceKind::KlBits, &p, &q).map_err(err)?;
        ensure(
            tv <= trace + 1e-9,
            format!("draw {draw}: TV {tv} > trace distance {trace}"),
        )?;
        ensure(
            inf <= (1.0 - fid * fid).max(0.0).sqrt() + 1e-7,
            format!("draw {draw}: infidelity {inf} above the state value"),
        )?;
        ensure(
            kl <= rel + 1e-9,
            format!("draw {draw}: KL {kl} > relative entropy {rel}"),
        )?;
    }

    // certified-local behaviors sit at distance zero, and certificates recompute
    let s = Scenario::homogeneous(2, 2, 2).map_err(err)?;
    let mut worst: f64 = 0.0;
    let mut recompute: f64 = 0.0;
    for seed in 0..100u64 {
        let (b, _) = random_local_behavior(&s, seed, 1 + (seed as usize % 16)).map_err(err)?;
        for kind in DivergenceKind::ALL {
            let d = distance_to_local(&b, kind, &o).map_err(err)?;
            worst = worst.max(d.primal);
            let support: Vec<(usize, f64)> = d
                .weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(v, &w)| (v, w))
                .collect();
            let q = Behavior::mixture(&s, &support).map_err(err)?;
            recompute =
                recompute.max((aggregate_distance(kind, &b, &q).map_err(err)? - d.primal).abs());
        }
    }
    ensure(worst <= 1e-6, format!("local behavior at distance {worst}"))?;
    ensure(
        recompute <= 1e-9,
        format!("primal recomputation differs by {recompute}"),
    )?;
    Ok(format!(
        "Pinsker on 11 behaviors, 100 data-processing draws, 100 local behaviors (max distance {worst:.1e}, recomputation {recompute:.1e})"
    ))
}

/// The three printed values that the spec lists as non-reproducible.
const LISTED: [(&str, &str); 3] = [
    ("chsh-theorem1", "E_C"),
    ("chsh-override", "E_TR"),
    ("chsh-override", "E_RE, E_F"),
];

/// Additional flags caused by the averaged infidelity not being convex.
const EXTRA: [(&str, &str); 3] = [
    ("chsh-theorem1", "E_G"),
    ("chsh-override", "E_G"),
    ("chsh-override", "E_C"),
];

/// Returns `Err` only when the state differs from the analyzed one.
fn criterion_10() -> Result<(bool, String), String> {
    let report = reproduce().map_err(err)?;
    ensure(
        report.success(false),
        "non-strict reproduce does not succeed",
    )?;
    ensure(!report.success(true), "strict reproduce succeeds")?;
    let flagged: Vec<(String, String, f64)> = report
        .flagged()
        .map(|c| (c.recipe.clone(), c.quantity.clone(), c.computed))
        .collect();
    let has = |r: &str, q: &str| flagged.iter().any(|(fr, fq, _)| fr == r && fq == q);
    for (r, q) in LISTED {
        ensure(has(r, q), format!("{r} {q} is not flagged"))?;
    }
    let computed = |r: &str, q: &str| {
        flagged
            .iter()
            .find(|(fr, fq, _)| fr == r && fq == q)
            .unwrap()
            .2
    };
    ensure(
        (computed("chsh-override", "E_TR") - 0.176777).abs() < 1e-6,
        "override E_TR value",
    )?;
    ensure(
        (computed("chsh-override", "E_RE, E_F") - 0.119).abs() < 1e-3,
        "override E_RE value",
    )?;
    let extra: Vec<&(String, String, f64)> = flagged
        .iter()
        .filter(|(r, q, _)| !LISTED.contains(&(r.as_str(), q.as_str())))
        .collect();
    ensure(
        extra.len() == EXTRA.len() && EXTRA.iter().all(|(r, q)| has(r, q)),
        format!("unexpected flagged set {flagged:?}"),
    )?;
    ensure(report.count(CheckStatus::Fail) == 0, "mismatched checks")?;
    let detail = format!(
        "{} flagged, expected exactly 3; the extra {} come from the non-convex averaged infidelity \
         (theorem-1 E_G {:.6}, override E_G {:.6}, override E_C {:.6}); listed three computed as \
         E_C {:.6}, E_TR {:.6}, E_RE {:.6}",
        flagged.len(),
        extra.len(),
        computed("chsh-theorem1", "E_G"),
        computed("chsh-override", "E_G"),
        computed("chsh-override", "E_C"),
        computed("chsh-theorem1", "E_C"),
        computed("chsh-override", "E_TR"),
        computed("chsh-override", "E_RE, E_F"),
    );
    Ok((flagged.len() == 3, detail))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("CHSH TV distance", criterion_1),
        ("theorem-2 CHSH suite", criterion_2),
        ("theorem-1 CHSH suite", criterion_3),
        ("relaxation ordering", criterion_4),
        ("MABK", criterion_5),
        ("Yu-Oh", criterion_6),
        ("quantum consistency", criterion_7),
        ("oracle validity", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut unexpected = false;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                unexpected = true;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    match criterion_10() {
        Ok((true, detail)) => println!("criterion 10 PASS  known-discrepancy ledger: {detail}"),
        Ok((false, detail)) => println!("criterion 10 FAIL  known-discrepancy ledger: {detail}"),
        Err(detail) => {
            unexpected = true;
            println!("criterion 10 FAIL  known-discrepancy ledger (unanalyzed): {detail}");
        }
    }
    if unexpected {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
