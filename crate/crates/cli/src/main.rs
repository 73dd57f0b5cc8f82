//! `bellbound`: distances to the local polytope, Bell values and entanglement
//! lower bounds from the command line.
//!
//! Exit codes: 0 success, 1 reproduction mismatch or solver failure,
//! 2 invalid input, 3 undefined normalization (α = 0), 4 capacity exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use bellbound_core::bounds::{chsh_refined_bounds, theorem1_bounds, theorem2_bounds, BoundReport};
use bellbound_core::divergence::{
    distance_to_local, distance_to_restricted_local, DistanceOptions, DistanceResult,
    DivergenceKind,
};
use bellbound_core::inequality::{
    alpha_normalizer, chsh, classical_bound, evaluate, load_functional, mabk, normalized_violation,
    yu_oh, BellFunctional,
};
use bellbound_core::presets::example;
use bellbound_core::quantum::load_quantum;
use bellbound_core::reproduce::reproduce_with;
use bellbound_core::scenario::{
    behavior_from_json, behavior_to_json, enumerate_vertices_with_cap, random_local_behavior,
    scenario_from_json, validate_behavior, Behavior, Scenario, DEFAULT_VERTEX_CAP,
};
use bellbound_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bellbound",
    version,
    about = "Entanglement lower bounds from Bell nonlocality"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal divergence from a behavior to the local polytope.
    Distance {
        #[command(flatten)]
        input: BehaviorInput,
        #[arg(long, value_enum, default_value_t = Kind::Tv)]
        kind: Kind,
        #[command(flatten)]
        solver: SolverArgs,
        /// Restrict the local set to behaviors with Bell value at most this.
        #[arg(long)]
        c_override: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lower bounds on entanglement measures.
    Bound {
        #[command(flatten)]
        input: BehaviorInput,
        #[arg(long, value_enum, default_value_t = Method::Theorem2)]
        method: Method,
        /// Replace the classical bound c of the functional.
        #[arg(long)]
        c_override: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Value of a Bell functional on a behavior.
    BellValue {
        #[command(flatten)]
        input: BehaviorInput,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximum of a functional over the local polytope.
    ClassicalBound {
        /// `chsh`, `mabk:N`, `yu-oh:D` or a functional file.
        #[arg(long)]
        functional: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Count or list the deterministic vertices of a scenario.
    Vertices {
        /// JSON file with `parties`, `settings` and `outcomes`.
        scenario: PathBuf,
        /// Print every strategy.
        #[arg(long)]
        list: bool,
        /// Print a random local behavior mixing this many vertices instead.
        #[arg(long)]
        random_local: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Behavior generated by a state and measurements given in a JSON file.
    BehaviorFromQuantum {
        input: PathBuf,
        /// Write the behavior here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recompute the reference examples and compare with published figures.
    Reproduce {
        /// Treat known discrepancies as failures.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct BehaviorInput {
    /// Behavior JSON file.
    behavior: Option<PathBuf>,
    /// Built-in example: chsh-tsirelson, chsh-werner, mabk, yu-oh.
    #[arg(long, conflicts_with = "behavior")]
    example: Option<String>,
    /// Party count for `--example mabk`.
    #[arg(long)]
    n: Option<usize>,
    /// Dimension for `--example yu-oh`.
    #[arg(long)]
    d: Option<usize>,
    /// Visibility for `--example chsh-werner`.
    #[arg(long)]
    p: Option<f64>,
    /// `chsh`, `mabk:N`, `yu-oh:D` or a functional file. Defaults to the
    /// example's own functional.
    #[arg(long)]
    functional: Option<String>,
}

#[derive(Args)]
struct SolverArgs {
    /// Duality-gap tolerance of the iterative solvers.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long)]
    json: bool,
}

impl OutputArgs {
    fn json(&self) -> bool {
        self.json || self.format == Format::Json
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tv,
    Kl,
    #[value(name = "if")]
    Infidelity,
}

impl From<Kind> for DivergenceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Tv => DivergenceKind::Tv,
            Kind::Kl => DivergenceKind::KlBits,
            Kind::Infidelity => DivergenceKind::Infidelity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Theorem1,
    Theorem2,
    ChshRefined,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroNormalizer(_) => 3,
            Error::Capacity { .. } => 4,
            Error::Solver(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn solver_options(args: &SolverArgs) -> CliResult<DistanceOptions> {
    if !(args.tol > 0.0) || !args.tol.is_finite() {
        return Err(invalid(format!("--tol must be positive, got {}", args.tol)));
    }
    Ok(DistanceOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        ..DistanceOptions::default()
    })
}

fn parse_functional(spec: &str) -> CliResult<BellFunctional> {
    let param = |s: &str| -> CliResult<usize> {
        s.parse()
            .map_err(|_| invalid(format!("bad functional parameter in {spec:?}")))
    };
    if spec == "chsh" {
        return Ok(chsh());
    }
    if let Some(n) = spec.strip_prefix("mabk:") {
        return Ok(mabk(param(n)?)?);
    }
    if let Some(d) = spec.strip_prefix("yu-oh:") {
        return Ok(yu_oh(param(d)?)?);
    }
    let loaded = load_functional(spec)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.functional)
}

fn read_behavior(path: &PathBuf) -> CliResult<Behavior> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let behavior = behavior_from_json(&text)?;
    let violations = validate_behavior(&behavior);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(invalid(format!(
            "invalid behavior {}:\n{}",
            path.display(),
            lines.join("\n")
        )));
    }
    Ok(behavior)
}

/// Behavior plus the functional that goes with it, if any.
fn resolve(input: &BehaviorInput) -> CliResult<(Behavior, Option<BellFunctional>)> {
    let (behavior, mut functional) = match (&input.behavior, &input.example) {
        (Some(path), None) => (read_behavior(path)?, None),
        (None, Some(name)) => {
            let ex = example(name, input.n, input.d, input.p)?;
            (ex.behavior, Some(ex.functional))
        }
        _ => return Err(invalid("give a behavior file or --example")),
    };
    if let Some(spec) = &input.functional {
        functional = Some(parse_functional(spec)?);
    }
    if let Some(f) = &functional {
        if f.scenario() != behavior.scenario() {
            return Err(invalid(format!(
                "functional {} and behavior use different scenarios",
                f.name()
            )));
        }
    }
    Ok((behavior, functional))
}

fn need_functional(f: Option<BellFunctional>) -> CliResult<BellFunctional> {
    f.ok_or_else(|| invalid("this command needs a functional: pass --functional"))
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::from(Error::from(e)))
}

fn render_distance(d: &DistanceResult) -> String {
    let support = d.weights.iter().filter(|&&w| w > 0.0).count();
    format!(
        "kind             {}\nprimal           {:.12}\ncertified_lower  {:.12}\ngap              {:.3e}\n\
         iterations       {}\nconverged        {}\nsupport          {} vertices\n",
        d.kind, d.primal, d.certified_lower, d.gap, d.iterations, d.converged, support
    )
}

fn distance(
    behavior: &Behavior,
    kind: DivergenceKind,
    functional: Option<&BellFunctional>,
    c_override: Option<f64>,
    opts: &DistanceOptions,
) -> CliResult<DistanceResult> {
    Ok(match c_override {
        Some(c) => {
            let f = functional.ok_or_else(|| invalid("--c-override needs a functional"))?;
            distance_to_restricted_local(behavior, kind, f, c, opts)?
        }
        None => distance_to_local(behavior, kind, opts)?,
    })
}

fn bound_report(
    behavior: &Behavior,
    functional: Option<BellFunctional>,
    method: Method,
    c_override: Option<f64>,
    opts: &DistanceOptions,
) -> CliResult<BoundReport> {
    match method {
        Method::Theorem1 => {
            let f = functional.as_ref();
            let tv = distance(behavior, DivergenceKind::Tv, f, c_override, opts)?;
            let kl = distance(behavior, DivergenceKind::KlBits, f, c_override, opts)?;
            let inf = distance(behavior, DivergenceKind::Infidelity, f, c_override, opts)?;
            let mut report = theorem1_bounds(&tv, &kl, &inf)?;
            if let Some(c) = c_override {
                report.notes.push(format!(
                    "distances to local behaviors with Bell value <= {c}"
                ));
            }
            Ok(report)
        }
        Method::Theorem2 => {
            let f = need_functional(functional)?;
            Ok(theorem2_bounds(&normalized_violation(
                &f, behavior, c_override,
            )?)?)
        }
        Method::ChshRefined => {
            let f = functional.unwrap_or_else(chsh);
            if behavior.scenario() != &Scenario::homogeneous(2, 2, 2)? {
                return Err(invalid(
                    "chsh-refined needs the two-party, two-setting, two-outcome scenario",
                ));
            }
            if c_override.is_some() {
                return Err(invalid("chsh-refined does not take --c-override"));
            }
            Ok(chsh_refined_bounds(evaluate(&f, behavior)?)?)
        }
    }
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Distance {
            input,
            kind,
            solver,
            c_override,
            output,
        } => {
            let opts = solver_options(&solver)?;
            let (behavior, functional) = resolve(&input)?;
            let d = distance(
                &behavior,
                kind.into(),
                functional.as_ref(),
                c_override,
                &opts,
            )?;
            if output.json() {
                println!("{}", to_json(&d)?);
            } else {
                print!("{}", render_distance(&d));
            }
        }
        Command::Bound {
            input,
            method,
            c_override,
            solver,
            output,
        } => {
            let opts = solver_options(&solver)?;
            let (behavior, functional) = resolve(&input)?;
            let report = bound_report(&behavior, functional, method, c_override, &opts)?;
            if output.json() {
                println!("{}", report.to_json()?);
            } else {
                print!("{}", report.render_table());
            }
        }
        Command::BellValue { input, output } => {
            let (behavior, functional) = resolve(&input)?;
            let f = need_functional(functional)?;
            let beta = evaluate(&f, &behavior)?;
            if output.json() {
                println!(
                    "{}",
                    to_json(&serde_json::json!({ "functional": f.name(), "beta": beta }))?
                );
            } else {
                println!("{} = {beta:.12}", f.name());
            }
        }
        Command::ClassicalBound { functional, output } => {
            let f = parse_functional(&functional)?;
            let c = classical_bound(&f)?;
            let alpha = alpha_normalizer(&f).ok();
            if output.json() {
                let value = serde_json::json!({
                    "functional": f.name(),
                    "classical_bound": c,
                    "declared": f.declared_bound(),
                    "alpha": alpha,
                });
                println!("{}", to_json(&value)?);
            } else {
                println!("{} classical bound = {c}", f.name());
                if let Some(a) = alpha {
                    println!("alpha = {a}");
                }
            }
        }
        Command::Vertices {
            scenario,
            list,
            random_local,
            seed,
            output,
        } => {
            let text = std::fs::read_to_string(&scenario)
                .map_err(|e| invalid(format!("cannot read {}: {e}", scenario.display())))?;
            let s = scenario_from_json(&text)?;
            if let Some(k) = random_local {
                let (b, _) = random_local_behavior(&s, seed, k)?;
                println!("{}", behavior_to_json(&b)?);
                return Ok(0);
            }
            let count = s.vertex_count();
            if list {
                let set = enumerate_vertices_with_cap(&s, DEFAULT_VERTEX_CAP)?;
                if output.json() {
                    let strategies: Vec<&Vec<Vec<usize>>> =
                        set.strategies.iter().map(|v| &v.outcomes).collect();
                    println!("{}", to_json(&strategies)?);
                } else {
                    for (i, v) in set.strategies.iter().enumerate() {
                        println!("{i}\t{:?}", v.outcomes);
                    }
                }
            } else {
                let count = count.ok_or_else(|| {
                    Failure::from(Error::Capacity {
                        what: "vertex",
                        count: u128::MAX,
                        cap: DEFAULT_VERTEX_CAP as u128,
                    })
                })?;
                if output.json() {
                    println!(
                        "{}",
                        to_json(&serde_json::json!({ "vertices": count.to_string() }))?
                    );
                } else {
                    println!("{count}");
                }
            }
        }
        Command::BehaviorFromQuantum { input, output } => {
            let setup = load_quantum(&input)?;
            let json = behavior_to_json(&setup.behavior()?)?;
            match output {
                Some(path) => std::fs::write(&path, json)
                    .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?,
                None => println!("{json}"),
            }
        }
        Command::Reproduce {
            strict,
            json,
            solver,
        } => {
            let report = reproduce_with(&solver_options(&solver)?)?;
            if json {
                println!("{}", report.to_json()?);
            } else {
                print!("{}", report.render_table());
            }
            return Ok(if report.success(strict) { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("BELLBOUND_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            invalid(format!(
                "BELLBOUND_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        if n == 0 {
            return Err(invalid("BELLBOUND_THREADS must be positive"));
        }
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
