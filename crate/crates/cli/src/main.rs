//! `posinv`: analysis reports for maps on finite-dimensional C*-algebras,
//! plus the shift counterexample, recurrence and split experiments.
//!
//! Exit codes: 0 consistent, 1 input error, 2 inconsistency or a failed
//! hypothesis.

mod document;
mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use posinv::exact::{format_rational, Gaussian};
use posinv::shiftlab::seq::norm_table;
use posinv::shiftlab::truncation::search_candidates;
use posinv::shiftlab::{
    audit_split, lp_split, shift_eigenvector, shift_positivity_report, truncation_experiment, ShiftElement, UnitRoot,
};
use posinv::spectral::{doubly_power_bounded, find_recurrence, RecurrenceWitness};
use posinv::structure::{analyze, DensityElement};
use posinv::{Config, Element, Error};
use serde::Serialize;
use serde_json::json;

use document::{from_json, parse_operator, parse_sequence, Operator};
use report::{certificate_check, render_text, ReportDocument, Settings, TOOL, VERSION};

#[derive(Parser)]
#[command(name = "posinv", version, about = "Positivity of inverses of positive maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full verdict report for an operator document.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// Recurrence target ‖Tⁿ − id‖.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Recurrence search budget.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// JSON element `{"blocks": ...}` to test as a sub-invariant density.
        #[arg(long)]
        density: Option<PathBuf>,
        #[command(flatten)]
        format: Format,
    },
    /// The perturbed bilateral shift: norm table, positivity witness, eigenvectors.
    Counterexample {
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(i64).range(1..=10_000))]
        max_power: i64,
        /// Print the witness against positivity of the inverse.
        #[arg(long)]
        witness: bool,
        /// Eigenvalue to verify: "p/q" turns (exact), "gauss:re,im", or decimal turns.
        #[arg(long)]
        eigen: Vec<String>,
        /// Half-width of the explicit window for eigenvectors.
        #[arg(long, default_value_t = 8)]
        window: i64,
        #[command(flatten)]
        tuning: Tuning,
        #[command(flatten)]
        format: Format,
    },
    /// Recurrence indices n_k with ‖T^{n_k} − id‖ → 0.
    Recurrence {
        path: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[command(flatten)]
        tuning: Tuning,
        #[command(flatten)]
        format: Format,
    },
    /// Factor a nonnegative sequence as x = yz with y summable and z → 0.
    Split {
        path: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        format: Format,
    },
    /// Finite truncations of the shift and a random search for finite counterexamples.
    Experiment {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long, default_value_t = 32)]
        powers: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
        #[command(flatten)]
        tuning: Tuning,
        #[command(flatten)]
        format: Format,
    },
}

#[derive(Args)]
struct Tuning {
    /// Seed for every sampled check; POSINV_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol_psd: Option<f64>,
    #[arg(long)]
    tol_eig: Option<f64>,
    #[arg(long)]
    tol_unital: Option<f64>,
    /// Random trials per sampled check.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct Format {
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Human-readable output (the default).
    #[arg(long)]
    text: bool,
}

/// Failure modes, by exit code.
enum Failure {
    Input(String),
    /// Output is still printed; the run violated a hypothesis or found an inconsistency.
    Hypothesis(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => Failure::Input(m),
            other => Failure::Hypothesis(other.to_string()),
        }
    }
}

/// What a command prints, and whether it ends in exit code 2.
struct Output {
    text: String,
    failure: Option<String>,
}

fn config(t: &Tuning) -> Result<Config, Failure> {
    let mut seed = t.seed;
    if let Ok(s) = std::env::var("POSINV_SEED") {
        seed = s.trim().parse().map_err(|_| Failure::Input(format!("POSINV_SEED: cannot parse {s:?} as an unsigned integer")))?;
    }
    let mut cfg = Config::with_seed(seed).with_samples(t.samples);
    for (name, flag, slot) in [
        ("--tol-psd", t.tol_psd, &mut cfg.tol.psd),
        ("--tol-eig", t.tol_eig, &mut cfg.tol.eig),
        ("--tol-unital", t.tol_unital, &mut cfg.tol.unital),
    ] {
        if let Some(v) = flag {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Failure::Input(format!("{name} must be a finite nonnegative number, got {v}")));
            }
            *slot = v;
        }
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Operator, Failure> {
    parse_operator(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn positive_eps(eps: f64) -> Result<(), Failure> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--eps must be a positive number, got {eps}")))
    }
}

fn cmd_analyze(
    path: &Path,
    tuning: &Tuning,
    eps: f64,
    budget: u64,
    density: Option<&Path>,
    json: bool,
) -> Result<Output, Failure> {
    positive_eps(eps)?;
    let mut cfg = config(tuning)?;
    cfg.recurrence_eps = eps;
    cfg.recurrence_budget = budget;
    let op = load(path)?;
    let density = match density {
        Some(p) => {
            let b: Element = from_json(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            if b.shape() != op.map.algebra().block_dims() {
                return Err(Failure::Input(format!(
                    "{}: density has blocks {:?}, the algebra has {:?}",
                    p.display(),
                    b.shape(),
                    op.map.algebra().block_dims()
                )));
            }
            Some(DensityElement::new(b, &cfg.tol).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let r = analyze(&op.map, density.as_ref(), &cfg)?;
    let certificates: Vec<_> = op.certificates.iter().map(|c| certificate_check(c, &r)).collect();
    let consistent = r.is_consistent() && certificates.iter().all(|c| c.consistent);
    let doc = ReportDocument {
        tool: TOOL.into(),
        version: VERSION.into(),
        seed: cfg.seed,
        tolerances: cfg.tol.clone(),
        settings: Settings {
            samples: cfg.samples,
            horizon: cfg.horizon,
            recurrence_eps: eps,
            recurrence_budget: budget,
            density_supplied: density.is_some(),
        },
        input_kind: op.kind.into(),
        certificates,
        metadata: op.metadata,
        consistent,
        report: r,
    };
    let text = if json { to_json(&doc) } else { render_text(&doc) };
    let failure = (!consistent).then(|| {
        let lines: Vec<String> = doc.report.inconsistencies().iter().map(|i| format!("line {}", i.id)).collect();
        format!("inconsistent report: {}", if lines.is_empty() { "input certificate refuted".into() } else { lines.join(", ") })
    });
    Ok(Output { text, failure })
}

/// `(−e₀, 1)`-style rendering of an element with finitely supported sequence part.
fn shift_element_text(xi: &ShiftElement<Gaussian>) -> String {
    let s = &xi.seq;
    let mut terms = Vec::new();
    for j in s.lo()..=s.hi() {
        let c = s.get(j).to_string();
        match c.as_str() {
            "0" => {}
            "1" => terms.push(format!("e{}", subscript(j))),
            "-1" => terms.push(format!("−e{}", subscript(j))),
            _ => terms.push(format!("({c})e{}", subscript(j))),
        }
    }
    let (l, r) = (s.tail_left().to_string(), s.tail_right().to_string());
    if l != "0" || r != "0" {
        terms.push(format!("tails {l} | {r}"));
    }
    let x = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
    format!("({x}, {})", xi.alpha)
}

fn subscript(j: i64) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    let digits: String = j.unsigned_abs().to_string().chars().map(|c| DIGITS[c as usize - '0' as usize]).collect();
    if j < 0 {
        format!("₋{digits}")
    } else {
        digits
    }
}

fn cmd_counterexample(
    max_power: i64,
    witness: bool,
    eigen: &[String],
    window: i64,
    tuning: &Tuning,
    json: bool,
) -> Result<Output, Failure> {
    if !(0..=64).contains(&window) {
        return Err(Failure::Input(format!("--window must lie in 0..=64, got {window}")));
    }
    let cfg = config(tuning)?;
    let roots = eigen
        .iter()
        .map(|s| UnitRoot::parse(s).map(|r| (s.clone(), r)).map_err(|e| Failure::Input(format!("--eigen {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let table = norm_table(max_power);
    let positivity = witness.then(|| shift_positivity_report(cfg.samples, &mut cfg.rng(0x5348)));
    let mut reports = Vec::new();
    for (s, r) in &roots {
        reports.push((s.clone(), shift_eigenvector(r, window)?));
    }
    let mut problems = Vec::new();
    if let Some(p) = &positivity {
        if p.forward_failures > 0 || !p.unit_fixed || p.inverse_positive_at_witness {
            problems.push("positivity witness did not reproduce".to_string());
        }
    }
    for (s, r) in &reports {
        if !r.verified {
            problems.push(format!("eigenvalue {s} not verified"));
        }
    }
    let text = if json {
        let eig: Vec<_> = reports.iter().map(|(s, r)| json!({"input": s, "report": r})).collect();
        to_json(&json!({
            "tool": TOOL,
            "version": VERSION,
            "seed": cfg.seed,
            "norms": table,
            "positivity": positivity,
            "eigenvectors": eig,
        }))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "{:>6}  ‖Tⁿ‖", "n");
        for row in &table {
            let _ = writeln!(out, "{:>6}  {}", row.n, format_rational(&row.norm));
        }
        if let Some(p) = &positivity {
            let _ = writeln!(
                out,
                "witness T⁻¹{} = {}: {}",
                shift_element_text(&p.witness_input),
                shift_element_text(&p.witness_output),
                if p.inverse_positive_at_witness { "positive" } else { "not positive" }
            );
            let _ = writeln!(out, "forward positivity {}/{} positive inputs stay positive", p.samples - p.forward_failures, p.samples);
            let _ = writeln!(out, "unit fixed by T and T⁻¹: {}", p.unit_fixed);
        }
        for (s, r) in &reports {
            let _ = writeln!(
                out,
                "eigenvalue {s} = {:.6}{:+.6}i: {}, eigenspace dimension {}, {}",
                r.lambda[0],
                r.lambda[1],
                if r.verified { "verified" } else { "NOT verified" },
                r.dimension,
                if r.exact { "exact" } else { "floating point" }
            );
        }
        out
    };
    Ok(Output { text, failure: (!problems.is_empty()).then(|| problems.join("; ")) })
}

fn witness_table(out: &mut String, w: &RecurrenceWitness) {
    let _ = writeln!(out, "{:>10}  ‖Tⁿ − id‖", "n");
    for (n, d) in w.indices.iter().zip(&w.defects) {
        let _ = writeln!(out, "{n:>10}  {d:.3e}");
    }
}

fn cmd_recurrence(path: &Path, eps: f64, budget: u64, tuning: &Tuning, json: bool) -> Result<Output, Failure> {
    positive_eps(eps)?;
    let cfg = config(tuning)?;
    let op = load(path)?;
    let t = &op.map;
    let dpb = doubly_power_bounded(t, &cfg)?;
    if !dpb.is_certified() {
        let spectrum = posinv::spectral::classify_spectrum(t, cfg.tol.unimodular)?;
        let text = if json {
            to_json(&json!({"doubly_power_bounded": dpb, "spectrum": spectrum}))
        } else {
            let mut out = format!(
                "not doubly power bounded ({:?}): spectral radius {:.9}, in unit circle {}, 0 in spectrum {}\n",
                dpb.status, spectrum.spectral_radius, spectrum.in_unit_circle, spectrum.zero_in_spectrum
            );
            if let Some(k) = dpb.detail.get("kappa_v") {
                let _ = writeln!(out, "defective: eigenbasis condition number {k:.3e}");
            }
            out
        };
        return Ok(Output { text, failure: Some("hypothesis failed: the map is not doubly power bounded".into()) });
    }
    let (witness, reached) = match find_recurrence(t, eps, budget, &cfg) {
        Ok(w) => (w, true),
        Err(Error::BudgetExceeded { best, .. }) => (*best, false),
        Err(e) => return Err(e.into()),
    };
    let n = if reached { witness.last_index() } else { witness.best_index() }.unwrap_or(1);
    let inverse = t.inverse(cfg.tol.sing)?;
    let error = t.power(n - 1).distance(&inverse.map);
    let text = if json {
        to_json(&json!({
            "tool": TOOL,
            "version": VERSION,
            "eps": eps,
            "budget": budget,
            "reached": reached,
            "witness": witness,
            "index": n,
            "inverse_error": error,
        }))
    } else {
        let mut out = String::new();
        witness_table(&mut out, &witness);
        let _ = writeln!(out, "n_K = {n}, ‖T^(n_K−1) − T⁻¹‖ = {error:.3e}");
        if !reached {
            let _ = writeln!(out, "target {eps:e} not reached within {budget} steps");
        }
        out
    };
    let failure = (!reached).then(|| format!("recurrence budget {budget} exhausted, best defect {:e}", witness.best_defect()));
    Ok(Output { text, failure })
}

fn cmd_split(path: &Path, p: f64, json: bool) -> Result<Output, Failure> {
    let x = parse_sequence(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let r = lp_split(&x, p)?;
    let failure = audit_split(&r).err().map(|e| format!("split audit failed: {e}"));
    let text = if json {
        to_json(&r)
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "{:>8}  {:>16}  {:>16}  {:>16}", "k", "x", "y", "z");
        let roots = r.y_root.as_ref().zip(r.z_root.as_ref());
        for k in 0..r.x.len() {
            let _ = writeln!(
                out,
                "{k:>8}  {:>16}  {:>16}  {:>16}",
                format_rational(&x[k]),
                format_rational(&r.y[k]),
                format_rational(&r.z[k])
            );
            if let Some((y, z)) = roots {
                let _ = writeln!(out, "{:>8}  {:>16}  {:>16.9e}  {:>16.9e}", "root", "", y[k], z[k]);
            }
        }
        let _ = writeln!(out, "{:>6}  {:>8}  increment", "stage", "k_n");
        for (i, (k, inc)) in r.stage_indices.iter().zip(&r.increments).enumerate() {
            let _ = writeln!(out, "{:>6}  {k:>8}  {}", i + 1, format_rational(inc));
        }
        out
    };
    Ok(Output { text, failure })
}

fn cmd_experiment(max_n: usize, powers: u32, trials: usize, max_dim: usize, tuning: &Tuning, json: bool) -> Result<Output, Failure> {
    if max_n == 0 || max_n > 12 || max_dim > 8 {
        return Err(Failure::Input("--max-n must lie in 1..=12 and --max-dim in 0..=8".into()));
    }
    let cfg = config(tuning)?;
    let rows = truncation_experiment(max_n, powers, &cfg)?;
    let search = search_candidates(trials, max_dim, &cfg)?;
    let inconsistent = rows.iter().map(|r| r.inconsistencies).sum::<usize>();
    let text = if json {
        to_json(&json!({"tool": TOOL, "version": VERSION, "seed": cfg.seed, "truncations": rows, "search": search}))
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "{:>3} {:>4} {:>8} {:>8} {:>10} {:>12} {:>14}", "N", "dim", "positive", "circle", "inv. pos.", "max‖T⁻ᵏ‖", "inconsistent");
        for r in &rows {
            let _ = writeln!(
                out,
                "{:>3} {:>4} {:>8} {:>8} {:>10} {:>12.4} {:>14}",
                r.n, r.dim, r.positive, r.in_unit_circle, r.inverse_positive, r.max_inverse_power_norm, r.inconsistencies
            );
        }
        let _ = writeln!(
            out,
            "search: {} trials, {} positive unital, {} with spectrum in the circle, {} with positive inverse, {} counterexamples",
            search.trials,
            search.positive_unital,
            search.circle_spectrum,
            search.inverse_positive,
            search.counterexamples.len()
        );
        out
    };
    let failure = if inconsistent > 0 {
        Some(format!("{inconsistent} inconsistent implication lines among the truncations"))
    } else if !search.counterexamples.is_empty() {
        Some("finite-dimensional counterexample candidate found".into())
    } else {
        None
    };
    Ok(Output { text, failure })
}

fn run(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Analyze { path, tuning, eps, budget, density, format } => {
            cmd_analyze(&path, &tuning, eps, budget, density.as_deref(), format.json)
        }
        Command::Counterexample { max_power, witness, eigen, window, tuning, format } => {
            cmd_counterexample(max_power, witness, &eigen, window, &tuning, format.json)
        }
        Command::Recurrence { path, eps, budget, tuning, format } => cmd_recurrence(&path, eps, budget, &tuning, format.json),
        Command::Split { path, p, format } => cmd_split(&path, p, format.json),
        Command::Experiment { max_n, powers, trials, max_dim, tuning, format } => {
            cmd_experiment(max_n, powers, trials, max_dim, &tuning, format.json)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            match out.failure {
                None => ExitCode::SUCCESS,
                Some(msg) => {
                    eprintln!("posinv: {msg}");
                    ExitCode::from(2)
                }
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("posinv: error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Hypothesis(msg)) => {
            eprintln!("posinv: {msg}");
            ExitCode::from(2)
        }
    }
}
