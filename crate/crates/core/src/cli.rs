//! Command-line front end.
//!
//! Exit codes: 0 when the space has p-negative type (or the requested
//! quantity was computed), 1 when it does not (or a bound is inapplicable),
//! 2 on input errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{lower_bound_combined, lower_bound_direct, BoundReport};
use crate::combine::{build_combination, compose_gaps, extremal_simplex, CombinationSpace, GluePlan};
use crate::error::{Error, Result};
use crate::gap::{gap, GapOptions, GapResult};
use crate::io::{plan_from_value, simplex_to_value, space_from_value, space_to_value, Rendered};
use crate::scalar::Scalar;
use crate::simplex::{gamma, WeightedSimplex};
use crate::space::SemiMetricSpace;
use crate::verdict::{
    has_negative_type, supremal_p_with, TypeCertificate, TypeVerdict, DEFAULT_BISECTION_TOL, DEFAULT_EIG_TOL,
    DEFAULT_P_MAX,
};

pub const SCHEMA: &str = "negtype.report/1";
pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "negtype", version, about = "p-negative type, gaps and bounds for finite semi-metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized searches.
    #[arg(long, global = true, env = "NEGTYPE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(clap::Args, Debug, Clone)]
struct GapArgs {
    /// Random starts per sign pattern when the problem is not convex.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Enumerate all sign patterns up to this many points.
    #[arg(long, default_value_t = 12)]
    exact_cutoff: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide p-negative type.
    Check {
        input: PathBuf,
        #[arg(long, default_value = "1")]
        p: Scalar,
        /// Relative eigenvalue threshold.
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        tol: f64,
    },
    /// Compute the p-negative type gap and an extremal simplex.
    Gap {
        input: PathBuf,
        #[arg(long, default_value = "1")]
        p: Scalar,
        #[command(flatten)]
        search: GapArgs,
    },
    /// Supremal p-negative type by bisection.
    Supremal {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        pmax: f64,
        #[arg(long, default_value_t = DEFAULT_BISECTION_TOL)]
        tol: f64,
    },
    /// Build a combination from a glue plan and compose component gaps.
    Combine {
        plan: PathBuf,
        /// Include the combined distance matrix.
        #[arg(long)]
        emit_space: bool,
        /// Include the extremal simplex built from component witnesses.
        #[arg(long)]
        emit_extremal: bool,
        /// Also run the optimizer on the combined space.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        search: GapArgs,
    },
    /// Lower bound on the supremal p-negative type (space: direct, plan: combined).
    Bound {
        input: PathBuf,
        /// Exponent; defaults to 1 for spaces and to the plan's exponent for plans.
        #[arg(long)]
        p: Option<Scalar>,
        #[command(flatten)]
        search: GapArgs,
    },
    /// Everything above for one input.
    Report {
        input: PathBuf,
        #[arg(long)]
        p: Option<Scalar>,
        #[arg(long, default_value_t = DEFAULT_P_MAX)]
        pmax: f64,
        #[arg(long, default_value_t = DEFAULT_BISECTION_TOL)]
        tol: f64,
        #[command(flatten)]
        search: GapArgs,
    },
}

enum Input {
    Space(SemiMetricSpace),
    Plan(GluePlan),
}

struct Loaded {
    path: PathBuf,
    digest: String,
    input: Input,
}

impl Loaded {
    fn space(&self) -> Result<SemiMetricSpace> {
        match &self.input {
            Input::Space(s) => Ok(s.clone()),
            Input::Plan(plan) => Ok(build_combination(plan)?.space),
        }
    }
}

fn load(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path)?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| Error::Parse(format!("input is not UTF-8: {e}")))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
    let input = if value.get("components").is_some() {
        Input::Plan(plan_from_value(value)?)
    } else {
        Input::Space(space_from_value(value)?)
    };
    Ok(Loaded { path: path.to_path_buf(), digest, input })
}

/// `"5/43 (0.116279069767)"` for exact non-integers, plain otherwise.
pub fn show(s: &Scalar) -> String {
    match s {
        Scalar::Exact(r) if !r.is_integer() => format!("{s} ({:.12})", s.to_f64()),
        _ => s.to_string(),
    }
}

struct Outcome {
    code: i32,
    result: Value,
    text: String,
}

fn gap_options(search: &GapArgs, seed: u64) -> GapOptions {
    GapOptions { restarts: search.restarts, exact_cutoff: search.exact_cutoff, seed, ..GapOptions::default() }
}

fn verdict_json(s: &SemiMetricSpace, v: &TypeVerdict) -> Value {
    let mut out = serde_json::to_value(v).expect("verdict serializes");
    out["labels"] = json!(s.labels());
    out
}

fn verdict_text(s: &SemiMetricSpace, v: &TypeVerdict) -> String {
    let mut t = String::new();
    let status = match (v.has_type, v.strict, v.marginal) {
        (true, true, _) => "has strict p-negative type",
        (true, false, true) => "has p-negative type (marginal)",
        (true, false, false) => "has p-negative type",
        (false, _, _) => "does not have p-negative type",
    };
    let _ = writeln!(t, "p = {}: {status}", v.p);
    let _ = writeln!(t, "  max eigenvalue on zero-sum hyperplane: {:.6e} (threshold {:.3e})", v.max_eigenvalue, v.threshold);
    if let TypeCertificate::Violation { alpha, value } = &v.certificate {
        let coeffs: Vec<String> = s.labels().iter().zip(alpha).map(|(l, a)| format!("{l}: {a:.6}")).collect();
        let _ = writeln!(t, "  violating coefficients (sum |a| = 2, form value {value:.6e}):");
        let _ = writeln!(t, "    {}", coeffs.join(", "));
    }
    t
}

fn gap_json(s: &SemiMetricSpace, r: &GapResult) -> Value {
    json!({
        "p": Rendered::from(&r.p),
        "gap": Rendered::from(&r.gap),
        "witness": simplex_to_value(&r.witness, s),
        "method": r.method,
        "certified_tol": r.certified_tol,
        "has_type": r.has_type,
        "exact": r.exact,
        "exhaustive": r.exhaustive,
        "patterns": r.patterns,
    })
}

fn gap_text(s: &SemiMetricSpace, r: &GapResult) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "gap (p = {}): {}", r.p, show(&r.gap));
    let _ = writeln!(t, "  witness: {}", r.witness.display(s));
    let search = if r.exhaustive { "all" } else { "sampled" };
    let _ = writeln!(
        t,
        "  {search} {} sign patterns; exact recovery: {}; certified within {:.3e}{}",
        r.patterns,
        if r.exact { "yes" } else { "no" },
        r.certified_tol,
        if r.has_type { "" } else { " (no p-negative type: local search only)" }
    );
    t
}

fn bound_text(r: &BoundReport) -> String {
    format!(
        "lower bound on supremal p-negative type ({}): {:.6}\n  p = {}, gap {}, scaled diameter {}, n = {}, c(n) = {}\n",
        serde_json::to_value(r.which).expect("kind serializes").as_str().unwrap_or_default(),
        r.lower_bound,
        r.p,
        show(&r.gap_used),
        show(&r.scaled_diameter),
        r.n,
        show(&r.c_n)
    )
}

fn inapplicable(reason: &Error) -> (Value, String) {
    let text = match reason {
        Error::BoundInapplicable(_) => format!("{reason}\n"),
        _ => format!("bound inapplicable: {reason}\n"),
    };
    (json!({ "applicable": false, "reason": reason.to_string() }), text)
}

fn cmd_check(l: &Loaded, p: &Scalar, tol: f64) -> Result<Outcome> {
    let s = l.space()?;
    let v = has_negative_type(&s, p.to_f64(), tol)?;
    Ok(Outcome {
        code: if v.has_type { EXIT_OK } else { EXIT_NEGATIVE },
        result: verdict_json(&s, &v),
        text: verdict_text(&s, &v),
    })
}

fn cmd_gap(l: &Loaded, p: &Scalar, opts: &GapOptions) -> Result<Outcome> {
    let s = l.space()?;
    let r = gap(&s, p, opts)?;
    Ok(Outcome { code: EXIT_OK, result: gap_json(&s, &r), text: gap_text(&s, &r) })
}

fn cmd_supremal(l: &Loaded, pmax: f64, tol: f64) -> Result<Outcome> {
    let s = l.space()?;
    let sup = supremal_p_with(&s, pmax, tol, DEFAULT_EIG_TOL)?;
    Ok(Outcome {
        code: EXIT_OK,
        result: json!({ "supremal": sup, "p_max": pmax, "tol": tol }),
        text: format!("supremal p-negative type: {sup} (bisection on [0, {pmax}], tol {tol:e})\n"),
    })
}

struct Combined {
    result: Value,
    text: String,
    component_gaps: Vec<GapResult>,
}

fn combine_summary(c: &CombinationSpace, opts: &GapOptions, emit_space: bool, emit_extremal: bool, verify: bool) -> Result<Combined> {
    let p = &c.p;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "combination of {} components at p = {}: {} points",
        c.component_count(),
        p,
        c.space.len()
    );
    for g in &c.glue_points {
        let _ = writeln!(text, "  glue-point {} (alias {}.{})", g.label, g.alias.component, g.alias.label);
    }
    for r in &c.renamed {
        let _ = writeln!(text, "  renamed {}.{} -> {}", r.component, r.from, r.to);
    }
    let component_gaps = c.components.iter().map(|comp| gap(&comp.space, p, opts)).collect::<Result<Vec<_>>>()?;
    let mut comps = Vec::new();
    for (comp, r) in c.components.iter().zip(&component_gaps) {
        let _ = writeln!(text, "  component {}: gap {}", comp.name, show(&r.gap));
        comps.push(json!({ "name": comp.name, "points": comp.space.len(), "gap": gap_json(&comp.space, r) }));
    }
    let gaps: Vec<Scalar> = component_gaps.iter().map(|r| r.gap.clone()).collect();
    let mut result = json!({
        "p": Rendered::from(p),
        "points": c.space.len(),
        "labels": c.space.labels(),
        "provenance": c.provenance,
        "glue_points": c.glue_points,
        "renamed": c.renamed,
        "components": comps,
    });
    match compose_gaps(&gaps) {
        Ok(composed) => {
            let _ = writeln!(text, "composed gap: {}", show(&composed));
            result["composed_gap"] = json!(Rendered::from(&composed));
            if emit_extremal {
                let witnesses: Vec<(WeightedSimplex, Scalar)> =
                    component_gaps.iter().map(|r| (r.witness.clone(), r.gap.clone())).collect();
                let d = extremal_simplex(c, &witnesses)?;
                let value = gamma(&c.space, &d, p)?;
                let _ = writeln!(text, "extremal simplex: {}", d.display(&c.space));
                let _ = writeln!(text, "  gamma: {}", show(&value));
                result["extremal"] = json!({ "simplex": simplex_to_value(&d, &c.space), "gamma": Rendered::from(&value) });
            }
        }
        Err(e) => {
            let _ = writeln!(text, "composed gap: not applicable ({e})");
            result["composed_gap"] = Value::Null;
            result["composed_gap_reason"] = json!(e.to_string());
        }
    }
    if verify {
        let r = gap(&c.space, p, opts)?;
        let _ = writeln!(text, "optimizer on combined space: {}", show(&r.gap));
        result["verify"] = gap_json(&c.space, &r);
    }
    if emit_space {
        result["space"] = space_to_value(&c.space);
        let _ = writeln!(text, "{}", serde_json::to_string(&space_to_value(&c.space)).expect("space serializes"));
    }
    Ok(Combined { result, text, component_gaps })
}

fn cmd_combine(l: &Loaded, opts: &GapOptions, emit_space: bool, emit_extremal: bool, verify: bool) -> Result<Outcome> {
    let Input::Plan(plan) = &l.input else {
        return Err(Error::Parse("combine needs a plan document with \"components\"".into()));
    };
    let c = build_combination(plan)?;
    let out = combine_summary(&c, opts, emit_space, emit_extremal, verify)?;
    Ok(Outcome { code: EXIT_OK, result: out.result, text: out.text })
}

fn bound_for(l: &Loaded, p: Option<&Scalar>, opts: &GapOptions, known: Option<&[GapResult]>) -> Result<(bool, Value, String)> {
    match &l.input {
        Input::Space(s) => {
            let p = p.cloned().unwrap_or_else(Scalar::one);
            let g = gap(s, &p, opts)?;
            Ok(match lower_bound_direct(s, &p, &g.gap) {
                Ok(r) => (true, serde_json::to_value(&r).expect("report serializes"), bound_text(&r)),
                Err(e) => {
                    let (v, t) = inapplicable(&e);
                    (false, v, t)
                }
            })
        }
        Input::Plan(plan) => {
            if let Some(p) = p {
                if *p != plan.p {
                    return Err(Error::Plan(format!("plan joins at p = {}, bound requested at p = {p}", plan.p)));
                }
            }
            let gaps: Vec<Scalar> = match known {
                Some(rs) => rs.iter().map(|r| r.gap.clone()).collect(),
                None => plan
                    .components
                    .iter()
                    .map(|c| gap(&c.space, &plan.p, opts).map(|r| r.gap))
                    .collect::<Result<_>>()?,
            };
            let parts: Vec<(SemiMetricSpace, Scalar)> =
                plan.components.iter().map(|c| c.space.clone()).zip(gaps).collect();
            Ok(match lower_bound_combined(&parts, &plan.p) {
                Ok(r) => (true, serde_json::to_value(&r).expect("report serializes"), bound_text(&r)),
                Err(e) => {
                    let (v, t) = inapplicable(&e);
                    (false, v, t)
                }
            })
        }
    }
}

fn cmd_bound(l: &Loaded, p: Option<&Scalar>, opts: &GapOptions) -> Result<Outcome> {
    let (ok, result, text) = bound_for(l, p, opts, None)?;
    Ok(Outcome { code: if ok { EXIT_OK } else { EXIT_NEGATIVE }, result, text })
}

fn cmd_report(l: &Loaded, p: Option<&Scalar>, pmax: f64, tol: f64, opts: &GapOptions) -> Result<Outcome> {
    let default_p = match &l.input {
        Input::Plan(plan) => plan.p.clone(),
        Input::Space(_) => Scalar::one(),
    };
    let p = p.cloned().unwrap_or(default_p);
    let s = l.space()?;
    let check = cmd_check(l, &p, DEFAULT_EIG_TOL)?;
    let g = gap(&s, &p, opts)?;
    let sup = cmd_supremal(l, pmax, tol)?;
    let mut text = format!("{} points\n", s.len());
    text += &check.text;
    text += &gap_text(&s, &g);
    text += &sup.text;
    let mut result = json!({ "check": check.result, "gap": gap_json(&s, &g), "supremal": sup.result });
    let mut known = None;
    if let Input::Plan(plan) = &l.input {
        let c = build_combination(plan)?;
        let combined = combine_summary(&c, opts, false, true, false)?;
        text += &combined.text;
        result["combine"] = combined.result;
        known = Some(combined.component_gaps);
    }
    let (_, b, bt) = match &l.input {
        Input::Space(sp) => match lower_bound_direct(sp, &p, &g.gap) {
            Ok(r) => (true, serde_json::to_value(&r).expect("report serializes"), bound_text(&r)),
            Err(e) => {
                let (v, t) = inapplicable(&e);
                (false, v, t)
            }
        },
        Input::Plan(_) => bound_for(l, Some(&p), opts, known.as_deref())?,
    };
    text += &bt;
    result["bound"] = b;
    Ok(Outcome { code: check.code, result, text })
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    tool: Value,
    command: &'a str,
    input: Value,
    config: Value,
    exit_code: i32,
    result: Value,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Output goes to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((name, loaded, config, out)) => {
            if cli.json {
                let env = Envelope {
                    schema: SCHEMA,
                    tool: json!({ "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") }),
                    command: name,
                    input: json!({ "path": loaded.path, "sha256": loaded.digest }),
                    config,
                    exit_code: out.code,
                    result: out.result,
                };
                println!("{}", serde_json::to_string_pretty(&env).expect("report serializes"));
            } else {
                print!("{}", out.text);
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn execute(cli: &Cli) -> Result<(&'static str, Loaded, Value, Outcome)> {
    let seed = cli.seed;
    let config_gap = |s: &GapArgs| json!({ "seed": seed, "restarts": s.restarts, "exact_cutoff": s.exact_cutoff });
    Ok(match &cli.command {
        Command::Check { input, p, tol } => {
            let l = load(input)?;
            let out = cmd_check(&l, p, *tol)?;
            ("check", l, json!({ "p": Rendered::from(p), "tol": tol }), out)
        }
        Command::Gap { input, p, search } => {
            let l = load(input)?;
            let out = cmd_gap(&l, p, &gap_options(search, seed))?;
            let mut config = config_gap(search);
            config["p"] = json!(Rendered::from(p));
            ("gap", l, config, out)
        }
        Command::Supremal { input, pmax, tol } => {
            let l = load(input)?;
            let out = cmd_supremal(&l, *pmax, *tol)?;
            ("supremal", l, json!({ "p_max": pmax, "tol": tol, "eig_tol": DEFAULT_EIG_TOL }), out)
        }
        Command::Combine { plan, emit_space, emit_extremal, verify, search } => {
            let l = load(plan)?;
            let out = cmd_combine(&l, &gap_options(search, seed), *emit_space, *emit_extremal, *verify)?;
            ("combine", l, config_gap(search), out)
        }
        Command::Bound { input, p, search } => {
            let l = load(input)?;
            let out = cmd_bound(&l, p.as_ref(), &gap_options(search, seed))?;
            let mut config = config_gap(search);
            config["p"] = json!(p.as_ref().map(Rendered::from));
            ("bound", l, config, out)
        }
        Command::Report { input, p, pmax, tol, search } => {
            let l = load(input)?;
            let out = cmd_report(&l, p.as_ref(), *pmax, *tol, &gap_options(search, seed))?;
            let mut config = config_gap(search);
            config["p"] = json!(p.as_ref().map(Rendered::from));
            config["p_max"] = json!(pmax);
            config["tol"] = json!(tol);
            ("report", l, config, out)
        }
    })
}
