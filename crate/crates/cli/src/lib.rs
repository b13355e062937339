//! The `halo` command-line front-end: every subcommand writes one JSON
//! report (or a plain table) to standard output and maps its outcome to an
//! exit code.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use halo_core::halo::{
    check_halo_axioms, parse_samples, renorm_infimum, CheckStatus, HaloConstant, HaloDescriptor, RenormBudget,
    ScalarContext,
};
use halo_core::isometry::{
    enumerate_kn_z, generate_relations, siso_membership, siso_phi_membership, BilinearForm, MembershipContext,
};
use halo_core::lattice::{operator_norm, tree_norm, BoundsCertificate, LatticeNorm, NormedLattice, TreeBudget};
use halo_core::linalg::{rational_from_json, QMatrix};
use halo_core::norms::PExponent;
use halo_core::scalar::{format_rational, parse_rational, PowerValue, Rational};
use halo_core::tensor::{presentation_norm, PresentationBudget};
use halo_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "halo", version, about = "Norm computations over Banach halos")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    output: Output,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the halo axioms of a descriptor on sample elements.
    HaloCheck {
        #[arg(long)]
        config: String,
        /// `a..b` or a comma-separated list of rationals.
        #[arg(long, default_value = "-5..5", allow_hyphen_values = true)]
        samples: String,
    },
    /// Bounds for the re-normalized norm of an integer.
    Renorm {
        #[arg(long)]
        config: String,
        /// Target exponent of the p-triangle inequality.
        #[arg(long, conflicts_with = "c")]
        p: Option<String>,
        /// Use the Lipschitz tree-infimum with this constant instead.
        #[arg(long = "C", id = "c")]
        c: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        /// `K`, or `parts=K,part=M`.
        #[arg(long)]
        budget: Option<String>,
    },
    /// Bounds for the Lipschitz tree-infimum norm on a direct sum.
    Treenorm {
        /// Summand lattices; defaults to one `(ℤ, |·|_∞)` per coordinate.
        #[arg(long)]
        config: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        element: String,
        #[arg(long = "C")]
        c: String,
        /// `L`, or `leaves=L,radius=M`.
        #[arg(long)]
        budget: Option<String>,
    },
    /// Operator norm of a matrix.
    Opnorm {
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value = "2")]
        q: String,
        #[arg(long, default_value = "real")]
        context: String,
    },
    /// Short isometry groups K_n and K_n(φ).
    Kn {
        #[command(subcommand)]
        command: KnCommand,
    },
    /// Scalar extension of normed lattices.
    Tensor {
        #[command(subcommand)]
        command: TensorCommand,
    },
}

#[derive(Subcommand, Debug)]
enum KnCommand {
    /// Decide membership of a matrix.
    Check(KnCheck),
    /// List K_n(ℤ).
    Enumerate {
        #[arg(long)]
        n: usize,
    },
    /// Print the defining relations of K_n.
    Relations {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct KnCheck {
    /// `real`, `padic:P` or `int`.
    #[arg(long)]
    context: String,
    #[arg(long)]
    matrix: String,
    /// Integer matrix of a nondegenerate bilinear form.
    #[arg(long)]
    phi: Option<String>,
    /// Flow parameter applied to the base halo.
    #[arg(long, default_value = "1")]
    flow: String,
    /// Exit with status 1 unless the verdict matches.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Expect {
    Member,
    NonMember,
}

#[derive(Subcommand, Debug)]
enum TensorCommand {
    /// Bounds for the scalar-extension norm of a vector.
    PresentationNorm {
        #[arg(long)]
        base: String,
        #[arg(long)]
        context: String,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        /// `T`, or `terms=T,multiplier=K`.
        #[arg(long)]
        budget: Option<String>,
    },
}

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Inputs read during a run, hashed into the report.
#[derive(Default)]
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn add(&mut self, label: &str, bytes: &[u8]) {
        self.hasher.update((label.len() as u64).to_le_bytes());
        self.hasher.update(label.as_bytes());
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    /// A JSON document given inline or as a file path.
    fn json(&mut self, label: &str, arg: &str) -> Result<Value, Error> {
        let text = if Path::new(arg).is_file() {
            std::fs::read_to_string(arg).map_err(|e| Error::Config(format!("cannot read {arg}: {e}")))?
        } else {
            arg.to_string()
        };
        self.add(label, text.as_bytes());
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{label}: {e}")))
    }

    fn digest(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The result section of a report plus the exit code it implies.
struct Run {
    results: Value,
    budgets: Value,
    code: i32,
}

fn parse_budget(s: Option<&str>, keys: &[&str]) -> Result<BTreeMap<String, u64>, Error> {
    let mut out = BTreeMap::new();
    let Some(s) = s else { return Ok(out) };
    let bad = || Error::Config(format!("bad budget {s:?}; expected N or {}", keys.iter().map(|k| format!("{k}=N")).collect::<Vec<_>>().join(",")));
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = match item.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (keys[0], item),
        };
        if !keys.contains(&k) {
            return Err(bad());
        }
        out.insert(k.to_string(), v.parse().map_err(|_| bad())?);
    }
    Ok(out)
}

/// `[a, b, ...]` as JSON, or a comma-separated list.
fn parse_vector(s: &str) -> Result<Vec<Rational>, Error> {
    let t = s.trim();
    if t.starts_with('[') {
        let v: Value = serde_json::from_str(t).map_err(|e| Error::Config(format!("vector {s:?}: {e}")))?;
        v.as_array()
            .ok_or_else(|| Error::Config(format!("vector {s:?} is not an array")))?
            .iter()
            .map(rational_from_json)
            .collect()
    } else {
        t.split(',').map(parse_rational).collect()
    }
}

/// A rational, or `base^exp`.
fn parse_power(s: &str) -> Result<PowerValue, Error> {
    match s.split_once('^') {
        Some((b, e)) => PowerValue::try_power(parse_rational(b)?, parse_rational(e)?),
        None => Ok(PowerValue::rational(parse_rational(s)?)),
    }
}

fn gap_code(cert: &BoundsCertificate) -> i32 {
    if cert.meets() {
        EXIT_OK
    } else {
        EXIT_GAP
    }
}

fn halo_check(inputs: &mut Inputs, config: &str, samples: &str) -> Result<Run, Error> {
    let h = HaloDescriptor::from_json(&inputs.json("config", config)?)?;
    let samples = parse_samples(samples)?;
    let report = check_halo_axioms(&h, &samples)?;
    let code = if report.checks.iter().any(|c| c.status == CheckStatus::Fail) {
        EXIT_VIOLATION
    } else if report.passed() {
        EXIT_OK
    } else {
        EXIT_GAP
    };
    let mut results = report.to_json();
    results["passed"] = json!(report.passed());
    Ok(Run { results, budgets: json!({"samples": samples.len()}), code })
}

fn renorm(inputs: &mut Inputs, config: &str, p: Option<&str>, c: Option<&str>, element: &str, budget: Option<&str>) -> Result<Run, Error> {
    let h = HaloDescriptor::from_json(&inputs.json("config", config)?)?;
    let constant = match (p, c) {
        (Some(p), None) => HaloConstant::Short(PExponent::parse(p)?),
        (None, Some(c)) => HaloConstant::Lipschitz { c: parse_power(c)?, d: PowerValue::one() },
        _ => return Err(Error::Config("renorm needs exactly one of --p and --C".into())),
    };
    let f = parse_rational(element)?;
    let b = parse_budget(budget, &["parts", "part"])?;
    let budget = RenormBudget { max_parts: b.get("parts").map(|&k| k as usize), max_part: b.get("part").copied() };
    let (k, m) = budget.resolve(f.abs().to_integer().try_into().unwrap_or(u64::MAX));
    let cert = renorm_infimum(&h, &constant, &f, &budget)?;
    let code = gap_code(&cert);
    let mut results = cert.to_json();
    results["halo"] = json!(h.to_string());
    results["constant"] = constant.to_json();
    results["element"] = json!(format_rational(&f));
    Ok(Run { results, budgets: json!({"parts": k, "part": m}), code })
}

fn summands(inputs: &mut Inputs, config: Option<&str>, dim: usize) -> Result<Vec<NormedLattice>, Error> {
    let Some(config) = config else {
        return Ok((0..dim).map(|_| NormedLattice::integer_lp(1, PExponent::Infinite)).collect());
    };
    let v = inputs.json("config", config)?;
    let list = match &v {
        Value::Array(a) => a.clone(),
        Value::Object(o) if o.contains_key("summands") => o["summands"]
            .as_array()
            .cloned()
            .ok_or_else(|| Error::Config("\"summands\" must be an array".into()))?,
        _ => vec![v.clone()],
    };
    list.iter().map(NormedLattice::from_json).collect()
}

fn treenorm(inputs: &mut Inputs, config: Option<&str>, element: &str, c: &str, budget: Option<&str>) -> Result<Run, Error> {
    let x = parse_vector(element)?;
    let lattices = summands(inputs, config, x.len())?;
    let total: usize = lattices.iter().map(NormedLattice::rank).sum();
    if total != x.len() {
        return Err(Error::Dimension(format!("element of length {} for summands of total rank {total}", x.len())));
    }
    let mut parts = Vec::new();
    let mut at = 0;
    for l in &lattices {
        parts.push((l, x[at..at + l.rank()].to_vec()));
        at += l.rank();
    }
    let c = parse_power(c)?;
    let b = parse_budget(budget, &["leaves", "radius"])?;
    let budget = TreeBudget { max_leaves: b.get("leaves").map(|&l| l as usize), radius: b.get("radius").copied() };
    let max_entry = x.iter().map(|r| r.abs().ceil().to_integer().try_into().unwrap_or(u64::MAX)).max().unwrap_or(0);
    let (l, m) = budget.resolve(max_entry);
    let cert = tree_norm(&parts, &c, &budget)?;
    let code = gap_code(&cert);
    let mut results = cert.to_json();
    results["C"] = json!(c.to_string());
    results["element"] = json!(x.iter().map(format_rational).collect::<Vec<_>>());
    Ok(Run { results, budgets: json!({"leaves": l, "radius": m}), code })
}

fn opnorm(inputs: &mut Inputs, matrix: &str, q: &str, context: &str) -> Result<Run, Error> {
    let a = QMatrix::from_json(&inputs.json("matrix", matrix)?)?;
    let q = PExponent::parse(q)?;
    let ctx = ScalarContext::parse(context)?;
    let cert = operator_norm(&a, &q, &ctx)?;
    // an irrational norm is reported as one certified enclosure, not a gap
    let code = if cert.lower == cert.upper { EXIT_OK } else { EXIT_GAP };
    let mut results = cert.to_json();
    results["q"] = json!(q.to_string());
    results["context"] = json!(context);
    Ok(Run { results, budgets: json!({}), code })
}

fn kn_check(inputs: &mut Inputs, args: &KnCheck) -> Result<Run, Error> {
    let ctx = MembershipContext::parse(&args.context)?;
    let u = QMatrix::from_json(&inputs.json("matrix", &args.matrix)?)?;
    let t = parse_rational(&args.flow)?;
    let cert = match &args.phi {
        Some(phi) => {
            let phi = BilinearForm::new(QMatrix::from_json(&inputs.json("phi", phi)?)?)?;
            siso_phi_membership(&u, &phi, &ctx, &t)?
        }
        None => siso_membership(&u, &ctx, &t)?,
    };
    let code = match args.expect {
        Some(Expect::Member) if !cert.member => EXIT_VIOLATION,
        Some(Expect::NonMember) if cert.member => EXIT_VIOLATION,
        _ => EXIT_OK,
    };
    let mut results = cert.to_json();
    results["flow"] = json!(format_rational(&t));
    Ok(Run { results, budgets: json!({}), code })
}

fn kn_enumerate(n: usize) -> Result<Run, Error> {
    let all = enumerate_kn_z(n)?;
    Ok(Run {
        results: json!({"n": n, "count": all.len(), "matrices": all.iter().map(QMatrix::to_json).collect::<Vec<_>>()}),
        budgets: json!({}),
        code: EXIT_OK,
    })
}

fn kn_relations(n: usize) -> Result<Run, Error> {
    let rels = generate_relations(n)?;
    Ok(Run {
        results: json!({"n": n, "count": rels.len(), "relations": rels.iter().map(ToString::to_string).collect::<Vec<_>>()}),
        budgets: json!({}),
        code: EXIT_OK,
    })
}

fn presentation(inputs: &mut Inputs, base: &str, context: &str, target: &str, budget: Option<&str>) -> Result<Run, Error> {
    let base = NormedLattice::from_json(&inputs.json("base", base)?)?;
    let ctx = ScalarContext::parse(context)?;
    let x = parse_vector(target)?;
    let b = parse_budget(budget, &["terms", "multiplier"])?;
    let budget = PresentationBudget { max_terms: b.get("terms").map(|&t| t as usize), multiplier: b.get("multiplier").copied() };
    let support = x.iter().filter(|r| !r.is_zero()).count();
    let cert = presentation_norm(&x, &base, &ctx, &budget)?;
    let code = gap_code(&cert);
    let mut results = cert.to_json();
    results["context"] = json!(context);
    results["lattice"] = match base.norm_kind() {
        LatticeNorm::Custom(c) => json!(c.name),
        _ => base.to_json(),
    };
    Ok(Run {
        results,
        budgets: json!({"terms": budget.max_terms.unwrap_or(support), "multiplier": budget.multiplier.unwrap_or(2)}),
        code,
    })
}

fn dispatch(cli: &Cli, inputs: &mut Inputs) -> Result<Run, Error> {
    match &cli.command {
        Command::HaloCheck { config, samples } => halo_check(inputs, config, samples),
        Command::Renorm { config, p, c, element, budget } => {
            renorm(inputs, config, p.as_deref(), c.as_deref(), element, budget.as_deref())
        }
        Command::Treenorm { config, element, c, budget } => treenorm(inputs, config.as_deref(), element, c, budget.as_deref()),
        Command::Opnorm { matrix, q, context } => opnorm(inputs, matrix, q, context),
        Command::Kn { command } => match command {
            KnCommand::Check(args) => kn_check(inputs, args),
            KnCommand::Enumerate { n } => kn_enumerate(*n),
            KnCommand::Relations { n } => kn_relations(*n),
        },
        Command::Tensor { command: TensorCommand::PresentationNorm { base, context, target, budget } } => {
            presentation(inputs, base, context, target, budget.as_deref())
        }
    }
}

fn render_table(report: &Value) -> String {
    let mut out = String::new();
    let mut row = |k: &str, v: &Value| {
        let text = match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.push_str(&format!("{k:<14} {text}\n"));
    };
    for key in ["command", "version", "inputs_digest", "budgets"] {
        if let Some(v) = report.get(key) {
            row(key, v);
        }
    }
    if let Some(Value::Object(results)) = report.get("results") {
        for (k, v) in results {
            row(k, v);
        }
    }
    if let Some(v) = report.get("timings") {
        row("timings", v);
    }
    out
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let mut inputs = Inputs::default();
    // output format and timings do not change results
    let mut semantic: Vec<&String> = Vec::new();
    let mut skip_value = false;
    for a in &echo {
        if std::mem::take(&mut skip_value) {
            continue;
        }
        match a.as_str() {
            "--output" => skip_value = true,
            "--timings" => {}
            s if s.starts_with("--output=") => {}
            _ => semantic.push(a),
        }
    }
    inputs.add("argv", format!("{semantic:?}").as_bytes());

    let start = Instant::now();
    let run = match dispatch(&cli, &mut inputs) {
        Ok(run) => run,
        Err(e) => {
            let code = if matches!(e, Error::Budget(_)) { EXIT_GAP } else { EXIT_USAGE };
            return Outcome {
                code,
                stdout: String::new(),
                stderr: format!("{}\n", json!({"error": e.to_string(), "command": echo})),
            };
        }
    };
    let elapsed = start.elapsed();

    let mut report = json!({
        "command": echo,
        "inputs_digest": inputs.digest(),
        "version": env!("CARGO_PKG_VERSION"),
        "budgets": run.budgets,
        "results": run.results,
        "exit_code": run.code,
    });
    if cli.timings {
        report["timings"] = json!({"elapsed_ms": elapsed.as_secs_f64() * 1e3});
    }
    let stdout = match cli.output {
        Output::Json => format!("{}\n", serde_json::to_string_pretty(&report).expect("serializable")),
        Output::Table => render_table(&report),
    };
    Outcome { code: run.code, stdout, stderr: String::new() }
}
