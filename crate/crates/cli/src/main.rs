//! `umdlab`: estimate smoothing constants, amplify lower-bound witnesses,
//! search martingale transform ratios, and verify stored certificates.
//!
//! Every command prints one JSON record to stdout (or a CSV table with
//! `--format csv`); progress and timing go to stderr, so reruns with the same
//! seed are byte-identical on stdout.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{Map, Value};

use umdlab_core::constants::{
    compute_c, compute_c_grid, compute_kappa, compute_kappa_grid, divergence_diagnostic,
    ConstantEstimate, OptimizerConfig,
};
use umdlab_core::hardy::aumd_base_ratio;
use umdlab_core::martingale::{
    search_umd_lower_bound, stein_ratio, MartingaleCertificate,
};
use umdlab_core::measure::{FiniteProbSpace, Filtration};
use umdlab_core::mixed_norm::{build_e_n, reduce_monotone_runs, Exponent, Weighting};
use umdlab_core::witness::{lower_bound_run, WitnessCertificate};

#[derive(Parser)]
#[command(name = "umdlab", version, about = "Mixed-norm constant toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed for every pseudo-random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Random optimizer restarts on top of the deterministic starts.
    #[arg(long, global = true)]
    restarts: Option<u32>,

    /// key=value file with optimizer settings; flags win over file entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// stdout format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstantKind {
    /// Norm of smoothing the first component.
    C,
    /// Geometric-mean variant.
    Kappa,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeqAction {
    /// Collapse adjacent monotone runs of exponents.
    Reduce,
    /// Partial products of consecutive two-point constants.
    Diagnose,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a two-point operator constant.
    Constant {
        kind: ConstantKind,
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        /// Use the exhaustive grid oracle instead of the optimizer.
        #[arg(long)]
        grid: bool,
    },
    /// Amplified lower bound on the alternating 2n-layer chain.
    LowerBound {
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        /// Amplification depth (number of tensor stages).
        #[arg(long)]
        n: usize,
        /// Write the final witness certificate here (JSON).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Search martingales for large sign-transform ratios.
    UmdSearch {
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        /// Alternating layer pairs in the value chain (0 for scalars).
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_parser = parse_exponent, default_value = "2")]
        s: Exponent,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Write the best martingale certificate here (JSON).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Sign-averaged conditional-expectation ratios on random fields.
    Stein {
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        /// Alternating layer pairs in the value chain (0 for scalars).
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long, value_parser = parse_exponent, default_value = "2")]
        s: Exponent,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Number of random instances.
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Exponent-sequence utilities.
    Seq {
        action: SeqAction,
        #[arg(value_parser = parse_exponent, num_args = 1.., value_name = "EXPONENT")]
        exponents: Vec<Exponent>,
    },
    /// Analytic base ratio with outer functions on the discrete torus.
    Hardy {
        #[arg(long, value_parser = parse_exponent)]
        p: Exponent,
        #[arg(long, value_parser = parse_exponent)]
        q: Exponent,
        /// First-pair values; defaults come from the kappa maximizer.
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        v: Option<f64>,
        /// Second-pair values; defaults come from the kappa maximizer.
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        /// Torus grid points (even, at least 4).
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Recompute a stored certificate and compare with its claim.
    Verify {
        file: PathBuf,
    },
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse::<Exponent>().map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: String,
    version: &'a str,
    master_seed: u64,
    config: &'a OptimizerConfig,
    outputs: Map<String, Value>,
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Outcome {
    outputs: Map<String, Value>,
    table: Table,
    summary: String,
    exit: u8,
}

fn v<T: Serialize>(x: T) -> Value {
    serde_json::to_value(x).expect("output values are serializable")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    let started = Instant::now();
    let cfg = resolve_config(&cli)?;
    let outcome = dispatch(&cli.command, &cfg).map_err(|e| e.to_string())?;
    let record = RunRecord {
        command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
        version: env!("CARGO_PKG_VERSION"),
        master_seed: cfg.master_seed,
        config: &cfg,
        outputs: outcome.outputs,
    };
    match cli.format {
        Format::Json => {
            let line = serde_json::to_string(&record).map_err(|e| e.to_string())?;
            println!("{line}");
        }
        Format::Csv => print_csv(&outcome.table)?,
    }
    eprintln!(
        "{} ({} ms)",
        outcome.summary,
        started.elapsed().as_millis()
    );
    Ok(outcome.exit)
}

fn resolve_config(cli: &Cli) -> Result<OptimizerConfig, String> {
    let mut cfg = OptimizerConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        apply_config_file(&mut cfg, &text)?;
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(restarts) = cli.restarts {
        cfg.restarts = restarts;
    }
    Ok(cfg)
}

fn apply_config_file(cfg: &mut OptimizerConfig, text: &str) -> Result<(), String> {
    fn set<T: std::str::FromStr>(value: &str, lineno: usize, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        value
            .parse()
            .map_err(|e| format!("config line {}: {key}: {e}", lineno + 1))
    }
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "seed" => cfg.master_seed = set(value, lineno, key)?,
            "restarts" => cfg.restarts = set(value, lineno, key)?,
            "max_iters" => cfg.max_iters = set(value, lineno, key)?,
            "step_init" => cfg.step_init = set(value, lineno, key)?,
            "shrink" => cfg.shrink = set(value, lineno, key)?,
            "tol" => cfg.tol = set(value, lineno, key)?,
            "grid_resolution" => cfg.grid_resolution = set(value, lineno, key)?,
            other => return Err(format!("config line {}: unknown key {other}", lineno + 1)),
        }
    }
    Ok(())
}

fn print_csv(table: &Table) -> Result<(), String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&table.headers).map_err(|e| e.to_string())?;
    for row in &table.rows {
        writer.write_record(row).map_err(|e| e.to_string())?;
    }
    let bytes = writer.into_inner().map_err(|e| e.to_string())?;
    print!("{}", String::from_utf8_lossy(&bytes));
    Ok(())
}

fn dispatch(command: &Command, cfg: &OptimizerConfig) -> umdlab_core::Result<Outcome> {
    match command {
        Command::Constant { kind, p, q, grid } => cmd_constant(*kind, *p, *q, *grid, cfg),
        Command::LowerBound { p, q, n, out } => cmd_lower_bound(*p, *q, *n, out.as_deref(), cfg),
        Command::UmdSearch {
            p,
            q,
            n,
            s,
            depth,
            out,
        } => cmd_umd_search(*p, *q, *n, *s, *depth, out.as_deref(), cfg),
        Command::Stein {
            p,
            q,
            n,
            s,
            depth,
            count,
        } => cmd_stein(*p, *q, *n, *s, *depth, *count, cfg),
        Command::Seq { action, exponents } => cmd_seq(*action, exponents, cfg),
        Command::Hardy {
            p,
            q,
            u,
            v,
            w,
            t,
            n,
        } => cmd_hardy(*p, *q, *u, *v, *w, *t, *n, cfg),
        Command::Verify { file } => cmd_verify(file),
    }
}

fn estimate_outputs(outputs: &mut Map<String, Value>, estimate: &ConstantEstimate) {
    outputs.insert("value".into(), v(estimate.value));
    outputs.insert("certified_ratio".into(), v(estimate.certified_ratio));
    outputs.insert("witness_params".into(), v(&estimate.witness_params));
    outputs.insert("method".into(), v(estimate.method));
    outputs.insert("converged".into(), v(estimate.converged));
}

fn cmd_constant(
    kind: ConstantKind,
    p: Exponent,
    q: Exponent,
    grid: bool,
    cfg: &OptimizerConfig,
) -> umdlab_core::Result<Outcome> {
    let (name, estimate) = match (kind, grid) {
        (ConstantKind::C, false) => ("c", compute_c(p, q, cfg)?),
        (ConstantKind::C, true) => ("c", compute_c_grid(p, q, cfg)?),
        (ConstantKind::Kappa, false) => ("kappa", compute_kappa(p, q, cfg)?),
        (ConstantKind::Kappa, true) => ("kappa", compute_kappa_grid(p, q, cfg)?),
    };
    let mut outputs = Map::new();
    outputs.insert("kind".into(), v(name));
    outputs.insert("p".into(), v(p.to_string()));
    outputs.insert("q".into(), v(q.to_string()));
    estimate_outputs(&mut outputs, &estimate);
    let table = Table {
        headers: vec!["kind", "p", "q", "value", "certified_ratio", "method", "converged"],
        rows: vec![vec![
            name.to_string(),
            p.to_string(),
            q.to_string(),
            estimate.value.to_string(),
            estimate.certified_ratio.to_string(),
            v(estimate.method).as_str().unwrap_or_default().to_string(),
            estimate.converged.to_string(),
        ]],
    };
    Ok(Outcome {
        summary: format!(
            "{name}({p}, {q}) = {:.9}{}",
            estimate.value,
            if estimate.converged { "" } else { " [NOT CONVERGED]" }
        ),
        exit: if estimate.converged { 0 } else { 3 },
        outputs,
        table,
    })
}

fn cmd_lower_bound(
    p: Exponent,
    q: Exponent,
    n: usize,
    out: Option<&std::path::Path>,
    cfg: &OptimizerConfig,
) -> umdlab_core::Result<Outcome> {
    let base = compute_c(p, q, cfg)?;
    let run = lower_bound_run(p, q, n, cfg)?;
    let base_power = base.certified_ratio.powi(n as i32);
    let slack = run.estimate.value - base_power;

    let mut certificate_written = false;
    if let Some(path) = out {
        let witness = run.witness.as_ref().ok_or_else(|| {
            umdlab_core::Error::InvalidInput(
                "the final stage was evaluated by streaming, so there is no witness small \
                 enough to materialize; lower --n to write a certificate"
                    .into(),
            )
        })?;
        let cert = WitnessCertificate::from_spec(witness, run.evaluation.ratio);
        let json = serde_json::to_string(&cert)
            .map_err(|e| umdlab_core::Error::InvalidInput(e.to_string()))?;
        fs::write(path, json).map_err(|e| {
            umdlab_core::Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
        })?;
        certificate_written = true;
    }

    let mut outputs = Map::new();
    outputs.insert("p".into(), v(p.to_string()));
    outputs.insert("q".into(), v(q.to_string()));
    outputs.insert("n".into(), v(n));
    outputs.insert("ratio".into(), v(run.estimate.value));
    outputs.insert("base_constant".into(), v(base.certified_ratio));
    outputs.insert("base_power".into(), v(base_power));
    outputs.insert("slack".into(), v(slack));
    outputs.insert("numerator".into(), v(run.evaluation.numerator));
    outputs.insert("denominator".into(), v(run.evaluation.denominator));
    outputs.insert("converged".into(), v(run.estimate.converged));
    outputs.insert("certificate_written".into(), v(certificate_written));
    let table = Table {
        headers: vec!["n", "ratio", "base_power", "slack"],
        rows: vec![vec![
            n.to_string(),
            run.estimate.value.to_string(),
            base_power.to_string(),
            slack.to_string(),
        ]],
    };
    Ok(Outcome {
        summary: format!(
            "amplified ratio at stage {n}: {:.9} (base^{n} = {:.9}, slack {:+.3e})",
            run.estimate.value, base_power, slack
        ),
        exit: if run.estimate.converged { 0 } else { 3 },
        outputs,
        table,
    })
}

fn cmd_umd_search(
    p: Exponent,
    q: Exponent,
    n: usize,
    s: Exponent,
    depth: usize,
    out: Option<&std::path::Path>,
    cfg: &OptimizerConfig,
) -> umdlab_core::Result<Outcome> {
    let chain = build_e_n(p, q, n, Weighting::Counting);
    let result = search_umd_lower_bound(&chain, s, depth, cfg)?;
    let mut certificate_written = false;
    if let Some(path) = out {
        let cert = MartingaleCertificate::from_martingale(
            &result.martingale,
            s,
            result.estimate.certified_ratio,
        );
        let json = serde_json::to_string(&cert)
            .map_err(|e| umdlab_core::Error::InvalidInput(e.to_string()))?;
        fs::write(path, json).map_err(|e| {
            umdlab_core::Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
        })?;
        certificate_written = true;
    }
    let mut outputs = Map::new();
    outputs.insert("p".into(), v(p.to_string()));
    outputs.insert("q".into(), v(q.to_string()));
    outputs.insert("layers".into(), v(n));
    outputs.insert("s".into(), v(s.to_string()));
    outputs.insert("depth".into(), v(depth));
    outputs.insert("dim".into(), v(chain.dim()));
    outputs.insert("value".into(), v(result.estimate.value));
    outputs.insert(
        "certified_ratio".into(),
        v(result.estimate.certified_ratio),
    );
    outputs.insert("converged".into(), v(result.estimate.converged));
    outputs.insert("certificate_written".into(), v(certificate_written));
    let table = Table {
        headers: vec!["p", "q", "s", "depth", "dim", "value", "certified_ratio"],
        rows: vec![vec![
            p.to_string(),
            q.to_string(),
            s.to_string(),
            depth.to_string(),
            chain.dim().to_string(),
            result.estimate.value.to_string(),
            result.estimate.certified_ratio.to_string(),
        ]],
    };
    Ok(Outcome {
        summary: format!(
            "best transform ratio at depth {depth}: {:.9}{}",
            result.estimate.value,
            if result.estimate.converged {
                ""
            } else {
                " [NOT CONVERGED]"
            }
        ),
        exit: if result.estimate.converged { 0 } else { 3 },
        outputs,
        table,
    })
}

fn cmd_stein(
    p: Exponent,
    q: Exponent,
    n: usize,
    s: Exponent,
    depth: usize,
    count: usize,
    cfg: &OptimizerConfig,
) -> umdlab_core::Result<Outcome> {
    if count == 0 {
        return Err(umdlab_core::Error::InvalidInput(
            "need at least one instance".into(),
        ));
    }
    let chain = build_e_n(p, q, n, Weighting::Counting);
    let atoms = 1usize << depth;
    let space = FiniteProbSpace::uniform(atoms)?;
    let filt = Filtration::dyadic(depth);
    let dim = chain.dim();
    let mut ratios = Vec::with_capacity(count);
    for instance in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
        rng.set_stream(instance as u64);
        let fields: Vec<Vec<f64>> = (0..depth)
            .map(|_| (0..atoms * dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        ratios.push(stein_ratio(&chain, &space, &filt, &fields, s)?);
    }
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = ratios.iter().sum::<f64>() / count as f64;
    let mut outputs = Map::new();
    outputs.insert("p".into(), v(p.to_string()));
    outputs.insert("q".into(), v(q.to_string()));
    outputs.insert("layers".into(), v(n));
    outputs.insert("s".into(), v(s.to_string()));
    outputs.insert("depth".into(), v(depth));
    outputs.insert("count".into(), v(count));
    outputs.insert("max_ratio".into(), v(max));
    outputs.insert("mean_ratio".into(), v(mean));
    let table = Table {
        headers: vec!["p", "q", "s", "depth", "count", "max_ratio", "mean_ratio"],
        rows: vec![vec![
            p.to_string(),
            q.to_string(),
            s.to_string(),
            depth.to_string(),
            count.to_string(),
            max.to_string(),
            mean.to_string(),
        ]],
    };
    Ok(Outcome {
        summary: format!("max sign-averaged ratio over {count} instances: {max:.12}"),
        exit: 0,
        outputs,
        table,
    })
}

fn cmd_seq(
    action: SeqAction,
    exponents: &[Exponent],
    cfg: &OptimizerConfig,
) -> umdlab_core::Result<Outcome> {
    let input: Vec<String> = exponents.iter().map(|e| e.to_string()).collect();
    match action {
        SeqAction::Reduce => {
            let reduced = reduce_monotone_runs(exponents)?;
            let reduced: Vec<String> = reduced.iter().map(|e| e.to_string()).collect();
            let mut outputs = Map::new();
            outputs.insert("input".into(), v(&input));
            outputs.insert("reduced".into(), v(&reduced));
            let table = Table {
                headers: vec!["input", "reduced"],
                rows: vec![vec![input.join(" "), reduced.join(" ")]],
            };
            Ok(Outcome {
                summary: format!("{} exponents -> {}", input.len(), reduced.len()),
                exit: 0,
                outputs,
                table,
            })
        }
        SeqAction::Diagnose => {
            let products = divergence_diagnostic(exponents, cfg)?;
            let mut constants = Vec::with_capacity(products.len());
            let mut prev = 1.0;
            for &prod in &products {
                constants.push(prod / prev);
                prev = prod;
            }
            let mut outputs = Map::new();
            outputs.insert("exponents".into(), v(&input));
            outputs.insert("step_constants".into(), v(&constants));
            outputs.insert("partial_products".into(), v(&products));
            let rows = products
                .iter()
                .zip(&constants)
                .enumerate()
                .map(|(i, (prod, c))| {
                    vec![
                        i.to_string(),
                        input[i].clone(),
                        input[i + 1].clone(),
                        c.to_string(),
                        prod.to_string(),
                    ]
                })
                .collect();
            let table = Table {
                headers: vec!["step", "p", "q", "constant", "partial_product"],
                rows,
            };
            Ok(Outcome {
                summary: format!(
                    "partial products over {} steps end at {:.9}",
                    products.len(),
                    products.last().copied().unwrap_or(1.0)
                ),
                exit: 0,
                outputs,
                table,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_hardy(
    p: Exponent,
    q: Exponent,
    u: Option<f64>,
    v_opt: Option<f64>,
    w: Option<f64>,
    t: Option<f64>,
    n: usize,
    cfg: &OptimizerConfig,
) -> umdlab_core::Result<Outcome> {
    let (u, v2, w, t, source) = match (u, v_opt, w, t) {
        (Some(u), Some(v2), Some(w), Some(t)) => (u, v2, w, t, "flags"),
        (None, None, None, None) => {
            let estimate = compute_kappa(p, q, cfg)?;
            let params = &estimate.witness_params;
            (params[0], params[1], params[2], params[3], "kappa-optimizer")
        }
        _ => {
            return Err(umdlab_core::Error::InvalidInput(
                "pass all of --u --v --w --t or none of them".into(),
            ))
        }
    };
    let report = aumd_base_ratio(p, q, u, v2, w, t, n)?;
    let gap = (report.grid_ratio / report.two_atom_ratio - 1.0).abs();
    let mut outputs = Map::new();
    outputs.insert("p".into(), v(p.to_string()));
    outputs.insert("q".into(), v(q.to_string()));
    outputs.insert("u".into(), v(u));
    outputs.insert("v".into(), v(v2));
    outputs.insert("w".into(), v(w));
    outputs.insert("t".into(), v(t));
    outputs.insert("grid_points".into(), v(n));
    outputs.insert("grid_ratio".into(), v(report.grid_ratio));
    outputs.insert("two_atom_ratio".into(), v(report.two_atom_ratio));
    outputs.insert("relative_gap".into(), v(gap));
    outputs.insert("params_source".into(), v(source));
    let table = Table {
        headers: vec!["p", "q", "u", "v", "w", "t", "grid_points", "grid_ratio", "two_atom_ratio"],
        rows: vec![vec![
            p.to_string(),
            q.to_string(),
            u.to_string(),
            v2.to_string(),
            w.to_string(),
            t.to_string(),
            n.to_string(),
            report.grid_ratio.to_string(),
            report.two_atom_ratio.to_string(),
        ]],
    };
    Ok(Outcome {
        summary: format!(
            "grid ratio {:.9} vs two-atom {:.9} (relative gap {:.3e})",
            report.grid_ratio, report.two_atom_ratio, gap
        ),
        exit: 0,
        outputs,
        table,
    })
}

fn cmd_verify(file: &std::path::Path) -> umdlab_core::Result<Outcome> {
    let text = fs::read_to_string(file).map_err(|e| {
        umdlab_core::Error::InvalidInput(format!("cannot read {}: {e}", file.display()))
    })?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| umdlab_core::Error::InvalidInput(format!("not valid JSON: {e}")))?;
    let bad = |e: serde_json::Error| {
        umdlab_core::Error::InvalidInput(format!("malformed certificate: {e}"))
    };
    let (kind, claimed, recomputed, ok) = if value.get("terms").is_some() {
        let cert: WitnessCertificate = serde_json::from_value(value).map_err(bad)?;
        let (evaluation, ok) = cert.verify()?;
        ("witness", cert.claimed_ratio, evaluation.ratio, ok)
    } else if value.get("diffs").is_some() {
        let cert: MartingaleCertificate = serde_json::from_value(value).map_err(bad)?;
        let (ratio, ok) = cert.verify()?;
        ("martingale", cert.claimed_ratio, ratio, ok)
    } else {
        return Err(umdlab_core::Error::InvalidInput(
            "certificate has neither witness terms nor martingale differences".into(),
        ));
    };
    let mut outputs = Map::new();
    outputs.insert("file".into(), v(file.display().to_string()));
    outputs.insert("kind".into(), v(kind));
    outputs.insert("claimed_ratio".into(), v(claimed));
    outputs.insert("recomputed_ratio".into(), v(recomputed));
    outputs.insert("ok".into(), v(ok));
    let table = Table {
        headers: vec!["kind", "claimed_ratio", "recomputed_ratio", "ok"],
        rows: vec![vec![
            kind.to_string(),
            claimed.to_string(),
            recomputed.to_string(),
            ok.to_string(),
        ]],
    };
    Ok(Outcome {
        summary: if ok {
            format!("{kind} certificate holds: recomputed {recomputed:.9} >= claimed - 1e-9")
        } else {
            format!(
                "{kind} certificate FAILED: recomputed {recomputed:.9} < claimed {claimed:.9} - 1e-9"
            )
        },
        exit: if ok { 0 } else { 4 },
        outputs,
        table,
    })
}
