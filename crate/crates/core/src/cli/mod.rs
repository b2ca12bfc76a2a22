//! Command-line front end.
//!
//! Exit codes: `0` success, `2` malformed input (bad flags, unreadable or
//! inconsistent model document, bad observations), `3` the method cannot
//! handle the instance (degenerate evidence, cap or budget exceeded, ...).

pub mod input;
pub mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::algebra::{DenseCap, SubsetMask};
use crate::baselines::{em_max_likelihood, gibbs_sample, variational_bayes, GibbsOptions, IterOptions};
use crate::dense::{posterior_mean_with_cap, ptilde_all_with_cap, InferenceResult};
use crate::error::Error;
use crate::model::{Model, ObservationSeq};
use crate::oracles;
use crate::scalar::rel_diff;
use crate::sparse::{interaction_graph, sparse_posterior_mean, tree_decompose, validate_decomposition};

use input::ModelFile;
use report::{finite, BenchRow, GraphReport, Inputs, Labeled, RunReport};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Method(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Method(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Method(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidModel(msg) => CliError::Input(msg),
            other => CliError::Method(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lda-exact", version, about = "Exact posterior mixture weights under a Dirichlet prior")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evidence and posterior mean of the mixture weights.
    Infer(InferArgs),
    /// Evaluate p~(W) with a brute-force reference.
    Oracle(OracleArgs),
    /// Print the interaction graph and its tree decomposition.
    Graph(GraphArgs),
    /// Time dense vs sparse inference on generated chain instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Sparse,
    Ml,
    Vb,
    Gibbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Brute,
    Partition,
    Factor,
    Permanent,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Model document (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated vocabulary indices; "" is the empty sequence.
    #[arg(long, conflicts_with = "obs_file", allow_hyphen_values = true)]
    obs: Option<String>,
    /// File with one vocabulary index per line.
    #[arg(long)]
    obs_file: Option<PathBuf>,
    /// Multiply every alpha(z) by this factor.
    #[arg(long, default_value_t = 1.0)]
    alpha_scale: f64,
    /// Cap on the positions of one dense table: the whole sequence for
    /// `exact`, the largest bag for `sparse`.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Emissions at or below this value are treated as zero (sparse only).
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    iterations: usize,
    /// Default: 10% of the iterations.
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Include the tree decomposition in the report (sparse only).
    #[arg(long)]
    dump_decomposition: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum)]
    kind: OracleKind,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated sequence lengths.
    #[arg(long, default_value = "8,12,16,20,24")]
    sizes: String,
    #[arg(long, default_value_t = 100)]
    causes: usize,
    /// Positions covered by each cause's support window.
    #[arg(long, default_value_t = 3)]
    support: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dense path is skipped above this length.
    #[arg(long, default_value_t = 16)]
    dense_max: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

struct Loaded {
    file: ModelFile,
    model: Model<f64>,
    obs: ObservationSeq,
    cap: DenseCap,
    inputs: Inputs,
}

fn load(args: &InstanceArgs) -> Result<Loaded, CliError> {
    let file = ModelFile::read(&args.model)?;
    let model = file.model()?;
    let model = if args.alpha_scale == 1.0 {
        model
    } else {
        model
            .scale_alpha(args.alpha_scale)
            .map_err(|e| CliError::Input(e.to_string()))?
    };
    let tokens = match (&args.obs, &args.obs_file) {
        (Some(list), None) => input::parse_obs_list(list)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            input::parse_obs_lines(&text)?
        }
        _ => return Err(CliError::Input("exactly one of --obs or --obs-file is required".into())),
    };
    let obs = input::observations(tokens, &model)?;
    let cap = match args.cap {
        Some(c) => DenseCap::new(c).map_err(|e| CliError::Input(e.to_string()))?,
        None => DenseCap::default(),
    };
    let inputs = Inputs {
        model: args.model.display().to_string(),
        tokens: obs.tokens().to_vec(),
        n: obs.len(),
        causes: model.num_causes(),
        vocab: model.vocab_size(),
        alpha_scale: args.alpha_scale,
    };
    Ok(Loaded {
        file,
        model,
        obs,
        cap,
        inputs,
    })
}

fn labeled(file: &ModelFile, values: &[f64]) -> Vec<Labeled> {
    values
        .iter()
        .enumerate()
        .map(|(z, &value)| Labeled {
            label: file.cause_label(z),
            value,
        })
        .collect()
}

fn exact_report(l: &Loaded, r: InferenceResult<f64>, decomposition: Option<String>) -> RunReport {
    RunReport {
        command: "infer".into(),
        method: r.method.clone(),
        inputs: l.inputs.clone(),
        ptilde: finite(r.ptilde_full),
        probability: finite(r.probability),
        log_probability: finite(r.log_probability),
        theta_mean: Some(labeled(&l.file, &r.theta_mean)),
        stderr: None,
        decomposition,
        diagnostics: r.diagnostics,
    }
}

fn infer(args: &InferArgs) -> Result<RunReport, CliError> {
    let l = load(&args.instance)?;
    let iter_opts = IterOptions {
        max_iters: args.max_iters,
        tol: args.tol,
    };
    let started = Instant::now();
    let mut report = match args.method {
        Method::Exact => exact_report(&l, posterior_mean_with_cap(&l.model, &l.obs, l.cap)?, None),
        Method::Sparse => {
            let graph = interaction_graph(&l.model, &l.obs, args.eps);
            let td = tree_decompose(&graph);
            // bag tables are dense in the bag's positions
            l.cap.check(td.bags().iter().map(|b| b.len()).max().unwrap_or(0))?;
            let r = sparse_posterior_mean(&l.model, &l.obs, &td, args.eps)?;
            exact_report(&l, r, args.dump_decomposition.then(|| td.to_string()))
        }
        Method::Ml | Method::Vb => {
            let (method, theta, iterations) = if args.method == Method::Ml {
                let s = em_max_likelihood(&l.model, &l.obs, iter_opts)?;
                ("ml", s.theta, s.iterations)
            } else {
                let (s, mean) = variational_bayes(&l.model, &l.obs, iter_opts)?;
                ("vb", mean, s.iterations)
            };
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("iterations".into(), iterations.to_string());
            diagnostics.insert("tol".into(), args.tol.to_string());
            diagnostics.insert("max_iters".into(), args.max_iters.to_string());
            RunReport {
                command: "infer".into(),
                method: method.into(),
                inputs: l.inputs.clone(),
                ptilde: None,
                probability: None,
                log_probability: None,
                theta_mean: Some(labeled(&l.file, &theta)),
                stderr: None,
                decomposition: None,
                diagnostics,
            }
        }
        Method::Gibbs => {
            let opts = GibbsOptions {
                iterations: args.iterations,
                burn_in: args.burn_in,
                seed: args.seed,
                ..GibbsOptions::default()
            };
            let r = gibbs_sample(&l.model, &l.obs, opts)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("iterations".into(), args.iterations.to_string());
            diagnostics.insert("burn_in".into(), r.burn_in.to_string());
            diagnostics.insert("batches".into(), r.batches.to_string());
            diagnostics.insert("seed".into(), args.seed.to_string());
            diagnostics.insert("rng".into(), "pcg64".into());
            RunReport {
                command: "infer".into(),
                method: "gibbs".into(),
                inputs: l.inputs.clone(),
                ptilde: None,
                probability: None,
                log_probability: None,
                theta_mean: Some(labeled(&l.file, &r.theta_mean)),
                stderr: Some(labeled(&l.file, &r.stderr)),
                decomposition: None,
                diagnostics,
            }
        }
    };
    report.diagnostics.insert(
        "wall_ms".into(),
        format!("{:.3}", started.elapsed().as_secs_f64() * 1e3),
    );
    Ok(report)
}

fn oracle(args: &OracleArgs) -> Result<RunReport, CliError> {
    let l = load(&args.instance)?;
    let started = Instant::now();
    let n = l.obs.len();
    let (method, value) = match args.kind {
        OracleKind::Brute => ("brute", oracles::brute_force_ptilde(&l.model, &l.obs)?),
        OracleKind::Partition => ("partition", oracles::partition_ptilde(&l.model, &l.obs)?),
        OracleKind::Factor => (
            "factor",
            oracles::factor_product_ptilde_with_cap(&l.model, &l.obs, l.cap)?,
        ),
        OracleKind::Permanent => {
            // rows beta(w_i|.) form the matrix; p~(W) at alpha = -1 is (-1)^n perm
            let matrix: Vec<Vec<f64>> = l.obs.tokens().iter().map(|&w| l.model.beta_row(w).to_vec()).collect();
            let perm = oracles::permanent(&matrix)?;
            ("permanent", if n % 2 == 0 { perm } else { -perm })
        }
    };
    let mut diagnostics = BTreeMap::new();
    if args.kind == OracleKind::Permanent {
        diagnostics.insert("alpha".into(), "-1".into());
    }
    diagnostics.insert(
        "wall_ms".into(),
        format!("{:.3}", started.elapsed().as_secs_f64() * 1e3),
    );
    Ok(RunReport {
        command: "oracle".into(),
        method: method.into(),
        inputs: l.inputs,
        ptilde: finite(value),
        probability: None,
        log_probability: None,
        theta_mean: None,
        stderr: None,
        decomposition: None,
        diagnostics,
    })
}

fn graph(args: &GraphArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let l = load(&args.instance)?;
    let g = interaction_graph(&l.model, &l.obs, args.eps);
    let td = tree_decompose(&g);
    let valid = validate_decomposition(&g, &td).is_valid();
    let report = GraphReport {
        n: g.n(),
        edges: g.edges(),
        width: td.width(),
        root: td.root(),
        bags: td.bags().iter().map(|b| b.iter().collect()).collect(),
        parent: (0..td.len()).map(|t| td.parent(t)).collect(),
        valid,
    };
    let text = match args.instance.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = format!("n\t{}\nvalid\t{valid}\n", report.n);
            for (i, j) in &report.edges {
                s.push_str(&format!("edge\t{i}\t{j}\n"));
            }
            s.push_str(&td.to_string());
            s
        }
    };
    emit(out, &text)
}

/// Chain instance: cause `z` emits only on a window of `support`
/// consecutive positions; one vocabulary item per position.
pub fn chain_instance(n: usize, causes: usize, support: usize, seed: u64) -> (Model<f64>, ObservationSeq) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let support = support.clamp(1, n.max(1));
    let mut beta = vec![vec![0.0; causes]; n.max(1)];
    // the first windows tile the chain so every position has some cause
    let stride = (support - 1).max(1);
    let covering = n.saturating_sub(support).div_ceil(stride) + 1;
    for z in 0..causes {
        let start = if n <= support {
            0
        } else if z < covering {
            (z * stride).min(n - support)
        } else {
            rng.random_range(0..=n - support)
        };
        for row in beta.iter_mut().skip(start).take(support) {
            row[z] = rng.random_range(0.05..1.0);
        }
    }
    let alpha = (0..causes).map(|_| rng.random_range(0.1..2.0)).collect();
    let model = Model::new(alpha, beta).expect("generated model is valid");
    let obs = ObservationSeq::for_model((0..n).collect(), &model).expect("tokens in range");
    (model, obs)
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sizes = input::parse_obs_list(&args.sizes)?;
    if args.causes == 0 {
        return Err(CliError::Input("--causes must be positive".into()));
    }
    let mut rows = Vec::new();
    for (k, &n) in sizes.iter().enumerate() {
        let (model, obs) = chain_instance(n, args.causes, args.support, args.seed.wrapping_add(k as u64));
        let td = tree_decompose(&interaction_graph(&model, &obs, 0.0));
        let t = Instant::now();
        let sparse = sparse_posterior_mean(&model, &obs, &td, 0.0)?;
        let sparse_ms = t.elapsed().as_secs_f64() * 1e3;
        let (dense_ms, diff) = if n <= args.dense_max {
            let cap = DenseCap::new(n.clamp(crate::algebra::DEFAULT_CAP, crate::algebra::HARD_CAP))?;
            let t = Instant::now();
            let dense = ptilde_all_with_cap(&model, &obs, cap)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            let d = rel_diff(dense.coefficient(SubsetMask::full(n)), sparse.ptilde_full);
            (Some(ms), Some(d))
        } else {
            (None, None)
        };
        rows.push(BenchRow {
            n,
            causes: args.causes,
            width: td.width(),
            dense_ms,
            sparse_ms,
            rel_diff: diff,
        });
    }
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = String::from("n\tcauses\twidth\tdense_ms\tsparse_ms\trel_diff\n");
            for r in &rows {
                let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$e}"));
                s.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{:.4e}\t{}\n",
                    r.n,
                    r.causes,
                    r.width,
                    opt(r.dense_ms, 4),
                    r.sparse_ms,
                    opt(r.rel_diff, 2)
                ));
            }
            s
        }
    };
    emit(out, &text)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
}

fn emit_report(out: &mut dyn Write, report: &RunReport, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => emit(out, &report.to_json()),
        Format::Tsv => emit(out, &report.to_tsv()),
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Infer(a) => infer(a).and_then(|r| emit_report(out, &r, a.instance.format)),
        Command::Oracle(a) => oracle(a).and_then(|r| emit_report(out, &r, a.instance.format)),
        Command::Graph(a) => graph(a, out),
        Command::Bench(a) => bench(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
