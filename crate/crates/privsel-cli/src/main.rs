//! Command line front end: experiment runs for both applications,
//! admissibility checking, empirical privacy audits, and non-private
//! reference evaluation.
//!
//! Every option of a subcommand can also come from a toml file passed via
//! `--config`; explicit flags override file values. Nothing is read from
//! environment variables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use privsel::graph::{true_topk_agg, true_topk_pareto, vertex_objectives};
use privsel::tree::{nodp_moet, tree_objectives, EvolutionConfig, ExactSelection};
use privsel::RandomSource;
use privsel_cli::audit::{
    audit_family, check_target, AdmissibilityOptions, AdmissibilityTarget, AuditFamily,
    AuditMechanism,
};
use privsel_cli::io::{load_edge_list, load_tabular};
use privsel_cli::runner::{
    build_moet_variant, build_motkin_variant, emit_results, parse_global_mechanism,
    run_experiment, ExperimentSpec, MethodSpec, MetricKind, OutputFormat, ResultTable,
    VariantKind,
};

#[derive(Parser)]
#[command(
    name = "privsel",
    version,
    about = "Differentially private multi-objective selection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve decision trees under differential privacy and score them
    /// against the exact run.
    Moet(MoetArgs),
    /// Select top-k graph vertices under differential privacy and score
    /// them against the exact top-k.
    Motkin(MotkinArgs),
    /// Exhaustively verify the bundled sensitivity functions on small
    /// instance families.
    CheckAdmissibility(CheckArgs),
    /// Estimate the worst-case privacy loss of the selection mechanisms
    /// from samples over exhaustive neighbor pairs.
    DpAudit(DpAuditArgs),
    /// Run the non-private reference selection and print what it picks.
    Eval(EvalArgs),
}

/// Fields set on the command line win over fields read from the config
/// file.
macro_rules! overlay {
    ($cli:ident, $file:ident, [ $($field:ident),* $(,)? ]) => {{
        $( if $cli.$field.is_some() { $file.$field = $cli.$field; } )*
        $file.config = None;
        $file
    }};
}

fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct MoetArgs {
    /// Toml file supplying any of the other options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Csv dataset with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Json schema sidecar with attribute kinds, public bounds and the
    /// label column.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Dataset column of the result table; defaults to the data file stem.
    #[arg(long)]
    dataset_name: Option<String>,
    /// pareto_global, pareto_local, agg_global or agg_local.
    #[arg(long)]
    variant: Option<String>,
    /// Mechanism of the global variants: exponential, permute_flip,
    /// noisy_max_laplace, noisy_max_exponential or noisy_max_gumbel.
    #[arg(long)]
    mechanism: Option<String>,
    /// Two comma-separated objective weights for the agg variants.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Comma-separated privacy budgets to sweep.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Independent repetitions per epsilon [default: 1].
    #[arg(long)]
    repetitions: Option<usize>,
    /// Master seed; every repetition derives its own stream [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// c_error or u_agg [default: c_error].
    #[arg(long)]
    metric: Option<String>,
    /// Offspring per generation; even, at least 2.
    #[arg(long)]
    population: Option<usize>,
    /// Trees kept by selection per generation.
    #[arg(long)]
    selected: Option<usize>,
    /// Generations of the evolutionary loop.
    #[arg(long)]
    iterations: Option<usize>,
    /// Tests per path in the initial random trees.
    #[arg(long)]
    initial_depth: Option<u32>,
    /// Depth bound enforced by pruning.
    #[arg(long)]
    max_depth: Option<u32>,
    /// Trees returned by the final selection.
    #[arg(long)]
    output: Option<usize>,
    /// csv or json [default: csv].
    #[arg(long)]
    format: Option<String>,
    /// Write the result table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl MoetArgs {
    fn resolve(self) -> Result<MoetArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file: MoetArgs = load_config(&path)?;
        let cli = self;
        Ok(overlay!(cli, file, [
            data,
            schema,
            dataset_name,
            variant,
            mechanism,
            weights,
            epsilons,
            repetitions,
            seed,
            metric,
            population,
            selected,
            iterations,
            initial_depth,
            max_depth,
            output,
            format,
            out,
        ]))
    }
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct MotkinArgs {
    /// Toml file supplying any of the other options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Edge list file: one "u v" pair per line, '#' comments allowed.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Dataset column of the result table; defaults to the data file stem.
    #[arg(long)]
    dataset_name: Option<String>,
    /// pareto_global, pareto_local, agg_global or agg_local.
    #[arg(long)]
    variant: Option<String>,
    /// Mechanism of the global variants: exponential, permute_flip,
    /// noisy_max_laplace, noisy_max_exponential or noisy_max_gumbel.
    #[arg(long)]
    mechanism: Option<String>,
    /// Two comma-separated objective weights for the agg variants.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Vertices to select.
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated privacy budgets to sweep.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Independent repetitions per epsilon [default: 1].
    #[arg(long)]
    repetitions: Option<usize>,
    /// Master seed; every repetition derives its own stream [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// c_error, recall or u_agg [default: c_error].
    #[arg(long)]
    metric: Option<String>,
    /// csv or json [default: csv].
    #[arg(long)]
    format: Option<String>,
    /// Write the result table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl MotkinArgs {
    fn resolve(self) -> Result<MotkinArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file: MotkinArgs = load_config(&path)?;
        let cli = self;
        Ok(overlay!(cli, file, [
            data,
            dataset_name,
            variant,
            mechanism,
            weights,
            k,
            epsilons,
            repetitions,
            seed,
            metric,
            format,
            out,
        ]))
    }
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct CheckArgs {
    /// Toml file supplying any of the other options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Comma-separated targets; default all. One of tpr, tnr, degree,
    /// egodensity, pareto_trees, pareto_vertices, agg_trees, agg_vertices.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<String>>,
    /// Records in the tabular universe [default: 10].
    #[arg(long)]
    universe: Option<usize>,
    /// Largest tabular dataset enumerated [default: 5].
    #[arg(long)]
    max_records: Option<usize>,
    /// Largest vertex count enumerated [default: 5].
    #[arg(long)]
    max_vertices: Option<usize>,
    /// Distances tested on tabular instances [default: 3].
    #[arg(long)]
    t_max_tabular: Option<u32>,
    /// Distances tested on graph instances [default: 2].
    #[arg(long)]
    t_max_graph: Option<u32>,
    /// Two comma-separated weights for the aggregate targets [default: 3,2].
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Instance budget of the brute force local sensitivity oracle.
    #[arg(long)]
    enumeration_budget: Option<usize>,
}

impl CheckArgs {
    fn resolve(self) -> Result<CheckArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file: CheckArgs = load_config(&path)?;
        let cli = self;
        Ok(overlay!(cli, file, [
            targets,
            universe,
            max_records,
            max_vertices,
            t_max_tabular,
            t_max_graph,
            weights,
            enumeration_budget,
        ]))
    }
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct DpAuditArgs {
    /// Toml file supplying any of the other options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Comma-separated neighbor pair families: tabular, graph; default
    /// both.
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    /// Comma-separated mechanisms; default all six, including
    /// local_dampening.
    #[arg(long, value_delimiter = ',')]
    mechanisms: Option<Vec<String>>,
    /// Comma-separated privacy budgets [default: 0.1,1].
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Samples drawn per mechanism and neighbor side [default: 200000].
    #[arg(long)]
    samples: Option<u64>,
    /// Master seed of the audit sampling [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Estimation slack added to epsilon before flagging a breach
    /// [default: 0.05].
    #[arg(long)]
    slack: Option<f64>,
}

impl DpAuditArgs {
    fn resolve(self) -> Result<DpAuditArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file: DpAuditArgs = load_config(&path)?;
        let cli = self;
        Ok(overlay!(cli, file, [families, mechanisms, epsilons, samples, seed, slack]))
    }
}

#[derive(Debug, Default, clap::Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
struct EvalArgs {
    /// Toml file supplying any of the other options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// moet or motkin.
    #[arg(long)]
    application: Option<String>,
    /// Dataset: csv for moet, edge list for motkin.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Json schema sidecar (moet only).
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Exact selection rule: pareto or agg [default: pareto].
    #[arg(long)]
    selection: Option<String>,
    /// Two comma-separated weights for the agg selection.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Vertices to select (motkin only).
    #[arg(long)]
    k: Option<usize>,
    /// Offspring per generation; even, at least 2 (moet only).
    #[arg(long)]
    population: Option<usize>,
    /// Trees kept by selection per generation (moet only).
    #[arg(long)]
    selected: Option<usize>,
    /// Generations of the evolutionary loop (moet only).
    #[arg(long)]
    iterations: Option<usize>,
    /// Tests per path in the initial random trees (moet only).
    #[arg(long)]
    initial_depth: Option<u32>,
    /// Depth bound enforced by pruning (moet only).
    #[arg(long)]
    max_depth: Option<u32>,
    /// Trees returned by the final selection (moet only).
    #[arg(long)]
    output: Option<usize>,
    /// Seed of the evolutionary randomness (moet only) [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Write the selected trees as json (moet only).
    #[arg(long)]
    trees_out: Option<PathBuf>,
}

impl EvalArgs {
    fn resolve(self) -> Result<EvalArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let mut file: EvalArgs = load_config(&path)?;
        let cli = self;
        Ok(overlay!(cli, file, [
            application,
            data,
            schema,
            selection,
            weights,
            k,
            population,
            selected,
            iterations,
            initial_depth,
            max_depth,
            output,
            seed,
            trees_out,
        ]))
    }
}

fn parse_weights(weights: Option<Vec<f64>>) -> Result<Option<[f64; 2]>> {
    match weights {
        None => Ok(None),
        Some(w) => {
            let &[a, b] = w.as_slice() else {
                bail!("expected exactly two weights, got {}", w.len());
            };
            Ok(Some([a, b]))
        }
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn evolution_config(
    population: Option<usize>,
    selected: Option<usize>,
    iterations: Option<usize>,
    initial_depth: Option<u32>,
    max_depth: Option<u32>,
    output: Option<usize>,
) -> Result<EvolutionConfig> {
    Ok(EvolutionConfig {
        population: population.context("--population is required")?,
        selected: selected.context("--selected is required")?,
        iterations: iterations.context("--iterations is required")?,
        initial_depth: initial_depth.context("--initial-depth is required")?,
        max_depth: max_depth.context("--max-depth is required")?,
        output: output.context("--output is required")?,
    })
}

fn moet_spec(args: MoetArgs) -> Result<(ExperimentSpec, OutputFormat, Option<PathBuf>)> {
    let data = args.data.context("--data is required")?;
    let schema = args.schema.context("--schema is required")?;
    let kind = VariantKind::parse(&args.variant.context("--variant is required")?)?;
    let mechanism = args
        .mechanism
        .as_deref()
        .map(parse_global_mechanism)
        .transpose()?;
    let weights = parse_weights(args.weights)?;
    let variant = build_moet_variant(kind, mechanism, weights)?;
    let evolution = evolution_config(
        args.population,
        args.selected,
        args.iterations,
        args.initial_depth,
        args.max_depth,
        args.output,
    )?;
    let spec = ExperimentSpec {
        dataset_name: args.dataset_name.unwrap_or_else(|| file_stem(&data)),
        dataset: data,
        schema: Some(schema),
        method: MethodSpec::Moet { variant, evolution },
        epsilons: args.epsilons.context("--epsilons is required")?,
        repetitions: args.repetitions.unwrap_or(1),
        master_seed: args.seed.unwrap_or(0),
        metric: MetricKind::parse(args.metric.as_deref().unwrap_or("c_error"))?,
    };
    let format = OutputFormat::parse(args.format.as_deref().unwrap_or("csv"))?;
    Ok((spec, format, args.out))
}

fn motkin_spec(args: MotkinArgs) -> Result<(ExperimentSpec, OutputFormat, Option<PathBuf>)> {
    let data = args.data.context("--data is required")?;
    let kind = VariantKind::parse(&args.variant.context("--variant is required")?)?;
    let mechanism = args
        .mechanism
        .as_deref()
        .map(parse_global_mechanism)
        .transpose()?;
    let weights = parse_weights(args.weights)?;
    let variant = build_motkin_variant(kind, mechanism, weights)?;
    let spec = ExperimentSpec {
        dataset_name: args.dataset_name.unwrap_or_else(|| file_stem(&data)),
        dataset: data,
        schema: None,
        method: MethodSpec::Motkin {
            variant,
            k: args.k.context("--k is required")?,
        },
        epsilons: args.epsilons.context("--epsilons is required")?,
        repetitions: args.repetitions.unwrap_or(1),
        master_seed: args.seed.unwrap_or(0),
        metric: MetricKind::parse(args.metric.as_deref().unwrap_or("c_error"))?,
    };
    let format = OutputFormat::parse(args.format.as_deref().unwrap_or("csv"))?;
    Ok((spec, format, args.out))
}

fn write_table(table: &ResultTable, format: OutputFormat, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            emit_results(table, format, &mut file)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit_results(table, format, &mut lock)
        }
    }
}

fn cmd_moet(args: MoetArgs) -> Result<()> {
    let (spec, format, out) = moet_spec(args)?;
    let table = run_experiment(&spec)?;
    write_table(&table, format, out.as_deref())
}

fn cmd_motkin(args: MotkinArgs) -> Result<()> {
    let (spec, format, out) = motkin_spec(args)?;
    let table = run_experiment(&spec)?;
    write_table(&table, format, out.as_deref())
}

fn cmd_check(args: CheckArgs) -> Result<()> {
    let defaults = AdmissibilityOptions::default();
    let opts = AdmissibilityOptions {
        universe: args.universe.unwrap_or(defaults.universe),
        max_records: args.max_records.unwrap_or(defaults.max_records),
        max_vertices: args.max_vertices.unwrap_or(defaults.max_vertices),
        t_max_tabular: args.t_max_tabular.unwrap_or(defaults.t_max_tabular),
        t_max_graph: args.t_max_graph.unwrap_or(defaults.t_max_graph),
        weights: parse_weights(args.weights)?.unwrap_or(defaults.weights),
        enumeration_budget: args
            .enumeration_budget
            .unwrap_or(defaults.enumeration_budget),
    };
    let targets = match args.targets {
        None => AdmissibilityTarget::all().to_vec(),
        Some(names) => names
            .iter()
            .map(|name| AdmissibilityTarget::parse(name))
            .collect::<Result<Vec<_>>>()?,
    };
    println!("target,instances,inequalities,violations");
    let mut failures = 0usize;
    for target in targets {
        let summary = check_target(target, &opts)?;
        println!(
            "{},{},{},{}",
            summary.target, summary.instances, summary.inequalities, summary.violations
        );
        if !summary.is_admissible() {
            failures += 1;
            if let Some(first) = &summary.first_violation {
                eprintln!("{}: first violation: {first}", summary.target);
            }
        }
    }
    if failures > 0 {
        bail!("{failures} sensitivity function(s) failed the admissibility check");
    }
    Ok(())
}

fn parse_audit_family(name: &str) -> Result<AuditFamily> {
    match name.to_ascii_lowercase().as_str() {
        "tabular" => Ok(AuditFamily::Tabular),
        "graph" => Ok(AuditFamily::Graph),
        _ => Err(anyhow!("unknown family {name:?}; expected tabular or graph")),
    }
}

fn cmd_audit(args: DpAuditArgs) -> Result<()> {
    let families = match args.families {
        None => vec![AuditFamily::Tabular, AuditFamily::Graph],
        Some(names) => names
            .iter()
            .map(|name| parse_audit_family(name))
            .collect::<Result<Vec<_>>>()?,
    };
    let mechanisms = match args.mechanisms {
        None => AuditMechanism::all().to_vec(),
        Some(names) => names
            .iter()
            .map(|name| AuditMechanism::parse(name))
            .collect::<Result<Vec<_>>>()?,
    };
    let epsilons = args.epsilons.unwrap_or_else(|| vec![0.1, 1.0]);
    for &epsilon in &epsilons {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            bail!("epsilon must be finite and positive, got {epsilon}");
        }
    }
    let samples = args.samples.unwrap_or(200_000);
    let seed = args.seed.unwrap_or(0);
    let slack = args.slack.unwrap_or(0.05);
    println!("mechanism,family,epsilon,pairs,samples,worst_log_ratio,bound");
    let mut breaches = 0usize;
    for &mechanism in &mechanisms {
        for &family in &families {
            for &epsilon in &epsilons {
                let report = audit_family(family, mechanism, epsilon, samples, seed)?;
                let bound = epsilon + slack;
                println!(
                    "{},{},{},{},{},{:.6},{:.6}",
                    report.mechanism,
                    report.family,
                    report.epsilon,
                    report.pairs,
                    report.samples,
                    report.worst_log_ratio,
                    bound
                );
                if report.worst_log_ratio > bound {
                    breaches += 1;
                    eprintln!(
                        "{} on {} at epsilon {}: observed log ratio {:.6} exceeds {:.6}",
                        report.mechanism,
                        report.family,
                        report.epsilon,
                        report.worst_log_ratio,
                        bound
                    );
                }
            }
        }
    }
    if breaches > 0 {
        bail!("{breaches} audit combination(s) exceeded the privacy bound");
    }
    Ok(())
}

fn eval_motkin(args: EvalArgs) -> Result<()> {
    let data = args.data.context("--data is required")?;
    if args.schema.is_some() {
        bail!("--schema applies to the moet application");
    }
    let k = args.k.context("--k is required")?;
    let loaded = load_edge_list(&data)?;
    let weights = parse_weights(args.weights)?;
    let top = match args.selection.as_deref().unwrap_or("pareto") {
        "pareto" => {
            if weights.is_some() {
                bail!("weights apply to the agg selection");
            }
            true_topk_pareto(&loaded.graph, k)?
        }
        "agg" => {
            let w = weights.context("the agg selection needs --weights")?;
            true_topk_agg(&loaded.graph, k, &w)?
        }
        other => bail!("unknown selection {other:?}; expected pareto or agg"),
    };
    let objectives = vertex_objectives(&loaded.graph, &top);
    println!("rank,vertex,original_id,degree,egodensity");
    for (rank, (&vertex, row)) in top.iter().zip(&objectives).enumerate() {
        println!(
            "{rank},{vertex},{},{},{}",
            loaded.original_ids[vertex as usize], row[0], row[1]
        );
    }
    Ok(())
}

fn eval_moet(args: EvalArgs) -> Result<()> {
    let data = args.data.clone().context("--data is required")?;
    let schema = args.schema.clone().context("--schema is required")?;
    if args.k.is_some() {
        bail!("--k applies to the motkin application");
    }
    let x = load_tabular(&data, &schema)?;
    let evolution = evolution_config(
        args.population,
        args.selected,
        args.iterations,
        args.initial_depth,
        args.max_depth,
        args.output,
    )?;
    let weights = parse_weights(args.weights.clone())?;
    let selection = match (args.selection.as_deref().unwrap_or("pareto"), weights) {
        ("pareto", None) => ExactSelection::Pareto,
        ("pareto", Some(_)) => bail!("weights apply to the agg selection"),
        ("agg", Some(w)) => ExactSelection::Aggregate(w),
        ("agg", None) => bail!("the agg selection needs --weights"),
        (other, _) => bail!("unknown selection {other:?}; expected pareto or agg"),
    };
    let mut rng = RandomSource::new(args.seed.unwrap_or(0));
    let run = nodp_moet(&x, &evolution, &selection, &mut rng)?;
    let objectives = tree_objectives(&x, &run.selected)?;
    println!("index,tpr,tnr");
    for (index, row) in objectives.iter().enumerate() {
        println!("{index},{},{}", row[0], row[1]);
    }
    if let Some(path) = &args.trees_out {
        let json = serde_json::to_string_pretty(&run.selected)?;
        fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    match args
        .application
        .as_deref()
        .context("--application is required (moet or motkin)")?
    {
        "moet" => eval_moet(args),
        "motkin" => eval_motkin(args),
        other => bail!("unknown application {other:?}; expected moet or motkin"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moet(args) => cmd_moet(args.resolve()?),
        Command::Motkin(args) => cmd_motkin(args.resolve()?),
        Command::CheckAdmissibility(args) => cmd_check(args.resolve()?),
        Command::DpAudit(args) => cmd_audit(args.resolve()?),
        Command::Eval(args) => cmd_eval(args.resolve()?),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
