//! Experiment configuration, the seeded repetition runner, and result
//! emission.
//!
//! Every repetition draws its randomness from a seed derived purely from
//! (master seed, epsilon index, repetition index), so runs are reproducible
//! bit for bit regardless of how repetitions are scheduled across threads.
//! Each private run is paired with its non-private reference: the same
//! evolutionary loop with exact selection for trees, and the exact top-k
//! for graphs.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use privsel::graph::{
    dp_motkin, recall_at_k, true_topk_agg, true_topk_pareto, vertex_objectives, MotkinVariant,
};
use privsel::mech::{GlobalMechanism, NoiseKind};
use privsel::pareto::metric_c;
use privsel::tree::{
    dp_moet, nodp_moet, tree_objectives, EvolutionConfig, ExactSelection, MoetVariant,
};
use privsel::{derive_seed, BudgetLedger, PrivacyBudget, RandomSource};

use crate::io::{load_edge_list, load_tabular};

/// Tolerance for the range check on reported means, absorbing only the
/// accumulation error of averaging in-range values.
const RANGE_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

/// Selection rule shape shared by both applications.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantKind {
    ParetoGlobal,
    ParetoLocal,
    AggGlobal,
    AggLocal,
}

impl VariantKind {
    pub fn parse(name: &str) -> Result<VariantKind> {
        let kind = match name.replace('-', "_").as_str() {
            "pareto_global" => VariantKind::ParetoGlobal,
            "pareto_local" => VariantKind::ParetoLocal,
            "agg_global" => VariantKind::AggGlobal,
            "agg_local" => VariantKind::AggLocal,
            _ => {
                return Err(anyhow!(
                    "unknown variant {name:?}; expected one of pareto_global, pareto_local, \
                     agg_global, agg_local"
                ))
            }
        };
        Ok(kind)
    }
}

/// Parses a global mechanism name as printed by its display form.
pub fn parse_global_mechanism(name: &str) -> Result<GlobalMechanism> {
    let mech = match name.replace('-', "_").as_str() {
        "exponential" => GlobalMechanism::Exponential,
        "permute_flip" => GlobalMechanism::PermuteAndFlip,
        "noisy_max_laplace" => GlobalMechanism::NoisyMax(NoiseKind::Laplace),
        "noisy_max_exponential" => GlobalMechanism::NoisyMax(NoiseKind::Exponential),
        "noisy_max_gumbel" => GlobalMechanism::NoisyMax(NoiseKind::Gumbel),
        _ => {
            return Err(anyhow!(
                "unknown mechanism {name:?}; expected one of exponential, permute_flip, \
                 noisy_max_laplace, noisy_max_exponential, noisy_max_gumbel"
            ))
        }
    };
    Ok(mech)
}

/// The reported quantity of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Coverage of the private selection by the non-private reference;
    /// higher means the private output is more dominated.
    CError,
    /// Fraction of the exact top-k recovered by the private selection.
    Recall,
    /// Mean weighted objective sum of the private selection.
    UAgg,
}

impl MetricKind {
    pub fn parse(name: &str) -> Result<MetricKind> {
        let metric = match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "c" | "c_error" => MetricKind::CError,
            "recall" => MetricKind::Recall,
            "u_agg" | "uagg" => MetricKind::UAgg,
            _ => {
                return Err(anyhow!(
                    "unknown metric {name:?}; expected one of c, recall, u_agg"
                ))
            }
        };
        Ok(metric)
    }

    /// Column value used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::CError => "C_error",
            MetricKind::Recall => "recall",
            MetricKind::UAgg => "u_agg",
        }
    }
}

fn format_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        format!("{w}")
    }
}

fn variant_label(kind: VariantKind, mechanism: Option<GlobalMechanism>, weights: Option<[f64; 2]>) -> String {
    let mut label = match kind {
        VariantKind::ParetoGlobal => format!("pareto_global_{}", mechanism.expect("global variant")),
        VariantKind::ParetoLocal => "pareto_local".to_string(),
        VariantKind::AggGlobal => format!("agg_global_{}", mechanism.expect("global variant")),
        VariantKind::AggLocal => "agg_local".to_string(),
    };
    if let Some([a, b]) = weights {
        label.push_str(&format!("_w{}-{}", format_weight(a), format_weight(b)));
    }
    label
}

// ---------------------------------------------------------------------------
// Variant construction
// ---------------------------------------------------------------------------

fn check_variant_flags(
    kind: VariantKind,
    mechanism: &Option<GlobalMechanism>,
    weights: &Option<[f64; 2]>,
) -> Result<()> {
    let global = matches!(kind, VariantKind::ParetoGlobal | VariantKind::AggGlobal);
    let aggregate = matches!(kind, VariantKind::AggGlobal | VariantKind::AggLocal);
    if !global && mechanism.is_some() {
        bail!("a mechanism applies only to the global variants");
    }
    if aggregate && weights.is_none() {
        bail!("aggregate variants need weights");
    }
    if !aggregate && weights.is_some() {
        bail!("weights apply only to the aggregate variants");
    }
    Ok(())
}

/// Builds the tree-selection variant from parsed flags. Global variants
/// default to the exponential mechanism.
pub fn build_moet_variant(
    kind: VariantKind,
    mechanism: Option<GlobalMechanism>,
    weights: Option<[f64; 2]>,
) -> Result<MoetVariant> {
    check_variant_flags(kind, &mechanism, &weights)?;
    let mechanism = mechanism.unwrap_or(GlobalMechanism::Exponential);
    Ok(match kind {
        VariantKind::ParetoGlobal => MoetVariant::ParetoGlobal { mechanism },
        VariantKind::ParetoLocal => MoetVariant::ParetoLocal,
        VariantKind::AggGlobal => MoetVariant::AggGlobal {
            mechanism,
            weights: weights.expect("checked above"),
        },
        VariantKind::AggLocal => MoetVariant::AggLocal {
            weights: weights.expect("checked above"),
        },
    })
}

/// Builds the vertex-selection variant from parsed flags. Global variants
/// default to the exponential mechanism.
pub fn build_motkin_variant(
    kind: VariantKind,
    mechanism: Option<GlobalMechanism>,
    weights: Option<[f64; 2]>,
) -> Result<MotkinVariant> {
    check_variant_flags(kind, &mechanism, &weights)?;
    let mechanism = mechanism.unwrap_or(GlobalMechanism::Exponential);
    Ok(match kind {
        VariantKind::ParetoGlobal => MotkinVariant::ParetoGlobal { mechanism },
        VariantKind::ParetoLocal => MotkinVariant::ParetoLocal,
        VariantKind::AggGlobal => MotkinVariant::AggGlobal {
            mechanism,
            weights: weights.expect("checked above"),
        },
        VariantKind::AggLocal => MotkinVariant::AggLocal {
            weights: weights.expect("checked above"),
        },
    })
}

// ---------------------------------------------------------------------------
// Experiment specification
// ---------------------------------------------------------------------------

/// The configured method: which application runs and with what parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Moet {
        variant: MoetVariant,
        evolution: EvolutionConfig,
    },
    Motkin {
        variant: MotkinVariant,
        k: usize,
    },
}

/// A fully resolved experiment: dataset, method, budgets, repetitions,
/// seeding and the reported metric.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    /// Schema sidecar; required by the tree application, absent for graphs.
    pub schema: Option<PathBuf>,
    /// Name used in the result table's dataset column.
    pub dataset_name: String,
    pub method: MethodSpec,
    pub epsilons: Vec<f64>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub metric: MetricKind,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            bail!("no epsilons given");
        }
        for (index, &epsilon) in self.epsilons.iter().enumerate() {
            if !epsilon.is_finite() || epsilon <= 0.0 {
                bail!("epsilon {index} must be finite and positive, got {epsilon}");
            }
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        match &self.method {
            MethodSpec::Moet { variant, evolution } => {
                if self.schema.is_none() {
                    bail!("the tree application needs a schema sidecar");
                }
                evolution.validate()?;
                if self.metric == MetricKind::Recall {
                    bail!("the recall metric applies to the graph application");
                }
                if self.metric == MetricKind::UAgg && moet_weights(variant).is_none() {
                    bail!("the u_agg metric needs an aggregate variant");
                }
            }
            MethodSpec::Motkin { variant, k } => {
                if self.schema.is_some() {
                    bail!("a schema sidecar applies to the tree application");
                }
                if *k == 0 {
                    bail!("k must be at least 1");
                }
                if self.metric == MetricKind::UAgg && motkin_weights(variant).is_none() {
                    bail!("the u_agg metric needs an aggregate variant");
                }
            }
        }
        Ok(())
    }

    /// The method column of the result table.
    pub fn method_label(&self) -> String {
        match &self.method {
            MethodSpec::Moet { variant, .. } => {
                let (kind, mechanism, weights) = match variant {
                    MoetVariant::ParetoGlobal { mechanism } => {
                        (VariantKind::ParetoGlobal, Some(*mechanism), None)
                    }
                    MoetVariant::ParetoLocal => (VariantKind::ParetoLocal, None, None),
                    MoetVariant::AggGlobal { mechanism, weights } => {
                        (VariantKind::AggGlobal, Some(*mechanism), Some(*weights))
                    }
                    MoetVariant::AggLocal { weights } => {
                        (VariantKind::AggLocal, None, Some(*weights))
                    }
                };
                format!("moet_{}", variant_label(kind, mechanism, weights))
            }
            MethodSpec::Motkin { variant, .. } => {
                let (kind, mechanism, weights) = match variant {
                    MotkinVariant::ParetoGlobal { mechanism } => {
                        (VariantKind::ParetoGlobal, Some(*mechanism), None)
                    }
                    MotkinVariant::ParetoLocal => (VariantKind::ParetoLocal, None, None),
                    MotkinVariant::AggGlobal { mechanism, weights } => {
                        (VariantKind::AggGlobal, Some(*mechanism), Some(*weights))
                    }
                    MotkinVariant::AggLocal { weights } => {
                        (VariantKind::AggLocal, None, Some(*weights))
                    }
                };
                format!("motkin_{}", variant_label(kind, mechanism, weights))
            }
        }
    }
}

fn moet_weights(variant: &MoetVariant) -> Option<[f64; 2]> {
    match variant {
        MoetVariant::AggGlobal { weights, .. } | MoetVariant::AggLocal { weights } => {
            Some(*weights)
        }
        _ => None,
    }
}

fn motkin_weights(variant: &MotkinVariant) -> Option<[f64; 2]> {
    match variant {
        MotkinVariant::AggGlobal { weights, .. } | MotkinVariant::AggLocal { weights } => {
            Some(*weights)
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

/// One aggregated line of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub method: String,
    pub epsilon: f64,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub reps: usize,
    pub wall_ms: u64,
}

/// The rows of one experiment run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Copy with wall times zeroed. Wall time is the one field that varies
    /// between reruns of the same spec, so determinism comparisons use this
    /// view.
    pub fn without_wall_times(&self) -> ResultTable {
        let rows = self
            .rows
            .iter()
            .map(|row| ResultRow {
                wall_ms: 0,
                ..row.clone()
            })
            .collect();
        ResultTable { rows }
    }

    pub fn from_json(text: &str) -> Result<ResultTable> {
        let rows: Vec<ResultRow> =
            serde_json::from_str(text).context("parsing a result table from json")?;
        Ok(ResultTable { rows })
    }
}

// ---------------------------------------------------------------------------
// Budget schedule
// ---------------------------------------------------------------------------

/// The privacy schedule a run executes: every selection call gets an even
/// share of the total epsilon, and the reported total is the requested
/// epsilon verbatim rather than a re-summed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSchedule {
    pub calls: usize,
    pub per_call: f64,
    pub total: f64,
}

pub fn budget_schedule(epsilon: f64, calls: usize) -> Result<BudgetSchedule> {
    let ledger = BudgetLedger::plan(PrivacyBudget::new(epsilon)?, calls)?;
    let schedule = BudgetSchedule {
        calls: ledger.planned_calls(),
        per_call: ledger.per_call().epsilon(),
        total: ledger.total().epsilon(),
    };
    if schedule.total != epsilon {
        bail!("budget accounting drifted from the requested epsilon {epsilon}");
    }
    Ok(schedule)
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, variance.sqrt())
}

/// Inclusive range the metric mean must land in.
fn metric_range(metric: MetricKind, weights: Option<[f64; 2]>, scales: [f64; 2]) -> (f64, f64) {
    match metric {
        MetricKind::CError | MetricKind::Recall => (0.0, 1.0),
        MetricKind::UAgg => {
            let w = weights.expect("validated: u_agg needs an aggregate variant");
            let terms = [w[0] * scales[0], w[1] * scales[1]];
            (
                terms[0].min(0.0) + terms[1].min(0.0),
                terms[0].max(0.0) + terms[1].max(0.0),
            )
        }
    }
}

/// Mean weighted objective sum over the rows of an objective matrix.
fn mean_weighted(objectives: &[Vec<f64>], weights: [f64; 2]) -> f64 {
    let total: f64 = objectives
        .iter()
        .map(|row| weights[0] * row[0] + weights[1] * row[1])
        .sum();
    total / objectives.len() as f64
}

fn experiment_rows(
    spec: &ExperimentSpec,
    calls: usize,
    range: (f64, f64),
    rep_value: impl Fn(f64, u64) -> Result<f64> + Sync,
) -> Result<ResultTable> {
    let method = spec.method_label();
    let mut rows = Vec::with_capacity(spec.epsilons.len());
    for (index, &epsilon) in spec.epsilons.iter().enumerate() {
        let schedule = budget_schedule(epsilon, calls)?;
        eprintln!(
            "{method} on {}: total epsilon {} split into {} calls of epsilon {}",
            spec.dataset_name, schedule.total, schedule.calls, schedule.per_call
        );
        let started = Instant::now();
        let outcomes: Vec<Result<f64>> = (0..spec.repetitions)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(spec.master_seed, &[index as u64, rep as u64]);
                rep_value(epsilon, seed)
            })
            .collect();
        let mut values = Vec::with_capacity(spec.repetitions);
        for (rep, outcome) in outcomes.into_iter().enumerate() {
            values.push(
                outcome.with_context(|| format!("repetition {rep} at epsilon {epsilon}"))?,
            );
        }
        let wall_ms = started.elapsed().as_millis() as u64;
        let (mean, std) = mean_std(&values);
        if mean < range.0 - RANGE_TOLERANCE || mean > range.1 + RANGE_TOLERANCE {
            bail!(
                "mean {mean} of metric {} escaped its range [{}, {}]",
                spec.metric.label(),
                range.0,
                range.1
            );
        }
        rows.push(ResultRow {
            dataset: spec.dataset_name.clone(),
            method: method.clone(),
            epsilon,
            metric: spec.metric.label().to_string(),
            mean,
            std,
            reps: spec.repetitions,
            wall_ms,
        });
    }
    Ok(ResultTable { rows })
}

fn run_moet(
    spec: &ExperimentSpec,
    variant: &MoetVariant,
    evolution: &EvolutionConfig,
) -> Result<ResultTable> {
    let schema = spec.schema.as_ref().expect("validated");
    let x = load_tabular(&spec.dataset, schema)?;
    if x.is_empty() {
        bail!("dataset {} has no records", spec.dataset.display());
    }
    let exact = match moet_weights(variant) {
        Some(weights) => ExactSelection::Aggregate(weights),
        None => ExactSelection::Pareto,
    };
    let weights = moet_weights(variant);
    let range = metric_range(spec.metric, weights, [1.0, 1.0]);
    experiment_rows(spec, evolution.selection_calls(), range, |epsilon, seed| {
        let mut rng = RandomSource::new(seed);
        let private = dp_moet(&x, evolution, variant, PrivacyBudget::new(epsilon)?, &mut rng)?;
        let mut reference_rng = RandomSource::new(seed);
        let reference = nodp_moet(&x, evolution, &exact, &mut reference_rng)?;
        let private_objectives = tree_objectives(&x, &private.selected)?;
        match spec.metric {
            MetricKind::CError => {
                let reference_objectives = tree_objectives(&x, &reference.selected)?;
                Ok(metric_c(&reference_objectives, &private_objectives)?)
            }
            MetricKind::UAgg => Ok(mean_weighted(
                &private_objectives,
                weights.expect("validated"),
            )),
            MetricKind::Recall => unreachable!("rejected by validation"),
        }
    })
}

fn run_motkin(spec: &ExperimentSpec, variant: &MotkinVariant, k: usize) -> Result<ResultTable> {
    let loaded = load_edge_list(&spec.dataset)?;
    eprintln!(
        "{}: {} vertices, {} edges, {} self loops dropped, {} duplicate edges dropped",
        spec.dataset_name,
        loaded.graph.vertex_count(),
        loaded.graph.edge_count(),
        loaded.self_loops_dropped,
        loaded.duplicates_dropped
    );
    let g = loaded.graph;
    let weights = motkin_weights(variant);
    // The exact reference ignores the privacy budget and draws no
    // randomness, so one computation serves every repetition.
    let reference = match weights {
        Some(w) => true_topk_agg(&g, k, &w)?,
        None => true_topk_pareto(&g, k)?,
    };
    let reference_objectives = vertex_objectives(&g, &reference);
    let degree_scale = g.vertex_count().saturating_sub(1) as f64;
    let range = metric_range(spec.metric, weights, [degree_scale, 1.0]);
    experiment_rows(spec, k, range, |epsilon, seed| {
        let mut rng = RandomSource::new(seed);
        let selected = dp_motkin(&g, k, variant, PrivacyBudget::new(epsilon)?, &mut rng)?;
        match spec.metric {
            MetricKind::CError => {
                let private_objectives = vertex_objectives(&g, &selected);
                Ok(metric_c(&reference_objectives, &private_objectives)?)
            }
            MetricKind::Recall => Ok(recall_at_k(&selected, &reference)?),
            MetricKind::UAgg => Ok(mean_weighted(
                &vertex_objectives(&g, &selected),
                weights.expect("validated"),
            )),
        }
    })
}

/// Runs the configured experiment: for every epsilon, `repetitions`
/// independently seeded private runs next to their non-private reference,
/// aggregated into one result row.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    match &spec.method {
        MethodSpec::Moet { variant, evolution } => run_moet(spec, variant, evolution),
        MethodSpec::Motkin { variant, k } => run_motkin(spec, variant, *k),
    }
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Result<OutputFormat> {
        match name.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(anyhow!("unknown format {name:?}; expected csv or json")),
        }
    }
}

/// Writes the table. The csv form prints means and standard deviations to
/// four decimal places; the json form keeps full precision and parses back
/// to the identical table.
pub fn emit_results(
    table: &ResultTable,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    if table.rows.is_empty() {
        bail!("refusing to emit an empty result table");
    }
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            writer.write_record([
                "dataset", "method", "epsilon", "metric", "mean", "std", "reps", "wall_ms",
            ])?;
            for row in &table.rows {
                writer.write_record(&[
                    row.dataset.clone(),
                    row.method.clone(),
                    format!("{}", row.epsilon),
                    row.metric.clone(),
                    format!("{:.4}", row.mean),
                    format!("{:.4}", row.std),
                    row.reps.to_string(),
                    row.wall_ms.to_string(),
                ])?;
            }
            writer.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &table.rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
