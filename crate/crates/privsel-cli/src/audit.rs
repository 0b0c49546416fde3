//! Verification tools: admissibility checks of the shipped sensitivity
//! functions over exhaustive instance families, and an empirical
//! differential privacy audit of the selection mechanisms over exhaustive
//! tiny neighbor pairs.

use std::fmt;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;

use privsel::agg::{aggregate_sensitivity, AggregateUtility};
use privsel::data::{CanonicalKey, Graph, TabularDataset};
use privsel::graph::{
    delta_egodensity_from_degree, egodensity, DegreeSensitivity, DegreeUtility,
    EgodensitySensitivity, EgodensityUtility,
};
use privsel::mech::{
    empirical_dp_check, local_dampening_scores, run_global_mechanism_scores, GlobalMechanism,
    NoiseKind, DEFAULT_WINDOW_FACTOR,
};
use privsel::neighbor::{EdgeToggle, NeighborRelation, RecordAddRemove};
use privsel::pareto::{ParetoScoreSensitivity, ParetoScoreUtility};
use privsel::sensitivity::{check_admissibility, AdmissibilityReport, Sensitivity, Utility};
use privsel::tree::{
    confusion, delta_tpr_counts, ConfusionCounts, DecisionTree, TnrSensitivity, TnrUtility,
    TprSensitivity, TprUtility,
};
use privsel::{derive_seed, RandomSource};

use crate::families::{graph_family, tabular_family};

// ---------------------------------------------------------------------------
// Admissibility checking
// ---------------------------------------------------------------------------

/// Which sensitivity function to check, and over which instance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityTarget {
    /// True positive rate sensitivity over tabular datasets.
    Tpr,
    /// True negative rate sensitivity over tabular datasets.
    Tnr,
    /// Degree sensitivity over graphs.
    Degree,
    /// Egodensity sensitivity over graphs.
    Egodensity,
    /// Pareto score sensitivity over the (TPR, TNR) pair on tree pools.
    ParetoTrees,
    /// Pareto score sensitivity over the (degree, egodensity) pair on
    /// vertex pools.
    ParetoVertices,
    /// Weighted sum sensitivity over the (TPR, TNR) pair.
    AggTrees,
    /// Weighted sum sensitivity over the (degree, egodensity) pair.
    AggVertices,
}

impl AdmissibilityTarget {
    pub fn all() -> [AdmissibilityTarget; 8] {
        [
            AdmissibilityTarget::Tpr,
            AdmissibilityTarget::Tnr,
            AdmissibilityTarget::Degree,
            AdmissibilityTarget::Egodensity,
            AdmissibilityTarget::ParetoTrees,
            AdmissibilityTarget::ParetoVertices,
            AdmissibilityTarget::AggTrees,
            AdmissibilityTarget::AggVertices,
        ]
    }

    pub fn parse(name: &str) -> Result<AdmissibilityTarget> {
        let target = match name.replace('-', "_").as_str() {
            "tpr" => AdmissibilityTarget::Tpr,
            "tnr" => AdmissibilityTarget::Tnr,
            "degree" => AdmissibilityTarget::Degree,
            "egodensity" => AdmissibilityTarget::Egodensity,
            "pareto_trees" => AdmissibilityTarget::ParetoTrees,
            "pareto_vertices" => AdmissibilityTarget::ParetoVertices,
            "agg_trees" => AdmissibilityTarget::AggTrees,
            "agg_vertices" => AdmissibilityTarget::AggVertices,
            _ => {
                return Err(anyhow!(
                    "unknown target {name:?}; expected one of tpr, tnr, degree, egodensity, \
                     pareto_trees, pareto_vertices, agg_trees, agg_vertices"
                ))
            }
        };
        Ok(target)
    }
}

impl fmt::Display for AdmissibilityTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AdmissibilityTarget::Tpr => "tpr",
            AdmissibilityTarget::Tnr => "tnr",
            AdmissibilityTarget::Degree => "degree",
            AdmissibilityTarget::Egodensity => "egodensity",
            AdmissibilityTarget::ParetoTrees => "pareto_trees",
            AdmissibilityTarget::ParetoVertices => "pareto_vertices",
            AdmissibilityTarget::AggTrees => "agg_trees",
            AdmissibilityTarget::AggVertices => "agg_vertices",
        };
        write!(f, "{name}")
    }
}

/// Sizes and distances of the instance families a target is checked on.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityOptions {
    /// Records in the tabular universe.
    pub universe: usize,
    /// Largest tabular dataset enumerated.
    pub max_records: usize,
    /// Largest vertex count enumerated.
    pub max_vertices: usize,
    /// Distances tested on tabular instances.
    pub t_max_tabular: u32,
    /// Distances tested on graph instances.
    pub t_max_graph: u32,
    /// Weights of the aggregate targets.
    pub weights: [f64; 2],
    /// Enumeration budget of the brute force local sensitivity oracle.
    pub enumeration_budget: usize,
}

impl Default for AdmissibilityOptions {
    fn default() -> Self {
        Self {
            universe: 10,
            max_records: 5,
            max_vertices: 5,
            t_max_tabular: 3,
            t_max_graph: 2,
            weights: [3.0, 2.0],
            enumeration_budget: privsel::oracle::DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Outcome of checking one target.
#[derive(Debug, Clone)]
pub struct AdmissibilitySummary {
    pub target: String,
    pub instances: usize,
    pub inequalities: u64,
    pub violations: usize,
    /// Human-readable rendering of the first violation, if any.
    pub first_violation: Option<String>,
}

impl AdmissibilitySummary {
    pub fn is_admissible(&self) -> bool {
        self.violations == 0
    }
}

fn summarize(target: String, reports: &[AdmissibilityReport]) -> AdmissibilitySummary {
    let first = reports
        .iter()
        .flat_map(|r| r.violations.first())
        .next()
        .map(|v| {
            format!(
                "instance {}: {:?} at t={} needs {} but has {}",
                v.instance, v.condition, v.t, v.required, v.bound
            )
        });
    AdmissibilitySummary {
        target,
        instances: reports.iter().map(|r| r.instances).sum(),
        inequalities: reports.iter().map(|r| r.inequalities).sum(),
        violations: reports.iter().map(|r| r.violations.len()).sum(),
        first_violation: first,
    }
}

fn check_trees(
    target: AdmissibilityTarget,
    opts: &AdmissibilityOptions,
) -> Result<AdmissibilitySummary> {
    let family = tabular_family(opts.universe, opts.max_records)?;
    let instances: Vec<(&TabularDataset, &DecisionTree)> = family
        .datasets
        .iter()
        .flat_map(|x| family.trees.iter().map(move |t| (x, t)))
        .collect();
    let relation = RecordAddRemove::new(family.universe.clone());

    let tpr_u = TprUtility;
    let tnr_u = TnrUtility;
    let tpr_d = TprSensitivity;
    let tnr_d = TnrSensitivity;
    let utilities: [&dyn Utility<TabularDataset, DecisionTree>; 2] = [&tpr_u, &tnr_u];
    let sensitivities: [&dyn Sensitivity<TabularDataset, DecisionTree>; 2] = [&tpr_d, &tnr_d];

    let report = match target {
        AdmissibilityTarget::Tpr => check_admissibility(
            &tpr_d,
            &tpr_u,
            &instances,
            opts.t_max_tabular,
            &relation,
            opts.enumeration_budget,
        )?,
        AdmissibilityTarget::Tnr => check_admissibility(
            &tnr_d,
            &tnr_u,
            &instances,
            opts.t_max_tabular,
            &relation,
            opts.enumeration_budget,
        )?,
        AdmissibilityTarget::ParetoTrees => {
            let u = ParetoScoreUtility {
                candidates: &family.trees,
                utilities: &utilities,
            };
            let d = ParetoScoreSensitivity {
                candidates: &family.trees,
                utilities: &utilities,
                sensitivities: &sensitivities,
            };
            check_admissibility(
                &d,
                &u,
                &instances,
                opts.t_max_tabular,
                &relation,
                opts.enumeration_budget,
            )?
        }
        AdmissibilityTarget::AggTrees => {
            let u = AggregateUtility::new(utilities.to_vec(), &opts.weights)?;
            let d = aggregate_sensitivity(sensitivities.to_vec(), &opts.weights)?;
            check_admissibility(
                &d,
                &u,
                &instances,
                opts.t_max_tabular,
                &relation,
                opts.enumeration_budget,
            )?
        }
        _ => unreachable!("tree targets only"),
    };
    Ok(summarize(target.to_string(), &[report]))
}

fn check_vertices(
    target: AdmissibilityTarget,
    opts: &AdmissibilityOptions,
) -> Result<AdmissibilitySummary> {
    let family = graph_family(opts.max_vertices)?;
    let vertices: Vec<u32> = (0..opts.max_vertices as u32).collect();

    let deg_u = DegreeUtility;
    let ego_u = EgodensityUtility;
    let deg_d = DegreeSensitivity;
    let ego_d = EgodensitySensitivity;
    let utilities: [&dyn Utility<Graph, u32>; 2] = [&deg_u, &ego_u];
    let sensitivities: [&dyn Sensitivity<Graph, u32>; 2] = [&deg_d, &ego_d];

    let flat_instances: Vec<(&Graph, &u32)> = family
        .by_size
        .iter()
        .enumerate()
        .flat_map(|(n, graphs)| {
            let vertices = &vertices;
            graphs
                .iter()
                .flat_map(move |g| vertices[..n].iter().map(move |v| (g, v)))
        })
        .collect();

    let reports = match target {
        AdmissibilityTarget::Degree => vec![check_admissibility(
            &deg_d,
            &deg_u,
            &flat_instances,
            opts.t_max_graph,
            &EdgeToggle,
            opts.enumeration_budget,
        )?],
        AdmissibilityTarget::Egodensity => vec![check_admissibility(
            &ego_d,
            &ego_u,
            &flat_instances,
            opts.t_max_graph,
            &EdgeToggle,
            opts.enumeration_budget,
        )?],
        AdmissibilityTarget::AggVertices => {
            let u = AggregateUtility::new(utilities.to_vec(), &opts.weights)?;
            let d = aggregate_sensitivity(sensitivities.to_vec(), &opts.weights)?;
            vec![check_admissibility(
                &d,
                &u,
                &flat_instances,
                opts.t_max_graph,
                &EdgeToggle,
                opts.enumeration_budget,
            )?]
        }
        AdmissibilityTarget::ParetoVertices => {
            // The Pareto score depends on the whole candidate pool, so the
            // pool must be the vertex set of each graph; graphs are grouped
            // by vertex count and checked per group.
            let mut reports = Vec::new();
            for (n, graphs) in family.by_size.iter().enumerate().skip(1) {
                let pool = &vertices[..n];
                let u = ParetoScoreUtility {
                    candidates: pool,
                    utilities: &utilities,
                };
                let d = ParetoScoreSensitivity {
                    candidates: pool,
                    utilities: &utilities,
                    sensitivities: &sensitivities,
                };
                let instances: Vec<(&Graph, &u32)> = graphs
                    .iter()
                    .flat_map(|g| pool.iter().map(move |v| (g, v)))
                    .collect();
                reports.push(check_admissibility(
                    &d,
                    &u,
                    &instances,
                    opts.t_max_graph,
                    &EdgeToggle,
                    opts.enumeration_budget,
                )?);
            }
            reports
        }
        _ => unreachable!("vertex targets only"),
    };
    Ok(summarize(target.to_string(), &reports))
}

/// Checks one sensitivity target over its exhaustive instance family.
pub fn check_target(
    target: AdmissibilityTarget,
    opts: &AdmissibilityOptions,
) -> Result<AdmissibilitySummary> {
    match target {
        AdmissibilityTarget::Tpr
        | AdmissibilityTarget::Tnr
        | AdmissibilityTarget::ParetoTrees
        | AdmissibilityTarget::AggTrees => check_trees(target, opts),
        AdmissibilityTarget::Degree
        | AdmissibilityTarget::Egodensity
        | AdmissibilityTarget::ParetoVertices
        | AdmissibilityTarget::AggVertices => check_vertices(target, opts),
    }
}

// ---------------------------------------------------------------------------
// Empirical differential privacy audit
// ---------------------------------------------------------------------------

/// A selection mechanism under audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditMechanism {
    Global(GlobalMechanism),
    LocalDampening,
}

impl fmt::Display for AuditMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditMechanism::Global(mech) => write!(f, "{mech}"),
            AuditMechanism::LocalDampening => write!(f, "local_dampening"),
        }
    }
}

impl AuditMechanism {
    pub fn all() -> [AuditMechanism; 6] {
        [
            AuditMechanism::Global(GlobalMechanism::Exponential),
            AuditMechanism::Global(GlobalMechanism::PermuteAndFlip),
            AuditMechanism::Global(GlobalMechanism::NoisyMax(NoiseKind::Laplace)),
            AuditMechanism::Global(GlobalMechanism::NoisyMax(NoiseKind::Exponential)),
            AuditMechanism::Global(GlobalMechanism::NoisyMax(NoiseKind::Gumbel)),
            AuditMechanism::LocalDampening,
        ]
    }

    pub fn parse(name: &str) -> Result<AuditMechanism> {
        if name.replace('-', "_") == "local_dampening" {
            return Ok(AuditMechanism::LocalDampening);
        }
        crate::runner::parse_global_mechanism(name)
            .map(AuditMechanism::Global)
            .map_err(|_| {
                anyhow!(
                    "unknown mechanism {name:?}; expected one of exponential, permute_flip, \
                     noisy_max_laplace, noisy_max_exponential, noisy_max_gumbel, local_dampening"
                )
            })
    }
}

/// Which exhaustive neighbor pair family to audit against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditFamily {
    /// All datasets over a 3-record universe, paired by one record of
    /// difference; the audited selection scores candidate trees by TPR.
    Tabular,
    /// All graphs on 3 vertices, paired by one edge toggle; the audited
    /// selection scores vertices by egodensity.
    Graph,
}

impl fmt::Display for AuditFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditFamily::Tabular => write!(f, "tabular"),
            AuditFamily::Graph => write!(f, "graph"),
        }
    }
}

/// Result of auditing one mechanism over one family at one epsilon.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub mechanism: String,
    pub family: String,
    pub epsilon: f64,
    pub pairs: usize,
    pub samples: u64,
    /// Largest absolute log probability ratio observed over all outcomes of
    /// all neighbor pairs. Differential privacy bounds it by epsilon.
    pub worst_log_ratio: f64,
}

/// One side of a neighbor pair with everything a sampler needs: candidate
/// scores and the per-candidate sensitivity knots.
#[derive(Debug, Clone)]
struct AuditSide {
    scores: Vec<f64>,
    counts: Vec<ConfusionCounts>,
    degrees: Vec<u64>,
    family: AuditFamily,
}

impl AuditSide {
    fn tabular(x: &TabularDataset, trees: &[DecisionTree]) -> Result<Self> {
        let counts: Vec<ConfusionCounts> = trees
            .iter()
            .map(|t| confusion(x, t))
            .collect::<privsel::Result<_>>()?;
        Ok(Self {
            scores: counts.iter().map(ConfusionCounts::tpr).collect(),
            counts,
            degrees: Vec::new(),
            family: AuditFamily::Tabular,
        })
    }

    fn graph(g: &Graph) -> Self {
        let n = g.vertex_count() as u32;
        Self {
            scores: (0..n).map(|v| egodensity(g, v)).collect(),
            counts: Vec::new(),
            degrees: (0..n).map(|v| g.degree(v) as u64).collect(),
            family: AuditFamily::Graph,
        }
    }

    fn delta(&self, candidate: usize, t: u32) -> f64 {
        match self.family {
            AuditFamily::Tabular => {
                let c = self.counts[candidate];
                delta_tpr_counts(c.positives, c.true_positives, t)
            }
            AuditFamily::Graph => delta_egodensity_from_degree(self.degrees[candidate], t),
        }
    }

    fn draw(
        &self,
        mechanism: AuditMechanism,
        epsilon: f64,
        rng: &mut RandomSource,
    ) -> privsel::Result<usize> {
        match mechanism {
            AuditMechanism::Global(mech) => {
                run_global_mechanism_scores(mech, &self.scores, 1.0, epsilon, rng)
            }
            AuditMechanism::LocalDampening => local_dampening_scores(
                &self.scores,
                |i, t| Ok(self.delta(i, t)),
                DEFAULT_WINDOW_FACTOR * self.scores.len(),
                epsilon,
                rng,
            ),
        }
    }
}

/// All unordered neighbor pairs of the tabular audit family, as prepared
/// sampler sides.
fn tabular_audit_pairs() -> Result<Vec<(AuditSide, AuditSide)>> {
    let family = tabular_family(3, 3)?;
    // Datasets are enumerated in mask order over the 3-record universe, so
    // the dataset at index m is the subset with bitmask m.
    let sides: Vec<AuditSide> = family
        .datasets
        .iter()
        .map(|x| AuditSide::tabular(x, &family.trees))
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for mask in 0usize..8 {
        for bit in 0..3 {
            let other = mask ^ (1 << bit);
            if mask < other {
                pairs.push((sides[mask].clone(), sides[other].clone()));
            }
        }
    }
    Ok(pairs)
}

/// All unordered edge-toggle pairs over the graphs on 3 vertices.
fn graph_audit_pairs() -> Result<Vec<(AuditSide, AuditSide)>> {
    let family = graph_family(3)?;
    let graphs = &family.by_size[3];
    let index_by_key: std::collections::BTreeMap<Vec<u8>, usize> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| (g.canonical_key(), i))
        .collect();
    let mut pairs = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        for h in EdgeToggle.neighbors(g) {
            let j = index_by_key[&h.canonical_key()];
            if i < j {
                pairs.push((AuditSide::graph(g), AuditSide::graph(&h)));
            }
        }
    }
    Ok(pairs)
}

/// Audits one mechanism at one epsilon over every neighbor pair of a
/// family, reporting the worst observed log probability ratio.
pub fn audit_family(
    family: AuditFamily,
    mechanism: AuditMechanism,
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<AuditReport> {
    let pairs = match family {
        AuditFamily::Tabular => tabular_audit_pairs()?,
        AuditFamily::Graph => graph_audit_pairs()?,
    };
    let worst_per_pair: Vec<f64> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, (x, y))| {
            let mut rng = RandomSource::new(derive_seed(seed, &[index as u64]));
            let outcomes = x.scores.len();
            empirical_dp_check(
                |r| x.draw(mechanism, epsilon, r),
                |r| y.draw(mechanism, epsilon, r),
                outcomes,
                samples,
                &mut rng,
            )
            .with_context(|| format!("auditing {mechanism} on {family} pair {index}"))
        })
        .collect::<Result<_>>()?;
    let worst = worst_per_pair.into_iter().fold(0.0f64, f64::max);
    Ok(AuditReport {
        mechanism: mechanism.to_string(),
        family: family.to_string(),
        epsilon,
        pairs: pairs.len(),
        samples,
        worst_log_ratio: worst,
    })
}
