//! Indicator weighting: AHP eigenvector weights and consistency, expert-scoring weights, their
//! product combination, and composition of global weights down the hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IndicatorTree, Level, WEIGHT_SUM_TOLERANCE};

/// Smallest and largest admissible judgments on the 1–9 scale.
pub const JUDGMENT_MIN: f64 = 1.0 / 9.0;
pub const JUDGMENT_MAX: f64 = 9.0;
pub const MAX_ORDER: usize = 15;
pub const CONVERGENCE_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 10_000;
/// Matrices with a consistency ratio below this are acceptable.
pub const CR_ACCEPTABLE: f64 = 0.1;

const RECIPROCAL_TOLERANCE: f64 = 1e-9;

/// Random consistency index by matrix order; orders 1 and 2 are always consistent.
const RANDOM_INDEX: [f64; 10] = [0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45];

/// A reciprocal pairwise comparison matrix over sibling indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    ids: Vec<String>,
    entries: Vec<Vec<f64>>,
}

impl PairwiseMatrix {
    pub fn new(ids: Vec<String>, entries: Vec<Vec<f64>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix has no rows".into()));
        }
        if ids.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidMatrix("duplicate ids".into()));
        }
        if entries.len() != n || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!("matrix is not {n}x{n}")));
        }
        for i in 0..n {
            if entries[i][i] != 1.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry for {} is {}, not 1",
                    ids[i], entries[i][i]
                )));
            }
            for j in 0..n {
                let a = entries[i][j];
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {a} is not positive",
                        ids[i], ids[j]
                    )));
                }
                if !(JUDGMENT_MIN - RECIPROCAL_TOLERANCE..=JUDGMENT_MAX + RECIPROCAL_TOLERANCE)
                    .contains(&a)
                {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {a} outside [1/9, 9]",
                        ids[i], ids[j]
                    )));
                }
                if (a * entries[j][i] - 1.0).abs() > RECIPROCAL_TOLERANCE {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({0}, {1}) and ({1}, {0}) are not reciprocal",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(PairwiseMatrix { ids, entries })
    }

    /// The perfectly consistent matrix `a_ij = w_i / w_j`.
    pub fn from_weights(ids: Vec<String>, weights: &[f64]) -> Result<Self> {
        let entries = weights
            .iter()
            .map(|wi| weights.iter().map(|wj| wi / wj).collect())
            .collect();
        PairwiseMatrix::new(ids, entries)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn order(&self) -> usize {
        self.ids.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalEigen {
    pub weights: Vec<f64>,
    pub lambda_max: f64,
    pub iterations: usize,
}

/// Normalized principal eigenvector by power iteration, with λmax from the Rayleigh quotient.
pub fn principal_weights(matrix: &PairwiseMatrix) -> Result<PrincipalEigen> {
    let n = matrix.order();
    if !(2..=MAX_ORDER).contains(&n) {
        return Err(Error::InvalidMatrix(format!(
            "order {n} outside 2..={MAX_ORDER}"
        )));
    }
    let a = matrix.entries();
    let mut v = vec![1.0 / n as f64; n];
    for iteration in 1..=MAX_ITERATIONS {
        let mut next = mat_vec(a, &v);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = next
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < CONVERGENCE_TOLERANCE {
            let av = mat_vec(a, &v);
            let num: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
            let den: f64 = v.iter().map(|x| x * x).sum();
            return Ok(PrincipalEigen {
                weights: v,
                lambda_max: num / den,
                iterations: iteration,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
    })
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub ci: f64,
    pub cr: f64,
    pub acceptable: bool,
}

/// Consistency index and ratio. Tiny negative CI from round-off is reported as zero.
pub fn consistency_ratio(lambda_max: f64, n: usize) -> Result<Consistency> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("matrix order {n} below 2")));
    }
    if n >= RANDOM_INDEX.len() {
        return Err(Error::UnsupportedOrder(n));
    }
    let nf = n as f64;
    // written negated so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(lambda_max >= nf - 1e-9) {
        return Err(Error::InvalidInput(format!(
            "λmax = {lambda_max} is below the matrix order {n}"
        )));
    }
    let ci = ((lambda_max - nf) / (nf - 1.0)).max(0.0);
    let cr = if n <= 2 { 0.0 } else { ci / RANDOM_INDEX[n] };
    Ok(Consistency {
        ci,
        cr,
        acceptable: cr < CR_ACCEPTABLE,
    })
}

/// Expert-scoring weights: each sibling's mean importance over the group total.
pub fn importance_weights(means: &[f64]) -> Result<Vec<f64>> {
    if means.is_empty() {
        return Err(Error::InvalidInput("no importance means".into()));
    }
    if let Some(m) = means.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "importance mean {m} is not positive"
        )));
    }
    let total: f64 = means.iter().sum();
    Ok(means.iter().map(|m| m / total).collect())
}

/// Product combination of two weight vectors, renormalized to sum to one.
pub fn combine_weights(scoring: &[f64], ahp: &[f64]) -> Result<Vec<f64>> {
    if scoring.len() != ahp.len() {
        return Err(Error::InvalidInput(format!(
            "weight vectors differ in length ({} vs {})",
            scoring.len(),
            ahp.len()
        )));
    }
    if scoring
        .iter()
        .chain(ahp)
        .any(|w| !(w.is_finite() && *w >= 0.0))
    {
        return Err(Error::InvalidInput("weights must be non-negative".into()));
    }
    let products: Vec<f64> = scoring.iter().zip(ahp).map(|(a, b)| a * b).collect();
    let total: f64 = products.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("all weight products are zero".into()));
    }
    Ok(products.iter().map(|p| p / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    /// AHP eigenvector weights only.
    Ahp,
    /// Normalized importance means only.
    Scoring,
    /// Product of the scoring and AHP weights.
    #[default]
    Combined,
}

impl FromStr for WeightMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ahp" => Ok(WeightMethod::Ahp),
            "scoring" => Ok(WeightMethod::Scoring),
            "combined" => Ok(WeightMethod::Combined),
            other => Err(format!("unknown weighting method {other:?}")),
        }
    }
}

impl fmt::Display for WeightMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMethod::Ahp => "ahp",
            WeightMethod::Scoring => "scoring",
            WeightMethod::Combined => "combined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeWeight {
    pub level: Level,
    pub bonus: bool,
    pub local: f64,
    pub global: f64,
}

/// Diagnostics for one pairwise matrix. `acceptable = false` flags re-elicitation but never
/// aborts weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDiagnostics {
    pub ids: Vec<String>,
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
    pub acceptable: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightTable {
    pub method: Option<WeightMethod>,
    pub nodes: BTreeMap<String, NodeWeight>,
    /// Keyed by sibling group (the parent id, or `(root)`).
    pub matrices: BTreeMap<String, MatrixDiagnostics>,
}

impl WeightTable {
    pub fn local(&self, id: &str) -> Option<f64> {
        self.nodes.get(id).map(|w| w.local)
    }

    pub fn global(&self, id: &str) -> Option<f64> {
        self.nodes.get(id).map(|w| w.global)
    }
}

/// Global weight of every node as the product of local weights on its path to the root.
///
/// Bonus branches are composed the same way but form their own normalization, apart from the
/// core leaves.
pub fn compose_global(tree: &IndicatorTree) -> Result<WeightTable> {
    if let Some(missing) = tree.nodes().iter().find(|n| n.local_weight.is_none()) {
        return Err(Error::IncompleteWeights(format!(
            "{} has no local weight",
            missing.id
        )));
    }
    if let Some(v) = tree.validate().first() {
        return Err(Error::InvalidInput(v.to_string()));
    }

    let mut nodes = BTreeMap::new();
    for node in tree.nodes() {
        let global = tree
            .path_to_root(&node.id)
            .iter()
            .map(|n| n.local_weight.unwrap_or(0.0))
            .product();
        nodes.insert(
            node.id.clone(),
            NodeWeight {
                level: node.level,
                bonus: node.bonus,
                local: node.local_weight.unwrap_or(0.0),
                global,
            },
        );
    }

    let core_leaves: f64 = tree
        .leaves()
        .filter(|n| !n.bonus)
        .map(|n| nodes[&n.id].global)
        .sum();
    if tree.leaves().any(|n| !n.bonus) && (core_leaves - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "core leaf weights sum to {core_leaves}"
        )));
    }

    Ok(WeightTable {
        method: None,
        nodes,
        matrices: BTreeMap::new(),
    })
}

/// Sets every node's local weight from the supplied matrices and/or importance means, then
/// composes global weights.
///
/// Each sibling group needs a pairwise matrix over exactly its members (for `Ahp` and
/// `Combined`) and an importance mean per member (for `Scoring` and `Combined`). Single-child
/// groups get weight one.
pub fn compute_weights(
    tree: &IndicatorTree,
    matrices: &[PairwiseMatrix],
    importance: &BTreeMap<String, f64>,
    method: WeightMethod,
) -> Result<WeightTable> {
    let mut used = vec![false; matrices.len()];
    let mut locals = BTreeMap::new();
    let mut diagnostics = BTreeMap::new();

    for (group, members) in tree.sibling_groups() {
        let ids: Vec<&str> = members.iter().map(|n| n.id.as_str()).collect();
        if ids.len() == 1 {
            locals.insert(ids[0].to_string(), 1.0);
            continue;
        }

        let ahp = if method == WeightMethod::Scoring {
            None
        } else {
            let wanted: BTreeSet<&str> = ids.iter().copied().collect();
            let position = matrices.iter().position(|m| {
                m.ids().iter().map(String::as_str).collect::<BTreeSet<_>>() == wanted
            });
            let Some(k) = position else {
                return Err(Error::IncompleteWeights(format!(
                    "no pairwise matrix for the siblings under {group}"
                )));
            };
            used[k] = true;
            let matrix = &matrices[k];
            let eigen = principal_weights(matrix)?;
            let consistency = consistency_ratio(eigen.lambda_max, matrix.order())?;
            diagnostics.insert(
                group.to_string(),
                MatrixDiagnostics {
                    ids: matrix.ids().to_vec(),
                    lambda_max: eigen.lambda_max,
                    ci: consistency.ci,
                    cr: consistency.cr,
                    acceptable: consistency.acceptable,
                    iterations: eigen.iterations,
                },
            );
            // reorder to member order
            let by_id: BTreeMap<&str, f64> = matrix
                .ids()
                .iter()
                .map(String::as_str)
                .zip(eigen.weights.iter().copied())
                .collect();
            Some(ids.iter().map(|id| by_id[id]).collect::<Vec<f64>>())
        };

        let scoring = if method == WeightMethod::Ahp {
            None
        } else {
            let means = ids
                .iter()
                .map(|id| {
                    importance.get(*id).copied().ok_or_else(|| {
                        Error::IncompleteWeights(format!("no importance mean for {id}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Some(importance_weights(&means)?)
        };

        let weights = match (scoring, ahp) {
            (Some(s), Some(a)) => combine_weights(&s, &a)?,
            (Some(s), None) => s,
            (None, Some(a)) => a,
            (None, None) => unreachable!("every method uses at least one source"),
        };
        for (id, w) in ids.iter().zip(weights) {
            locals.insert(id.to_string(), w);
        }
    }

    if let Some(k) = used.iter().position(|u| !u) {
        if method != WeightMethod::Scoring {
            return Err(Error::InvalidInput(format!(
                "pairwise matrix over {:?} matches no sibling group",
                matrices[k].ids()
            )));
        }
    }

    let mut table = compose_global(&tree.with_local_weights(&locals))?;
    table.method = Some(method);
    table.matrices = diagnostics;
    Ok(table)
}
