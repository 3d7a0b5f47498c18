//! Instance data model: ground structures, budgets, JSON serialization,
//! and the instance generators.
//!
//! An instance asks for a maximum-weight solution of its ground structure
//! subject to `k` exact budget constraints. Files use the schema
//! `{ "m", "k", "weights", "lengths", "budgets", "ground" }` with rationals
//! written as `"num/den"` strings (denominator omitted when 1).

pub(crate) mod gen;
pub(crate) mod graph;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::{MatroidSpec, RankOracle};
use crate::numeric::{Rat, RatMatrix, RatVec};

pub use gen::{
    partition_gadget, random_instance, GadgetKind, RandomGroundKind, RandomInstanceParams,
};
pub use graph::GraphSpec;

/// The feasible-set family of an instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundSpec {
    Matroid { spec: MatroidSpec },
    Matching { graph: GraphSpec },
    PerfectMatching { graph: GraphSpec },
    Forest { graph: GraphSpec },
    SpanningTree { graph: GraphSpec },
    Path { graph: GraphSpec, s: usize, t: usize },
}

impl GroundSpec {
    /// Number of elements (matroid ground set size or edge count).
    pub fn element_count(&self) -> Result<usize> {
        match self {
            GroundSpec::Matroid { spec } => spec.contiguous_size().ok_or_else(|| {
                Error::InvalidInstance(
                    "matroid ground set must use contiguous element ids 0..m".into(),
                )
            }),
            GroundSpec::Matching { graph }
            | GroundSpec::PerfectMatching { graph }
            | GroundSpec::Forest { graph }
            | GroundSpec::SpanningTree { graph }
            | GroundSpec::Path { graph, .. } => Ok(graph.edge_count()),
        }
    }

    pub fn graph(&self) -> Option<&GraphSpec> {
        match self {
            GroundSpec::Matroid { .. } => None,
            GroundSpec::Matching { graph }
            | GroundSpec::PerfectMatching { graph }
            | GroundSpec::Forest { graph }
            | GroundSpec::SpanningTree { graph }
            | GroundSpec::Path { graph, .. } => Some(graph),
        }
    }

    /// Down-closed families admit the empty solution, which keeps every
    /// budgeted instance feasible.
    pub fn is_independence_system(&self) -> bool {
        matches!(
            self,
            GroundSpec::Matroid { .. } | GroundSpec::Matching { .. } | GroundSpec::Forest { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroundSpec::Matroid { spec } => {
                spec.validate()?;
                self.element_count()?;
                Ok(())
            }
            GroundSpec::Path { graph, s, t } => {
                if *s >= graph.node_count() || *t >= graph.node_count() {
                    return Err(Error::InvalidInstance(format!(
                        "path terminals ({s}, {t}) outside node range"
                    )));
                }
                if s == t {
                    return Err(Error::InvalidInstance(
                        "path terminals must be distinct".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Structural membership of `set` in the family (budgets not checked).
    pub fn contains(&self, set: &BTreeSet<usize>) -> Result<bool> {
        match self {
            GroundSpec::Matroid { spec } => {
                let oracle = RankOracle::new(spec.clone())?;
                oracle.independent(set)
            }
            GroundSpec::Matching { graph } => graph.is_matching(set.iter().copied()),
            GroundSpec::PerfectMatching { graph } => graph.is_perfect_matching(set),
            GroundSpec::Forest { graph } => graph.is_forest(set.iter().copied()),
            GroundSpec::SpanningTree { graph } => graph.is_spanning_tree(set),
            GroundSpec::Path { graph, s, t } => graph.is_path(set, *s, *t),
        }
    }
}

/// A maximization instance: weights, `k` length functions with budgets, and
/// a ground structure over elements `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BudgetedInstance {
    weights: RatVec,
    lengths: RatMatrix,
    budgets: RatVec,
    ground: GroundSpec,
}

impl BudgetedInstance {
    pub fn new(
        weights: RatVec,
        lengths: RatMatrix,
        budgets: RatVec,
        ground: GroundSpec,
    ) -> Result<Self> {
        ground.validate()?;
        let m = ground.element_count()?;
        if weights.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: weights.len(),
            });
        }
        if lengths.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: lengths.nrows(),
            });
        }
        if lengths.ncols() != budgets.len() {
            return Err(Error::DimensionMismatch {
                expected: budgets.len(),
                found: lengths.ncols(),
            });
        }
        for w in weights.iter() {
            if w.is_negative() {
                return Err(Error::InvalidInstance(format!("negative weight {w}")));
            }
        }
        for row in lengths.rows() {
            for l in row.iter() {
                if l.is_negative() {
                    return Err(Error::InvalidInstance(format!("negative length {l}")));
                }
            }
        }
        for b in budgets.iter() {
            if b.is_negative() {
                return Err(Error::InvalidInstance(format!("negative budget {b}")));
            }
        }
        Ok(BudgetedInstance {
            weights,
            lengths,
            budgets,
            ground,
        })
    }

    pub fn element_count(&self) -> usize {
        self.weights.len()
    }

    pub fn budget_count(&self) -> usize {
        self.budgets.len()
    }

    pub fn weights(&self) -> &RatVec {
        &self.weights
    }

    pub fn lengths(&self) -> &RatMatrix {
        &self.lengths
    }

    pub fn budgets(&self) -> &RatVec {
        &self.budgets
    }

    pub fn ground(&self) -> &GroundSpec {
        &self.ground
    }

    pub fn weight_of(&self, set: &BTreeSet<usize>) -> Result<Rat> {
        self.weights.sum_at(set.iter().copied())
    }

    /// The `k`-vector of lengths of a set.
    pub fn lengths_of(&self, set: &BTreeSet<usize>) -> Result<RatVec> {
        self.lengths.sum_rows_at(set.iter().copied())
    }

    pub fn within_budgets(&self, lengths: &RatVec) -> Result<bool> {
        if lengths.len() != self.budgets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.budgets.len(),
                found: lengths.len(),
            });
        }
        Ok(lengths.iter().zip(self.budgets.iter()).all(|(l, b)| l <= b))
    }

    /// Exact feasibility: structural membership and every budget.
    pub fn feasible(&self, set: &BTreeSet<usize>) -> Result<bool> {
        if let Some(&max) = set.iter().next_back() {
            if max >= self.element_count() {
                return Err(Error::ElementOutOfRange {
                    id: max,
                    universe: self.element_count(),
                });
            }
        }
        Ok(self.ground.contains(set)? && self.within_budgets(&self.lengths_of(set)?)?)
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            m: self.element_count(),
            k: self.budget_count(),
            weights: self.weights.iter().cloned().collect(),
            lengths: self
                .lengths
                .rows()
                .iter()
                .map(|r| r.iter().cloned().collect())
                .collect(),
            budgets: self.budgets.iter().cloned().collect(),
            ground: self.ground.clone(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("instance serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.weights.len() != doc.m {
            return Err(Error::Schema(format!(
                "declared m = {} but {} weights given",
                doc.m,
                doc.weights.len()
            )));
        }
        if doc.lengths.len() != doc.m {
            return Err(Error::Schema(format!(
                "declared m = {} but {} length rows given",
                doc.m,
                doc.lengths.len()
            )));
        }
        for row in &doc.lengths {
            if row.len() != doc.k {
                return Err(Error::Schema(format!(
                    "declared k = {} but a length row has {} entries",
                    doc.k,
                    row.len()
                )));
            }
        }
        if doc.budgets.len() != doc.k {
            return Err(Error::Schema(format!(
                "declared k = {} but {} budgets given",
                doc.k,
                doc.budgets.len()
            )));
        }
        let lengths = RatMatrix::new(
            doc.lengths.into_iter().map(RatVec::new).collect(),
            doc.k,
        )?;
        BudgetedInstance::new(
            RatVec::new(doc.weights),
            lengths,
            RatVec::new(doc.budgets),
            doc.ground,
        )
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    m: usize,
    k: usize,
    weights: Vec<Rat>,
    lengths: Vec<Vec<Rat>>,
    budgets: Vec<Rat>,
    ground: GroundSpec,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn minimal_instance() -> BudgetedInstance {
        BudgetedInstance::new(
            RatVec::new(vec![rat("1")]),
            RatMatrix::new(vec![RatVec::new(vec![])], 0).unwrap(),
            RatVec::new(vec![]),
            GroundSpec::Matroid {
                spec: MatroidSpec::Uniform { size: 1, rank: 1 },
            },
        )
        .unwrap()
    }

    #[test]
    fn minimal_instance_roundtrips_byte_identically() {
        let inst = minimal_instance();
        let json = inst.to_json();
        let back = BudgetedInstance::from_json(&json).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn fractional_two_budget_roundtrip() {
        let graph = GraphSpec::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let inst = BudgetedInstance::new(
            RatVec::new(vec![rat("1/3"), rat("5")]),
            RatMatrix::new(
                vec![
                    RatVec::new(vec![rat("1/3"), rat("2")]),
                    RatVec::new(vec![rat("0"), rat("7/2")]),
                ],
                2,
            )
            .unwrap(),
            RatVec::new(vec![rat("1"), rat("11/2")]),
            GroundSpec::Matching { graph },
        )
        .unwrap();
        let json = inst.to_json();
        let back = BudgetedInstance::from_json(&json).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn negative_budget_rejected() {
        let inst = minimal_instance();
        let mut json = inst.to_json();
        json = json.replace("\"budgets\": []", "\"budgets\": [\"-1\"]");
        json = json.replace("\"k\": 0", "\"k\": 1");
        json = json.replace("\"lengths\": [\n    []\n  ]", "\"lengths\": [[\"1\"]]");
        let err = BudgetedInstance::from_json(&json).unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)), "got {err:?}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let json = r#"{
            "m": 2, "k": 0,
            "weights": ["1"],
            "lengths": [[], []],
            "budgets": [],
            "ground": {"type": "matroid", "spec": {"type": "uniform", "size": 2, "rank": 1}}
        }"#;
        assert!(matches!(
            BudgetedInstance::from_json(json),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn feasibility_checks_structure_and_budgets() {
        let graph = GraphSpec::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = BudgetedInstance::new(
            RatVec::new(vec![rat("1"), rat("1"), rat("1")]),
            RatMatrix::new(
                vec![
                    RatVec::new(vec![rat("1")]),
                    RatVec::new(vec![rat("1")]),
                    RatVec::new(vec![rat("1")]),
                ],
                1,
            )
            .unwrap(),
            RatVec::new(vec![rat("1")]),
            GroundSpec::Matching {
                graph: graph.clone(),
            },
        )
        .unwrap();
        let ok: BTreeSet<_> = [0].into_iter().collect();
        assert!(inst.feasible(&ok).unwrap());
        let conflict: BTreeSet<_> = [0, 1].into_iter().collect();
        assert!(!inst.feasible(&conflict).unwrap());
        let over: BTreeSet<_> = [0, 2].into_iter().collect();
        assert!(!inst.feasible(&over).unwrap()); // structurally fine, over budget
    }
}
