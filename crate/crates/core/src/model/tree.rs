use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Tolerance for "sums to one" checks on sibling weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Dimension,
    Index,
    Item,
}

impl Level {
    /// The level a node's parent must have, or `None` for roots.
    pub fn parent_level(self) -> Option<Level> {
        match self {
            Level::Dimension => None,
            Level::Index => Some(Level::Dimension),
            Level::Item => Some(Level::Index),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Dimension => "dimension",
            Level::Index => "index",
            Level::Item => "item",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dimension" => Ok(Level::Dimension),
            "index" => Ok(Level::Index),
            "item" => Ok(Level::Item),
            other => Err(format!("unknown level {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorNode {
    pub id: String,
    pub name: String,
    pub level: Level,
    pub parent_id: Option<String>,
    pub local_weight: Option<f64>,
    pub global_weight: Option<f64>,
    /// Supplementary (bonus) indicator, scored outside the core dimensions.
    pub bonus: bool,
}

impl IndicatorNode {
    pub fn new(id: &str, name: &str, level: Level, parent_id: Option<&str>) -> Self {
        IndicatorNode {
            id: id.to_string(),
            name: name.to_string(),
            level,
            parent_id: parent_id.map(str::to_string),
            local_weight: None,
            global_weight: None,
            bonus: false,
        }
    }

    pub fn bonus(mut self) -> Self {
        self.bonus = true;
        self
    }
}

/// Identifies a set of siblings whose local weights are normalized together.
///
/// Root-level bonus dimensions form their own group so they never dilute the core dimensions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiblingGroup {
    pub parent_id: Option<String>,
    pub bonus: bool,
}

impl fmt::Display for SiblingGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.parent_id, self.bonus) {
            (Some(p), _) => f.write_str(p),
            (None, false) => f.write_str("(root)"),
            (None, true) => f.write_str("(bonus root)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeViolation {
    DuplicateId {
        id: String,
    },
    DimensionWithParent {
        id: String,
        parent_id: String,
    },
    MissingParentId {
        id: String,
        level: Level,
    },
    UnknownParent {
        id: String,
        parent_id: String,
    },
    LevelMismatch {
        id: String,
        level: Level,
        parent_id: String,
        parent_level: Level,
    },
    BonusMismatch {
        id: String,
        parent_id: String,
    },
    WeightOutOfRange {
        id: String,
        weight: f64,
    },
    SiblingWeightSum {
        group: String,
        sum: f64,
    },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::DuplicateId { id } => write!(f, "duplicate id {id}"),
            TreeViolation::DimensionWithParent { id, parent_id } => {
                write!(f, "dimension {id} has parent {parent_id}")
            }
            TreeViolation::MissingParentId { id, level } => write!(f, "{level} {id} has no parent"),
            TreeViolation::UnknownParent { id, parent_id } => {
                write!(f, "{id} refers to unknown parent {parent_id}")
            }
            TreeViolation::LevelMismatch {
                id,
                level,
                parent_id,
                parent_level,
            } => write!(f, "{level} {id} sits under {parent_level} {parent_id}"),
            TreeViolation::BonusMismatch { id, parent_id } => {
                write!(
                    f,
                    "{id} and its parent {parent_id} disagree on the bonus flag"
                )
            }
            TreeViolation::WeightOutOfRange { id, weight } => {
                write!(f, "{id} has weight {weight} outside [0, 1]")
            }
            TreeViolation::SiblingWeightSum { group, sum } => {
                write!(f, "local weights under {group} sum to {sum}, not 1")
            }
        }
    }
}

/// Hierarchical indicator system: dimensions, indices and items, kept sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTree {
    nodes: Vec<IndicatorNode>,
}

impl IndicatorTree {
    pub fn new(mut nodes: Vec<IndicatorNode>) -> Self {
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        IndicatorTree { nodes }
    }

    pub fn nodes(&self) -> &[IndicatorNode] {
        &self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&IndicatorNode> {
        self.nodes
            .binary_search_by(|n| n.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn children<'a>(&'a self, parent_id: &'a str) -> impl Iterator<Item = &'a IndicatorNode> {
        self.nodes
            .iter()
            .filter(move |n| n.parent_id.as_deref() == Some(parent_id))
    }

    pub fn has_children(&self, id: &str) -> bool {
        self.children(id).next().is_some()
    }

    /// Nodes without children, in id order.
    pub fn leaves(&self) -> impl Iterator<Item = &IndicatorNode> {
        self.nodes.iter().filter(|n| !self.has_children(&n.id))
    }

    pub fn group_of(&self, node: &IndicatorNode) -> SiblingGroup {
        SiblingGroup {
            parent_id: node.parent_id.clone(),
            bonus: node.parent_id.is_none() && node.bonus,
        }
    }

    /// All sibling groups with their members in id order.
    pub fn sibling_groups(&self) -> BTreeMap<SiblingGroup, Vec<&IndicatorNode>> {
        let mut groups: BTreeMap<SiblingGroup, Vec<&IndicatorNode>> = BTreeMap::new();
        for node in &self.nodes {
            groups.entry(self.group_of(node)).or_default().push(node);
        }
        groups
    }

    /// The chain from `id` up to its dimension, starting with the node itself.
    pub fn path_to_root(&self, id: &str) -> Vec<&IndicatorNode> {
        let mut path = Vec::new();
        let mut seen = BTreeSet::new();
        let mut current = self.get(id);
        while let Some(node) = current {
            if !seen.insert(node.id.as_str()) {
                break;
            }
            path.push(node);
            current = node.parent_id.as_deref().and_then(|p| self.get(p));
        }
        path
    }

    /// Returns a copy with local weights replaced from `weights`; nodes absent from the map keep
    /// their existing weight.
    pub fn with_local_weights(&self, weights: &BTreeMap<String, f64>) -> IndicatorTree {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mut n = n.clone();
                if let Some(&w) = weights.get(&n.id) {
                    n.local_weight = Some(w);
                }
                n
            })
            .collect();
        IndicatorTree { nodes }
    }

    /// Lists every broken structural or weight invariant. An empty list means the tree is
    /// well-formed. Level ordering (dimension > index > item) also rules out cycles.
    pub fn validate(&self) -> Vec<TreeViolation> {
        let mut out = Vec::new();

        for pair in self.nodes.windows(2) {
            if pair[0].id == pair[1].id {
                out.push(TreeViolation::DuplicateId {
                    id: pair[0].id.clone(),
                });
            }
        }

        for node in &self.nodes {
            match (node.level.parent_level(), &node.parent_id) {
                (None, Some(p)) => out.push(TreeViolation::DimensionWithParent {
                    id: node.id.clone(),
                    parent_id: p.clone(),
                }),
                (Some(_), None) => out.push(TreeViolation::MissingParentId {
                    id: node.id.clone(),
                    level: node.level,
                }),
                (Some(expected), Some(p)) => match self.get(p) {
                    None => out.push(TreeViolation::UnknownParent {
                        id: node.id.clone(),
                        parent_id: p.clone(),
                    }),
                    Some(parent) => {
                        if parent.level != expected {
                            out.push(TreeViolation::LevelMismatch {
                                id: node.id.clone(),
                                level: node.level,
                                parent_id: p.clone(),
                                parent_level: parent.level,
                            });
                        }
                        if parent.bonus != node.bonus {
                            out.push(TreeViolation::BonusMismatch {
                                id: node.id.clone(),
                                parent_id: p.clone(),
                            });
                        }
                    }
                },
                (None, None) => {}
            }

            for w in [node.local_weight, node.global_weight]
                .into_iter()
                .flatten()
            {
                if !(0.0..=1.0).contains(&w) {
                    out.push(TreeViolation::WeightOutOfRange {
                        id: node.id.clone(),
                        weight: w,
                    });
                }
            }
        }

        for (group, members) in self.sibling_groups() {
            let weights: Option<Vec<f64>> = members.iter().map(|n| n.local_weight).collect();
            if let Some(weights) = weights {
                let sum: f64 = weights.iter().sum();
                if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    out.push(TreeViolation::SiblingWeightSum {
                        group: group.to_string(),
                        sum,
                    });
                }
            }
        }

        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_tree() -> IndicatorTree {
        IndicatorTree::new(vec![
            IndicatorNode::new("a", "A", Level::Dimension, None),
            IndicatorNode::new("a.x", "X", Level::Index, Some("a")),
            IndicatorNode::new("a.x.1", "One", Level::Item, Some("a.x")),
        ])
    }

    #[test]
    fn empty_tree_is_valid() {
        assert!(IndicatorTree::default().validate().is_empty());
    }

    #[test]
    fn well_formed_small_tree() {
        assert!(small_tree().validate().is_empty());
    }

    #[test]
    fn item_under_dimension_is_one_level_violation() {
        let mut nodes = small_tree().nodes().to_vec();
        nodes.push(IndicatorNode::new("a.bad", "Bad", Level::Item, Some("a")));
        let report = IndicatorTree::new(nodes).validate();
        assert_eq!(report.len(), 1);
        assert!(matches!(
            &report[0],
            TreeViolation::LevelMismatch { id, parent_level: Level::Dimension, .. } if id == "a.bad"
        ));
    }

    #[test]
    fn duplicate_and_dangling_ids() {
        let tree = IndicatorTree::new(vec![
            IndicatorNode::new("a", "A", Level::Dimension, None),
            IndicatorNode::new("a", "A again", Level::Dimension, None),
            IndicatorNode::new("b.x", "X", Level::Index, Some("b")),
        ]);
        let report = tree.validate();
        assert!(report.contains(&TreeViolation::DuplicateId { id: "a".into() }));
        assert!(report.contains(&TreeViolation::UnknownParent {
            id: "b.x".into(),
            parent_id: "b".into()
        }));
    }

    #[test]
    fn sibling_weights_must_sum_to_one() {
        let mut nodes = vec![
            IndicatorNode::new("a", "A", Level::Dimension, None),
            IndicatorNode::new("b", "B", Level::Dimension, None),
        ];
        nodes[0].local_weight = Some(0.5);
        nodes[1].local_weight = Some(0.4);
        let report = IndicatorTree::new(nodes.clone()).validate();
        assert!(matches!(
            report.as_slice(),
            [TreeViolation::SiblingWeightSum { .. }]
        ));

        // partially weighted groups are not checked
        nodes[1].local_weight = None;
        assert!(IndicatorTree::new(nodes).validate().is_empty());
    }

    #[test]
    fn bonus_flag_must_match_parent() {
        let tree = IndicatorTree::new(vec![
            IndicatorNode::new("a", "A", Level::Dimension, None),
            IndicatorNode::new("a.x", "X", Level::Index, Some("a")).bonus(),
        ]);
        assert!(matches!(
            tree.validate().as_slice(),
            [TreeViolation::BonusMismatch { .. }]
        ));
    }

    #[test]
    fn bonus_roots_form_their_own_group() {
        let mut nodes = vec![
            IndicatorNode::new("a", "A", Level::Dimension, None),
            IndicatorNode::new("bonus", "Bonus", Level::Dimension, None).bonus(),
        ];
        nodes[0].local_weight = Some(1.0);
        nodes[1].local_weight = Some(1.0);
        let tree = IndicatorTree::new(nodes);
        assert_eq!(tree.sibling_groups().len(), 2);
        assert!(tree.validate().is_empty());
    }

    #[test]
    fn path_to_root_walks_up() {
        let tree = small_tree();
        let ids: Vec<&str> = tree
            .path_to_root("a.x.1")
            .iter()
            .map(|n| n.id.as_str())
            .collect();
        assert_eq!(ids, ["a.x.1", "a.x", "a"]);
    }
}
