use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tree::{IndicatorNode, IndicatorTree, Level};
use crate::error::{Error, Result};

/// Lowest questionnaire answer ("strongly disagree").
pub const ANSWER_MIN: u8 = 0;
/// Highest questionnaire answer ("strongly agree").
pub const ANSWER_MAX: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub index_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentDimension {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentIndex {
    pub id: String,
    pub name: String,
    /// Alternative names the same index goes by.
    pub aliases: Vec<String>,
    pub dimension_id: String,
    pub question_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BonusIndicator {
    pub id: String,
    pub name: String,
}

/// A consumer questionnaire: questions grouped under indices, indices under dimensions, plus the
/// expert-rated bonus indicators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instrument {
    pub dimensions: Vec<InstrumentDimension>,
    pub indices: Vec<InstrumentIndex>,
    pub questions: Vec<Question>,
    pub bonus_indicators: Vec<BonusIndicator>,
}

impl Instrument {
    pub fn validate(&self) -> Result<()> {
        let dims: BTreeSet<&str> = self.dimensions.iter().map(|d| d.id.as_str()).collect();
        let questions: BTreeMap<&str, &Question> =
            self.questions.iter().map(|q| (q.id.as_str(), q)).collect();
        if questions.len() != self.questions.len() {
            return Err(Error::InvalidInput("duplicate question id".into()));
        }
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for index in &self.indices {
            if !dims.contains(index.dimension_id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "index {} refers to unknown dimension {}",
                    index.id, index.dimension_id
                )));
            }
            if index.question_ids.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "index {} has no questions",
                    index.id
                )));
            }
            for q in &index.question_ids {
                let Some(question) = questions.get(q.as_str()) else {
                    return Err(Error::InvalidInput(format!(
                        "index {} lists unknown question {q}",
                        index.id
                    )));
                };
                if question.index_id != index.id {
                    return Err(Error::InvalidInput(format!(
                        "question {q} is listed under {} but declares {}",
                        index.id, question.index_id
                    )));
                }
                if let Some(prev) = owner.insert(q.as_str(), index.id.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "question {q} belongs to both {prev} and {}",
                        index.id
                    )));
                }
            }
        }
        if let Some(q) = self
            .questions
            .iter()
            .find(|q| !owner.contains_key(q.id.as_str()))
        {
            return Err(Error::InvalidInput(format!(
                "question {} belongs to no index",
                q.id
            )));
        }
        Ok(())
    }

    pub fn question_ids(&self) -> Vec<&str> {
        self.questions.iter().map(|q| q.id.as_str()).collect()
    }

    pub fn index(&self, id: &str) -> Option<&InstrumentIndex> {
        self.indices.iter().find(|i| i.id == id)
    }

    /// Positions of an index's questions within `self.questions`.
    pub fn question_positions(&self, index: &InstrumentIndex) -> Vec<usize> {
        index
            .question_ids
            .iter()
            .filter_map(|q| self.questions.iter().position(|x| &x.id == q))
            .collect()
    }
}

struct IndexSpec {
    id: &'static str,
    name: &'static str,
    aliases: &'static [&'static str],
    dimension: &'static str,
    items: &'static [(&'static str, &'static str)],
    questions: &'static [&'static str],
}

const DIMENSIONS: [(&str, &str); 3] = [
    ("ux", "User experience"),
    ("pq", "Product quality"),
    ("sp", "Social promotion"),
];

const BONUS: [(&str, &str); 2] = [
    ("bonus.compliance", "Compliance"),
    ("bonus.sociability", "Sociability"),
];

// Question wording is illustrative; only ids and the index partition are normative.
const INDICES: [IndexSpec; 8] = [
    IndexSpec {
        id: "ux.availability",
        name: "Availability",
        aliases: &["Usability"],
        dimension: "ux",
        items: &[
            ("ux.availability.easy_to_learn", "Function is easy to learn"),
            ("ux.availability.easy_to_operate", "Easy to operate"),
        ],
        questions: &[
            "The app's functions are easy to learn.",
            "The app is easy to operate.",
            "I can finish common tasks in the app without help.",
        ],
    },
    IndexSpec {
        id: "ux.perceptibility",
        name: "Perceptibility",
        aliases: &["Intelligibility"],
        dimension: "ux",
        items: &[
            ("ux.perceptibility.audio_visual", "Audio-visual effect"),
            (
                "ux.perceptibility.interactive_feedback",
                "Interactive feedback",
            ),
        ],
        questions: &[
            "Text, icons and sound in the app are easy to see and hear.",
            "The app gives clear feedback after each action.",
            "The screen layout makes information easy to find.",
        ],
    },
    IndexSpec {
        id: "ux.cost",
        name: "Cost consideration",
        aliases: &[],
        dimension: "ux",
        items: &[
            ("ux.cost.direct", "Direct cost"),
            ("ux.cost.indirect", "Indirect cost"),
        ],
        questions: &[
            "The money I spend on the app is acceptable.",
            "The time and effort the app costs me is acceptable.",
        ],
    },
    IndexSpec {
        id: "ux.service",
        name: "Service experience",
        aliases: &[],
        dimension: "ux",
        items: &[
            ("ux.service.needs_and_values", "Needs and values considered"),
            ("ux.service.after_sales", "After-sales service"),
        ],
        questions: &[
            "The app takes the needs of older users into account.",
            "I can get help quickly when I run into problems.",
        ],
    },
    IndexSpec {
        id: "pq.security",
        name: "Security",
        aliases: &[],
        dimension: "pq",
        items: &[
            ("pq.security.information_security", "Information security"),
            ("pq.security.system_stability", "System stability"),
        ],
        questions: &[
            "I trust the app to protect my personal information.",
            "The app runs stably without crashes or freezes.",
        ],
    },
    IndexSpec {
        id: "pq.innovation",
        name: "Innovation",
        aliases: &["Innovativeness"],
        dimension: "pq",
        items: &[
            ("pq.innovation.functional", "Functional innovation"),
            ("pq.innovation.incentive", "Incentive mechanism"),
        ],
        questions: &[
            "The app offers new functions that make my life easier.",
            "The app encourages me to keep using it.",
        ],
    },
    IndexSpec {
        id: "sp.ethics",
        name: "Ethics",
        aliases: &[],
        dimension: "sp",
        items: &[
            ("sp.ethics.service", "Service"),
            ("sp.ethics.special_customization", "Special customization"),
        ],
        questions: &[
            "The app treats older users with respect.",
            "The app offers a mode customized for older users.",
            "The app avoids misleading advertisements and inducements.",
        ],
    },
    IndexSpec {
        id: "sp.social_integration",
        name: "Social integration",
        aliases: &["Social influence"],
        dimension: "sp",
        items: &[
            ("sp.social_integration.policy_awareness", "Policy awareness"),
            (
                "sp.social_integration.social_integration",
                "Social integration",
            ),
        ],
        questions: &[
            "The app helps me learn about policies relevant to me.",
            "The app helps me keep in touch with family and friends.",
            "The app helps me take part in community activities.",
            "Using the app makes me feel included in society.",
        ],
    },
];

/// The bundled 21-question consumer instrument with its two bonus indicators.
pub fn load_default_instrument() -> Instrument {
    let mut questions = Vec::new();
    let mut indices = Vec::new();
    let mut next = 1;
    for spec in &INDICES {
        let mut ids = Vec::new();
        for text in spec.questions {
            let id = format!("q{next}");
            next += 1;
            questions.push(Question {
                id: id.clone(),
                text: (*text).to_string(),
                index_id: spec.id.to_string(),
            });
            ids.push(id);
        }
        indices.push(InstrumentIndex {
            id: spec.id.to_string(),
            name: spec.name.to_string(),
            aliases: spec.aliases.iter().map(|s| s.to_string()).collect(),
            dimension_id: spec.dimension.to_string(),
            question_ids: ids,
        });
    }
    Instrument {
        dimensions: DIMENSIONS
            .iter()
            .map(|(id, name)| InstrumentDimension {
                id: id.to_string(),
                name: name.to_string(),
            })
            .collect(),
        indices,
        questions,
        bonus_indicators: BONUS
            .iter()
            .map(|(id, name)| BonusIndicator {
                id: id.to_string(),
                name: name.to_string(),
            })
            .collect(),
    }
}

/// The final indicator system: 3 dimensions, 8 indices, 16 items, and a bonus branch holding
/// the two supplementary indicators. No weights are set.
pub fn default_tree() -> IndicatorTree {
    let mut nodes: Vec<IndicatorNode> = DIMENSIONS
        .iter()
        .map(|(id, name)| IndicatorNode::new(id, name, Level::Dimension, None))
        .collect();
    for spec in &INDICES {
        nodes.push(IndicatorNode::new(
            spec.id,
            spec.name,
            Level::Index,
            Some(spec.dimension),
        ));
        for (id, name) in spec.items {
            nodes.push(IndicatorNode::new(id, name, Level::Item, Some(spec.id)));
        }
    }
    nodes.push(IndicatorNode::new("bonus", "Bonus indicators", Level::Dimension, None).bonus());
    for (id, name) in BONUS {
        nodes.push(IndicatorNode::new(id, name, Level::Index, Some("bonus")).bonus());
    }
    IndicatorTree::new(nodes)
}

/// Illustrative local weights for the default tree, for demos and tests only. These are not
/// published values.
pub fn synthetic_demo_weights() -> BTreeMap<String, f64> {
    let pairs: [(&str, f64); 29] = [
        ("ux", 0.5),
        ("pq", 0.3),
        ("sp", 0.2),
        ("bonus", 1.0),
        ("ux.availability", 0.35),
        ("ux.perceptibility", 0.25),
        ("ux.cost", 0.2),
        ("ux.service", 0.2),
        ("pq.security", 0.6),
        ("pq.innovation", 0.4),
        ("sp.ethics", 0.45),
        ("sp.social_integration", 0.55),
        ("ux.availability.easy_to_learn", 0.5),
        ("ux.availability.easy_to_operate", 0.5),
        ("ux.perceptibility.audio_visual", 0.4),
        ("ux.perceptibility.interactive_feedback", 0.6),
        ("ux.cost.direct", 0.5),
        ("ux.cost.indirect", 0.5),
        ("ux.service.needs_and_values", 0.55),
        ("ux.service.after_sales", 0.45),
        ("pq.security.information_security", 0.5),
        ("pq.security.system_stability", 0.5),
        ("pq.innovation.functional", 0.5),
        ("pq.innovation.incentive", 0.5),
        ("sp.ethics.service", 0.55),
        ("sp.ethics.special_customization", 0.45),
        ("sp.social_integration.policy_awareness", 0.5),
        ("sp.social_integration.social_integration", 0.5),
        ("bonus.compliance", 0.5),
    ];
    let mut map: BTreeMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    map.insert("bonus.sociability".into(), 0.5);
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_instrument_has_21_questions_in_table_partition() {
        let inst = load_default_instrument();
        inst.validate().unwrap();
        assert_eq!(inst.questions.len(), 21);
        assert_eq!(inst.indices.len(), 8);
        let sizes: Vec<usize> = inst.indices.iter().map(|i| i.question_ids.len()).collect();
        assert_eq!(sizes, [3, 3, 2, 2, 2, 2, 3, 4]);
        let social = inst.index("sp.social_integration").unwrap();
        assert_eq!(social.question_ids, ["q18", "q19", "q20", "q21"]);
        assert_eq!(inst.bonus_indicators.len(), 2);
        assert_eq!(inst.bonus_indicators[0].name, "Compliance");
        assert_eq!(inst.bonus_indicators[1].name, "Sociability");
    }

    #[test]
    fn default_instrument_is_a_constant() {
        assert_eq!(load_default_instrument(), load_default_instrument());
    }

    #[test]
    fn text_names_are_kept_as_aliases() {
        let inst = load_default_instrument();
        assert_eq!(
            inst.index("ux.availability").unwrap().aliases,
            ["Usability"]
        );
        assert_eq!(
            inst.index("ux.perceptibility").unwrap().aliases,
            ["Intelligibility"]
        );
    }

    #[test]
    fn default_tree_shape() {
        let tree = default_tree();
        assert!(tree.validate().is_empty());
        let count = |level: Level, bonus: bool| {
            tree.nodes()
                .iter()
                .filter(|n| n.level == level && n.bonus == bonus)
                .count()
        };
        assert_eq!(count(Level::Dimension, false), 3);
        assert_eq!(count(Level::Index, false), 8);
        assert_eq!(count(Level::Item, false), 16);
        assert_eq!(count(Level::Index, true), 2);
    }

    #[test]
    fn demo_weights_form_a_valid_tree() {
        let tree = default_tree().with_local_weights(&synthetic_demo_weights());
        assert!(tree.validate().is_empty(), "{:?}", tree.validate());
        assert!(tree.nodes().iter().all(|n| n.local_weight.is_some()));
    }

    #[test]
    fn instrument_indices_exist_in_the_tree() {
        let tree = default_tree();
        for index in load_default_instrument().indices {
            let node = tree.get(&index.id).unwrap();
            assert_eq!(node.level, Level::Index);
            assert_eq!(node.parent_id.as_deref(), Some(index.dimension_id.as_str()));
        }
    }

    #[test]
    fn unowned_question_is_rejected() {
        let mut inst = load_default_instrument();
        inst.indices[0].question_ids.pop();
        assert!(inst.validate().is_err());
    }
}
