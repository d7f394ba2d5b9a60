//! Shared domain types and the bundled default instrument.

mod expert;
mod instrument;
mod responses;
mod round;
mod tree;

pub use expert::{BasisImpacts, ExpertProfile, Familiarity, IdentityGroup, Impact, JudgmentBasis};
pub use instrument::{
    default_tree, load_default_instrument, synthetic_demo_weights, BonusIndicator, Instrument,
    InstrumentDimension, InstrumentIndex, Question, ANSWER_MAX, ANSWER_MIN,
};
pub use responses::{ConsumerResponse, ExpertBonusRating, ResponseSet};
pub use round::{ExpertRatings, RatingRound, ScreeningThresholds, DEFAULT_SCALE_MAX};
pub use tree::{
    IndicatorNode, IndicatorTree, Level, SiblingGroup, TreeViolation, WEIGHT_SUM_TOLERANCE,
};

/// Lists every violated tree invariant; empty iff the tree is well-formed.
pub fn validate_tree(tree: &IndicatorTree) -> Vec<TreeViolation> {
    tree.validate()
}
