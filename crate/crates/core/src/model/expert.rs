use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five panel groups experts were recruited from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityGroup {
    DecisionMaker,
    TechnologyDeveloper,
    SocialTechnologyResearcher,
    TechnologyImplementer,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Familiarity {
    VeryFamiliar,
    Familiar,
    Moderate,
    Unfamiliar,
    VeryUnfamiliar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impact {
    Large,
    Medium,
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgmentBasis {
    TheoreticalAnalysis,
    PracticalExperience,
    PeerReference,
    Intuition,
}

impl JudgmentBasis {
    pub const ALL: [JudgmentBasis; 4] = [
        JudgmentBasis::TheoreticalAnalysis,
        JudgmentBasis::PracticalExperience,
        JudgmentBasis::PeerReference,
        JudgmentBasis::Intuition,
    ];
}

/// Self-rated influence of each judgment basis. One field per basis, so every basis appears
/// exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisImpacts {
    pub theory: Impact,
    pub practice: Impact,
    pub peer: Impact,
    pub intuition: Impact,
}

impl BasisImpacts {
    pub fn uniform(impact: Impact) -> Self {
        BasisImpacts {
            theory: impact,
            practice: impact,
            peer: impact,
            intuition: impact,
        }
    }

    pub fn get(&self, basis: JudgmentBasis) -> Impact {
        match basis {
            JudgmentBasis::TheoreticalAnalysis => self.theory,
            JudgmentBasis::PracticalExperience => self.practice,
            JudgmentBasis::PeerReference => self.peer,
            JudgmentBasis::Intuition => self.intuition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertProfile {
    pub id: String,
    pub group: IdentityGroup,
    pub familiarity: Familiarity,
    pub basis: BasisImpacts,
}

fn normalize(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace([' ', '-'], "_")
}

impl FromStr for IdentityGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match normalize(s).as_str() {
            "decision_maker" | "1" => IdentityGroup::DecisionMaker,
            "technology_developer" | "2" => IdentityGroup::TechnologyDeveloper,
            "social_technology_researcher" | "3" => IdentityGroup::SocialTechnologyResearcher,
            "technology_implementer" | "4" => IdentityGroup::TechnologyImplementer,
            "other" | "others" | "5" => IdentityGroup::Other,
            _ => return Err(format!("unknown identity group {s:?}")),
        })
    }
}

impl FromStr for Familiarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match normalize(s).as_str() {
            "very_familiar" => Familiarity::VeryFamiliar,
            "familiar" => Familiarity::Familiar,
            "moderate" => Familiarity::Moderate,
            "unfamiliar" => Familiarity::Unfamiliar,
            "very_unfamiliar" => Familiarity::VeryUnfamiliar,
            _ => return Err(format!("unknown familiarity level {s:?}")),
        })
    }
}

impl FromStr for Impact {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match normalize(s).as_str() {
            "large" | "high" => Impact::Large,
            "medium" => Impact::Medium,
            "small" | "low" => Impact::Small,
            _ => return Err(format!("unknown impact {s:?}")),
        })
    }
}

impl fmt::Display for Familiarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Familiarity::VeryFamiliar => "very_familiar",
            Familiarity::Familiar => "familiar",
            Familiarity::Moderate => "moderate",
            Familiarity::Unfamiliar => "unfamiliar",
            Familiarity::VeryUnfamiliar => "very_unfamiliar",
        };
        f.write_str(s)
    }
}
