use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// Common surface of the four label enumerations.
///
/// Indices follow declaration order; index 0 is the label every tie-breaking
/// rule in the crate falls back to.
pub trait Label: Copy + Eq + fmt::Debug + 'static {
    /// Number of values.
    const COUNT: usize;
    /// Task tag used in `task:<tag>:<label>` indicator feature names.
    const TASK: &'static str;

    fn all() -> &'static [Self];
    fn index(self) -> usize;
    fn name(self) -> &'static str;

    fn from_index(index: usize) -> Option<Self> {
        Self::all().get(index).copied()
    }

    /// Name of the one-hot indicator feature for this label.
    fn indicator(self) -> String {
        format!("task:{}:{}", Self::TASK, self.name())
    }

    /// Every indicator name of this task, in label order.
    fn indicators() -> Vec<String> {
        Self::all().iter().map(|l| l.indicator()).collect()
    }
}

/// Lowercase and drop separators so `Bite Attempt`, `bite_attempt` and
/// `biteattempt` all parse.
fn canonical(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, '_' | '-' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! label_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $task:literal, { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl Label for $name {
            const COUNT: usize = [$($name::$variant),+].len();
            const TASK: &'static str = $task;

            fn all() -> &'static [Self] {
                &[$($name::$variant),+]
            }

            fn index(self) -> usize {
                self as usize
            }

            fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let key = canonical(s);
                Self::all()
                    .iter()
                    .copied()
                    .find(|l| l.name() == key)
                    .ok_or_else(|| Error::Label(format!("unknown {} label `{s}`", $task)))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.name())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_enum!(
    /// Purpose of the suspect comment's author.
    IntentionLabel, "i", {
        None => "none",
        Trolling => "trolling",
        Playing => "playing",
    }
);

label_enum!(
    /// Whether a trolling intention is hidden or exposed.
    DisclosureLabel, "d", {
        None => "none",
        Hidden => "hidden",
        Exposed => "exposed",
    }
);

label_enum!(
    /// A responder's reading of the suspect comment's intention.
    InterpretationLabel, "r", {
        None => "none",
        Trolling => "trolling",
        Playing => "playing",
    }
);

label_enum!(
    /// How a responder reacts to the suspect comment.
    StrategyLabel, "b", {
        Normal => "normal",
        BiteAttempt => "biteattempt",
        ImaginaryBite => "imaginarybite",
        FalseAccusation => "falseaccusation",
        Frustrate => "frustrate",
        Neutralize => "neutralize",
        CounterTrolling => "countertrolling",
        Praise => "praise",
        Engage => "engage",
        Aggravation => "aggravation",
        Confrontation => "confrontation",
        Failed => "failed",
        Bite => "bite",
        Follow => "follow",
    }
);

/// Labels of one response: interpretation and strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseLabels {
    pub interpretation: InterpretationLabel,
    pub strategy: StrategyLabel,
}

/// Gold or predicted values of the four tasks for one snippet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetLabels {
    pub intention: IntentionLabel,
    pub disclosure: DisclosureLabel,
    #[serde(rename = "responses")]
    pub per_response: Vec<ResponseLabels>,
}

impl SnippetLabels {
    /// All lowest-index labels for a snippet with `responses` responses.
    pub fn lowest(responses: usize) -> Self {
        SnippetLabels {
            intention: IntentionLabel::None,
            disclosure: DisclosureLabel::None,
            per_response: vec![
                ResponseLabels {
                    interpretation: InterpretationLabel::None,
                    strategy: StrategyLabel::Normal,
                };
                responses
            ],
        }
    }
}

/// The four prediction tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "intention")]
    Intention,
    #[serde(rename = "disclosure")]
    Disclosure,
    #[serde(rename = "interpretation")]
    Interpretation,
    #[serde(rename = "strategy")]
    Strategy,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::Intention,
        Task::Disclosure,
        Task::Interpretation,
        Task::Strategy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Intention => "intention",
            Task::Disclosure => "disclosure",
            Task::Interpretation => "interpretation",
            Task::Strategy => "strategy",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Task::Intention => "I",
            Task::Disclosure => "D",
            Task::Interpretation => "R",
            Task::Strategy => "B",
        }
    }

    pub fn class_names(self) -> Vec<&'static str> {
        fn names<L: Label>() -> Vec<&'static str> {
            L::all().iter().map(|l| l.name()).collect()
        }
        match self {
            Task::Intention => names::<IntentionLabel>(),
            Task::Disclosure => names::<DisclosureLabel>(),
            Task::Interpretation => names::<InterpretationLabel>(),
            Task::Strategy => names::<StrategyLabel>(),
        }
    }

    pub fn class_count(self) -> usize {
        match self {
            Task::Intention => IntentionLabel::COUNT,
            Task::Disclosure => DisclosureLabel::COUNT,
            Task::Interpretation => InterpretationLabel::COUNT,
            Task::Strategy => StrategyLabel::COUNT,
        }
    }

    /// Class indices of this task's instances in `labels`: one per snippet
    /// for I and D, one per response for R and B.
    pub fn instances(self, labels: &SnippetLabels) -> Vec<usize> {
        match self {
            Task::Intention => vec![labels.intention.index()],
            Task::Disclosure => vec![labels.disclosure.index()],
            Task::Interpretation => labels
                .per_response
                .iter()
                .map(|r| r.interpretation.index())
                .collect(),
            Task::Strategy => labels
                .per_response
                .iter()
                .map(|r| r.strategy.index())
                .collect(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_has_fourteen_classes_in_declared_order() {
        assert_eq!(StrategyLabel::COUNT, 14);
        assert_eq!(StrategyLabel::all()[0], StrategyLabel::Normal);
        assert_eq!(StrategyLabel::all()[13], StrategyLabel::Follow);
        for (i, l) in StrategyLabel::all().iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(StrategyLabel::from_index(i), Some(*l));
        }
    }

    #[test]
    fn parsing_accepts_separator_variants() {
        assert_eq!(
            "Bite Attempt".parse::<StrategyLabel>().unwrap(),
            StrategyLabel::BiteAttempt
        );
        assert_eq!(
            "false_accusation".parse::<StrategyLabel>().unwrap(),
            StrategyLabel::FalseAccusation
        );
        assert!("sarcasm".parse::<IntentionLabel>().is_err());
    }

    #[test]
    fn serde_uses_lowercase_names() {
        let labels = SnippetLabels {
            intention: IntentionLabel::Trolling,
            disclosure: DisclosureLabel::Exposed,
            per_response: vec![ResponseLabels {
                interpretation: InterpretationLabel::Trolling,
                strategy: StrategyLabel::CounterTrolling,
            }],
        };
        let json = serde_json::to_string(&labels).unwrap();
        assert_eq!(
            json,
            r#"{"intention":"trolling","disclosure":"exposed","responses":[{"interpretation":"trolling","strategy":"countertrolling"}]}"#
        );
        let back: SnippetLabels = serde_json::from_str(&json).unwrap();
        assert_eq!(back, labels);
    }

    #[test]
    fn indicator_names() {
        assert_eq!(InterpretationLabel::Trolling.indicator(), "task:r:trolling");
        assert_eq!(DisclosureLabel::indicators().len(), 3);
    }
}
