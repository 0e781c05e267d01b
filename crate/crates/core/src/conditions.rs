//! Named inequality records and the compound verdicts built from them.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Gt,
    Lt,
}

impl Relation {
    pub fn eval(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Gt => lhs > rhs,
            Relation::Lt => lhs < rhs,
        }
    }
}

/// One strict inequality with both evaluated sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    Holds,
    Fails,
    NotApplicable,
}

/// A verdict that holds when every inequality of at least one clause holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: VerdictStatus,
    pub any_of: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub inequalities: Vec<Inequality>,
    pub verdicts: Vec<Verdict>,
}

impl ConditionReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, lhs: f64, relation: Relation, rhs: f64) {
        self.inequalities.push(Inequality {
            name: name.to_string(),
            lhs,
            relation,
            rhs,
            holds: relation.eval(lhs, rhs),
        });
    }

    pub fn inequality(&self, name: &str) -> Option<&Inequality> {
        self.inequalities.iter().find(|i| i.name == name)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Status of a verdict by name; panics on unknown names.
    pub fn status(&self, name: &str) -> VerdictStatus {
        self.verdict(name)
            .unwrap_or_else(|| panic!("unknown verdict {name}"))
            .status
    }

    pub fn holds(&self, name: &str) -> bool {
        self.status(name) == VerdictStatus::Holds
    }

    fn eval_clauses(&self, any_of: &[Vec<String>]) -> bool {
        any_of.iter().any(|clause| {
            clause.iter().all(|n| {
                self.inequality(n)
                    .unwrap_or_else(|| panic!("verdict refers to unknown inequality {n}"))
                    .holds
            })
        })
    }

    pub fn add_verdict(&mut self, name: &str, any_of: &[&[&str]]) {
        let any_of: Vec<Vec<String>> = any_of
            .iter()
            .map(|c| c.iter().map(|s| s.to_string()).collect())
            .collect();
        let status = if self.eval_clauses(&any_of) {
            VerdictStatus::Holds
        } else {
            VerdictStatus::Fails
        };
        self.verdicts.push(Verdict { name: name.to_string(), status, any_of, note: None });
    }

    pub fn add_not_applicable(&mut self, name: &str, any_of: &[&[&str]], note: &str) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            status: VerdictStatus::NotApplicable,
            any_of: any_of
                .iter()
                .map(|c| c.iter().map(|s| s.to_string()).collect())
                .collect(),
            note: Some(note.to_string()),
        });
    }

    /// Re-derives every applicable verdict and inequality from the recorded
    /// numeric sides; true when all agree with the stored outcomes.
    pub fn is_consistent(&self) -> bool {
        self.inequalities
            .iter()
            .all(|i| i.relation.eval(i.lhs, i.rhs) == i.holds)
            && self.verdicts.iter().all(|v| match v.status {
                VerdictStatus::NotApplicable => true,
                s => (s == VerdictStatus::Holds) == self.eval_clauses(&v.any_of),
            })
    }
}
