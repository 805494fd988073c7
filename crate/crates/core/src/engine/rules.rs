use std::fmt;
use std::str::FromStr;

/// A pruning rule or incumbent update that can be switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// Keep one order per node set (also covers the numerical-order tie rule).
    Dedup,
    OptimalFront,
    OrderedFront,
    NoRightGaps,
    DormantGap,
    OrderedDormantGap,
    OptimalBack,
    OrderedBack,
    NoLeftGaps,
    AStar,
    Optimality,
    TreeUpdate,
    ConcatUpdate,
}

impl Rule {
    pub const ALL: [Rule; 13] = [
        Rule::Dedup,
        Rule::OptimalFront,
        Rule::OrderedFront,
        Rule::NoRightGaps,
        Rule::DormantGap,
        Rule::OrderedDormantGap,
        Rule::OptimalBack,
        Rule::OrderedBack,
        Rule::NoLeftGaps,
        Rule::AStar,
        Rule::Optimality,
        Rule::TreeUpdate,
        Rule::ConcatUpdate,
    ];

    /// Rules that need the pair matrices.
    pub const BOUNDS: [Rule; 4] = [
        Rule::AStar,
        Rule::Optimality,
        Rule::TreeUpdate,
        Rule::ConcatUpdate,
    ];

    /// Short label used on the command line and in statistics.
    pub fn label(self) -> &'static str {
        match self {
            Rule::Dedup => "1",
            Rule::OptimalFront => "2",
            Rule::OrderedFront => "3",
            Rule::NoRightGaps => "4",
            Rule::DormantGap => "5",
            Rule::OrderedDormantGap => "6",
            Rule::OptimalBack => "8",
            Rule::OrderedBack => "9",
            Rule::NoLeftGaps => "10",
            Rule::AStar => "11",
            Rule::Optimality => "12",
            Rule::TreeUpdate => "u1",
            Rule::ConcatUpdate => "u2",
        }
    }

    fn bit(self) -> u32 {
        1 << self as u32
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if s == "7" {
            return Ok(Rule::Dedup);
        }
        Rule::ALL
            .into_iter()
            .find(|r| r.label() == s)
            .ok_or_else(|| format!("unknown rule {s:?} (expected 1-12, u1 or u2)"))
    }
}

/// Set of enabled rules.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleSet(u32);

impl RuleSet {
    pub fn all() -> Self {
        Rule::ALL.into_iter().collect()
    }

    pub fn none() -> Self {
        RuleSet(0)
    }

    pub fn only(rules: &[Rule]) -> Self {
        rules.iter().copied().collect()
    }

    pub fn contains(self, r: Rule) -> bool {
        self.0 & r.bit() != 0
    }

    #[must_use]
    pub fn with(self, r: Rule) -> Self {
        RuleSet(self.0 | r.bit())
    }

    #[must_use]
    pub fn without(self, r: Rule) -> Self {
        RuleSet(self.0 & !r.bit())
    }

    pub fn uses_bounds(self) -> bool {
        Rule::BOUNDS.iter().any(|&r| self.contains(r))
    }

    pub fn iter(self) -> impl Iterator<Item = Rule> {
        Rule::ALL.into_iter().filter(move |&r| self.contains(r))
    }
}

impl FromIterator<Rule> for RuleSet {
    fn from_iter<T: IntoIterator<Item = Rule>>(iter: T) -> Self {
        RuleSet(iter.into_iter().fold(0, |acc, r| acc | r.bit()))
    }
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(Rule::label)).finish()
    }
}
