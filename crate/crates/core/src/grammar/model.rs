use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::suffix::GrammarPathSuffix;
use crate::graph::Label;

/// `name => 1:label 2:label …`. Ordinals are strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: Label,
    pub body: Vec<(u32, Label)>,
}

impl Rule {
    pub fn new(name: Label, body: Vec<(u32, Label)>) -> Self {
        Rule { name, body }
    }

    pub fn label_at(&self, ordinal: u32) -> Option<&Label> {
        self.body
            .binary_search_by_key(&ordinal, |(o, _)| *o)
            .ok()
            .map(|i| &self.body[i].1)
    }
}

/// A grammar invariant that does not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    TerminalIsRule(Label),
    DuplicateRule(Label),
    MissingStartRule(Label),
    StartInBody {
        rule: Label,
    },
    EmptyBody {
        rule: Label,
    },
    BadOrdinals {
        rule: Label,
    },
    UnknownLabel {
        rule: Label,
        label: Label,
    },
    Recursive {
        rule: Label,
    },
    UnanchoredEdge {
        suffix: GrammarPathSuffix,
    },
    AnchorMismatch {
        left: GrammarPathSuffix,
        right: GrammarPathSuffix,
    },
    UnknownRule {
        suffix: GrammarPathSuffix,
        rule: Label,
    },
    MissingOrdinal {
        suffix: GrammarPathSuffix,
        rule: Label,
        ordinal: u32,
    },
    LabelMismatch {
        suffix: GrammarPathSuffix,
        rule: Label,
        ordinal: u32,
        expected: Label,
    },
    UnknownTerminal {
        suffix: GrammarPathSuffix,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TerminalIsRule(l) => write!(f, "symbol {l} is both terminal and nonterminal"),
            DuplicateRule(l) => write!(f, "rule {l} defined twice"),
            MissingStartRule(l) => write!(f, "no rule for start symbol {l}"),
            StartInBody { rule } => write!(f, "start symbol used in body of rule {rule}"),
            EmptyBody { rule } => write!(f, "rule {rule} has an empty body"),
            BadOrdinals { rule } => write!(f, "rule {rule} ordinals are not positive and strictly increasing"),
            UnknownLabel { rule, label } => write!(f, "rule {rule} uses undeclared symbol {label}"),
            Recursive { rule } => write!(f, "recursive grammar: rule {rule} reaches itself"),
            UnanchoredEdge { suffix } => write!(f, "edge suffix {suffix} has no anchor rule"),
            AnchorMismatch { left, right } => write!(f, "anchor rules differ: {left} vs {right}"),
            UnknownRule { suffix, rule } => write!(f, "suffix {suffix}: no rule {rule}"),
            MissingOrdinal { suffix, rule, ordinal } => {
                write!(f, "suffix {suffix}: no ordinal {ordinal} in rule {rule}")
            }
            LabelMismatch {
                suffix,
                rule,
                ordinal,
                expected,
            } => {
                write!(
                    f,
                    "suffix {suffix}: node {ordinal} of rule {rule} is labeled {expected}"
                )
            }
            UnknownTerminal { suffix } => write!(f, "suffix {suffix}: terminal not declared"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid grammar: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("invalid suffix: {0}")]
    InvalidSuffix(Violation),
}

/// `(terminals, nonterminals, rules, start, EDGES)`. The nonterminals are
/// the rule names. Construction does not validate; see [`GraphGrammar::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphGrammar {
    pub terminals: BTreeSet<Label>,
    pub start: Label,
    pub rules: Vec<Rule>,
    pub edges: Vec<(GrammarPathSuffix, GrammarPathSuffix)>,
}

impl GraphGrammar {
    pub fn nonterminals(&self) -> BTreeSet<Label> {
        self.rules.iter().map(|r| r.name.clone()).collect()
    }

    pub fn rule(&self, name: &Label) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.name == name)
    }

    pub fn start_rule(&self) -> Option<&Rule> {
        self.rule(&self.start)
    }

    /// Sum of body sizes plus the number of EDGES pairs.
    pub fn size(&self) -> usize {
        self.rules.iter().map(|r| r.body.len()).sum::<usize>() + self.edges.len()
    }

    /// Lists every broken invariant; empty iff the grammar is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut rules: HashMap<&Label, &Rule> = HashMap::new();
        for r in &self.rules {
            if rules.insert(&r.name, r).is_some() {
                out.push(Violation::DuplicateRule(r.name.clone()));
            }
            if self.terminals.contains(&r.name) {
                out.push(Violation::TerminalIsRule(r.name.clone()));
            }
        }
        if !rules.contains_key(&self.start) {
            out.push(Violation::MissingStartRule(self.start.clone()));
        }
        for r in &self.rules {
            if r.body.is_empty() {
                out.push(Violation::EmptyBody { rule: r.name.clone() });
            }
            let increasing = r.body.windows(2).all(|w| w[0].0 < w[1].0);
            if !increasing || r.body.first().is_some_and(|(o, _)| *o == 0) {
                out.push(Violation::BadOrdinals { rule: r.name.clone() });
            }
            for (_, label) in &r.body {
                if label == &self.start {
                    out.push(Violation::StartInBody { rule: r.name.clone() });
                } else if !self.terminals.contains(label) && !rules.contains_key(label) {
                    out.push(Violation::UnknownLabel {
                        rule: r.name.clone(),
                        label: label.clone(),
                    });
                }
            }
        }
        if let Some(rule) = find_cycle(&self.rules, &rules) {
            out.push(Violation::Recursive { rule });
        }
        for (l, r) in &self.edges {
            match (l.steps().first(), r.steps().first()) {
                (Some(a), Some(b)) if a.rule != b.rule => out.push(Violation::AnchorMismatch {
                    left: l.clone(),
                    right: r.clone(),
                }),
                _ => {}
            }
            for s in [l, r] {
                if s.is_bare() {
                    out.push(Violation::UnanchoredEdge { suffix: s.clone() });
                }
                if let Err(v) = check_suffix(s, &self.terminals, &rules) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// `Ok(())` when [`validate`](Self::validate) reports nothing.
    pub fn check(&self) -> Result<(), GrammarError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(GrammarError::Invalid(v))
        }
    }

    /// Checks one suffix against the rules.
    pub fn check_suffix(&self, gps: &GrammarPathSuffix) -> Result<(), GrammarError> {
        let rules: HashMap<&Label, &Rule> = self.rules.iter().map(|r| (&r.name, r)).collect();
        check_suffix(gps, &self.terminals, &rules).map_err(GrammarError::InvalidSuffix)
    }

    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut terminals = None;
        let mut start = None;
        let mut rules = Vec::new();
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| GrammarError::Parse { line, msg };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let keyword = tokens.next().unwrap();
            let rest: Vec<&str> = tokens.collect();
            let label = |s: &str| Label::new(s).map_err(|e| err(e.to_string()));
            match keyword {
                "TERMINALS" => {
                    if terminals.is_some() {
                        return Err(err("TERMINALS given twice".into()));
                    }
                    terminals = Some(rest.iter().map(|s| label(s)).collect::<Result<BTreeSet<_>, _>>()?);
                }
                "START" => {
                    if rest.len() != 1 || start.is_some() {
                        return Err(err("expected exactly one START symbol".into()));
                    }
                    start = Some(label(rest[0])?);
                }
                "RULE" => {
                    if rest.len() < 2 || rest[1] != "=>" {
                        return Err(err("expected `RULE <name> => <ordinal>:<label> …`".into()));
                    }
                    let name = label(rest[0])?;
                    let mut body = Vec::new();
                    for item in &rest[2..] {
                        let (ord, lab) = item
                            .split_once(':')
                            .ok_or_else(|| err(format!("malformed body node `{item}`")))?;
                        let ord: u32 = ord
                            .parse()
                            .ok()
                            .filter(|&o| o > 0)
                            .ok_or_else(|| err(format!("bad ordinal in `{item}`")))?;
                        body.push((ord, label(lab)?));
                    }
                    rules.push(Rule { name, body });
                }
                "EDGE" => {
                    if rest.len() != 2 {
                        return Err(err("expected `EDGE <gps> <gps>`".into()));
                    }
                    let l = GrammarPathSuffix::parse(rest[0]).map_err(|e| err(e.to_string()))?;
                    let r = GrammarPathSuffix::parse(rest[1]).map_err(|e| err(e.to_string()))?;
                    edges.push((l, r));
                }
                other => return Err(err(format!("unknown keyword `{other}`"))),
            }
        }
        let line = text.lines().count();
        Ok(GraphGrammar {
            terminals: terminals.ok_or(GrammarError::Parse {
                line,
                msg: "missing TERMINALS".into(),
            })?,
            start: start.ok_or(GrammarError::Parse {
                line,
                msg: "missing START".into(),
            })?,
            rules,
            edges,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("TERMINALS");
        for t in &self.terminals {
            out.push(' ');
            out.push_str(t.as_str());
        }
        out.push_str(&format!("\nSTART {}\n", self.start));
        for r in &self.rules {
            out.push_str(&format!("RULE {} =>", r.name));
            for (o, l) in &r.body {
                out.push_str(&format!(" {o}:{l}"));
            }
            out.push('\n');
        }
        for (l, r) in &self.edges {
            out.push_str(&format!("EDGE {l} {r}\n"));
        }
        out
    }
}

impl FromStr for GraphGrammar {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphGrammar::parse(s)
    }
}

fn check_suffix(
    gps: &GrammarPathSuffix,
    terminals: &BTreeSet<Label>,
    rules: &HashMap<&Label, &Rule>,
) -> Result<(), Violation> {
    if !terminals.contains(gps.terminal()) {
        return Err(Violation::UnknownTerminal { suffix: gps.clone() });
    }
    let steps = gps.steps();
    for (i, step) in steps.iter().enumerate() {
        let rule = rules.get(&step.rule).ok_or_else(|| Violation::UnknownRule {
            suffix: gps.clone(),
            rule: step.rule.clone(),
        })?;
        let found = rule.label_at(step.ordinal).ok_or_else(|| Violation::MissingOrdinal {
            suffix: gps.clone(),
            rule: step.rule.clone(),
            ordinal: step.ordinal,
        })?;
        let next = steps.get(i + 1).map_or(gps.terminal(), |s| &s.rule);
        if found != next {
            return Err(Violation::LabelMismatch {
                suffix: gps.clone(),
                rule: step.rule.clone(),
                ordinal: step.ordinal,
                expected: found.clone(),
            });
        }
    }
    Ok(())
}

/// Returns a rule lying on a cycle of the call graph, if any.
fn find_cycle(all: &[Rule], rules: &HashMap<&Label, &Rule>) -> Option<Label> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&Label, Mark> = BTreeMap::new();
    for root in all {
        if marks.contains_key(&root.name) {
            continue;
        }
        // iterative DFS: (rule, next body index)
        let mut stack: Vec<(&Rule, usize)> = vec![(root, 0)];
        marks.insert(&root.name, Mark::Open);
        while let Some((rule, pos)) = stack.last_mut() {
            if let Some((_, label)) = rule.body.get(*pos) {
                *pos += 1;
                if let Some(child) = rules.get(label) {
                    match marks.get(&child.name) {
                        Some(Mark::Open) => return Some(child.name.clone()),
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(&child.name, Mark::Open);
                            stack.push((child, 0));
                        }
                    }
                }
            } else {
                marks.insert(&rule.name, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}
