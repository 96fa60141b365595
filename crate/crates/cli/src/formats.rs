//! JSON file formats. Every exact quantity is a fraction string such as
//! `"3/4"`; JSON numbers are only used for sizes and degrees.

use aifv_mcmc::aifv::{AifvCode, AifvTree, Node, SourceDistribution};
use aifv_mcmc::rational::{format_rational, parse_rational};
use aifv_mcmc::{Error, ProblemSpec, Result, StateSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub reward: String,
    pub q: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub types: Vec<Vec<StateEntry>>,
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<ProblemSpec> {
        if self.types.len() != self.m {
            return Err(Error::InvalidProblem(format!(
                "m = {} but {} state types are listed",
                self.m,
                self.types.len()
            )));
        }
        let mut sets = Vec::with_capacity(self.m);
        for (k, entries) in self.types.iter().enumerate() {
            let mut states = Vec::with_capacity(entries.len());
            for (i, e) in entries.iter().enumerate() {
                let reward = parse_rational(&e.reward)?;
                let q =
                    e.q.iter()
                        .map(|v| parse_rational(v))
                        .collect::<Result<Vec<_>>>()?;
                let state = StateSpec::new(reward, q).map_err(|err| match err {
                    Error::InvalidState(msg) => {
                        Error::InvalidState(format!("type {k}, state {i}: {msg}"))
                    }
                    other => other,
                })?;
                states.push(state);
            }
            sets.push(states);
        }
        ProblemSpec::new(sets)
    }

    pub fn from_problem(problem: &ProblemSpec) -> Self {
        ProblemFile {
            m: problem.m(),
            types: problem
                .state_sets()
                .iter()
                .map(|states| {
                    states
                        .iter()
                        .map(|s| StateEntry {
                            reward: format_rational(s.reward()),
                            q: s.transitions().iter().map(format_rational).collect(),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceFile {
    pub b: u32,
    pub symbols: Vec<String>,
    pub probs: Vec<String>,
}

impl SourceFile {
    pub fn to_source(&self) -> Result<SourceDistribution> {
        let probs = self
            .probs
            .iter()
            .map(|p| parse_rational(p))
            .collect::<Result<Vec<_>>>()?;
        SourceDistribution::new(self.symbols.clone(), probs, self.b)
    }
}

/// One node in preorder: the node's kind, its master fields, then its
/// children under the edge labels `"0"` and `"1"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    #[serde(rename = "0", default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<Box<NodeEntry>>,
    #[serde(rename = "1", default, skip_serializing_if = "Option::is_none")]
    pub one: Option<Box<NodeEntry>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEntry {
    #[serde(rename = "type")]
    pub k: usize,
    pub root: NodeEntry,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub m: usize,
    pub symbols: Vec<String>,
    pub trees: Vec<TreeEntry>,
}

fn node_entry(node: &Node, symbols: &[String]) -> NodeEntry {
    let sub = |n: &Node| Some(Box::new(node_entry(n, symbols)));
    let bare = |kind: &str| NodeEntry {
        kind: kind.into(),
        degree: None,
        symbol: None,
        zero: None,
        one: None,
    };
    match node {
        Node::Complete { zero, one } => NodeEntry {
            zero: sub(zero),
            one: sub(one),
            ..bare("complete")
        },
        Node::Intermediate0 { zero } => NodeEntry {
            zero: sub(zero),
            ..bare("i0")
        },
        Node::Intermediate1 { one } => NodeEntry {
            one: sub(one),
            ..bare("i1")
        },
        Node::Master {
            degree,
            symbol,
            zero,
        } => NodeEntry {
            degree: Some(*degree),
            symbol: Some(symbols[*symbol].clone()),
            zero: zero.as_deref().and_then(sub),
            ..bare("master")
        },
    }
}

fn parse_node(e: &NodeEntry, symbols: &[String], path: &str) -> Result<Node> {
    let bad = |msg: &str| {
        Error::InvalidTree(format!(
            "node at {}: {msg}",
            if path.is_empty() { "root" } else { path }
        ))
    };
    let child = |c: &Option<Box<NodeEntry>>, bit: &str| -> Result<Node> {
        match c {
            Some(c) => parse_node(c, symbols, &format!("{path}{bit}")),
            None => Err(bad(&format!("missing {bit}-child"))),
        }
    };
    let forbid = |c: &Option<Box<NodeEntry>>, bit: &str| -> Result<()> {
        if c.is_some() {
            return Err(bad(&format!("unexpected {bit}-child")));
        }
        Ok(())
    };
    if e.kind != "master" && (e.degree.is_some() || e.symbol.is_some()) {
        return Err(bad("only master nodes carry degree or symbol"));
    }
    match e.kind.as_str() {
        "complete" => Ok(Node::complete(child(&e.zero, "0")?, child(&e.one, "1")?)),
        "i0" => {
            forbid(&e.one, "1")?;
            Ok(Node::i0(child(&e.zero, "0")?))
        }
        "i1" => {
            forbid(&e.zero, "0")?;
            Ok(Node::i1(child(&e.one, "1")?))
        }
        "master" => {
            forbid(&e.one, "1")?;
            let degree = e.degree.ok_or_else(|| bad("master without degree"))?;
            let label = e
                .symbol
                .as_ref()
                .ok_or_else(|| bad("master without symbol"))?;
            let symbol = symbols
                .iter()
                .position(|s| s == label)
                .ok_or_else(|| Error::UnknownSymbol(label.clone()))?;
            match (degree, &e.zero) {
                (0, None) => Ok(Node::leaf(symbol)),
                (0, Some(_)) => Err(bad("degree-0 master must be a leaf")),
                (_, zero) => Ok(Node::master(degree, symbol, child(zero, "0")?)),
            }
        }
        other => Err(bad(&format!("unknown node kind {other:?}"))),
    }
}

impl CodeFile {
    pub fn from_code(code: &AifvCode) -> Self {
        CodeFile {
            m: code.m(),
            symbols: code.symbols().to_vec(),
            trees: code
                .trees()
                .iter()
                .map(|t| TreeEntry {
                    k: t.k,
                    root: node_entry(&t.root, code.symbols()),
                })
                .collect(),
        }
    }

    fn trees(&self) -> Result<Vec<AifvTree>> {
        if self.trees.len() != self.m {
            return Err(Error::InvalidTree(format!(
                "m = {} but {} trees are listed",
                self.m,
                self.trees.len()
            )));
        }
        self.trees
            .iter()
            .map(|t| Ok(AifvTree::new(t.k, parse_node(&t.root, &self.symbols, "")?)))
            .collect()
    }

    pub fn to_code(&self) -> Result<AifvCode> {
        AifvCode::new(self.symbols.clone(), self.trees()?)
    }

    /// Parses the trees without checking code validity, so that broken
    /// codes can still be exercised.
    pub fn to_code_unchecked(&self) -> Result<AifvCode> {
        Ok(AifvCode::new_unchecked(self.symbols.clone(), self.trees()?))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}
