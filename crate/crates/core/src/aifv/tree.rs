use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mcmc::StateSpec;
use crate::rational::Rational;

use super::source::SourceDistribution;

/// Node classification. Every node of a code tree is exactly one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Complete,
    Intermediate0,
    Intermediate1,
    Master { degree: usize, symbol: usize },
}

/// A code tree node. Child edges are implied by the kind: complete nodes have
/// both children, intermediate-0 and master nodes of positive degree have a
/// 0-child only, intermediate-1 nodes a 1-child only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Complete {
        zero: Box<Node>,
        one: Box<Node>,
    },
    Intermediate0 {
        zero: Box<Node>,
    },
    Intermediate1 {
        one: Box<Node>,
    },
    Master {
        degree: usize,
        symbol: usize,
        zero: Option<Box<Node>>,
    },
}

impl Node {
    pub fn leaf(symbol: usize) -> Node {
        Node::Master {
            degree: 0,
            symbol,
            zero: None,
        }
    }

    pub fn master(degree: usize, symbol: usize, zero: Node) -> Node {
        Node::Master {
            degree,
            symbol,
            zero: Some(Box::new(zero)),
        }
    }

    pub fn complete(zero: Node, one: Node) -> Node {
        Node::Complete {
            zero: Box::new(zero),
            one: Box::new(one),
        }
    }

    pub fn i0(zero: Node) -> Node {
        Node::Intermediate0 {
            zero: Box::new(zero),
        }
    }

    pub fn i1(one: Node) -> Node {
        Node::Intermediate1 { one: Box::new(one) }
    }

    pub fn kind(&self) -> NodeKind {
        match self {
            Node::Complete { .. } => NodeKind::Complete,
            Node::Intermediate0 { .. } => NodeKind::Intermediate0,
            Node::Intermediate1 { .. } => NodeKind::Intermediate1,
            Node::Master { degree, symbol, .. } => NodeKind::Master {
                degree: *degree,
                symbol: *symbol,
            },
        }
    }

    pub fn zero_child(&self) -> Option<&Node> {
        match self {
            Node::Complete { zero, .. } | Node::Intermediate0 { zero } => Some(zero),
            Node::Master { zero, .. } => zero.as_deref(),
            Node::Intermediate1 { .. } => None,
        }
    }

    pub fn one_child(&self) -> Option<&Node> {
        match self {
            Node::Complete { one, .. } | Node::Intermediate1 { one } => Some(one),
            _ => None,
        }
    }

    pub fn child(&self, bit: bool) -> Option<&Node> {
        if bit {
            self.one_child()
        } else {
            self.zero_child()
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.zero_child().map_or(0, Node::node_count)
            + self.one_child().map_or(0, Node::node_count)
    }

    /// Canonical preorder string: `C(..)(..)`, `0(..)`, `1(..)`, `M<degree>:<symbol>` with an
    /// optional `(..)` for the 0-child of a master.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    fn write_canonical(&self, out: &mut String) {
        match self {
            Node::Complete { zero, one } => {
                out.push_str("C(");
                zero.write_canonical(out);
                out.push_str(")(");
                one.write_canonical(out);
                out.push(')');
            }
            Node::Intermediate0 { zero } => {
                out.push_str("0(");
                zero.write_canonical(out);
                out.push(')');
            }
            Node::Intermediate1 { one } => {
                out.push_str("1(");
                one.write_canonical(out);
                out.push(')');
            }
            Node::Master {
                degree,
                symbol,
                zero,
            } => {
                out.push_str(&format!("M{degree}:{symbol}"));
                if let Some(z) = zero {
                    out.push('(');
                    z.write_canonical(out);
                    out.push(')');
                }
            }
        }
    }
}

/// A code tree together with the type index it is meant to serve as.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AifvTree {
    pub k: usize,
    pub root: Node,
}

/// One master node as seen from the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub symbol: usize,
    pub degree: usize,
    pub bits: Vec<bool>,
}

impl AifvTree {
    pub fn new(k: usize, root: Node) -> Self {
        AifvTree { k, root }
    }

    /// Codewords in preorder.
    pub fn codewords(&self) -> Vec<Codeword> {
        fn walk(node: &Node, path: &mut Vec<bool>, out: &mut Vec<Codeword>) {
            if let Node::Master { degree, symbol, .. } = node {
                out.push(Codeword {
                    symbol: *symbol,
                    degree: *degree,
                    bits: path.clone(),
                });
            }
            for bit in [false, true] {
                if let Some(child) = node.child(bit) {
                    path.push(bit);
                    walk(child, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    pub fn canonical(&self) -> String {
        format!("T{}:{}", self.k, self.root.canonical())
    }
}

impl fmt::Display for AifvTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// An ordered `m`-tuple of code trees over a shared alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AifvCode {
    symbols: Vec<String>,
    trees: Vec<AifvTree>,
}

impl AifvCode {
    /// Builds a code and checks every tree against its type.
    pub fn new(symbols: Vec<String>, trees: Vec<AifvTree>) -> Result<Self> {
        let m = trees.len();
        if m < 2 {
            return Err(Error::InvalidTree(format!(
                "a code needs at least 2 trees, got {m}"
            )));
        }
        for (k, tree) in trees.iter().enumerate() {
            if tree.k != k {
                return Err(Error::InvalidTree(format!(
                    "tree at position {k} is declared as type {}",
                    tree.k
                )));
            }
            let problems = validate_tree(tree, k, m, symbols.len());
            if !problems.is_empty() {
                return Err(Error::InvalidTree(format!(
                    "T_{k}: {}",
                    problems.join("; ")
                )));
            }
        }
        Ok(AifvCode { symbols, trees })
    }

    /// Builds a code without validating it, for exercising the codec on
    /// deliberately broken inputs.
    pub fn new_unchecked(symbols: Vec<String>, trees: Vec<AifvTree>) -> Self {
        AifvCode { symbols, trees }
    }

    pub fn m(&self) -> usize {
        self.trees.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn trees(&self) -> &[AifvTree] {
        &self.trees
    }

    pub fn tree(&self, k: usize) -> &AifvTree {
        &self.trees[k]
    }

    pub fn symbol_index(&self, label: &str) -> Result<usize> {
        self.symbols
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSymbol(label.to_string()))
    }
}

fn path_label(path: &[bool]) -> String {
    if path.is_empty() {
        "ε".into()
    } else {
        path.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Lists every way `tree` fails to be a valid type-`k` tree of an AIFV-`m`
/// code over `n` symbols. An empty list means the tree is valid.
pub fn validate_tree(tree: &AifvTree, k: usize, m: usize, n: usize) -> Vec<String> {
    let mut problems = Vec::new();
    if k >= m {
        problems.push(format!("type index {k} out of range for m = {m}"));
    }
    let mut seen = vec![0usize; n];
    let mut path = Vec::new();
    check_node(&tree.root, m, n, &mut path, &mut seen, &mut problems);
    for (symbol, count) in seen.iter().enumerate() {
        match count {
            1 => {}
            0 => problems.push(format!("symbol {symbol} is not assigned")),
            c => problems.push(format!("symbol {symbol} is assigned {c} times")),
        }
    }
    if k == 1 && matches!(tree.root, Node::Master { .. }) {
        problems.push("the root of a type-1 tree cannot be a master node".into());
    }
    if k >= 1 {
        let mut node = Some(&tree.root);
        for _ in 0..k {
            node = node.and_then(Node::zero_child);
        }
        match node {
            Some(Node::Intermediate1 { .. }) => {}
            Some(_) => problems.push(format!("node 0^{k} must be intermediate-1")),
            None => problems.push(format!("node 0^{k} is missing")),
        }
    }
    problems
}

fn check_node(
    node: &Node,
    m: usize,
    n: usize,
    path: &mut Vec<bool>,
    seen: &mut [usize],
    problems: &mut Vec<String>,
) {
    if let Node::Master {
        degree,
        symbol,
        zero,
    } = node
    {
        let at = path_label(path);
        if *symbol < n {
            seen[*symbol] += 1;
        } else {
            problems.push(format!("master at {at} carries unknown symbol {symbol}"));
        }
        if *degree >= m {
            problems.push(format!("master at {at} has degree {degree} >= m = {m}"));
        }
        match (degree, zero) {
            (0, Some(_)) => problems.push(format!("degree-0 master at {at} must be a leaf")),
            (d, None) if *d > 0 => {
                problems.push(format!("degree-{d} master at {at} has no 0-child"))
            }
            (d, Some(child)) => {
                let mut cur: &Node = child;
                for t in 1..=*d {
                    match cur {
                        Node::Intermediate0 { zero } => {
                            if t == *d {
                                if matches!(**zero, Node::Intermediate0 { .. }) {
                                    problems.push(format!(
                                        "degree-{d} master at {at}: node v0^{} is intermediate-0",
                                        d + 1
                                    ));
                                }
                            } else {
                                cur = zero;
                            }
                        }
                        _ => {
                            problems.push(format!(
                                "degree-{d} master at {at}: node v0^{t} is not intermediate-0"
                            ));
                            break;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    for bit in [false, true] {
        if let Some(child) = node.child(bit) {
            path.push(bit);
            check_node(child, m, n, path, seen, problems);
            path.pop();
        }
    }
}

/// Converts a type-`k` tree into its Markov chain state: the reward is the
/// expected codeword length and `q_j` is the probability of landing on a
/// degree-`j` master.
pub fn tree_to_state(tree: &AifvTree, source: &SourceDistribution, m: usize) -> Result<StateSpec> {
    let n = source.len();
    let mut reward = Rational::zero();
    let mut q = vec![Rational::zero(); m];
    let mut seen = vec![false; n];
    for cw in tree.codewords() {
        if cw.symbol >= n || seen[cw.symbol] {
            return Err(Error::InvalidTree(format!(
                "symbol {} is unknown or repeated for a source of {n} symbols",
                cw.symbol
            )));
        }
        if cw.degree >= m {
            return Err(Error::InvalidTree(format!(
                "degree {} >= m = {m}",
                cw.degree
            )));
        }
        seen[cw.symbol] = true;
        let p = source.prob(cw.symbol);
        reward += p * Rational::from_integer(cw.bits.len().into());
        q[cw.degree] += p;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidTree(format!(
            "symbol {missing} is missing from the tree"
        )));
    }
    StateSpec::new(reward, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn single_master_root() {
        let t0 = AifvTree::new(0, Node::leaf(0));
        assert!(validate_tree(&t0, 0, 2, 1).is_empty());
        let t1 = AifvTree::new(1, Node::leaf(0));
        let problems = validate_tree(&t1, 1, 2, 1);
        assert!(problems.iter().any(|p| p.contains("root of a type-1")));
        assert!(problems.iter().any(|p| p.contains("0^1")));
    }

    #[test]
    fn minimal_type_one_tree() {
        let t = AifvTree::new(1, Node::i0(Node::i1(Node::leaf(0))));
        assert!(validate_tree(&t, 1, 2, 1).is_empty());
        let cws = t.codewords();
        assert_eq!(cws.len(), 1);
        assert_eq!(cws[0].bits, vec![false, true]);
    }

    #[test]
    fn master_chain_rules() {
        // Degree-1 master whose chain continues into another intermediate-0.
        let bad = AifvTree::new(0, Node::master(1, 0, Node::i0(Node::i0(Node::leaf(1)))));
        let problems = validate_tree(&bad, 0, 2, 2);
        assert!(
            problems
                .iter()
                .any(|p| p.contains("v0^2 is intermediate-0")),
            "{problems:?}"
        );
        // Degree-2 master missing its second chain node.
        let short = AifvTree::new(0, Node::master(2, 0, Node::i0(Node::leaf(1))));
        let problems = validate_tree(&short, 0, 3, 2);
        assert!(
            problems
                .iter()
                .any(|p| p.contains("v0^2 is not intermediate-0")),
            "{problems:?}"
        );
        // Proper degree-1 master.
        let good = AifvTree::new(0, Node::master(1, 0, Node::i0(Node::leaf(1))));
        assert!(validate_tree(&good, 0, 2, 2).is_empty());
        // Degree too large for m.
        assert!(!validate_tree(&good, 0, 1, 2).is_empty());
    }

    #[test]
    fn symbol_bookkeeping() {
        let dup = AifvTree::new(0, Node::complete(Node::leaf(0), Node::leaf(0)));
        let problems = validate_tree(&dup, 0, 2, 2);
        assert!(problems.iter().any(|p| p.contains("assigned 2 times")));
        assert!(problems
            .iter()
            .any(|p| p.contains("symbol 1 is not assigned")));
        let leafy = AifvTree::new(
            0,
            Node::Master {
                degree: 0,
                symbol: 0,
                zero: Some(Box::new(Node::leaf(1))),
            },
        );
        assert!(validate_tree(&leafy, 0, 2, 2)
            .iter()
            .any(|p| p.contains("must be a leaf")));
    }

    #[test]
    fn state_of_two_leaf_tree() {
        let src =
            SourceDistribution::new(vec!["a".into(), "b".into()], vec![rat(1, 2), rat(1, 2)], 1)
                .unwrap();
        let t = AifvTree::new(0, Node::complete(Node::leaf(0), Node::leaf(1)));
        let s = tree_to_state(&t, &src, 2).unwrap();
        assert_eq!(s.reward(), &int(1));
        assert_eq!(s.transitions(), &[int(1), int(0)]);
    }

    #[test]
    fn root_master_has_empty_codeword() {
        let src =
            SourceDistribution::new(vec!["a".into(), "b".into()], vec![rat(1, 4), rat(3, 4)], 2)
                .unwrap();
        let t = AifvTree::new(0, Node::master(1, 0, Node::i0(Node::leaf(1))));
        let s = tree_to_state(&t, &src, 2).unwrap();
        // a: length 0; b: length 2.
        assert_eq!(s.reward(), &rat(3, 2));
        assert_eq!(s.q(1), &rat(1, 4));
        assert_eq!(s.q(0), &rat(3, 4));
    }

    #[test]
    fn canonical_strings() {
        let t = AifvTree::new(1, Node::i0(Node::i1(Node::leaf(0))));
        assert_eq!(t.canonical(), "T1:0(1(M0:0))");
        let u = AifvTree::new(
            0,
            Node::complete(Node::master(1, 1, Node::i0(Node::leaf(0))), Node::leaf(2)),
        );
        assert_eq!(u.canonical(), "T0:C(M1:1(0(M0:0)))(M0:2)");
        assert_eq!(u.root.node_count(), 5);
    }
}
