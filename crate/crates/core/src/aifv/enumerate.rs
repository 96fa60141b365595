use std::collections::BTreeMap;
use std::sync::Arc;

use super::grammar::{productions, root_role, Production, Role, Skeleton};
use super::tree::{validate_tree, AifvTree, Node};

struct Shape {
    skeleton: Arc<Skeleton>,
    nodes: usize,
    masters: usize,
}

fn shapes(role: Role, m: usize, budget: usize, max_masters: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    for p in productions(role, m) {
        let own = p.own_nodes();
        if own > budget {
            continue;
        }
        match p {
            Production::Leaf => {
                if max_masters >= 1 {
                    out.push(Shape {
                        skeleton: Arc::new(Skeleton::Leaf),
                        nodes: 1,
                        masters: 1,
                    });
                }
            }
            Production::Master { degree, child } => {
                if max_masters == 0 {
                    continue;
                }
                for c in shapes(child, m, budget - own, max_masters - 1) {
                    out.push(Shape {
                        skeleton: Arc::new(Skeleton::Master {
                            degree,
                            child: c.skeleton,
                        }),
                        nodes: own + c.nodes,
                        masters: 1 + c.masters,
                    });
                }
            }
            Production::I0(child) | Production::I1(child) => {
                for c in shapes(child, m, budget - 1, max_masters) {
                    let sk = if matches!(p, Production::I0(_)) {
                        Skeleton::I0(c.skeleton)
                    } else {
                        Skeleton::I1(c.skeleton)
                    };
                    out.push(Shape {
                        skeleton: Arc::new(sk),
                        nodes: 1 + c.nodes,
                        masters: c.masters,
                    });
                }
            }
            Production::Complete { zero, one } => {
                let left = shapes(zero, m, budget - 1, max_masters);
                for a in &left {
                    for b in shapes(one, m, budget - 1 - a.nodes, max_masters - a.masters) {
                        out.push(Shape {
                            skeleton: Arc::new(Skeleton::Complete(a.skeleton.clone(), b.skeleton)),
                            nodes: 1 + a.nodes + b.nodes,
                            masters: a.masters + b.masters,
                        });
                    }
                }
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Every valid type-`k` tree of an AIFV-`m` code over `n` symbols with at most
/// `max_nodes` nodes, each exactly once, ordered by canonical form.
///
/// The count grows like `n!` times the number of shapes; intended for small
/// parameters. [`super::aifv_problem`] works from shapes directly.
pub fn enumerate_trees(k: usize, m: usize, n: usize, max_nodes: usize) -> Vec<AifvTree> {
    let mut out = BTreeMap::new();
    if k >= m || n == 0 {
        return Vec::new();
    }
    let perms = permutations(n);
    for shape in shapes(root_role(k), m, max_nodes, n) {
        if shape.masters != n {
            continue;
        }
        for perm in &perms {
            let tree = AifvTree::new(k, shape.skeleton.to_node(perm));
            out.insert(tree.canonical(), tree);
        }
    }
    out.into_values().collect()
}

/// Generate-and-test enumeration: every binary tree of arbitrary node kinds,
/// master degrees and symbol labels within the node budget, kept when
/// [`validate_tree`] accepts it. Shares no construction logic with
/// [`enumerate_trees`].
pub fn enumerate_trees_filtered(k: usize, m: usize, n: usize, max_nodes: usize) -> Vec<AifvTree> {
    fn all(m: usize, n: usize, budget: usize) -> Vec<(Node, usize)> {
        let mut out = Vec::new();
        if budget == 0 {
            return out;
        }
        for symbol in 0..n {
            out.push((Node::leaf(symbol), 1));
        }
        for (child, size) in all(m, n, budget - 1) {
            out.push((Node::i0(child.clone()), size + 1));
            out.push((Node::i1(child.clone()), size + 1));
            for degree in 1..m {
                for symbol in 0..n {
                    out.push((Node::master(degree, symbol, child.clone()), size + 1));
                }
            }
        }
        let subtrees = all(m, n, budget.saturating_sub(2));
        for (a, sa) in &subtrees {
            for (b, sb) in &subtrees {
                if 1 + sa + sb <= budget {
                    out.push((Node::complete(a.clone(), b.clone()), 1 + sa + sb));
                }
            }
        }
        out
    }
    let mut out = BTreeMap::new();
    for (root, _) in all(m, n, max_nodes) {
        let tree = AifvTree::new(k, root);
        if validate_tree(&tree, k, m, n).is_empty() {
            out.insert(tree.canonical(), tree);
        }
    }
    out.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_cases() {
        let t = enumerate_trees(0, 2, 1, 1);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].root, Node::leaf(0));
        assert!(enumerate_trees(1, 2, 1, 2).is_empty());
        let t = enumerate_trees(1, 2, 1, 3);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].root, Node::i0(Node::i1(Node::leaf(0))));
    }

    #[test]
    fn agrees_with_filtered_generator() {
        for (k, m, n, cap) in [
            (0, 2, 1, 4),
            (1, 2, 1, 4),
            (0, 2, 2, 4),
            (1, 2, 2, 5),
            (0, 3, 2, 4),
            (1, 3, 2, 4),
            (2, 3, 1, 5),
            (2, 3, 2, 5),
        ] {
            let a: Vec<String> = enumerate_trees(k, m, n, cap)
                .iter()
                .map(AifvTree::canonical)
                .collect();
            let b: Vec<String> = enumerate_trees_filtered(k, m, n, cap)
                .iter()
                .map(AifvTree::canonical)
                .collect();
            assert_eq!(a, b, "k={k} m={m} n={n} cap={cap}");
            assert!(!a.is_empty() || cap < 3, "k={k} m={m} n={n} cap={cap}");
        }
    }

    #[test]
    fn every_enumerated_tree_is_valid() {
        for k in 0..3 {
            for tree in enumerate_trees(k, 3, 3, 6) {
                assert!(validate_tree(&tree, k, 3, 3).is_empty(), "{tree}");
                assert!(tree.root.node_count() <= 6);
            }
        }
    }
}
