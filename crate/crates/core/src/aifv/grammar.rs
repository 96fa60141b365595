//! Local rules for building valid code trees top-down.
//!
//! A node position carries a [`Role`] recording what the surrounding tree
//! demands of it: anything at all, anything but an intermediate-0 node (the
//! node right after a master's run of intermediate-0 nodes), a node on the
//! `0^k` spine of a type-`k` tree, or the `0^k` node itself. Each role admits
//! a fixed set of [`Production`]s whose children again carry roles, so every
//! tree derived from the root role of type `k` is valid for that type and
//! every valid tree has such a derivation.

use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Role {
    Free,
    NotI0,
    /// On the spine, `remaining ≥ 1` zero edges above node `0^k`.
    Spine {
        remaining: usize,
        allow_i0: bool,
    },
    /// Node `0^k`, which must be intermediate-1.
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Production {
    Leaf,
    /// Master of positive degree; `child` is the role of the node after the
    /// `degree` intermediate-0 nodes.
    Master {
        degree: usize,
        child: Role,
    },
    Complete {
        zero: Role,
        one: Role,
    },
    I0(Role),
    I1(Role),
}

impl Production {
    /// Nodes contributed by the production itself, excluding child subtrees.
    pub(crate) fn own_nodes(&self) -> usize {
        match self {
            Production::Master { degree, .. } => 1 + degree,
            _ => 1,
        }
    }
}

pub(crate) fn root_role(k: usize) -> Role {
    if k == 0 {
        Role::Free
    } else {
        Role::Spine {
            remaining: k,
            allow_i0: true,
        }
    }
}

pub(crate) fn productions(role: Role, m: usize) -> Vec<Production> {
    let mut out = Vec::new();
    match role {
        Role::Free | Role::NotI0 => {
            out.push(Production::Leaf);
            for degree in 1..m {
                out.push(Production::Master {
                    degree,
                    child: Role::NotI0,
                });
            }
            out.push(Production::Complete {
                zero: Role::Free,
                one: Role::Free,
            });
            if role == Role::Free {
                out.push(Production::I0(Role::Free));
            }
            out.push(Production::I1(Role::Free));
        }
        Role::Spine {
            remaining,
            allow_i0,
        } => {
            let next = spine_after(remaining - 1, true);
            out.push(Production::Complete {
                zero: next,
                one: Role::Free,
            });
            if allow_i0 {
                out.push(Production::I0(next));
            }
            for degree in 1..m.min(remaining) {
                out.push(Production::Master {
                    degree,
                    child: spine_after(remaining - degree - 1, false),
                });
            }
        }
        Role::Target => out.push(Production::I1(Role::Free)),
    }
    out
}

fn spine_after(remaining: usize, allow_i0: bool) -> Role {
    if remaining == 0 {
        Role::Target
    } else {
        Role::Spine {
            remaining,
            allow_i0,
        }
    }
}

/// Every role reachable from `root`, in a stable order.
pub(crate) fn reachable_roles(root: Role, m: usize) -> Vec<Role> {
    let mut seen = vec![root];
    let mut i = 0;
    while i < seen.len() {
        for p in productions(seen[i], m) {
            let children = match p {
                Production::Leaf => vec![],
                Production::Master { child, .. }
                | Production::I0(child)
                | Production::I1(child) => {
                    vec![child]
                }
                Production::Complete { zero, one } => vec![zero, one],
            };
            for c in children {
                if !seen.contains(&c) {
                    seen.push(c);
                }
            }
        }
        i += 1;
    }
    seen.sort();
    seen
}

/// A tree shape whose master nodes have degrees but no symbols yet. Shared
/// structurally so that enumerations can reuse subtrees.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Skeleton {
    Leaf,
    Master { degree: usize, child: Arc<Skeleton> },
    Complete(Arc<Skeleton>, Arc<Skeleton>),
    I0(Arc<Skeleton>),
    I1(Arc<Skeleton>),
}

impl Skeleton {
    /// `(depth, degree)` of every master, in preorder.
    pub(crate) fn slots(&self) -> Vec<(usize, usize)> {
        fn walk(s: &Skeleton, depth: usize, out: &mut Vec<(usize, usize)>) {
            match s {
                Skeleton::Leaf => out.push((depth, 0)),
                Skeleton::Master { degree, child } => {
                    out.push((depth, *degree));
                    walk(child, depth + degree + 1, out);
                }
                Skeleton::Complete(a, b) => {
                    walk(a, depth + 1, out);
                    walk(b, depth + 1, out);
                }
                Skeleton::I0(c) | Skeleton::I1(c) => walk(c, depth + 1, out),
            }
        }
        let mut out = Vec::new();
        walk(self, 0, &mut out);
        out
    }

    /// Materialises the shape, giving the `i`-th master in preorder the
    /// symbol `symbols[i]`.
    pub(crate) fn to_node(&self, symbols: &[usize]) -> super::Node {
        fn build(s: &Skeleton, symbols: &[usize], next: &mut usize) -> super::Node {
            use super::Node;
            match s {
                Skeleton::Leaf => {
                    let sym = symbols[*next];
                    *next += 1;
                    Node::leaf(sym)
                }
                Skeleton::Master { degree, child } => {
                    let sym = symbols[*next];
                    *next += 1;
                    let mut below = build(child, symbols, next);
                    for _ in 0..*degree {
                        below = Node::i0(below);
                    }
                    Node::master(*degree, sym, below)
                }
                Skeleton::Complete(a, b) => {
                    let a = build(a, symbols, next);
                    let b = build(b, symbols, next);
                    Node::complete(a, b)
                }
                Skeleton::I0(c) => Node::i0(build(c, symbols, next)),
                Skeleton::I1(c) => Node::i1(build(c, symbols, next)),
            }
        }
        let mut next = 0;
        build(self, symbols, &mut next)
    }
}
