//! Nested block structures and the condition triples they generate.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// One condition `F_pa F_b = F_pb F_a` with `a < b` inside a block and `p`
/// in the enclosing scope but outside the block. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConditionTriple {
    pub a: usize,
    pub b: usize,
    pub p: usize,
}

impl ConditionTriple {
    /// Canonicalizes so that `a < b`.
    pub fn new(a: usize, b: usize, p: usize) -> Result<Self> {
        if a == b || p == a || p == b {
            return Err(Error::InvalidArgument(format!(
                "condition indices ({a}, {b}, {p}) must be pairwise distinct"
            )));
        }
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Ok(ConditionTriple { a, b, p })
    }
}

impl fmt::Display for ConditionTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf(usize),
    Block(Vec<Node>),
}

impl Node {
    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf(i) => out.push(*i),
            Node::Block(children) => children.iter().for_each(|c| c.leaves(out)),
        }
    }

    fn leaf_set(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.leaves(&mut v);
        v.sort_unstable();
        v
    }
}

/// A tree of blocks over `{1..n}`. The root scope holds every index; each
/// nested block must have between 2 and `|parent| - 1` leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducibilityStructure {
    n: usize,
    root: Vec<Node>,
}

impl ReducibilityStructure {
    pub fn new(n: usize, root: Vec<Node>) -> Result<Self> {
        let s = ReducibilityStructure { n, root };
        s.validate()?;
        Ok(s)
    }

    /// Flat disjoint blocks inside the root scope; remaining indices become
    /// top-level leaves.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut used = BTreeSet::new();
        let mut root = Vec::new();
        for block in blocks {
            for &i in block {
                if !used.insert(i) {
                    return Err(Error::InvalidStructure(format!(
                        "index {i} appears in two blocks"
                    )));
                }
            }
            root.push(Node::Block(block.iter().map(|&i| Node::Leaf(i)).collect()));
        }
        root.extend((1..=n).filter(|i| !used.contains(i)).map(Node::Leaf));
        Self::new(n, root)
    }

    /// Parses bracket syntax such as `[[1,2],3,4]` or `[[[1,2],3],4]`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let root = match parse_node(&chars, &mut pos)? {
            Node::Block(children) => children,
            Node::Leaf(_) => {
                return Err(Error::InvalidStructure(
                    "structure must be a bracketed list".into(),
                ))
            }
        };
        if pos != chars.len() {
            return Err(Error::InvalidStructure(format!(
                "unexpected trailing input at position {pos}"
            )));
        }
        Self::new(n, root)
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidStructure(format!(
                "arity {} is below 2",
                self.n
            )));
        }
        let all = Node::Block(self.root.clone()).leaf_set();
        let expected: Vec<usize> = (1..=self.n).collect();
        if all != expected {
            return Err(Error::InvalidStructure(format!(
                "leaves {all:?} must list each of 1..={} exactly once",
                self.n
            )));
        }
        fn check(children: &[Node], scope: usize) -> Result<()> {
            for child in children {
                if let Node::Block(inner) = child {
                    let size = child.leaf_set().len();
                    if size < 2 || size + 1 > scope {
                        return Err(Error::InvalidStructure(format!(
                            "block {:?} has {size} indices; allowed 2..={} inside a scope of {scope}",
                            child.leaf_set(),
                            scope.saturating_sub(1)
                        )));
                    }
                    check(inner, size)?;
                }
            }
            Ok(())
        }
        check(&self.root, self.n)
    }

    /// Every nested block with the leaf set of its enclosing scope.
    pub fn blocks_with_scopes(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        fn walk(children: &[Node], scope: &[usize], out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
            for child in children {
                if let Node::Block(inner) = child {
                    let set = child.leaf_set();
                    out.push((set.clone(), scope.to_vec()));
                    walk(inner, &set, out);
                }
            }
        }
        let mut out = Vec::new();
        let all: Vec<usize> = (1..=self.n).collect();
        walk(&self.root, &all, &mut out);
        out
    }

    /// The reducibility conditions: for each block `B` in scope `P`, all
    /// `(a, b, p)` with `a < b` in `B` and `p` in `P \ B`.
    pub fn conditions(&self) -> BTreeSet<ConditionTriple> {
        let mut out = BTreeSet::new();
        for (block, scope) in self.blocks_with_scopes() {
            for (x, &a) in block.iter().enumerate() {
                for &b in &block[x + 1..] {
                    for &p in scope.iter().filter(|p| !block.contains(p)) {
                        out.insert(ConditionTriple { a, b, p });
                    }
                }
            }
        }
        out
    }
}

/// Condition triples for a structure.
pub fn conditions_for(structure: &ReducibilityStructure) -> BTreeSet<ConditionTriple> {
    structure.conditions()
}

fn parse_node(chars: &[char], pos: &mut usize) -> Result<Node> {
    let err = |pos: usize, msg: &str| Error::InvalidStructure(format!("{msg} at position {pos}"));
    match chars.get(*pos) {
        Some('[') => {
            *pos += 1;
            let mut children = Vec::new();
            if chars.get(*pos) == Some(&']') {
                return Err(err(*pos, "empty block"));
            }
            loop {
                children.push(parse_node(chars, pos)?);
                match chars.get(*pos) {
                    Some(',') => *pos += 1,
                    Some(']') => {
                        *pos += 1;
                        return Ok(Node::Block(children));
                    }
                    _ => return Err(err(*pos, "expected ',' or ']'")),
                }
            }
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while chars.get(*pos).is_some_and(char::is_ascii_digit) {
                *pos += 1;
            }
            let text: String = chars[start..*pos].iter().collect();
            text.parse()
                .map(Node::Leaf)
                .map_err(|_| err(start, "bad index"))
        }
        _ => Err(err(*pos, "expected '[' or an index")),
    }
}

impl fmt::Display for ReducibilityStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_list(f: &mut fmt::Formatter<'_>, nodes: &[Node]) -> fmt::Result {
            write!(f, "[")?;
            for (k, node) in nodes.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                match node {
                    Node::Leaf(i) => write!(f, "{i}")?,
                    Node::Block(inner) => write_list(f, inner)?,
                }
            }
            write!(f, "]")
        }
        write_list(f, &self.root)
    }
}
