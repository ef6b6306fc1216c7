//! Text forms of a [`PPPTree`].
//!
//! Newick: leaves are named by species labels (several species on one leaf
//! joined by `|`) and every edge's changes are written as a branch
//! annotation of `+name` / `-name` tokens, e.g. `((1,2:-a):+a+b,3:+c);`.
//!
//! Edge list: a `# ppp-edgelist v1` header then one `parent child label
//! [species]` line per edge, nodes numbered in pre-order from the root `0`.
//! An edge without changes has the label `.`.

use std::collections::HashMap;

use crate::error::TreeError;
use crate::matrix::BinaryMatrix;
use crate::phylogeny::{Change, EdgeLabel, PPPTree};

pub const EDGELIST_HEADER: &str = "# ppp-edgelist v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Newick,
    EdgeList,
}

pub fn serialize(t: &PPPTree, m: &BinaryMatrix, format: TreeFormat) -> String {
    match format {
        TreeFormat::Newick => to_newick(t, m),
        TreeFormat::EdgeList => to_edgelist(t, m),
    }
}

/// Detects the format from the header line and parses either.
pub fn parse_tree(text: &str, m: &BinaryMatrix) -> Result<PPPTree, TreeError> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    if first == Some(EDGELIST_HEADER) {
        parse_edgelist(text, m)
    } else {
        parse_newick(text, m)
    }
}

fn annotation(labels: &[EdgeLabel], m: &BinaryMatrix) -> String {
    labels.iter().map(|l| l.token(m)).collect()
}

fn species_names(t: &PPPTree, v: usize, m: &BinaryMatrix) -> String {
    t.node(v)
        .species
        .iter()
        .map(|&s| m.species_label(s))
        .collect::<Vec<_>>()
        .join("|")
}

pub fn to_newick(t: &PPPTree, m: &BinaryMatrix) -> String {
    fn write(t: &PPPTree, m: &BinaryMatrix, v: usize, out: &mut String) {
        let node = t.node(v);
        if node.children.is_empty() && v != 0 {
            out.push_str(&species_names(t, v, m));
        } else {
            out.push('(');
            for (i, &c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write(t, m, c, out);
            }
            out.push(')');
        }
        if !node.labels.is_empty() {
            out.push(':');
            out.push_str(&annotation(&node.labels, m));
        }
    }
    let mut out = String::new();
    write(t, m, 0, &mut out);
    out.push(';');
    out
}

pub fn to_edgelist(t: &PPPTree, m: &BinaryMatrix) -> String {
    let order = t.preorder_ids();
    let mut number = vec![0usize; t.nodes().len()];
    for (i, &v) in order.iter().enumerate() {
        number[v] = i;
    }
    let mut out = String::from(EDGELIST_HEADER);
    out.push('\n');
    for &v in order.iter().skip(1) {
        let node = t.node(v);
        let parent = node.parent.expect("non-root has a parent");
        let label = if node.labels.is_empty() {
            ".".to_string()
        } else {
            annotation(&node.labels, m)
        };
        out.push_str(&format!("{} {} {}", number[parent], number[v], label));
        if !node.species.is_empty() {
            out.push(' ');
            out.push_str(&species_names(t, v, m));
        }
        out.push('\n');
    }
    out
}

/// Splits an annotation such as `+a-b+c` into labels.
fn parse_annotation(
    text: &str,
    m: &BinaryMatrix,
    line: usize,
) -> Result<Vec<EdgeLabel>, TreeError> {
    if text == "." {
        return Ok(Vec::new());
    }
    let mut labels = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((start, sign)) = chars.next() {
        let change = match sign {
            '+' => Change::Gain,
            '-' => Change::Loss,
            other => {
                return Err(TreeError::Syntax {
                    line,
                    msg: format!("expected `+` or `-`, found `{other}`"),
                })
            }
        };
        let mut end = text.len();
        while let Some(&(i, c)) = chars.peek() {
            if c == '+' || c == '-' {
                end = i;
                break;
            }
            chars.next();
        }
        let name = &text[start + 1..end];
        let character = m
            .character_index(name)
            .ok_or_else(|| TreeError::UnknownLabel(name.to_string()))?;
        labels.push(EdgeLabel { character, change });
    }
    Ok(labels)
}

fn species_list(names: &str, m: &BinaryMatrix) -> Result<Vec<usize>, TreeError> {
    let mut out: Vec<usize> = Vec::new();
    for name in names.split('|').filter(|n| !n.is_empty()) {
        let s = m
            .species_index(name)
            .ok_or_else(|| TreeError::UnknownLabel(name.to_string()))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn parse_edgelist(text: &str, m: &BinaryMatrix) -> Result<PPPTree, TreeError> {
    let mut tree = PPPTree::new(m.n_characters());
    let mut ids: HashMap<usize, usize> = HashMap::from([(0, 0)]);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(TreeError::Syntax {
                line,
                msg: "expected `parent child label [species]`".into(),
            });
        }
        let number = |f: &str| {
            f.parse::<usize>().map_err(|_| TreeError::Syntax {
                line,
                msg: format!("invalid node number `{f}`"),
            })
        };
        let (parent, child) = (number(fields[0])?, number(fields[1])?);
        let &p = ids.get(&parent).ok_or_else(|| TreeError::Syntax {
            line,
            msg: format!("parent {parent} not defined before use"),
        })?;
        if ids.contains_key(&child) {
            return Err(TreeError::Syntax {
                line,
                msg: format!("node {child} has two parents"),
            });
        }
        let v = tree.add_child(p, parse_annotation(fields[2], m, line)?);
        ids.insert(child, v);
        if let Some(names) = fields.get(3) {
            for s in species_list(names, m)? {
                tree.add_species(v, s);
            }
        }
    }
    Ok(tree)
}

struct NewickParser<'a> {
    text: &'a str,
    pos: usize,
}

struct RawNode {
    name: String,
    annotation: String,
    children: Vec<RawNode>,
}

impl<'a> NewickParser<'a> {
    fn error(&self, msg: impl Into<String>) -> TreeError {
        TreeError::Syntax {
            line: self.text[..self.pos].matches('\n').count() + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || "(),:;".contains(c))
            .unwrap_or(rest.len());
        self.pos += len;
        rest[..len].to_string()
    }

    fn node(&mut self) -> Result<RawNode, TreeError> {
        let mut children = Vec::new();
        let mut name = String::new();
        if self.peek() == Some('(') {
            self.pos += 1;
            loop {
                children.push(self.node()?);
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `)`")),
                }
            }
        } else {
            name = self.word();
        }
        let mut annotation = String::new();
        if self.peek() == Some(':') {
            self.pos += 1;
            annotation = self.word();
        }
        Ok(RawNode {
            name,
            annotation,
            children,
        })
    }
}

pub fn parse_newick(text: &str, m: &BinaryMatrix) -> Result<PPPTree, TreeError> {
    let mut parser = NewickParser { text, pos: 0 };
    if parser.peek() != Some('(') {
        return Err(parser.error("tree must start with `(`"));
    }
    let root = parser.node()?;
    if parser.peek() != Some(';') {
        return Err(parser.error("expected `;`"));
    }
    parser.pos += 1;
    if parser.peek().is_some() {
        return Err(parser.error("trailing text after `;`"));
    }
    if !root.annotation.is_empty() {
        return Err(parser.error("the root cannot carry changes"));
    }

    fn attach(
        raw: &RawNode,
        tree: &mut PPPTree,
        parent: usize,
        m: &BinaryMatrix,
    ) -> Result<(), TreeError> {
        let labels = if raw.annotation.is_empty() {
            Vec::new()
        } else {
            parse_annotation(&raw.annotation, m, 1)?
        };
        let v = tree.add_child(parent, labels);
        for s in species_list(&raw.name, m)? {
            tree.add_species(v, s);
        }
        for c in &raw.children {
            attach(c, tree, v, m)?;
        }
        Ok(())
    }

    let mut tree = PPPTree::new(m.n_characters());
    for c in &root.children {
        attach(c, &mut tree, 0, m)?;
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::LoadOptions;
    use crate::phylogeny::verify_ppp;

    fn forbidden_tree() -> (BinaryMatrix, PPPTree) {
        let m = BinaryMatrix::parse(
            "# characters: a,b\n3 2\n0 1\n1 0\n1 1\n",
            LoadOptions::default(),
        )
        .unwrap();
        let mut t = PPPTree::new(2);
        let x = t.add_child(0, vec![EdgeLabel::gain(1)]);
        let leaf1 = t.add_child(x, vec![]);
        t.add_species(leaf1, 0);
        let y = t.add_child(x, vec![EdgeLabel::gain(0)]);
        let leaf3 = t.add_child(y, vec![]);
        t.add_species(leaf3, 2);
        let leaf2 = t.add_child(y, vec![EdgeLabel::loss(1)]);
        t.add_species(leaf2, 1);
        (m, t)
    }

    #[test]
    fn minimal_newick() {
        let m = BinaryMatrix::parse(
            "# species: s1\n# characters: c\n1 1\n1\n",
            LoadOptions::default(),
        )
        .unwrap();
        let mut t = PPPTree::new(1);
        let leaf = t.add_child(0, vec![EdgeLabel::gain(0)]);
        t.add_species(leaf, 0);
        assert_eq!(to_newick(&t, &m), "(s1:+c);");
        assert_eq!(parse_newick("(s1:+c);", &m).unwrap(), t);
    }

    #[test]
    fn forbidden_tree_formats() {
        let (m, t) = forbidden_tree();
        assert_eq!(to_newick(&t, &m), "((1,(3,2:-b):+a):+b);");
        let edges = to_edgelist(&t, &m);
        assert_eq!(
            edges,
            "# ppp-edgelist v1\n0 1 +b\n1 2 . 1\n1 3 +a\n3 4 . 3\n3 5 -b 2\n"
        );
        assert!(edges.lines().any(|l| l.ends_with("+b")));
        assert!(edges.lines().any(|l| l.contains(" -b")));
        assert_eq!(parse_edgelist(&edges, &m).unwrap(), t);
        assert_eq!(parse_tree(&to_newick(&t, &m), &m).unwrap(), t);
        assert!(verify_ppp(&parse_tree(&edges, &m).unwrap(), &m).is_ok());
    }

    #[test]
    fn multi_species_leaf_names() {
        let m = BinaryMatrix::parse("3 1\n1\n1\n0\n", LoadOptions::default()).unwrap();
        let mut t = PPPTree::new(1);
        let a = t.add_child(0, vec![EdgeLabel::gain(0)]);
        t.add_species(a, 0);
        let b = t.add_child(0, vec![]);
        t.add_species(b, 1);
        assert_eq!(to_newick(&t, &m), "(1|2:+c1,3);");
        assert_eq!(parse_newick("(1|2:+c1,3);", &m).unwrap(), t);
    }

    #[test]
    fn newick_errors() {
        let (m, _) = forbidden_tree();
        assert!(parse_newick("(1,2", &m).is_err());
        assert!(parse_newick("(1:+zz);", &m).is_err());
        assert!(parse_newick("(1:*a);", &m).is_err());
        assert!(parse_newick("(1):+a;", &m).is_err());
        assert!(parse_newick("(1); x", &m).is_err());
    }

    #[test]
    fn edgelist_errors() {
        let (m, _) = forbidden_tree();
        assert!(parse_edgelist("# ppp-edgelist v1\n1 2 +a\n", &m).is_err());
        assert!(parse_edgelist("0 1 +a\n0 1 +b\n", &m).is_err());
        assert!(parse_edgelist("0 1\n", &m).is_err());
        assert!(parse_edgelist("0 x +a\n", &m).is_err());
        assert!(parse_edgelist("0 1 +a 9\n", &m).is_err());
    }
}
