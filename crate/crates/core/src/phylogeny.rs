//! Trees over completions and over the original matrix.
//!
//! [`PPTree`] is a classic directed perfect phylogeny of a completion: every
//! one of the `2m` extended columns flips from 0 to 1 on at most one edge.
//! [`PPPTree`] reads the same tree over the `m` original characters, where an
//! edge carrying a negated column becomes the loss of that character.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::TreeError;
use crate::matrix::{BinaryMatrix, Completion};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Extended columns flipped on the edge from the parent, in order.
    pub labels: Vec<usize>,
    /// State over all `2m` extended columns.
    pub state: FixedBitSet,
    pub species: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPTree {
    n_characters: usize,
    nodes: Vec<PPNode>,
}

impl PPTree {
    pub fn n_characters(&self) -> usize {
        self.n_characters
    }

    pub fn nodes(&self) -> &[PPNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &PPNode {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].children.is_empty())
    }

    pub fn node_of_species(&self, species: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.species.contains(&species))
    }

    /// Checks the directed perfect phylogeny invariants against the
    /// completion the tree was built from. Returns every violation found.
    pub fn check(&self, completion: &Completion) -> Vec<String> {
        let mut problems = Vec::new();
        let width = 2 * self.n_characters;
        if self.nodes[0].state.count_ones(..) != 0 {
            problems.push("root state is not all zeros".to_string());
        }
        let mut labelled = vec![0usize; width];
        for (v, node) in self.nodes.iter().enumerate().skip(1) {
            let parent = &self.nodes[node.parent.expect("non-root has a parent")];
            let mut expected = parent.state.clone();
            for &col in &node.labels {
                labelled[col] += 1;
                if expected.contains(col) {
                    problems.push(format!("node {v}: column {col} flips from 1"));
                }
                expected.insert(col);
            }
            if expected != node.state {
                problems.push(format!("node {v}: state differs from parent plus labels"));
            }
        }
        for (col, &k) in labelled.iter().enumerate() {
            if k > 1 {
                problems.push(format!("column {col} labels {k} edges"));
            }
        }
        for s in 0..completion.n_species() {
            let holders: Vec<usize> = (0..self.nodes.len())
                .filter(|&v| self.nodes[v].species.contains(&s))
                .collect();
            match holders.as_slice() {
                [v] => {
                    if !self.nodes[*v].children.is_empty() {
                        problems.push(format!("species {s} sits on internal node {v}"));
                    }
                    if self.nodes[*v].state != completion.row(s) {
                        problems.push(format!("species {s}: leaf state differs from its row"));
                    }
                }
                other => problems.push(format!("species {s} on {} nodes", other.len())),
            }
        }
        let counts: Vec<usize> = completion
            .columns()
            .iter()
            .map(|c| c.count_ones(..))
            .collect();
        for (v, node) in self.nodes.iter().enumerate().skip(1) {
            let parent = node.parent.unwrap();
            let floor = self.nodes[parent].labels.iter().map(|&c| counts[c]).min();
            let mut prev = floor.unwrap_or(usize::MAX);
            for &col in &node.labels {
                if counts[col] > prev {
                    problems.push(format!("node {v}: column counts increase along the path"));
                }
                prev = counts[col];
            }
        }
        problems
    }
}

/// Builds a directed perfect phylogeny for a forbidden-free completion.
///
/// Columns are sorted by decreasing number of ones (ties by index) and every
/// row is threaded from the root through its columns in that order, sharing
/// prefixes. A species whose path ends above other paths is hung on an
/// unlabeled pendant leaf, and unlabeled unary chains are merged into a
/// single edge carrying the ordered label list.
pub fn build_pp_tree(completion: &Completion) -> Result<PPTree, TreeError> {
    if let Some(w) = completion.forbidden_submatrix() {
        return Err(TreeError::Forbidden(w.columns));
    }
    let width = 2 * completion.n_characters();
    let columns = completion.columns();
    let mut order: Vec<usize> = (0..width).filter(|&c| !columns[c].is_clear()).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(columns[c].count_ones(..)), c));

    // Trie with one column per edge.
    struct TrieNode {
        label: Option<usize>,
        children: Vec<usize>,
        species: Vec<usize>,
    }
    let mut trie = vec![TrieNode {
        label: None,
        children: Vec::new(),
        species: Vec::new(),
    }];
    for s in 0..completion.n_species() {
        let row = completion.row(s);
        let mut cur = 0;
        for &col in order.iter().filter(|&&c| row.contains(c)) {
            let existing = trie[cur]
                .children
                .iter()
                .copied()
                .find(|&ch| trie[ch].label == Some(col));
            cur = match existing {
                Some(ch) => ch,
                None => {
                    trie.push(TrieNode {
                        label: Some(col),
                        children: Vec::new(),
                        species: Vec::new(),
                    });
                    let id = trie.len() - 1;
                    trie[cur].children.push(id);
                    id
                }
            };
        }
        trie[cur].species.push(s);
    }

    let mut tree = PPTree {
        n_characters: completion.n_characters(),
        nodes: vec![PPNode {
            parent: None,
            children: Vec::new(),
            labels: Vec::new(),
            state: FixedBitSet::with_capacity(width),
            species: Vec::new(),
        }],
    };

    fn add(tree: &mut PPTree, parent: usize, labels: Vec<usize>, species: Vec<usize>) -> usize {
        let mut state = tree.nodes[parent].state.clone();
        for &c in &labels {
            state.insert(c);
        }
        tree.nodes.push(PPNode {
            parent: Some(parent),
            children: Vec::new(),
            labels,
            state,
            species,
        });
        let id = tree.nodes.len() - 1;
        tree.nodes[parent].children.push(id);
        id
    }

    // (trie node, tree parent), processed depth first so ids are pre-order.
    fn emit(trie: &[TrieNode], tree: &mut PPTree, mut t: usize, parent: usize) {
        let mut labels = vec![trie[t].label.expect("non-root trie node has a label")];
        while trie[t].children.len() == 1 && trie[t].species.is_empty() {
            t = trie[t].children[0];
            labels.push(trie[t].label.unwrap());
        }
        let node = &trie[t];
        if node.children.is_empty() {
            add(tree, parent, labels, node.species.clone());
            return;
        }
        let v = add(tree, parent, labels, Vec::new());
        if !node.species.is_empty() {
            add(tree, v, Vec::new(), node.species.clone());
        }
        for &ch in &node.children {
            emit(trie, tree, ch, v);
        }
    }

    if !trie[0].species.is_empty() {
        let species = trie[0].species.clone();
        if trie[0].children.is_empty() {
            tree.nodes[0].species = species;
        } else {
            add(&mut tree, 0, Vec::new(), species);
        }
    }
    for ch in trie[0].children.clone() {
        emit(&trie, &mut tree, ch, 0);
    }
    Ok(tree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Change {
    Gain,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeLabel {
    pub character: usize,
    pub change: Change,
}

impl EdgeLabel {
    pub fn gain(character: usize) -> Self {
        Self {
            character,
            change: Change::Gain,
        }
    }

    pub fn loss(character: usize) -> Self {
        Self {
            character,
            change: Change::Loss,
        }
    }

    /// `+name` or `-name`.
    pub fn token(&self, m: &BinaryMatrix) -> String {
        let sign = match self.change {
            Change::Gain => '+',
            Change::Loss => '-',
        };
        format!("{sign}{}", m.character_label(self.character))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPPNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub labels: Vec<EdgeLabel>,
    /// State over the `m` original characters.
    pub state: FixedBitSet,
    pub species: Vec<usize>,
}

/// A persistent perfect phylogeny: each character is gained on at most one
/// edge and lost on at most one edge below its gain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPPTree {
    n_characters: usize,
    nodes: Vec<PPPNode>,
}

impl PPPTree {
    /// A tree holding only an all-zero root.
    pub fn new(n_characters: usize) -> Self {
        Self {
            n_characters,
            nodes: vec![PPPNode {
                parent: None,
                children: Vec::new(),
                labels: Vec::new(),
                state: FixedBitSet::with_capacity(n_characters),
                species: Vec::new(),
            }],
        }
    }

    /// Appends a child whose state is the parent's with `labels` applied in
    /// order.
    pub fn add_child(&mut self, parent: usize, labels: Vec<EdgeLabel>) -> usize {
        let mut state = self.nodes[parent].state.clone();
        for l in &labels {
            state.set(l.character, l.change == Change::Gain);
        }
        self.nodes.push(PPPNode {
            parent: Some(parent),
            children: Vec::new(),
            labels,
            state,
            species: Vec::new(),
        });
        let id = self.nodes.len() - 1;
        self.nodes[parent].children.push(id);
        id
    }

    pub fn add_species(&mut self, node: usize, species: usize) {
        self.nodes[node].species.push(species);
    }

    /// Removes every subtree that carries no species. Node ids are
    /// renumbered in pre-order.
    pub fn prune_empty_leaves(&mut self) {
        let mut keep = vec![false; self.nodes.len()];
        for v in self.preorder_ids().into_iter().rev() {
            keep[v] = !self.nodes[v].species.is_empty()
                || self.nodes[v].children.iter().any(|&c| keep[c]);
        }
        fn walk(src: &PPPTree, dst: &mut PPPTree, keep: &[bool], old: usize, new: usize) {
            for &c in &src.nodes[old].children {
                if keep[c] {
                    let id = dst.add_child(new, src.nodes[c].labels.clone());
                    dst.nodes[id].species = src.nodes[c].species.clone();
                    walk(src, dst, keep, c, id);
                }
            }
        }
        let mut out = PPPTree::new(self.n_characters);
        out.nodes[0].species = self.nodes[0].species.clone();
        walk(self, &mut out, &keep, 0, 0);
        *self = out;
    }

    pub fn n_characters(&self) -> usize {
        self.n_characters
    }

    pub fn nodes(&self) -> &[PPPNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &PPPNode {
        &self.nodes[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].children.is_empty())
    }

    pub fn loss_edge_count(&self) -> usize {
        self.nodes
            .iter()
            .flat_map(|n| &n.labels)
            .filter(|l| l.change == Change::Loss)
            .count()
    }

    /// Node ids in pre-order.
    pub fn preorder_ids(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        order
    }

    fn ancestors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.nodes[v].parent, move |&p| self.nodes[p].parent)
    }
}

/// Reads a perfect phylogeny of a completion as a persistent perfect
/// phylogeny of the original matrix. A character is 1 at a node iff its
/// positive column is 1 and its negated column is 0.
pub fn relabel_to_ppp(t: &PPTree) -> PPPTree {
    let m = t.n_characters();
    let nodes = t
        .nodes()
        .iter()
        .map(|n| {
            let mut state = FixedBitSet::with_capacity(m);
            for j in 0..m {
                if n.state.contains(2 * j) && !n.state.contains(2 * j + 1) {
                    state.insert(j);
                }
            }
            PPPNode {
                parent: n.parent,
                children: n.children.clone(),
                labels: n
                    .labels
                    .iter()
                    .map(|&col| EdgeLabel {
                        character: col / 2,
                        change: if col % 2 == 0 {
                            Change::Gain
                        } else {
                            Change::Loss
                        },
                    })
                    .collect(),
                state,
                species: n.species.clone(),
            }
        })
        .collect();
    PPPTree {
        n_characters: m,
        nodes,
    }
}

/// The definition property a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// Every node carries a vector over the `m` characters.
    VectorLength,
    /// The root is all zeros.
    Root,
    /// At most one gain and one loss per character, on one path, gain first,
    /// and node states change only where labelled.
    Changes,
    /// Each row of the matrix labels exactly one leaf.
    Leaves,
}

impl Property {
    pub fn number(self) -> u8 {
        match self {
            Property::VectorLength => 1,
            Property::Root => 2,
            Property::Changes => 3,
            Property::Leaves => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "property {}: {}", self.property.number(), self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    /// Observations that are not violations, such as species hung on
    /// zero-length pendant edges.
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }

    fn violate(&mut self, property: Property, message: String) {
        self.violations.push(Violation { property, message });
    }
}

/// Checks a tree against the persistent perfect phylogeny definition for
/// `m`. Violations are reported with the node or character involved.
pub fn verify_ppp(t: &PPPTree, m: &BinaryMatrix) -> VerificationReport {
    let mut report = VerificationReport::default();
    let k = m.n_characters();
    if t.n_characters() != k {
        report.violate(
            Property::VectorLength,
            format!("tree has {} characters, matrix has {k}", t.n_characters()),
        );
        return report;
    }
    for (v, node) in t.nodes().iter().enumerate() {
        if node.state.len() != k {
            report.violate(
                Property::VectorLength,
                format!("node {v} has a vector of length {}", node.state.len()),
            );
        }
    }
    if !report.is_ok() {
        return report;
    }

    let root = t.node(0);
    if let Some(j) = root.state.ones().next() {
        report.violate(
            Property::Root,
            format!("root has character {} set", m.character_label(j)),
        );
    }
    if !root.labels.is_empty() {
        report.violate(Property::Root, "root carries edge labels".to_string());
    }

    let mut gains: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut losses: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (v, node) in t.nodes().iter().enumerate().skip(1) {
        let Some(parent) = node.parent else {
            report.violate(Property::Changes, format!("node {v} has no parent"));
            continue;
        };
        let mut expected = t.node(parent).state.clone();
        for label in &node.labels {
            let name = m.character_label(label.character);
            let was = expected.contains(label.character);
            match label.change {
                Change::Gain => {
                    gains[label.character].push(v);
                    if was {
                        report.violate(
                            Property::Changes,
                            format!("edge into node {v}: gain of {name} where it is already 1"),
                        );
                    }
                }
                Change::Loss => {
                    losses[label.character].push(v);
                    if !was {
                        report.violate(
                            Property::Changes,
                            format!("edge into node {v}: loss of {name} where it is 0"),
                        );
                    }
                }
            }
            expected.set(label.character, label.change == Change::Gain);
        }
        if expected != node.state {
            let j = expected.symmetric_difference(&node.state).next().unwrap();
            report.violate(
                Property::Changes,
                format!(
                    "node {v}: {} changes state without a label",
                    m.character_label(j)
                ),
            );
        }
    }
    for j in 0..k {
        let name = m.character_label(j);
        if gains[j].len() > 1 {
            report.violate(
                Property::Changes,
                format!("{name} is gained on {} edges", gains[j].len()),
            );
        }
        if losses[j].len() > 1 {
            report.violate(
                Property::Changes,
                format!("{name} is lost on {} edges", losses[j].len()),
            );
        }
        for &l in &losses[j] {
            let below_gain = gains[j].iter().any(|&g| t.ancestors(l).any(|a| a == g));
            if !below_gain {
                report.violate(
                    Property::Changes,
                    format!("loss of {name} into node {l} is not below its gain"),
                );
            }
        }
    }

    let mut seen = vec![Vec::new(); m.n_species()];
    for (v, node) in t.nodes().iter().enumerate() {
        for &s in &node.species {
            match seen.get_mut(s) {
                Some(list) => list.push(v),
                None => report.violate(
                    Property::Leaves,
                    format!("node {v} names species {s} absent from the matrix"),
                ),
            }
        }
    }
    for (s, holders) in seen.iter().enumerate() {
        let label = m.species_label(s);
        match holders.as_slice() {
            [] => report.violate(Property::Leaves, format!("species {label} labels no leaf")),
            [v] => {
                let node = t.node(*v);
                if !node.children.is_empty() {
                    report.violate(
                        Property::Leaves,
                        format!("species {label} sits on internal node {v}"),
                    );
                }
                if &node.state != m.row(s) {
                    report.violate(
                        Property::Leaves,
                        format!("leaf {v} vector differs from row of species {label}"),
                    );
                }
                if *v != 0 && node.labels.is_empty() {
                    report.notes.push(format!(
                        "species {label} hangs on a zero-length pendant leaf {v}"
                    ));
                }
            }
            many => report.violate(
                Property::Leaves,
                format!("species {label} labels {} leaves", many.len()),
            ),
        }
    }
    report
}
