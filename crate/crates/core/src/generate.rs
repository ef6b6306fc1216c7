//! Forward simulation of persistent characters on a random rooted tree.
//!
//! The tree grows by uniform attachment: each new node hangs below a
//! uniformly chosen existing node until there are `n_species` leaves. Every
//! character is gained on the edge into a uniformly chosen non-root node and,
//! with probability `loss_probability`, lost on an edge strictly below the
//! gain, picked along a random downward path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GenerateError;
use crate::matrix::{BinaryMatrix, LoadOptions};
use crate::phylogeny::{EdgeLabel, PPPTree};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub n_species: usize,
    pub n_characters: usize,
    pub loss_probability: f64,
    pub seed: u64,
    pub max_retries: usize,
    /// Keep leaves with equal vectors as one multi-label species instead of
    /// retrying. Needed whenever `n_species` exceeds the number of distinct
    /// vectors `2 * n_characters` labelled edges can produce.
    pub allow_duplicates: bool,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            n_species: 10,
            n_characters: 5,
            loss_probability: 0.3,
            seed: 0,
            max_retries: 1000,
            allow_duplicates: false,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.n_species == 0 || self.n_characters == 0 {
            return Err(GenerateError::Params(
                "species and characters must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return Err(GenerateError::Params(format!(
                "loss probability {} outside [0, 1]",
                self.loss_probability
            )));
        }
        if self.max_retries == 0 {
            return Err(GenerateError::Params("max_retries must be positive".into()));
        }
        Ok(())
    }
}

struct Topology {
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
}

fn random_topology(n_leaves: usize, rng: &mut ChaCha8Rng) -> Topology {
    let mut parent = vec![usize::MAX];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut leaves = 0;
    while leaves < n_leaves {
        let p = rng.gen_range(0..parent.len());
        if p != 0 && children[p].is_empty() {
            leaves -= 1;
        }
        let v = parent.len();
        parent.push(p);
        children.push(Vec::new());
        children[p].push(v);
        leaves += 1;
    }
    Topology { parent, children }
}

/// One attempt. `None` when the instance must be rejected.
fn attempt(p: &GeneratorParams, rng: &mut ChaCha8Rng) -> Option<(BinaryMatrix, PPPTree)> {
    let topo = random_topology(p.n_species, rng);
    let size = topo.parent.len();
    let mut labels: Vec<Vec<EdgeLabel>> = vec![Vec::new(); size];
    for c in 0..p.n_characters {
        let gain = rng.gen_range(1..size);
        labels[gain].push(EdgeLabel::gain(c));
        if rng.gen_bool(p.loss_probability) {
            let mut path = Vec::new();
            let mut v = gain;
            while !topo.children[v].is_empty() {
                v = topo.children[v][rng.gen_range(0..topo.children[v].len())];
                path.push(v);
            }
            if !path.is_empty() {
                labels[path[rng.gen_range(0..path.len())]].push(EdgeLabel::loss(c));
            }
        }
    }

    let mut tree = PPPTree::new(p.n_characters);
    let mut id = vec![0usize; size];
    let mut stack = vec![0usize];
    let mut leaf_nodes = Vec::with_capacity(p.n_species);
    while let Some(v) = stack.pop() {
        if v != 0 {
            id[v] = tree.add_child(id[topo.parent[v]], std::mem::take(&mut labels[v]));
            if topo.children[v].is_empty() {
                leaf_nodes.push(id[v]);
            }
        }
        stack.extend(topo.children[v].iter().rev());
    }

    let rows: Vec<Vec<u8>> = leaf_nodes
        .iter()
        .map(|&v| {
            let state = &tree.node(v).state;
            (0..p.n_characters)
                .map(|c| u8::from(state.contains(c)))
                .collect()
        })
        .collect();
    let species: Vec<String> = (1..=p.n_species).map(|i| format!("s{i}")).collect();
    let characters: Vec<String> = (1..=p.n_characters).map(|j| format!("c{j}")).collect();
    let m = BinaryMatrix::with_labels(&rows, species, characters, LoadOptions::default()).ok()?;
    if m.n_species() < p.n_species && !p.allow_duplicates {
        return None;
    }
    for (i, &leaf) in leaf_nodes.iter().enumerate() {
        let s = m
            .species_index(&format!("s{}", i + 1))
            .expect("every leaf label is kept");
        if m.species_names(s)[0] == format!("s{}", i + 1) {
            tree.add_species(leaf, s);
        }
    }
    tree.prune_empty_leaves();
    Some((m, tree))
}

/// A matrix and a persistent perfect phylogeny explaining it. The seed fully
/// determines the output.
pub fn generate_instance(p: &GeneratorParams) -> Result<(BinaryMatrix, PPPTree), GenerateError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    for _ in 0..p.max_retries {
        if let Some(out) = attempt(p, &mut rng) {
            return Ok(out);
        }
    }
    Err(GenerateError::RetriesExhausted(p.max_retries))
}
