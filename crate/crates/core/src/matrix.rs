//! Binary species × character matrices, their extended (character, negated
//! character) form, completions, and the pairwise column tests built on them.
//!
//! Column indices in the extended view interleave each character with its
//! negation: column `2j` is character `j`, column `2j + 1` is its negation.

use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::MatrixError;

/// Characters that may not appear in a species or character label. They are
/// the delimiters of the tree and trace formats.
const RESERVED: &[char] = &['(', ')', ',', ':', ';', '|', '+', '-'];

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Strip all-zero columns instead of rejecting the input.
    pub drop_zero_columns: bool,
}

/// A validated `n × m` 0/1 matrix.
///
/// Identical input rows are collapsed into a single species that keeps every
/// original label, so `n_species()` counts distinct rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: Vec<FixedBitSet>,
    columns: Vec<FixedBitSet>,
    species: Vec<Vec<String>>,
    characters: Vec<String>,
}

impl BinaryMatrix {
    /// Builds a matrix with default labels (`1..n` for species, `c1..cm` for
    /// characters).
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, MatrixError> {
        let m = rows.first().map_or(0, Vec::len);
        let species = (1..=rows.len()).map(|i| i.to_string()).collect();
        let characters = (1..=m).map(|j| format!("c{j}")).collect();
        Self::with_labels(rows, species, characters, LoadOptions::default())
    }

    pub fn with_labels(
        rows: &[Vec<u8>],
        species_labels: Vec<String>,
        character_labels: Vec<String>,
        opts: LoadOptions,
    ) -> Result<Self, MatrixError> {
        let m = character_labels.len();
        if rows.is_empty() {
            return Err(MatrixError::Empty);
        }
        if species_labels.len() != rows.len() {
            return Err(MatrixError::Dimension(format!(
                "{} species labels for {} rows",
                species_labels.len(),
                rows.len()
            )));
        }
        check_labels(&species_labels, "species")?;
        check_labels(&character_labels, "character")?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(MatrixError::Dimension(format!(
                    "row {} has {} cells, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|&v| v > 1) {
                return Err(MatrixError::MalformedCell {
                    row: i + 1,
                    column: j + 1,
                    token: row[j].to_string(),
                });
            }
        }

        let mut keep: Vec<usize> = Vec::with_capacity(m);
        for j in 0..m {
            if rows.iter().any(|r| r[j] == 1) {
                keep.push(j);
            } else if !opts.drop_zero_columns {
                return Err(MatrixError::ZeroColumn {
                    column: j + 1,
                    label: character_labels[j].clone(),
                });
            }
        }

        let mut seen: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut distinct: Vec<Vec<u8>> = Vec::new();
        let mut species: Vec<Vec<String>> = Vec::new();
        for (row, label) in rows.iter().zip(species_labels) {
            let projected: Vec<u8> = keep.iter().map(|&j| row[j]).collect();
            match seen.get(&projected) {
                Some(&s) => species[s].push(label),
                None => {
                    seen.insert(projected.clone(), distinct.len());
                    distinct.push(projected);
                    species.push(vec![label]);
                }
            }
        }

        let characters: Vec<String> = keep.iter().map(|&j| character_labels[j].clone()).collect();
        let width = characters.len();
        let n = distinct.len();
        let mut row_sets = Vec::with_capacity(n);
        let mut columns = vec![FixedBitSet::with_capacity(n); width];
        for (s, row) in distinct.iter().enumerate() {
            let mut set = FixedBitSet::with_capacity(width);
            for (j, &v) in row.iter().enumerate() {
                if v == 1 {
                    set.insert(j);
                    columns[j].insert(s);
                }
            }
            row_sets.push(set);
        }
        Ok(Self {
            rows: row_sets,
            columns,
            species,
            characters,
        })
    }

    /// Parses the plain-text matrix format: an `n m` header line followed by
    /// `n` rows of `m` space-separated 0/1 tokens. Lines starting with `#`
    /// are comments; `# species: a,b,...` and `# characters: x,y,...` set
    /// labels.
    pub fn parse(text: &str, opts: LoadOptions) -> Result<Self, MatrixError> {
        let mut species_labels: Option<Vec<String>> = None;
        let mut character_labels: Option<Vec<String>> = None;
        let mut dims: Option<(usize, usize)> = None;
        let mut rows: Vec<Vec<u8>> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(list) = comment.strip_prefix("species:") {
                    species_labels = Some(split_labels(list));
                } else if let Some(list) = comment.strip_prefix("characters:") {
                    character_labels = Some(split_labels(list));
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some((n, m)) = dims else {
                if tokens.len() != 2 {
                    return Err(MatrixError::Parse {
                        line: line_no,
                        msg: "expected header `n m`".into(),
                    });
                }
                let parse_dim = |t: &str| {
                    t.parse::<usize>().map_err(|_| MatrixError::Parse {
                        line: line_no,
                        msg: format!("invalid dimension `{t}`"),
                    })
                };
                dims = Some((parse_dim(tokens[0])?, parse_dim(tokens[1])?));
                continue;
            };
            let row = rows.len() + 1;
            if row > n {
                return Err(MatrixError::Dimension(format!(
                    "line {line_no}: more than the declared {n} rows"
                )));
            }
            if tokens.len() != m {
                return Err(MatrixError::Dimension(format!(
                    "row {row} (line {line_no}) has {} cells, expected {m}",
                    tokens.len()
                )));
            }
            let cells = tokens
                .iter()
                .enumerate()
                .map(|(j, t)| match *t {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(MatrixError::MalformedCell {
                        row,
                        column: j + 1,
                        token: other.to_string(),
                    }),
                })
                .collect::<Result<Vec<u8>, _>>()?;
            rows.push(cells);
        }

        let (n, m) = dims.ok_or(MatrixError::Empty)?;
        if rows.len() != n {
            return Err(MatrixError::Dimension(format!(
                "declared {n} rows, found {}",
                rows.len()
            )));
        }
        let species_labels =
            species_labels.unwrap_or_else(|| (1..=n).map(|i| i.to_string()).collect());
        let character_labels =
            character_labels.unwrap_or_else(|| (1..=m).map(|j| format!("c{j}")).collect());
        if character_labels.len() != m {
            return Err(MatrixError::Dimension(format!(
                "{} character labels for {m} columns",
                character_labels.len()
            )));
        }
        Self::with_labels(&rows, species_labels, character_labels, opts)
    }

    /// Renders the matrix in the format accepted by [`BinaryMatrix::parse`],
    /// re-expanding collapsed duplicate rows.
    pub fn to_text(&self) -> String {
        let labels: Vec<&str> = self.species.iter().flatten().map(String::as_str).collect();
        let mut out = String::new();
        out.push_str(&format!("# species: {}\n", labels.join(",")));
        out.push_str(&format!("# characters: {}\n", self.characters.join(",")));
        out.push_str(&format!("{} {}\n", labels.len(), self.n_characters()));
        for (s, names) in self.species.iter().enumerate() {
            let row = self.row_values(s);
            let line = row.iter().map(u8::to_string).collect::<Vec<_>>().join(" ");
            for _ in names {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }

    pub fn n_species(&self) -> usize {
        self.rows.len()
    }

    pub fn n_characters(&self) -> usize {
        self.characters.len()
    }

    /// Number of input rows before duplicates were collapsed.
    pub fn n_rows(&self) -> usize {
        self.species.iter().map(Vec::len).sum()
    }

    pub fn get(&self, species: usize, character: usize) -> bool {
        self.rows[species].contains(character)
    }

    /// Characters present in a species.
    pub fn row(&self, species: usize) -> &FixedBitSet {
        &self.rows[species]
    }

    pub fn row_values(&self, species: usize) -> Vec<u8> {
        (0..self.n_characters())
            .map(|j| u8::from(self.get(species, j)))
            .collect()
    }

    /// Species having a character.
    pub fn column(&self, character: usize) -> &FixedBitSet {
        &self.columns[character]
    }

    pub fn columns(&self) -> &[FixedBitSet] {
        &self.columns
    }

    pub fn species_names(&self, species: usize) -> &[String] {
        &self.species[species]
    }

    /// Display name of a species: its labels joined by `|`.
    pub fn species_label(&self, species: usize) -> String {
        self.species[species].join("|")
    }

    pub fn multiplicity(&self, species: usize) -> usize {
        self.species[species].len()
    }

    pub fn character_label(&self, character: usize) -> &str {
        &self.characters[character]
    }

    pub fn character_labels(&self) -> &[String] {
        &self.characters
    }

    pub fn character_index(&self, label: &str) -> Option<usize> {
        self.characters.iter().position(|c| c == label)
    }

    /// Finds the species carrying `label` among its collapsed names.
    pub fn species_index(&self, label: &str) -> Option<usize> {
        self.species
            .iter()
            .position(|names| names.iter().any(|n| n == label))
    }

    /// Whether the classic (no-loss) perfect phylogeny test fails.
    pub fn forbidden_submatrix(&self) -> Option<ForbiddenWitness> {
        has_forbidden_submatrix(&self.columns)
    }
}

fn split_labels(list: &str) -> Vec<String> {
    list.split(',').map(|s| s.trim().to_string()).collect()
}

fn check_labels(labels: &[String], kind: &'static str) -> Result<(), MatrixError> {
    let mut seen = std::collections::HashSet::new();
    for label in labels {
        if label.is_empty()
            || label
                .chars()
                .any(|c| c.is_whitespace() || RESERVED.contains(&c))
        {
            return Err(MatrixError::InvalidLabel {
                kind,
                label: label.clone(),
            });
        }
        if !seen.insert(label.as_str()) {
            return Err(MatrixError::DuplicateLabel {
                kind,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

/// Value of one cell of the extended matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Zero,
    One,
    Unknown,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cell::Zero => "0",
            Cell::One => "1",
            Cell::Unknown => "?",
        })
    }
}

/// State of a (character, negated character) pair in one species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairState {
    /// `(1,0)`: the species has the character.
    Present,
    /// `(?,?)`: not yet completed.
    Unknown,
    /// `(1,1)`: gained and then lost.
    Persistent,
    /// `(0,0)`: never gained.
    Absent,
}

impl PairState {
    pub fn cells(self) -> (Cell, Cell) {
        match self {
            PairState::Present => (Cell::One, Cell::Zero),
            PairState::Unknown => (Cell::Unknown, Cell::Unknown),
            PairState::Persistent => (Cell::One, Cell::One),
            PairState::Absent => (Cell::Zero, Cell::Zero),
        }
    }
}

/// The `n × 2m` matrix over `{0, 1, ?}` pairing every character with its
/// negation. Stored column-pair-major as three species bitsets per
/// character; a species outside all three sets holds `(0,0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedMatrix {
    n_species: usize,
    present: Vec<FixedBitSet>,
    unknown: Vec<FixedBitSet>,
    persistent: Vec<FixedBitSet>,
}

impl ExtendedMatrix {
    /// `1` entries become `(1,0)` and `0` entries become `(?,?)`.
    pub fn build(m: &BinaryMatrix) -> Self {
        let n = m.n_species();
        let present: Vec<FixedBitSet> = m.columns().to_vec();
        let unknown = present
            .iter()
            .map(|col| {
                let mut u = col.clone();
                u.toggle_range(..);
                u
            })
            .collect();
        Self {
            n_species: n,
            present,
            unknown,
            persistent: vec![FixedBitSet::with_capacity(n); m.n_characters()],
        }
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn n_characters(&self) -> usize {
        self.present.len()
    }

    pub fn pair(&self, species: usize, character: usize) -> PairState {
        if self.present[character].contains(species) {
            PairState::Present
        } else if self.unknown[character].contains(species) {
            PairState::Unknown
        } else if self.persistent[character].contains(species) {
            PairState::Persistent
        } else {
            PairState::Absent
        }
    }

    /// Cell at extended column `column` (`2j` positive, `2j + 1` negated).
    pub fn cell(&self, species: usize, column: usize) -> Cell {
        let (pos, neg) = self.pair(species, column / 2).cells();
        if column.is_multiple_of(2) {
            pos
        } else {
            neg
        }
    }

    /// Species holding `(1,0)` for a character.
    pub fn present(&self, character: usize) -> &FixedBitSet {
        &self.present[character]
    }

    /// Species still holding `(?,?)` for a character.
    pub fn unknown(&self, character: usize) -> &FixedBitSet {
        &self.unknown[character]
    }

    /// Species holding `(1,1)` for a character.
    pub fn persistent(&self, character: usize) -> &FixedBitSet {
        &self.persistent[character]
    }

    pub fn unknown_count(&self) -> usize {
        self.unknown.iter().map(|u| u.count_ones(..)).sum()
    }

    pub fn is_character_complete(&self, character: usize) -> bool {
        self.unknown[character].is_clear()
    }

    pub fn is_complete(&self) -> bool {
        self.unknown.iter().all(FixedBitSet::is_clear)
    }

    /// Resolves one `(?,?)` pair. Returns `false` if the pair was already
    /// determined, in which case nothing changes.
    pub fn resolve_pair(&mut self, species: usize, character: usize, persistent: bool) -> bool {
        if !self.unknown[character].contains(species) {
            return false;
        }
        self.unknown[character].set(species, false);
        self.persistent[character].set(species, persistent);
        true
    }

    /// Completes every remaining `(?,?)` pair of a character: `(1,1)` for
    /// species in `persistent_species`, `(0,0)` for the rest. Returns the
    /// species that received `(1,1)`.
    pub fn complete_character(
        &mut self,
        character: usize,
        persistent_species: &FixedBitSet,
    ) -> FixedBitSet {
        let mut gained = self.unknown[character].clone();
        gained.intersect_with(persistent_species);
        self.persistent[character].union_with(&gained);
        self.unknown[character].clear();
        gained
    }

    /// A fully determined extended column as the set of species holding `1`.
    /// `None` while any of its pairs is still `(?,?)`.
    pub fn column(&self, column: usize) -> Option<FixedBitSet> {
        let j = column / 2;
        if !self.is_character_complete(j) {
            return None;
        }
        let mut ones = self.persistent[j].clone();
        if column.is_multiple_of(2) {
            ones.union_with(&self.present[j]);
        }
        Some(ones)
    }

    /// The determined columns of every completed character, in column order.
    pub fn completed_columns(&self) -> Vec<FixedBitSet> {
        (0..2 * self.n_characters())
            .filter_map(|col| self.column(col))
            .collect()
    }

    /// Collapses `(1,0)` back to `1` and every other pair to `0`.
    pub fn collapse(&self) -> Vec<Vec<u8>> {
        (0..self.n_species)
            .map(|s| {
                self.present
                    .iter()
                    .map(|col| u8::from(col.contains(s)))
                    .collect()
            })
            .collect()
    }

    pub fn row_string(&self, species: usize) -> String {
        (0..2 * self.n_characters())
            .map(|col| self.cell(species, col).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Species that received `(1,1)` when a character was completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionRecord {
    pub character: usize,
    pub species: FixedBitSet,
}

/// An extended matrix with no `(?,?)` pair left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    matrix: ExtendedMatrix,
    provenance: Vec<CompletionRecord>,
}

impl Completion {
    /// Wraps a complete matrix; provenance lists characters in index order.
    pub fn new(matrix: ExtendedMatrix) -> Result<Self, MatrixError> {
        let provenance = (0..matrix.n_characters())
            .map(|j| CompletionRecord {
                character: j,
                species: matrix.persistent(j).clone(),
            })
            .collect();
        Self::with_provenance(matrix, provenance)
    }

    pub fn with_provenance(
        matrix: ExtendedMatrix,
        provenance: Vec<CompletionRecord>,
    ) -> Result<Self, MatrixError> {
        if !matrix.is_complete() {
            return Err(MatrixError::Incomplete(matrix.unknown_count()));
        }
        Ok(Self { matrix, provenance })
    }

    /// Builds a completion directly from `2m`-wide 0/1 rows. Each pair must
    /// be `(1,0)`, `(1,1)` or `(0,0)` and agree with `base` on `(1,0)`.
    pub fn from_rows(base: &BinaryMatrix, rows: &[Vec<u8>]) -> Result<Self, MatrixError> {
        let mut me = ExtendedMatrix::build(base);
        if rows.len() != me.n_species() {
            return Err(MatrixError::Dimension(format!(
                "{} completion rows for {} species",
                rows.len(),
                me.n_species()
            )));
        }
        for (s, row) in rows.iter().enumerate() {
            if row.len() != 2 * me.n_characters() {
                return Err(MatrixError::Dimension(format!(
                    "completion row {} has {} cells",
                    s + 1,
                    row.len()
                )));
            }
            for j in 0..me.n_characters() {
                let pair = (row[2 * j], row[2 * j + 1]);
                let ok = match (me.pair(s, j), pair) {
                    (PairState::Present, (1, 0)) => true,
                    (PairState::Unknown, (1, 1)) => me.resolve_pair(s, j, true),
                    (PairState::Unknown, (0, 0)) => me.resolve_pair(s, j, false),
                    _ => false,
                };
                if !ok {
                    return Err(MatrixError::MalformedCell {
                        row: s + 1,
                        column: 2 * j + 1,
                        token: format!("({},{})", pair.0, pair.1),
                    });
                }
            }
        }
        Self::new(me)
    }

    pub fn matrix(&self) -> &ExtendedMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> &[CompletionRecord] {
        &self.provenance
    }

    pub fn n_species(&self) -> usize {
        self.matrix.n_species()
    }

    pub fn n_characters(&self) -> usize {
        self.matrix.n_characters()
    }

    /// All `2m` columns as species sets.
    pub fn columns(&self) -> Vec<FixedBitSet> {
        (0..2 * self.n_characters())
            .map(|col| {
                self.matrix
                    .column(col)
                    .expect("completion has no unknown cells")
            })
            .collect()
    }

    /// One species row as the set of extended columns holding `1`.
    pub fn row(&self, species: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(2 * self.n_characters());
        for col in 0..2 * self.n_characters() {
            if self.matrix.cell(species, col) == Cell::One {
                set.insert(col);
            }
        }
        set
    }

    pub fn row_values(&self, species: usize) -> Vec<u8> {
        (0..2 * self.n_characters())
            .map(|col| u8::from(self.matrix.cell(species, col) == Cell::One))
            .collect()
    }

    pub fn forbidden_submatrix(&self) -> Option<ForbiddenWitness> {
        has_forbidden_submatrix(&self.columns())
    }
}

/// Two columns and three rows inducing `(0,1)`, `(1,0)` and `(1,1)`.
/// Rows are listed in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForbiddenWitness {
    pub columns: (usize, usize),
    pub rows: [usize; 3],
}

/// Scans column pairs for the 3 × 2 forbidden pattern. `columns` holds each
/// column as the set of rows with value `1`. O(n·k²/w) for `k` columns.
pub fn has_forbidden_submatrix(columns: &[FixedBitSet]) -> Option<ForbiddenWitness> {
    for (i, a) in columns.iter().enumerate() {
        for (j, b) in columns.iter().enumerate().skip(i + 1) {
            let Some(both) = a.intersection(b).next() else {
                continue;
            };
            let Some(only_a) = a.difference(b).next() else {
                continue;
            };
            let Some(only_b) = b.difference(a).next() else {
                continue;
            };
            let mut rows = [both, only_a, only_b];
            rows.sort_unstable();
            return Some(ForbiddenWitness {
                columns: (i, j),
                rows,
            });
        }
    }
    None
}

/// Whether characters `u` and `v` exhibit all of `(0,0)`, `(0,1)`, `(1,0)`
/// and `(1,1)` across the rows.
pub fn four_gametes(m: &BinaryMatrix, u: usize, v: usize) -> bool {
    let a = m.column(u);
    let b = m.column(v);
    let n = m.n_species();
    let both = a.intersection(b).count();
    let only_a = a.difference(b).count();
    let only_b = b.difference(a).count();
    both > 0 && only_a > 0 && only_b > 0 && both + only_a + only_b < n
}

/// Characters as vertices, edges between pairs in conflict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    n_characters: usize,
    edges: Vec<(usize, usize)>,
}

impl ConflictGraph {
    pub fn build(m: &BinaryMatrix) -> Self {
        let k = m.n_characters();
        let edges = (0..k)
            .flat_map(|u| (u + 1..k).map(move |v| (u, v)))
            .filter(|&(u, v)| four_gametes(m, u, v))
            .collect();
        Self {
            n_characters: k,
            edges,
        }
    }

    pub fn n_characters(&self) -> usize {
        self.n_characters
    }

    /// Edges as `(u, v)` with `u < v`, lexicographically ordered.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).is_ok()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == u {
                Some(b)
            } else if b == u {
                Some(a)
            } else {
                None
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_residue() -> BinaryMatrix {
        BinaryMatrix::from_rows(&[
            vec![1, 1, 0, 0],
            vec![0, 1, 1, 0],
            vec![0, 0, 1, 1],
            vec![1, 0, 0, 1],
        ])
        .unwrap()
    }

    fn forbidden() -> BinaryMatrix {
        BinaryMatrix::from_rows(&[vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap()
    }

    #[test]
    fn parses_forbidden_matrix() {
        let m = BinaryMatrix::parse("3 2\n0 1\n1 0\n1 1", LoadOptions::default()).unwrap();
        assert_eq!(m.n_species(), 3);
        assert_eq!(m.n_characters(), 2);
        assert_eq!(m.row_values(0), vec![0, 1]);
        assert_eq!(m.row_values(1), vec![1, 0]);
        assert_eq!(m.row_values(2), vec![1, 1]);
        assert_eq!(m.character_label(1), "c2");
        assert_eq!(m.species_label(2), "3");
    }

    #[test]
    fn parses_minimal_matrix() {
        let m = BinaryMatrix::parse("1 1\n1", LoadOptions::default()).unwrap();
        assert_eq!((m.n_species(), m.n_characters()), (1, 1));
        assert!(m.get(0, 0));
    }

    #[test]
    fn rejects_zero_column() {
        let err = BinaryMatrix::parse("2 2\n0 0\n0 1", LoadOptions::default()).unwrap_err();
        assert!(
            matches!(err, MatrixError::ZeroColumn { column: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn drops_zero_column_on_request() {
        let opts = LoadOptions {
            drop_zero_columns: true,
        };
        let m = BinaryMatrix::parse("2 2\n0 0\n0 1", opts).unwrap();
        assert_eq!(m.n_characters(), 1);
        assert_eq!(m.character_label(0), "c2");
        assert_eq!(m.n_species(), 2);
    }

    #[test]
    fn reports_malformed_cell_coordinates() {
        let err = BinaryMatrix::parse("2 2\n0 1\n1 x", LoadOptions::default()).unwrap_err();
        match err {
            MatrixError::MalformedCell { row, column, token } => {
                assert_eq!((row, column, token.as_str()), (2, 2, "x"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn reports_dimension_mismatch() {
        assert!(matches!(
            BinaryMatrix::parse("2 2\n0 1\n1", LoadOptions::default()),
            Err(MatrixError::Dimension(_))
        ));
        assert!(matches!(
            BinaryMatrix::parse("3 2\n0 1\n1 1", LoadOptions::default()),
            Err(MatrixError::Dimension(_))
        ));
    }

    #[test]
    fn header_labels_and_comments() {
        let text = "# a comment\n# species: x,y,z\n# characters: a,b\n3 2\n0 1\n# mid\n1 0\n1 1\n";
        let m = BinaryMatrix::parse(text, LoadOptions::default()).unwrap();
        assert_eq!(m.species_label(0), "x");
        assert_eq!(m.character_index("b"), Some(1));
        let again = BinaryMatrix::parse(&m.to_text(), LoadOptions::default()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn rejects_reserved_and_duplicate_labels() {
        let bad = "# characters: a,b-c\n1 2\n1 1\n";
        assert!(matches!(
            BinaryMatrix::parse(bad, LoadOptions::default()),
            Err(MatrixError::InvalidLabel { .. })
        ));
        let dup = "# species: x,x\n2 1\n1\n0\n";
        assert!(matches!(
            BinaryMatrix::parse(dup, LoadOptions::default()),
            Err(MatrixError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn collapses_duplicate_rows() {
        let m = BinaryMatrix::parse("4 2\n1 0\n0 1\n1 0\n1 1", LoadOptions::default()).unwrap();
        assert_eq!(m.n_species(), 3);
        assert_eq!(m.n_rows(), 4);
        assert_eq!(m.species_names(0), ["1", "3"]);
        assert_eq!(m.multiplicity(0), 2);
        assert_eq!(m.species_index("3"), Some(0));
        let text = m.to_text();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
        assert_eq!(
            BinaryMatrix::parse(&text, LoadOptions::default()).unwrap(),
            m
        );
    }

    #[test]
    fn extended_matches_worked_row() {
        let m = BinaryMatrix::from_rows(&[
            vec![0, 0, 1, 1, 0],
            vec![0, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![1, 0, 0, 0, 1],
            vec![1, 1, 1, 0, 0],
        ])
        .unwrap();
        let me = ExtendedMatrix::build(&m);
        assert_eq!(me.row_string(1), "? ? 1 0 ? ? ? ? ? ?");
        assert_eq!(me.row_string(4), "1 0 1 0 1 0 ? ? ? ?");
    }

    #[test]
    fn extended_all_ones_and_single() {
        let m = BinaryMatrix::from_rows(&[vec![1, 1, 1]]).unwrap();
        let me = ExtendedMatrix::build(&m);
        assert_eq!(me.row_string(0), "1 0 1 0 1 0");
        let one = ExtendedMatrix::build(&BinaryMatrix::from_rows(&[vec![1]]).unwrap());
        assert_eq!(one.row_string(0), "1 0");
        assert!(one.is_complete());
    }

    #[test]
    fn four_gametes_sigma_residue() {
        let m = sigma_residue();
        assert!(four_gametes(&m, 0, 1));
        assert!(!four_gametes(&m, 0, 2));
        let single = BinaryMatrix::from_rows(&[vec![1, 1]]).unwrap();
        assert!(!four_gametes(&single, 0, 1));
    }

    #[test]
    fn conflict_graph_sigma_residue_is_four_cycle() {
        let g = ConflictGraph::build(&sigma_residue());
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!(g.has_edge(3, 0));
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn conflict_graph_forbidden_and_single_column() {
        assert_eq!(ConflictGraph::build(&forbidden()).edge_count(), 0);
        let single = BinaryMatrix::from_rows(&[vec![1], vec![0]]).unwrap();
        assert_eq!(ConflictGraph::build(&single).edge_count(), 0);
    }

    #[test]
    fn forbidden_witness_on_three_rows() {
        let w = forbidden().forbidden_submatrix().unwrap();
        assert_eq!(w.columns, (0, 1));
        assert_eq!(w.rows, [0, 1, 2]);
    }

    #[test]
    fn no_forbidden_with_two_rows() {
        let m = BinaryMatrix::from_rows(&[vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        assert!(m.forbidden_submatrix().is_none());
    }

    #[test]
    fn worked_completion_completion_is_forbidden_free() {
        let m = BinaryMatrix::from_rows(&[
            vec![0, 0, 1, 1, 0],
            vec![0, 1, 0, 0, 0],
            vec![1, 0, 0, 0, 0],
            vec![1, 0, 0, 0, 1],
            vec![1, 1, 1, 0, 0],
        ])
        .unwrap();
        let c = Completion::from_rows(
            &m,
            &[
                vec![1, 1, 1, 1, 1, 0, 1, 0, 0, 0],
                vec![0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 1, 1, 1, 1, 0, 0, 0, 0],
                vec![1, 0, 1, 1, 1, 1, 0, 0, 1, 0],
                vec![1, 0, 1, 0, 1, 0, 0, 0, 0, 0],
            ],
        )
        .unwrap();
        assert!(c.forbidden_submatrix().is_none());
        for j in 0..5 {
            assert!(c.matrix().persistent(j).is_subset(&c.columns()[2 * j]));
        }
    }

    #[test]
    fn completion_rejects_half_pairs() {
        let m = forbidden();
        let err =
            Completion::from_rows(&m, &[vec![1, 0, 1, 0], vec![1, 0, 1, 0], vec![1, 0, 1, 0]]);
        assert!(err.is_err());
        let mut me = ExtendedMatrix::build(&m);
        assert!(Completion::new(me.clone()).is_err());
        assert!(me.resolve_pair(0, 0, true));
        assert!(!me.resolve_pair(0, 0, false));
        assert_eq!(me.pair(0, 0), PairState::Persistent);
    }
}
