#![allow(dead_code)]

use perphylo::{BinaryMatrix, LoadOptions};
use rand::Rng;

/// Every 0/1 matrix of the given shape without an all-zero column, built
/// from the bits of a counter.
pub fn all_matrices(n: usize, m: usize) -> impl Iterator<Item = BinaryMatrix> {
    (0u64..1 << (n * m)).filter_map(move |code| {
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|i| (0..m).map(|j| (code >> (i * m + j) & 1) as u8).collect())
            .collect();
        BinaryMatrix::from_rows(&rows).ok()
    })
}

/// Number of zero-column-free matrices over all shapes up to `n × m`,
/// counted by inclusion-exclusion: a shape `a × b` has `(2^a - 1)^b`.
pub fn count_zero_column_free(n: usize, m: usize) -> usize {
    let mut total = 0;
    for a in 1..=n {
        for b in 1..=m {
            total += ((1usize << a) - 1).pow(b as u32);
        }
    }
    total
}

/// A random matrix whose zero columns are patched with a single 1.
pub fn random_matrix(rng: &mut impl Rng, n: usize, m: usize, density: f64) -> BinaryMatrix {
    let mut rows: Vec<Vec<u8>> = (0..n)
        .map(|_| (0..m).map(|_| u8::from(rng.gen_bool(density))).collect())
        .collect();
    for j in 0..m {
        if rows.iter().all(|r| r[j] == 0) {
            let i = rng.gen_range(0..n);
            rows[i][j] = 1;
        }
    }
    BinaryMatrix::from_rows(&rows).unwrap()
}

pub fn rows_of(m: &BinaryMatrix) -> Vec<Vec<u8>> {
    (0..m.n_species()).map(|s| m.row_values(s)).collect()
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> BinaryMatrix {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    BinaryMatrix::parse(&text, LoadOptions::default()).unwrap()
}
