//! Standard Young tableaux, their total order and the stacking map.
//!
//! Entries and row/column indices are 1-based at every public boundary. A
//! tableau is stored row by row; its column word `σ₁…σ_N` (the column holding
//! each entry) determines it and drives the ordering.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::partitions::{mu_sigma, LeviDatum, Partition, PartitionError};

/// Largest weight [`enumerate_standard`] accepts.
pub const DEFAULT_ENUMERATION_BOUND: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("row lengths {0:?} do not form a partition")]
    RowLengths(Vec<usize>),
    #[error("tableau has shape {found}, expected {expected}")]
    ShapeMismatch {
        expected: Partition,
        found: Partition,
    },
    #[error("entry {entry} appears more than once")]
    DuplicateEntry { entry: usize },
    #[error("entry {entry} is outside 1..={max}")]
    EntryOutOfRange { entry: usize, max: usize },
    #[error("entry {entry} is missing")]
    MissingEntry { entry: usize },
    #[error("row {row} is not increasing at column {col}")]
    RowNotIncreasing { row: usize, col: usize },
    #[error("column {col} is not increasing at row {row}")]
    ColumnNotIncreasing { row: usize, col: usize },
    #[error("expected {expected} tableaux, got {found}")]
    TupleLength { expected: usize, found: usize },
    #[error("shape {shape} has weight {weight}, above the enumeration bound {bound}")]
    EnumerationBound {
        shape: Partition,
        weight: usize,
        bound: usize,
    },
    #[error("restriction index {index} outside 1..={max}")]
    RestrictIndex { index: usize, max: usize },
    #[error("nested sequence must start at the empty partition")]
    NestedStart,
    #[error("step {step} of the nested sequence does not add exactly one box")]
    NestedStep { step: usize },
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// A filling of a Young diagram by `1..=N`, increasing along rows and down columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "Vec<Vec<usize>>")]
pub struct StandardTableau {
    #[serde(skip)]
    shape: Partition,
    rows: Vec<Vec<usize>>,
}

impl From<StandardTableau> for Vec<Vec<usize>> {
    fn from(t: StandardTableau) -> Self {
        t.rows
    }
}

impl<'de> Deserialize<'de> for StandardTableau {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<usize>>::deserialize(deserializer)?;
        StandardTableau::new(rows).map_err(serde::de::Error::custom)
    }
}

/// Checks `rows` against `shape` and every standardness condition.
pub fn validate(rows: Vec<Vec<usize>>, shape: &Partition) -> Result<StandardTableau, TableauError> {
    let lengths: Vec<usize> = rows.iter().map(Vec::len).collect();
    let found =
        Partition::new(lengths.clone()).map_err(|_| TableauError::RowLengths(lengths.clone()))?;
    if found.len() != rows.len() {
        // an empty row in the middle or at the end
        return Err(TableauError::RowLengths(lengths));
    }
    if &found != shape {
        return Err(TableauError::ShapeMismatch {
            expected: shape.clone(),
            found,
        });
    }
    let n = shape.weight();
    let mut seen = vec![false; n + 1];
    for row in &rows {
        for &x in row {
            if x == 0 || x > n {
                return Err(TableauError::EntryOutOfRange { entry: x, max: n });
            }
            if seen[x] {
                return Err(TableauError::DuplicateEntry { entry: x });
            }
            seen[x] = true;
        }
    }
    // n boxes holding distinct values in 1..=n leave nothing missing, but keep
    // the diagnostic for completeness of the check
    if let Some(entry) = (1..=n).find(|&x| !seen[x]) {
        return Err(TableauError::MissingEntry { entry });
    }
    for (r, row) in rows.iter().enumerate() {
        for c in 1..row.len() {
            if row[c - 1] >= row[c] {
                return Err(TableauError::RowNotIncreasing {
                    row: r + 1,
                    col: c + 1,
                });
            }
        }
        if r > 0 {
            for (c, &x) in row.iter().enumerate() {
                if rows[r - 1][c] >= x {
                    return Err(TableauError::ColumnNotIncreasing {
                        row: r + 1,
                        col: c + 1,
                    });
                }
            }
        }
    }
    Ok(StandardTableau {
        shape: shape.clone(),
        rows,
    })
}

impl StandardTableau {
    /// Validates `rows`, reading the shape off the row lengths.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self, TableauError> {
        let lengths: Vec<usize> = rows.iter().map(Vec::len).collect();
        let shape =
            Partition::new(lengths.clone()).map_err(|_| TableauError::RowLengths(lengths))?;
        validate(rows, &shape)
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<usize>>) -> Self {
        let shape = Partition::from_unsorted(rows.iter().map(Vec::len).collect());
        StandardTableau { shape, rows }
    }

    /// The empty tableau of the empty shape.
    pub fn empty() -> Self {
        StandardTableau {
            shape: Partition::empty(),
            rows: Vec::new(),
        }
    }

    /// The tableau numbered left to right, top to bottom.
    pub fn row_reading(shape: &Partition) -> Self {
        let mut next = 0;
        let rows = shape
            .parts()
            .iter()
            .map(|&len| {
                (0..len)
                    .map(|_| {
                        next += 1;
                        next
                    })
                    .collect()
            })
            .collect();
        StandardTableau {
            shape: shape.clone(),
            rows,
        }
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn weight(&self) -> usize {
        self.shape.weight()
    }

    /// Entry at 1-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> Option<usize> {
        self.rows
            .get(row.checked_sub(1)?)?
            .get(col.checked_sub(1)?)
            .copied()
    }

    /// `σ_i` for `i = 1..=N`: the 1-based column holding entry `i`.
    pub fn column_word(&self) -> Vec<usize> {
        let mut word = vec![0; self.weight()];
        for row in &self.rows {
            for (c, &x) in row.iter().enumerate() {
                word[x - 1] = c + 1;
            }
        }
        word
    }

    /// 1-based `(row, col)` of each entry, indexed by `entry - 1`.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut pos = vec![(0, 0); self.weight()];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                pos[x - 1] = (r + 1, c + 1);
            }
        }
        pos
    }

    /// Aligned text rendering, one line per row, cells padded to the widest entry.
    pub fn render(&self) -> String {
        let width = self.weight().max(1).to_string().len();
        let lines: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| format!("{x:>width$}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        lines.join("\n")
    }
}

impl fmt::Display for StandardTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// The total order on tableaux of one shape: `σ < τ` when, at the largest
/// index where the column words differ, `σ_i < τ_i`.
pub fn compare(sigma: &StandardTableau, tau: &StandardTableau) -> Result<Ordering, TableauError> {
    if sigma.shape != tau.shape {
        return Err(TableauError::ShapeMismatch {
            expected: sigma.shape.clone(),
            found: tau.shape.clone(),
        });
    }
    Ok(order_key(sigma).cmp(&order_key(tau)))
}

/// Column word read from the last entry backwards; its lexicographic order
/// is the tableau order.
pub fn order_key(t: &StandardTableau) -> Vec<usize> {
    let mut word = t.column_word();
    word.reverse();
    word
}

/// All standard tableaux of `shape` in ascending order.
pub fn enumerate_standard(shape: &Partition) -> Result<Vec<StandardTableau>, TableauError> {
    enumerate_standard_bounded(shape, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_standard_bounded(
    shape: &Partition,
    bound: usize,
) -> Result<Vec<StandardTableau>, TableauError> {
    let n = shape.weight();
    if n > bound {
        return Err(TableauError::EnumerationBound {
            shape: shape.clone(),
            weight: n,
            bound,
        });
    }
    let mut out = Vec::new();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); shape.len()];
    fill(shape, &mut rows, 1, n, &mut out);
    out.sort_by_cached_key(order_key);
    Ok(out)
}

fn fill(
    shape: &Partition,
    rows: &mut [Vec<usize>],
    next: usize,
    n: usize,
    out: &mut Vec<StandardTableau>,
) {
    if next > n {
        out.push(StandardTableau {
            shape: shape.clone(),
            rows: rows.to_vec(),
        });
        return;
    }
    for r in 0..rows.len() {
        let len = rows[r].len();
        let fits = len < shape.part(r) && (r == 0 || rows[r - 1].len() > len);
        if fits {
            rows[r].push(next);
            fill(shape, rows, next + 1, n, out);
            rows[r].pop();
        }
    }
}

/// A uniformly random standard tableau of `shape` (hook walk).
pub fn random_standard<R: Rng + ?Sized>(shape: &Partition, rng: &mut R) -> StandardTableau {
    let mut current: Vec<usize> = shape.parts().to_vec();
    let n = shape.weight();
    let mut rows: Vec<Vec<usize>> = shape.parts().iter().map(|&l| vec![0; l]).collect();
    for entry in (1..=n).rev() {
        let remaining: usize = current.iter().sum();
        let mut pick = rng.gen_range(0..remaining);
        let mut r = 0;
        while pick >= current[r] {
            pick -= current[r];
            r += 1;
        }
        let mut c = pick;
        loop {
            let arm = current[r] - c - 1;
            let leg = current[r + 1..].iter().take_while(|&&len| len > c).count();
            if arm + leg == 0 {
                break;
            }
            let step = rng.gen_range(0..arm + leg);
            if step < arm {
                c += step + 1;
            } else {
                r += step - arm + 1;
            }
        }
        rows[r][c] = entry;
        current[r] -= 1;
    }
    StandardTableau {
        shape: shape.clone(),
        rows,
    }
}

/// The stacking map: row `i` of the result concatenates row `i` of each
/// `tuple[k]`, with entries of block `k` shifted by `Σ_{l<k} λ_l`.
pub fn stack(
    datum: &LeviDatum,
    tuple: &[StandardTableau],
) -> Result<StandardTableau, TableauError> {
    if tuple.len() != datum.num_blocks() {
        return Err(TableauError::TupleLength {
            expected: datum.num_blocks(),
            found: tuple.len(),
        });
    }
    for (t, mu) in tuple.iter().zip(datum.blocks()) {
        if t.shape() != mu {
            return Err(TableauError::ShapeMismatch {
                expected: mu.clone(),
                found: t.shape().clone(),
            });
        }
    }
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); datum.max_length()];
    let mut shift = 0;
    for (t, &lambda) in tuple.iter().zip(datum.levi_shape().parts()) {
        for (row, block_row) in rows.iter_mut().zip(t.rows()) {
            row.extend(block_row.iter().map(|x| x + shift));
        }
        shift += lambda;
    }
    Ok(StandardTableau {
        shape: mu_sigma(datum),
        rows,
    })
}

/// The tableau formed by the entries `<= index`.
pub fn restrict_tableau(
    sigma: &StandardTableau,
    index: usize,
) -> Result<StandardTableau, TableauError> {
    let n = sigma.weight();
    if index == 0 || index > n {
        return Err(TableauError::RestrictIndex { index, max: n });
    }
    Ok(truncate(sigma, index))
}

fn truncate(sigma: &StandardTableau, index: usize) -> StandardTableau {
    let rows: Vec<Vec<usize>> = sigma
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .copied()
                .take_while(|&x| x <= index)
                .collect::<Vec<_>>()
        })
        .filter(|row| !row.is_empty())
        .collect();
    StandardTableau::from_rows_unchecked(rows)
}

/// `∅ = λ⁽⁰⁾ ⊂ λ⁽¹⁾ ⊂ … ⊂ λ⁽ᴺ⁾`, each step adding one box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct NestedPartitionSequence(Vec<Partition>);

impl NestedPartitionSequence {
    pub fn new(seq: Vec<Partition>) -> Result<Self, TableauError> {
        if seq.first().is_none_or(|p| !p.is_empty()) {
            return Err(TableauError::NestedStart);
        }
        for (step, w) in seq.windows(2).enumerate() {
            if added_row(&w[0], &w[1]).is_none() {
                return Err(TableauError::NestedStep { step: step + 1 });
            }
        }
        Ok(NestedPartitionSequence(seq))
    }

    pub fn terms(&self) -> &[Partition] {
        &self.0
    }

    pub fn last(&self) -> &Partition {
        self.0
            .last()
            .expect("sequence starts at the empty partition")
    }
}

impl<'de> Deserialize<'de> for NestedPartitionSequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let seq = Vec::<Partition>::deserialize(deserializer)?;
        NestedPartitionSequence::new(seq).map_err(serde::de::Error::custom)
    }
}

/// The 0-based row in which `bigger` has one more box than `smaller`.
fn added_row(smaller: &Partition, bigger: &Partition) -> Option<usize> {
    if bigger.weight() != smaller.weight() + 1 || !bigger.contains(smaller) {
        return None;
    }
    (0..bigger.len()).find(|&r| bigger.part(r) == smaller.part(r) + 1)
}

/// Entry `i` goes into the box added at step `i`.
pub fn tableau_from_nested(seq: &NestedPartitionSequence) -> StandardTableau {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (i, w) in seq.0.windows(2).enumerate() {
        let r = added_row(&w[0], &w[1]).expect("validated on construction");
        if r == rows.len() {
            rows.push(Vec::new());
        }
        rows[r].push(i + 1);
    }
    StandardTableau {
        shape: seq.last().clone(),
        rows,
    }
}

pub fn nested_from_tableau(sigma: &StandardTableau) -> NestedPartitionSequence {
    let seq = (0..=sigma.weight())
        .map(|i| truncate(sigma, i).shape.clone())
        .collect();
    NestedPartitionSequence(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::Composition;

    fn t(rows: &[&[usize]]) -> StandardTableau {
        StandardTableau::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(vec![vec![1, 3, 4], vec![2, 5]], &p(&[3, 2])).is_ok());
        let col: Vec<Vec<usize>> = (1..=6).map(|i| vec![i]).collect();
        assert!(validate(col, &Partition::column(6)).is_ok());
        assert_eq!(
            validate(vec![vec![2, 1]], &p(&[2])),
            Err(TableauError::RowNotIncreasing { row: 1, col: 2 })
        );
    }

    #[test]
    fn validate_diagnostics_are_distinct() {
        assert_eq!(
            validate(vec![vec![1, 2], vec![2]], &p(&[2, 1])),
            Err(TableauError::DuplicateEntry { entry: 2 })
        );
        assert_eq!(
            validate(vec![vec![1, 4], vec![2]], &p(&[2, 1])),
            Err(TableauError::EntryOutOfRange { entry: 4, max: 3 })
        );
        assert_eq!(
            validate(vec![vec![2, 3], vec![1]], &p(&[2, 1])),
            Err(TableauError::ColumnNotIncreasing { row: 2, col: 1 })
        );
        assert!(matches!(
            validate(vec![vec![1, 2], vec![3]], &p(&[3])),
            Err(TableauError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            StandardTableau::new(vec![vec![1], vec![2, 3]]),
            Err(TableauError::RowLengths(_))
        ));
        assert!(matches!(
            StandardTableau::new(vec![vec![1], vec![]]),
            Err(TableauError::RowLengths(_))
        ));
    }

    #[test]
    fn column_word_and_order() {
        let a = t(&[&[1, 2, 3], &[4, 5]]);
        assert_eq!(a.column_word(), vec![1, 2, 3, 1, 2]);
        let b = t(&[&[1, 2, 4], &[3, 5]]);
        assert_eq!(compare(&a, &b), Ok(Ordering::Less));
        assert_eq!(compare(&b, &a), Ok(Ordering::Greater));
        assert_eq!(compare(&a, &a), Ok(Ordering::Equal));
        let d = t(&[&[1, 2, 5], &[3, 4]]);
        let e = t(&[&[1, 3, 5], &[2, 4]]);
        assert_eq!(compare(&d, &e), Ok(Ordering::Less));
        assert!(compare(&a, &t(&[&[1, 2], &[3]])).is_err());
    }

    #[test]
    fn enumerate_small_shapes() {
        let chain = enumerate_standard(&p(&[3, 2])).unwrap();
        let rows: Vec<_> = chain.iter().map(|x| x.rows().to_vec()).collect();
        assert_eq!(
            rows,
            vec![
                vec![vec![1, 2, 3], vec![4, 5]],
                vec![vec![1, 2, 4], vec![3, 5]],
                vec![vec![1, 3, 4], vec![2, 5]],
                vec![vec![1, 2, 5], vec![3, 4]],
                vec![vec![1, 3, 5], vec![2, 4]],
            ]
        );
        assert_eq!(enumerate_standard(&p(&[1, 1])).unwrap().len(), 1);
        assert_eq!(enumerate_standard(&p(&[2, 2])).unwrap().len(), 2);
        assert_eq!(
            enumerate_standard(&Partition::empty()).unwrap(),
            vec![StandardTableau::empty()]
        );
        assert!(matches!(
            enumerate_standard_bounded(&p(&[3, 2]), 4),
            Err(TableauError::EnumerationBound { weight: 5, .. })
        ));
    }

    #[test]
    fn stack_worked_example() {
        let d = LeviDatum::new(
            Composition::new(vec![6, 5, 4]).unwrap(),
            vec![p(&[3, 3]), p(&[2, 2, 1]), p(&[1, 1, 1, 1])],
        )
        .unwrap();
        let tuple = [
            t(&[&[1, 3, 4], &[2, 5, 6]]),
            t(&[&[1, 3], &[2, 5], &[4]]),
            t(&[&[1], &[2], &[3], &[4]]),
        ];
        let s = stack(&d, &tuple).unwrap();
        assert_eq!(
            s.rows(),
            &[
                vec![1, 3, 4, 7, 9, 12],
                vec![2, 5, 6, 8, 11, 13],
                vec![10, 14],
                vec![15]
            ]
        );
        assert_eq!(s.entry(3, 2), Some(14));
        assert_eq!(s.entry(3, 1), Some(10));
        assert_eq!(s.shape(), &p(&[6, 6, 2, 1]));
    }

    #[test]
    fn stack_trivial_cases() {
        let sigma = t(&[&[1, 3, 4], &[2, 5]]);
        let d = LeviDatum::from_blocks(vec![p(&[3, 2])]).unwrap();
        assert_eq!(stack(&d, std::slice::from_ref(&sigma)).unwrap(), sigma);

        let d = LeviDatum::from_blocks(vec![p(&[1]); 4]).unwrap();
        let ones = vec![t(&[&[1]]); 4];
        assert_eq!(stack(&d, &ones).unwrap().rows(), &[vec![1, 2, 3, 4]]);

        assert!(matches!(
            stack(&d, &ones[..3]),
            Err(TableauError::TupleLength {
                expected: 4,
                found: 3
            })
        ));
        let d2 = LeviDatum::from_blocks(vec![p(&[2])]).unwrap();
        assert!(matches!(
            stack(&d2, &[t(&[&[1], &[2]])]),
            Err(TableauError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn nested_sequence_bijection() {
        let seq = NestedPartitionSequence::new(vec![
            Partition::empty(),
            p(&[1]),
            p(&[1, 1]),
            p(&[2, 1]),
            p(&[3, 1]),
            p(&[3, 2]),
        ])
        .unwrap();
        let sigma = tableau_from_nested(&seq);
        assert_eq!(sigma, t(&[&[1, 3, 4], &[2, 5]]));
        assert_eq!(nested_from_tableau(&sigma), seq);

        let rows: Vec<Partition> = (0..=4).map(Partition::row).collect();
        let seq = NestedPartitionSequence::new(rows).unwrap();
        assert_eq!(tableau_from_nested(&seq).rows(), &[vec![1, 2, 3, 4]]);

        assert_eq!(
            NestedPartitionSequence::new(vec![p(&[1])]),
            Err(TableauError::NestedStart)
        );
        assert_eq!(
            NestedPartitionSequence::new(vec![Partition::empty(), p(&[2])]),
            Err(TableauError::NestedStep { step: 1 })
        );
    }

    #[test]
    fn nested_roundtrip_exhaustive() {
        for n in 0..=8 {
            for lambda in Partition::all(n) {
                for sigma in enumerate_standard(&lambda).unwrap() {
                    let seq = nested_from_tableau(&sigma);
                    assert_eq!(tableau_from_nested(&seq), sigma);
                }
            }
        }
    }

    #[test]
    fn restrict_examples() {
        let sigma = t(&[&[1, 3, 4], &[2, 5]]);
        assert_eq!(restrict_tableau(&sigma, 3).unwrap(), t(&[&[1, 3], &[2]]));
        assert_eq!(restrict_tableau(&sigma, 5).unwrap(), sigma);
        assert!(restrict_tableau(&sigma, 0).is_err());
        assert!(restrict_tableau(&sigma, 6).is_err());
    }

    #[test]
    fn render_pads_cells() {
        let s = t(&[
            &[1, 3, 4, 7, 9, 12],
            &[2, 5, 6, 8, 11, 13],
            &[10, 14],
            &[15],
        ]);
        assert_eq!(
            s.render(),
            " 1  3  4  7  9 12\n 2  5  6  8 11 13\n10 14\n15"
        );
    }

    #[test]
    fn serde_as_rows() {
        let sigma = t(&[&[1, 3, 4], &[2, 5]]);
        let json = serde_json::to_string(&sigma).unwrap();
        assert_eq!(json, "[[1,3,4],[2,5]]");
        assert_eq!(
            serde_json::from_str::<StandardTableau>(&json).unwrap(),
            sigma
        );
        assert!(serde_json::from_str::<StandardTableau>("[[2,1]]").is_err());
    }
}
