//! Partitions, compositions and Levi data.
//!
//! A [`Partition`] is the Jordan type of a nilpotent operator and the shape of
//! a Young diagram. A [`Composition`] records the block sizes of a Levi
//! subalgebra in their given order, and a [`LeviDatum`] pairs those blocks
//! with one partition per block, i.e. a nilpotent orbit of the Levi.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("parts must be weakly decreasing, found {prev} followed by {next}")]
    NotDecreasing { prev: usize, next: usize },
    #[error("composition parts must be positive (part {index} is zero)")]
    ZeroPart { index: usize },
    #[error("block {block} has weight {found}, expected {expected}")]
    BlockWeight {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error("levi shape has {shape} blocks but {partitions} block partitions were given")]
    BlockCount { shape: usize, partitions: usize },
    #[error("cannot parse '{0}' as a list of non-negative integers")]
    Parse(String),
}

/// A weakly decreasing sequence of positive integers.
///
/// Trailing zeros are stripped on construction, so two partitions are equal
/// exactly when their nonzero parts agree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Default)]
#[serde(transparent)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self, PartitionError> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        for w in parts.windows(2) {
            if w[0] < w[1] {
                return Err(PartitionError::NotDecreasing {
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(Partition(parts))
    }

    /// Sorts arbitrary non-negative parts into a partition.
    pub fn from_unsorted(mut parts: Vec<usize>) -> Self {
        parts.retain(|&x| x > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// The one-row partition `(n)`.
    pub fn row(n: usize) -> Self {
        if n == 0 {
            Self::empty()
        } else {
            Partition(vec![n])
        }
    }

    /// The one-column partition `(1^n)`.
    pub fn column(n: usize) -> Self {
        Partition(vec![1; n])
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Part `i` (0-based), with the convention that missing parts are zero.
    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// The conjugate partition: part `j` counts the rows of length `>= j`.
    pub fn transpose(&self) -> Partition {
        let width = self.part(0);
        let parts = (1..=width)
            .map(|j| self.0.iter().take_while(|&&r| r >= j).count())
            .collect();
        Partition(parts)
    }

    /// Whether the Young diagram of `other` fits inside that of `self`.
    pub fn contains(&self, other: &Partition) -> bool {
        other.len() <= self.len() && (0..other.len()).all(|i| self.0[i] >= other.0[i])
    }

    /// All partitions of `n` in descending lexicographic order, starting at `(n)`.
    pub fn all(n: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec(remaining: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if remaining == 0 {
                out.push(Partition(current.clone()));
                return;
            }
            for part in (1..=remaining.min(max)).rev() {
                current.push(part);
                rec(remaining - part, part, current, out);
                current.pop();
            }
        }
        rec(n, n, &mut current, &mut out);
        out
    }

    /// Parses `"3,2,1"`; the empty string is the empty partition.
    pub fn parse(s: &str) -> Result<Self, PartitionError> {
        Partition::new(parse_list(s)?)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parts = Vec::<usize>::deserialize(deserializer)?;
        Partition::new(parts).map_err(serde::de::Error::custom)
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>, PartitionError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| PartitionError::Parse(s.to_string()))
}

/// An ordered sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self, PartitionError> {
        if let Some(index) = parts.iter().position(|&p| p == 0) {
            return Err(PartitionError::ZeroPart { index });
        }
        Ok(Composition(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The partition with the same parts, sorted.
    pub fn to_partition(&self) -> Partition {
        Partition::from_unsorted(self.0.clone())
    }

    /// Partial sums `0, λ₁, λ₁+λ₂, …, N` (length `n + 1`).
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(0);
        for &p in &self.0 {
            acc += p;
            out.push(acc);
        }
        out
    }

    /// All compositions of `n`, ordered lexicographically by parts.
    pub fn all(n: usize) -> Vec<Composition> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        fn rec(remaining: usize, current: &mut Vec<usize>, out: &mut Vec<Composition>) {
            if remaining == 0 {
                out.push(Composition(current.clone()));
                return;
            }
            for part in 1..=remaining {
                current.push(part);
                rec(remaining - part, current, out);
                current.pop();
            }
        }
        if n > 0 {
            rec(n, &mut current, &mut out);
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self, PartitionError> {
        Composition::new(parse_list(s)?)
    }
}

impl<'de> Deserialize<'de> for Composition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parts = Vec::<usize>::deserialize(deserializer)?;
        Composition::new(parts).map_err(serde::de::Error::custom)
    }
}

/// A composition `λ ⊨ N` together with partitions `μ_i ⊢ λ_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawLeviDatum")]
pub struct LeviDatum {
    levi_shape: Composition,
    block_partitions: Vec<Partition>,
}

#[derive(Deserialize)]
struct RawLeviDatum {
    levi_shape: Composition,
    block_partitions: Vec<Partition>,
}

impl TryFrom<RawLeviDatum> for LeviDatum {
    type Error = PartitionError;

    fn try_from(raw: RawLeviDatum) -> Result<Self, Self::Error> {
        LeviDatum::new(raw.levi_shape, raw.block_partitions)
    }
}

impl LeviDatum {
    pub fn new(levi_shape: Composition, blocks: Vec<Partition>) -> Result<Self, PartitionError> {
        if levi_shape.len() != blocks.len() {
            return Err(PartitionError::BlockCount {
                shape: levi_shape.len(),
                partitions: blocks.len(),
            });
        }
        for (block, (mu, &lambda)) in blocks.iter().zip(levi_shape.parts()).enumerate() {
            if mu.weight() != lambda {
                return Err(PartitionError::BlockWeight {
                    block: block + 1,
                    expected: lambda,
                    found: mu.weight(),
                });
            }
        }
        Ok(LeviDatum {
            levi_shape,
            block_partitions: blocks,
        })
    }

    /// Builds the datum whose Levi shape is read off the block weights.
    pub fn from_blocks(blocks: Vec<Partition>) -> Result<Self, PartitionError> {
        let shape = Composition::new(blocks.iter().map(Partition::weight).collect())?;
        LeviDatum::new(shape, blocks)
    }

    /// Parses `"3,3;2,2,1;1,1,1,1"`, optionally checked against a Levi shape `"6,5,4"`.
    pub fn parse(blocks: &str, shape: Option<&str>) -> Result<Self, PartitionError> {
        let parts = blocks
            .split(';')
            .map(Partition::parse)
            .collect::<Result<Vec<_>, _>>()?;
        match shape {
            Some(s) => LeviDatum::new(Composition::parse(s)?, parts),
            None => LeviDatum::from_blocks(parts),
        }
    }

    pub fn levi_shape(&self) -> &Composition {
        &self.levi_shape
    }

    pub fn blocks(&self) -> &[Partition] {
        &self.block_partitions
    }

    /// Number of blocks `n`.
    pub fn num_blocks(&self) -> usize {
        self.block_partitions.len()
    }

    /// `m = max_i ℓ(μ_i)`.
    pub fn max_length(&self) -> usize {
        self.block_partitions
            .iter()
            .map(Partition::len)
            .max()
            .unwrap_or(0)
    }

    pub fn weight(&self) -> usize {
        self.levi_shape.weight()
    }

    /// Shift applied to block `k` (0-based): `Σ_{l<k} λ_l`.
    pub fn offset(&self, k: usize) -> usize {
        self.levi_shape.parts()[..k].iter().sum()
    }

    /// Every Levi datum of weight `n`: each composition of `n`, then each
    /// choice of block partitions in descending-lex order per block.
    pub fn all(n: usize) -> Vec<LeviDatum> {
        fn rec(
            shape: &Composition,
            choices: &[Vec<Partition>],
            current: &mut Vec<Partition>,
            out: &mut Vec<LeviDatum>,
        ) {
            let k = current.len();
            if k == choices.len() {
                out.push(LeviDatum {
                    levi_shape: shape.clone(),
                    block_partitions: current.clone(),
                });
                return;
            }
            for mu in &choices[k] {
                current.push(mu.clone());
                rec(shape, choices, current, out);
                current.pop();
            }
        }
        let mut out = Vec::new();
        for shape in Composition::all(n) {
            let choices: Vec<Vec<Partition>> =
                shape.parts().iter().map(|&l| Partition::all(l)).collect();
            rec(&shape, &choices, &mut Vec::new(), &mut out);
        }
        out
    }

    /// The datum formed by the blocks `range`, keeping their order.
    pub fn sub_datum(&self, range: std::ops::Range<usize>) -> LeviDatum {
        LeviDatum {
            levi_shape: Composition(self.levi_shape.0[range.clone()].to_vec()),
            block_partitions: self.block_partitions[range].to_vec(),
        }
    }
}

impl fmt::Display for LeviDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, mu) in self.block_partitions.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            let s: Vec<String> = mu.parts().iter().map(|p| p.to_string()).collect();
            write!(f, "{}", s.join(","))?;
        }
        Ok(())
    }
}

/// The partition of the orbit induced from `d`: `μ^Σ_j = Σ_i μ_{i,j}`.
///
/// The sum runs over all `n` blocks with zero padding past each block's length.
pub fn mu_sigma(d: &LeviDatum) -> Partition {
    let m = d.max_length();
    let parts = (0..m)
        .map(|j| d.blocks().iter().map(|mu| mu.part(j)).sum())
        .collect();
    // row sums of weakly decreasing rows are weakly decreasing
    Partition(parts)
}

/// Same partition as [`mu_sigma`], computed by inducing from the zero orbit:
/// concatenate the transposes `μ_i^⊤`, sort, and transpose back.
pub fn induced_partition_oracle(d: &LeviDatum) -> Partition {
    let concatenated: Vec<usize> = d.blocks().iter().flat_map(|mu| mu.transpose().0).collect();
    Partition::from_unsorted(concatenated).transpose()
}

/// `½ Σ_i λ^⊤_i (λ^⊤_i − 1)`.
pub fn springer_fibre_dimension(lambda: &Partition) -> usize {
    lambda
        .transpose()
        .parts()
        .iter()
        .map(|&c| c * (c - 1))
        .sum::<usize>()
        / 2
}

/// `Σ_i (λ^⊤_i)²`, the dimension of the centraliser of a nilpotent of type `λ`.
pub fn centraliser_dimension(lambda: &Partition) -> usize {
    lambda.transpose().parts().iter().map(|&c| c * c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn construction_normalizes_and_rejects() {
        assert_eq!(p(&[3, 1, 0, 0]), p(&[3, 1]));
        assert!(matches!(
            Partition::new(vec![1, 2]),
            Err(PartitionError::NotDecreasing { prev: 1, next: 2 })
        ));
        assert!(Composition::new(vec![2, 0, 1]).is_err());
        assert_eq!(
            Composition::new(vec![1, 3]).unwrap().to_partition(),
            p(&[3, 1])
        );
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(p(&[3, 2]).transpose(), p(&[2, 2, 1]));
        assert_eq!(p(&[5]).transpose(), Partition::column(5));
        assert_eq!(p(&[4, 3, 2, 2, 2, 2]).transpose(), p(&[6, 6, 2, 1]));
        assert_eq!(Partition::empty().transpose(), Partition::empty());
    }

    #[test]
    fn transpose_is_involution() {
        for n in 0..=20 {
            for lambda in Partition::all(n) {
                assert_eq!(lambda.transpose().transpose(), lambda);
                assert_eq!(lambda.transpose().weight(), n);
            }
        }
    }

    #[test]
    fn partition_enumeration_order_and_counts() {
        let five: Vec<String> = Partition::all(5).iter().map(|l| l.to_string()).collect();
        assert_eq!(
            five,
            [
                "(5)",
                "(4,1)",
                "(3,2)",
                "(3,1,1)",
                "(2,2,1)",
                "(2,1,1,1)",
                "(1,1,1,1,1)"
            ]
        );
        // p(n) for n = 0..=12
        let counts = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77];
        for (n, &c) in counts.iter().enumerate() {
            assert_eq!(Partition::all(n).len(), c);
        }
        assert_eq!(Composition::all(6).len(), 32);
    }

    #[test]
    fn mu_sigma_examples() {
        let d = LeviDatum::parse("3,3;2,2,1;1,1,1,1", Some("6,5,4")).unwrap();
        assert_eq!(mu_sigma(&d), p(&[6, 6, 2, 1]));
        assert_eq!(induced_partition_oracle(&d), p(&[6, 6, 2, 1]));

        let d = LeviDatum::parse("4,2,1;3,2;3,3,2,2,1,1", Some("7,5,12")).unwrap();
        assert_eq!(mu_sigma(&d), p(&[10, 7, 3, 2, 1, 1]));

        let single = LeviDatum::from_blocks(vec![p(&[3, 1, 1])]).unwrap();
        assert_eq!(mu_sigma(&single), p(&[3, 1, 1]));
        assert_eq!(induced_partition_oracle(&single), p(&[3, 1, 1]));
    }

    #[test]
    fn oracle_intermediate_matches_worked_values() {
        // transposes (2,2,2),(3,2),(4) concatenate to ν = (4,3,2,2,2,2)
        let d = LeviDatum::parse("3,3;2,2,1;1,1,1,1", None).unwrap();
        let nu = Partition::from_unsorted(
            d.blocks()
                .iter()
                .flat_map(|m| m.transpose().parts().to_vec())
                .collect(),
        );
        assert_eq!(nu, p(&[4, 3, 2, 2, 2, 2]));
    }

    #[test]
    fn levi_datum_validation() {
        assert!(matches!(
            LeviDatum::parse("3,3;2,1", Some("6,4")),
            Err(PartitionError::BlockWeight {
                block: 2,
                expected: 4,
                found: 3
            })
        ));
        assert!(matches!(
            LeviDatum::parse("3", Some("2,1")),
            Err(PartitionError::BlockCount { .. })
        ));
        let d = LeviDatum::parse("2,1;1,1", None).unwrap();
        assert_eq!(d.levi_shape().parts(), &[3, 2]);
        assert_eq!(d.max_length(), 2);
        assert_eq!(d.offset(1), 3);
        assert_eq!(d.to_string(), "2,1;1,1");
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(springer_fibre_dimension(&p(&[4])), 0);
        assert_eq!(springer_fibre_dimension(&Partition::column(5)), 10);
        assert_eq!(springer_fibre_dimension(&p(&[3, 2])), 2);
        assert_eq!(centraliser_dimension(&p(&[4])), 4);
        assert_eq!(centraliser_dimension(&Partition::column(4)), 16);
        assert_eq!(centraliser_dimension(&p(&[3, 2])), 9);
    }

    #[test]
    fn levi_data_counts() {
        // Σ over compositions of the product of p(λ_i): 1, 3, 8 for N = 1, 2, 3
        assert_eq!(LeviDatum::all(1).len(), 1);
        assert_eq!(LeviDatum::all(2).len(), 3);
        assert_eq!(LeviDatum::all(3).len(), 8);
        for d in LeviDatum::all(5) {
            assert_eq!(d.weight(), 5);
        }
    }

    #[test]
    fn serde_roundtrip_and_rejection() {
        let lam = p(&[6, 6, 2, 1]);
        let s = serde_json::to_string(&lam).unwrap();
        assert_eq!(s, "[6,6,2,1]");
        assert_eq!(serde_json::from_str::<Partition>(&s).unwrap(), lam);
        assert!(serde_json::from_str::<Partition>("[1,2]").is_err());
        let c: Composition = serde_json::from_str("[1,3,2]").unwrap();
        assert_eq!(c.parts(), &[1, 3, 2]);
    }
}
