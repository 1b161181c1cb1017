//! Springer fibres of nilpotent matrices over `F_p` and the Lusztig–Spaltenstein
//! map on flags.
//!
//! The basis of `F_p^N` is indexed by triples `(i, j, k)`: block `i`, row `j`
//! of the block's Young diagram, box `k` in that row. Triples are ordered
//! lexicographically, so block `V_i` occupies a contiguous coordinate range and
//! `W_j = V_1 ⊕ … ⊕ V_j` is a coordinate prefix.
//!
//! All computations happen at `F_p`-points.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactlinalg::{
    complement_in, enumerate_extensions, jordan_type, preimage, restrict, Flag, LinalgError,
    Matrix, PrimeField, Subspace,
};
use crate::partitions::{LeviDatum, Partition};
use crate::tableaux::{
    enumerate_standard, order_key, tableau_from_nested, NestedPartitionSequence, StandardTableau,
    TableauError,
};

/// Default cap on the number of flags one enumeration may visit.
pub const DEFAULT_FLAG_CEILING: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpringerError {
    #[error("flag is not in the Springer fibre: e F_{step} is not contained in F_{prev}", prev = step - 1)]
    NotInFibre { step: usize },
    #[error("expected {expected} block flags, got {found}")]
    BlockCount { expected: usize, found: usize },
    #[error("block {block} flag has dimension {found}, expected {expected}")]
    BlockDimension {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error(
        "fibre enumeration would exceed the ceiling of {ceiling} flags (estimated {estimate:.3e})"
    )]
    CeilingExceeded { ceiling: u64, estimate: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
}

/// The triples `(i, j, k)` indexing the representative's basis, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSet {
    triples: Vec<(usize, usize, usize)>,
}

impl IndexSet {
    pub fn new(datum: &LeviDatum) -> Self {
        let mut triples = Vec::with_capacity(datum.weight());
        for (i, mu) in datum.blocks().iter().enumerate() {
            for (j, &row) in mu.parts().iter().enumerate() {
                for k in 1..=row {
                    triples.push((i + 1, j + 1, k));
                }
            }
        }
        IndexSet { triples }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[(usize, usize, usize)] {
        &self.triples
    }

    /// 0-based coordinate of `v_{i,j,k}`.
    pub fn position(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        self.triples.binary_search(&(i, j, k)).ok()
    }
}

/// The representative `e = e₀ + e₁` of the orbit induced from a Levi datum.
#[derive(Debug, Clone, Serialize)]
pub struct NilpotentRep {
    datum: LeviDatum,
    field: PrimeField,
    index_set: IndexSet,
    e0: Matrix,
    e1: Matrix,
    e: Matrix,
    #[serde(skip)]
    blocks: Vec<Subspace>,
    #[serde(skip)]
    partial_flag: Vec<Subspace>,
    #[serde(skip)]
    block_operators: Vec<Matrix>,
}

impl NilpotentRep {
    pub fn datum(&self) -> &LeviDatum {
        &self.datum
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    /// The Levi part, preserving every block.
    pub fn e0(&self) -> &Matrix {
        &self.e0
    }

    /// The nilradical part, chaining row `j` of one block to row `j` of the
    /// previous block that has such a row.
    pub fn e1(&self) -> &Matrix {
        &self.e1
    }

    pub fn e(&self) -> &Matrix {
        &self.e
    }

    /// `V_i` (0-based `i`).
    pub fn block(&self, i: usize) -> &Subspace {
        &self.blocks[i]
    }

    /// `W_j = V_1 ⊕ … ⊕ V_j` for `0 <= j <= n`.
    pub fn partial_flag(&self, j: usize) -> &Subspace {
        &self.partial_flag[j]
    }

    /// `e₀|_{V_i}` in the local basis of block `i` (0-based).
    pub fn block_operator(&self, i: usize) -> &Matrix {
        &self.block_operators[i]
    }
}

/// Builds `e₀ = Σ e_{(i,j,k);(i,j,k+1)}` and
/// `e₁ = Σ_j Σ_k e_{(i_k,j,μ_{i_k,j});(i_{k+1},j,1)}`, where `i_1 < i_2 < …`
/// are the blocks having a `j`-th row.
pub fn build_representative(datum: &LeviDatum, field: PrimeField) -> NilpotentRep {
    let index_set = IndexSet::new(datum);
    let n = index_set.len();
    let mut e0 = Matrix::zeros(field, n, n);
    let mut e1 = Matrix::zeros(field, n, n);
    let pos = |i, j, k| index_set.position(i, j, k).expect("triple in index set");

    for (i, mu) in datum.blocks().iter().enumerate() {
        for (j, &row) in mu.parts().iter().enumerate() {
            for k in 1..row {
                // v_{i,j,k+1} -> v_{i,j,k}
                e0.set(pos(i + 1, j + 1, k), pos(i + 1, j + 1, k + 1), 1);
            }
        }
    }
    for j in 1..=datum.max_length() {
        let having: Vec<usize> = (1..=datum.num_blocks())
            .filter(|&i| datum.blocks()[i - 1].len() >= j)
            .collect();
        for w in having.windows(2) {
            let (lower, upper) = (w[0], w[1]);
            let last = datum.blocks()[lower - 1].part(j - 1);
            // first box of row j in the later block -> last box of row j in the earlier one
            e1.set(pos(lower, j, last), pos(upper, j, 1), 1);
        }
    }
    let e = e0.add(&e1).expect("same shape");

    let shape = datum.levi_shape();
    let offsets = shape.offsets();
    let blocks: Vec<Subspace> = (0..datum.num_blocks())
        .map(|i| Subspace::coordinate(field, n, offsets[i]..offsets[i + 1]))
        .collect();
    let partial_flag = offsets
        .iter()
        .map(|&o| Subspace::coordinate(field, n, 0..o))
        .collect();
    let block_operators = blocks
        .iter()
        .map(|v| restrict(&e0, v).expect("e0 preserves each block"))
        .collect();
    NilpotentRep {
        datum: datum.clone(),
        field,
        index_set,
        e0,
        e1,
        e,
        blocks,
        partial_flag,
        block_operators,
    }
}

/// Jordan types of `e` on `F_0, F_1, …, F_N`.
pub fn type_sequence(e: &Matrix, flag: &Flag) -> Result<Vec<Partition>, SpringerError> {
    (0..=flag.ambient())
        .map(|i| {
            let restricted = restrict(e, flag.space(i))?;
            Ok(jordan_type(&restricted)?)
        })
        .collect()
}

/// Spaltenstein's map: the nested sequence `Type(e|F_i)` read as a tableau.
pub fn spaltenstein_map(e: &Matrix, flag: &Flag) -> Result<StandardTableau, SpringerError> {
    if e.num_rows() != flag.ambient() || !e.is_square() {
        return Err(LinalgError::Dimension(format!(
            "{}x{} operator on a flag of F_p^{}",
            e.num_rows(),
            e.num_cols(),
            flag.ambient()
        ))
        .into());
    }
    for i in 1..=flag.ambient() {
        let image_in_prev = flag.space(i).basis().iter().all(|v| {
            flag.space(i - 1)
                .contains_vector(&e.apply(v).expect("square"))
        });
        if !image_in_prev {
            return Err(SpringerError::NotInFibre { step: i });
        }
    }
    let seq = NestedPartitionSequence::new(type_sequence(e, flag)?)?;
    Ok(tableau_from_nested(&seq))
}

/// Enumeration settings for [`enumerate_fibre`].
#[derive(Debug, Clone, Copy)]
pub struct FibreOptions {
    pub ceiling: u64,
    /// Keep every flag in its class rather than only counting.
    pub keep_flags: bool,
    /// Random probes used to estimate the fibre size before enumerating.
    pub probes: usize,
    pub seed: u64,
}

impl Default for FibreOptions {
    fn default() -> Self {
        FibreOptions {
            ceiling: DEFAULT_FLAG_CEILING,
            keep_flags: false,
            probes: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibreClass {
    pub tableau: StandardTableau,
    pub count: u64,
    #[serde(skip)]
    pub flags: Vec<Flag>,
}

/// The enumerated fibre `B_e(F_p)` split into the classes `X_σ = Φ^{-1}(σ)`.
///
/// Classes are listed for every `σ ∈ Std(λ)`, in ascending tableau order,
/// including empty ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibreDecomposition {
    pub shape: Partition,
    pub p: u32,
    pub total_flags: u64,
    pub classes: Vec<FibreClass>,
}

impl FibreDecomposition {
    pub fn class(&self, sigma: &StandardTableau) -> Option<&FibreClass> {
        self.classes.iter().find(|c| &c.tableau == sigma)
    }

    pub fn nonempty_classes(&self) -> usize {
        self.classes.iter().filter(|c| c.count > 0).count()
    }
}

/// Depth-first enumeration of `B_e(F_p)`: each `F_i` runs over the lines of
/// `e^{-1}(F_{i-1}) / F_{i-1}`. The visitor receives each flag together
/// with its sequence of Jordan types.
pub fn for_each_fibre_flag(
    e: &Matrix,
    ceiling: u64,
    visit: impl FnMut(&Flag, &[Partition]),
) -> Result<u64, SpringerError> {
    jordan_type(e)?;
    let zero = Subspace::zero(e.field(), e.num_rows());
    for_each_fibre_flag_from(e, vec![zero], ceiling, visit)
}

/// The admissible first steps `F_1`: the lines of `ker e`.
pub fn fibre_first_steps(e: &Matrix) -> Result<Vec<Subspace>, SpringerError> {
    jordan_type(e)?;
    let zero = Subspace::zero(e.field(), e.num_rows());
    Ok(enumerate_extensions(&zero, &preimage(e, &zero)?)?)
}

/// Like [`for_each_fibre_flag`], restricted to flags beginning with `prefix`
/// (`F_0, …, F_k`, assumed admissible). Disjoint prefixes shard the fibre.
pub fn for_each_fibre_flag_from(
    e: &Matrix,
    prefix: Vec<Subspace>,
    ceiling: u64,
    mut visit: impl FnMut(&Flag, &[Partition]),
) -> Result<u64, SpringerError> {
    let n = e.num_rows();
    let mut types = prefix
        .iter()
        .map(|space| Ok(jordan_type(&restrict(e, space)?)?))
        .collect::<Result<Vec<_>, SpringerError>>()?;
    let mut chain = prefix;
    let mut count = 0u64;
    dfs(
        e, n, ceiling, &mut chain, &mut types, &mut count, &mut visit,
    )?;
    Ok(count)
}

fn dfs(
    e: &Matrix,
    n: usize,
    ceiling: u64,
    chain: &mut Vec<Subspace>,
    types: &mut Vec<Partition>,
    count: &mut u64,
    visit: &mut impl FnMut(&Flag, &[Partition]),
) -> Result<(), SpringerError> {
    let depth = chain.len() - 1;
    if depth == n {
        *count += 1;
        if *count > ceiling {
            return Err(SpringerError::CeilingExceeded {
                ceiling,
                estimate: *count as f64,
            });
        }
        let flag = Flag::from_chain_unchecked(e.field(), n, chain.clone());
        visit(&flag, types);
        return Ok(());
    }
    let current = chain.last().expect("chain starts at zero");
    let room = preimage(e, current)?;
    for next in enumerate_extensions(current, &room)? {
        types.push(jordan_type(&restrict(e, &next)?)?);
        chain.push(next);
        dfs(e, n, ceiling, chain, types, count, visit)?;
        chain.pop();
        types.pop();
    }
    Ok(())
}

/// Knuth's random-path estimate of `|B_e(F_p)|`: the mean over `probes`
/// random descents of the product of branching factors.
pub fn estimate_fibre_size<R: Rng + ?Sized>(
    e: &Matrix,
    probes: usize,
    rng: &mut R,
) -> Result<f64, SpringerError> {
    jordan_type(e)?;
    let n = e.num_rows();
    let field = e.field();
    let mut total = 0.0;
    for _ in 0..probes.max(1) {
        let mut current = Subspace::zero(field, n);
        let mut product = 1.0;
        for _ in 0..n {
            let room = preimage(e, &current)?;
            let complement = complement_in(&current, &room)?;
            product *= crate::exactlinalg::line_count(field, complement.len()) as f64;
            current = current.extend_by(&random_nonzero_combination(field, &complement, rng));
        }
        total += product;
    }
    Ok(total / probes.max(1) as f64)
}

fn random_nonzero_combination<R: Rng + ?Sized>(
    field: PrimeField,
    basis: &[Vec<u32>],
    rng: &mut R,
) -> Vec<u32> {
    let p = field.characteristic();
    let ambient = basis[0].len();
    loop {
        let coeffs: Vec<u32> = (0..basis.len()).map(|_| rng.gen_range(0..p)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let mut v = vec![0; ambient];
        for (&c, b) in coeffs.iter().zip(basis) {
            for (x, &y) in v.iter_mut().zip(b) {
                *x = field.add(*x, field.mul(c, y));
            }
        }
        return v;
    }
}

/// A random point of `B_e(F_p)`, each step a uniformly random admissible line.
pub fn random_fibre_flag<R: Rng + ?Sized>(e: &Matrix, rng: &mut R) -> Result<Flag, SpringerError> {
    jordan_type(e)?;
    let n = e.num_rows();
    let field = e.field();
    let mut chain = vec![Subspace::zero(field, n)];
    for i in 0..n {
        let room = preimage(e, &chain[i])?;
        let complement = complement_in(&chain[i], &room)?;
        let next = chain[i].extend_by(&random_nonzero_combination(field, &complement, rng));
        chain.push(next);
    }
    Ok(Flag::from_chain_unchecked(field, n, chain))
}

/// Enumerates `B_e(F_p)` and groups it by Spaltenstein's map.
pub fn enumerate_fibre(
    e: &Matrix,
    options: &FibreOptions,
) -> Result<FibreDecomposition, SpringerError> {
    use rand::SeedableRng;
    let shape = jordan_type(e)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(options.seed);
    let estimate = estimate_fibre_size(e, options.probes, &mut rng)?;
    if estimate > options.ceiling as f64 {
        return Err(SpringerError::CeilingExceeded {
            ceiling: options.ceiling,
            estimate,
        });
    }
    let mut classes: Vec<FibreClass> = enumerate_standard(&shape)?
        .into_iter()
        .map(|tableau| FibreClass {
            tableau,
            count: 0,
            flags: Vec::new(),
        })
        .collect();
    let keys: Vec<Vec<usize>> = classes.iter().map(|c| order_key(&c.tableau)).collect();
    let mut failure = None;
    let total = for_each_fibre_flag(e, options.ceiling, |flag, types| {
        let seq = match NestedPartitionSequence::new(types.to_vec()) {
            Ok(seq) => seq,
            Err(err) => {
                failure.get_or_insert(SpringerError::from(err));
                return;
            }
        };
        let sigma = tableau_from_nested(&seq);
        let idx = keys
            .binary_search(&order_key(&sigma))
            .expect("Φ lands in Std(λ)");
        classes[idx].count += 1;
        if options.keep_flags {
            classes[idx].flags.push(flag.clone());
        }
    })
    .map_err(|err| match err {
        SpringerError::CeilingExceeded {
            ceiling,
            estimate: seen,
        } => SpringerError::CeilingExceeded {
            ceiling,
            estimate: seen.max(estimate),
        },
        other => other,
    })?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(FibreDecomposition {
        shape,
        p: e.field().characteristic(),
        total_flags: total,
        classes,
    })
}

/// The Lusztig–Spaltenstein map on flags: `F̄_i = W_{j-1} + F^{(j)}_k`, where
/// `j` is the block containing position `i` and `k = i − Σ_{l<j} λ_l`.
///
/// Only block dimensions are checked; the formula is total on flag tuples.
pub fn ls_map(datum: &LeviDatum, flags: &[Flag]) -> Result<Flag, SpringerError> {
    let shape = datum.levi_shape().parts();
    if flags.len() != shape.len() {
        return Err(SpringerError::BlockCount {
            expected: shape.len(),
            found: flags.len(),
        });
    }
    let field = flags.first().map_or_else(PrimeField::default, Flag::field);
    for (block, (flag, &dim)) in flags.iter().zip(shape).enumerate() {
        if flag.ambient() != dim {
            return Err(SpringerError::BlockDimension {
                block: block + 1,
                expected: dim,
                found: flag.ambient(),
            });
        }
        if flag.field() != field {
            return Err(LinalgError::FieldMismatch(
                field.characteristic(),
                flag.field().characteristic(),
            )
            .into());
        }
    }
    let n = datum.weight();
    let mut spaces = Vec::with_capacity(n + 1);
    spaces.push(Subspace::zero(field, n));
    let mut offset = 0;
    for (flag, &dim) in flags.iter().zip(shape) {
        let prefix = Subspace::coordinate(field, n, 0..offset);
        for k in 1..=dim {
            let step = prefix.sum(&flag.space(k).embed(n, offset))?;
            spaces.push(step);
        }
        offset += dim;
    }
    Ok(Flag::from_chain_unchecked(field, n, spaces))
}

/// The coordinate flags `F^{(k)}_j = span{v_{k,l,m} : σ^{(k)}_{l,m} <= j}`.
pub fn representative_flags(
    rep: &NilpotentRep,
    tuple: &[StandardTableau],
) -> Result<Vec<Flag>, SpringerError> {
    let datum = rep.datum();
    if tuple.len() != datum.num_blocks() {
        return Err(TableauError::TupleLength {
            expected: datum.num_blocks(),
            found: tuple.len(),
        }
        .into());
    }
    tuple
        .iter()
        .zip(datum.blocks())
        .map(|(sigma, mu)| {
            if sigma.shape() != mu {
                return Err(TableauError::ShapeMismatch {
                    expected: mu.clone(),
                    found: sigma.shape().clone(),
                }
                .into());
            }
            Ok(tableau_coordinate_flag(rep.field(), sigma))
        })
        .collect()
}

/// Coordinate flag of a Jordan basis laid out row by row in the shape of
/// `sigma`: the `j`-th step adds the box holding `j`.
pub fn tableau_coordinate_flag(field: PrimeField, sigma: &StandardTableau) -> Flag {
    let dim = sigma.weight();
    let row_starts: Vec<usize> = sigma
        .shape()
        .parts()
        .iter()
        .scan(0, |acc, &len| {
            let start = *acc;
            *acc += len;
            Some(start)
        })
        .collect();
    let vectors: Vec<Vec<u32>> = sigma
        .positions()
        .into_iter()
        .map(|(row, col)| {
            let mut v = vec![0; dim];
            v[row_starts[row - 1] + col - 1] = 1;
            v
        })
        .collect();
    Flag::from_basis(field, dim, &vectors).expect("distinct coordinate vectors")
}

/// Φ applied blockwise with `e₀|_{V_i}`.
pub fn blockwise_spaltenstein(
    rep: &NilpotentRep,
    flags: &[Flag],
) -> Result<Vec<StandardTableau>, SpringerError> {
    let datum = rep.datum();
    if flags.len() != datum.num_blocks() {
        return Err(SpringerError::BlockCount {
            expected: datum.num_blocks(),
            found: flags.len(),
        });
    }
    flags
        .iter()
        .enumerate()
        .map(|(i, flag)| spaltenstein_map(rep.block_operator(i), flag))
        .collect()
}
