//! Finite probability spaces, set partitions, filtrations, and conditional
//! expectation.
//!
//! Atoms are indexed `0..n`. Product spaces and product partitions are laid
//! out row-major: the first factor varies slowest. All weights are strictly
//! positive, so every block of every partition has positive mass and
//! conditional expectations never divide by zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the sum-to-one check on probability weights.
pub const MASS_TOL: f64 = 1e-12;

/// A finite measure space with strictly positive atom weights.
///
/// Two weightings are in play throughout the crate: probability weights
/// (summing to one) and counting weights (every atom has weight one, giving
/// `ℓ_p` norms). General positive weights are accepted so that products of
/// mixed weightings stay representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct FiniteProbSpace {
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    weights: Vec<f64>,
}

impl TryFrom<RawSpace> for FiniteProbSpace {
    type Error = Error;
    fn try_from(raw: RawSpace) -> Result<Self> {
        FiniteProbSpace::from_weights(raw.weights)
    }
}

impl From<FiniteProbSpace> for RawSpace {
    fn from(s: FiniteProbSpace) -> Self {
        RawSpace { weights: s.weights }
    }
}

impl FiniteProbSpace {
    /// Space with arbitrary strictly positive finite weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("a measure space needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::invalid(format!(
                "atom weights must be finite and strictly positive, got {w}"
            )));
        }
        Ok(FiniteProbSpace { weights })
    }

    /// Probability space: weights must sum to one within [`MASS_TOL`].
    pub fn probability(weights: Vec<f64>) -> Result<Self> {
        let s = FiniteProbSpace::from_weights(weights)?;
        if !s.is_probability() {
            return Err(Error::invalid(format!(
                "probability weights must sum to 1 within {MASS_TOL}, got {}",
                s.total_mass()
            )));
        }
        Ok(s)
    }

    /// Uniform probability space on `n` atoms.
    pub fn uniform(n: usize) -> Result<Self> {
        FiniteProbSpace::from_weights(vec![1.0 / n as f64; n])
    }

    /// Counting space on `n` atoms: every weight is one, norms become `ℓ_p`.
    pub fn counting(n: usize) -> Result<Self> {
        FiniteProbSpace::from_weights(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject zero atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= MASS_TOL
    }
}

/// Row-major product of measure spaces: the first factor varies slowest.
/// Rejects an empty factor list (there is no canonical empty product here).
pub fn product(factors: &[&FiniteProbSpace]) -> Result<FiniteProbSpace> {
    if factors.is_empty() {
        return Err(Error::invalid("product of zero spaces is not defined"));
    }
    let total: usize = factors.iter().map(|f| f.len()).product();
    let mut weights = vec![1.0; total];
    let mut repeat = total;
    for f in factors {
        repeat /= f.len();
        let period = repeat * f.len();
        for (i, w) in weights.iter_mut().enumerate() {
            *w *= f.weights[(i % period) / repeat];
        }
    }
    FiniteProbSpace::from_weights(weights)
}

/// A set partition of `0..atom_count` into disjoint nonempty blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPartition", into = "RawPartition")]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    atom_count: usize,
    /// atom -> index of its block; derived, kept for O(1) lookups.
    block_index: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawPartition {
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<RawPartition> for Partition {
    type Error = Error;
    fn try_from(raw: RawPartition) -> Result<Self> {
        Partition::new(raw.blocks)
    }
}

impl From<Partition> for RawPartition {
    fn from(p: Partition) -> Self {
        RawPartition { blocks: p.blocks }
    }
}

impl Partition {
    /// Validates that `blocks` are nonempty, disjoint, and cover `0..n`
    /// exactly, where `n` is the total number of listed atoms.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("a partition needs at least one block"));
        }
        let atom_count: usize = blocks.iter().map(|b| b.len()).sum();
        let mut block_index = vec![usize::MAX; atom_count];
        for (bi, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid("partition blocks must be nonempty"));
            }
            for &a in block {
                if a >= atom_count {
                    return Err(Error::invalid(format!(
                        "atom {a} out of range for a partition of {atom_count} atoms"
                    )));
                }
                if block_index[a] != usize::MAX {
                    return Err(Error::invalid(format!("atom {a} appears in two blocks")));
                }
                block_index[a] = bi;
            }
        }
        // every slot filled follows from the counting argument above
        Ok(Partition {
            blocks,
            atom_count,
            block_index,
        })
    }

    /// One block containing everything: the trivial σ-algebra.
    pub fn trivial(atom_count: usize) -> Self {
        Partition::new(vec![(0..atom_count).collect()]).expect("nonempty range")
    }

    /// Every atom in its own block: the full σ-algebra.
    pub fn singletons(atom_count: usize) -> Self {
        Partition::new((0..atom_count).map(|a| vec![a]).collect()).expect("nonempty range")
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_index(&self) -> &[usize] {
        &self.block_index
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    pub fn is_singletons(&self) -> bool {
        self.blocks.len() == self.atom_count
    }

    /// True if every block of `self` sits inside a single block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.atom_count != coarser.atom_count {
            return false;
        }
        self.blocks.iter().all(|block| {
            let target = coarser.block_index[block[0]];
            block.iter().all(|&a| coarser.block_index[a] == target)
        })
    }

    /// Row-major product partition: blocks are cartesian products of factor
    /// blocks, atoms flattened with the first factor slowest.
    pub fn product(factors: &[&Partition]) -> Result<Partition> {
        if factors.is_empty() {
            return Err(Error::invalid("product of zero partitions is not defined"));
        }
        let sizes: Vec<usize> = factors.iter().map(|p| p.atom_count).collect();
        let mut blocks: Vec<Vec<usize>> = vec![vec![]];
        for (fi, part) in factors.iter().enumerate() {
            let stride: usize = sizes[fi + 1..].iter().product();
            let mut next = Vec::with_capacity(blocks.len() * part.blocks.len());
            for prefix in &blocks {
                for fb in &part.blocks {
                    let mut block = Vec::with_capacity(prefix.len().max(1) * fb.len());
                    if fi == 0 {
                        // prefix is the seed empty block
                        for &a in fb {
                            block.push(a * stride);
                        }
                    } else {
                        for &base in prefix {
                            for &a in fb {
                                block.push(base + a * stride);
                            }
                        }
                    }
                    next.push(block);
                }
            }
            blocks = next;
        }
        Partition::new(blocks)
    }
}

/// An increasing sequence of partitions (each refines its predecessor).
/// May be empty; all levels share one atom count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiltration", into = "RawFiltration")]
pub struct Filtration {
    levels: Vec<Partition>,
}

#[derive(Serialize, Deserialize)]
struct RawFiltration {
    levels: Vec<Partition>,
}

impl TryFrom<RawFiltration> for Filtration {
    type Error = Error;
    fn try_from(raw: RawFiltration) -> Result<Self> {
        Filtration::new(raw.levels)
    }
}

impl From<Filtration> for RawFiltration {
    fn from(f: Filtration) -> Self {
        RawFiltration { levels: f.levels }
    }
}

impl Filtration {
    pub fn new(levels: Vec<Partition>) -> Result<Self> {
        for pair in levels.windows(2) {
            if pair[0].atom_count() != pair[1].atom_count() {
                return Err(Error::dim(format!(
                    "filtration levels disagree on atom count: {} vs {}",
                    pair[0].atom_count(),
                    pair[1].atom_count()
                )));
            }
            if !pair[1].refines(&pair[0]) {
                return Err(Error::NonRefining(
                    "each level must refine the previous one".into(),
                ));
            }
        }
        Ok(Filtration { levels })
    }

    pub fn empty() -> Self {
        Filtration { levels: vec![] }
    }

    /// Dyadic filtration on `{±1}^depth`: level `k` groups atoms by their
    /// first `k` coordinates (row-major, first coordinate slowest).
    pub fn dyadic(depth: usize) -> Self {
        let atoms = 1usize << depth;
        let levels = (0..=depth)
            .map(|k| {
                let block_len = atoms >> k;
                Partition::new(
                    (0..(1usize << k))
                        .map(|b| (b * block_len..(b + 1) * block_len).collect())
                        .collect(),
                )
                .expect("dyadic blocks are disjoint and cover")
            })
            .collect();
        Filtration { levels }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &Partition {
        &self.levels[i]
    }

    /// Atom count shared by all levels; `None` for the empty filtration.
    pub fn atom_count(&self) -> Option<usize> {
        self.levels.first().map(|p| p.atom_count())
    }
}

/// Values of a scalar function on the atoms of a space.
pub type ScalarField = Vec<f64>;

/// Conditional expectation with respect to the σ-algebra generated by
/// `partition`: on each block, the weighted mean of `f`.
pub fn conditional_expectation(
    space: &FiniteProbSpace,
    partition: &Partition,
    f: &[f64],
) -> Result<Vec<f64>> {
    if partition.atom_count() != space.len() {
        return Err(Error::dim(format!(
            "partition covers {} atoms, space has {}",
            partition.atom_count(),
            space.len()
        )));
    }
    if f.len() != space.len() {
        return Err(Error::dim(format!(
            "field has {} values, space has {} atoms",
            f.len(),
            space.len()
        )));
    }
    let mut out = vec![0.0; f.len()];
    for block in partition.blocks() {
        let mut mass = 0.0;
        let mut acc = 0.0;
        for &a in block {
            mass += space.weight(a);
            acc += space.weight(a) * f[a];
        }
        let mean = acc / mass;
        for &a in block {
            out[a] = mean;
        }
    }
    Ok(out)
}

/// Filtration on the product `Ω' × Ω₀^copies` used when a witness on `Ω'`
/// is amplified with `copies` independent coordinates from `Ω₀`.
///
/// The output is the lexicographic flattening over groups `k = 1..=copies`:
/// group `k` pairs the `k`-th level of `a` (0-based index `k-1`) with every
/// level of `b` placed on copy `k`, copies before `k` fully resolved and
/// copies after `k` still trivial. Crossing a group boundary stays refining
/// because `b` starts at the trivial partition.
///
/// `copies = 0` returns the empty filtration.
pub fn tensor_filtration(a: &Filtration, b: &Filtration, copies: usize) -> Result<Filtration> {
    if copies == 0 {
        return Ok(Filtration::empty());
    }
    if a.len() < copies {
        return Err(Error::invalid(format!(
            "first filtration has {} levels, need at least {copies}",
            a.len()
        )));
    }
    if b.is_empty() {
        return Err(Error::invalid("second filtration must have at least one level"));
    }
    if !b.level(0).is_trivial() {
        return Err(Error::NonRefining(
            "second filtration must start at the trivial partition".into(),
        ));
    }
    let nb = b.atom_count().expect("nonempty");
    let full = Partition::singletons(nb);
    let trivial = Partition::trivial(nb);
    let mut levels = Vec::with_capacity(copies * b.len());
    for k in 1..=copies {
        for bn in b.levels() {
            let mut factors: Vec<&Partition> = Vec::with_capacity(copies + 1);
            factors.push(a.level(k - 1));
            for _ in 0..k - 1 {
                factors.push(&full);
            }
            factors.push(bn);
            for _ in k..copies {
                factors.push(&trivial);
            }
            levels.push(Partition::product(&factors)?);
        }
    }
    Filtration::new(levels)
}
