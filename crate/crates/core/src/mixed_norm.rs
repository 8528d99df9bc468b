//! Iterated mixed norms `L_{p_1}(w_1; L_{p_2}(w_2; ...))` on finite spaces.
//!
//! A chain lists its layers outermost-first. Elements are flat coordinate
//! vectors in row-major order (first layer slowest), and the norm folds from
//! the innermost layer outwards: each pass maps a block of child norms
//! `(n_j)` to `(Σ_j w_j n_j^p)^{1/p}`, or to `max n_j` when `p = ∞`.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::FiniteProbSpace;

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 1.0 {
            return Err(Error::invalid(format!(
                "exponent must satisfy 1 <= p <= inf, got {value}"
            )));
        }
        Ok(Exponent(value))
    }

    pub fn infinity() -> Self {
        Exponent(f64::INFINITY)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Hölder conjugate: `1/p + 1/p' = 1`, with `1' = ∞` and `∞' = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.is_infinite() {
            Exponent(1.0)
        } else if self.0 == 1.0 {
            Exponent::infinity()
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    /// Renders `∞` as "inf", matching the JSON and CLI encodings.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Exponent::infinity());
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::invalid(format!("cannot parse exponent from {s:?}")))?;
        Exponent::new(v)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        let v = match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Exponent::new(v),
            Repr::Text(s) => s.parse(),
        };
        v.map_err(de::Error::custom)
    }
}

/// One layer of a mixed-norm chain: an exponent over a weighted finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub p: Exponent,
    #[serde(with = "layer_space")]
    pub space: FiniteProbSpace,
}

/// Layers serialize their weights inline (`{"p": 2.0, "weights": [1, 1]}`).
mod layer_space {
    use super::*;

    pub fn serialize<S: Serializer>(
        space: &FiniteProbSpace,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        space.weights().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<FiniteProbSpace, D::Error> {
        let weights = Vec::<f64>::deserialize(d)?;
        FiniteProbSpace::from_weights(weights).map_err(de::Error::custom)
    }
}

impl Layer {
    pub fn new(p: Exponent, space: FiniteProbSpace) -> Self {
        Layer { p, space }
    }
}

/// An iterated mixed-norm space, layers outermost-first. The empty chain is
/// the scalar line with the absolute value as its norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct MixedNormChain {
    layers: Vec<Layer>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    layers: Vec<RawLayer>,
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    p: Exponent,
    weights: Vec<f64>,
}

impl TryFrom<RawChain> for MixedNormChain {
    type Error = Error;
    fn try_from(raw: RawChain) -> Result<Self> {
        let layers = raw
            .layers
            .into_iter()
            .map(|l| Ok(Layer::new(l.p, FiniteProbSpace::from_weights(l.weights)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixedNormChain::new(layers))
    }
}

impl From<MixedNormChain> for RawChain {
    fn from(c: MixedNormChain) -> Self {
        RawChain {
            layers: c
                .layers
                .into_iter()
                .map(|l| RawLayer {
                    p: l.p,
                    weights: l.space.weights().to_vec(),
                })
                .collect(),
        }
    }
}

impl MixedNormChain {
    pub fn new(layers: Vec<Layer>) -> Self {
        let dim = layers.iter().map(|l| l.space.len()).product();
        MixedNormChain { layers, dim }
    }

    /// The empty chain: scalars with `|x|`.
    pub fn scalar() -> Self {
        MixedNormChain::new(vec![])
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Total coordinate count (product of layer sizes; 1 for the scalar chain).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.space.len()).collect()
    }

    /// Row-major flattening of a per-layer multi-index.
    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.layers.len() {
            return Err(Error::dim(format!(
                "multi-index has {} entries, chain has {} layers",
                multi.len(),
                self.layers.len()
            )));
        }
        let mut flat = 0usize;
        for (i, (&m, layer)) in multi.iter().zip(&self.layers).enumerate() {
            if m >= layer.space.len() {
                return Err(Error::invalid(format!(
                    "index {m} out of range for layer {i} of size {}",
                    layer.space.len()
                )));
            }
            flat = flat * layer.space.len() + m;
        }
        Ok(flat)
    }

    /// Chain for the tensor product: `self` outermost, then `inner`.
    pub fn concat(&self, inner: &MixedNormChain) -> MixedNormChain {
        let mut layers = self.layers.clone();
        layers.extend(inner.layers.iter().cloned());
        MixedNormChain::new(layers)
    }

    /// Mixed norm of a flat coordinate vector.
    pub fn norm(&self, coords: &[f64]) -> Result<f64> {
        if coords.len() != self.dim {
            return Err(Error::dim(format!(
                "element has {} coordinates, chain dimension is {}",
                coords.len(),
                self.dim
            )));
        }
        if coords.iter().any(|c| c.is_nan()) {
            return Err(Error::invalid("element contains NaN coordinates"));
        }
        let mut buf: Vec<f64> = coords.iter().map(|c| c.abs()).collect();
        Ok(self.fold_norm(&mut buf))
    }

    /// Innermost-to-outermost fold; `buf` holds nonnegative child norms and
    /// shrinks by one layer per pass. No intermediate tensors are allocated
    /// beyond the shrinking scratch buffer.
    pub(crate) fn fold_norm(&self, buf: &mut Vec<f64>) -> f64 {
        debug_assert_eq!(buf.len(), self.dim);
        for layer in self.layers.iter().rev() {
            let n = layer.space.len();
            let w = layer.space.weights();
            let p = layer.p.get();
            let blocks = buf.len() / n;
            for b in 0..blocks {
                let chunk = &buf[b * n..(b + 1) * n];
                buf[b] = layer_norm(chunk, w, p);
            }
            buf.truncate(blocks);
        }
        buf[0]
    }
}

/// One weighted `ℓ_p` aggregation of nonnegative child norms.
#[inline]
fn layer_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        // positive weights: the essential sup is the plain max
        return values.iter().fold(0.0f64, |m, &v| m.max(v));
    }
    if p == 1.0 {
        let mut acc = 0.0;
        for (v, w) in values.iter().zip(weights) {
            acc += w * v;
        }
        return acc;
    }
    if p == 2.0 {
        let mut acc = 0.0;
        for (v, w) in values.iter().zip(weights) {
            acc += w * v * v;
        }
        return acc.sqrt();
    }
    if p == 4.0 {
        let mut acc = 0.0;
        for (v, w) in values.iter().zip(weights) {
            let v2 = v * v;
            acc += w * v2 * v2;
        }
        return acc.sqrt().sqrt();
    }
    let mut acc = 0.0;
    for (v, w) in values.iter().zip(weights) {
        acc += w * v.powf(p);
    }
    acc.powf(1.0 / p)
}

/// Layer weighting for [`build_e_n`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// Weight one per atom: `ℓ_p` layers.
    Counting,
    /// Uniform mass `1/2` per atom: `L_p` over a fair coin.
    Probability,
}

/// The `n`-fold alternating chain `ℓ_p^(2)(ℓ_q^(2)(...))` of dimension `4^n`:
/// `2n` two-atom layers with exponents `p, q, p, q, ...` outermost-first.
/// With [`Weighting::Probability`] every layer carries mass `1/2` per atom,
/// which rescales norms but leaves all norm ratios unchanged.
pub fn build_e_n(p: Exponent, q: Exponent, n: usize, weighting: Weighting) -> MixedNormChain {
    let space = || match weighting {
        Weighting::Counting => FiniteProbSpace::counting(2).expect("two atoms"),
        Weighting::Probability => FiniteProbSpace::uniform(2).expect("two atoms"),
    };
    let mut layers = Vec::with_capacity(2 * n);
    for _ in 0..n {
        layers.push(Layer::new(p, space()));
        layers.push(Layer::new(q, space()));
    }
    MixedNormChain::new(layers)
}

/// Removes the interior exponents of every maximal monotone run, keeping run
/// endpoints; the output is a subsequence of the input and the map is
/// idempotent. Only exponents strictly between 1 and ∞ are accepted: the
/// boundary cases do not admit the same collapsing.
pub fn reduce_monotone_runs(seq: &[Exponent]) -> Result<Vec<Exponent>> {
    for e in seq {
        if e.is_infinite() || e.get() <= 1.0 {
            return Err(Error::invalid(format!(
                "run reduction needs exponents strictly inside (1, inf), got {e}"
            )));
        }
    }
    if seq.len() <= 2 {
        return Ok(seq.to_vec());
    }
    let last = seq.len() - 1;
    let mut keep = vec![false; seq.len()];
    keep[0] = true;
    keep[last] = true;
    // greedy maximal-run scan; a plateau extends whichever run it sits in
    let mut i = 0usize;
    while i < last {
        let mut dir = 0i8;
        let mut j = i + 1;
        while j <= last {
            let c = if seq[j - 1].get() < seq[j].get() {
                1i8
            } else if seq[j - 1].get() > seq[j].get() {
                -1i8
            } else {
                0i8
            };
            if c != 0 {
                if dir == 0 {
                    dir = c;
                } else if c != dir {
                    break;
                }
            }
            j += 1;
        }
        keep[j - 1] = true;
        i = j - 1;
    }
    Ok(seq
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(e, _)| *e)
        .collect())
}
