//! Dyadic martingales with values in a mixed-norm chain: sign-transform
//! ratios, their enumeration over all sign patterns, conditional-expectation
//! (Stein) ratios, and a seeded search for unconditionality lower bounds.

use serde::{Deserialize, Serialize};

use crate::constants::{ConstantEstimate, Method, OptimizerConfig};
use crate::error::{Error, Result};
use crate::measure::{FiniteProbSpace, Filtration, Partition};
use crate::mixed_norm::{Exponent, MixedNormChain};
use crate::numerics::pairwise_sum;
use crate::optim::{multi_start_maximize, SearchProblem};

/// Largest depth whose `2^(depth+1)` sign patterns we enumerate exactly.
pub const DEFAULT_DEPTH_CAP: usize = 12;

/// Validation tolerance for the martingale structure checks, relative to the
/// field scale.
const STRUCT_TOL: f64 = 1e-12;

/// A martingale difference sequence on the uniform space of `2^depth` sign
/// strings. `diffs[k]` is a chain-valued field stored atom-major
/// (`field[atom * dim + coord]`); it is constant on blocks of `2^(depth-k)`
/// consecutive atoms (measurable in the first `k` signs) and averages to zero
/// over each block of `2^(depth-k+1)` (vanishing conditional mean), `diffs[0]`
/// being globally constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicMartingale {
    depth: usize,
    chain: MixedNormChain,
    diffs: Vec<Vec<f64>>,
}

/// Coefficients of a martingale transform, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformCoefficients {
    alphas: Vec<f64>,
}

impl TransformCoefficients {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.iter().any(|a| !a.is_finite() || a.abs() > 1.0) {
            return Err(Error::invalid(
                "transform coefficients must lie in [-1, 1]",
            ));
        }
        Ok(TransformCoefficients { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

impl DyadicMartingale {
    pub fn new(chain: MixedNormChain, depth: usize, diffs: Vec<Vec<f64>>) -> Result<Self> {
        if depth > 30 {
            return Err(Error::invalid("depth too large to enumerate atoms"));
        }
        let atoms = 1usize << depth;
        let dim = chain.dim();
        if diffs.len() != depth + 1 {
            return Err(Error::dim(format!(
                "need {} difference fields for depth {}, got {}",
                depth + 1,
                depth,
                diffs.len()
            )));
        }
        for (k, field) in diffs.iter().enumerate() {
            if field.len() != atoms * dim {
                return Err(Error::dim(format!(
                    "difference {k} has {} scalars, expected {}",
                    field.len(),
                    atoms * dim
                )));
            }
            if field.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("difference fields must be finite"));
            }
        }
        let scale = diffs
            .iter()
            .flat_map(|f| f.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = STRUCT_TOL * (1.0 + scale);
        for (k, field) in diffs.iter().enumerate() {
            let block = atoms >> k.min(depth);
            // constant on each level-k block
            for start in (0..atoms).step_by(block) {
                for a in start + 1..start + block {
                    for c in 0..dim {
                        if (field[a * dim + c] - field[start * dim + c]).abs() > tol {
                            return Err(Error::invalid(format!(
                                "difference {k} is not measurable at its level",
                            )));
                        }
                    }
                }
            }
            // zero mean over each level-(k-1) block
            if k >= 1 {
                let parent = atoms >> (k - 1);
                for start in (0..atoms).step_by(parent) {
                    for c in 0..dim {
                        let mut acc = 0.0;
                        for a in start..start + parent {
                            acc += field[a * dim + c];
                        }
                        if (acc / parent as f64).abs() > tol {
                            return Err(Error::invalid(format!(
                                "difference {k} has nonzero conditional mean",
                            )));
                        }
                    }
                }
            }
        }
        Ok(DyadicMartingale {
            depth,
            chain,
            diffs,
        })
    }

    /// Construct by taking conditional-expectation increments of a terminal
    /// field: difference `k` is the level-`k` average minus the level-`k-1`
    /// average, and difference 0 the global mean.
    pub fn from_terminal(
        chain: MixedNormChain,
        depth: usize,
        terminal: &[f64],
    ) -> Result<Self> {
        if depth > 30 {
            return Err(Error::invalid("depth too large to enumerate atoms"));
        }
        let atoms = 1usize << depth;
        let dim = chain.dim();
        if terminal.len() != atoms * dim {
            return Err(Error::dim(format!(
                "terminal field has {} scalars, expected {}",
                terminal.len(),
                atoms * dim
            )));
        }
        let mut prev = dyadic_level_mean(terminal, depth, 0, dim);
        let mut diffs = vec![prev.clone()];
        for k in 1..=depth {
            let cur = dyadic_level_mean(terminal, depth, k, dim);
            diffs.push(cur.iter().zip(&prev).map(|(a, b)| a - b).collect());
            prev = cur;
        }
        DyadicMartingale::new(chain, depth, diffs)
    }

    /// Project arbitrary fields onto difference form: field `k` becomes its
    /// level-`k` average minus its level-`k-1` average. Applying this to the
    /// differences of a valid martingale reproduces them.
    pub fn project_differences(
        chain: MixedNormChain,
        depth: usize,
        raw: &[Vec<f64>],
    ) -> Result<Self> {
        if depth > 30 {
            return Err(Error::invalid("depth too large to enumerate atoms"));
        }
        let atoms = 1usize << depth;
        let dim = chain.dim();
        if raw.len() != depth + 1 {
            return Err(Error::dim(format!(
                "need {} raw fields for depth {}, got {}",
                depth + 1,
                depth,
                raw.len()
            )));
        }
        let mut diffs = Vec::with_capacity(depth + 1);
        for (k, field) in raw.iter().enumerate() {
            if field.len() != atoms * dim {
                return Err(Error::dim(format!(
                    "raw field {k} has {} scalars, expected {}",
                    field.len(),
                    atoms * dim
                )));
            }
            let own = dyadic_level_mean(field, depth, k, dim);
            if k == 0 {
                diffs.push(own);
            } else {
                let parent = dyadic_level_mean(field, depth, k - 1, dim);
                diffs.push(own.iter().zip(&parent).map(|(a, b)| a - b).collect());
            }
        }
        DyadicMartingale::new(chain, depth, diffs)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn chain(&self) -> &MixedNormChain {
        &self.chain
    }

    pub fn diffs(&self) -> &[Vec<f64>] {
        &self.diffs
    }

    /// Sum of all differences (the terminal value).
    fn total(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.diffs[0].len()];
        for field in &self.diffs {
            for (o, v) in out.iter_mut().zip(field) {
                *o += v;
            }
        }
        out
    }

    /// `L_s` norm over the uniform sign space of an atom-major field.
    fn ls_norm(&self, field: &[f64], s: f64) -> f64 {
        let atoms = 1usize << self.depth;
        let dim = self.chain.dim();
        let uniform = 1.0 / atoms as f64;
        let mut buf: Vec<f64> = Vec::with_capacity(dim);
        let mut powers = Vec::with_capacity(atoms);
        for a in 0..atoms {
            buf.clear();
            buf.extend(field[a * dim..(a + 1) * dim].iter().map(|v| v.abs()));
            let norm = self.chain.fold_norm(&mut buf);
            powers.push(uniform * norm.powf(s));
        }
        pairwise_sum(&powers).powf(1.0 / s)
    }
}

/// Per-coordinate mean of an atom-major field over the dyadic blocks at the
/// given level (blocks of `2^(depth-level)` consecutive atoms).
fn dyadic_level_mean(field: &[f64], depth: usize, level: usize, dim: usize) -> Vec<f64> {
    let atoms = 1usize << depth;
    let block = atoms >> level;
    let inv = 1.0 / block as f64;
    let mut out = vec![0.0; field.len()];
    for start in (0..atoms).step_by(block) {
        for c in 0..dim {
            let mut acc = 0.0;
            for a in start..start + block {
                acc += field[a * dim + c];
            }
            let mean = acc * inv;
            for a in start..start + block {
                out[a * dim + c] = mean;
            }
        }
    }
    out
}

fn check_s(s: Exponent) -> Result<f64> {
    if s.is_infinite() || s.get() <= 1.0 {
        return Err(Error::invalid(
            "transform ratios are defined for exponents strictly between 1 and infinity",
        ));
    }
    Ok(s.get())
}

/// Worst sign-pattern ratio `max_ε ‖Σ ε_k df_k‖_{L_s} / ‖Σ df_k‖_{L_s}`,
/// enumerating all `2^(depth+1)` patterns exactly with the default depth cap.
pub fn umd_ratio(m: &DyadicMartingale, s: Exponent) -> Result<f64> {
    umd_ratio_with_cap(m, s, DEFAULT_DEPTH_CAP)
}

/// [`umd_ratio`] with an explicit enumeration cap.
pub fn umd_ratio_with_cap(m: &DyadicMartingale, s: Exponent, cap: usize) -> Result<f64> {
    let sv = check_s(s)?;
    if m.depth > cap {
        return Err(Error::DepthCap(m.depth, cap));
    }
    let total = m.total();
    let denominator = m.ls_norm(&total, sv);
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    // walk sign patterns in Gray-code order so each step flips one sign
    let mut current = total;
    let mut signs = vec![1.0f64; m.depth + 1];
    let mut best = denominator;
    let patterns = 1u64 << (m.depth + 1);
    for i in 1..patterns {
        let k = i.trailing_zeros() as usize;
        signs[k] = -signs[k];
        let step = 2.0 * signs[k];
        for (cur, v) in current.iter_mut().zip(&m.diffs[k]) {
            *cur += step * v;
        }
        best = best.max(m.ls_norm(&current, sv));
    }
    Ok(best / denominator)
}

/// `‖Σ α_k df_k‖_{L_s} / ‖Σ df_k‖_{L_s}` for one coefficient vector.
pub fn transform_ratio(
    m: &DyadicMartingale,
    alphas: &TransformCoefficients,
    s: Exponent,
) -> Result<f64> {
    let sv = check_s(s)?;
    if alphas.alphas.len() != m.depth + 1 {
        return Err(Error::dim(format!(
            "need {} coefficients, got {}",
            m.depth + 1,
            alphas.alphas.len()
        )));
    }
    let denominator = m.ls_norm(&m.total(), sv);
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let mut combo = vec![0.0; m.diffs[0].len()];
    for (a, field) in alphas.alphas.iter().zip(&m.diffs) {
        for (o, v) in combo.iter_mut().zip(field) {
            *o += a * v;
        }
    }
    Ok(m.ls_norm(&combo, sv) / denominator)
}

/// Result of sweeping transform coefficients over a grid against the
/// sign-pattern maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremePointCheck {
    pub grid_max: f64,
    pub sign_max: f64,
    /// Whether the grid never beat the sign patterns (beyond 1e-10): the
    /// transform supremum is attained at coefficient-cube vertices.
    pub ok: bool,
}

/// Compare the transform-ratio maximum over a `points`-per-coordinate grid on
/// `[-1,1]^(depth+1)` with the sign-pattern maximum.
pub fn extreme_point_check(
    m: &DyadicMartingale,
    s: Exponent,
    points: usize,
) -> Result<ExtremePointCheck> {
    let sv = check_s(s)?;
    if points < 2 {
        return Err(Error::invalid("grid needs at least two points per axis"));
    }
    let coords = m.depth + 1;
    let combos = (points as u128).pow(coords as u32);
    if combos > 40_000_000 {
        return Err(Error::invalid(format!(
            "{combos} grid combinations is beyond the enumeration budget"
        )));
    }
    let denominator = m.ls_norm(&m.total(), sv);
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let values: Vec<f64> = (0..points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
        .collect();
    let mut idx = vec![0usize; coords];
    let mut combo = vec![0.0; m.diffs[0].len()];
    let mut grid_max = 0.0f64;
    loop {
        combo.iter_mut().for_each(|v| *v = 0.0);
        for (k, &i) in idx.iter().enumerate() {
            let a = values[i];
            for (o, v) in combo.iter_mut().zip(&m.diffs[k]) {
                *o += a * v;
            }
        }
        grid_max = grid_max.max(m.ls_norm(&combo, sv) / denominator);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == coords {
                let sign_max = umd_ratio(m, s)?;
                return Ok(ExtremePointCheck {
                    grid_max,
                    sign_max,
                    ok: grid_max <= sign_max + 1e-10,
                });
            }
            idx[pos] += 1;
            if idx[pos] < points {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Ratio of sign-averaged `L_s` norms after applying the filtration's
/// conditional expectations termwise:
/// `‖Σ ε_k E_k(F_k)‖ / ‖Σ ε_k F_k‖` with the sign average taken exactly over
/// all `2^K` vectors. Fields are atom-major over `space`.
pub fn stein_ratio(
    chain: &MixedNormChain,
    space: &FiniteProbSpace,
    filt: &Filtration,
    fields: &[Vec<f64>],
    s: Exponent,
) -> Result<f64> {
    let sv = s.get();
    if s.is_infinite() || sv < 1.0 {
        return Err(Error::invalid(
            "sign-averaged ratios need a finite exponent at least 1",
        ));
    }
    let count = fields.len();
    if count == 0 {
        return Err(Error::invalid("need at least one field"));
    }
    if count > DEFAULT_DEPTH_CAP {
        return Err(Error::DepthCap(count, DEFAULT_DEPTH_CAP));
    }
    if filt.len() < count {
        return Err(Error::invalid(format!(
            "filtration has {} levels, need {}",
            filt.len(),
            count
        )));
    }
    if filt.atom_count() != Some(space.len()) {
        return Err(Error::dim(
            "filtration and space cover different atom counts",
        ));
    }
    let atoms = space.len();
    let dim = chain.dim();
    for (k, field) in fields.iter().enumerate() {
        if field.len() != atoms * dim {
            return Err(Error::dim(format!(
                "field {k} has {} scalars, expected {}",
                field.len(),
                atoms * dim
            )));
        }
        if field.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("fields must be finite"));
        }
    }

    let smoothed: Vec<Vec<f64>> = fields
        .iter()
        .enumerate()
        .map(|(k, f)| cond_exp_field(space, filt.level(k), f, dim))
        .collect();

    // Gray-code walk over sign vectors, updating both sums in lock-step
    let mut signs = vec![1.0f64; count];
    let mut sum_smoothed = vec![0.0; atoms * dim];
    let mut sum_raw = vec![0.0; atoms * dim];
    for k in 0..count {
        for i in 0..atoms * dim {
            sum_smoothed[i] += smoothed[k][i];
            sum_raw[i] += fields[k][i];
        }
    }
    let sign_weight = 1.0 / (1u64 << count) as f64;
    let mut buf: Vec<f64> = Vec::with_capacity(dim);
    let mut num_terms = Vec::with_capacity(1usize << count);
    let mut den_terms = Vec::with_capacity(1usize << count);
    let accumulate = |sum_smoothed: &[f64],
                          sum_raw: &[f64],
                          num_terms: &mut Vec<f64>,
                          den_terms: &mut Vec<f64>,
                          buf: &mut Vec<f64>| {
        let mut num_atoms = Vec::with_capacity(atoms);
        let mut den_atoms = Vec::with_capacity(atoms);
        for a in 0..atoms {
            let w = space.weight(a);
            buf.clear();
            buf.extend(sum_smoothed[a * dim..(a + 1) * dim].iter().map(|v| v.abs()));
            num_atoms.push(w * chain.fold_norm(buf).powf(sv));
            buf.clear();
            buf.extend(sum_raw[a * dim..(a + 1) * dim].iter().map(|v| v.abs()));
            den_atoms.push(w * chain.fold_norm(buf).powf(sv));
        }
        num_terms.push(sign_weight * pairwise_sum(&num_atoms));
        den_terms.push(sign_weight * pairwise_sum(&den_atoms));
    };
    accumulate(
        &sum_smoothed,
        &sum_raw,
        &mut num_terms,
        &mut den_terms,
        &mut buf,
    );
    for i in 1..(1u64 << count) {
        let k = i.trailing_zeros() as usize;
        signs[k] = -signs[k];
        let step = 2.0 * signs[k];
        for (o, v) in sum_smoothed.iter_mut().zip(&smoothed[k]) {
            *o += step * v;
        }
        for (o, v) in sum_raw.iter_mut().zip(&fields[k]) {
            *o += step * v;
        }
        accumulate(
            &sum_smoothed,
            &sum_raw,
            &mut num_terms,
            &mut den_terms,
            &mut buf,
        );
    }
    let numerator = pairwise_sum(&num_terms).powf(1.0 / sv);
    let denominator = pairwise_sum(&den_terms).powf(1.0 / sv);
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    Ok(numerator / denominator)
}

/// Per-coordinate conditional expectation of an atom-major field.
fn cond_exp_field(
    space: &FiniteProbSpace,
    partition: &Partition,
    field: &[f64],
    dim: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; field.len()];
    for block in partition.blocks() {
        let mut mass = 0.0;
        for &a in block {
            mass += space.weight(a);
        }
        for c in 0..dim {
            let mut acc = 0.0;
            for &a in block {
                acc += space.weight(a) * field[a * dim + c];
            }
            let mean = acc / mass;
            for &a in block {
                out[a * dim + c] = mean;
            }
        }
    }
    out
}

/// Outcome of [`search_umd_lower_bound`]: the estimate plus the martingale
/// that attains it.
#[derive(Debug, Clone)]
pub struct UmdSearchResult {
    pub estimate: ConstantEstimate,
    pub martingale: DyadicMartingale,
}

/// Seeded multi-start search for the largest sign-pattern ratio among
/// martingales of the given depth. Candidates are parameterized by one block
/// value per cylinder and projected onto difference form, so every point the
/// optimizer visits is a valid martingale. The search at each depth warm
/// starts from the best result one level shallower (embedded with a zero last
/// difference), which makes the found value non-decreasing in depth. The
/// reported ratio is re-evaluated by direct per-pattern recomputation rather
/// than the incremental walk the search itself uses.
pub fn search_umd_lower_bound(
    chain: &MixedNormChain,
    s: Exponent,
    depth: usize,
    cfg: &OptimizerConfig,
) -> Result<UmdSearchResult> {
    check_s(s)?;
    if depth > DEFAULT_DEPTH_CAP {
        return Err(Error::DepthCap(depth, DEFAULT_DEPTH_CAP));
    }
    let dim = chain.dim();

    // identity candidate: a single constant difference, ratio exactly 1
    let identity_params = |d: usize| {
        let mut x = vec![0.0; param_len(d, dim)];
        x[0] = 1.0;
        x
    };
    if depth == 0 {
        let m = martingale_from_params(chain, 0, &identity_params(0))?;
        let value = umd_ratio(&m, s)?;
        return Ok(UmdSearchResult {
            estimate: ConstantEstimate {
                value,
                witness_params: identity_params(0),
                certified_ratio: naive_sign_ratio(&m, s)?,
                method: Method::Optimizer,
                converged: true,
                config: *cfg,
            },
            martingale: m,
        });
    }

    let shallower = search_umd_lower_bound(chain, s, depth - 1, cfg)?;
    let mut warm = shallower.estimate.witness_params.clone();
    warm.resize(param_len(depth, dim), 0.0);

    let objective = move |x: &[f64]| match martingale_from_params(chain, depth, x) {
        Ok(m) => umd_ratio(&m, s).unwrap_or(f64::NEG_INFINITY),
        Err(_) => f64::NEG_INFINITY,
    };
    let sample = |rng: &mut rand_chacha::ChaCha8Rng| {
        use rand::Rng;
        (0..param_len(depth, dim))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect::<Vec<f64>>()
    };
    let problem = SearchProblem {
        dim: param_len(depth, dim),
        objective: &objective,
        deterministic_starts: vec![identity_params(depth), warm],
        sample_start: &sample,
    };
    let out = multi_start_maximize(&problem, cfg);
    let martingale = martingale_from_params(chain, depth, &out.x)?;
    let certified = naive_sign_ratio(&martingale, s)?;
    Ok(UmdSearchResult {
        estimate: ConstantEstimate {
            value: out.value,
            witness_params: out.x,
            certified_ratio: certified,
            method: Method::Optimizer,
            converged: out.converged,
            config: *cfg,
        },
        martingale,
    })
}

/// One parameter per cylinder per coordinate: level `k` contributes
/// `2^k · dim` block values.
fn param_len(depth: usize, dim: usize) -> usize {
    ((1usize << (depth + 1)) - 1) * dim
}

/// Expand block parameters into per-level fields and project onto difference
/// form. Level `k`'s raw field is constant on its `2^k` cylinders, so the
/// projection only subtracts the parent-block mean.
fn martingale_from_params(
    chain: &MixedNormChain,
    depth: usize,
    params: &[f64],
) -> Result<DyadicMartingale> {
    let dim = chain.dim();
    if params.len() != param_len(depth, dim) {
        return Err(Error::dim(format!(
            "expected {} parameters, got {}",
            param_len(depth, dim),
            params.len()
        )));
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("parameters must be finite"));
    }
    let atoms = 1usize << depth;
    let mut diffs = Vec::with_capacity(depth + 1);
    let mut offset = 0;
    for k in 0..=depth {
        let blocks = 1usize << k;
        let raw = &params[offset..offset + blocks * dim];
        offset += blocks * dim;
        let mut field = vec![0.0; atoms * dim];
        let block_atoms = atoms >> k;
        for b in 0..blocks {
            for c in 0..dim {
                let value = if k == 0 {
                    raw[c]
                } else {
                    // subtract the mean of the sibling pair under the parent
                    let sibling = b ^ 1;
                    raw[b * dim + c] - 0.5 * (raw[b * dim + c] + raw[sibling * dim + c])
                };
                for a in b * block_atoms..(b + 1) * block_atoms {
                    field[a * dim + c] = value;
                }
            }
        }
        diffs.push(field);
    }
    DyadicMartingale::new(chain.clone(), depth, diffs)
}

/// Direct per-pattern enumeration: recompute `Σ ε_k df_k` from scratch for
/// every pattern. Slower than the incremental walk in [`umd_ratio`]; used to
/// cross-check it.
pub fn naive_sign_ratio(m: &DyadicMartingale, s: Exponent) -> Result<f64> {
    let sv = check_s(s)?;
    let denominator = m.ls_norm(&m.total(), sv);
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let patterns = 1u64 << (m.depth() + 1);
    let mut best = 0.0f64;
    for bits in 0..patterns {
        let mut sum = vec![0.0; m.diffs[0].len()];
        for (k, field) in m.diffs.iter().enumerate() {
            let sign = if bits >> k & 1 == 0 { 1.0 } else { -1.0 };
            for (o, v) in sum.iter_mut().zip(field) {
                *o += sign * v;
            }
        }
        best = best.max(m.ls_norm(&sum, sv));
    }
    Ok(best / denominator)
}

/// Re-checkable martingale witness file; verification revalidates the
/// difference structure and recomputes the sign-pattern ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleCertificate {
    pub chain: MixedNormChain,
    pub depth: usize,
    pub diffs: Vec<Vec<f64>>,
    pub s: Exponent,
    pub claimed_ratio: f64,
}

impl MartingaleCertificate {
    pub fn from_martingale(m: &DyadicMartingale, s: Exponent, claimed_ratio: f64) -> Self {
        MartingaleCertificate {
            chain: m.chain.clone(),
            depth: m.depth,
            diffs: m.diffs.clone(),
            s,
            claimed_ratio,
        }
    }

    pub fn verify(&self) -> Result<(f64, bool)> {
        let m = DyadicMartingale::new(self.chain.clone(), self.depth, self.diffs.clone())?;
        let ratio = umd_ratio(&m, self.s)?;
        Ok((ratio, ratio >= self.claimed_ratio - crate::witness::VERIFY_SLACK))
    }
}
