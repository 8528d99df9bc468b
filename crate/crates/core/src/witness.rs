//! Smoothing-ratio witnesses.
//!
//! A witness is a finite family of scalar functions `θ_k` on a probability
//! space, each tagged with a filtration level and a distinct coordinate of a
//! mixed-norm chain. Its ratio
//!
//! ```text
//!   ‖ Σ_k E[θ_k | level_k] e_{b_k} ‖_{L₁}  /  ‖ Σ_k θ_k e_{b_k} ‖_{L_∞}
//! ```
//!
//! is a certified lower bound for the best constant of the corresponding
//! smoothing inequality on that chain. [`amplify`] combines a witness on `E`
//! with a witness on `F` into one on the composite chain `E(F)` whose ratio
//! is at least the product of the two input ratios, which is what produces
//! exponential growth along the alternating chains. Iterating it is
//! [`certified_lower_bound`]; products too large to materialize are evaluated
//! by [`evaluate_amplified`], which streams over the product atoms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{compute_c, ConstantEstimate, OptimizerConfig};
use crate::error::{Error, Result};
use crate::measure::{
    self, conditional_expectation, FiniteProbSpace, Filtration, ScalarField,
};
use crate::mixed_norm::{build_e_n, Exponent, MixedNormChain, Weighting};
use crate::numerics::{combine_chunk_sums, pairwise_sum};

/// Materialization cap: when product atoms × chain dimension exceed this,
/// [`amplify`] refuses and the pipeline streams instead.
pub const MATERIALIZE_CAP: u128 = 1 << 24;

/// Slack used when re-checking a certificate's claimed ratio.
pub const VERIFY_SLACK: f64 = 1e-9;

/// One witness term: a scalar field, the filtration level whose conditional
/// expectation will hit it, and the chain coordinate it rides on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessTerm {
    /// One index per chain layer, outermost first.
    pub basis_index: Vec<usize>,
    /// Index into the witness filtration.
    pub level: usize,
    /// Scalar field on the witness probability space.
    pub theta: ScalarField,
}

/// A complete witness. Construction sorts terms by level (the ratio does not
/// depend on term order, and level-sorted terms are what [`amplify`]'s
/// filtration bookkeeping relies on) and validates every invariant: distinct
/// coordinates, levels in range, fields matching the space, finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct SWitnessSpec {
    chain: MixedNormChain,
    omega: FiniteProbSpace,
    filtration: Filtration,
    terms: Vec<WitnessTerm>,
    sup_bound: f64,
}

/// Numerator, denominator, and their quotient for one witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessEvaluation {
    /// `‖ Σ_k E[θ_k | level_k] e_{b_k} ‖_{L₁}`.
    pub numerator: f64,
    /// `‖ Σ_k θ_k e_{b_k} ‖_{L_∞}`, the max over positive-weight atoms.
    pub denominator: f64,
    pub ratio: f64,
}

impl SWitnessSpec {
    pub fn new(
        chain: MixedNormChain,
        omega: FiniteProbSpace,
        filtration: Filtration,
        mut terms: Vec<WitnessTerm>,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("witness needs at least one term"));
        }
        if !omega.is_probability() {
            return Err(Error::invalid("witness space must have total mass 1"));
        }
        if filtration.atom_count() != Some(omega.len()) {
            return Err(Error::dim(format!(
                "filtration covers {:?} atoms, witness space has {}",
                filtration.atom_count(),
                omega.len()
            )));
        }
        let mut flats = Vec::with_capacity(terms.len());
        for term in &terms {
            flats.push(chain.flat_index(&term.basis_index)?);
            if term.level >= filtration.len() {
                return Err(Error::invalid(format!(
                    "term level {} outside filtration of {} levels",
                    term.level,
                    filtration.len()
                )));
            }
            if term.theta.len() != omega.len() {
                return Err(Error::dim(format!(
                    "theta has {} values, witness space has {} atoms",
                    term.theta.len(),
                    omega.len()
                )));
            }
            if term.theta.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("theta values must be finite"));
            }
        }
        flats.sort_unstable();
        if flats.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(
                "witness terms must sit on pairwise distinct chain coordinates",
            ));
        }
        terms.sort_by_key(|t| t.level);
        let mut sup_bound = 0.0f64;
        for term in &terms {
            for (a, v) in term.theta.iter().enumerate() {
                if omega.weight(a) > 0.0 {
                    sup_bound = sup_bound.max(v.abs());
                }
            }
        }
        Ok(SWitnessSpec {
            chain,
            omega,
            filtration,
            terms,
            sup_bound,
        })
    }

    pub fn chain(&self) -> &MixedNormChain {
        &self.chain
    }

    pub fn omega(&self) -> &FiniteProbSpace {
        &self.omega
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    /// Terms in level-sorted order.
    pub fn terms(&self) -> &[WitnessTerm] {
        &self.terms
    }

    /// Largest |θ| over terms and positive-weight atoms.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Same witness with every θ scaled so the denominator becomes 1.
    /// The ratio is unchanged; amplification guarantees are stated for
    /// witnesses in this form.
    pub fn normalized(&self) -> Result<SWitnessSpec> {
        let den = evaluate(self)?.denominator;
        let terms = self
            .terms
            .iter()
            .map(|t| WitnessTerm {
                basis_index: t.basis_index.clone(),
                level: t.level,
                theta: t.theta.iter().map(|v| v / den).collect(),
            })
            .collect();
        SWitnessSpec::new(
            self.chain.clone(),
            self.omega.clone(),
            self.filtration.clone(),
            terms,
        )
    }
}

/// Ratio of the level-smoothed L₁ norm to the raw L_∞ norm.
pub fn evaluate(spec: &SWitnessSpec) -> Result<WitnessEvaluation> {
    let dim = spec.chain.dim();
    let atoms = spec.omega.len();
    let flats: Vec<usize> = spec
        .terms
        .iter()
        .map(|t| spec.chain.flat_index(&t.basis_index).expect("validated"))
        .collect();
    let smoothed: Vec<ScalarField> = spec
        .terms
        .iter()
        .map(|t| {
            conditional_expectation(&spec.omega, spec.filtration.level(t.level), &t.theta)
        })
        .collect::<Result<_>>()?;

    let weights = spec.omega.weights();
    let mut weighted_norms = Vec::with_capacity(atoms);
    let mut denominator = 0.0f64;
    let mut buf: Vec<f64> = Vec::with_capacity(dim);
    for a in 0..atoms {
        buf.clear();
        buf.resize(dim, 0.0);
        for (k, &fi) in flats.iter().enumerate() {
            buf[fi] = smoothed[k][a].abs();
        }
        let smoothed_norm = spec.chain.fold_norm(&mut buf);
        weighted_norms.push(weights[a] * smoothed_norm);
        if weights[a] > 0.0 {
            buf.clear();
            buf.resize(dim, 0.0);
            for (k, &fi) in flats.iter().enumerate() {
                buf[fi] = spec.terms[k].theta[a].abs();
            }
            denominator = denominator.max(spec.chain.fold_norm(&mut buf));
        }
    }
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let numerator = pairwise_sum(&weighted_norms);
    Ok(WitnessEvaluation {
        numerator,
        denominator,
        ratio: numerator / denominator,
    })
}

/// The two-level witness on the dimension-4 alternating chain built from a
/// two-point parameter pair: `a` rides the smoothed coordinates, `b` the
/// untouched ones, and the second outer coordinate carries the swapped copy.
/// Its ratio equals `projection_ratio(p, q, a, b)` because the outer-layer
/// factor `2^{1/p}` appears in both numerator and denominator.
pub fn base_witness_e1(p: Exponent, q: Exponent, a: [f64; 2], b: [f64; 2]) -> Result<SWitnessSpec> {
    for v in a.iter().chain(b.iter()) {
        if !v.is_finite() {
            return Err(Error::invalid("witness parameters must be finite"));
        }
    }
    if a == [0.0; 2] && b == [0.0; 2] {
        return Err(Error::invalid("witness parameters must not all vanish"));
    }
    let chain = build_e_n(p, q, 1, Weighting::Counting);
    let omega = FiniteProbSpace::uniform(2)?;
    let filtration = Filtration::dyadic(1);
    let terms = vec![
        WitnessTerm {
            basis_index: vec![0, 0],
            level: 0,
            theta: vec![a[0], a[1]],
        },
        WitnessTerm {
            basis_index: vec![0, 1],
            level: 1,
            theta: vec![b[0], b[1]],
        },
        WitnessTerm {
            basis_index: vec![1, 0],
            level: 0,
            theta: vec![a[1], a[0]],
        },
        WitnessTerm {
            basis_index: vec![1, 1],
            level: 1,
            theta: vec![b[1], b[0]],
        },
    ];
    SWitnessSpec::new(chain, omega, filtration, terms)
}

/// Sizes and strides shared by [`amplify`] and [`evaluate_amplified`].
struct AmplifyLayout {
    outer_atoms: usize,
    inner_atoms: usize,
    copies: usize,
    /// Total product atoms, `outer_atoms * inner_atoms^copies`.
    atoms: usize,
    /// Product atoms × composite chain dimension.
    scalars: u128,
}

impl AmplifyLayout {
    fn plan(we: &SWitnessSpec, wf: &SWitnessSpec) -> Result<Self> {
        let first_level = wf.terms[0].level;
        if !wf.filtration.level(first_level).is_trivial() {
            return Err(Error::invalid(
                "inner witness must start at the trivial partition; otherwise the \
                 composite level sequence stops being a filtration",
            ));
        }
        let outer_atoms = we.omega.len();
        let inner_atoms = wf.omega.len();
        let copies = we.terms.len();
        let mut atoms: u128 = outer_atoms as u128;
        for _ in 0..copies {
            atoms = atoms.saturating_mul(inner_atoms as u128);
        }
        let dim = (we.chain.dim() as u128) * (wf.chain.dim() as u128);
        let scalars = atoms.saturating_mul(dim);
        Ok(AmplifyLayout {
            outer_atoms,
            inner_atoms,
            copies,
            atoms: usize::try_from(atoms)
                .map_err(|_| Error::invalid("amplified space exceeds the address space"))?,
            scalars,
        })
    }

    /// Decode a product atom into the outer index and the per-copy indices.
    /// Layout is row-major with the outer factor slowest, matching
    /// [`measure::product`].
    #[inline]
    fn decode(&self, atom: usize, inner: &mut [usize]) -> usize {
        let mut rem = atom;
        for slot in inner.iter_mut().rev() {
            *slot = rem % self.inner_atoms;
            rem /= self.inner_atoms;
        }
        debug_assert!(rem < self.outer_atoms);
        rem
    }
}

/// Tensor two witnesses into one on the composite chain. Term `(k, n)` pairs
/// the `k`-th outer term with the `n`-th inner term: its field is
/// `θ_k(w')·ξ_n(w_k)` on `Ω' × Ω₀^{#outer terms}`, and its level resolves the
/// outer filtration to term `k`'s level, all copies before `k` fully, and
/// copy `k` to term `n`'s level. The resulting ratio is at least the product
/// of the input ratios.
///
/// Fails with [`Error::ProductTooLarge`] when the materialized fields would
/// exceed [`MATERIALIZE_CAP`]; use [`evaluate_amplified`] for those.
pub fn amplify(we: &SWitnessSpec, wf: &SWitnessSpec) -> Result<SWitnessSpec> {
    let layout = AmplifyLayout::plan(we, wf)?;
    if layout.scalars > MATERIALIZE_CAP {
        return Err(Error::ProductTooLarge {
            needed: layout.scalars,
            cap: MATERIALIZE_CAP,
        });
    }

    let chain = we.chain.concat(wf.chain());
    let mut factors: Vec<&FiniteProbSpace> = Vec::with_capacity(1 + layout.copies);
    factors.push(&we.omega);
    factors.extend(std::iter::repeat(&wf.omega).take(layout.copies));
    let omega = measure::product(&factors)?;

    // the composite filtration walks the inner term levels within each outer
    // term's group; term-level-indexed filtrations feed the shared builder
    let outer_levels = Filtration::new(
        we.terms
            .iter()
            .map(|t| we.filtration.level(t.level).clone())
            .collect(),
    )?;
    let inner_levels = Filtration::new(
        wf.terms
            .iter()
            .map(|t| wf.filtration.level(t.level).clone())
            .collect(),
    )?;
    let filtration = measure::tensor_filtration(&outer_levels, &inner_levels, layout.copies)?;

    let n_inner = wf.terms.len();
    let mut inner_idx = vec![0usize; layout.copies];
    let mut terms = Vec::with_capacity(layout.copies * n_inner);
    for (k, outer_term) in we.terms.iter().enumerate() {
        for (n, inner_term) in wf.terms.iter().enumerate() {
            let mut basis_index = outer_term.basis_index.clone();
            basis_index.extend_from_slice(&inner_term.basis_index);
            let mut theta = vec![0.0; layout.atoms];
            for (atom, value) in theta.iter_mut().enumerate() {
                let outer_atom = layout.decode(atom, &mut inner_idx);
                *value = outer_term.theta[outer_atom] * inner_term.theta[inner_idx[k]];
            }
            terms.push(WitnessTerm {
                basis_index,
                level: k * n_inner + n,
                theta,
            });
        }
    }
    SWitnessSpec::new(chain, omega, filtration, terms)
}

/// Evaluate the amplification of `we` by `wf` without materializing it.
/// Conditional expectations factorize through the product structure, so each
/// product atom needs only the two factor witnesses' smoothed fields; atoms
/// are processed in fixed-size chunks (parallel across chunks) and the L₁ sum
/// uses pairwise summation per chunk and across chunk totals, making the
/// result independent of the worker count.
pub fn evaluate_amplified(we: &SWitnessSpec, wf: &SWitnessSpec) -> Result<WitnessEvaluation> {
    let layout = AmplifyLayout::plan(we, wf)?;
    let chain = we.chain.concat(wf.chain());
    let dim = chain.dim();
    let inner_dim = wf.chain.dim();

    let smoothed_outer: Vec<ScalarField> = we
        .terms
        .iter()
        .map(|t| conditional_expectation(&we.omega, we.filtration.level(t.level), &t.theta))
        .collect::<Result<_>>()?;
    let smoothed_inner: Vec<ScalarField> = wf
        .terms
        .iter()
        .map(|t| conditional_expectation(&wf.omega, wf.filtration.level(t.level), &t.theta))
        .collect::<Result<_>>()?;

    // flat coordinate of term (k, n) in the composite chain
    let flats: Vec<Vec<usize>> = we
        .terms
        .iter()
        .map(|te| {
            let outer_flat = we.chain.flat_index(&te.basis_index).expect("validated");
            wf.terms
                .iter()
                .map(|tf| {
                    outer_flat * inner_dim
                        + wf.chain.flat_index(&tf.basis_index).expect("validated")
                })
                .collect()
        })
        .collect();

    let outer_weights = we.omega.weights();
    let inner_weights = wf.omega.weights();

    const CHUNK: usize = 1 << 14;
    let chunk_count = layout.atoms.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunk_count)
        .into_par_iter()
        .map(|ci| {
            let start = ci * CHUNK;
            let end = layout.atoms.min(start + CHUNK);
            let mut weighted_norms = Vec::with_capacity(end - start);
            let mut den_max = 0.0f64;
            let mut inner_idx = vec![0usize; layout.copies];
            let mut buf: Vec<f64> = Vec::with_capacity(dim);
            for atom in start..end {
                let outer_atom = layout.decode(atom, &mut inner_idx);
                let mut weight = outer_weights[outer_atom];
                for &w in inner_idx.iter() {
                    weight *= inner_weights[w];
                }

                buf.clear();
                buf.resize(dim, 0.0);
                for (k, term_flats) in flats.iter().enumerate() {
                    let smoothed_k = smoothed_outer[k][outer_atom];
                    let copy_atom = inner_idx[k];
                    for (n, &flat) in term_flats.iter().enumerate() {
                        buf[flat] = (smoothed_k * smoothed_inner[n][copy_atom]).abs();
                    }
                }
                let smoothed_norm = chain.fold_norm(&mut buf);
                weighted_norms.push(weight * smoothed_norm);

                if weight > 0.0 {
                    buf.clear();
                    buf.resize(dim, 0.0);
                    for (k, term_flats) in flats.iter().enumerate() {
                        let raw_k = we.terms[k].theta[outer_atom];
                        let copy_atom = inner_idx[k];
                        for (n, &flat) in term_flats.iter().enumerate() {
                            buf[flat] = (raw_k * wf.terms[n].theta[copy_atom]).abs();
                        }
                    }
                    den_max = den_max.max(chain.fold_norm(&mut buf));
                }
            }
            (pairwise_sum(&weighted_norms), den_max)
        })
        .collect();

    let chunk_sums: Vec<f64> = partials.iter().map(|p| p.0).collect();
    let denominator = partials.iter().fold(0.0f64, |m, p| m.max(p.1));
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let numerator = combine_chunk_sums(&chunk_sums);
    Ok(WitnessEvaluation {
        numerator,
        denominator,
        ratio: numerator / denominator,
    })
}

/// Everything a lower-bound pipeline run produces: the estimate, the final
/// evaluation, and the witness itself when it was small enough to keep.
#[derive(Debug, Clone)]
pub struct LowerBoundRun {
    pub estimate: ConstantEstimate,
    pub evaluation: WitnessEvaluation,
    /// `None` when the last stage had to stream.
    pub witness: Option<SWitnessSpec>,
}

/// Certified lower bound for the smoothing constant of the `2n`-layer
/// alternating chain: optimize the two-point constant, lift its witness to
/// the dimension-4 chain, then amplify `n−1` times. The result is at least
/// the optimized constant to the `n`-th power, up to float tolerance.
pub fn certified_lower_bound(
    p: Exponent,
    q: Exponent,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<ConstantEstimate> {
    Ok(lower_bound_run(p, q, n, cfg)?.estimate)
}

/// [`certified_lower_bound`] with the final witness and evaluation attached.
pub fn lower_bound_run(
    p: Exponent,
    q: Exponent,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<LowerBoundRun> {
    if n == 0 {
        return Err(Error::invalid("amplification depth must be at least 1"));
    }
    let base = compute_c(p, q, cfg)?;
    let a = [base.witness_params[0], base.witness_params[1]];
    let b = [base.witness_params[2], base.witness_params[3]];
    let unit = base_witness_e1(p, q, a, b)?.normalized()?;

    let mut witness = unit.clone();
    let mut evaluation = evaluate(&witness)?;
    let mut kept_witness = Some(witness.clone());
    for stage in 1..n {
        match amplify(&unit, &witness) {
            Ok(next) => {
                evaluation = evaluate(&next)?;
                witness = next;
                kept_witness = Some(witness.clone());
            }
            Err(Error::ProductTooLarge { .. }) if stage == n - 1 => {
                evaluation = evaluate_amplified(&unit, &witness)?;
                kept_witness = None;
            }
            Err(e) => return Err(e),
        }
    }

    let floor = base.certified_ratio.powi(n as i32) - 1e-7;
    assert!(
        evaluation.ratio >= floor,
        "amplified ratio {} fell below its guaranteed floor {}",
        evaluation.ratio,
        floor
    );
    let estimate = ConstantEstimate {
        value: evaluation.ratio,
        witness_params: base.witness_params.clone(),
        certified_ratio: evaluation.ratio,
        method: base.method,
        converged: base.converged,
        config: *cfg,
    };
    Ok(LowerBoundRun {
        estimate,
        evaluation,
        witness: kept_witness,
    })
}

/// Self-contained, re-checkable witness file. The claimed ratio is never
/// trusted: verification rebuilds the witness (re-running every construction
/// check) and recomputes the ratio from the stored fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub chain: MixedNormChain,
    pub omega: FiniteProbSpace,
    pub filtration: Filtration,
    pub terms: Vec<WitnessTerm>,
    pub claimed_ratio: f64,
}

impl WitnessCertificate {
    pub fn from_spec(spec: &SWitnessSpec, claimed_ratio: f64) -> Self {
        WitnessCertificate {
            chain: spec.chain.clone(),
            omega: spec.omega.clone(),
            filtration: spec.filtration.clone(),
            terms: spec.terms.clone(),
            claimed_ratio,
        }
    }

    pub fn to_spec(&self) -> Result<SWitnessSpec> {
        SWitnessSpec::new(
            self.chain.clone(),
            self.omega.clone(),
            self.filtration.clone(),
            self.terms.clone(),
        )
    }

    /// Recompute the ratio; the certificate holds when it is at least the
    /// claimed value minus [`VERIFY_SLACK`].
    pub fn verify(&self) -> Result<(WitnessEvaluation, bool)> {
        let spec = self.to_spec()?;
        let evaluation = evaluate(&spec)?;
        Ok((evaluation, evaluation.ratio >= self.claimed_ratio - VERIFY_SLACK))
    }
}
