//! Cross-checks on the two-atom constants: duality, strict gaps, certified
//! witness reproducibility, and the first-order difference-quotient identity
//! that justifies the geometric-mean objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use umdlab_core::constants::{
    compute_c, compute_kappa, divergence_diagnostic, kappa_ratio, projection_ratio,
    OptimizerConfig,
};
use umdlab_core::measure::FiniteProbSpace;
use umdlab_core::mixed_norm::Exponent;

fn e(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn inf() -> Exponent {
    Exponent::infinity()
}

fn cfg() -> OptimizerConfig {
    OptimizerConfig::default()
}

#[test]
fn dual_exponent_pairs_agree() {
    // c(p,q) = c(p',q') for conjugate exponents; the optimizer sees both
    // sides independently, so agreement is a real cross-check.
    let pairs = [
        ((2.0, 4.0), (2.0, 4.0 / 3.0)),
        ((4.0, 2.0), (4.0 / 3.0, 2.0)),
        ((1.5, 3.0), (3.0, 1.5)),
        ((4.0, 4.0 / 3.0), (4.0 / 3.0, 4.0)),
    ];
    for ((p, q), (dp, dq)) in pairs {
        let a = compute_c(e(p), e(q), &cfg()).unwrap().value;
        let b = compute_c(e(dp), e(dq), &cfg()).unwrap().value;
        assert!(
            (a - b).abs() < 2e-3,
            "c({p},{q}) = {a} vs c({dp},{dq}) = {b}"
        );
    }
}

#[test]
fn strict_gap_away_from_the_diagonal() {
    // whenever |1/p - 1/q| >= 0.1 the constant exceeds 1 by a margin
    for (p, q) in [(1.5f64, 2.2f64), (2.0, 4.0), (8.0, 2.0), (1.2, 1.9)] {
        assert!((1.0 / p - 1.0 / q).abs() >= 0.1);
        let est = compute_c(e(p), e(q), &cfg()).unwrap();
        assert!(
            est.value > 1.0 + 1e-4,
            "c({p},{q}) = {} not separated from 1",
            est.value
        );
    }
}

#[test]
fn value_never_drops_below_one() {
    // the identity start certifies ratio exactly 1, so the max can't be less
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    for _ in 0..10 {
        let p = e(rng.gen_range(1.0..5.0));
        let q = e(rng.gen_range(1.0..5.0));
        let est = compute_c(p, q, &cfg()).unwrap();
        assert!(est.value >= 1.0);
    }
}

#[test]
fn certified_ratio_is_reproducible() {
    let pairs = [
        (e(2.0), e(4.0)),
        (e(4.0), e(2.0)),
        (e(1.5), e(3.0)),
        (inf(), e(1.0)),
        (e(1.0), inf()),
    ];
    for (p, q) in pairs {
        let est = compute_c(p, q, &cfg()).unwrap();
        let w = &est.witness_params;
        let again = projection_ratio(p, q, [w[0], w[1]], [w[2], w[3]]).unwrap();
        assert!(
            (again - est.certified_ratio).abs() <= 1e-12 * (1.0 + est.certified_ratio),
            "re-evaluation drifted for ({p},{q}): {again} vs {}",
            est.certified_ratio
        );
    }
    for (p, q) in [(e(2.0), e(4.0)), (e(1.5), e(3.0)), (e(4.0), e(1.5))] {
        let est = compute_kappa(p, q, &cfg()).unwrap();
        let w = &est.witness_params;
        let again = kappa_ratio(p, q, [w[0], w[1]], [w[2], w[3]]).unwrap();
        assert!((again - est.certified_ratio).abs() <= 1e-12 * (1.0 + est.certified_ratio));
    }
}

#[test]
fn kappa_rejects_degenerate_exponents() {
    assert!(compute_kappa(e(2.0), e(2.0), &cfg()).is_err());
    assert!(compute_kappa(inf(), e(2.0), &cfg()).is_err());
    assert!(compute_kappa(e(2.0), inf(), &cfg()).is_err());
}

#[test]
fn partial_products_plateau_for_a_converging_sequence() {
    // p_i = 2 + 2^{-i}: adjacent constants shrink to 1 fast enough that the
    // running product levels off instead of diverging
    let seq: Vec<Exponent> = (0..7).map(|i| e(2.0 + 0.5f64.powi(i))).collect();
    let products = divergence_diagnostic(&seq, &cfg()).unwrap();
    assert_eq!(products.len(), 6);
    for w in products.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "running product decreased");
    }
    let last = products[products.len() - 1];
    let prev = products[products.len() - 2];
    assert!(last < 1.5, "product {last} does not look bounded");
    assert!((last - prev).abs() < 1e-3, "no plateau: {prev} -> {last}");
}

#[test]
fn divergence_diagnostic_needs_two_exponents() {
    assert!(divergence_diagnostic(&[e(2.0)], &cfg()).is_err());
}

/// First-order identity behind the geometric-mean objective: on a finite
/// probability space, [∫(ε|f|+|g|)^α dν − ∫|g|^α dν] / ε converges to
/// α ∫ |f| |g|^(α−1) dν at rate O(ε).
#[test]
fn difference_quotient_converges_at_first_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(302);
    let epsilons = [1e-2, 1e-3, 1e-4];
    for _ in 0..10 {
        let raw: Vec<f64> = (0..16).map(|_| rng.gen_range(0.2..1.0)).collect();
        let mass: f64 = raw.iter().sum();
        let space =
            FiniteProbSpace::probability(raw.into_iter().map(|w| w / mass).collect()).unwrap();
        let f: Vec<f64> = (0..16).map(|_| rng.gen_range(0.5..2.0)).collect();
        let g: Vec<f64> = (0..16).map(|_| rng.gen_range(0.5..2.0)).collect();
        let integral = |h: &dyn Fn(usize) -> f64| -> f64 {
            (0..16).map(|i| space.weight(i) * h(i)).sum::<f64>()
        };
        for alpha in [0.5, 2.0, 3.0] {
            let limit = integral(&|i| alpha * f[i] * g[i].powf(alpha - 1.0));
            let base = integral(&|i| g[i].powf(alpha));
            let errs: Vec<f64> = epsilons
                .iter()
                .map(|&eps| {
                    let shifted = integral(&|i| (eps * f[i] + g[i]).powf(alpha));
                    ((shifted - base) / eps - limit).abs()
                })
                .collect();
            for (err, eps) in errs.iter().zip(&epsilons) {
                assert!(
                    *err <= 50.0 * eps,
                    "alpha={alpha}: error {err} not O(eps) at eps={eps}"
                );
            }
            // consecutive ratios near 0.1 per decade of eps: first order
            for w in errs.windows(2) {
                let ratio = w[1] / w[0];
                assert!(
                    (0.03..0.3).contains(&ratio),
                    "alpha={alpha}: error ratio {ratio} inconsistent with first order"
                );
            }
        }
    }
}
