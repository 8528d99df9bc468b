//! Shared derivative-free maximizer: seeded multi-start Nelder-Mead with a
//! compass-search polish.
//!
//! Restart `i` draws its start from a ChaCha stream keyed by
//! `(master_seed, i)`, so runs are reproducible and independent of thread
//! scheduling: all restarts are evaluated (possibly in parallel) and merged
//! by value with the lowest restart index breaking ties.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::OptimizerConfig;

pub(crate) struct SearchProblem<'a> {
    pub dim: usize,
    /// Objective to maximize; must handle any real input (clamp internally)
    /// and return `f64::NEG_INFINITY` for infeasible points.
    pub objective: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// Starts tried before the random restarts, in order.
    pub deterministic_starts: Vec<Vec<f64>>,
    /// Draws a random start for one restart.
    pub sample_start: &'a (dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync),
}

pub(crate) struct SearchOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// True when the winning restart's polish drove its step below `tol`
    /// within the iteration budget.
    pub converged: bool,
}

pub(crate) fn rng_for_restart(master_seed: u64, restart_index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&restart_index.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

pub(crate) fn multi_start_maximize(
    problem: &SearchProblem<'_>,
    cfg: &OptimizerConfig,
) -> SearchOutcome {
    let det = problem.deterministic_starts.len();
    let total = det + cfg.restarts as usize;
    let runs: Vec<(usize, Vec<f64>)> = (0..total)
        .map(|i| {
            let start = if i < det {
                problem.deterministic_starts[i].clone()
            } else {
                let mut rng = rng_for_restart(cfg.master_seed, (i - det) as u64);
                (problem.sample_start)(&mut rng)
            };
            (i, start)
        })
        .collect();

    let results: Vec<(usize, SearchOutcome)> = runs
        .into_par_iter()
        .map(|(i, start)| (i, single_start(problem, cfg, start)))
        .collect();

    // deterministic merge: best value, ties to the lowest restart index
    let mut best: Option<(usize, SearchOutcome)> = None;
    for (i, r) in results {
        let better = match &best {
            None => true,
            Some((bi, b)) => r.value > b.value || (r.value == b.value && i < *bi),
        };
        if better {
            best = Some((i, r));
        }
    }
    best.expect("at least one restart").1
}

fn single_start(
    problem: &SearchProblem<'_>,
    cfg: &OptimizerConfig,
    start: Vec<f64>,
) -> SearchOutcome {
    let (x, value) = nelder_mead(problem, cfg, start);
    compass_polish(problem, cfg, x, value)
}

/// Adaptive Nelder-Mead (maximization). Terminates on simplex collapse or
/// the iteration budget; the subsequent polish cleans up either way.
fn nelder_mead(
    problem: &SearchProblem<'_>,
    cfg: &OptimizerConfig,
    start: Vec<f64>,
) -> (Vec<f64>, f64) {
    let n = problem.dim;
    let f = |x: &[f64]| (problem.objective)(x);

    // adaptive coefficients help in higher dimensions
    let nf = n as f64;
    let alpha = 1.0;
    let gamma = 1.0 + 2.0 / nf;
    let rho = 0.75 - 1.0 / (2.0 * nf);
    let sigma = 1.0 - 1.0 / nf;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.clone(), f(&start)));
    for i in 0..n {
        let mut v = start.clone();
        let scale = v[i].abs().max(1.0);
        v[i] += cfg.step_init * scale;
        let fv = f(&v);
        simplex.push((v, fv));
    }

    for _ in 0..cfg.max_iters {
        // descending by value: best first (maximization)
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread_x = (0..n)
            .map(|i| {
                let lo = simplex.iter().map(|(v, _)| v[i]).fold(f64::INFINITY, f64::min);
                let hi = simplex
                    .iter()
                    .map(|(v, _)| v[i])
                    .fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0f64, f64::max);
        let spread_f = simplex[0].1 - simplex[n].1;
        if spread_x < cfg.tol && spread_f.abs() < cfg.tol * (1.0 + simplex[0].1.abs()) {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(v, _)| v[i]).sum::<f64>() / nf)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i]))
            .collect();
        let fr = f(&reflect);

        if fr > simplex[0].1 {
            // try expanding past the reflection
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflect[i] - centroid[i]))
                .collect();
            let fe = f(&expand);
            simplex[n] = if fe > fr { (expand, fe) } else { (reflect, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
            continue;
        }
        // contraction, outside or inside of the worst vertex
        let (contract, fc) = if fr > worst.1 {
            let c: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (reflect[i] - centroid[i]))
                .collect();
            let fc = f(&c);
            (c, fc)
        } else {
            let c: Vec<f64> = (0..n)
                .map(|i| centroid[i] - rho * (centroid[i] - worst.0[i]))
                .collect();
            let fc = f(&c);
            (c, fc)
        };
        if fc > worst.1.max(fr) {
            simplex[n] = (contract, fc);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v: Vec<f64> = (0..n)
                .map(|i| best[i] + sigma * (vertex.0[i] - best[i]))
                .collect();
            let fv = f(&v);
            *vertex = (v, fv);
        }
    }

    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0).into()
}

/// Axis-aligned pattern search from `x`: sweeps ±step moves per coordinate,
/// halving (by `cfg.shrink`) after sweeps without improvement. Handles the
/// kinks that stall a simplex when an exponent is 1 or ∞.
fn compass_polish(
    problem: &SearchProblem<'_>,
    cfg: &OptimizerConfig,
    mut x: Vec<f64>,
    mut value: f64,
) -> SearchOutcome {
    let f = |x: &[f64]| (problem.objective)(x);
    let mut step = cfg.step_init;
    let mut sweeps = 0u32;
    let budget = cfg.max_iters.max(1);
    while step >= cfg.tol && sweeps < budget {
        sweeps += 1;
        let mut improved = false;
        for i in 0..problem.dim {
            let scale = x[i].abs().max(1.0);
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step * scale;
                let fy = f(&y);
                if fy > value {
                    x = y;
                    value = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= cfg.shrink;
        }
    }
    SearchOutcome {
        x,
        value,
        converged: step < cfg.tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn quad_problem() -> (impl Fn(&[f64]) -> f64 + Sync, Vec<f64>) {
        // smooth concave bump with max 7 at (1.5, -2.0)
        let f = |x: &[f64]| 7.0 - (x[0] - 1.5).powi(2) - 2.0 * (x[1] + 2.0).powi(2);
        (f, vec![1.5, -2.0])
    }

    #[test]
    fn finds_smooth_maximum() {
        let (f, argmax) = quad_problem();
        let sample = |rng: &mut ChaCha8Rng| vec![rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let problem = SearchProblem {
            dim: 2,
            objective: &f,
            deterministic_starts: vec![vec![0.0, 0.0]],
            sample_start: &sample,
        };
        let cfg = OptimizerConfig::default();
        let out = multi_start_maximize(&problem, &cfg);
        assert!(out.converged);
        assert!((out.value - 7.0).abs() < 1e-9);
        assert!((out.x[0] - argmax[0]).abs() < 1e-4);
        assert!((out.x[1] - argmax[1]).abs() < 1e-4);
    }

    #[test]
    fn polishes_through_a_kink() {
        // max of -|x - 1| - |y + 0.25| at (1, -0.25); nonsmooth at the optimum
        let f = |x: &[f64]| -(x[0] - 1.0).abs() - (x[1] + 0.25).abs();
        let sample = |rng: &mut ChaCha8Rng| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let problem = SearchProblem {
            dim: 2,
            objective: &f,
            deterministic_starts: vec![],
            sample_start: &sample,
        };
        let out = multi_start_maximize(&problem, &OptimizerConfig::default());
        assert!(out.value > -1e-8, "kinked max missed: {}", out.value);
    }

    #[test]
    fn same_seed_same_answer() {
        let (f, _) = quad_problem();
        let sample = |rng: &mut ChaCha8Rng| vec![rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let problem = SearchProblem {
            dim: 2,
            objective: &f,
            deterministic_starts: vec![],
            sample_start: &sample,
        };
        let cfg = OptimizerConfig::default();
        let a = multi_start_maximize(&problem, &cfg);
        let b = multi_start_maximize(&problem, &cfg);
        assert_eq!(a.x, b.x);
        assert_eq!(a.value, b.value);
    }
}
