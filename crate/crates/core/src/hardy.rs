//! Discrete-torus analytic machinery: spectral projection onto nonnegative
//! frequencies, conjugate functions, geometric means, outer functions built
//! from a prescribed modulus, and the analytic base-ratio computation that
//! replaces a mean by a geometric mean inside a mixed norm.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constants::{inner2, two_atom_kappa_value};
use crate::error::{Error, Result};
use crate::mixed_norm::Exponent;
use crate::numerics::pairwise_sum;

/// Smallest tolerated ratio of min to max modulus before the log used by the
/// outer construction is considered ill-conditioned.
const MODULUS_CONDITION_FLOOR: f64 = 1e-6;

/// Uniform grid of `n` points on the unit circle, `n` even and at least 4.
/// Evenness keeps the frequency window symmetric (`-n/2 .. n/2 - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "grid size must be an even integer of at least 4, got {n}"
            )));
        }
        Ok(TorusGrid { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Angles `2*pi*j/n` of the grid points, in index order.
    pub fn angles(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| std::f64::consts::TAU * j as f64 / self.n as f64)
            .collect()
    }
}

/// Signed frequency carried by DFT bin `index` on an `n`-point grid:
/// `0, 1, .., n/2 - 1, -n/2, .., -1`.
pub fn signed_frequency(index: usize, n: usize) -> i64 {
    debug_assert!(index < n);
    if index < n / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// Complex-valued function sampled on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dim(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("field samples must be finite"));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn from_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        ComplexField::new(
            grid,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Uniform average of the samples.
    pub fn mean(&self) -> Complex64 {
        let re: Vec<f64> = self.values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.values.iter().map(|z| z.im).collect();
        let n = self.values.len() as f64;
        Complex64::new(pairwise_sum(&re) / n, pairwise_sum(&im) / n)
    }

    /// Fourier coefficients in bin order (bin `k` carries
    /// [`signed_frequency`]`(k, n)`), normalized so a round trip through
    /// [`ComplexField::from_spectrum`] is the identity.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let n = self.values.len();
        let mut buf = self.values.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        for z in &mut buf {
            *z *= scale;
        }
        buf
    }

    pub fn from_spectrum(grid: TorusGrid, spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.len() {
            return Err(Error::dim(format!(
                "spectrum has {} bins, grid has {}",
                spectrum.len(),
                grid.len()
            )));
        }
        let mut buf = spectrum;
        FftPlanner::new()
            .plan_fft_inverse(grid.len())
            .process(&mut buf);
        ComplexField::new(grid, buf)
    }
}

/// Zero out all strictly negative frequencies, the Nyquist bin `-n/2`
/// included (it has no positive partner on an even grid). Idempotent, and an
/// orthogonal truncation, hence a contraction in the quadratic mean.
pub fn analytic_project(f: &ComplexField) -> ComplexField {
    let n = f.grid.len();
    let mut spec = f.spectrum();
    for (k, z) in spec.iter_mut().enumerate() {
        if signed_frequency(k, n) < 0 {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    ComplexField::from_spectrum(f.grid, spec).expect("projection preserves grid size")
}

/// Conjugate function: spectral multiplier `-i*sign(k)`, zero on the mean and
/// Nyquist bins. Maps real fields to real fields.
pub fn conjugate_function(f: &ComplexField) -> ComplexField {
    let n = f.grid.len();
    let mut spec = f.spectrum();
    for (k, z) in spec.iter_mut().enumerate() {
        let freq = signed_frequency(k, n);
        *z = if freq == 0 || k == n / 2 {
            Complex64::new(0.0, 0.0)
        } else if freq > 0 {
            Complex64::new(z.im, -z.re)
        } else {
            Complex64::new(-z.im, z.re)
        };
    }
    ComplexField::from_spectrum(f.grid, spec).expect("multiplier preserves grid size")
}

/// Exponential of the average logarithm of a strictly positive field.
pub fn geometric_mean(modulus: &[f64]) -> Result<f64> {
    if modulus.is_empty() {
        return Err(Error::invalid("empty field has no geometric mean"));
    }
    if modulus.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::invalid(
            "geometric mean needs strictly positive finite values",
        ));
    }
    let logs: Vec<f64> = modulus.iter().map(|x| x.ln()).collect();
    Ok((pairwise_sum(&logs) / modulus.len() as f64).exp())
}

/// Build the boundary values `exp(u + i*conj(u))`, `u = log modulus`: a
/// zero-free analytic extension whose modulus matches the input at every grid
/// point and whose mean has absolute value the geometric mean of the modulus
/// (up to discretization error concentrated at jumps of the modulus).
pub fn outer_from_modulus(grid: TorusGrid, modulus: &[f64]) -> Result<ComplexField> {
    if modulus.len() != grid.len() {
        return Err(Error::dim(format!(
            "modulus has {} samples, grid has {}",
            modulus.len(),
            grid.len()
        )));
    }
    if modulus.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::invalid(
            "outer construction needs a strictly positive finite modulus",
        ));
    }
    let min = modulus.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = modulus.iter().cloned().fold(0.0f64, f64::max);
    if min / max < MODULUS_CONDITION_FLOOR {
        return Err(Error::invalid(format!(
            "modulus spans a ratio of {:.3e}, too wide for a stable logarithm",
            min / max
        )));
    }
    let u: Vec<f64> = modulus.iter().map(|x| x.ln()).collect();
    let h = conjugate_function(&ComplexField::from_real(grid, &u)?);
    let values = u
        .iter()
        .zip(h.values())
        .map(|(&uj, hj)| Complex64::from_polar(uj.exp(), hj.re))
        .collect();
    ComplexField::new(grid, values)
}

/// Grid and closed-form values of the analytic base ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AumdReport {
    /// Ratio evaluated on the torus grid with outer functions in place of the
    /// first pair of fields.
    pub grid_ratio: f64,
    /// The same quantity collapsed to two atoms and evaluated in closed form.
    pub two_atom_ratio: f64,
}

/// Evaluate the swap construction `a = u on A, v on B`, `c` with the roles of
/// `u, v` exchanged, `b = w on A, t on B`, `d` exchanged, with `A` the first
/// and `B` the second half-arc of the grid. `a` and `c` are replaced by outer
/// functions with the same modulus; the ratio compares the averaged norm
/// after replacing them by their means against the pointwise supremum. The
/// halves see the same value set, so the grid value collapses exactly to a
/// two-atom expression, which is reported alongside it.
pub fn aumd_base_ratio(
    p: Exponent,
    q: Exponent,
    u: f64,
    v: f64,
    w: f64,
    t: f64,
    n: usize,
) -> Result<AumdReport> {
    if p.is_infinite() || q.is_infinite() {
        return Err(Error::invalid(
            "the analytic base ratio needs finite exponents",
        ));
    }
    if !(u.is_finite() && v.is_finite() && u > 0.0 && v > 0.0) {
        return Err(Error::invalid(
            "the first field pair needs strictly positive values",
        ));
    }
    if !(w.is_finite() && t.is_finite() && w >= 0.0 && t >= 0.0) {
        return Err(Error::invalid(
            "the second field pair needs nonnegative values",
        ));
    }
    let grid = TorusGrid::new(n)?;
    let half = n / 2;
    let pick = |j: usize, first: f64, second: f64| if j < half { first } else { second };
    let a_mod: Vec<f64> = (0..n).map(|j| pick(j, u, v)).collect();
    let c_mod: Vec<f64> = (0..n).map(|j| pick(j, v, u)).collect();
    let a_outer = outer_from_modulus(grid, &a_mod)?;
    let c_outer = outer_from_modulus(grid, &c_mod)?;
    let ma = a_outer.mean().norm();
    let mc = c_outer.mean().norm();

    let pv = p.get();
    let qv = q.get();
    let mut numerators = Vec::with_capacity(n);
    let mut denominator = 0.0f64;
    for j in 0..n {
        let b = pick(j, w, t);
        let d = pick(j, t, w);
        let aj = a_outer.values()[j].norm();
        let cj = c_outer.values()[j].norm();
        numerators.push(inner2(inner2(ma, b, qv), inner2(mc, d, qv), pv));
        denominator = denominator.max(inner2(inner2(aj, b, qv), inner2(cj, d, qv), pv));
    }
    if !(denominator > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let grid_ratio = pairwise_sum(&numerators) / n as f64 / denominator;
    let two_atom_ratio = two_atom_kappa_value(pv, qv, [u, v], [w, t]);
    Ok(AumdReport {
        grid_ratio,
        two_atom_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn e(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn l2_norm(f: &ComplexField) -> f64 {
        let sq: Vec<f64> = f.values().iter().map(|z| z.norm_sqr()).collect();
        (pairwise_sum(&sq) / sq.len() as f64).sqrt()
    }

    fn unit_circle_power(grid: TorusGrid, k: i64) -> ComplexField {
        let values = grid
            .angles()
            .iter()
            .map(|&th| Complex64::from_polar(1.0, k as f64 * th))
            .collect();
        ComplexField::new(grid, values).unwrap()
    }

    fn max_dist(a: &ComplexField, b: &ComplexField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn spectrum_round_trip() {
        let grid = TorusGrid::new(16).unwrap();
        let mut rng = crate::optim::rng_for_restart(41, 0);
        let values: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = ComplexField::new(grid, values).unwrap();
        let back = ComplexField::from_spectrum(grid, f.spectrum()).unwrap();
        assert!(max_dist(&f, &back) < 1e-10);
    }

    #[test]
    fn spectrum_places_pure_powers() {
        let grid = TorusGrid::new(8).unwrap();
        let f = unit_circle_power(grid, 3);
        let spec = f.spectrum();
        for (k, z) in spec.iter().enumerate() {
            let expect = if signed_frequency(k, 8) == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(z.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_fixes_positive_powers_and_kills_negative() {
        let grid = TorusGrid::new(8).unwrap();
        let z3 = unit_circle_power(grid, 3);
        assert!(max_dist(&analytic_project(&z3), &z3) < 1e-12);

        let zbar = unit_circle_power(grid, -1);
        let proj = analytic_project(&zbar);
        assert!(proj.values().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn projection_halves_cosine() {
        // 2cos = z + conj(z); the negative half is removed
        let grid = TorusGrid::new(8).unwrap();
        let cos2: Vec<Complex64> = grid
            .angles()
            .iter()
            .map(|&th| Complex64::new(2.0 * th.cos(), 0.0))
            .collect();
        let f = ComplexField::new(grid, cos2).unwrap();
        let proj = analytic_project(&f);
        let z = unit_circle_power(grid, 1);
        assert!(max_dist(&proj, &z) < 1e-12);
    }

    #[test]
    fn projection_idempotent_and_contractive() {
        let grid = TorusGrid::new(64).unwrap();
        let mut rng = crate::optim::rng_for_restart(43, 0);
        for _ in 0..5 {
            let values: Vec<Complex64> = (0..64)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let f = ComplexField::new(grid, values).unwrap();
            let once = analytic_project(&f);
            let twice = analytic_project(&once);
            assert!(max_dist(&once, &twice) < 1e-12);
            assert!(l2_norm(&once) <= l2_norm(&f) + 1e-12);
        }
    }

    #[test]
    fn conjugate_of_cosine_is_sine() {
        let grid = TorusGrid::new(32).unwrap();
        let cos2: Vec<f64> = grid.angles().iter().map(|&th| 2.0 * th.cos()).collect();
        let h = conjugate_function(&ComplexField::from_real(grid, &cos2).unwrap());
        for (&th, z) in grid.angles().iter().zip(h.values()) {
            assert_abs_diff_eq!(z.re, 2.0 * th.sin(), epsilon = 1e-10);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn conjugate_involution_negates_centered_field() {
        // smooth field: no energy at the Nyquist bin, so H(H(u)) = mean - u
        let grid = TorusGrid::new(128).unwrap();
        let u: Vec<f64> = grid
            .angles()
            .iter()
            .map(|&th| 0.7 + 0.5 * th.cos() + 0.2 * (3.0 * th).sin())
            .collect();
        let f = ComplexField::from_real(grid, &u).unwrap();
        let hh = conjugate_function(&conjugate_function(&f));
        let mean = f.mean().re;
        for (&uj, z) in u.iter().zip(hh.values()) {
            assert_abs_diff_eq!(z.re, -(uj - mean), epsilon = 1e-10);
        }
    }

    #[test]
    fn geometric_mean_closed_forms() {
        assert_abs_diff_eq!(geometric_mean(&[3.0; 10]).unwrap(), 3.0, epsilon = 1e-14);
        let two_valued: Vec<f64> = (0..8).map(|j| if j < 4 { 2.0 } else { 0.5 }).collect();
        assert_abs_diff_eq!(geometric_mean(&two_valued).unwrap(), 1.0, epsilon = 1e-14);

        let mut rng = crate::optim::rng_for_restart(47, 0);
        let random: Vec<f64> = (0..16).map(|_| rng.gen_range(0.2..4.0)).collect();
        let product: f64 = random.iter().product();
        assert_abs_diff_eq!(
            geometric_mean(&random).unwrap(),
            product.powf(1.0 / 16.0),
            epsilon = 1e-12
        );

        assert!(geometric_mean(&[1.0, 0.0]).is_err());
        assert!(geometric_mean(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn outer_constant_modulus_is_constant() {
        let grid = TorusGrid::new(16).unwrap();
        let o = outer_from_modulus(grid, &[2.5; 16]).unwrap();
        for z in o.values() {
            assert_abs_diff_eq!(z.re, 2.5, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(o.mean().norm(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn outer_smooth_modulus_meets_spectral_accuracy() {
        let grid = TorusGrid::new(256).unwrap();
        let modulus: Vec<f64> = grid.angles().iter().map(|&th| 1.0 + 0.5 * th.cos()).collect();
        let o = outer_from_modulus(grid, &modulus).unwrap();
        let worst = o
            .values()
            .iter()
            .zip(&modulus)
            .map(|(z, &m)| (z.norm() - m).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "modulus mismatch {worst}");
        let gm = geometric_mean(&modulus).unwrap();
        assert!((o.mean().norm() - gm).abs() <= 1e-6);
    }

    #[test]
    fn outer_two_valued_modulus_converges_with_refinement() {
        // jumps cost accuracy; the error must still be small and must shrink
        // as the grid doubles
        let mut errors = Vec::new();
        for n in [256usize, 512, 1024] {
            let grid = TorusGrid::new(n).unwrap();
            let modulus: Vec<f64> = (0..n).map(|j| if j < n / 2 { 2.0 } else { 0.5 }).collect();
            let o = outer_from_modulus(grid, &modulus).unwrap();
            let gm = geometric_mean(&modulus).unwrap();
            errors.push((o.mean().norm() - gm).abs());
        }
        assert!(errors[0] <= 0.01 * 1.0, "error at 256: {}", errors[0]);
        assert!(errors[1] <= 0.7 * errors[0]);
        assert!(errors[2] <= 0.7 * errors[1]);
    }

    #[test]
    fn outer_rejects_wide_or_invalid_modulus() {
        let grid = TorusGrid::new(8).unwrap();
        let mut wide = vec![1.0; 8];
        wide[3] = 1e-8;
        assert!(outer_from_modulus(grid, &wide).is_err());
        assert!(outer_from_modulus(grid, &[0.0; 8]).is_err());
        assert!(outer_from_modulus(grid, &[1.0; 4]).is_err());
    }

    #[test]
    fn base_ratio_constant_first_pair_is_one() {
        let r = aumd_base_ratio(e(2.0), e(4.0), 1.3, 1.3, 2.0, 0.5, 256).unwrap();
        assert_abs_diff_eq!(r.grid_ratio, 1.0, epsilon = 1e-12);
        assert_eq!(r.two_atom_ratio, 1.0);
    }

    #[test]
    fn base_ratio_matches_two_atom_value_on_optimal_pair() {
        // parameters from the geometric-mean constant's maximizer at (2, 4)
        let r = aumd_base_ratio(e(2.0), e(4.0), 1.732050537, 1.0, 2.912950012, 0.0, 256).unwrap();
        assert_abs_diff_eq!(r.two_atom_ratio, 1.019426546908, epsilon = 1e-6);
        let rel = (r.grid_ratio / r.two_atom_ratio - 1.0).abs();
        assert!(rel < 1e-3, "relative gap {rel}");
        assert!(r.grid_ratio > 1.0 + 1e-4);
    }

    #[test]
    fn base_ratio_without_second_pair_is_contractive() {
        // with b = d = 0 the ratio reduces to geometric mean over power mean
        let r = aumd_base_ratio(e(2.0), e(4.0), 3.0, 0.4, 0.0, 0.0, 256).unwrap();
        assert!(r.grid_ratio <= 1.0 + 1e-9, "ratio {}", r.grid_ratio);
        assert!(r.two_atom_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn base_ratio_validates_inputs() {
        assert!(aumd_base_ratio(e(2.0), e(4.0), 0.0, 1.0, 1.0, 1.0, 256).is_err());
        assert!(aumd_base_ratio(e(2.0), e(4.0), 1.0, 1.0, -1.0, 1.0, 256).is_err());
        assert!(aumd_base_ratio(Exponent::infinity(), e(4.0), 1.0, 2.0, 1.0, 1.0, 256).is_err());
        assert!(aumd_base_ratio(e(2.0), e(4.0), 1.0, 2.0, 1.0, 1.0, 7).is_err());
    }
}
