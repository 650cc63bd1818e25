//! Signal capture threshold.
//!
//! For a population spectrum `(d_k)` of the kernel integral operator, the
//! threshold `ϑ(λ, N)` is the unique positive root of
//!
//! ```text
//! ϑ = λ + (ϑ/N) Σ_k d_k / (d_k + ϑ)
//! ```
//!
//! It always lies in `(λ, λ + Tr/N]`. Its ridge derivative has the closed form
//! `1 / (1 - (1/N) Σ d_k² / (d_k + ϑ)²)`. From training data alone both are
//! estimated through the Stieltjes transform of the Gram matrix:
//! `ϑ ≈ 1/m_G(-λ)` and `∂λϑ ≈ m_G'(-λ)/m_G(-λ)²`.

use crate::error::{check_ridge, Error, Result};
use crate::spectral::GramSpectrum;

/// One distinct eigenvalue of the integral operator with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// Truncated population spectrum, stored as distinct eigenvalues.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    entries: Vec<SpectrumEntry>,
}

impl Spectrum {
    pub fn new(entries: Vec<SpectrumEntry>) -> Result<Self> {
        for e in &entries {
            if !(e.eigenvalue > 0.0 && e.eigenvalue.is_finite()) {
                return Err(Error::input(format!(
                    "spectrum eigenvalues must be positive and finite, got {}",
                    e.eigenvalue
                )));
            }
            if e.multiplicity == 0 {
                return Err(Error::input("spectrum multiplicities must be at least 1"));
            }
        }
        Ok(Spectrum { entries })
    }

    /// Unit-multiplicity spectrum from a list of eigenvalues.
    pub fn from_eigenvalues(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&eigenvalue| SpectrumEntry {
                    eigenvalue,
                    multiplicity: 1,
                })
                .collect(),
        )
    }

    pub fn from_pairs(pairs: &[(f64, u64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(eigenvalue, multiplicity)| SpectrumEntry {
                    eigenvalue,
                    multiplicity,
                })
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Spectrum::default()
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ mult · d`.
    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.multiplicity as f64 * e.eigenvalue)
            .sum()
    }

    /// Number of eigenvalues once multiplicities are expanded.
    pub fn expanded_len(&self) -> u128 {
        self.entries.iter().map(|e| e.multiplicity as u128).sum()
    }

    /// Eigenvalues with each multiplicity expanded into unit entries, in entry order.
    pub fn expanded(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.eigenvalue, e.multiplicity as usize))
            .collect()
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.entries
            .iter()
            .map(|e| e.multiplicity as f64 * f(e.eigenvalue))
            .sum()
    }
}

/// The threshold and its ridge derivative at one `(λ, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SctResult {
    pub theta: f64,
    pub theta_prime: f64,
}

const MAX_ITERATIONS: usize = 200;
const NEWTON_SWITCH: f64 = 1e-3;
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

/// Residual `g(ϑ) = ϑ - λ - (ϑ/n) Σ mult·d/(d+ϑ)` of the defining equation.
pub fn sct_residual(spec: &Spectrum, n: u64, lambda: f64, theta: f64) -> f64 {
    theta - lambda - theta / n as f64 * spec.weighted_sum(|d| d / (d + theta))
}

/// Solves for `ϑ(λ, n)` and `∂λϑ(λ, n)` on the bracket `[λ, λ + Tr/n]`.
pub fn solve_sct(spec: &Spectrum, n: u64, lambda: f64) -> Result<SctResult> {
    check_ridge(lambda)?;
    if n == 0 {
        return Err(Error::input("sample count must be at least 1"));
    }
    if spec.is_empty() {
        return Ok(SctResult {
            theta: lambda,
            theta_prime: 1.0,
        });
    }
    let nf = n as f64;
    let trace = spec.trace();

    // h = g/ϑ is increasing and concave in ϑ, which keeps Newton iterates on
    // the left of the root and preserves relative accuracy for tiny ridges.
    let h = |t: f64| 1.0 - lambda / t - spec.weighted_sum(|d| d / (d + t)) / nf;
    let dh = |t: f64| lambda / (t * t) + spec.weighted_sum(|d| d / ((d + t) * (d + t))) / nf;

    let mut lo = lambda;
    let mut hi = lambda + trace / nf;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        if hi - lo <= NEWTON_SWITCH * lo {
            break;
        }
        // geometric midpoint while the bracket spans orders of magnitude
        let mid = if hi > 2.0 * lo { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut theta = lo;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let value = h(theta);
        if value == 0.0 {
            converged = true;
            break;
        }
        if value < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        let mut next = theta - value / dh(theta);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - theta).abs();
        theta = next;
        if step <= 4.0 * f64::EPSILON * theta || hi - lo <= 2.0 * f64::EPSILON * hi {
            converged = true;
            break;
        }
    }

    let residual = sct_residual(spec, n, lambda, theta);
    if !converged && residual.abs() > RESIDUAL_TOLERANCE * (lambda + trace / nf) {
        return Err(Error::numeric(format!(
            "signal capture threshold did not converge (λ={lambda}, n={n}, residual {residual:e})"
        )));
    }
    Ok(SctResult {
        theta,
        theta_prime: sct_derivative(spec, n, lambda, theta),
    })
}

/// `∂λϑ = 1 / (1 - (1/n) Σ mult·d²/(d+ϑ)²)` at a solved `ϑ`.
///
/// At the root `1 - (1/n) Σ d/(d+ϑ) = λ/ϑ`, so the denominator is evaluated as
/// `λ/ϑ + (1/n) Σ d·ϑ/(d+ϑ)²`, which avoids cancellation when `λ ≪ ϑ`.
fn sct_derivative(spec: &Spectrum, n: u64, lambda: f64, theta: f64) -> f64 {
    let denom = lambda / theta
        + spec.weighted_sum(|d| d * theta / ((d + theta) * (d + theta))) / n as f64;
    1.0 / denom
}

/// Data-driven threshold from the Gram spectrum: `ϑ̂ = 1/m`, `∂λϑ̂ = m'/m²`.
pub fn sct_from_gram(s: &GramSpectrum, lambda: f64) -> Result<SctResult> {
    let m = s.stieltjes(lambda)?;
    let dm = s.stieltjes_derivative(lambda)?;
    Ok(SctResult {
        theta: 1.0 / m,
        theta_prime: dm / (m * m),
    })
}

fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Multiplicity `n_d(k) = Σ_{j=1..k} C(d, j) C(k-1, j-1)` (and `n_d(0) = 1`),
/// the number of ways to write `k` as an ordered sum of `d` nonnegative integers.
/// `None` when the value does not fit in a `u64`.
pub fn rbf_gaussian_multiplicity(dim: u64, k: u64) -> Option<u64> {
    if k == 0 {
        return Some(1);
    }
    let mut total: u128 = 0;
    for j in 1..=k.min(dim) {
        let term = binomial(dim, j)?.checked_mul(binomial(k - 1, j - 1)?)?;
        total = total.checked_add(term)?;
    }
    u64::try_from(total).ok()
}

/// Closed-form spectrum of the RBF kernel `exp(-‖x-x'‖²/ℓ)` on centered
/// isotropic Gaussian data with standard deviation `σ` in dimension `dim`,
/// truncated to orders `k = 0..=k_max`.
pub fn rbf_gaussian_spectrum(dim: u32, lengthscale: f64, sigma: f64, k_max: u32) -> Result<Spectrum> {
    if dim == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    if !(lengthscale > 0.0 && sigma > 0.0 && lengthscale.is_finite() && sigma.is_finite()) {
        return Err(Error::domain("lengthscale and sigma must be positive"));
    }
    let s2 = sigma * sigma;
    let c = (1.0 / (2.0 * sigma)) * (1.0 / (4.0 * s2) + 2.0 / lengthscale).sqrt();
    let a = 1.0 / (4.0 * s2) + 1.0 / lengthscale + c;
    let b = 1.0 / (a * lengthscale);
    let prefactor = (1.0 / (2.0 * a * s2)).sqrt().powi(dim as i32);

    let mut entries = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let Some(multiplicity) = rbf_gaussian_multiplicity(dim as u64, k as u64) else {
            log::warn!("multiplicity n_{dim}({k}) overflows; truncating spectrum at k={}", k.saturating_sub(1));
            break;
        };
        let eigenvalue = prefactor * b.powi(k as i32);
        if eigenvalue <= 0.0 {
            log::warn!("eigenvalue underflow at k={k}; truncating spectrum");
            break;
        }
        entries.push(SpectrumEntry {
            eigenvalue,
            multiplicity,
        });
    }
    Spectrum::new(entries)
}

/// `d_k = k^{-β}` for `k = 1..=count`, unit multiplicities.
pub fn power_law_spectrum(beta: f64, count: usize) -> Result<Spectrum> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::domain(format!("decay exponent must exceed 1, got {beta}")));
    }
    if count == 0 {
        return Err(Error::input("power-law spectrum needs at least one entry"));
    }
    let values: Vec<f64> = (1..=count).map(|k| (k as f64).powf(-beta)).collect();
    Spectrum::from_eigenvalues(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Plain bisection on the defining equation; independent oracle.
    fn bisection_oracle(spec: &Spectrum, n: u64, lambda: f64) -> f64 {
        let (mut lo, mut hi) = (lambda, lambda + spec.trace() / n as f64);
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if sct_residual(spec, n, lambda, mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn empty_spectrum() {
        let r = solve_sct(&Spectrum::empty(), 17, 0.3).unwrap();
        assert_eq!(r, SctResult { theta: 0.3, theta_prime: 1.0 });
    }

    #[test]
    fn golden_ratio_case() {
        let spec = Spectrum::from_eigenvalues(&[1.0]).unwrap();
        let r = solve_sct(&spec, 1, 1.0).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(r.theta, golden, max_relative = 1e-14);
        assert_relative_eq!(r.theta, 1.6180339887, epsilon = 1e-10);
        assert_relative_eq!(r.theta, bisection_oracle(&spec, 1, 1.0), max_relative = 1e-14);
        // 1/(1 - 1/(1+ϑ)²)
        assert_relative_eq!(r.theta_prime, 1.0 / (1.0 - 1.0 / ((1.0 + golden) * (1.0 + golden))), max_relative = 1e-13);
    }

    #[test]
    fn large_n_squeezes_to_ridge() {
        let spec = Spectrum::from_eigenvalues(&[1.0]).unwrap();
        let n = 1_000_000;
        let r = solve_sct(&spec, n, 1.0).unwrap();
        assert!(r.theta > 1.0 && r.theta <= 1.0 + 1.0 / n as f64);
        // exact first-order term: ϑ ≈ λ + λ/(n(1+λ)) = 1 + 5e-7
        assert_relative_eq!(r.theta - 1.0, 5e-7, max_relative = 1e-5);
    }

    #[test]
    fn residual_within_tolerance() {
        let spec = Spectrum::from_pairs(&[(3.0, 2), (0.5, 5), (1e-3, 40)]).unwrap();
        for &n in &[1u64, 10, 1000] {
            for &lambda in &[1e-10, 1e-4, 1.0, 100.0] {
                let r = solve_sct(&spec, n, lambda).unwrap();
                let tol = RESIDUAL_TOLERANCE * (lambda + spec.trace() / n as f64);
                assert!(sct_residual(&spec, n, lambda, r.theta).abs() <= tol);
                assert_relative_eq!(r.theta, bisection_oracle(&spec, n, lambda), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let spec = Spectrum::from_pairs(&[(2.0, 1), (0.4, 3), (0.01, 20)]).unwrap();
        for &n in &[5u64, 50, 500] {
            for &lambda in &[1e-3, 1e-1, 1.0] {
                let h = 1e-6 * lambda;
                let plus = solve_sct(&spec, n, lambda + h).unwrap().theta;
                let minus = solve_sct(&spec, n, lambda - h).unwrap().theta;
                let fd = (plus - minus) / (2.0 * h);
                let exact = solve_sct(&spec, n, lambda).unwrap().theta_prime;
                assert_relative_eq!(exact, fd, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn gram_estimator_examples() {
        let zero = GramSpectrum::from_eigenvalues(vec![0.0; 4]).unwrap();
        let r = sct_from_gram(&zero, 0.7).unwrap();
        assert_relative_eq!(r.theta, 0.7, max_relative = 1e-15);
        assert_relative_eq!(r.theta_prime, 1.0, max_relative = 1e-15);

        let ident = GramSpectrum::from_eigenvalues(vec![1.0; 3]).unwrap();
        let r = sct_from_gram(&ident, 1.0).unwrap();
        assert_eq!((r.theta, r.theta_prime), (2.0, 1.0));

        let two = GramSpectrum::from_eigenvalues(vec![0.0, 1.0]).unwrap();
        let r = sct_from_gram(&two, 1.0).unwrap();
        assert_relative_eq!(r.theta, 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(r.theta_prime, 0.625 / 0.5625, max_relative = 1e-15);
        assert!(sct_from_gram(&two, 0.0).is_err());
    }

    #[test]
    fn rbf_gaussian_one_dimensional() {
        let spec = rbf_gaussian_spectrum(1, 1.0, 1.0, 12).unwrap();
        for (k, e) in spec.entries().iter().enumerate() {
            assert_eq!(e.eigenvalue, 0.5f64.powi(k as i32 + 1));
            assert_eq!(e.multiplicity, 1);
        }
        // geometric series sums to the trace E[K(x,x)] = 1 in the limit
        assert_relative_eq!(spec.trace(), 1.0 - 0.5f64.powi(13), max_relative = 1e-15);
    }

    #[test]
    fn rbf_gaussian_full_trace_is_one() {
        // Σ_k n_d(k) B^k = (1-B)^{-d}, so a long truncation has trace → E[K(x,x)] = 1
        let spec = rbf_gaussian_spectrum(3, 2.0, 0.7, 80).unwrap();
        assert_relative_eq!(spec.trace(), 1.0, max_relative = 1e-10);
        let w = spec.entries().windows(2).all(|p| p[1].eigenvalue < p[0].eigenvalue);
        assert!(w);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(rbf_gaussian_multiplicity(2, 3), Some(4));
        for d in 1..=10u64 {
            assert_eq!(rbf_gaussian_multiplicity(d, 0), Some(1));
            assert_eq!(rbf_gaussian_multiplicity(d, 1), Some(d));
            assert_eq!(rbf_gaussian_multiplicity(d, 2), Some(d * (d - 1) / 2 + d));
            // stars and bars: C(k+d-1, k)
            for k in 0..12u64 {
                assert_eq!(rbf_gaussian_multiplicity(d, k), binomial(k + d - 1, k).map(|v| v as u64));
            }
        }
        assert_eq!(rbf_gaussian_multiplicity(20, 10), Some(20_030_010));
        assert_eq!(rbf_gaussian_multiplicity(1000, 40), None);
    }

    #[test]
    fn overflowing_multiplicity_truncates() {
        let spec = rbf_gaussian_spectrum(1000, 1000.0, 1.0, 60).unwrap();
        assert!(spec.entries().len() < 61);
        assert!(!spec.is_empty());
    }

    #[test]
    fn power_law_examples() {
        let s = power_law_spectrum(2.0, 3).unwrap();
        let vals: Vec<f64> = s.entries().iter().map(|e| e.eigenvalue).collect();
        assert_eq!(vals, vec![1.0, 0.25, 1.0 / 9.0]);
        assert_eq!(power_law_spectrum(3.0, 1).unwrap().expanded(), vec![1.0]);
        let s = power_law_spectrum(1.5, 2).unwrap();
        assert_relative_eq!(s.entries()[1].eigenvalue, 0.35355339, epsilon = 1e-8);
        assert!(power_law_spectrum(1.0, 3).is_err());
        assert!(power_law_spectrum(2.0, 0).is_err());
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::from_pairs(&[(0.0, 1)]).is_err());
        assert!(Spectrum::from_pairs(&[(1.0, 0)]).is_err());
        assert!(Spectrum::from_pairs(&[(f64::INFINITY, 1)]).is_err());
        let s = Spectrum::from_pairs(&[(2.0, 3), (1.0, 1)]).unwrap();
        assert_eq!(s.expanded(), vec![2.0, 2.0, 2.0, 1.0]);
        assert_eq!(s.trace(), 7.0);
        assert!(solve_sct(&s, 0, 1.0).is_err());
        assert!(matches!(solve_sct(&s, 3, -1.0), Err(Error::Domain(_))));
    }
}
