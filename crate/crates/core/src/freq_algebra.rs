//! Map between frequencies and the coefficients θ of the generator
//! polynomial `P_θ(s) = s^{2N} + θ₁s^{2N-2} + … + θ_N`, whose roots are `±iωᵢ`.
//!
//! With `z = s²`, `P_θ` becomes `Π (z + ωᵢ²)`, so `θₖ` is the k-th
//! elementary symmetric sum of the squared frequencies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multisine::frequencies_coincide;
use crate::poly;

/// Roots with `|Im z| ≤ IMAG_TOL·max(1, |z|)` are treated as real.
pub const IMAG_TOL: f64 = 1e-6;

pub fn theta_from_frequencies(omegas: &[f64]) -> Result<Vec<f64>> {
    if omegas.is_empty() {
        return Err(Error::InvalidFrequencies("no frequencies given".into()));
    }
    if let Some(w) = omegas.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidFrequencies(format!(
            "frequency {w} is not positive"
        )));
    }
    let mut squares: Vec<f64> = omegas.iter().map(|w| w * w).collect();
    // sorting fixes the summation order, so permuted inputs give identical bits
    squares.sort_by(f64::total_cmp);
    for pair in squares.windows(2) {
        if frequencies_coincide(pair[0].sqrt(), pair[1].sqrt()) {
            return Err(Error::InvalidFrequencies(format!(
                "duplicate frequency {}",
                pair[0].sqrt()
            )));
        }
    }
    Ok(poly::expand_shifted_product(&squares))
}

/// Decodes θ back into ascending frequencies.
///
/// Fails with [`Error::NotFrequencyVector`] when any root of
/// `z^N + θ₁z^{N-1} + … + θ_N` is complex or non-negative, which is normal
/// for estimates in the middle of a transient.
pub fn frequencies_from_theta(theta: &[f64]) -> Result<Vec<f64>> {
    if theta.is_empty() {
        return Err(Error::InvalidFrequencies("empty coefficient vector".into()));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidFrequencies("non-finite coefficient".into()));
    }
    let roots = poly::monic_roots(theta);
    let admissible = roots
        .iter()
        .all(|z| z.im.abs() <= IMAG_TOL * z.norm().max(1.0) && z.re < 0.0);
    if !admissible {
        return Err(Error::NotFrequencyVector { roots });
    }
    let mut omegas: Vec<f64> = roots.iter().map(|z| (-z.re).sqrt()).collect();
    omegas.sort_by(f64::total_cmp);
    Ok(omegas)
}

/// Roots of `z^N + θ₁z^{N-1} + … + θ_N`, unfiltered.
pub fn theta_roots(theta: &[f64]) -> Vec<Complex64> {
    poly::monic_roots(theta)
}
