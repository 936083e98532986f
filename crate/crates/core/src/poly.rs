//! Real polynomial helpers. Coefficients are stored highest degree first
//! with the leading (monic) 1 omitted unless noted otherwise.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Coefficients of `Π (z + rᵢ)` for the given `rᵢ`, monic term omitted,
/// highest degree first: `[e₁, e₂, …, e_n]` (elementary symmetric sums).
pub fn expand_shifted_product(shifts: &[f64]) -> Vec<f64> {
    // full[k] is the coefficient of z^{n-k}; full[0] = 1
    let mut full = vec![1.0];
    for &r in shifts {
        let mut next = vec![0.0; full.len() + 1];
        for (k, &c) in full.iter().enumerate() {
            next[k] += c;
            next[k + 1] += c * r;
        }
        full = next;
    }
    full.remove(0);
    full
}

/// Evaluates the monic polynomial `z^n + c₀ z^{n-1} + … + c_{n-1}` and its
/// derivative at `z`.
fn eval_monic(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Parlett-Reinsch style diagonal balancing; improves eigenvalue accuracy
/// for companion matrices with widely spread coefficients.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    const RADIX: f64 = 2.0;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of the monic polynomial `z^n + c₀ z^{n-1} + … + c_{n-1}`.
///
/// Initial estimates come from the eigenvalues of the balanced companion
/// matrix; they are then refined with Aberth-Ehrlich iterations on the
/// polynomial itself.
pub fn monic_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(-coeffs[0], 0.0)];
    }

    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -coeffs[j];
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    balance(&mut companion);
    let mut roots: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();

    aberth_refine(coeffs, &mut roots);
    roots
}

fn aberth_refine(coeffs: &[f64], roots: &mut [Complex64]) {
    let n = roots.len();
    // coincident starting points would make the repulsion term singular
    for i in 0..n {
        for j in 0..i {
            if roots[i] == roots[j] {
                let nudge = 1e-8 * roots[i].norm().max(1.0);
                roots[i] += Complex64::new(nudge, nudge * (i as f64 + 1.0));
            }
        }
    }
    for _ in 0..100 {
        let mut max_rel = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval_monic(coeffs, roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    repulsion += (roots[i] - roots[j]).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            roots[i] -= step;
            max_rel = max_rel.max(step.norm() / roots[i].norm().max(f64::MIN_POSITIVE));
        }
        if max_rel < 1e-15 {
            break;
        }
    }
}
