use nalgebra::{Complex, DMatrix};

/// Roots of the lag polynomials must have modulus above `1 + margin`.
pub const STATIONARITY_MARGIN: f64 = 1e-6;

/// Inverse roots are pulled to at most this modulus when reflected.
const REFLECT_CEILING: f64 = 0.999;

/// Roots of `w^k + a_1 w^{k-1} + ... + a_k` as companion-matrix eigenvalues.
fn monic_roots(a: &[f64]) -> Vec<Complex<f64>> {
    let k = a.len();
    if k == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<f64>::zeros(k, k);
    for (j, &aj) in a.iter().enumerate() {
        companion[(0, j)] = -aj;
    }
    for i in 1..k {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Coefficients `a_1..a_k` of `prod (w - r_i)`.
fn monic_from_roots(roots: &[Complex<f64>]) -> Vec<f64> {
    let mut poly = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        poly = next;
    }
    poly[1..].iter().map(|c| c.re).collect()
}

/// Reciprocals of the roots of `1 - sum phi_i z^i`; stationarity means all
/// lie strictly inside the unit circle.
pub fn ar_inverse_roots(phi: &[f64]) -> Vec<Complex<f64>> {
    let a: Vec<f64> = phi.iter().map(|v| -v).collect();
    monic_roots(&a)
}

/// Reciprocals of the roots of `1 + sum lambda_i z^i`.
pub fn ma_inverse_roots(lambda: &[f64]) -> Vec<Complex<f64>> {
    monic_roots(lambda)
}

pub(crate) fn inside_margin(inverse_roots: &[Complex<f64>]) -> bool {
    inverse_roots.iter().all(|r| r.norm() < 1.0 / (1.0 + STATIONARITY_MARGIN))
}

/// Moves every inverse root on or outside the margin to `1 / conj(r)`,
/// capped at [`REFLECT_CEILING`]. Returns `None` when nothing changed.
fn reflect(inverse_roots: &[Complex<f64>]) -> Option<Vec<Complex<f64>>> {
    if inside_margin(inverse_roots) {
        return None;
    }
    let limit = 1.0 / (1.0 + STATIONARITY_MARGIN);
    Some(
        inverse_roots
            .iter()
            .map(|&r| {
                let m = r.norm();
                if m < limit {
                    r
                } else {
                    r * ((1.0 / m).min(REFLECT_CEILING) / m)
                }
            })
            .collect(),
    )
}

pub(crate) fn reflect_ar(phi: &[f64]) -> Option<Vec<f64>> {
    reflect(&ar_inverse_roots(phi)).map(|roots| monic_from_roots(&roots).iter().map(|a| -a).collect())
}

pub(crate) fn reflect_ma(lambda: &[f64]) -> Option<Vec<f64>> {
    reflect(&ma_inverse_roots(lambda)).map(|roots| monic_from_roots(&roots))
}
