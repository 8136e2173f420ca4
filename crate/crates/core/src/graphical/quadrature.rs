use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre polynomial from Chebyshev initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut z = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// The 16-point rule mapped to `[0, 1]`, computed once.
pub fn gauss_legendre_unit() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(16);
        x.iter().zip(&w).map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = gauss_legendre_unit();
        let total: f64 = rule.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        // degree 31 is the exactness limit for 16 points
        let i: f64 = rule.iter().map(|&(x, w)| w * x.powi(31)).sum();
        assert!((i - 1.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn arctan_integral() {
        let i: f64 = gauss_legendre_unit().iter().map(|&(t, w)| w / (1.0 + (1.0 - 2.0 * t).powi(2))).sum();
        assert!((i - PI / 4.0).abs() < 1e-10);
    }
}
