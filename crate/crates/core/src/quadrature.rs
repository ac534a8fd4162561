//! Gauss-Legendre rules on the reference interval [-1, 1].

use std::f64::consts::PI;

/// Points and weights of an `n`-point Gauss-Legendre rule, points ascending.
///
/// Roots of P_n are found by Newton iteration from the Chebyshev-like
/// initial guess; weights follow from P_n'. Exact for polynomials of
/// degree 2n - 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "a quadrature rule needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[i] = -x;
        points[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    (points, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over `[lo, hi]` with an `n`-point rule.
pub fn integrate<F: FnMut(f64) -> f64>(lo: f64, hi: f64, n: usize, mut f: F) -> f64 {
    let (pts, wts) = gauss_legendre(n);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    pts.iter()
        .zip(&wts)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=40 {
            let (_, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn known_two_and_three_point_rules() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_relative_eq!(x[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_eq!(x[1], 0.0);
        assert_relative_eq!(w[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        for n in 1..=12 {
            let deg = 2 * n - 1;
            let got = integrate(-1.0, 2.0, n, |x| x.powi(deg as i32));
            let exact = (2f64.powi(deg as i32 + 1) - (-1f64).powi(deg as i32 + 1)) / (deg as f64 + 1.0);
            assert_relative_eq!(got, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn points_ascending_inside_interval() {
        let (x, _) = gauss_legendre(30);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!(x[0] > -1.0 && x[29] < 1.0);
    }
}
