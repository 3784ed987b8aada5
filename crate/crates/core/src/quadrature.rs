//! Gauss-Lobatto quadrature rules.
//!
//! Lobatto rules place integration points at both interval ends, which lets
//! beam-column elements monitor section response exactly where plastic hinges
//! form.  An `n`-point rule integrates polynomials up to degree `2n - 3`
//! exactly.

use crate::error::{CoreError, Result};

/// A one-dimensional quadrature rule: paired point locations and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Point locations, ascending.
    pub points: Vec<f64>,
    /// Weights, same order as `points`.
    pub weights: Vec<f64>,
}

/// Evaluates the Legendre polynomial `P_n` and its first derivative at `x`
/// using the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // Derivative from the standard identity; the interior-point callers never
    // evaluate at x = +-1.
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Returns the Gauss-Lobatto rule with `n` points on the reference interval
/// `[-1, 1]`.
///
/// # Arguments
/// * `n` - number of integration points, `2..=10`.
///
/// # Returns
/// The rule with ascending points; endpoints are always included and the
/// weights sum to 2.
pub fn gauss_lobatto_rule(n: usize) -> Result<QuadratureRule> {
    if !(2..=10).contains(&n) {
        return Err(CoreError::invalid(format!(
            "Gauss-Lobatto rule supports 2..=10 points, got {n}"
        )));
    }
    let m = n - 1; // interior points are the roots of P_m'
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    points[0] = -1.0;
    points[n - 1] = 1.0;
    let end_weight = 2.0 / (n as f64 * m as f64);
    weights[0] = end_weight;
    weights[n - 1] = end_weight;

    for i in 1..m {
        // Chebyshev-Lobatto abscissa as the Newton start; these interlace the
        // Legendre-Lobatto points closely for the small n used here.
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            // Root of P_m'; second derivative from the Legendre ODE.
            let d2p = (2.0 * x * dp - (m as f64) * (m as f64 + 1.0) * p) / (1.0 - x * x);
            let step = dp / d2p;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (p, _) = legendre_with_derivative(m, x);
        points[i] = x;
        weights[i] = 2.0 / (n as f64 * m as f64 * p * p);
    }
    // Enforce exact symmetry; Newton leaves ~1e-16 asymmetries behind.
    for i in 0..n / 2 {
        let x = 0.5 * (points[n - 1 - i] - points[i]);
        points[i] = -x;
        points[n - 1 - i] = x;
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = 0.0;
    }
    Ok(QuadratureRule { points, weights })
}

/// Gauss-Lobatto rule mapped to `[0, length]`; the weights sum to `length`.
pub fn gauss_lobatto_on_length(n: usize, length: f64) -> Result<QuadratureRule> {
    if !(length.is_finite() && length > 0.0) {
        return Err(CoreError::invalid(format!("length must be positive, got {length}")));
    }
    let rule = gauss_lobatto_rule(n)?;
    Ok(QuadratureRule {
        points: rule.points.iter().map(|x| 0.5 * length * (x + 1.0)).collect(),
        weights: rule.weights.iter().map(|w| 0.5 * length * w).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Oracle: integrate monomials x^k over [-1,1] analytically and compare.
    fn monomial_error(rule: &QuadratureRule, k: u32) -> f64 {
        let quad: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(k as i32))
            .sum();
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        (quad - exact).abs()
    }

    #[test]
    fn three_point_rule_matches_closed_form() {
        // 1/3, 4/3, 1/3 at -1, 0, 1.
        let rule = gauss_lobatto_rule(3).unwrap();
        assert_relative_eq!(rule.points[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(rule.points[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(rule.points[2], 1.0, epsilon = 1e-14);
        assert_relative_eq!(rule.weights[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(rule.weights[1], 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(rule.weights[2], 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn four_point_rule_matches_closed_form() {
        // Interior points at +-1/sqrt(5) with weight 5/6; end weight 1/6.
        let rule = gauss_lobatto_rule(4).unwrap();
        let x = 1.0 / 5.0_f64.sqrt();
        assert_relative_eq!(rule.points[1], -x, epsilon = 1e-14);
        assert_relative_eq!(rule.points[2], x, epsilon = 1e-14);
        assert_relative_eq!(rule.weights[0], 1.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(rule.weights[1], 5.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn rules_are_exact_to_degree_2n_minus_3() {
        for n in 2..=10 {
            let rule = gauss_lobatto_rule(n).unwrap();
            let degree = 2 * n - 3;
            for k in 0..=degree as u32 {
                assert!(
                    monomial_error(&rule, k) < 1e-12,
                    "n = {n}, monomial x^{k} not integrated exactly"
                );
            }
        }
    }

    #[test]
    fn exactness_degrades_beyond_2n_minus_3() {
        // The next even monomial must show a visible quadrature error,
        // otherwise the exactness test above proves nothing.
        for n in [3usize, 4, 5, 7] {
            let rule = gauss_lobatto_rule(n).unwrap();
            let k = (2 * n - 2) as u32; // even, degree 2n-2 > 2n-3
            assert!(
                monomial_error(&rule, k) > 1e-6,
                "n = {n}: x^{k} unexpectedly integrated exactly"
            );
        }
    }

    #[test]
    fn weights_sum_to_interval_measure() {
        for n in 2..=10 {
            let rule = gauss_lobatto_rule(n).unwrap();
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let mapped = gauss_lobatto_on_length(n, 3.2).unwrap();
            assert_relative_eq!(mapped.weights.iter().sum::<f64>(), 3.2, epsilon = 1e-12);
            assert_relative_eq!(mapped.points[0], 0.0, epsilon = 1e-14);
            assert_relative_eq!(mapped.points[n - 1], 3.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn points_include_endpoints_and_ascend() {
        for n in 2..=10 {
            let rule = gauss_lobatto_rule(n).unwrap();
            assert_eq!(rule.points.len(), n);
            assert!(rule.points.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(rule.points[0], -1.0);
            assert_eq!(rule.points[n - 1], 1.0);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn out_of_range_point_counts_are_rejected() {
        assert!(gauss_lobatto_rule(1).is_err());
        assert!(gauss_lobatto_rule(11).is_err());
        assert!(gauss_lobatto_on_length(4, 0.0).is_err());
        assert!(gauss_lobatto_on_length(4, -1.0).is_err());
    }
}
