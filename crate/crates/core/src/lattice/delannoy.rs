//! Weighted Delannoy numbers and the critical point of their generating
//! function, which governs the asymptotic ratio of tail probabilities.

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// Weighted Delannoy number `d_{r,s}` with horizontal weight `alpha`,
/// vertical weight `beta` and diagonal weight `gamma`.
pub fn delannoy(r: usize, s: usize, alpha: f64, beta: f64, gamma: f64) -> f64 {
    delannoy_table(r, s, alpha, beta, gamma)[r][s]
}

/// Full table `d[i][j]` for `i ≤ r`, `j ≤ s`.
pub fn delannoy_table(r: usize, s: usize, alpha: f64, beta: f64, gamma: f64) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; s + 1]; r + 1];
    for i in 0..=r {
        for j in 0..=s {
            d[i][j] = match (i, j) {
                (0, 0) => 1.0,
                (0, j) => alpha * d[0][j - 1],
                (i, 0) => beta * d[i - 1][0],
                (i, j) => alpha * d[i][j - 1] + beta * d[i - 1][j] + gamma * d[i - 1][j - 1],
            };
        }
    }
    d
}

/// Ratio of expected received length to transmitted length, `(1−Pd)/(1−Pi)`,
/// inverted so that it describes the lattice direction `r/s`.
pub fn expected_drift_direction(params: &ChannelParams) -> f64 {
    (1.0 - params.pi) / (1.0 - params.pd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub q1: f64,
    pub z1: f64,
    pub omega: f64,
    pub rho: f64,
    pub eta: f64,
    /// False when the second root lies in the first quadrant closer to the origin.
    pub minimal: bool,
}

impl CriticalPoint {
    /// `1 − βq − αz − γqz` at `(q1, z1)`.
    pub fn residual(&self, params: &ChannelParams) -> f64 {
        let (a, b, g) = weights(params);
        1.0 - b * self.q1 - a * self.z1 - g * self.q1 * self.z1
    }

    /// Asymptotic value of `P_{r+δr}(suffix) / P_r(suffix')` when the
    /// received suffix grows by `δs`.
    pub fn tail_ratio(&self, delta_r: i64, delta_s: i64) -> f64 {
        self.q1.powi(-delta_r as i32) * self.z1.powi(-delta_s as i32)
    }
}

fn weights(p: &ChannelParams) -> (f64, f64, f64) {
    (p.pi / 2.0, p.pd, p.pt() / 2.0)
}

/// Critical point of `H(q,z) = 1 − βq − αz − γqz` in direction `eta`, with
/// `α = Pi/2`, `β = Pd`, `γ = Pt/2`.
pub fn critical_point(params: &ChannelParams, eta: f64) -> Result<CriticalPoint> {
    params.validate()?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("direction {eta} must be positive")));
    }
    let (a, b, g) = weights(params);
    if g <= 0.0 {
        return Err(Error::Domain("transmission probability is zero".into()));
    }
    let omega = g / (a * b + g);
    // (η+1)² − 4ωη written without cancellation for small α·β
    let one_minus_omega = a * b / (a * b + g);
    let rho = ((eta - 1.0).powi(2) + 4.0 * eta * one_minus_omega).sqrt();

    let (mut q, mut z, minimal) = if a > 0.0 && b > 0.0 {
        let q1 = (2.0 * omega - 1.0 - 1.0 / eta + rho / eta) / (2.0 * omega * b);
        let z1 = (2.0 * omega - 1.0 - eta + rho) / (2.0 * omega * a);
        let q2 = (2.0 * omega - 1.0 - 1.0 / eta - rho / eta) / (2.0 * omega * b);
        let z2 = (2.0 * omega - 1.0 - eta - rho) / (2.0 * omega * a);
        let dominated = q2 > 0.0 && z2 > 0.0 && q2 <= q1 && z2 <= z1;
        (q1, z1, !dominated)
    } else if b == 0.0 && a > 0.0 {
        if eta >= 1.0 {
            return Err(Error::Domain(format!("direction {eta} unreachable without deletions")));
        }
        let q = eta * a / (g * (1.0 - eta));
        (q, 1.0 / (a + g * q), true)
    } else if a == 0.0 && b > 0.0 {
        if eta <= 1.0 {
            return Err(Error::Domain(format!("direction {eta} unreachable without insertions")));
        }
        let z = b / (g * (eta - 1.0));
        (1.0 / (b + g * z), z, true)
    } else {
        (1.0, 1.0 / g, true)
    };

    // Newton polish on H = 0 and the direction equation.
    if a > 0.0 || b > 0.0 {
        for _ in 0..8 {
            let f1 = 1.0 - b * q - a * z - g * q * z;
            let f2 = -eta * z * (a + g * q) + q * (b + g * z);
            if f1.abs() < 1e-15 && f2.abs() < 1e-15 {
                break;
            }
            let j11 = -b - g * z;
            let j12 = -a - g * q;
            let j21 = -eta * g * z + b + g * z;
            let j22 = -eta * a - eta * g * q + g * q;
            let det = j11 * j22 - j12 * j21;
            if det == 0.0 {
                break;
            }
            q -= (f1 * j22 - f2 * j12) / det;
            z -= (j11 * f2 - j21 * f1) / det;
        }
    }
    if !(q > 0.0 && z > 0.0) {
        return Err(Error::Domain(format!("critical point ({q}, {z}) outside first quadrant")));
    }
    Ok(CriticalPoint { q1: q, z1: z, omega, rho, eta, minimal })
}

/// `q1^(−δr) · z1^(−δs)` at the expected-drift critical point.
pub fn tail_ratio_asymptotic(params: &ChannelParams, delta_r: i64, delta_s: i64) -> Result<f64> {
    let cp = critical_point(params, expected_drift_direction(params))?;
    Ok(cp.tail_ratio(delta_r, delta_s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(pi: f64, pd: f64) -> ChannelParams {
        ChannelParams::new(pi, pd, 0.0).unwrap()
    }

    #[test]
    fn central_delannoy() {
        assert_eq!(delannoy(2, 2, 1.0, 1.0, 1.0), 13.0);
        assert_eq!(delannoy(3, 3, 1.0, 1.0, 1.0), 63.0);
    }

    #[test]
    fn diagonal_only() {
        for r in 0..6 {
            for s in 0..6 {
                let want = if r == s { 1.0 } else { 0.0 };
                assert_eq!(delannoy(r, s, 0.0, 0.0, 1.0), want);
            }
        }
    }

    #[test]
    fn boundaries() {
        assert_relative_eq!(delannoy(3, 0, 0.5, 0.2, 0.3), 0.008, max_relative = 1e-15);
        assert_relative_eq!(delannoy(0, 4, 0.5, 0.2, 0.3), 0.0625, max_relative = 1e-15);
    }

    #[test]
    fn symmetric_channel_gives_one_two() {
        for &x in &[1e-4, 0.005, 0.01, 0.05, 0.2] {
            let params = p(x, x);
            let cp = critical_point(&params, 1.0).unwrap();
            assert_relative_eq!(cp.q1, 1.0, epsilon = 1e-12);
            assert_relative_eq!(cp.z1, 2.0, epsilon = 1e-12);
            assert_relative_eq!(cp.omega, (1.0 - 2.0 * x) / (1.0 - x).powi(2), max_relative = 1e-12);
            assert_relative_eq!(cp.rho, 2.0 * x / (1.0 - x), max_relative = 1e-12);
            assert!(cp.minimal);
        }
    }

    #[test]
    fn expected_direction_is_one_two_for_any_channel() {
        for &(pi, pd) in &[(0.01, 0.03), (0.04, 0.0), (0.0, 0.02), (0.1, 0.05), (0.0, 0.0)] {
            let params = p(pi, pd);
            let cp = critical_point(&params, expected_drift_direction(&params)).unwrap();
            assert!(cp.residual(&params).abs() <= 1e-12);
            assert_relative_eq!(cp.q1, 1.0, epsilon = 1e-10);
            assert_relative_eq!(cp.z1, 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn direction_equation_holds() {
        let params = p(0.03, 0.01);
        let (a, b, g) = weights(&params);
        for &eta in &[0.8, 1.0, 1.3] {
            let cp = critical_point(&params, eta).unwrap();
            let (q, z) = (cp.q1, cp.z1);
            let hz = -a - g * q;
            let hq = -b - g * z;
            assert!((eta * z * hz - q * hq).abs() < 1e-12);
            assert!(cp.residual(&params).abs() <= 1e-12);
        }
    }

    #[test]
    fn ratio_examples() {
        let params = p(0.02, 0.02);
        assert_eq!(tail_ratio_asymptotic(&params, 0, 0).unwrap(), 1.0);
        assert_relative_eq!(tail_ratio_asymptotic(&params, 1, 1).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_direction() {
        assert!(critical_point(&p(0.01, 0.01), 0.0).is_err());
        assert!(critical_point(&p(0.01, 0.01), f64::NAN).is_err());
    }
}
