//! Tensor-product trapezoid quadrature for divergences between densities
//! in one or two dimensions.
//!
//! These routines only see log-density callables, so they serve as an
//! independent check on the closed-form divergences. For smooth, rapidly
//! decaying integrands the trapezoid rule converges geometrically; the
//! reported error is the difference between the full grid and the nested
//! grid of half the resolution.

use crate::error::{Error, Result};

use super::Nats;

/// Axis-aligned integration box.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl IntegrationBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.is_empty() || lo.len() > 2 {
            return Err(Error::InvalidParameter(format!("quadrature supports dimension 1 or 2, got {}", lo.len())));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("box needs lo < hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    /// Box centred at `center` with half-width `half` on every axis.
    pub fn centered(center: &[f64], half: f64) -> Result<Self> {
        Self::new(center.iter().map(|c| c - half).collect(), center.iter().map(|c| c + half).collect())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// `|T(resolution) - T(resolution / 2)|`
    pub error: f64,
}

/// Trapezoid integral of `f` over the box with `resolution` intervals per
/// axis, together with the nested half-resolution value.
fn trapezoid<F: Fn(&[f64]) -> f64>(f: F, domain: &IntegrationBox, resolution: usize) -> (f64, f64) {
    let n = resolution;
    let h: Vec<f64> = domain.lo.iter().zip(&domain.hi).map(|(a, b)| (b - a) / n as f64).collect();
    let w = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let wc = |i: usize| if i == 0 || i == n { 0.5 } else { 1.0 };
    let (mut fine, mut coarse) = (0.0, 0.0);
    match domain.dim() {
        1 => {
            for i in 0..=n {
                let v = f(&[domain.lo[0] + i as f64 * h[0]]);
                fine += w(i) * v;
                if i % 2 == 0 {
                    coarse += wc(i) * v;
                }
            }
            (fine * h[0], coarse * 2.0 * h[0])
        }
        _ => {
            let mut x = [0.0; 2];
            for i in 0..=n {
                x[0] = domain.lo[0] + i as f64 * h[0];
                for j in 0..=n {
                    x[1] = domain.lo[1] + j as f64 * h[1];
                    let v = f(&x);
                    fine += w(i) * w(j) * v;
                    if i % 2 == 0 && j % 2 == 0 {
                        coarse += wc(i) * wc(j) * v;
                    }
                }
            }
            (fine * h[0] * h[1], coarse * 4.0 * h[0] * h[1])
        }
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 4 || !resolution.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("resolution must be even and >= 4, got {resolution}")));
    }
    Ok(())
}

/// Numerical `D(d0 || d1) = ∫ d0 ln(d0/d1)` over `domain`.
///
/// Fails with [`Error::DomainTooLarge`] when the box misses more than
/// `1e-8` of the mass of `d0`.
pub fn kl_numeric_oracle<F0, F1>(log_d0: F0, log_d1: F1, domain: &IntegrationBox, resolution: usize) -> Result<QuadratureEstimate>
where
    F0: Fn(&[f64]) -> f64,
    F1: Fn(&[f64]) -> f64,
{
    check_resolution(resolution)?;
    let (mass, _) = trapezoid(|x| log_d0(x).exp(), domain, resolution);
    let missing = 1.0 - mass;
    if missing > 1e-8 {
        return Err(Error::DomainTooLarge { mass: missing });
    }
    let integrand = |x: &[f64]| {
        let l0 = log_d0(x);
        let p0 = l0.exp();
        if p0 == 0.0 {
            0.0
        } else {
            p0 * (l0 - log_d1(x))
        }
    };
    let (fine, coarse) = trapezoid(integrand, domain, resolution);
    Ok(QuadratureEstimate { value: fine, error: (fine - coarse).abs() })
}

/// Numerical `D_alpha(d0 || d1) = ln(∫ d0^alpha d1^(1-alpha)) / (alpha - 1)`.
/// Truncation is the caller's responsibility.
pub fn renyi_numeric_oracle<F0, F1>(
    alpha: f64,
    log_d0: F0,
    log_d1: F1,
    domain: &IntegrationBox,
    resolution: usize,
) -> Result<QuadratureEstimate>
where
    F0: Fn(&[f64]) -> f64,
    F1: Fn(&[f64]) -> f64,
{
    check_resolution(resolution)?;
    let integrand = |x: &[f64]| (alpha * log_d0(x) + (1.0 - alpha) * log_d1(x)).exp();
    let (fine, coarse) = trapezoid(integrand, domain, resolution);
    let to_div = |v: f64| -> Nats { v.ln() / (alpha - 1.0) };
    Ok(QuadratureEstimate { value: to_div(fine), error: (to_div(fine) - to_div(coarse)).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::Normal;

    fn normal(m: f64, v: f64) -> impl Fn(&[f64]) -> f64 {
        let n = Normal::new(m, v).unwrap();
        move |x: &[f64]| n.log_density(x[0])
    }

    #[test]
    fn identical_densities_give_zero() {
        let dom = IntegrationBox::centered(&[0.0], 12.0).unwrap();
        let est = kl_numeric_oracle(normal(0.0, 1.0), normal(0.0, 1.0), &dom, 400).unwrap();
        assert!(est.value.abs() <= 1e-8);
    }

    #[test]
    fn unit_shift_is_one_half() {
        let dom = IntegrationBox::centered(&[0.0], 14.0).unwrap();
        let est = kl_numeric_oracle(normal(0.0, 1.0), normal(1.0, 1.0), &dom, 400).unwrap();
        assert!((est.value - 0.5).abs() <= 1e-6, "{est:?}");
        assert!(est.error <= 1e-9);
    }

    #[test]
    fn variance_ratio_matches_hand_formula() {
        // 1/2 (1/4 - 1 + ln 4)
        let dom = IntegrationBox::centered(&[0.0], 14.0).unwrap();
        let est = kl_numeric_oracle(normal(0.0, 1.0), normal(0.0, 4.0), &dom, 400).unwrap();
        let hand = 0.5 * (0.25 - 1.0 + 4.0f64.ln());
        assert!((est.value - hand).abs() <= 1e-6);
    }

    #[test]
    fn truncated_box_rejected() {
        let dom = IntegrationBox::centered(&[0.0], 3.0).unwrap();
        let err = kl_numeric_oracle(normal(0.0, 1.0), normal(1.0, 1.0), &dom, 200).unwrap_err();
        assert!(matches!(err, Error::DomainTooLarge { .. }));
    }

    #[test]
    fn three_dimensions_rejected() {
        assert!(IntegrationBox::new(vec![0.0; 3], vec![1.0; 3]).is_err());
    }

    #[test]
    fn renyi_oracle_two_dimensional_identity() {
        let dom = IntegrationBox::centered(&[0.0, 0.0], 12.0).unwrap();
        let f = |x: &[f64]| normal(0.0, 1.0)(&x[..1]) + normal(0.0, 1.0)(&x[1..]);
        let est = renyi_numeric_oracle(2.0, f, f, &dom, 200).unwrap();
        assert!(est.value.abs() < 1e-10);
    }
}
