//! Moments `int_I w_k(x) F(x) dx` of synthetic signals, with `w_k = x^k`
//! (monomial) or `w_k = e^{ikx}` (harmonic).
//!
//! Piecewise-constant integrands use exact step integrals. Smooth
//! integrands use composite Simpson with panel doubling: the difference of
//! two levels divided by 15 estimates the error of the finer one, and the
//! Richardson-extrapolated value is returned once every moment's estimate
//! is below the tolerance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use prony_core::MomentSequence;

use crate::error::{config_error, CliError};

pub const TOLERANCE: f64 = 1e-10;
const MAX_PANELS: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Integrand {
    /// `values[i]` on `[breakpoints[i], breakpoints[i+1])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `sum_j a_j 1[x_j, x_j + width]`.
    BoxShifts {
        width: f64,
        shifts: Vec<f64>,
        amplitudes: Vec<f64>,
    },
    /// `sum_j a_j exp(-(x - x_j)^2 / (2 sigma^2))`, summed over `2 pi`
    /// translates when `periodic`.
    GaussianShifts {
        sigma: f64,
        shifts: Vec<f64>,
        amplitudes: Vec<f64>,
        periodic: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    Monomial,
    Harmonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub integrand: Integrand,
    pub weight: Weight,
    pub interval: (f64, f64),
    pub panels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub moments: MomentSequence,
    /// Panels of the finer level; zero for closed forms.
    pub panels: usize,
    pub error_estimate: f64,
    pub closed_form: bool,
}

fn weight_integral(weight: Weight, k: usize, a: f64, b: f64) -> Complex64 {
    match weight {
        Weight::Monomial => {
            let p = k as i32 + 1;
            Complex64::new((b.powi(p) - a.powi(p)) / p as f64, 0.0)
        }
        Weight::Harmonic if k == 0 => Complex64::new(b - a, 0.0),
        Weight::Harmonic => {
            let kf = k as f64;
            (Complex64::from_polar(1.0, kf * b) - Complex64::from_polar(1.0, kf * a))
                / Complex64::new(0.0, kf)
        }
    }
}

fn weight_values(weight: Weight, x: f64, out: &mut [Complex64]) {
    match weight {
        Weight::Monomial => {
            let mut p = 1.0;
            for v in out.iter_mut() {
                *v = Complex64::new(p, 0.0);
                p *= x;
            }
        }
        Weight::Harmonic => {
            let step = Complex64::from_polar(1.0, x);
            let mut p = Complex64::new(1.0, 0.0);
            for v in out.iter_mut() {
                *v = p;
                p *= step;
            }
        }
    }
}

/// Constant pieces `(a, b, value)` clipped to the interval.
fn steps(integrand: &Integrand, (lo, hi): (f64, f64)) -> Option<Vec<(f64, f64, f64)>> {
    let raw: Vec<(f64, f64, f64)> = match integrand {
        Integrand::PiecewiseConstant {
            breakpoints,
            values,
        } => breakpoints
            .windows(2)
            .zip(values)
            .map(|(w, &v)| (w[0], w[1], v))
            .collect(),
        Integrand::BoxShifts {
            width,
            shifts,
            amplitudes,
        } => shifts
            .iter()
            .zip(amplitudes)
            .map(|(&x, &a)| (x, x + width, a))
            .collect(),
        Integrand::GaussianShifts { .. } => return None,
    };
    Some(
        raw.into_iter()
            .filter_map(|(a, b, v)| {
                let (a, b) = (a.max(lo), b.min(hi));
                (a < b).then_some((a, b, v))
            })
            .collect(),
    )
}

fn check(q: &QuadratureSpec) -> Result<(), CliError> {
    let (lo, hi) = q.interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(config_error(
            "quadrature interval must be finite with lo < hi",
        ));
    }
    if q.panels < 64 {
        return Err(config_error("quadrature needs at least 64 panels"));
    }
    match &q.integrand {
        Integrand::PiecewiseConstant {
            breakpoints,
            values,
        } => {
            if breakpoints.len() != values.len() + 1 {
                return Err(config_error("need one more breakpoint than values"));
            }
            if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(config_error("breakpoints must increase strictly"));
            }
        }
        Integrand::BoxShifts {
            width,
            shifts,
            amplitudes,
        } => {
            if !(*width > 0.0) || shifts.len() != amplitudes.len() {
                return Err(config_error(
                    "box shifts need a positive width and one amplitude per shift",
                ));
            }
        }
        Integrand::GaussianShifts {
            sigma,
            shifts,
            amplitudes,
            ..
        } => {
            if !(*sigma > 0.0) || shifts.len() != amplitudes.len() {
                return Err(config_error(
                    "gaussian shifts need sigma > 0 and one amplitude per shift",
                ));
            }
        }
    }
    Ok(())
}

fn gaussian_value(sigma: f64, shifts: &[f64], amplitudes: &[f64], periodic: bool, x: f64) -> f64 {
    let wraps = if periodic {
        (12.0 * sigma / (2.0 * PI)).ceil() as i32 + 1
    } else {
        0
    };
    let mut s = 0.0;
    for (&c, &a) in shifts.iter().zip(amplitudes) {
        for w in -wraps..=wraps {
            let u = x - c + 2.0 * PI * w as f64;
            s += a * (-u * u / (2.0 * sigma * sigma)).exp();
        }
    }
    s
}

fn simpson(
    f: &dyn Fn(f64) -> f64,
    weight: Weight,
    (lo, hi): (f64, f64),
    panels: usize,
    count: usize,
) -> Vec<Complex64> {
    let h = (hi - lo) / panels as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); count];
    let mut w = vec![Complex64::new(0.0, 0.0); count];
    for i in 0..=panels {
        let x = lo + i as f64 * h;
        let coef = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let fx = f(x) * coef;
        weight_values(weight, x, &mut w);
        for (a, &wk) in acc.iter_mut().zip(&w) {
            *a += wk * fx;
        }
    }
    acc.into_iter().map(|a| a * (h / 3.0)).collect()
}

/// The first `count` moments of the integrand over the interval.
pub fn compute_moments(q: &QuadratureSpec, count: usize) -> Result<QuadratureResult, CliError> {
    check(q)?;
    if let Some(pieces) = steps(&q.integrand, q.interval) {
        let values = (0..count)
            .map(|k| {
                pieces
                    .iter()
                    .map(|&(a, b, v)| weight_integral(q.weight, k, a, b) * v)
                    .sum()
            })
            .collect();
        return Ok(QuadratureResult {
            moments: MomentSequence::new(values)?,
            panels: 0,
            error_estimate: 0.0,
            closed_form: true,
        });
    }
    let Integrand::GaussianShifts {
        sigma,
        shifts,
        amplitudes,
        periodic,
    } = &q.integrand
    else {
        unreachable!("closed forms handled above");
    };
    let f = |x: f64| gaussian_value(*sigma, shifts, amplitudes, *periodic, x);
    let mut panels = q.panels + q.panels % 2;
    let mut coarse = simpson(&f, q.weight, q.interval, panels, count);
    loop {
        panels *= 2;
        let fine = simpson(&f, q.weight, q.interval, panels, count);
        let estimates: Vec<f64> = fine
            .iter()
            .zip(&coarse)
            .map(|(a, b)| (a - b).norm() / 15.0)
            .collect();
        let (index, worst) = estimates
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
        if worst <= TOLERANCE {
            let values = fine
                .iter()
                .zip(&coarse)
                .map(|(a, b)| a + (a - b) / 15.0)
                .collect();
            return Ok(QuadratureResult {
                moments: MomentSequence::new(values)?,
                panels,
                error_estimate: worst,
                closed_form: false,
            });
        }
        if panels >= MAX_PANELS {
            return Err(CliError::QuadratureNotConverged {
                index,
                estimate: worst,
                tolerance: TOLERANCE,
                panels,
            });
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(integrand: Integrand, weight: Weight, interval: (f64, f64)) -> QuadratureSpec {
        QuadratureSpec {
            integrand,
            weight,
            interval,
            panels: 64,
        }
    }

    #[test]
    fn unit_indicator() {
        let q = spec(
            Integrand::PiecewiseConstant {
                breakpoints: vec![0.0, 1.0],
                values: vec![1.0],
            },
            Weight::Monomial,
            (-1.0, 2.0),
        );
        let r = compute_moments(&q, 3).unwrap();
        assert!(r.closed_form);
        assert_eq!(r.moments.real_parts(), vec![1.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn zero_signal() {
        let q = spec(
            Integrand::GaussianShifts {
                sigma: 0.2,
                shifts: vec![0.0],
                amplitudes: vec![0.0],
                periodic: false,
            },
            Weight::Monomial,
            (-1.0, 1.0),
        );
        let r = compute_moments(&q, 4).unwrap();
        assert!(r.moments.values().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn gaussian_mass_matches_closed_form() {
        let sigma = 0.25;
        let q = spec(
            Integrand::GaussianShifts {
                sigma,
                shifts: vec![0.1],
                amplitudes: vec![2.0],
                periodic: false,
            },
            Weight::Monomial,
            (0.1 - 12.0 * sigma, 0.1 + 12.0 * sigma),
        );
        let r = compute_moments(&q, 3).unwrap();
        let mass = 2.0 * sigma * (2.0 * PI).sqrt();
        let m = r.moments.real_parts();
        assert!((m[0] - mass).abs() < 1e-10);
        assert!((m[1] - 0.1 * mass).abs() < 1e-10);
        assert!((m[2] - (0.01 + sigma * sigma) * mass).abs() < 1e-10);
        assert!(!r.closed_form && r.error_estimate <= TOLERANCE);
    }

    #[test]
    fn harmonic_box_closed_form() {
        let q = spec(
            Integrand::BoxShifts {
                width: 0.5,
                shifts: vec![0.0],
                amplitudes: vec![1.0],
            },
            Weight::Harmonic,
            (-PI, PI),
        );
        let r = compute_moments(&q, 2).unwrap();
        let c1 = r.moments.values()[1];
        // int_0^0.5 e^{ix} dx = sin(0.5) + i (1 - cos(0.5)).
        assert!((c1.re - 0.5f64.sin()).abs() < 1e-15);
        assert!((c1.im - (1.0 - 0.5f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn rejects_few_panels() {
        let mut q = spec(
            Integrand::PiecewiseConstant {
                breakpoints: vec![0.0, 1.0],
                values: vec![1.0],
            },
            Weight::Monomial,
            (0.0, 1.0),
        );
        q.panels = 32;
        assert!(matches!(
            compute_moments(&q, 2),
            Err(CliError::ConfigInvalid(_))
        ));
    }
}
