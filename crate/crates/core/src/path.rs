use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of time together with its derivative.
///
/// Used for rotation angles, spin directions and window bounds.
#[derive(Clone)]
pub enum ScalarPath {
    Constant(f64),
    /// `offset + rate·t`
    Linear {
        offset: f64,
        rate: f64,
    },
    /// `offset + amplitude·sin(frequency·t)`
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `Σ cₖ tᵏ`
    Polynomial(Vec<f64>),
    /// Linear interpolation between `(t, value)` breakpoints sorted by `t`,
    /// held constant outside the first and last breakpoint.
    PiecewiseLinear(Vec<(f64, f64)>),
    Custom {
        value: RealFn,
        derivative: RealFn,
    },
}

impl fmt::Debug for ScalarPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Linear { offset, rate } => f
                .debug_struct("Linear")
                .field("offset", offset)
                .field("rate", rate)
                .finish(),
            Self::Sine {
                offset,
                amplitude,
                frequency,
            } => f
                .debug_struct("Sine")
                .field("offset", offset)
                .field("amplitude", amplitude)
                .field("frequency", frequency)
                .finish(),
            Self::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Self::PiecewiseLinear(b) => f.debug_tuple("PiecewiseLinear").field(b).finish(),
            Self::Custom { .. } => f.write_str("Custom(..)"),
        }
    }
}

impl ScalarPath {
    pub fn linear(rate: f64) -> Self {
        Self::Linear { offset: 0.0, rate }
    }

    pub fn piecewise_linear(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "piecewise-linear path needs a breakpoint".into(),
            ));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate breakpoint time".into()));
        }
        Ok(Self::PiecewiseLinear(points))
    }

    pub fn custom<F, G>(value: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::Custom {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Linear { offset, rate } => offset + rate * t,
            Self::Sine {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * t).sin(),
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            Self::PiecewiseLinear(points) => {
                let (seg, frac) = locate(points, t);
                match seg {
                    Segment::Before => points[0].1,
                    Segment::After => points[points.len() - 1].1,
                    Segment::Inside(i) => {
                        let (a, b) = (points[i], points[i + 1]);
                        a.1 + (b.1 - a.1) * frac
                    }
                }
            }
            Self::Custom { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Linear { rate, .. } => *rate,
            Self::Sine {
                amplitude, frequency, ..
            } => amplitude * frequency * (frequency * t).cos(),
            Self::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * t + k as f64 * ck),
            Self::PiecewiseLinear(points) => match locate(points, t).0 {
                Segment::Inside(i) => {
                    let (a, b) = (points[i], points[i + 1]);
                    (b.1 - a.1) / (b.0 - a.0)
                }
                _ => 0.0,
            },
            Self::Custom { derivative, .. } => derivative(t),
        }
    }
}

enum Segment {
    Before,
    After,
    Inside(usize),
}

fn locate(points: &[(f64, f64)], t: f64) -> (Segment, f64) {
    if points.len() == 1 || t < points[0].0 {
        return (Segment::Before, 0.0);
    }
    if t >= points[points.len() - 1].0 {
        return (Segment::After, 0.0);
    }
    let i = points.partition_point(|p| p.0 <= t) - 1;
    let (a, b) = (points[i], points[i + 1]);
    (Segment::Inside(i), (t - a.0) / (b.0 - a.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(p: &ScalarPath, t: f64) -> f64 {
        let h = 1e-6;
        (p.value(t + h) - p.value(t - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let paths = [
            ScalarPath::Linear {
                offset: 0.5,
                rate: -1.5,
            },
            ScalarPath::Sine {
                offset: 3.0,
                amplitude: 1.5,
                frequency: 6.0,
            },
            ScalarPath::Polynomial(vec![1.0, -2.0, 0.5, 0.25]),
            ScalarPath::piecewise_linear(vec![(0.0, 1.0), (0.5, 2.0), (1.0, 0.0)]).unwrap(),
        ];
        for p in &paths {
            for &t in &[0.1, 0.3, 0.77] {
                assert!((p.derivative(t) - central(p, t)).abs() < 1e-6, "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn piecewise_linear_interpolates_and_clamps() {
        let p = ScalarPath::piecewise_linear(vec![(1.0, 4.0), (0.0, 2.0)]).unwrap();
        assert_eq!(p.value(-1.0), 2.0);
        assert_eq!(p.value(0.5), 3.0);
        assert_eq!(p.value(2.0), 4.0);
        assert!(ScalarPath::piecewise_linear(vec![]).is_err());
        assert!(ScalarPath::piecewise_linear(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }
}
