use nalgebra::DVector;

use crate::error::{invalid, Error, Result};
use crate::Scalar;

/// Constant drive on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T: Scalar> {
    pub start: T,
    pub end: T,
    pub u: DVector<T>,
}

/// External drive `u(t)` added to the log-linear dynamics (units 1/s).
#[derive(Debug, Clone, PartialEq)]
pub enum ControlInput<T: Scalar> {
    Constant(DVector<T>),
    /// `u_i(t) = amplitude_i · sin(ω t + phase_i)`.
    Sinusoidal {
        amplitude: DVector<T>,
        omega: T,
        phase: DVector<T>,
    },
    /// Ordered, non-overlapping segments; zero outside all of them.
    Piecewise(Vec<Segment<T>>),
}

fn finite<T: Scalar>(v: &DVector<T>, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

impl<T: Scalar> ControlInput<T> {
    pub fn zero(dim: usize) -> Self {
        Self::Constant(DVector::zeros(dim))
    }

    pub fn constant(u: DVector<T>) -> Result<Self> {
        finite(&u, "control input")?;
        Ok(Self::Constant(u))
    }

    pub fn sinusoidal(amplitude: DVector<T>, omega: T, phase: DVector<T>) -> Result<Self> {
        finite(&amplitude, "control amplitude")?;
        finite(&phase, "control phase")?;
        if !omega.is_finite() {
            return Err(Error::NonFinite("control frequency"));
        }
        if phase.len() != amplitude.len() {
            return Err(Error::DimensionMismatch {
                context: "control phase",
                expected: amplitude.len(),
                actual: phase.len(),
            });
        }
        Ok(Self::Sinusoidal {
            amplitude,
            omega,
            phase,
        })
    }

    pub fn piecewise(segments: Vec<Segment<T>>) -> Result<Self> {
        let first = segments
            .first()
            .ok_or_else(|| invalid("segments", "at least one segment is required"))?;
        let dim = first.u.len();
        for (i, seg) in segments.iter().enumerate() {
            if !seg.start.is_finite() || !seg.end.is_finite() {
                return Err(Error::NonFinite("segment bounds"));
            }
            finite(&seg.u, "segment drive")?;
            if !(seg.end > seg.start) {
                return Err(invalid("segments", format!("segment {i} has end <= start")));
            }
            if seg.u.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "segment drive",
                    expected: dim,
                    actual: seg.u.len(),
                });
            }
            if i > 0 && seg.start < segments[i - 1].end {
                return Err(invalid(
                    "segments",
                    format!("segment {i} overlaps or precedes segment {}", i - 1),
                ));
            }
        }
        Ok(Self::Piecewise(segments))
    }

    /// Drive from coupled energy sources: `u_i = k_{u,i} ΔE_i / (R T)`.
    pub fn from_energy(
        coupling: &DVector<T>,
        delta_e: &DVector<T>,
        gas_constant: T,
        temperature: T,
    ) -> Result<Self> {
        if coupling.len() != delta_e.len() {
            return Err(Error::DimensionMismatch {
                context: "energy coupling",
                expected: coupling.len(),
                actual: delta_e.len(),
            });
        }
        if !(temperature > T::zero()) {
            return Err(invalid("temperature", "must be positive"));
        }
        if !(gas_constant > T::zero()) {
            return Err(invalid("gas constant", "must be positive"));
        }
        let rt = gas_constant * temperature;
        Self::constant(coupling.component_mul(delta_e) / rt)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(u) => u.len(),
            Self::Sinusoidal { amplitude, .. } => amplitude.len(),
            Self::Piecewise(segs) => segs[0].u.len(),
        }
    }

    pub fn eval(&self, t: T) -> DVector<T> {
        match self {
            Self::Constant(u) => u.clone(),
            Self::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => DVector::from_fn(amplitude.len(), |i, _| {
                amplitude[i] * (*omega * t + phase[i]).sin()
            }),
            Self::Piecewise(segs) => segs
                .iter()
                .find(|s| t >= s.start && t < s.end)
                .map(|s| s.u.clone())
                .unwrap_or_else(|| DVector::zeros(segs[0].u.len())),
        }
    }

    /// The constant drive vector, if the input is constant.
    pub fn as_constant(&self) -> Option<&DVector<T>> {
        match self {
            Self::Constant(u) => Some(u),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Constant(u) => u.iter().all(|v| *v == T::zero()),
            Self::Sinusoidal { amplitude, .. } => amplitude.iter().all(|v| *v == T::zero()),
            Self::Piecewise(segs) => segs.iter().all(|s| s.u.iter().all(|v| *v == T::zero())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_on_first_channel() {
        let u = ControlInput::sinusoidal(
            DVector::from_vec(vec![1.5, 0.0]),
            2.0,
            DVector::zeros(2),
        )
        .unwrap();
        let v = u.eval(0.3);
        assert!((v[0] - 1.5 * 0.6f64.sin()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn piecewise_segments() {
        let u = ControlInput::piecewise(vec![
            Segment { start: 0.0, end: 1.0, u: DVector::from_vec(vec![2.0]) },
            Segment { start: 2.0, end: 3.0, u: DVector::from_vec(vec![-1.0]) },
        ])
        .unwrap();
        assert_eq!(u.eval(0.5)[0], 2.0);
        assert_eq!(u.eval(1.5)[0], 0.0);
        assert_eq!(u.eval(2.0)[0], -1.0);
        assert_eq!(u.eval(3.0)[0], 0.0);

        let overlapping = ControlInput::piecewise(vec![
            Segment { start: 0.0, end: 2.0, u: DVector::from_vec(vec![1.0]) },
            Segment { start: 1.0, end: 3.0, u: DVector::from_vec(vec![1.0]) },
        ]);
        assert!(overlapping.is_err());
        assert!(ControlInput::<f64>::piecewise(vec![]).is_err());
    }

    #[test]
    fn energy_coupling() {
        let rt: f64 = 8.314 * 298.15;
        let u = ControlInput::from_energy(
            &DVector::from_vec(vec![2.0]),
            &DVector::from_vec(vec![rt]),
            8.314,
            298.15,
        )
        .unwrap();
        assert!((u.as_constant().unwrap()[0] - 2.0).abs() < 1e-14);
        assert!(ControlInput::from_energy(
            &DVector::from_vec(vec![1.0]),
            &DVector::from_vec(vec![1.0]),
            8.314,
            0.0
        )
        .is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(ControlInput::constant(DVector::from_vec(vec![f64::NAN])).is_err());
    }
}
