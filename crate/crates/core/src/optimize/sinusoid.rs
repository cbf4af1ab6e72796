use crate::scalar::Real;

/// `f(x) = offset + amplitude * cos(x - phase)`, the exact dependence of a
/// Pauli-rotation cost on one angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit<T> {
    pub amplitude: T,
    pub phase: T,
    pub offset: T,
    /// Minimizer `phase + pi`, wrapped to `[-pi, pi)`; equals `x0` on flat directions.
    pub argmin: T,
}

impl<T: Real> SinusoidFit<T> {
    pub fn value_at(&self, x: T) -> T {
        self.offset + self.amplitude * (x - self.phase).cos()
    }

    pub fn minimum(&self) -> T {
        self.offset - self.amplitude
    }

    pub fn is_flat(&self) -> bool {
        self.amplitude == T::zero()
    }
}

/// Fits the sinusoid through `f(x0)`, `f(x0 + pi/2)` and `f(x0 - pi/2)`.
pub fn fit_sinusoid<T: Real>(at_x0: T, at_plus: T, at_minus: T, x0: T) -> SinusoidFit<T> {
    let two = T::lit(2.0);
    let offset = (at_plus + at_minus) / two;
    let cos_part = at_x0 - offset;
    let sin_part = (at_minus - at_plus) / two;
    let amplitude = cos_part.hypot(sin_part);
    let scale = at_x0.abs().max(at_plus.abs()).max(at_minus.abs()).max(T::one());
    if amplitude <= T::epsilon() * scale {
        return SinusoidFit {
            amplitude: T::zero(),
            phase: x0,
            offset: at_x0,
            argmin: x0,
        };
    }
    // x0 - phase = atan2(sin_part, cos_part)
    let phase = x0 - sin_part.atan2(cos_part);
    SinusoidFit {
        amplitude,
        phase,
        offset,
        argmin: wrap_angle(phase + T::PI()),
    }
}

/// Maps an angle into `[-pi, pi)`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = (x + T::PI()) % two_pi;
    if y < T::zero() {
        y += two_pi;
    }
    let y = y - T::PI();
    if y >= T::PI() {
        y - two_pi
    } else {
        y
    }
}
