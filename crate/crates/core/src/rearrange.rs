//! Distribution functions, the decreasing rearrangement, and the Hardy
//! averaging operator on decreasing step functions.

use crate::error::Error;
use crate::measure::GridFunction;
use crate::scalar::Real;
use crate::Result;

/// Right-continuous nonincreasing step function on `[0, infinity)`, zero
/// beyond its last breakpoint.
///
/// The value is `values[j]` on `[breakpoints[j-1], breakpoints[j])` (with an
/// implicit leading breakpoint 0), and 0 from the last breakpoint on. Stored
/// values are strictly decreasing and positive; plateaus are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct DecreasingStep<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> DecreasingStep<T> {
    /// Build from raw steps. Breakpoints must increase strictly and be
    /// positive; values must be nonincreasing and nonnegative. Zero-valued
    /// and equal-valued steps are normalized away.
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::invalid("breakpoints and values must have equal length"));
        }
        if breakpoints.iter().any(|b| !b.is_finite() || !(*b > T::zero())) {
            return Err(Error::invalid("breakpoints must be positive and finite"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::invalid("values must be nonnegative and finite"));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("values must be nonincreasing"));
        }
        let mut bp = Vec::with_capacity(breakpoints.len());
        let mut vals: Vec<T> = Vec::with_capacity(values.len());
        for (b, v) in breakpoints.into_iter().zip(values) {
            if v == T::zero() {
                break; // zero is the implicit tail value
            }
            if let Some(last) = vals.last().copied() {
                if last == v {
                    // merge plateau: extend the previous step
                    *bp.last_mut().unwrap() = b;
                    continue;
                }
            }
            bp.push(b);
            vals.push(v);
        }
        Ok(Self { breakpoints: bp, values: vals })
    }

    pub fn zero() -> Self {
        Self { breakpoints: Vec::new(), values: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Right-continuous evaluation at `t >= 0`.
    pub fn eval(&self, t: T) -> T {
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if t < *b {
                return *v;
            }
        }
        T::zero()
    }

    /// Support length (last breakpoint, or 0 for the zero function).
    pub fn support(&self) -> T {
        self.breakpoints.last().copied().unwrap_or_else(T::zero)
    }

    /// Exact `integral over (0, t]`, accumulated step by step.
    pub fn integral_to(&self, t: T) -> T {
        let mut acc = T::zero();
        let mut prev = T::zero();
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            if t <= b {
                return acc + v * (t - prev);
            }
            acc = acc + v * (b - prev);
            prev = b;
        }
        acc
    }

    /// Total integral over the half-line.
    pub fn total_integral(&self) -> T {
        self.integral_to(self.support())
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        if !(c >= T::zero()) || !c.is_finite() {
            return Err(Error::invalid("scale factor must be nonnegative and finite"));
        }
        Self::new(
            self.breakpoints.clone(),
            self.values.iter().map(|&v| v * c).collect(),
        )
    }

    /// Measure of the level set `{self > t}` (a prefix interval, since the
    /// function is nonincreasing).
    pub fn level_measure(&self, t: T) -> T {
        let mut m = T::zero();
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            if v > t {
                m = b;
            } else {
                break;
            }
        }
        m
    }
}

/// Lebesgue measure of `{f > t}` (strict inequality).
///
/// Nonincreasing and right-continuous in `t`; well defined for any real `t`
/// since `f` is nonnegative.
pub fn distribution<T: Real>(f: &GridFunction<T>, t: T) -> T {
    let count = f.values().iter().filter(|&&v| v > t).count();
    T::from_count(count) * f.domain().cell_volume()
}

/// Decreasing rearrangement of a grid function.
///
/// Cell values are sorted in descending order, each carrying mass `h^d`; ties
/// are broken by the stable order on cell index, which does not affect the
/// result. The output is equimeasurable with `f`.
pub fn rearrangement<T: Real>(f: &GridFunction<T>) -> DecreasingStep<T> {
    let vol = f.domain().cell_volume();
    let mut sorted: Vec<T> = f.values().to_vec();
    // Stable descending sort keeps equal values in cell-index order.
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    for (k, &v) in sorted.iter().enumerate() {
        if v == T::zero() {
            break;
        }
        let next_differs = sorted.get(k + 1).is_none_or(|&nv| nv != v);
        if next_differs {
            breakpoints.push(T::from_count(k + 1) * vol);
            values.push(v);
        }
    }
    DecreasingStep { breakpoints, values }
}

/// Hardy averaging operator `Pg(t) = (1/t) * integral of g over (0, t]`,
/// evaluated exactly from the steps of `g`.
pub fn hardy<T: Real>(g: &DecreasingStep<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::invalid("Hardy operator needs t > 0"));
    }
    Ok(g.integral_to(t) / t)
}
