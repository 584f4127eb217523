//! Parametric weights `w` on the half-line with exact primitives.
//!
//! `w` stays parametric (it is never gridded) because the B_p condition needs
//! exact integrals all the way to infinity. Two families cover every example
//! the weight classes distinguish: pure powers `t^alpha`, and
//! piecewise-constant profiles with a power tail.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Real;
use crate::Result;

/// A quantity that is either finite or a diverging integral.
///
/// Divergence is a distinguished outcome, not a fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaybeDivergent<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> MaybeDivergent<T> {
    pub fn is_divergent(&self) -> bool {
        matches!(self, MaybeDivergent::Divergent)
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            MaybeDivergent::Finite(v) => Some(v),
            MaybeDivergent::Divergent => None,
        }
    }

    /// Unwrap a value that is known finite in context.
    pub fn expect_finite(&self, what: &str) -> T {
        self.finite().unwrap_or_else(|| panic!("{what}: unexpectedly divergent"))
    }
}

/// Weight on `(0, infinity)` with exact cumulative `W(t)` and tail integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightW<T> {
    /// `w(t) = t^alpha` with `alpha > -1`, so `W(t) = t^(alpha+1)/(alpha+1)`.
    Power { alpha: T },
    /// Piecewise-constant on `(0, b_k]`, then `t^tail_alpha` beyond the last
    /// breakpoint.
    PiecewiseTail {
        /// Strictly increasing positive breakpoints `b_1 < ... < b_k`.
        breakpoints: Vec<T>,
        /// Constant value on `(b_{j-1}, b_j]` (with `b_0 = 0`); all positive.
        values: Vec<T>,
        /// Exponent of the `t^alpha` tail beyond `b_k`.
        tail_alpha: T,
    },
}

impl<T: Real> WeightW<T> {
    /// `w = 1`, i.e. `Power { alpha: 0 }`.
    pub fn one() -> Self {
        WeightW::Power { alpha: T::zero() }
    }

    pub fn power(alpha: T) -> Result<Self> {
        let w = WeightW::Power { alpha };
        w.validate()?;
        Ok(w)
    }

    pub fn piecewise_tail(breakpoints: Vec<T>, values: Vec<T>, tail_alpha: T) -> Result<Self> {
        let w = WeightW::PiecewiseTail { breakpoints, values, tail_alpha };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightW::Power { alpha } => {
                if !(*alpha > -T::one()) || !alpha.is_finite() {
                    return Err(Error::invalid("power weight needs alpha > -1"));
                }
            }
            WeightW::PiecewiseTail { breakpoints, values, tail_alpha } => {
                if breakpoints.is_empty() || breakpoints.len() != values.len() {
                    return Err(Error::invalid(
                        "piecewise weight needs matching nonempty breakpoints and values",
                    ));
                }
                if !breakpoints[0].is_finite() || !(breakpoints[0] > T::zero()) {
                    return Err(Error::invalid("breakpoints must be positive"));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::invalid("breakpoints must be strictly increasing"));
                }
                if values.iter().any(|v| !v.is_finite() || !(*v > T::zero())) {
                    return Err(Error::invalid("piecewise values must be positive and finite"));
                }
                if !tail_alpha.is_finite() {
                    return Err(Error::invalid("tail exponent must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Exponent governing `w` near infinity (`alpha` for powers, the tail
    /// exponent otherwise).
    pub fn tail_exponent(&self) -> T {
        match self {
            WeightW::Power { alpha } => *alpha,
            WeightW::PiecewiseTail { tail_alpha, .. } => *tail_alpha,
        }
    }

    /// Exact cumulative `W(t) = integral of w over (0, t]`.
    ///
    /// `W` is continuous, strictly increasing, and `W(0) = 0`.
    pub fn cumulative(&self, t: T) -> Result<T> {
        if !(t >= T::zero()) {
            return Err(Error::invalid("W(t) needs t >= 0"));
        }
        if t == T::zero() {
            return Ok(T::zero());
        }
        Ok(match self {
            WeightW::Power { alpha } => {
                let e = *alpha + T::one();
                t.powf(e) / e
            }
            WeightW::PiecewiseTail { breakpoints, values, tail_alpha } => {
                let mut acc = T::zero();
                let mut prev = T::zero();
                for (&b, &v) in breakpoints.iter().zip(values) {
                    if t <= b {
                        return Ok(acc + v * (t - prev));
                    }
                    acc = acc + v * (b - prev);
                    prev = b;
                }
                // Power tail beyond the last breakpoint.
                let e = *tail_alpha + T::one();
                if e == T::zero() {
                    acc + (t / prev).ln()
                } else {
                    acc + (t.powf(e) - prev.powf(e)) / e
                }
            }
        })
    }

    /// Exact `integral over (r, infinity) of w(t) / t^p dt`, or `Divergent`
    /// when the effective tail exponent `alpha - p` is at least `-1`.
    pub fn tail_integral(&self, p: T, r: T) -> Result<MaybeDivergent<T>> {
        if !(r > T::zero()) {
            return Err(Error::invalid("tail integral needs r > 0"));
        }
        if !(p > T::zero()) {
            return Err(Error::invalid("tail integral needs p > 0"));
        }
        let one = T::one();
        if self.tail_exponent() - p >= -one {
            return Ok(MaybeDivergent::Divergent);
        }
        Ok(MaybeDivergent::Finite(match self {
            WeightW::Power { alpha } => {
                // integral of t^(alpha - p) from r: exponent < -1 here.
                let e = *alpha - p + one;
                r.powf(e) / -e
            }
            WeightW::PiecewiseTail { breakpoints, values, tail_alpha } => {
                let mut acc = T::zero();
                let mut prev = T::zero();
                // Constant pieces intersected with (r, infinity).
                for (&b, &v) in breakpoints.iter().zip(values) {
                    let lo = prev.max(r);
                    if lo < b {
                        acc = acc + v * segment_power_integral(-p, lo, b);
                    }
                    prev = b;
                }
                // Tail piece on (max(r, b_k), infinity) with exponent < -1.
                let lo = prev.max(r);
                let e = *tail_alpha - p + one;
                acc + lo.powf(e) / -e
            }
        }))
    }
}

/// Exact `integral of t^e dt` over `[a, b]` for `0 < a < b`.
fn segment_power_integral<T: Real>(e: T, a: T, b: T) -> T {
    let e1 = e + T::one();
    if e1 == T::zero() {
        (b / a).ln()
    } else {
        (b.powf(e1) - a.powf(e1)) / e1
    }
}

/// Exact cumulative `W(t)`; convenience free function mirroring the method.
pub fn w_cumulative<T: Real>(w: &WeightW<T>, t: T) -> Result<T> {
    w.cumulative(t)
}

/// Exact tail integral `r -> integral of w/t^p over (r, infinity)`.
pub fn w_tail_integral<T: Real>(w: &WeightW<T>, p: T, r: T) -> Result<MaybeDivergent<T>> {
    w.tail_integral(p, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_of_flat_weight() {
        let w = WeightW::one();
        assert_eq!(w.cumulative(3.0).unwrap(), 3.0);
        assert_eq!(w.cumulative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn cumulative_of_linear_weight() {
        // alpha = 1: W(t) = t^2 / 2.
        let w = WeightW::<f64>::power(1.0).unwrap();
        assert!((w.cumulative(2.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cumulative_rejects_negative_argument() {
        let w = WeightW::<f64>::one();
        assert!(w.cumulative(-0.5).is_err());
    }

    #[test]
    fn cumulative_strictly_increasing() {
        let w = WeightW::piecewise_tail(vec![1.0, 2.0], vec![2.0, 0.5], -0.5).unwrap();
        let mut prev = 0.0;
        for k in 1..200 {
            let t = 0.05 * k as f64;
            let cur = w.cumulative(t).unwrap();
            assert!(cur > prev, "W not increasing at t={t}");
            prev = cur;
        }
    }

    #[test]
    fn piecewise_cumulative_matches_trapezoid_quadrature() {
        // Composite trapezoid with nodes aligned to the breakpoints is exact
        // on constant pieces and high-order on the smooth tail.
        let w = WeightW::piecewise_tail(vec![0.5, 1.5, 2.0], vec![3.0, 1.0, 2.0], 0.75).unwrap();
        for &t in &[0.3, 0.5, 1.0, 1.9, 2.0, 3.7, 10.0] {
            let mut edges = vec![0.0, t];
            if let WeightW::PiecewiseTail { breakpoints, .. } = &w {
                edges.extend(breakpoints.iter().copied().filter(|&b| b < t));
            }
            edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let eval = |s: f64| -> f64 {
                if let WeightW::PiecewiseTail { breakpoints, values, tail_alpha } = &w {
                    for (&b, &v) in breakpoints.iter().zip(values) {
                        if s <= b {
                            return v;
                        }
                    }
                    s.powf(*tail_alpha)
                } else {
                    unreachable!()
                }
            };
            let mut quad = 0.0;
            for seg in edges.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                let nodes = 2500usize;
                let dt = (b - a) / nodes as f64;
                for k in 0..nodes {
                    let lo = a + dt * k as f64;
                    let hi = lo + dt;
                    // Open left endpoint: sample just inside to stay on the piece.
                    let eps = dt * 1e-9;
                    quad += 0.5 * (eval(lo + eps) + eval(hi)) * dt;
                }
            }
            let exact = w.cumulative(t).unwrap();
            assert!(
                (quad - exact).abs() <= 1e-6 * exact.max(1e-30),
                "t={t}: quad={quad} exact={exact}"
            );
        }
    }

    #[test]
    fn tail_integral_closed_forms() {
        // alpha = 0, p = 2, r = 1: integral of t^-2 from 1 is 1.
        let w = WeightW::<f64>::one();
        assert!((w.tail_integral(2.0, 1.0).unwrap().finite().unwrap() - 1.0).abs() < 1e-15);
        // alpha = 1, p = 3, r = 2: integral of t^-2 from 2 is 1/2.
        let w = WeightW::<f64>::power(1.0).unwrap();
        assert!((w.tail_integral(3.0, 2.0).unwrap().finite().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tail_integral_divergence_at_boundary_exponent() {
        // alpha = p - 1 makes w(t)/t^p = t^-1: divergent.
        for p in [0.5f64, 1.0, 2.0] {
            let w = WeightW::power(p - 1.0).unwrap();
            assert!(w.tail_integral(p, 1.0).unwrap().is_divergent());
        }
    }

    #[test]
    fn tail_integral_piecewise_vs_power() {
        // A piecewise weight that happens to be constant 1 everywhere with a
        // flat tail agrees with the flat power weight.
        let pw = WeightW::piecewise_tail(vec![1.0], vec![1.0], 0.0).unwrap();
        let flat = WeightW::<f64>::one();
        for &(p, r) in &[(2.0, 0.25), (2.0, 1.0), (3.5, 4.0)] {
            let a = pw.tail_integral(p, r).unwrap().finite().unwrap();
            let b = flat.tail_integral(p, r).unwrap().finite().unwrap();
            assert!((a - b).abs() <= 1e-12 * b.abs(), "p={p} r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn tail_integral_rejects_bad_arguments() {
        let w = WeightW::<f64>::one();
        assert!(w.tail_integral(2.0, 0.0).is_err());
        assert!(w.tail_integral(0.0, 1.0).is_err());
    }

    #[test]
    fn generic_scalar_smoke() {
        let w = WeightW::<f32>::power(1.0).unwrap();
        assert!((w.cumulative(2.0).unwrap() - 2.0).abs() < 1e-6);
    }
}
