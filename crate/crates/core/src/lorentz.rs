//! Weighted Lorentz quasi-norms, evaluated exactly by layer cake.
//!
//! A grid function is simple, so the map `t -> W(u({f > t}))` is a step
//! function of the level `t`. Both the strong and the weak functional reduce
//! to finite sums and maxima over the distinct positive values of `f`; no
//! quadrature in `t` is ever involved.

use crate::error::Error;
use crate::measure::{GridFunction, WeightU};
use crate::scalar::Real;
use crate::weight::WeightW;
use crate::Result;

/// Parameters of the weighted Lorentz space: exponent `p`, gridded weight
/// `u`, parametric weight `w`.
///
/// Construction checks that `w` doubles (finite sup of `W(2r)/W(r)`) over
/// the range of masses the grid can produce; a non-doubling `w` would not
/// give a quasi-norm and is rejected.
#[derive(Debug, Clone)]
pub struct LorentzParams<T> {
    p: T,
    u: WeightU<T>,
    w: WeightW<T>,
    doubling: T,
}

impl<T: Real> LorentzParams<T> {
    pub fn new(p: T, u: WeightU<T>, w: WeightW<T>) -> Result<Self> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::invalid("p must be positive and finite"));
        }
        w.validate()?;
        let doubling = doubling_over_mass_range(&w, &u)?;
        Ok(Self { p, u, w, doubling })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn u(&self) -> &WeightU<T> {
        &self.u
    }

    pub fn w(&self) -> &WeightW<T> {
        &self.w
    }

    /// Doubling constant of `W` sampled over the relevant mass range.
    pub fn doubling_constant(&self) -> T {
        self.doubling
    }
}

/// Sup of `W(2r)/W(r)` over a geometric grid spanning `[h^d, total mass]`.
fn doubling_over_mass_range<T: Real>(w: &WeightW<T>, u: &WeightU<T>) -> Result<T> {
    let lo = u.domain().cell_volume();
    let hi = u.total_mass();
    let two = T::from_f64(2.0).unwrap();
    let mut sup = T::zero();
    let mut r = lo;
    loop {
        let ratio = w.cumulative(two * r)? / w.cumulative(r)?;
        if !ratio.is_finite() {
            return Err(Error::invalid("weight w is not doubling on the grid's mass range"));
        }
        if ratio > sup {
            sup = ratio;
        }
        if r >= hi {
            break;
        }
        r = (r * two).min(hi);
    }
    Ok(sup)
}

/// The distinct positive levels of `f` with the `u`-masses of their strict
/// super-level sets: `levels[i] = (t_i, u({f >= t_i}))` with `t_1 < t_2 < ...`.
///
/// Between consecutive levels the set `{f > s}` is constant and equals
/// `{f >= t_{i}}` for `s` in `[t_{i-1}, t_i)`.
pub fn level_decomposition<T: Real>(
    f: &GridFunction<T>,
    u: &WeightU<T>,
) -> Result<Vec<(T, T)>> {
    f.domain().check_same(u.domain(), "level_decomposition")?;
    let vol = f.domain().cell_volume();
    let mut pairs: Vec<(T, T)> = f
        .values()
        .iter()
        .zip(u.as_function().values())
        .filter(|(&v, _)| v > T::zero())
        .map(|(&v, &uw)| (v, uw))
        .collect();
    // descending by value
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
    let mut out: Vec<(T, T)> = Vec::new();
    let mut mass = T::zero();
    let mut k = 0usize;
    while k < pairs.len() {
        let v = pairs[k].0;
        while k < pairs.len() && pairs[k].0 == v {
            mass = mass + pairs[k].1;
            k += 1;
        }
        out.push((v, mass * vol));
    }
    out.reverse(); // ascending in value; masses now nonincreasing
    Ok(out)
}

/// `p`-th powers of the weak and strong functionals from one pass over the
/// levels.
///
/// The weak power is `max_i t_i^p W_i`, the strong power the compensated
/// layer-cake sum `sum_i (t_i^p - t_{i-1}^p) W_i`. The sum dominates every
/// single term in exact arithmetic (the masses decrease with the level), so
/// the rounded sum is clamped from below by the weak power; that moves it by
/// at most one ulp and makes `weak <= strong` hold bitwise after the shared
/// `1/p`-th root.
fn layer_powers<T: Real>(f: &GridFunction<T>, params: &LorentzParams<T>) -> Result<(T, T)> {
    let levels = level_decomposition(f, &params.u)?;
    let p = params.p;
    let mut sum = T::zero();
    let mut comp = T::zero();
    let mut weak = T::zero();
    let mut prev_pow = T::zero();
    for &(t, mass) in &levels {
        let t_pow = t.powf(p);
        let w_mass = params.w.cumulative(mass)?;
        let single = t_pow * w_mass;
        if single > weak {
            weak = single;
        }
        let term = (t_pow - prev_pow) * w_mass;
        // Neumaier compensated accumulation.
        let fresh = sum + term;
        if sum.abs() >= term.abs() {
            comp = comp + ((sum - fresh) + term);
        } else {
            comp = comp + ((term - fresh) + sum);
        }
        sum = fresh;
        prev_pow = t_pow;
    }
    Ok((weak, (sum + comp).max(weak)))
}

/// Strong quasi-norm: `( sum_i (t_i^p - t_{i-1}^p) * W(u({f >= t_i})) )^(1/p)`
/// over the distinct positive values `t_1 < ... < t_k` of `f` (with `t_0 = 0`).
///
/// Zero exactly when `f` vanishes almost everywhere.
pub fn lambda_norm<T: Real>(f: &GridFunction<T>, params: &LorentzParams<T>) -> Result<T> {
    Ok(lambda_norm_pow(f, params)?.powf(params.p.recip()))
}

/// The `p`-th power of [`lambda_norm`].
pub fn lambda_norm_pow<T: Real>(f: &GridFunction<T>, params: &LorentzParams<T>) -> Result<T> {
    Ok(layer_powers(f, params)?.1)
}

/// Weak quasi-norm: `sup_{t>0} t * W(u({f > t}))^(1/p)`.
///
/// For a simple function the sup over each interval of constancy is attained
/// at its right endpoint, so this is a max over the distinct values of `f`.
/// Never exceeds [`lambda_norm`], bitwise.
pub fn lambda_weak_norm<T: Real>(f: &GridFunction<T>, params: &LorentzParams<T>) -> Result<T> {
    Ok(layer_powers(f, params)?.0.powf(params.p.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{GridDomain, GridSet, WeightSpec};
    use crate::rearrange;
    use crate::rng::SplitMix64;

    fn line(n: usize) -> GridDomain<f64> {
        GridDomain::line(2.0, n).unwrap()
    }

    fn params(p: f64, u: WeightU<f64>, w: WeightW<f64>) -> LorentzParams<f64> {
        LorentzParams::new(p, u, w).unwrap()
    }

    #[test]
    fn indicator_norm_is_w_of_mass() {
        // ||chi_E|| = W(u(E))^(1/p), both strong and weak.
        let domain = line(128);
        let u = WeightSpec::PowerAbs { alpha: 0.5 }.materialize(domain).unwrap();
        let w = WeightW::power(1.0).unwrap();
        let e = GridSet::from_fn(domain, |c| c[0] >= -0.5 && c[0] < 1.0);
        let f = GridFunction::indicator(&e);
        let pr = params(2.0, u.clone(), w.clone());
        let mass = u.measure(&e).unwrap();
        let expect = w.cumulative(mass).unwrap().sqrt();
        let strong = lambda_norm(&f, &pr).unwrap();
        let weak = lambda_weak_norm(&f, &pr).unwrap();
        assert!((strong - expect).abs() < 1e-12 * expect);
        assert!((weak - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn lebesgue_case_is_l2_norm() {
        // u = 1, w = 1, f = chi_[0,1), p = 2: norm is 1.
        let domain = line(256);
        let pr = params(2.0, WeightU::ones(domain), WeightW::one());
        let e = GridSet::from_fn(domain, |c| c[0] >= 0.0 && c[0] < 1.0);
        let f = GridFunction::indicator(&e);
        assert!((lambda_norm(&f, &pr).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_function_layer_cake() {
        // f = 2 chi_A + chi_B with A, B disjoint:
        // strong^p = W(u(A u B)) + (2^p - 1) W(u(A)),
        // weak = max(W(u(A u B))^(1/p), 2 W(u(A))^(1/p)).
        let domain = line(192);
        let u = WeightSpec::PowerAbs { alpha: 1.0 }.materialize(domain).unwrap();
        let w = WeightW::power(0.5).unwrap();
        let p = 1.7;
        let pr = params(p, u.clone(), w.clone());
        let a = GridSet::from_fn(domain, |c| c[0] >= -1.0 && c[0] < -0.25);
        let b = GridSet::from_fn(domain, |c| c[0] >= 0.5 && c[0] < 1.75);
        let f = GridFunction::indicator(&a)
            .scale(2.0)
            .unwrap()
            .add(&GridFunction::indicator(&b))
            .unwrap();
        let wa = w.cumulative(u.measure(&a).unwrap()).unwrap();
        let wab = w.cumulative(u.measure(&a.union(&b).unwrap()).unwrap()).unwrap();
        let strong_pow = wab + (2f64.powf(p) - 1.0) * wa;
        let strong = lambda_norm(&f, &pr).unwrap();
        assert!((strong - strong_pow.powf(1.0 / p)).abs() < 1e-12 * strong);
        let weak = lambda_weak_norm(&f, &pr).unwrap();
        let expect = (wab.powf(1.0 / p)).max(2.0 * wa.powf(1.0 / p));
        assert!((weak - expect).abs() < 1e-12 * weak);
    }

    #[test]
    fn zero_function_has_zero_norm() {
        let domain = line(32);
        let pr = params(2.0, WeightU::ones(domain), WeightW::one());
        let f = GridFunction::zero(domain);
        assert_eq!(lambda_norm(&f, &pr).unwrap(), 0.0);
        assert_eq!(lambda_weak_norm(&f, &pr).unwrap(), 0.0);
    }

    #[test]
    fn weak_never_exceeds_strong() {
        let mut rng = SplitMix64::new(31, 0);
        for trial in 0..200 {
            let n = 2 + rng.below(96);
            let domain = line(n);
            let values: Vec<f64> = (0..n).map(|_| rng.unit_f64() * 4.0).collect();
            let f = GridFunction::from_values(domain, values).unwrap();
            let alpha_u = -0.5 + rng.unit_f64() * 2.0;
            let alpha_w = -0.5 + rng.unit_f64() * 2.0;
            let p = 0.5 + rng.unit_f64() * 3.0;
            let u = WeightSpec::PowerAbs { alpha: alpha_u }.materialize(domain).unwrap();
            let pr = params(p, u, WeightW::power(alpha_w).unwrap());
            let weak = lambda_weak_norm(&f, &pr).unwrap();
            let strong = lambda_norm(&f, &pr).unwrap();
            assert!(weak <= strong, "trial {trial}: weak={weak} strong={strong}");
        }
    }

    #[test]
    fn lebesgue_weight_reduces_to_lp_u() {
        // w = 1: norm^p = sum of f^p u h^d.
        let domain = line(160);
        let u = WeightSpec::PowerAbs { alpha: 0.75 }.materialize(domain).unwrap();
        let p = 2.5;
        let pr = params(p, u.clone(), WeightW::one());
        let f = GridFunction::from_fn(domain, |c| (c[0] + 2.1).sqrt()).unwrap();
        let direct: f64 = f
            .values()
            .iter()
            .zip(u.as_function().values())
            .map(|(&v, &uw)| v.powf(p) * uw)
            .sum::<f64>()
            * domain.cell_volume();
        let via_norm = lambda_norm(&f, &pr).unwrap().powf(p);
        assert!((via_norm - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn unit_u_matches_rearrangement_layer_cake() {
        // u = 1: the norm computed from f* agrees (equimeasurability).
        let domain = line(144);
        let p = 1.5;
        let w = WeightW::power(0.5).unwrap();
        let pr = params(p, WeightU::ones(domain), w.clone());
        let f = GridFunction::from_fn(domain, |c| (3.0 * c[0]).cos().abs() * 2.0).unwrap();
        let star = rearrange::rearrangement(&f);
        // sum over the steps of f*: same layer-cake sum with Lebesgue masses
        let mut acc = 0.0;
        let bp = star.breakpoints();
        let vals = star.values();
        for j in (0..vals.len()).rev() {
            // vals[j] is the j-th largest value; {f* >= vals[j]} has mass bp[j]
            acc += (vals[j].powf(p) - vals.get(j + 1).map_or(0.0, |v| v.powf(p)))
                * w.cumulative(bp[j]).unwrap();
        }
        let expected = acc.powf(1.0 / p);
        let got = lambda_norm(&f, &pr).unwrap();
        assert!((got - expected).abs() < 1e-9 * expected, "{got} vs {expected}");
    }

    #[test]
    fn scaling_is_homogeneous() {
        let domain = line(96);
        let pr = params(
            2.0,
            WeightSpec::PowerAbs { alpha: 0.5 }.materialize(domain).unwrap(),
            WeightW::power(1.0).unwrap(),
        );
        let f = GridFunction::from_fn(domain, |c| c[0].abs()).unwrap();
        let n1 = lambda_norm(&f, &pr).unwrap();
        let n2 = lambda_norm(&f.scale(2.0).unwrap(), &pr).unwrap();
        assert!((n2 - 2.0 * n1).abs() <= 1e-12 * n1);
        let w1 = lambda_weak_norm(&f, &pr).unwrap();
        let w2 = lambda_weak_norm(&f.scale(2.0).unwrap(), &pr).unwrap();
        assert!((w2 - 2.0 * w1).abs() <= 1e-12 * w1);
    }

    #[test]
    fn monotone_in_the_function() {
        let mut rng = SplitMix64::new(33, 0);
        let domain = line(80);
        let pr = params(1.25, WeightU::ones(domain), WeightW::power(0.25).unwrap());
        for _ in 0..20 {
            let base: Vec<f64> = (0..80).map(|_| rng.unit_f64()).collect();
            let bump: Vec<f64> = (0..80).map(|_| rng.unit_f64()).collect();
            let f = GridFunction::from_values(domain, base.clone()).unwrap();
            let g_vals: Vec<f64> = base.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let g = GridFunction::from_values(domain, g_vals).unwrap();
            assert!(lambda_norm(&f, &pr).unwrap() <= lambda_norm(&g, &pr).unwrap() * (1.0 + 1e-12));
            assert!(
                lambda_weak_norm(&f, &pr).unwrap()
                    <= lambda_weak_norm(&g, &pr).unwrap() * (1.0 + 1e-12)
            );
        }
    }

    #[test]
    fn rejects_nonpositive_p() {
        let domain = line(8);
        assert!(LorentzParams::new(0.0, WeightU::ones(domain), WeightW::one()).is_err());
    }
}
