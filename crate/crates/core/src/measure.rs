//! Grid domains, grid functions, grid sets, and the gridded weight `u`.
//!
//! Everything lives on a uniform grid over the box `[-L, L]^d`, `d` being 1
//! or 2. Functions are extended by zero outside the box; the weight `u` is
//! strictly positive on the box. All values are immutable after construction
//! and every operation here is pure.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Real;
use crate::Result;

/// Uniform grid over the box `[-L, L]^d` with `n` cells per axis.
///
/// Cell `i` along an axis covers `[-L + i*h, -L + (i+1)*h)` with
/// `h = 2L / n`; its center sits at `-L + (i + 1/2) * h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain<T> {
    dimension: usize,
    half_width: T,
    cells_per_axis: usize,
}

impl<T: Real> GridDomain<T> {
    pub fn new(dimension: usize, half_width: T, cells_per_axis: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::invalid(format!("dimension must be 1 or 2, got {dimension}")));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::invalid("half_width must be positive and finite"));
        }
        if cells_per_axis == 0 {
            return Err(Error::invalid("cells_per_axis must be at least 1"));
        }
        Ok(Self { dimension, half_width, cells_per_axis })
    }

    pub fn line(half_width: T, cells: usize) -> Result<Self> {
        Self::new(1, half_width, cells)
    }

    pub fn square(half_width: T, cells_per_axis: usize) -> Result<Self> {
        Self::new(2, half_width, cells_per_axis)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    /// Side length of one cell.
    pub fn cell_size(&self) -> T {
        (self.half_width + self.half_width) / T::from_count(self.cells_per_axis)
    }

    /// Volume of one cell, `h^d`.
    pub fn cell_volume(&self) -> T {
        let h = self.cell_size();
        match self.dimension {
            1 => h,
            _ => h * h,
        }
    }

    /// Total number of cells, `n^d`.
    pub fn cell_count(&self) -> usize {
        match self.dimension {
            1 => self.cells_per_axis,
            _ => self.cells_per_axis * self.cells_per_axis,
        }
    }

    /// Lebesgue measure of the whole box.
    pub fn box_measure(&self) -> T {
        self.cell_volume() * T::from_count(self.cell_count())
    }

    /// Axis coordinates `(ix, iy)` of a flat cell index (`iy = 0` when `d = 1`).
    pub fn cell_coords(&self, idx: usize) -> (usize, usize) {
        match self.dimension {
            1 => (idx, 0),
            _ => (idx % self.cells_per_axis, idx / self.cells_per_axis),
        }
    }

    /// Flat index of a cell from axis coordinates.
    pub fn cell_index(&self, ix: usize, iy: usize) -> usize {
        match self.dimension {
            1 => ix,
            _ => iy * self.cells_per_axis + ix,
        }
    }

    /// Center of a cell; the second coordinate is 0 when `d = 1`.
    pub fn cell_center(&self, idx: usize) -> [T; 2] {
        let h = self.cell_size();
        let half = T::from_f64(0.5).unwrap();
        let (ix, iy) = self.cell_coords(idx);
        let coord = |i: usize| -self.half_width + (T::from_count(i) + half) * h;
        match self.dimension {
            1 => [coord(ix), T::zero()],
            _ => [coord(ix), coord(iy)],
        }
    }

    /// Same box with `factor`-times as many cells per axis.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.dimension, self.half_width, self.cells_per_axis * factor)
    }

    pub(crate) fn check_same(&self, other: &Self, what: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(what))
        }
    }
}

/// Nonnegative piecewise-constant function on a grid domain, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    domain: GridDomain<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    /// Wrap explicit cell values; they must be nonnegative and finite.
    pub fn from_values(domain: GridDomain<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.cell_count() {
            return Err(Error::invalid(format!(
                "expected {} cell values, got {}",
                domain.cell_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::invalid("cell values must be nonnegative and finite"));
        }
        Ok(Self { domain, values })
    }

    /// Sample a pointwise function at cell centers. Negative or non-finite
    /// samples are rejected.
    pub fn from_fn(domain: GridDomain<T>, f: impl Fn(&[T; 2]) -> T) -> Result<Self> {
        let values = (0..domain.cell_count()).map(|i| f(&domain.cell_center(i))).collect();
        Self::from_values(domain, values)
    }

    pub fn zero(domain: GridDomain<T>) -> Self {
        Self { domain, values: vec![T::zero(); domain.cell_count()] }
    }

    pub fn constant(domain: GridDomain<T>, c: T) -> Result<Self> {
        Self::from_values(domain, vec![c; domain.cell_count()])
    }

    /// Indicator of a grid set.
    pub fn indicator(set: &GridSet<T>) -> Self {
        let values = set.mask.iter().map(|&m| if m { T::one() } else { T::zero() }).collect();
        Self { domain: set.domain, values }
    }

    pub fn domain(&self) -> &GridDomain<T> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    /// Integral over the box: sum of cell values times cell volume.
    pub fn total_mass(&self) -> T {
        let vol = self.domain.cell_volume();
        self.values.iter().fold(T::zero(), |acc, &v| acc + v) * vol
    }

    /// Pointwise product with the indicator of `set` (restriction).
    pub fn restrict(&self, set: &GridSet<T>) -> Result<Self> {
        self.domain.check_same(&set.domain, "restrict")?;
        let values = self
            .values
            .iter()
            .zip(&set.mask)
            .map(|(&v, &m)| if m { v } else { T::zero() })
            .collect();
        Ok(Self { domain: self.domain, values })
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        Self::from_values(self.domain, self.values.iter().map(|&v| v * c).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.domain.check_same(&other.domain, "add")?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect();
        Ok(Self { domain: self.domain, values })
    }

    /// The same function on the grid refined by `factor` (each cell split
    /// into `factor^d` children with the parent's value).
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let fine = self.domain.refined(factor)?;
        let n = self.domain.cells_per_axis();
        let values = (0..fine.cell_count())
            .map(|idx| {
                let (ix, iy) = fine.cell_coords(idx);
                self.values[self.domain.cell_index((ix / factor).min(n - 1), (iy / factor).min(n - 1))]
            })
            .collect();
        GridFunction::from_values(fine, values)
    }
}

/// Measurable subset of the box, one membership flag per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet<T> {
    domain: GridDomain<T>,
    mask: Vec<bool>,
}

impl<T: Real> GridSet<T> {
    pub fn empty(domain: GridDomain<T>) -> Self {
        Self { domain, mask: vec![false; domain.cell_count()] }
    }

    pub fn full(domain: GridDomain<T>) -> Self {
        Self { domain, mask: vec![true; domain.cell_count()] }
    }

    pub fn from_mask(domain: GridDomain<T>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != domain.cell_count() {
            return Err(Error::invalid("membership mask length must equal cell count"));
        }
        Ok(Self { domain, mask })
    }

    /// Cells whose center satisfies the predicate.
    pub fn from_fn(domain: GridDomain<T>, pred: impl Fn(&[T; 2]) -> bool) -> Self {
        let mask = (0..domain.cell_count()).map(|i| pred(&domain.cell_center(i))).collect();
        Self { domain, mask }
    }

    pub fn domain(&self) -> &GridDomain<T> {
        &self.domain
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn insert(&mut self, idx: usize) {
        self.mask[idx] = true;
    }

    pub fn remove(&mut self, idx: usize) {
        self.mask[idx] = false;
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().all(|&m| !m)
    }

    /// Lebesgue measure: member cells times cell volume.
    pub fn lebesgue(&self) -> T {
        T::from_count(self.cell_count()) * self.domain.cell_volume()
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.domain.check_same(&other.domain, "union")?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| a || b).collect();
        Ok(Self { domain: self.domain, mask })
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    /// Member set on the grid refined by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let fine = self.domain.refined(factor)?;
        let n = self.domain.cells_per_axis();
        let mask = (0..fine.cell_count())
            .map(|idx| {
                let (ix, iy) = fine.cell_coords(idx);
                self.mask[self.domain.cell_index((ix / factor).min(n - 1), (iy / factor).min(n - 1))]
            })
            .collect();
        GridSet::from_mask(fine, mask)
    }
}

/// Strictly positive grid function playing the role of the weight `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightU<T> {
    values: GridFunction<T>,
    /// Lower clamp applied when materializing a vanishing pointwise formula,
    /// echoed in reports.
    clamp: Option<T>,
}

impl<T: Real> WeightU<T> {
    pub fn new(values: GridFunction<T>) -> Result<Self> {
        if values.values().iter().any(|v| !(*v > T::zero())) {
            return Err(Error::invalid("weight u must be strictly positive on every cell"));
        }
        Ok(Self { values, clamp: None })
    }

    pub fn ones(domain: GridDomain<T>) -> Self {
        Self { values: GridFunction::constant(domain, T::one()).unwrap(), clamp: None }
    }

    pub fn domain(&self) -> &GridDomain<T> {
        self.values.domain()
    }

    pub fn as_function(&self) -> &GridFunction<T> {
        &self.values
    }

    pub fn value(&self, idx: usize) -> T {
        self.values.value(idx)
    }

    /// Clamp applied at materialization, if any.
    pub fn clamp_applied(&self) -> Option<T> {
        self.clamp
    }

    /// Weighted measure `u(E)`: sum of `u * h^d` over member cells.
    pub fn measure(&self, set: &GridSet<T>) -> Result<T> {
        self.domain().check_same(set.domain(), "measure_u")?;
        let vol = self.domain().cell_volume();
        let mut acc = T::zero();
        for idx in set.iter_cells() {
            acc = acc + self.values.value(idx);
        }
        Ok(acc * vol)
    }

    /// Weighted measure of the whole box.
    pub fn total_mass(&self) -> T {
        self.values.total_mass()
    }
}

/// Weighted measure `u(E) = sum of u over E times cell volume`.
///
/// Additive over disjoint sets and monotone in `E`.
pub fn measure_u<T: Real>(u: &WeightU<T>, set: &GridSet<T>) -> Result<T> {
    u.measure(set)
}

/// Parametric description of `u`, materializable at any refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightSpec<T> {
    /// `u = 1`.
    One,
    /// `u(x) = |x|^alpha`, with `|x|` clamped below by the smallest positive
    /// cell-center norm so every cell stays strictly positive and finite.
    PowerAbs { alpha: T },
}

impl<T: Real> WeightSpec<T> {
    pub fn materialize(&self, domain: GridDomain<T>) -> Result<WeightU<T>> {
        match *self {
            WeightSpec::One => Ok(WeightU::ones(domain)),
            WeightSpec::PowerAbs { alpha } => {
                let norm = |c: &[T; 2]| match domain.dimension() {
                    1 => c[0].abs(),
                    _ => (c[0] * c[0] + c[1] * c[1]).sqrt(),
                };
                let mut min_pos = T::infinity();
                for i in 0..domain.cell_count() {
                    let r = norm(&domain.cell_center(i));
                    if r > T::zero() && r < min_pos {
                        min_pos = r;
                    }
                }
                if !min_pos.is_finite() {
                    // every center sits at the origin (one-cell grid)
                    min_pos = domain.cell_size() * T::from_f64(0.5).unwrap();
                }
                let values = GridFunction::from_fn(domain, |c| norm(c).max(min_pos).powf(alpha))?;
                let mut u = WeightU::new(values)?;
                u.clamp = Some(min_pos);
                Ok(u)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WeightSpec::One => "u=1".to_string(),
            WeightSpec::PowerAbs { alpha } => format!("u=|x|^{alpha}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_set(domain: GridDomain<f64>, lo: f64, hi: f64) -> GridSet<f64> {
        GridSet::from_fn(domain, |c| c[0] >= lo && c[0] < hi)
    }

    #[test]
    fn identity_weight_measures_length() {
        // u = 1 on [-2,2], E = [0,1) has measure 1.
        let domain = GridDomain::line(2.0, 128).unwrap();
        let u = WeightU::ones(domain);
        let e = interval_set(domain, 0.0, 1.0);
        let m = measure_u(&u, &e).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "got {m}");
    }

    #[test]
    fn abs_weight_integrates_to_half() {
        // u(x) = |x|, E = [0,1): integral is 1/2. Midpoint sampling is exact
        // for an affine integrand, so refinement only moves rounding.
        for n in [64usize, 128, 256] {
            let domain = GridDomain::line(2.0, n).unwrap();
            let u = WeightSpec::PowerAbs { alpha: 1.0 }.materialize(domain).unwrap();
            let e = interval_set(domain, 0.0, 1.0);
            let m = measure_u(&u, &e).unwrap();
            assert!((m - 0.5).abs() < 1e-12, "n={n} got {m}");
        }
    }

    #[test]
    fn empty_set_has_zero_measure() {
        let domain = GridDomain::line(2.0, 32).unwrap();
        let u = WeightU::ones(domain);
        assert_eq!(measure_u(&u, &GridSet::empty(domain)).unwrap(), 0.0);
    }

    #[test]
    fn measure_is_additive_over_disjoint_sets() {
        // Dyadic cell values keep every partial sum exact, so additivity is
        // bitwise; generic values agree to accumulation-order rounding.
        let domain = GridDomain::<f64>::line(1.5, 96).unwrap();
        let dyadic = GridFunction::from_fn(domain, |c| {
            1.0 + ((c[0] * 64.0).abs().floor() % 32.0) / 16.0
        })
        .unwrap();
        let u = WeightU::new(dyadic).unwrap();
        let a = interval_set(domain, -1.0, 0.25);
        let b = interval_set(domain, 0.25, 1.0);
        let ab = a.union(&b).unwrap();
        let lhs = measure_u(&u, &ab).unwrap();
        let rhs = measure_u(&u, &a).unwrap() + measure_u(&u, &b).unwrap();
        assert_eq!(lhs, rhs);

        let u = WeightSpec::PowerAbs { alpha: 0.5 }.materialize(domain).unwrap();
        let lhs = measure_u(&u, &ab).unwrap();
        let rhs = measure_u(&u, &a).unwrap() + measure_u(&u, &b).unwrap();
        assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * lhs);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let d1 = GridDomain::line(2.0, 32).unwrap();
        let d2 = GridDomain::line(2.0, 64).unwrap();
        let u = WeightU::ones(d1);
        let e = GridSet::full(d2);
        assert!(matches!(measure_u(&u, &e), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn refinement_preserves_measure_of_aligned_sets() {
        let coarse = GridDomain::line(2.0, 64).unwrap();
        let u_coarse = WeightU::ones(coarse);
        let e_coarse = interval_set(coarse, -0.5, 1.25);
        let m_coarse = measure_u(&u_coarse, &e_coarse).unwrap();
        let e_fine = e_coarse.refined(2).unwrap();
        let u_fine = WeightU::ones(coarse.refined(2).unwrap());
        let m_fine = measure_u(&u_fine, &e_fine).unwrap();
        assert!((m_coarse - m_fine).abs() < 1e-12);
    }

    #[test]
    fn power_weight_clamp_is_recorded_and_positive() {
        let domain = GridDomain::<f64>::line(1.0, 33).unwrap(); // odd n: one center at 0
        let u = WeightSpec::PowerAbs { alpha: -0.5 }.materialize(domain).unwrap();
        assert!(u.clamp_applied().is_some());
        assert!(u.as_function().values().iter().all(|&v| v.is_finite() && v > 0.0));
    }

    #[test]
    fn grid_function_rejects_bad_values() {
        let domain = GridDomain::line(1.0, 4).unwrap();
        assert!(GridFunction::from_values(domain, vec![0.0, -1.0, 0.0, 0.0]).is_err());
        assert!(GridFunction::from_values(domain, vec![0.0; 3]).is_err());
        assert!(GridFunction::from_values(domain, vec![f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn two_dimensional_centers_and_volume() {
        let domain = GridDomain::<f64>::square(1.0, 4).unwrap();
        assert_eq!(domain.cell_count(), 16);
        assert!((domain.cell_volume() - 0.25).abs() < 1e-15);
        let c = domain.cell_center(domain.cell_index(0, 3));
        assert!((c[0] + 0.75).abs() < 1e-15 && (c[1] - 0.75).abs() < 1e-15);
    }
}
