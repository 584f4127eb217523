//! Weight-class constant evaluators and the adversarial cube-family search.
//!
//! The suprema defining A_p, B_p and friends run over infinite families; here
//! they are sampled over grid-aligned cubes (A_p, A_1), geometric grids of
//! radii (B_p, B_{p,inf}, doubling), and a seeded randomized search with
//! greedy local moves (the cube/subset-family condition). Unboundedness is
//! diagnosed by growth under refinement, never by an absolute threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::maximal::{maximal_naive, CubeSpec};
use crate::measure::{GridDomain, GridSet, WeightU};
use crate::scalar::Real;
use crate::weight::{MaybeDivergent, WeightW};
use crate::Result;

/// Geometric radius grid `2^k` for the one-dimensional suprema.
const RADIUS_GRID_LOG2: std::ops::RangeInclusive<i32> = -30..=30;

/// A_p constant of a gridded weight (`p > 1`): the maximum over in-box
/// grid-aligned cubes of `avg_Q(u) * avg_Q(u^{-1/(p-1)})^(p-1)`.
///
/// Always at least 1.
pub fn ap_constant<T: Real>(u: &WeightU<T>, p: T) -> Result<T> {
    if !(p > T::one()) {
        return Err(Error::invalid("A_p needs p > 1"));
    }
    let domain = *u.domain();
    let n = domain.cells_per_axis();
    let dual_exp = -(p - T::one()).recip();
    let dual: Vec<T> = u.as_function().values().iter().map(|&v| v.powf(dual_exp)).collect();
    let direct = u.as_function().values();

    let mut best = T::zero();
    match domain.dimension() {
        1 => {
            let su = prefix(direct);
            let sv = prefix(&dual);
            for a in 0..n {
                for b in (a + 1)..=n {
                    let len = T::from_count(b - a);
                    let mu = (su[b] - su[a]) / len;
                    let mv = (sv[b] - sv[a]) / len;
                    let cand = mu * mv.powf(p - T::one());
                    if cand > best {
                        best = cand;
                    }
                }
            }
        }
        _ => {
            let su = sat(direct, n);
            let sv = sat(&dual, n);
            for s in 1..=n {
                let area = T::from_count(s * s);
                for ay in 0..=(n - s) {
                    for ax in 0..=(n - s) {
                        let mu = sat_sum(&su, n, ay, ax, s) / area;
                        let mv = sat_sum(&sv, n, ay, ax, s) / area;
                        let cand = mu * mv.powf(p - T::one());
                        if cand > best {
                            best = cand;
                        }
                    }
                }
            }
        }
    }
    Ok(best)
}

/// A_1 constant: the maximum over cells of `Mu / u`, with `Mu` the maximal
/// function of the weight. Always at least 1.
pub fn a1_constant<T: Real>(u: &WeightU<T>) -> T {
    let mu = maximal_naive(u.as_function());
    mu.values()
        .iter()
        .zip(u.as_function().values())
        .map(|(&m, &w)| m / w)
        .fold(T::zero(), |acc, r| acc.max(r))
}

/// B_p constant: sup over a geometric grid of radii of
/// `r^p * tail(w, p, r) / W(r)`; `Divergent` when the tail integral is.
///
/// For `w = t^alpha` with `alpha < p - 1` the ratio is constant in `r` and
/// equals `(alpha + 1) / (p - alpha - 1)`.
pub fn bp_constant<T: Real>(w: &WeightW<T>, p: T) -> Result<MaybeDivergent<T>> {
    if !(p > T::zero()) {
        return Err(Error::invalid("B_p needs p > 0"));
    }
    let two = T::from_f64(2.0).unwrap();
    let mut sup = T::zero();
    for k in RADIUS_GRID_LOG2 {
        let r = two.powi(k);
        let tail = match w.tail_integral(p, r)? {
            MaybeDivergent::Divergent => return Ok(MaybeDivergent::Divergent),
            MaybeDivergent::Finite(v) => v,
        };
        let ratio = r.powf(p) * tail / w.cumulative(r)?;
        if ratio > sup {
            sup = ratio;
        }
    }
    Ok(MaybeDivergent::Finite(sup))
}

/// B_{p,inf} constant for `0 < p <= 1`: sup over grid pairs `r < t` of
/// `(W(t)/t^p) / (W(r)/r^p)`.
///
/// This is a sample sup; weights violating the condition reveal themselves
/// by growth as the grid extends.
pub fn bpinf_constant<T: Real>(w: &WeightW<T>, p: T) -> Result<T> {
    bpinf_constant_on_grid(w, p, RADIUS_GRID_LOG2)
}

/// Same as [`bpinf_constant`] on an explicit `2^k` grid (used to detect
/// growth across grid extensions).
pub fn bpinf_constant_on_grid<T: Real>(
    w: &WeightW<T>,
    p: T,
    grid: std::ops::RangeInclusive<i32>,
) -> Result<T> {
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::invalid("B_p,inf needs 0 < p <= 1"));
    }
    let two = T::from_f64(2.0).unwrap();
    let mut running_min = T::infinity();
    let mut sup = T::zero();
    for k in grid {
        let t = two.powi(k);
        let g = w.cumulative(t)? / t.powf(p);
        if running_min.is_finite() {
            let ratio = g / running_min;
            if ratio > sup {
                sup = ratio;
            }
        }
        if g < running_min {
            running_min = g;
        }
    }
    Ok(sup)
}

/// Doubling constant: sup over a geometric grid of `W(2r) / W(r)`.
///
/// Exactly `2^(alpha+1)` for the power weight `t^alpha`.
pub fn delta2_constant<T: Real>(w: &WeightW<T>) -> Result<T> {
    let two = T::from_f64(2.0).unwrap();
    let mut sup = T::zero();
    for k in RADIUS_GRID_LOG2 {
        let r = two.powi(k);
        let ratio = w.cumulative(two * r)? / w.cumulative(r)?;
        if ratio > sup {
            sup = ratio;
        }
    }
    Ok(sup)
}

/// A finite family of grid-aligned cubes, each with a nonempty subset of its
/// in-box cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFamily<T> {
    domain: GridDomain<T>,
    pairs: Vec<(CubeSpec, GridSet<T>)>,
}

impl<T: Real> CubeFamily<T> {
    pub fn new(domain: GridDomain<T>, pairs: Vec<(CubeSpec, GridSet<T>)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("cube family needs at least one pair"));
        }
        for (cube, subset) in &pairs {
            domain.check_same(subset.domain(), "cube family subset")?;
            if subset.is_empty() {
                return Err(Error::invalid("every subset must be nonempty"));
            }
            if !subset.is_subset_of(&cube.to_set(domain)) {
                return Err(Error::invalid("every subset must lie inside its cube"));
            }
        }
        Ok(Self { domain, pairs })
    }

    pub fn domain(&self) -> &GridDomain<T> {
        &self.domain
    }

    pub fn pairs(&self) -> &[(CubeSpec, GridSet<T>)] {
        &self.pairs
    }

    /// Union of the cubes' in-box cells.
    pub fn cube_union(&self) -> GridSet<T> {
        let mut acc = GridSet::empty(self.domain);
        for (cube, _) in &self.pairs {
            acc = acc.union(&cube.to_set(self.domain)).expect("same domain");
        }
        acc
    }

    /// Union of the subsets.
    pub fn subset_union(&self) -> GridSet<T> {
        let mut acc = GridSet::empty(self.domain);
        for (_, subset) in &self.pairs {
            acc = acc.union(subset).expect("same domain");
        }
        acc
    }

    /// `max_j |Q_j| / |S_j|` with Lebesgue volumes (cube volume counts the
    /// part outside the box too).
    pub fn max_volume_ratio(&self) -> T {
        self.pairs
            .iter()
            .map(|(cube, subset)| cube.volume(&self.domain) / subset.lebesgue())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// The family quotient `W(u(union Q_j)) / W(u(union S_j)) / max_j (|Q_j|/|S_j|)^q`.
///
/// A uniform bound over all families at some `q < p` is the geometric
/// condition equivalent to boundedness of the maximal operator on the
/// corresponding Lorentz space.
pub fn raposo_ratio<T: Real>(
    u: &WeightU<T>,
    w: &WeightW<T>,
    family: &CubeFamily<T>,
    q: T,
) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::invalid("family quotient needs q > 0"));
    }
    u.domain().check_same(family.domain(), "raposo_ratio")?;
    let wq = w.cumulative(u.measure(&family.cube_union())?)?;
    let ws = w.cumulative(u.measure(&family.subset_union())?)?;
    Ok(wq / ws / family.max_volume_ratio().powf(q))
}

/// Self-verifying record of the best family found for one exponent `q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaposoCertificate<T> {
    pub q: T,
    pub ratio: T,
    /// Refinement level: cells per axis of the search grid.
    pub level: usize,
    /// The family realizing `ratio`: cubes with the flat indices of their
    /// subset cells.
    pub family: Vec<(CubeSpec, Vec<usize>)>,
}

impl<T: Real> RaposoCertificate<T> {
    fn from_family(q: T, ratio: T, family: &CubeFamily<T>) -> Self {
        Self {
            q,
            ratio,
            level: family.domain().cells_per_axis(),
            family: family
                .pairs()
                .iter()
                .map(|(cube, subset)| (*cube, subset.iter_cells().collect()))
                .collect(),
        }
    }

    /// Rebuild the family on `domain` and recompute the quotient; equals
    /// `self.ratio` exactly for a valid certificate.
    pub fn recompute(&self, u: &WeightU<T>, w: &WeightW<T>) -> Result<T> {
        let domain = *u.domain();
        let pairs = self
            .family
            .iter()
            .map(|(cube, cells)| {
                let mut set = GridSet::empty(domain);
                for &c in cells {
                    set.insert(c);
                }
                (*cube, set)
            })
            .collect();
        raposo_ratio(u, w, &CubeFamily::new(domain, pairs)?, self.q)
    }
}

/// Subset densities tried by the random family generator.
const DYADIC_DENSITIES: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];
/// Largest family size generated by the search.
const MAX_FAMILY: usize = 8;
/// Cap on greedy improvement rounds per start.
const MAX_LOCAL_ROUNDS: usize = 60;

/// Search options; `Default` matches the documented defaults.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Number of random starts.
    pub budget: usize,
    /// Seed for the counter-based generator.
    pub seed: u64,
    /// Largest family size to generate (1 ..= 8).
    pub max_family: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { budget: 64, seed: 0, max_family: MAX_FAMILY }
    }
}

/// Equispaced interior grid of `count` exponents in `(0, p)`.
pub fn default_q_grid<T: Real>(p: T, count: usize) -> Vec<T> {
    let denom = T::from_count(count + 1);
    (1..=count).map(|i| p * T::from_count(i) / denom).collect()
}

/// Randomized search for extremal families, one certificate per `q`.
///
/// Each trial draws a family (up to `max_family` random in-box cubes with
/// random subsets at dyadic densities), then greedily applies local moves
/// (drop or add one subset cell, translate one cube) while they improve the
/// quotient. Trials run in parallel and are merged in trial order, so the
/// result depends only on the seed. The best ratio is monotone in the
/// budget because trial streams are nested.
pub fn raposo_search<T: Real>(
    u: &WeightU<T>,
    w: &WeightW<T>,
    qs: &[T],
    opts: &SearchOptions,
) -> Result<Vec<RaposoCertificate<T>>> {
    if opts.budget == 0 {
        return Err(Error::invalid("search budget must be at least 1"));
    }
    if qs.is_empty() {
        return Err(Error::invalid("need at least one exponent q"));
    }
    if !(1..=MAX_FAMILY).contains(&opts.max_family) {
        return Err(Error::invalid("max_family must be within 1..=8"));
    }
    for &q in qs {
        if !(q > T::zero()) {
            return Err(Error::invalid("every q must be positive"));
        }
    }
    let domain = *u.domain();

    let trials: Vec<Vec<(T, CubeFamily<T>)>> = (0..opts.budget)
        .into_par_iter()
        .map(|trial| {
            let mut rng = crate::rng::SplitMix64::new(opts.seed, trial as u64);
            let start = random_family(&domain, &mut rng, opts.max_family);
            qs.iter()
                .map(|&q| {
                    let (ratio, fam) = local_search(u, w, q, start.clone(), &mut rng);
                    (ratio, fam)
                })
                .collect()
        })
        .collect();

    // Merge in trial order: deterministic regardless of scheduling.
    let mut best: Vec<Option<(T, CubeFamily<T>)>> = vec![None; qs.len()];
    for per_trial in trials {
        for (slot, (ratio, fam)) in best.iter_mut().zip(per_trial) {
            let better = slot.as_ref().is_none_or(|(r, _)| ratio > *r);
            if better {
                *slot = Some((ratio, fam));
            }
        }
    }
    Ok(qs
        .iter()
        .zip(best)
        .map(|(&q, slot)| {
            let (ratio, fam) = slot.expect("budget >= 1 fills every slot");
            RaposoCertificate::from_family(q, ratio, &fam)
        })
        .collect())
}

fn random_family<T: Real>(
    domain: &GridDomain<T>,
    rng: &mut crate::rng::SplitMix64,
    max_family: usize,
) -> CubeFamily<T> {
    let n = domain.cells_per_axis();
    let count = rng.range(1, max_family);
    let mut pairs = Vec::with_capacity(count);
    for _ in 0..count {
        let side = rng.range(1, n);
        let corner = match domain.dimension() {
            1 => [rng.range(0, n - side) as i64, 0],
            _ => [rng.range(0, n - side) as i64, rng.range(0, n - side) as i64],
        };
        let cube = CubeSpec { corner, side_cells: side };
        let cells = cube.cells(domain);
        let density = *rng.choose(&DYADIC_DENSITIES);
        let want = ((cells.len() as f64 * density).round() as usize).max(1);
        let mut subset = GridSet::empty(*domain);
        let mut picked = 0usize;
        let mut order: Vec<usize> = cells.clone();
        // partial Fisher-Yates
        while picked < want {
            let j = picked + rng.below(order.len() - picked);
            order.swap(picked, j);
            subset.insert(order[picked]);
            picked += 1;
        }
        pairs.push((cube, subset));
    }
    CubeFamily::new(*domain, pairs).expect("generated family is valid")
}

/// Greedy hill climb: keep applying the best improving move until none
/// improves (or the round cap is hit).
fn local_search<T: Real>(
    u: &WeightU<T>,
    w: &WeightW<T>,
    q: T,
    mut family: CubeFamily<T>,
    rng: &mut crate::rng::SplitMix64,
) -> (T, CubeFamily<T>) {
    let domain = *u.domain();
    let n = domain.cells_per_axis();
    let mut current = raposo_ratio(u, w, &family, q).expect("valid family");
    for _ in 0..MAX_LOCAL_ROUNDS {
        let mut improved = false;
        for j in 0..family.pairs().len() {
            // Candidate moves on pair j, each evaluated on a cloned family.
            let mut candidates: Vec<CubeFamily<T>> = Vec::new();
            let (cube, subset) = &family.pairs()[j];
            // drop one subset cell (keep nonempty); all cells on small cubes,
            // a random sample on large ones
            let members: Vec<usize> = subset.iter_cells().collect();
            if members.len() > 1 {
                for cell in candidate_cells(&members, rng) {
                    let mut pairs = family.pairs().to_vec();
                    pairs[j].1.remove(cell);
                    candidates.push(CubeFamily { domain, pairs });
                }
            }
            // add one cube cell not yet in the subset
            let absent: Vec<usize> =
                cube.cells(&domain).into_iter().filter(|c| !subset.contains(*c)).collect();
            if !absent.is_empty() {
                for cell in candidate_cells(&absent, rng) {
                    let mut pairs = family.pairs().to_vec();
                    pairs[j].1.insert(cell);
                    candidates.push(CubeFamily { domain, pairs });
                }
            }
            // translate the cube one cell, moving its subset along
            for axis in 0..domain.dimension() {
                for delta in [-1i64, 1] {
                    if let Some(shifted) = shift_pair(&domain, cube, subset, axis, delta, n) {
                        let mut pairs = family.pairs().to_vec();
                        pairs[j] = shifted;
                        candidates.push(CubeFamily { domain, pairs });
                    }
                }
            }
            for cand in candidates {
                let ratio = raposo_ratio(u, w, &cand, q).expect("valid family");
                if ratio > current {
                    current = ratio;
                    family = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (current, family)
}

/// Cells to try for a subset move: everything when few, a sample when many.
fn candidate_cells(cells: &[usize], rng: &mut crate::rng::SplitMix64) -> Vec<usize> {
    const EXHAUSTIVE_BELOW: usize = 32;
    if cells.len() <= EXHAUSTIVE_BELOW {
        cells.to_vec()
    } else {
        (0..6).map(|_| *rng.choose(cells)).collect()
    }
}

fn shift_pair<T: Real>(
    domain: &GridDomain<T>,
    cube: &CubeSpec,
    subset: &GridSet<T>,
    axis: usize,
    delta: i64,
    n: usize,
) -> Option<(CubeSpec, GridSet<T>)> {
    let mut corner = cube.corner;
    corner[axis] += delta;
    // keep the translated cube inside the box so subsets stay translatable
    if corner[axis] < 0 || corner[axis] + cube.side_cells as i64 > n as i64 {
        return None;
    }
    let mut shifted = GridSet::empty(*domain);
    for idx in subset.iter_cells() {
        let (ix, iy) = domain.cell_coords(idx);
        let (sx, sy) = match axis {
            0 => (ix as i64 + delta, iy as i64),
            _ => (ix as i64, iy as i64 + delta),
        };
        if sx < 0 || sx >= n as i64 || (domain.dimension() == 2 && (sy < 0 || sy >= n as i64)) {
            return None;
        }
        shifted.insert(domain.cell_index(sx as usize, sy as usize));
    }
    Some((CubeSpec { corner, side_cells: cube.side_cells }, shifted))
}

fn prefix<T: Real>(values: &[T]) -> Vec<T> {
    let mut s = Vec::with_capacity(values.len() + 1);
    let mut acc = T::zero();
    s.push(acc);
    for &v in values {
        acc = acc + v;
        s.push(acc);
    }
    s
}

fn sat<T: Real>(values: &[T], n: usize) -> Vec<T> {
    let w = n + 1;
    let mut out = vec![T::zero(); w * w];
    for r in 1..=n {
        let mut row = T::zero();
        for c in 1..=n {
            row = row + values[(r - 1) * n + (c - 1)];
            out[r * w + c] = out[(r - 1) * w + c] + row;
        }
    }
    out
}

fn sat_sum<T: Real>(satv: &[T], n: usize, r0: usize, c0: usize, s: usize) -> T {
    let w = n + 1;
    let (r1, c1) = (r0 + s, c0 + s);
    satv[r1 * w + c1] - satv[r0 * w + c1] - satv[r1 * w + c0] + satv[r0 * w + c0]
}
