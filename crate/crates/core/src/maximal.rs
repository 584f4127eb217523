//! The uncentered Hardy-Littlewood maximal operator over grid-aligned cubes.
//!
//! For a nonnegative grid function `f` (zero-extended outside its box), the
//! operator evaluated at a cell is the maximum, over all grid-aligned cubes
//! containing that cell, of the average of `f` over the cube. The cube family
//! has sides from one cell up to three box-widths and corners on the grid of
//! the box enlarged by one box-width per side; beyond that every cube's
//! average is dominated by a nearer cube, so the truncation is loss-free.
//!
//! Two entry points compute the same values:
//!
//! - [`maximal_naive`]: transparent enumeration of the full cube family,
//!   one cell at a time. The oracle everything else is tested against.
//! - [`maximal_fast`]: optimized kernels with bit-identical output. In 1d a
//!   per-window sliding sweep handles small grids and a divide-and-conquer
//!   kernel over prefix-sum hulls handles large ones; in 2d a summed-area
//!   table plus one sliding max pass per cube side.
//!
//! Bit-identity holds because every kernel evaluates window averages with the
//! same expression on the same prefix sums, selects among them by exact
//! comparisons, and (in 1d) drops only windows that protrude from the box:
//! the zero extension keeps clamped prefix sums bitwise equal while the
//! shorter in-box window divides the same sum by a smaller length, which
//! cannot round to a smaller quotient.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rayon::prelude::*;

use crate::measure::{GridDomain, GridFunction, GridSet};
use crate::scalar::Real;

/// Grid-aligned cube: lower corner in cell coordinates (possibly outside the
/// box) and a positive side length in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CubeSpec {
    pub corner: [i64; 2],
    pub side_cells: usize,
}

impl CubeSpec {
    pub fn new_1d(corner: i64, side_cells: usize) -> Self {
        Self { corner: [corner, 0], side_cells }
    }

    pub fn new_2d(corner: [i64; 2], side_cells: usize) -> Self {
        Self { corner, side_cells }
    }

    /// Geometric volume `(side * h)^d`.
    pub fn volume<T: Real>(&self, domain: &GridDomain<T>) -> T {
        let side = T::from_count(self.side_cells) * domain.cell_size();
        match domain.dimension() {
            1 => side,
            _ => side * side,
        }
    }

    /// Does the cube contain the in-box cell with flat index `idx`?
    pub fn contains_cell<T: Real>(&self, domain: &GridDomain<T>, idx: usize) -> bool {
        let (ix, iy) = domain.cell_coords(idx);
        let s = self.side_cells as i64;
        let inside =
            |a: i64, i: usize| -> bool { a <= i as i64 && (i as i64) < a + s };
        match domain.dimension() {
            1 => inside(self.corner[0], ix),
            _ => inside(self.corner[0], ix) && inside(self.corner[1], iy),
        }
    }

    /// In-box cells covered by the cube.
    pub fn cells<T: Real>(&self, domain: &GridDomain<T>) -> Vec<usize> {
        let n = domain.cells_per_axis() as i64;
        let s = self.side_cells as i64;
        let clamp_axis = |a: i64| -> std::ops::Range<i64> { a.max(0)..(a + s).min(n) };
        let mut out = Vec::new();
        match domain.dimension() {
            1 => {
                for ix in clamp_axis(self.corner[0]) {
                    out.push(domain.cell_index(ix as usize, 0));
                }
            }
            _ => {
                for iy in clamp_axis(self.corner[1]) {
                    for ix in clamp_axis(self.corner[0]) {
                        out.push(domain.cell_index(ix as usize, iy as usize));
                    }
                }
            }
        }
        out
    }

    /// Grid set of the in-box cells covered by the cube.
    pub fn to_set<T: Real>(&self, domain: GridDomain<T>) -> GridSet<T> {
        let mut mask = vec![false; domain.cell_count()];
        for idx in self.cells(&domain) {
            mask[idx] = true;
        }
        GridSet::from_mask(domain, mask).expect("mask sized to domain")
    }
}

/// Cells where `f` exceeds `lambda` strictly.
pub fn level_set<T: Real>(f: &GridFunction<T>, lambda: T) -> GridSet<T> {
    let mask = f.values().iter().map(|&v| v > lambda).collect();
    GridSet::from_mask(*f.domain(), mask).expect("mask sized to domain")
}

/// Inclusive prefix sums of the cell values: `s[k] = f[0] + ... + f[k-1]`.
fn prefix_sums_1d<T: Real>(values: &[T]) -> Vec<T> {
    let mut s = Vec::with_capacity(values.len() + 1);
    let mut acc = T::zero();
    s.push(acc);
    for &v in values {
        acc = acc + v;
        s.push(acc);
    }
    s
}

/// Average of the window with prefix indices `[a, b)`, clamped to the box.
/// `f` values are used directly for one-cell in-box windows so `Mf >= f`
/// holds exactly.
#[inline]
fn window_avg_1d<T: Real>(f: &[T], s: &[T], n: isize, a: isize, b: isize) -> T {
    debug_assert!(a < b);
    if b - a == 1 {
        return if (0..n).contains(&a) { f[a as usize] } else { T::zero() };
    }
    let sa = s[a.clamp(0, n) as usize];
    let sb = s[b.clamp(0, n) as usize];
    (sb - sa) / T::from_count((b - a) as usize)
}

fn naive_cell_1d<T: Real>(f: &[T], s: &[T], n: usize, ext: usize, i: usize) -> T {
    let n_i = n as isize;
    let lo_a = -((ext * n) as isize);
    let hi_b = ((1 + ext) * n) as isize;
    let mut best = f[i];
    for a in lo_a..=(i as isize) {
        let sa = s[a.clamp(0, n_i) as usize];
        for b in (i as isize + 1)..=hi_b {
            if b - a == 1 {
                continue; // the cell itself, already seeded
            }
            let sb = s[b.clamp(0, n_i) as usize];
            let avg = (sb - sa) / T::from_count((b - a) as usize);
            if avg > best {
                best = avg;
            }
        }
    }
    best
}

/// Summed-area table: `sat[r * (n+1) + c]` is the sum over cells with row
/// `< r` and column `< c`.
fn sat_2d<T: Real>(values: &[T], n: usize) -> Vec<T> {
    let w = n + 1;
    let mut sat = vec![T::zero(); w * w];
    for r in 1..=n {
        let mut row = T::zero();
        for c in 1..=n {
            row = row + values[(r - 1) * n + (c - 1)];
            sat[r * w + c] = sat[(r - 1) * w + c] + row;
        }
    }
    sat
}

/// Sum over the (possibly protruding) window rows `[r0, r1)`, cols `[c0, c1)`.
#[inline]
fn sat_window<T: Real>(sat: &[T], n: usize, r0: i64, r1: i64, c0: i64, c1: i64) -> T {
    let w = (n + 1) as i64;
    let r0 = r0.clamp(0, n as i64);
    let r1 = r1.clamp(0, n as i64);
    let c0 = c0.clamp(0, n as i64);
    let c1 = c1.clamp(0, n as i64);
    if r0 >= r1 || c0 >= c1 {
        return T::zero();
    }
    let at = |r: i64, c: i64| sat[(r * w + c) as usize];
    at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0)
}

fn naive_cell_2d<T: Real>(
    f: &[T],
    sat: &[T],
    n: usize,
    ext: usize,
    cx: usize,
    cy: usize,
) -> T {
    let lo = -((ext * n) as i64);
    let hi = ((1 + ext) * n) as i64;
    let mut best = f[cy * n + cx];
    for s in 2..=((1 + 2 * ext) * n) as i64 {
        let ax_lo = lo.max(cx as i64 - s + 1);
        let ax_hi = (cx as i64).min(hi - s);
        let ay_lo = lo.max(cy as i64 - s + 1);
        let ay_hi = (cy as i64).min(hi - s);
        let area = T::from_count((s * s) as usize);
        for ay in ay_lo..=ay_hi {
            for ax in ax_lo..=ax_hi {
                let sum = sat_window(sat, n, ay, ay + s, ax, ax + s);
                let avg = sum / area;
                if avg > best {
                    best = avg;
                }
            }
        }
    }
    best
}

/// Transparent enumeration oracle over the full cube family.
///
/// Output is `>= f` pointwise and `<= max f`; cost grows cubically (1d) or
/// with the fifth power (2d) of the resolution, so this is the reference
/// implementation, not the production kernel.
pub fn maximal_naive<T: Real>(f: &GridFunction<T>) -> GridFunction<T> {
    maximal_naive_extended(f, 1)
}

/// Oracle over a family enlarged by `ext` box-widths per side (sides up to
/// `(1 + 2 ext)` box-widths). `ext = 1` is the operator's family; larger
/// budgets exist to check that the truncation is loss-free.
pub fn maximal_naive_extended<T: Real>(f: &GridFunction<T>, ext: usize) -> GridFunction<T> {
    let domain = *f.domain();
    let n = domain.cells_per_axis();
    let values = match domain.dimension() {
        1 => {
            let s = prefix_sums_1d(f.values());
            let fv = f.values();
            (0..n)
                .into_par_iter()
                .map(|i| naive_cell_1d(fv, &s, n, ext, i))
                .collect()
        }
        _ => {
            let sat = sat_2d(f.values(), n);
            let fv = f.values();
            (0..n * n)
                .into_par_iter()
                .map(|idx| naive_cell_2d(fv, &sat, n, ext, idx % n, idx / n))
                .collect()
        }
    };
    GridFunction::from_values(domain, values).expect("averages of nonnegative values")
}

/// Oracle values at selected cells only (used by benchmarks and spot checks).
pub fn maximal_naive_at_cells<T: Real>(f: &GridFunction<T>, cells: &[usize]) -> Vec<T> {
    let domain = f.domain();
    let n = domain.cells_per_axis();
    match domain.dimension() {
        1 => {
            let s = prefix_sums_1d(f.values());
            cells
                .par_iter()
                .map(|&i| naive_cell_1d(f.values(), &s, n, 1, i))
                .collect()
        }
        _ => {
            let sat = sat_2d(f.values(), n);
            cells
                .par_iter()
                .map(|&idx| naive_cell_2d(f.values(), &sat, n, 1, idx % n, idx / n))
                .collect()
        }
    }
}

/// 1d grids up to this many cells use the per-window sweep; larger grids the
/// divide-and-conquer kernel.
const SWEEP_MAX_CELLS: usize = 64;

/// Fast kernel, bit-identical to [`maximal_naive`] on every input.
pub fn maximal_fast<T: Real>(f: &GridFunction<T>) -> GridFunction<T> {
    let domain = *f.domain();
    let n = domain.cells_per_axis();
    let values = match domain.dimension() {
        1 => {
            let s = prefix_sums_1d(f.values());
            let mut out = f.values().to_vec();
            if n <= SWEEP_MAX_CELLS {
                sweep_1d(f.values(), &s, n, &mut out);
            } else {
                let mut solver = DcSolver { prefix: &s, out: &mut out, hull: Vec::new() };
                solver.solve(0, n);
            }
            out
        }
        _ => fast_2d(f.values(), n),
    };
    GridFunction::from_values(domain, values).expect("averages of nonnegative values")
}

/// Per-window sweep: for each in-box window size, slide a monotone deque of
/// window averages across the cells.
fn sweep_1d<T: Real>(f: &[T], s: &[T], n: usize, out: &mut [T]) {
    let n_i = n as isize;
    let mut avgs: Vec<T> = Vec::with_capacity(n);
    let mut deque: VecDeque<usize> = VecDeque::new();
    for size in 2..=n {
        avgs.clear();
        for a in 0..=(n - size) {
            avgs.push(window_avg_1d(f, s, n_i, a as isize, (a + size) as isize));
        }
        deque.clear();
        for i in 0..n {
            // windows [a, a+size) containing cell i: a in [i+1-size, i]
            if i + size <= n {
                let a = i; // newest admissible start
                while let Some(&back) = deque.back() {
                    if avgs[back] <= avgs[a] {
                        deque.pop_back();
                    } else {
                        break;
                    }
                }
                deque.push_back(a);
            }
            while let Some(&front) = deque.front() {
                if front + size <= i {
                    deque.pop_front();
                } else {
                    break;
                }
            }
            if let Some(&front) = deque.front() {
                if avgs[front] > out[i] {
                    out[i] = avgs[front];
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Divide-and-conquer kernel on the prefix-sum graph.
//
// A window average is the slope of the chord between two prefix-sum points,
// and the value at cell i is the steepest chord spanning i. The recursion
// splits the cell range; chords crossing the split are resolved with one
// convex hull per side and a prefix/suffix maximum of tangent slopes. Hull
// construction and tangent location use exact orientation tests so the
// selected chord is the true maximum, keeping the output bit-identical to
// the enumeration oracle.
// ---------------------------------------------------------------------------

struct DcSolver<'a, T> {
    prefix: &'a [T],
    out: &'a mut [T],
    hull: Vec<(T, T)>,
}

impl<T: Real> DcSolver<'_, T> {
    fn point(&self, k: usize) -> (T, T) {
        (T::from_count(k), self.prefix[k])
    }

    #[inline]
    fn slope(p: (T, T), q: (T, T)) -> T {
        (q.1 - p.1) / (q.0 - p.0)
    }

    fn solve(&mut self, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return; // single cell: seeded with f
        }
        let m = (lo + hi) / 2;

        // Cells in [lo, m): best chord from a <= i to some b in (m, hi].
        // Upper hull of the right prefix points, then a running prefix max of
        // tangent slopes over a.
        self.hull.clear();
        for b in (m + 1)..=hi {
            let q = self.point(b);
            while self.hull.len() >= 2 {
                let p0 = self.hull[self.hull.len() - 2];
                let p1 = self.hull[self.hull.len() - 1];
                if orient(p0, p1, q) != Ordering::Less {
                    self.hull.pop();
                } else {
                    break;
                }
            }
            self.hull.push(q);
        }
        let mut running = T::neg_infinity();
        for a in lo..m {
            let p = self.point(a);
            let t = tangent_from_left(p, &self.hull);
            if t > running {
                running = t;
            }
            if running > self.out[a] {
                self.out[a] = running;
            }
        }

        // Cells in [m, hi): best chord from some a in [lo, m) to b >= i+1.
        // Lower hull of the left prefix points, suffix max over b.
        self.hull.clear();
        for a in lo..m {
            let q = self.point(a);
            while self.hull.len() >= 2 {
                let p0 = self.hull[self.hull.len() - 2];
                let p1 = self.hull[self.hull.len() - 1];
                if orient(p0, p1, q) != Ordering::Greater {
                    self.hull.pop();
                } else {
                    break;
                }
            }
            self.hull.push(q);
        }
        let mut running = T::neg_infinity();
        for b in ((m + 1)..=hi).rev() {
            let p = self.point(b);
            let t = tangent_from_right(&self.hull, p);
            if t > running {
                running = t;
            }
            if running > self.out[b - 1] {
                self.out[b - 1] = running;
            }
        }

        self.solve(lo, m);
        self.solve(m, hi);
    }
}

/// Max slope from a point left of the hull to the vertices of an upper hull.
fn tangent_from_left<T: Real>(p: (T, T), hull: &[(T, T)]) -> T {
    let mut lo = 0usize;
    let mut hi = hull.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if orient(p, hull[mid], hull[mid + 1]) == Ordering::Greater {
            lo = mid + 1; // slope still increasing along the hull
        } else {
            hi = mid;
        }
    }
    DcSolver::<T>::slope(p, hull[lo])
}

/// Max slope from the vertices of a lower hull to a point right of it.
fn tangent_from_right<T: Real>(hull: &[(T, T)], p: (T, T)) -> T {
    let mut lo = 0usize;
    let mut hi = hull.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if orient(hull[mid], hull[mid + 1], p) == Ordering::Greater {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    DcSolver::<T>::slope(hull[lo], p)
}

// ---------------------------------------------------------------------------
// Exact orientation predicate.
//
// The x coordinates are exact small integers, the y coordinates arbitrary
// floats. A rounded determinant with a conservative error bound filters the
// easy cases; near-degenerate ones fall through to an error-free expansion.
// ---------------------------------------------------------------------------

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    let be = b - bv;
    let ae = a - av;
    (s, ae + be)
}

#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Sign of the exact sum of the terms, via a nonoverlapping expansion.
fn exact_sum_sign<T: Real>(terms: &[T]) -> Ordering {
    let mut exp: [T; 24] = [T::zero(); 24];
    let mut len = 0usize;
    for &t in terms {
        let mut q = t;
        let mut j = 0usize;
        for k in 0..len {
            let (s, err) = two_sum(q, exp[k]);
            if err != T::zero() {
                exp[j] = err;
                j += 1;
            }
            q = s;
        }
        len = j;
        if q != T::zero() {
            exp[len] = q;
            len += 1;
        }
    }
    if len == 0 {
        Ordering::Equal
    } else if exp[len - 1] > T::zero() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Orientation of `c` relative to the directed line `a -> b`:
/// `Greater` means counterclockwise (above), `Less` clockwise.
fn orient<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> Ordering {
    let dx1 = b.0 - a.0; // exact: small integers
    let dx2 = c.0 - a.0;
    let (dy1h, dy1l) = two_sum(b.1, -a.1);
    let (dy2h, dy2l) = two_sum(c.1, -a.1);

    let t1 = dx1 * dy2h;
    let t2 = dx2 * dy1h;
    let t3 = dx1 * dy2l;
    let t4 = dx2 * dy1l;
    let det = (t1 - t2) + (t3 - t4);
    let mag = t1.abs() + t2.abs() + t3.abs() + t4.abs();
    let bound = mag * T::epsilon() * T::from_count(16);
    if det > bound {
        return Ordering::Greater;
    }
    if det < -bound {
        return Ordering::Less;
    }
    if mag == T::zero() {
        return Ordering::Equal;
    }

    // Exact fallback: det = dx1*(dy2h+dy2l) - dx2*(dy1h+dy1l) as an exact
    // eight-term sum.
    let (p1, e1) = two_prod(dx1, dy2h);
    let (p2, e2) = two_prod(dx1, dy2l);
    let (p3, e3) = two_prod(dx2, dy1h);
    let (p4, e4) = two_prod(dx2, dy1l);
    exact_sum_sign(&[p1, e1, p2, e2, -p3, -e3, -p4, -e4])
}

// ---------------------------------------------------------------------------
// 2d fast kernel: per cube side, window averages from the summed-area table,
// then a separable sliding maximum over window positions.
// ---------------------------------------------------------------------------

fn fast_2d<T: Real>(values: &[T], n: usize) -> Vec<T> {
    let mut out = values.to_vec();
    let sat = sat_2d(values, n);
    let n_i = n as i64;

    let max_positions = 3 * n; // positions per axis at the smallest side
    let mut win: Vec<T> = Vec::with_capacity(max_positions * max_positions);
    let mut colmax: Vec<T> = vec![T::zero(); max_positions * n];
    let mut deque: VecDeque<usize> = VecDeque::new();

    for s in 2..=(3 * n) as i64 {
        let positions = (3 * n as i64 - s + 1) as usize; // corners in [-n, 2n-s]
        let area = T::from_count((s * s) as usize);
        win.clear();
        for py in 0..positions {
            let ay = py as i64 - n_i;
            for px in 0..positions {
                let ax = px as i64 - n_i;
                win.push(sat_window(&sat, n, ay, ay + s, ax, ax + s) / area);
            }
        }

        // Horizontal pass: for each position row, sliding max over the
        // admissible corner columns of each cell column.
        for py in 0..positions {
            let row = &win[py * positions..(py + 1) * positions];
            deque.clear();
            for j in 0..n {
                // corners ax in [j+1-s, j] intersected with [-n, 2n-s]
                let hi = (j as i64).min(2 * n_i - s);
                let lo = (j as i64 - s + 1).max(-n_i);
                if j == 0 {
                    for px in 0..=((hi + n_i) as usize) {
                        push_deque(&mut deque, row, px);
                    }
                } else if hi + n_i >= 0 {
                    let px = (hi + n_i) as usize;
                    // one new corner enters per step (hi increments until capped)
                    if deque.back().is_none_or(|&b| b < px) {
                        push_deque(&mut deque, row, px);
                    }
                }
                while let Some(&front) = deque.front() {
                    if (front as i64 - n_i) < lo {
                        deque.pop_front();
                    } else {
                        break;
                    }
                }
                colmax[py * n + j] = row[*deque.front().expect("window nonempty")];
            }
        }

        // Vertical pass: per cell column, sliding max over corner rows.
        for j in 0..n {
            deque.clear();
            for i in 0..n {
                let hi = (i as i64).min(2 * n_i - s);
                let lo = (i as i64 - s + 1).max(-n_i);
                if i == 0 {
                    for py in 0..=((hi + n_i) as usize) {
                        push_deque_strided(&mut deque, &colmax, n, j, py);
                    }
                } else if hi + n_i >= 0 {
                    let py = (hi + n_i) as usize;
                    if deque.back().is_none_or(|&b| b < py) {
                        push_deque_strided(&mut deque, &colmax, n, j, py);
                    }
                }
                while let Some(&front) = deque.front() {
                    if (front as i64 - n_i) < lo {
                        deque.pop_front();
                    } else {
                        break;
                    }
                }
                let best = colmax[*deque.front().expect("window nonempty") * n + j];
                let idx = i * n + j;
                if best > out[idx] {
                    out[idx] = best;
                }
            }
        }
    }
    out
}

#[inline]
fn push_deque<T: Real>(deque: &mut VecDeque<usize>, row: &[T], px: usize) {
    while let Some(&back) = deque.back() {
        if row[back] <= row[px] {
            deque.pop_back();
        } else {
            break;
        }
    }
    deque.push_back(px);
}

#[inline]
fn push_deque_strided<T: Real>(
    deque: &mut VecDeque<usize>,
    colmax: &[T],
    n: usize,
    j: usize,
    py: usize,
) {
    while let Some(&back) = deque.back() {
        if colmax[back * n + j] <= colmax[py * n + j] {
            deque.pop_back();
        } else {
            break;
        }
    }
    deque.push_back(py);
}
