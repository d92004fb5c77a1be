//! Uniform polynomial approximation on an interval.
//!
//! Polynomials are stored in the Chebyshev basis of the interval `[lo, hi]`,
//! i.e. as `Σ c_k T_k(y)` with `y = (2x - lo - hi) / (hi - lo)`. Monomial
//! coefficients are exported on request; they lose accuracy quickly as the
//! degree grows.

use crate::error::{Error, Result};

/// Highest degree either constructor accepts.
pub const MAX_DEGREE: usize = 64;

/// Points in the uniform part of every error-measurement grid.
pub const CHECK_GRID: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyApprox {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
    sup_error: f64,
    extremal_points: Vec<f64>,
    levelled_error: Option<f64>,
}

impl PolyApprox {
    /// Wraps Chebyshev coefficients; `sup_error` is left at zero.
    pub fn from_chebyshev(coeffs: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        check_interval(lo, hi)?;
        if coeffs.is_empty() {
            return Err(Error::invalid("need at least one coefficient"));
        }
        Ok(Self {
            coeffs,
            lo,
            hi,
            sup_error: 0.0,
            extremal_points: Vec::new(),
            levelled_error: None,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Chebyshev coefficients on the stored interval.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Midpoint and half-width of the interval.
    pub fn center_halfwidth(&self) -> (f64, f64) {
        ((self.lo + self.hi) / 2.0, (self.hi - self.lo) / 2.0)
    }

    /// Maximum of `|f - p|` over the measurement grid.
    pub fn sup_error(&self) -> f64 {
        self.sup_error
    }

    /// Final Remez reference (empty for interpolants).
    pub fn extremal_points(&self) -> &[f64] {
        &self.extremal_points
    }

    /// Levelled error `|E|` of the final Remez system, a lower bound on the
    /// minimax error.
    pub fn levelled_error(&self) -> Option<f64> {
        self.levelled_error
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.to_unit(x))
    }

    /// Value plus whether `x` was inside the interval.
    pub fn eval_flagged(&self, x: f64) -> (f64, bool) {
        (self.eval(x), self.contains(x))
    }

    /// Monomial coefficients in the normalized variable
    /// `y = (x - center) / halfwidth`.
    pub fn to_normalized_monomial(&self) -> Vec<f64> {
        chebyshev_to_monomial(&self.coeffs)
    }

    /// Monomial coefficients in `x` itself. Debugging aid; ill-conditioned
    /// for high degrees or narrow intervals.
    pub fn to_monomial(&self) -> Vec<f64> {
        let b = self.to_normalized_monomial();
        let (c, h) = self.center_halfwidth();
        // y^k = ((x - c)/h)^k expanded binomially
        let d = b.len();
        let mut out = vec![0.0; d];
        for (k, &bk) in b.iter().enumerate() {
            let scale = bk / h.powi(k as i32);
            let mut binom = 1.0;
            for j in 0..=k {
                out[j] += scale * binom * (-c).powi((k - j) as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }
}

/// Evaluates `p` at `x`.
pub fn eval_poly(p: &PolyApprox, x: f64) -> f64 {
    p.eval(x)
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid(format!("interval [{lo}, {hi}] must be finite with lo < hi")));
    }
    Ok(())
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::invalid(format!("degree {degree} exceeds cap {MAX_DEGREE}")));
    }
    Ok(())
}

pub(crate) fn clenshaw(coeffs: &[f64], y: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * y * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    y * b1 - b2 + coeffs[0]
}

pub(crate) fn chebyshev_to_monomial(coeffs: &[f64]) -> Vec<f64> {
    let d = coeffs.len();
    let mut out = vec![0.0; d];
    let mut prev = vec![0.0; d + 1];
    let mut cur = vec![0.0; d + 1];
    prev[0] = 1.0;
    cur[1] = 1.0;
    for (k, &ck) in coeffs.iter().enumerate() {
        let t = if k == 0 { &prev } else { &cur };
        for j in 0..d {
            out[j] += ck * t[j];
        }
        if k >= 1 {
            // T_{k+1} = 2y T_k - T_{k-1}
            let mut next = vec![0.0; d + 1];
            for j in 0..d {
                next[j + 1] += 2.0 * cur[j];
                next[j] -= prev[j];
            }
            prev = std::mem::replace(&mut cur, next);
        }
    }
    out
}

/// Sorted grid on `[lo, hi]`: uniform points, Chebyshev-clustered points,
/// the endpoints, and any interior breakpoints.
fn measurement_grid(lo: f64, hi: f64, points: usize, breakpoints: &[f64]) -> Vec<f64> {
    let n = points.max(2);
    let mid = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let mut g = Vec::with_capacity(2 * n + 2 + breakpoints.len());
    for i in 0..=n {
        g.push(lo + (hi - lo) * i as f64 / n as f64);
    }
    for j in 0..=n {
        g.push(mid - half * (std::f64::consts::PI * j as f64 / n as f64).cos());
    }
    g.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    for x in g.iter_mut() {
        *x = x.clamp(lo, hi);
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn sample<F: Fn(f64) -> f64>(f: &F, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite { x })
            }
        })
        .collect()
}

fn max_abs_error(p: &PolyApprox, xs: &[f64], fx: &[f64]) -> f64 {
    xs.iter()
        .zip(fx)
        .map(|(&x, &v)| (v - p.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Degree-`degree` interpolant at the Chebyshev points of the first kind.
pub fn chebyshev_interpolant<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, degree: usize) -> Result<PolyApprox> {
    check_interval(lo, hi)?;
    check_degree(degree)?;
    let m = degree + 1;
    let mid = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;
    let thetas: Vec<f64> = (0..m)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / m as f64)
        .collect();
    let nodes: Vec<f64> = thetas.iter().map(|t| mid + half * t.cos()).collect();
    let fv = sample(&f, &nodes)?;
    let mut coeffs = vec![0.0; m];
    for (k, ck) in coeffs.iter_mut().enumerate() {
        let s: f64 = thetas
            .iter()
            .zip(&fv)
            .map(|(t, v)| v * (k as f64 * t).cos())
            .sum();
        *ck = 2.0 * s / m as f64;
    }
    coeffs[0] /= 2.0;
    let mut p = PolyApprox::from_chebyshev(coeffs, lo, hi)?;
    let grid = measurement_grid(lo, hi, CHECK_GRID, &[]);
    let fg = sample(&f, &grid)?;
    p.sup_error = max_abs_error(&p, &grid, &fg);
    Ok(p)
}

/// Knobs for [`remez_with`].
#[derive(Debug, Clone)]
pub struct RemezOptions {
    /// Stop once `max|e| <= (1 + tol) |E|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Size of the uniform and of the clustered part of the search grid.
    pub grid_points: usize,
    /// Points where `f` is not smooth; always included in the grid.
    pub breakpoints: Vec<f64>,
}

impl Default for RemezOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 200,
            grid_points: 20_000,
            breakpoints: Vec::new(),
        }
    }
}

/// Best uniform approximation by the Remez exchange algorithm, default options.
pub fn remez_best_approx<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    degree: usize,
    tol: f64,
) -> Result<PolyApprox> {
    remez_with(
        f,
        lo,
        hi,
        degree,
        &RemezOptions {
            tol,
            ..RemezOptions::default()
        },
    )
}

pub fn remez_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    degree: usize,
    opts: &RemezOptions,
) -> Result<PolyApprox> {
    check_interval(lo, hi)?;
    check_degree(degree)?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("Remez tolerance must be positive"));
    }
    let mut grid = measurement_grid(lo, hi, opts.grid_points.max(CHECK_GRID), &opts.breakpoints);
    let mut fgrid = sample(&f, &grid)?;
    let scale = fgrid.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let m = degree + 2;
    let mid = (lo + hi) / 2.0;
    let half = (hi - lo) / 2.0;

    let mut reference: Vec<f64> = (0..m)
        .map(|j| mid - half * (std::f64::consts::PI * j as f64 / (m - 1) as f64).cos())
        .collect();
    let mut best: Option<PolyApprox> = None;

    for _ in 0..opts.max_iter {
        let fref = sample(&f, &reference)?;
        let (coeffs, levelled) = solve_reference(&reference, &fref, lo, hi)?;
        let mut p = PolyApprox::from_chebyshev(coeffs, lo, hi)?;
        p.levelled_error = Some(levelled.abs());
        p.extremal_points = reference.clone();

        let err: Vec<f64> = grid.iter().zip(&fgrid).map(|(&x, &v)| v - p.eval(x)).collect();
        let mut candidates = alternating_extrema(&grid, &err);
        for c in candidates.iter_mut() {
            refine_extremum(&f, &p, &grid, c, lo, hi);
        }
        let max_err = candidates
            .iter()
            .map(|c| c.err.abs())
            .chain(err.iter().map(|e| e.abs()))
            .fold(0.0, f64::max);
        p.sup_error = max_err;

        if best.as_ref().is_none_or(|b| max_err < b.sup_error) {
            best = Some(p.clone());
        }
        let converged = max_err <= (1.0 + opts.tol) * levelled.abs() || max_err <= 1e-14 * scale;
        if converged {
            // refined points live off-grid; fold them in so the report stays an upper bound
            for c in &candidates {
                if let Err(pos) = grid.binary_search_by(|g| g.total_cmp(&c.x)) {
                    grid.insert(pos, c.x);
                    fgrid.insert(pos, f(c.x));
                }
            }
            p.sup_error = max_abs_error(&p, &grid, &fgrid).max(max_err);
            return Ok(p);
        }

        if candidates.len() >= m {
            trim_to(&mut candidates, m);
            reference = candidates.iter().map(|c| c.x).collect();
        } else {
            // too few sign changes for a full exchange: swap in the worst point
            let worst = candidates
                .iter()
                .max_by(|a, b| a.err.abs().total_cmp(&b.err.abs()))
                .copied();
            match worst {
                Some(w) => single_exchange(&mut reference, &p, &f, w),
                None => break,
            }
        }
    }
    let best = best.expect("at least one iteration ran");
    Err(Error::RemezNonConvergence {
        iterations: opts.max_iter,
        best: Box::new(best),
    })
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    idx: usize,
    x: f64,
    err: f64,
}

/// One extremum per maximal run of constant error sign.
fn alternating_extrema(xs: &[f64], err: &[f64]) -> Vec<Extremum> {
    let mut out: Vec<Extremum> = Vec::new();
    for (i, (&x, &e)) in xs.iter().zip(err).enumerate() {
        if e == 0.0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.err.signum() == e.signum() => {
                if e.abs() > last.err.abs() {
                    *last = Extremum { idx: i, x, err: e };
                }
            }
            _ => out.push(Extremum { idx: i, x, err: e }),
        }
    }
    out
}

/// Golden-section polish of an extremum between its grid neighbours.
fn refine_extremum<F: Fn(f64) -> f64>(f: &F, p: &PolyApprox, grid: &[f64], c: &mut Extremum, lo: f64, hi: f64) {
    let a0 = if c.idx > 0 { grid[c.idx - 1] } else { lo };
    let b0 = if c.idx + 1 < grid.len() { grid[c.idx + 1] } else { hi };
    let sign = c.err.signum();
    let g = |x: f64| sign * (f(x) - p.eval(x));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a0, b0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..40 {
        if g1 > g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - ratio * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + ratio * (b - a);
            g2 = g(x2);
        }
    }
    let (xb, gb) = if g1 > g2 { (x1, g1) } else { (x2, g2) };
    if gb.is_finite() && gb > sign * c.err {
        c.x = xb;
        c.err = sign * gb;
    }
}

/// Drops extrema, keeping alternation, until `m` remain.
fn trim_to(c: &mut Vec<Extremum>, m: usize) {
    while c.len() > m {
        if c.len() - m == 1 {
            if c[0].err.abs() < c[c.len() - 1].err.abs() {
                c.remove(0);
            } else {
                c.pop();
            }
        } else {
            // remove the adjacent pair whose larger error is smallest
            let (k, _) = c
                .windows(2)
                .enumerate()
                .map(|(k, w)| (k, w[0].err.abs().max(w[1].err.abs())))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least two extrema");
            c.drain(k..k + 2);
        }
    }
}

fn single_exchange<F: Fn(f64) -> f64>(reference: &mut Vec<f64>, p: &PolyApprox, f: &F, w: Extremum) {
    let e = |x: f64| f(x) - p.eval(x);
    let pos = reference.partition_point(|&r| r < w.x);
    let same = |r: f64| e(r).signum() == w.err.signum();
    if pos == 0 {
        if same(reference[0]) {
            reference[0] = w.x;
        } else {
            reference.pop();
            reference.insert(0, w.x);
        }
    } else if pos == reference.len() {
        let last = reference.len() - 1;
        if same(reference[last]) {
            reference[last] = w.x;
        } else {
            reference.remove(0);
            reference.push(w.x);
        }
    } else if same(reference[pos - 1]) {
        reference[pos - 1] = w.x;
    } else {
        reference[pos] = w.x;
    }
}

/// Solves `Σ c_k T_k(y_i) + (-1)^i E = f(x_i)` for `(c, E)`.
fn solve_reference(xs: &[f64], fx: &[f64], lo: f64, hi: f64) -> Result<(Vec<f64>, f64)> {
    let m = xs.len();
    let d = m - 2;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (i, (&x, &v)) in xs.iter().zip(fx).enumerate() {
        let y = (2.0 * x - lo - hi) / (hi - lo);
        let row = &mut a[i];
        let (mut t0, mut t1) = (1.0, y);
        for (k, slot) in row.iter_mut().take(d + 1).enumerate() {
            *slot = match k {
                0 => 1.0,
                1 => y,
                _ => {
                    let t2 = 2.0 * y * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                    t2
                }
            };
        }
        row[d + 1] = if i % 2 == 0 { 1.0 } else { -1.0 };
        row[m] = v;
    }
    let sol = gauss_solve(a)?;
    let levelled = sol[d + 1];
    Ok((sol[..=d].to_vec(), levelled))
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::invalid("singular Remez system (repeated reference points?)"));
        }
        a.swap(col, piv);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..=m {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][m] - s) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xlgx(x: f64) -> f64 {
        if x > 0.0 {
            x * x.log2()
        } else {
            0.0
        }
    }

    #[test]
    fn interpolant_reproduces_constants_and_quadratics() {
        for d in [0, 3, 9] {
            let p = chebyshev_interpolant(|_| 1.0, -2.0, 5.0, d).unwrap();
            assert!(p.sup_error() <= 1e-14);
            assert!((eval_poly(&p, 0.3) - 1.0).abs() < 1e-14);
        }
        let p = chebyshev_interpolant(|x| x * x, 0.0, 1.0, 2).unwrap();
        assert!(p.sup_error() <= 1e-12);
        assert!((eval_poly(&p, 0.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn interpolant_rejects_non_finite() {
        let r = chebyshev_interpolant(|x| 1.0 / x, -1.0, 1.0, 4);
        assert!(r.is_ok() || matches!(r, Err(Error::NonFinite { .. })));
        let r = chebyshev_interpolant(|x: f64| x.ln(), 0.0, 1.0, 4);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn remez_exact_on_linear() {
        for d in [1, 2, 5] {
            let p = remez_best_approx(|x| 3.0 * x - 1.0, -1.0, 2.0, d, 1e-3).unwrap();
            assert!(p.sup_error() <= 1e-13, "degree {d}: {}", p.sup_error());
        }
    }

    #[test]
    fn remez_beats_interpolant_on_abs() {
        let cheb = chebyshev_interpolant(f64::abs, -1.0, 1.0, 10).unwrap();
        let opts = RemezOptions {
            breakpoints: vec![0.0],
            ..RemezOptions::default()
        };
        let rem = remez_with(f64::abs, -1.0, 1.0, 10, &opts).unwrap();
        assert!(rem.sup_error() < cheb.sup_error());
        // value at the kink is within the reported error of zero
        assert!(eval_poly(&rem, 0.0).abs() <= rem.sup_error());
    }

    #[test]
    fn remez_equioscillates() {
        let opts = RemezOptions {
            breakpoints: vec![0.0],
            tol: 1e-3,
            ..RemezOptions::default()
        };
        let p = remez_with(f64::abs, -1.0, 1.0, 8, &opts).unwrap();
        let pts = p.extremal_points();
        assert!(pts.len() >= 10);
        let e: Vec<f64> = pts.iter().map(|&x| x.abs() - p.eval(x)).collect();
        let lev = p.levelled_error().unwrap();
        for w in e.windows(2) {
            assert!(w[0].signum() != w[1].signum());
        }
        for v in &e {
            assert!((v.abs() - lev).abs() <= 1e-3 * lev + 1e-12, "{v} vs {lev}");
        }
    }

    #[test]
    fn remez_xlogx_error_decreases() {
        let errs: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|&d| remez_best_approx(xlgx, 0.0, 1.0, d, 1e-3).unwrap().sup_error())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn clenshaw_matches_monomial() {
        let p = chebyshev_interpolant(|x: f64| (3.0 * x).sin() + x * x, 0.0, 1.0, 8).unwrap();
        let mono = p.to_monomial();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            let direct: f64 = mono.iter().rev().fold(0.0, |acc, c| acc * x + c);
            assert!((direct - p.eval(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn normalized_monomial_matches() {
        let p = chebyshev_interpolant(|x: f64| x.exp(), 2.0, 4.0, 12).unwrap();
        let b = p.to_normalized_monomial();
        let (c, h) = p.center_halfwidth();
        for i in 0..=10 {
            let x = 2.0 + 0.2 * i as f64;
            let y = (x - c) / h;
            let v: f64 = b.iter().rev().fold(0.0, |acc, bk| acc * y + bk);
            assert!((v - p.eval(x)).abs() < 1e-11 * p.eval(x).abs());
        }
    }

    #[test]
    fn degree_cap_enforced() {
        assert!(chebyshev_interpolant(f64::abs, -1.0, 1.0, MAX_DEGREE + 1).is_err());
        assert!(remez_best_approx(f64::abs, 1.0, 1.0, 4, 1e-3).is_err());
    }
}
