//! Generalized arithmetic progressions and small-ball probabilities.
//!
//! A GAP of rank `r` is `{g0 + sum k_i g_i : K_i <= k_i <= K'_i}`. The
//! small-ball probability of `b` at radius `beta` is
//! `sup_a P(|sum b_i x_i - a| <= beta)` for i.i.d. atoms `x_i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::matrix::ComplexMatrix;
use crate::rng::RngStream;
use crate::samplers::TruncatedExponentialSpec;

pub const DEFAULT_GAP_CAP: u128 = 1_000_000;
pub const MAX_EXACT_LEN: usize = 24;
const CLUSTER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    rank: usize,
    g0: Complex64,
    generators: Vec<Complex64>,
    lower: Vec<i64>,
    upper: Vec<i64>,
    symmetric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rational_bound: Option<u64>,
}

#[derive(Deserialize)]
struct RawGap {
    #[serde(default)]
    rank: Option<usize>,
    g0: Complex64,
    generators: Vec<Complex64>,
    lower: Vec<i64>,
    upper: Vec<i64>,
    #[serde(default)]
    symmetric: bool,
    #[serde(default)]
    rational_bound: Option<u64>,
}

impl<'de> Deserialize<'de> for Gap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGap::deserialize(d)?;
        if let Some(r) = raw.rank {
            if r != raw.generators.len() {
                return Err(serde::de::Error::custom(format!(
                    "rank {r} does not match {} generators",
                    raw.generators.len()
                )));
            }
        }
        let mut gap = Gap::new(raw.g0, raw.generators, raw.lower, raw.upper).map_err(serde::de::Error::custom)?;
        if raw.symmetric && !gap.symmetric {
            return Err(serde::de::Error::custom("symmetric GAP needs g0 = 0 and K_i = -K'_i"));
        }
        gap.rational_bound = raw.rational_bound;
        Ok(gap)
    }
}

impl Gap {
    pub fn new(g0: Complex64, generators: Vec<Complex64>, lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        let rank = generators.len();
        if lower.len() != rank || upper.len() != rank {
            return Err(Error::Dimension(format!(
                "rank {rank} GAP given {} lower and {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..rank).find(|&i| lower[i] > upper[i]) {
            return Err(Error::InvalidInput(format!(
                "bound {i}: lower {} exceeds upper {}",
                lower[i], upper[i]
            )));
        }
        let symmetric = g0 == Complex64::new(0.0, 0.0) && lower.iter().zip(&upper).all(|(l, u)| *l == -*u);
        Ok(Self {
            rank,
            g0,
            generators,
            lower,
            upper,
            symmetric,
            rational_bound: None,
        })
    }

    /// `{sum k_i g_i : |k_i| <= bound_i}`.
    pub fn symmetric(generators: Vec<Complex64>, bounds: &[i64]) -> Result<Self> {
        if bounds.iter().any(|b| *b < 0) {
            return Err(Error::InvalidInput("symmetric bounds must be >= 0".into()));
        }
        let lower = bounds.iter().map(|b| -b).collect();
        Self::new(Complex64::new(0.0, 0.0), generators, lower, bounds.to_vec())
    }

    pub fn with_rational_bound(mut self, q: u64) -> Self {
        self.rational_bound = Some(q);
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn g0(&self) -> Complex64 {
        self.g0
    }

    pub fn generators(&self) -> &[Complex64] {
        &self.generators
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn rational_bound(&self) -> Option<u64> {
        self.rational_bound
    }

    /// `prod (K'_i - K_i + 1)`, saturating.
    pub fn volume(&self) -> u128 {
        self.lower
            .iter()
            .zip(&self.upper)
            .fold(1u128, |acc, (l, u)| acc.saturating_mul((u - l) as u128 + 1))
    }

    fn check_cap(&self, cap: u128) -> Result<()> {
        let volume = self.volume();
        if volume > cap {
            return Err(Error::CapExceeded { volume, cap });
        }
        Ok(())
    }

    fn elements(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.volume() as usize);
        let mut k = self.lower.clone();
        loop {
            let mut z = self.g0;
            for (ki, g) in k.iter().zip(&self.generators) {
                z += *g * *ki as f64;
            }
            out.push(z);
            let mut d = 0;
            loop {
                if d == self.rank {
                    return out;
                }
                if k[d] < self.upper[d] {
                    k[d] += 1;
                    break;
                }
                k[d] = self.lower[d];
                d += 1;
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("GAP serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapElements {
    pub elements: Vec<Complex64>,
    pub is_proper: bool,
    pub distinct: usize,
}

fn count_distinct(points: &[Complex64], tol: f64) -> usize {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut distinct = 0;
    for (i, p) in sorted.iter().enumerate() {
        let dup = sorted[..i]
            .iter()
            .rev()
            .take_while(|q| p.re - q.re <= tol)
            .any(|q| (p.im - q.im).abs() <= tol);
        if !dup {
            distinct += 1;
        }
    }
    distinct
}

/// All `Vol(Q)` images, and whether they are pairwise distinct.
pub fn gap_enumerate(q: &Gap, cap: u128) -> Result<GapElements> {
    q.check_cap(cap)?;
    let elements = q.elements();
    let distinct = count_distinct(&elements, CLUSTER_TOL);
    Ok(GapElements {
        is_proper: distinct == elements.len(),
        distinct,
        elements,
    })
}

/// Distance from `point` to the nearest element of `q`.
pub fn gap_distance(point: Complex64, q: &Gap, cap: u128) -> Result<f64> {
    q.check_cap(cap)?;
    Ok(q.elements()
        .iter()
        .map(|z| (point - z).norm())
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    /// Rademacher: `+1` or `-1` with probability 1/2.
    BernoulliPm1,
    /// `0` or `1` with probability 1/2.
    Bernoulli01,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLaw {
    Uniform01,
    TruncatedExp(TruncatedExponentialSpec),
    /// Uniform over a finite list of values.
    Discrete(Vec<f64>),
}

impl AtomLaw {
    fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            AtomLaw::Uniform01 => rng.uniform(),
            AtomLaw::TruncatedExp(spec) => spec.sample(rng),
            AtomLaw::Discrete(vals) => vals[rng.below(vals.len())],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallResult {
    pub rho: f64,
    pub center: Complex64,
    pub method: Method,
    pub trials_or_atoms: u64,
    pub std_error: Option<f64>,
}

/// Sorted distinct sums with multiplicities.
fn enumerate_sums(b: &[f64], atom: Atom) -> Vec<(f64, u64)> {
    let (lo, hi) = match atom {
        Atom::BernoulliPm1 => (-1.0, 1.0),
        Atom::Bernoulli01 => (0.0, 1.0),
    };
    let mut sums: Vec<(f64, u64)> = vec![(0.0, 1)];
    for &bi in b {
        let (x0, x1) = if bi * lo <= bi * hi { (lo, hi) } else { (hi, lo) };
        let left: Vec<(f64, u64)> = sums.iter().map(|&(s, c)| (s + bi * x0, c)).collect();
        let right: Vec<(f64, u64)> = sums.iter().map(|&(s, c)| (s + bi * x1, c)).collect();
        let mut merged: Vec<(f64, u64)> = Vec::with_capacity(left.len() + right.len());
        let (mut i, mut j) = (0, 0);
        while i < left.len() || j < right.len() {
            let next = if j == right.len() || (i < left.len() && left[i].0 <= right[j].0) {
                i += 1;
                left[i - 1]
            } else {
                j += 1;
                right[j - 1]
            };
            match merged.last_mut() {
                Some(last) if last.0 == next.0 => last.1 += next.1,
                _ => merged.push(next),
            }
        }
        sums = merged;
    }
    sums
}

/// Exact `sup_a P(|sum b_i x_i - a| <= beta)` by enumerating all `2^n` sums.
pub fn small_ball_exact(b: &[f64], beta: f64, atom: Atom) -> Result<SmallBallResult> {
    if b.len() > MAX_EXACT_LEN {
        return Err(Error::TooLarge {
            len: b.len(),
            limit: MAX_EXACT_LEN,
        });
    }
    if !(beta >= 0.0) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("beta must be >= 0 and b finite".into()));
    }
    let sums = enumerate_sums(b, atom);
    let scale: f64 = b.iter().map(|v| v.abs()).sum();
    let width = 2.0 * beta + 1e-12 * scale;
    let (mut best, mut best_center) = (0u64, 0.0);
    let mut j = 0;
    let mut inside = 0u64;
    for i in 0..sums.len() {
        if j < i {
            j = i;
            inside = 0;
        }
        while j < sums.len() && sums[j].0 - sums[i].0 <= width {
            inside += sums[j].1;
            j += 1;
        }
        if inside > best {
            best = inside;
            best_center = 0.5 * (sums[i].0 + sums[j - 1].0);
        }
        inside -= sums[i].1;
    }
    let total = 2f64.powi(b.len() as i32);
    Ok(SmallBallResult {
        rho: best as f64 / total,
        center: Complex64::new(best_center, 0.0),
        method: Method::Exact,
        trials_or_atoms: 1u64 << b.len(),
        std_error: None,
    })
}

const MAX_CANDIDATES: usize = 4000;

fn best_window_1d(xs: &mut [f64], beta: f64) -> (usize, f64) {
    xs.sort_by(f64::total_cmp);
    let (mut best, mut center) = (0, 0.0);
    let mut j = 0;
    for i in 0..xs.len() {
        j = j.max(i);
        while j < xs.len() && xs[j] - xs[i] <= 2.0 * beta {
            j += 1;
        }
        if j - i > best {
            best = j - i;
            center = 0.5 * (xs[i] + xs[j - 1]);
        }
    }
    (best, center)
}

fn best_disk_2d(pts: &[Complex64], beta: f64) -> (usize, Complex64) {
    use std::collections::HashMap;
    let (min_re, max_re, min_im, max_im) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), z| (a.min(z.re), b.max(z.re), c.min(z.im), d.max(z.im)),
    );
    let mid = Complex64::new(0.5 * (min_re + max_re), 0.5 * (min_im + max_im));
    if pts.iter().all(|z| (z - mid).norm() <= beta) {
        return (pts.len(), mid);
    }
    if beta == 0.0 {
        let mut sorted = pts.to_vec();
        sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let (mut best, mut at, mut run) = (1, sorted[0], 1);
        for w in sorted.windows(2) {
            run = if w[1] == w[0] { run + 1 } else { 1 };
            if run > best {
                best = run;
                at = w[1];
            }
        }
        return (best, at);
    }
    let cell = 2.0 * beta;
    let key = |z: &Complex64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<Complex64>> = HashMap::new();
    for z in pts {
        grid.entry(key(z)).or_default().push(*z);
    }
    let mut cells: Vec<(&(i64, i64), &Vec<Complex64>)> = grid.iter().collect();
    cells.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
    let mut candidates = Vec::new();
    for (k, members) in &cells {
        candidates.push(Complex64::new((k.0 as f64 + 0.5) * cell, (k.1 as f64 + 0.5) * cell));
        candidates.extend(members.iter().copied());
        if candidates.len() >= MAX_CANDIDATES {
            break;
        }
    }
    candidates.truncate(MAX_CANDIDATES);
    let mut best = (0, pts[0]);
    for c in candidates {
        let (cx, cy) = key(&c);
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(members) = grid.get(&(cx + dx, cy + dy)) {
                    count += members.iter().filter(|z| (*z - c).norm() <= beta).count();
                }
            }
        }
        if count > best.0 {
            best = (count, c);
        }
    }
    best
}

/// Monte Carlo estimate of the small-ball probability for complex `b` and
/// real atoms. The supremum is approximated by the best window (real `b`) or
/// best disk around a data-driven set of candidate centers (complex `b`).
pub fn small_ball_mc(
    b: &[Complex64],
    beta: f64,
    atom: &AtomLaw,
    trials: usize,
    rng: &mut RngStream,
) -> Result<SmallBallResult> {
    if trials < 1000 {
        return Err(Error::InvalidInput(format!("need at least 1000 trials, got {trials}")));
    }
    if !(beta >= 0.0) {
        return Err(Error::InvalidInput("beta must be >= 0".into()));
    }
    if let AtomLaw::Discrete(v) = atom {
        if v.is_empty() {
            return Err(Error::InvalidInput("discrete atom law needs values".into()));
        }
    }
    let mut sums = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut s = Complex64::new(0.0, 0.0);
        for bi in b {
            s += *bi * atom.sample(rng);
        }
        sums.push(s);
    }
    let real = b.iter().all(|z| z.im == 0.0);
    let (hits, center) = if real {
        let mut xs: Vec<f64> = sums.iter().map(|z| z.re).collect();
        let (h, c) = best_window_1d(&mut xs, beta);
        (h, Complex64::new(c, 0.0))
    } else {
        best_disk_2d(&sums, beta)
    };
    let rho = hits as f64 / trials as f64;
    Ok(SmallBallResult {
        rho,
        center,
        method: Method::MonteCarlo,
        trials_or_atoms: trials as u64,
        std_error: Some((rho * (1.0 - rho) / trials as f64).sqrt()),
    })
}

fn square_rows(m: &ComplexMatrix, row: usize) -> Result<Vec<Vec<Complex64>>> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if row >= m.rows() {
        return Err(Error::InvalidInput(format!(
            "row {row} out of range for size {}",
            m.rows()
        )));
    }
    Ok(m.to_rows())
}

/// Column `row` of `M^{-1}` together with `log|det M|` and the phase of `det M`;
/// the cofactors of row `row` are `det(M) * w`.
fn scaled_cofactors(m: &ComplexMatrix, row: usize) -> Result<(Vec<Complex64>, f64, Complex64)> {
    let rows = square_rows(m, row)?;
    let lu = Lu::factor(&rows)?;
    let (log_abs, phase) = lu.log_det();
    if lu.is_singular() || log_abs < 1e-300f64.ln() {
        return Err(Error::SingularInput);
    }
    Ok((lu.inverse_column(row)?, log_abs, phase))
}

/// Cofactors `C_{row, j}` for every column `j`.
pub fn cofactor_row(m: &ComplexMatrix, row: usize) -> Result<Vec<Complex64>> {
    let (w, log_abs, phase) = scaled_cofactors(m, row)?;
    let det = phase * log_abs.exp();
    Ok(w.into_iter().map(|z| z * det).collect())
}

/// Unit-norm cofactor vector of row `row`; orthogonal (bilinearly) to every
/// other row of `M`.
pub fn cofactor_direction(m: &ComplexMatrix, row: usize) -> Result<Vec<Complex64>> {
    let (w, _, phase) = scaled_cofactors(m, row)?;
    normalize(w.into_iter().map(|z| z * phase).collect())
}

fn normalize(v: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::SingularInput);
    }
    Ok(v.into_iter().map(|z| z / norm).collect())
}

/// `a_j = (c_j + sum_i c_i) / ||c + sum c||` for the cofactors `c` of row `row`.
pub fn cofactor_unit_vector(m: &ComplexMatrix, row: usize) -> Result<Vec<Complex64>> {
    let (w, _, phase) = scaled_cofactors(m, row)?;
    let total: Complex64 = w.iter().sum();
    normalize(w.into_iter().map(|z| (z + total) * phase).collect())
}

/// `det` as an affine function of a free row.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub coeffs: Vec<Complex64>,
    pub constant: Complex64,
}

impl LinearForm {
    pub fn eval(&self, x: &[Complex64]) -> Complex64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>() + self.constant
    }
}

/// When row `row` of `M` is `m_j = x_j - (1 - sum_k x_k) + f_j`, the
/// determinant is `sum_j (c_j + sum_i c_i) x_j + sum_j c_j (f_j - 1)`, with
/// `c` the cofactors of that row (which do not depend on its entries).
pub fn cofactor_linear_form(m: &ComplexMatrix, row: usize, f: &[Complex64]) -> Result<LinearForm> {
    if f.len() != m.cols() {
        return Err(Error::Dimension(format!(
            "offset of length {} for {} columns",
            f.len(),
            m.cols()
        )));
    }
    let c = cofactor_row(m, row)?;
    let total: Complex64 = c.iter().sum();
    let one = Complex64::new(1.0, 0.0);
    Ok(LinearForm {
        coeffs: c.iter().map(|z| z + total).collect(),
        constant: c.iter().zip(f).map(|(ci, fi)| ci * (fi - one)).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapFit {
    pub gap: Gap,
    pub exceptional: usize,
}

const ANCHORS: usize = 8;

/// Search rank-one GAPs `c_i + k (c_j - c_i) / q` anchored at pairs among the
/// first few coefficients, with `q <= size_cap` and volume `<= size_cap`.
/// Returns the fit with the fewest coefficients farther than `delta` from the
/// progression (ties broken by volume) if that count is at most `sqrt(n)`.
pub fn fit_rank_one_gap(coeffs: &[Complex64], delta: f64, size_cap: u64) -> Result<Option<GapFit>> {
    if size_cap == 0 || size_cap > 10_000 {
        return Err(Error::InvalidInput(format!("size_cap {size_cap} must be in 1..=10000")));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidInput("delta must be >= 0".into()));
    }
    let n = coeffs.len();
    if n < 2 {
        return Ok(None);
    }
    let anchors = n.min(ANCHORS);
    let mut best: Option<(usize, u64, Gap)> = None;
    for i in 0..anchors {
        for j in 0..anchors {
            if i == j || coeffs[i] == coeffs[j] {
                continue;
            }
            for q in 1..=size_cap {
                let g = (coeffs[j] - coeffs[i]) / q as f64;
                let g0 = coeffs[i];
                let (mut lo, mut hi) = (i64::MAX, i64::MIN);
                let mut exceptional = 0;
                for c in coeffs {
                    let k = ((c - g0) / g).re.round();
                    if !k.is_finite() || k.abs() > 1e15 || (c - (g0 + g * k)).norm() > delta {
                        exceptional += 1;
                    } else {
                        lo = lo.min(k as i64);
                        hi = hi.max(k as i64);
                    }
                }
                if lo > hi {
                    continue;
                }
                let volume = (hi - lo) as u64 + 1;
                if volume > size_cap {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((e, v, _)) => (exceptional, volume) < (*e, *v),
                };
                if better {
                    let gap = Gap::new(g0, vec![g], vec![lo], vec![hi])?.with_rational_bound(q);
                    best = Some((exceptional, volume, gap));
                }
            }
        }
    }
    let limit = (n as f64).sqrt();
    Ok(best
        .filter(|(e, _, _)| *e as f64 <= limit)
        .map(|(exceptional, _, gap)| GapFit { gap, exceptional }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn enumerate_examples() {
        let q = Gap::symmetric(vec![c(1.0)], &[2]).unwrap();
        let e = gap_enumerate(&q, DEFAULT_GAP_CAP).unwrap();
        let mut re: Vec<f64> = e.elements.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(e.is_proper && q.volume() == 5 && q.is_symmetric());

        let q = Gap::symmetric(vec![c(1.0), c(2.0)], &[1, 1]).unwrap();
        let e = gap_enumerate(&q, DEFAULT_GAP_CAP).unwrap();
        assert_eq!((e.distinct, q.volume(), e.is_proper), (7, 9, false));

        let q = Gap::symmetric(vec![c(1.0), c(10.0)], &[1, 1]).unwrap();
        let e = gap_enumerate(&q, DEFAULT_GAP_CAP).unwrap();
        assert_eq!((e.distinct, e.is_proper), (9, true));
    }

    #[test]
    fn gap_validation_and_cap() {
        assert!(Gap::new(c(0.0), vec![c(1.0)], vec![2], vec![1]).is_err());
        assert!(Gap::new(c(0.0), vec![c(1.0)], vec![0, 1], vec![1]).is_err());
        let q = Gap::symmetric(vec![c(1.0), c(1e-3)], &[1000, 1000]).unwrap();
        assert!(matches!(
            gap_enumerate(&q, DEFAULT_GAP_CAP),
            Err(Error::CapExceeded { volume: 4_004_001, .. })
        ));
        let shifted = Gap::new(c(1.0), vec![c(1.0)], vec![-1], vec![1]).unwrap();
        assert!(!shifted.is_symmetric());
    }

    #[test]
    fn gap_json_round_trip() {
        let q = Gap::symmetric(vec![Complex64::new(1.0, 0.5), c(3.0)], &[2, 4]).unwrap();
        let text = q.to_json();
        assert!(text.contains("\"rank\":2") && text.contains("\"symmetric\":true"));
        assert_eq!(Gap::from_json(&text).unwrap(), q);
        let bad = r#"{"rank":1,"g0":[1,0],"generators":[[1,0]],"lower":[-1],"upper":[1],"symmetric":true}"#;
        assert!(Gap::from_json(bad).is_err());
    }

    #[test]
    fn distance_examples() {
        let q = Gap::symmetric(vec![c(1.0)], &[2]).unwrap();
        assert!((gap_distance(c(2.1), &q, DEFAULT_GAP_CAP).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(gap_distance(c(-1.0), &q, DEFAULT_GAP_CAP).unwrap(), 0.0);
    }

    #[test]
    fn exact_small_ball_examples() {
        let r = small_ball_exact(&[1.0; 4], 0.1, Atom::BernoulliPm1).unwrap();
        assert_eq!(r.rho, 0.375);
        assert_eq!(r.center.re, 0.0);
        assert!(r.std_error.is_none());
        let r = small_ball_exact(&[1.0, 2.0, 4.0, 8.0], 0.1, Atom::BernoulliPm1).unwrap();
        assert_eq!(r.rho, 1.0 / 16.0);
        assert_eq!(small_ball_exact(&[1.0], 0.0, Atom::BernoulliPm1).unwrap().rho, 0.5);
        assert_eq!(small_ball_exact(&[1.0; 4], 0.1, Atom::Bernoulli01).unwrap().rho, 0.375);
        assert!(matches!(
            small_ball_exact(&[1.0; 25], 0.0, Atom::BernoulliPm1),
            Err(Error::TooLarge { len: 25, .. })
        ));
    }

    #[test]
    fn erdos_central_binomial() {
        for n in [10usize, 16, 20] {
            let r = small_ball_exact(&vec![1.0; n], 0.0, Atom::BernoulliPm1).unwrap();
            let mut binom = 1.0;
            for k in 0..n / 2 {
                binom *= (n - k) as f64 / (k + 1) as f64;
            }
            assert!((r.rho - binom / 2f64.powi(n as i32)).abs() < 1e-15);
        }
    }

    /// `sup_a P(|S - a| <= beta)` for `S` a sum of `n` uniforms scaled by `w`,
    /// by discretized convolution.
    fn convolution_oracle(n: usize, w: f64, beta: f64) -> f64 {
        let m = 2000;
        let h = 1.0 / m as f64;
        let mut dens = vec![1.0; m];
        for _ in 1..n {
            let mut next = vec![0.0; dens.len() + m - 1];
            for (i, a) in dens.iter().enumerate() {
                for k in 0..m {
                    next[i + k] += a * h;
                }
            }
            dens = next;
        }
        let width = ((2.0 * beta / w) / h).round() as usize;
        let mut best: f64 = 0.0;
        let mut acc: f64 = dens[..width.min(dens.len())].iter().sum();
        for s in 0..dens.len().saturating_sub(width) {
            best = best.max(acc);
            acc += dens[s + width] - dens[s];
        }
        best * h
    }

    #[test]
    fn monte_carlo_matches_convolution() {
        let n = 8;
        let w = 1.0 / (n as f64).sqrt();
        let beta = 1.0 / (2.0 * (n as f64).sqrt());
        let exact = convolution_oracle(n, w, beta);
        let mut rng = RngStream::new(31);
        let r = small_ball_mc(&vec![c(w); n], beta, &AtomLaw::Uniform01, 20_000, &mut rng).unwrap();
        assert!(r.rho >= 0.5 * exact && r.rho <= 2.0 * exact, "{} vs {exact}", r.rho);
        assert!((r.rho - exact).abs() < 5.0 * r.std_error.unwrap() + 0.01);
    }

    #[test]
    fn monte_carlo_huge_radius_and_complex() {
        let mut rng = RngStream::new(32);
        let b = vec![c(1.0); 5];
        let r = small_ball_mc(&b, 100.0, &AtomLaw::Uniform01, 1000, &mut rng).unwrap();
        assert_eq!(r.rho, 1.0);
        let bz = vec![Complex64::new(1.0, 1.0); 5];
        let r = small_ball_mc(&bz, 100.0, &AtomLaw::Uniform01, 1000, &mut rng).unwrap();
        assert_eq!(r.rho, 1.0);
        // Rademacher sums on the diagonal line: the mode 0 carries 6/16.
        let bz = vec![Complex64::new(1.0, 1.0); 4];
        let law = AtomLaw::Discrete(vec![-1.0, 1.0]);
        let r = small_ball_mc(&bz, 0.1, &law, 40_000, &mut rng).unwrap();
        assert!((r.rho - 0.375).abs() < 5.0 * r.std_error.unwrap());
        assert!(small_ball_mc(&b, 0.1, &AtomLaw::Uniform01, 10, &mut rng).is_err());
    }

    #[test]
    fn cofactor_identity_example() {
        let id = ComplexMatrix::from_real(crate::matrix::DenseMatrix::identity(3));
        assert_eq!(cofactor_row(&id, 0).unwrap(), vec![c(1.0), c(0.0), c(0.0)]);
        let a = cofactor_unit_vector(&id, 0).unwrap();
        let s6 = 6f64.sqrt();
        for (x, want) in a.iter().zip([2.0 / s6, 1.0 / s6, 1.0 / s6]) {
            assert!((x - c(want)).norm() < 1e-15);
        }
        let singular = ComplexMatrix::from_real(crate::matrix::DenseMatrix::filled(2, 2, 1.0));
        assert!(matches!(cofactor_unit_vector(&singular, 0), Err(Error::SingularInput)));
    }

    #[test]
    fn linear_form_reproduces_determinant() {
        let mut rng = RngStream::new(33);
        let n = 6;
        let row = 1;
        let f: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.uniform(), rng.uniform())).collect();
        let mut m = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5));
        let form = cofactor_linear_form(&m, row, &f).unwrap();
        for _ in 0..20 {
            let x: Vec<Complex64> = (0..n).map(|_| c(rng.uniform())).collect();
            let total: Complex64 = x.iter().sum();
            for j in 0..n {
                m.set(row, j, x[j] - (c(1.0) - total) + f[j]);
            }
            let det = Lu::factor(&m.to_rows()).unwrap().det();
            assert!((form.eval(&x) - det).norm() < 1e-9 * det.norm().max(1.0));
        }
    }

    #[test]
    fn fit_arithmetic_progression() {
        let norm: f64 = (1..=10).map(|k| (k * k) as f64).sum::<f64>().sqrt();
        let coeffs: Vec<Complex64> = (1..=10).map(|k| c(k as f64 / norm)).collect();
        let fit = fit_rank_one_gap(&coeffs, 1e-9, 1000).unwrap().unwrap();
        assert_eq!(fit.exceptional, 0);
        assert!((fit.gap.generators()[0].norm() - 1.0 / norm).abs() < 1e-12);
        assert_eq!(fit.gap.volume(), 10);
        for z in &coeffs {
            assert!(gap_distance(*z, &fit.gap, DEFAULT_GAP_CAP).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn fit_with_corruption_and_negative_control() {
        let mut coeffs: Vec<Complex64> = (0..16).map(|k| c(0.3 + 0.05 * k as f64)).collect();
        coeffs[14] = c(0.123456);
        coeffs[15] = Complex64::new(0.2, 0.9);
        let fit = fit_rank_one_gap(&coeffs, 1e-6, 1000).unwrap().unwrap();
        assert_eq!(fit.exceptional, 2);

        let mut rng = RngStream::new(34);
        let disk: Vec<Complex64> = (0..40)
            .map(|_| Complex64::from_polar(rng.uniform().sqrt(), std::f64::consts::TAU * rng.uniform()))
            .collect();
        assert!(fit_rank_one_gap(&disk, 1e-3, 1000).unwrap().is_none());
        assert!(fit_rank_one_gap(&disk, 1e-3, 10_001).is_err());
    }
}
