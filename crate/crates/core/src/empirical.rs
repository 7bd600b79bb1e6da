//! Rank transforms, the empirical copula and its floored variant, curve-step
//! representations along (y^{1-t}, y^t), finite-difference partial-derivative
//! estimates, and multiplier-perturbed replicates.

use crate::error::{Error, Result};

/// Raw paired observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pairs: Vec<(f64, f64)>,
}

impl Sample {
    /// Requires at least two pairs and no NaN entries.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Input(format!("need n >= 2 observations, got {}", pairs.len())));
        }
        if pairs.iter().any(|&(x, y)| x.is_nan() || y.is_nan()) {
            return Err(Error::Input("sample contains NaN".into()));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// How equal raw values are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Tied values receive the average of the ranks they span.
    AverageRank,
}

/// Rank-transformed observations on (0,1)^2 with the 1/(n+1) scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    u: Vec<f64>,
    v: Vec<f64>,
    // ordinal ranks 1..=n with ties broken by original index; these drive the
    // marginal-quantile compositions of the multiplier bootstrap
    ord_u: Vec<u32>,
    ord_v: Vec<u32>,
    tie_policy: TiePolicy,
    had_ties: bool,
}

impl PseudoSample {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// First-margin pseudo-observations rank/(n+1).
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Second-margin pseudo-observations rank/(n+1).
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Ordinal first-margin ranks (1-based, ties broken by index).
    pub fn ord_u(&self) -> &[u32] {
        &self.ord_u
    }

    /// Ordinal second-margin ranks (1-based, ties broken by index).
    pub fn ord_v(&self) -> &[u32] {
        &self.ord_v
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.tie_policy
    }

    pub fn had_ties(&self) -> bool {
        self.had_ties
    }

    /// Builds a pseudo-sample directly from points in (0,1)^2, re-ranking
    /// them. Mostly a convenience for tests and simulations where the data
    /// already have uniform margins.
    pub fn from_uniform_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        pseudo_observations(&Sample::new(pairs.to_vec())?)
    }
}

/// Average ranks (1-based) of `xs`; `ord` receives ordinal ranks with ties
/// broken by original index.
fn average_ranks(xs: &[f64], ord: &mut [u32]) -> (Vec<f64>, bool) {
    let n = xs.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("no NaN").then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut had_ties = false;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        if j > i {
            had_ties = true;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    for (pos, &orig) in idx.iter().enumerate() {
        ord[orig] = (pos + 1) as u32;
    }
    (ranks, had_ties)
}

/// Rank transform: u_i = rank(x_i)/(n+1), v_i = rank(y_i)/(n+1), average
/// ranks on ties.
pub fn pseudo_observations(s: &Sample) -> Result<PseudoSample> {
    let n = s.len();
    let xs: Vec<f64> = s.pairs().iter().map(|p| p.0).collect();
    let ys: Vec<f64> = s.pairs().iter().map(|p| p.1).collect();
    let mut ord_u = vec![0u32; n];
    let mut ord_v = vec![0u32; n];
    let (rx, tx) = average_ranks(&xs, &mut ord_u);
    let (ry, ty) = average_ranks(&ys, &mut ord_v);
    let scale = 1.0 / (n as f64 + 1.0);
    Ok(PseudoSample {
        u: rx.iter().map(|r| r * scale).collect(),
        v: ry.iter().map(|r| r * scale).collect(),
        ord_u,
        ord_v,
        tie_policy: TiePolicy::AverageRank,
        had_ties: tx || ty,
    })
}

/// Empirical copula (1/n) #\{i : u_i <= u, v_i <= v\}.
pub fn empirical_copula_at(ps: &PseudoSample, u: f64, v: f64) -> f64 {
    let count = ps
        .u
        .iter()
        .zip(&ps.v)
        .filter(|&(&ui, &vi)| ui <= u && vi <= v)
        .count();
    count as f64 / ps.n() as f64
}

/// The restriction of the floored empirical copula to the curve
/// y -> (y^{1-t}, y^t): a right-continuous step function of y with heights
/// j/n, floored at n^-gamma.
#[derive(Debug, Clone)]
pub struct CurveStep {
    breakpoints: Vec<f64>,
    floor: f64,
    n: usize,
}

impl CurveStep {
    /// Sorted breakpoints z_(1) <= ... <= z_(n).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// max(#\{i: z_i <= y\}/n, n^-gamma).
    pub fn value(&self, y: f64) -> f64 {
        (self.count(y) as f64 / self.n as f64).max(self.floor)
    }

    /// #\{i: z_i <= y\}/n without the floor.
    pub fn value_unfloored(&self, y: f64) -> f64 {
        self.count(y) as f64 / self.n as f64
    }

    fn count(&self, y: f64) -> usize {
        self.breakpoints.partition_point(|&z| z <= y)
    }

    /// Maximal intervals [a, b) of constant (floored) value covering [0, 1],
    /// as `(a, b, value)` with zero-width runs skipped. The final interval is
    /// closed at 1.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        let n = self.n as f64;
        let mut out = Vec::with_capacity(self.n + 1);
        let mut a = 0.0;
        for (j, &z) in self.breakpoints.iter().enumerate() {
            if z > a {
                out.push((a, z, (j as f64 / n).max(self.floor)));
                a = z;
            }
        }
        if a < 1.0 {
            out.push((a, 1.0, 1.0));
        }
        out
    }
}

/// Breakpoint of observation (u, v) for parameter t: the smallest y with
/// u <= y^{1-t} and v <= y^t.
pub fn curve_breakpoint(u: f64, v: f64, t: f64) -> f64 {
    if t == 0.0 {
        u
    } else if t == 1.0 {
        v
    } else {
        u.powf(1.0 / (1.0 - t)).max(v.powf(1.0 / t))
    }
}

/// Step representation of the floored empirical copula along the curve for
/// parameter `t`; `gamma > 1/2` sets the floor n^-gamma.
pub fn curve_steps(ps: &PseudoSample, t: f64, gamma: f64) -> Result<CurveStep> {
    if !(gamma > 0.5) {
        return Err(Error::Config(format!("gamma must exceed 1/2, got {gamma}")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Config(format!("t must lie in [0,1], got {t}")));
    }
    let n = ps.n();
    let mut breakpoints: Vec<f64> = ps
        .u
        .iter()
        .zip(&ps.v)
        .map(|(&u, &v)| curve_breakpoint(u, v, t))
        .collect();
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(CurveStep { breakpoints, floor: (n as f64).powf(-gamma), n })
}

/// Finite-difference estimate of a copula partial derivative from the
/// empirical copula, bandwidth h = n^{-1/2}. Near the boundary the difference
/// interval is clipped to [0, 1] and normalized by its actual length; the
/// result is clamped to [0, 1].
pub fn partial_derivative_estimate(ps: &PseudoSample, which: crate::copula::Margin, u: f64, v: f64) -> f64 {
    let h = (ps.n() as f64).powf(-0.5);
    let (x, y) = match which {
        crate::copula::Margin::First => (u, v),
        crate::copula::Margin::Second => (v, u),
    };
    let lo = (x - h).max(0.0);
    let hi = (x + h).min(1.0);
    let (clo, chi) = match which {
        crate::copula::Margin::First => {
            (empirical_copula_at(ps, lo, y), empirical_copula_at(ps, hi, y))
        }
        crate::copula::Margin::Second => {
            (empirical_copula_at(ps, y, lo), empirical_copula_at(ps, y, hi))
        }
    };
    ((chi - clo) / (hi - lo)).clamp(0.0, 1.0)
}

// ceil(n u) clamped to [0, n]: the number of order statistics covered by
// quantile level u under the left-continuous generalized inverse
fn quantile_rank(n: usize, u: f64) -> u32 {
    if u <= 0.0 {
        0
    } else if u >= 1.0 {
        n as u32
    } else {
        (n as f64 * u).ceil() as u32
    }
}

/// Multiplier-weighted empirical copula
/// C*_n(u,v) = (1/n) sum_i (xi_i / mean(xi)) 1\{R_i <= ceil(nu), S_i <= ceil(nv)\},
/// the marginal-quantile composition of the weighted joint ECDF.
pub fn weighted_empirical_copula_at(ps: &PseudoSample, xi: &[f64], u: f64, v: f64) -> Result<f64> {
    let n = ps.n();
    if xi.len() != n {
        return Err(Error::Input(format!("need {n} weights, got {}", xi.len())));
    }
    let mean: f64 = xi.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let ku = quantile_rank(n, u);
    let kv = quantile_rank(n, v);
    let mut acc = 0.0;
    for i in 0..n {
        if ps.ord_u[i] <= ku && ps.ord_v[i] <= kv {
            acc += xi[i];
        }
    }
    Ok(acc / (mean * n as f64))
}

/// One multiplier-bootstrap evaluation of the approximating field
/// alpha_n(u,v) = beta_n(u,v) - d1C(u,v) beta_n(u,1) - d2C(u,v) beta_n(1,v),
/// where beta_n = sqrt(n) (C*_n - C_n) and both empirical copulas use the
/// same marginal-quantile composition (so equal weights give exactly zero).
pub fn multiplier_replicate(ps: &PseudoSample, xi: &[f64], u: f64, v: f64) -> Result<f64> {
    let n = ps.n() as f64;
    let ones = vec![1.0; ps.n()];
    let beta = |a: f64, b: f64| -> Result<f64> {
        Ok(n.sqrt()
            * (weighted_empirical_copula_at(ps, xi, a, b)?
                - weighted_empirical_copula_at(ps, &ones, a, b)?))
    };
    let b_uv = beta(u, v)?;
    let b_u1 = beta(u, 1.0)?;
    let b_1v = beta(1.0, v)?;
    let d1 = partial_derivative_estimate(ps, crate::copula::Margin::First, u, v);
    let d2 = partial_derivative_estimate(ps, crate::copula::Margin::Second, u, v);
    Ok(b_uv - d1 * b_u1 - d2 * b_1v)
}

/// Kendall's tau by Knight's O(n log n) inversion-counting algorithm
/// (tau-a; ties contribute like discordant pairs, which is immaterial for
/// the continuous samples used here).
pub fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    assert!(n >= 2);
    let mut sorted: Vec<(f64, f64)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let mut buf = ys.clone();
    let inversions = count_inversions(&mut ys, &mut buf);
    let total = n * (n - 1) / 2;
    1.0 - 4.0 * inversions as f64 / (2 * total) as f64 * 2.0 / 2.0 - 0.0
}

fn count_inversions(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = xs.split_at_mut(mid);
    let mut inv = count_inversions(left, &mut buf[..mid]) + count_inversions(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0usize, 0usize, 0usize);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            buf[k] = left[i];
            i += 1;
        } else {
            buf[k] = right[j];
            inv += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    xs.copy_from_slice(&buf[..n]);
    inv
}
