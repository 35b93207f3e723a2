//! Branch-metric distributions, their moment generating functions and the
//! computational cutoff analysis built on them.
//!
//! Metrics use the asymptotic branch metric
//! `Z = log2 P(y, δ | x) + c·log2 q1 + (c+δ)·log2 z1 − b`.
//! Along the correct path `x` is uniform and `y` is drawn through the
//! channel; along an incorrect path `x`, `δ` and `y` are independent and
//! uniform. With `M` copies the generating functions become
//! `g^(M)(σ) = 2^(σ·b·(M−1)) · g(σ)^M`.

use std::fmt;
use std::str::FromStr;

use crate::bits::unpack;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::lattice::{critical_point, expected_drift_direction, segment_log2_likelihood};

const SIGMA_LIMIT: f64 = 10.0;
const MAX_SEGMENT_BITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Correct,
    Incorrect,
}

/// One support point of a branch-metric distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricAtom {
    pub delta: i64,
    pub value: f64,
    pub prob: f64,
}

/// Distribution of the single-copy branch metric, evaluated for `copies`
/// received sequences.
#[derive(Debug, Clone)]
pub struct MetricDistribution {
    pub kind: DistributionKind,
    pub atoms: Vec<MetricAtom>,
    pub b: usize,
    pub lambda: usize,
    pub copies: usize,
}

impl MetricDistribution {
    /// Total probability mass (below one for the correct path because of the drift caps).
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    fn single_log2_mgf(&self, sigma: f64) -> f64 {
        // log-sum-exp in base 2
        let terms = self
            .atoms
            .iter()
            .filter(|a| a.prob > 0.0)
            .map(|a| a.prob.log2() + sigma * a.value);
        let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.map(|t| (t - max).exp2()).sum::<f64>().log2()
    }

    /// `log2 g^(M)(σ)`.
    pub fn log2_mgf(&self, sigma: f64) -> f64 {
        let m = self.copies as f64;
        sigma * self.b as f64 * (m - 1.0) + m * self.single_log2_mgf(sigma)
    }

    pub fn mgf(&self, sigma: f64) -> f64 {
        self.log2_mgf(sigma).exp2()
    }

    /// Mean metric per branch for `copies` sequences.
    pub fn mean(&self) -> f64 {
        let single: f64 = self.atoms.iter().map(|a| a.prob * a.value).sum::<f64>() / self.mass();
        self.b as f64 * (self.copies as f64 - 1.0) + self.copies as f64 * single
    }

    /// Smallest metric value with non-zero probability.
    pub fn min_value(&self) -> f64 {
        let single = self
            .atoms
            .iter()
            .filter(|a| a.prob > 1e-300)
            .map(|a| a.value)
            .fold(f64::INFINITY, f64::min);
        self.b as f64 * (self.copies as f64 - 1.0) + self.copies as f64 * single
    }

    /// Moment generating function of the metric conditioned on drift change
    /// `delta` (single copy).
    pub fn conditional_mgf(&self, delta: i64, sigma: f64) -> f64 {
        let sel = self.atoms.iter().filter(|a| a.delta == delta);
        let mass: f64 = sel.clone().map(|a| a.prob).sum();
        if mass == 0.0 {
            return 0.0;
        }
        sel.map(|a| a.prob * (sigma * a.value).exp2()).sum::<f64>() / mass
    }

    /// Explicit support of the `copies`-fold metric, for small cases.
    pub fn expand_copies(&self) -> Vec<(f64, f64)> {
        let mut acc: Vec<(f64, f64)> = vec![(self.b as f64 * (self.copies as f64 - 1.0), 1.0)];
        for _ in 0..self.copies {
            acc = acc
                .iter()
                .flat_map(|&(v, p)| self.atoms.iter().map(move |a| (v + a.value, p * a.prob)))
                .collect();
        }
        acc
    }
}

/// Builds the correct-path and incorrect-path metric distributions by
/// exhaustive enumeration of blocks, drift changes and received segments.
pub fn build_distributions(
    c: usize,
    b: usize,
    params: &ChannelParams,
    imax: usize,
    dmax: usize,
    copies: usize,
) -> Result<(MetricDistribution, MetricDistribution)> {
    params.validate()?;
    if copies == 0 {
        return Err(Error::Domain("at least one copy is required".into()));
    }
    if dmax > c {
        return Err(Error::InvalidConfig(format!("dmax={dmax} exceeds the block length {c}")));
    }
    if c + imax > MAX_SEGMENT_BITS || c > MAX_SEGMENT_BITS {
        return Err(Error::EnumerationTooLarge(format!(
            "segments of up to {} bits exceed the limit of {MAX_SEGMENT_BITS}",
            c + imax
        )));
    }
    let cp = critical_point(params, expected_drift_direction(params))?;
    let lambda = imax + dmax + 1;
    let mut correct = Vec::new();
    let mut incorrect = Vec::new();
    for delta in -(dmax as i64)..=imax as i64 {
        let len = (c as i64 + delta) as usize;
        let bias = c as f64 * cp.q1.log2() + len as f64 * cp.z1.log2() - b as f64;
        let uniform = (-(2 * c as i64 + delta) as f64).exp2() / lambda as f64;
        for x in 0..1u32 << c {
            let xb = unpack(x, c);
            for y in 0..1u32 << len {
                let lp = segment_log2_likelihood(params, &xb, &unpack(y, len));
                let value = lp + bias;
                if lp > f64::NEG_INFINITY {
                    correct.push(MetricAtom { delta, value, prob: (lp - c as f64).exp2() });
                }
                incorrect.push(MetricAtom { delta, value, prob: uniform });
            }
        }
    }
    let make = |kind, atoms| MetricDistribution { kind, atoms, b, lambda, copies };
    Ok((make(DistributionKind::Correct, correct), make(DistributionKind::Incorrect, incorrect)))
}

/// Minimises a convex function on `[lo, hi]` by golden-section search.
fn convex_argmin(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / 2.0
}

/// Bisection for `f(x) = 0` given `f(lo)` and `f(hi)` of opposite sign.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<(f64, usize)> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0));
    }
    if fhi == 0.0 {
        return Ok((hi, 0));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    for it in 1..=max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() <= tol || hi - lo <= f64::EPSILON * mid.abs().max(1e-300) {
            return Ok((mid, it));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// `σ0 < 0` with `g0^(M)(σ0) = 1`.
pub fn solve_sigma0(correct: &MetricDistribution) -> Result<f64> {
    let f = |s: f64| correct.log2_mgf(s);
    let argmin = convex_argmin(f, -SIGMA_LIMIT, 0.0);
    if f(argmin) >= 0.0 || f(-SIGMA_LIMIT) <= 0.0 {
        return Err(Error::NoBracket { lo: -SIGMA_LIMIT, hi: argmin });
    }
    // |g − 1| ≤ 1e−12 in the linear domain
    let (s, _) = bisect(f, -SIGMA_LIMIT, argmin, 1e-13, 400)?;
    Ok(s)
}

/// `σ1 > 0` with `g1^(M)(σ1) = target`.
pub fn solve_sigma1(incorrect: &MetricDistribution, target: f64) -> Result<f64> {
    let lt = target.log2();
    let f = |s: f64| incorrect.log2_mgf(s) - lt;
    let argmin = convex_argmin(f, 0.0, SIGMA_LIMIT);
    if f(argmin) >= 0.0 || f(0.0) <= 0.0 {
        return Err(Error::NoBracket { lo: 0.0, hi: argmin });
    }
    let (s, _) = bisect(f, 0.0, argmin, 1e-13 / target.max(1e-300), 400)?;
    Ok(s)
}

/// How Ps follows the swept probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsMode {
    /// `Ps = β·p`.
    Ratio(f64),
    /// `Ps` held constant.
    Fixed(f64),
}

impl fmt::Display for PsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsMode::Ratio(b) => write!(f, "ratio:{b}"),
            PsMode::Fixed(p) => write!(f, "fixed:{p}"),
        }
    }
}

impl FromStr for PsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `fixed:<Ps>` or `ratio:<beta>`, got `{s}`")))?;
        let v: f64 = value.trim().parse().map_err(|_| Error::Parse(format!("bad number `{value}`")))?;
        match kind.trim() {
            "fixed" => Ok(PsMode::Fixed(v)),
            "ratio" => Ok(PsMode::Ratio(v)),
            other => Err(Error::Parse(format!("unknown Ps mode `{other}`"))),
        }
    }
}

/// Right-hand side of the incorrect-path condition `g1^(M)(σ1) = 2^(−b)·λ^(−k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sigma1Target {
    /// `k = M`: one factor of `λ` per copy, matching the `2^b·λ^M` successors of a node.
    PerCopy,
    /// `k = 1` regardless of the number of copies.
    SingleLambda,
}

impl Sigma1Target {
    pub fn value(self, b: usize, lambda: usize, copies: usize) -> f64 {
        let k = match self {
            Sigma1Target::PerCopy => copies,
            Sigma1Target::SingleLambda => 1,
        };
        (-(b as f64)).exp2() / (lambda as f64).powi(k as i32)
    }
}

/// Settings of a cutoff search over `Pi = p`, `Pd = α·p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProblem {
    pub c: usize,
    pub b: usize,
    pub imax: usize,
    pub dmax: usize,
    pub alpha: f64,
    pub ps: PsMode,
    pub copies: usize,
    pub eps: f64,
    pub bracket: (f64, f64),
    pub target: Sigma1Target,
}

impl Default for CutoffProblem {
    fn default() -> Self {
        Self {
            c: 3,
            b: 1,
            imax: 3,
            dmax: 3,
            alpha: 1.0,
            ps: PsMode::Fixed(0.0),
            copies: 1,
            eps: 1e-6,
            bracket: (1e-3, 0.1),
            target: Sigma1Target::PerCopy,
        }
    }
}

impl CutoffProblem {
    pub fn channel(&self, p: f64) -> Result<ChannelParams> {
        let ps = match self.ps {
            PsMode::Ratio(beta) => beta * p,
            PsMode::Fixed(ps) => ps,
        };
        ChannelParams::new(p, self.alpha * p, ps)
    }

    pub fn distributions(&self, p: f64) -> Result<(MetricDistribution, MetricDistribution)> {
        build_distributions(self.c, self.b, &self.channel(p)?, self.imax, self.dmax, self.copies)
    }

    /// `(σ0, σ1)` at probability `p`.
    pub fn sigmas(&self, p: f64) -> Result<(f64, f64)> {
        let (correct, incorrect) = self.distributions(p)?;
        let target = self.target.value(self.b, incorrect.lambda, self.copies);
        Ok((solve_sigma0(&correct)?, solve_sigma1(&incorrect, target)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffReport {
    pub p: f64,
    pub params: ChannelParams,
    pub sigma0: f64,
    pub sigma1: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Bisection on `p` for `σ0 + σ1 = 0`.
pub fn find_cutoff_probability(problem: &CutoffProblem) -> Result<CutoffReport> {
    let f = |p: f64| problem.sigmas(p).map(|(s0, s1)| s0 + s1);
    let (lo, hi) = problem.bracket;
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut lo, mut hi, mut flo) = (lo, hi, flo);
    for it in 1..=200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() <= problem.eps || hi - lo < 1e-15 {
            let (s0, s1) = problem.sigmas(mid)?;
            return Ok(CutoffReport {
                p: mid,
                params: problem.channel(mid)?,
                sigma0: s0,
                sigma1: s1,
                iterations: it,
                residual: fm.abs(),
            });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(200))
}

/// Cutoff from the single condition `g0^(M)(−1/2) = 1`. Valid whenever the
/// asymptotic bias is `c + δ` per copy, where `σ1 = σ0 + 1` holds.
pub fn shortcut_cutoff(problem: &CutoffProblem) -> Result<CutoffReport> {
    let f = |p: f64| -> Result<f64> {
        let (correct, _) = problem.distributions(p)?;
        Ok(correct.log2_mgf(-0.5))
    };
    let (lo, hi) = problem.bracket;
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut lo, mut hi, mut flo) = (lo, hi, flo);
    for it in 1..=200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if hi - lo <= problem.eps * 1e-3 || fm == 0.0 {
            return Ok(CutoffReport {
                p: mid,
                params: problem.channel(mid)?,
                sigma0: -0.5,
                sigma1: 0.5,
                iterations: it,
                residual: fm.abs(),
            });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(200))
}

/// Constants of the average-effort bound and the bound itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityBound {
    pub sigma0: f64,
    pub sigma1: f64,
    pub mean_incorrect: f64,
    pub z_min_correct: f64,
    pub z_min_incorrect: f64,
    pub b_prime: f64,
    pub c1_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `None` when `σ0 + σ1 ≥ 0` and the bound does not exist.
    pub cav: Option<f64>,
}

/// Upper bound on the mean number of computations per decoded block, for a
/// single received copy.
pub fn complexity_bound(
    c: usize,
    b: usize,
    params: &ChannelParams,
    imax: usize,
    dmax: usize,
    delta: f64,
) -> Result<ComplexityBound> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidConfig(format!("threshold step must be positive, got {delta}")));
    }
    let (correct, incorrect) = build_distributions(c, b, params, imax, dmax, 1)?;
    let lambda = incorrect.lambda;
    let mean_incorrect = incorrect.mean();
    if mean_incorrect >= 0.0 {
        return Err(Error::Domain(format!("incorrect-path drift {mean_incorrect} is not negative")));
    }
    let s0 = solve_sigma0(&correct)?;
    let s1 = solve_sigma1(&incorrect, Sigma1Target::PerCopy.value(b, lambda, 1))?;
    let b_prime = b as f64 + (lambda as f64).log2();
    let t = (-b_prime).exp2();
    let c1_prime = t / (1.0 - t) - t * mean_incorrect / (delta * (1.0 - t).powi(2));
    let z_min_correct = correct.min_value();
    let g_delta: f64 = (-(dmax as i64)..=imax as i64).map(|d| correct.conditional_mgf(d, s1)).sum();
    let c1 = (1.0 - (-(b as f64)).exp2() + g_delta - (s1 * z_min_correct).exp2()) * c1_prime;
    let c2 = c1_prime * (s1 * z_min_correct).exp2();
    let c3 = ((-(b as f64)).exp2() - t) / (1.0 - t);
    let cav = (s0 + s1 < 0.0).then(|| {
        let p2 = |x: f64| x.exp2();
        c1 * (1.0 - p2(-s1 * delta)) * p2(-s0 * delta) / (1.0 - p2((s0 + s1) * delta))
            + c1 * p2(-s1 * delta)
            + c3 * p2(-s0 * delta) / (1.0 - p2(s0 * delta))
            + c2 * (1.0 - p2(-(s0 + s1) * delta)) * p2(-s0 * delta) / (1.0 - p2((s1 + 2.0 * s0) * delta))
            + c2 * p2(-(s0 + s1) * delta)
    });
    Ok(ComplexityBound {
        sigma0: s0,
        sigma1: s1,
        mean_incorrect,
        z_min_correct,
        z_min_incorrect: incorrect.min_value(),
        b_prime,
        c1_prime,
        c1,
        c2,
        c3,
        cav,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dists(p: f64, ps: f64, copies: usize) -> (MetricDistribution, MetricDistribution) {
        build_distributions(3, 1, &ChannelParams::new(p, p, ps).unwrap(), 3, 3, copies).unwrap()
    }

    #[test]
    fn mgf_at_zero() {
        let (g0, g1) = dists(0.01, 0.0, 1);
        assert!(g0.mgf(0.0) < 1.0 && g0.mgf(0.0) > 0.9999);
        assert_relative_eq!(g1.mgf(0.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(g1.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn truncated_mass_grows_with_caps() {
        let p = ChannelParams::new(0.05, 0.05, 0.0).unwrap();
        let small = build_distributions(3, 1, &p, 1, 1, 1).unwrap().0.mass();
        let large = build_distributions(3, 1, &p, 5, 3, 1).unwrap().0.mass();
        assert!(small < large && large <= 1.0 + 1e-12);
    }

    #[test]
    fn shifted_identity() {
        for &p in &[0.005, 0.0192, 0.04] {
            let (g0, g1) = dists(p, 0.0, 1);
            for s in [-1.0, -0.5, 0.0] {
                let lhs = g1.mgf(s + 1.0);
                let rhs = 0.5 * g0.mgf(s) / 7.0;
                assert!((lhs - rhs).abs() <= 1e-10 * rhs, "p={p}, σ={s}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn multi_copy_closed_form_matches_convolution() {
        let (g0, _) = dists(0.02, 0.0, 2);
        let support = g0.expand_copies();
        for s in [-0.7, -0.2, 0.3] {
            let direct: f64 = support.iter().map(|&(v, p)| p * (s * v).exp2()).sum();
            assert_relative_eq!(g0.mgf(s), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn mgf_is_convex() {
        let (g0, g1) = dists(0.02, 0.01, 1);
        for d in [&g0, &g1] {
            let grid: Vec<f64> = (0..=60).map(|k| -3.0 + 0.1 * k as f64).collect();
            for w in grid.windows(3) {
                let (a, b, c) = (d.mgf(w[0]), d.mgf(w[1]), d.mgf(w[2]));
                assert!(a + c - 2.0 * b >= -1e-12 * b);
            }
        }
    }

    #[test]
    fn sigma_roots_satisfy_their_equations() {
        let (g0, g1) = dists(0.015, 0.0, 1);
        let s0 = solve_sigma0(&g0).unwrap();
        let target = 0.5 / 7.0;
        let s1 = solve_sigma1(&g1, target).unwrap();
        assert!(s0 < 0.0 && s0 > -10.0 && s1 > 0.0 && s1 < 10.0);
        assert!((g0.mgf(s0) - 1.0).abs() <= 1e-12);
        assert!((g1.mgf(s1) - target).abs() <= 1e-12);
        assert!((s1 - s0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sigma_identity_across_range() {
        for &p in &[0.003, 0.01, 0.03, 0.06, 0.1] {
            let problem = CutoffProblem::default();
            let (s0, s1) = problem.sigmas(p).unwrap();
            assert!((s1 - s0 - 1.0).abs() < 1e-8, "p={p}: {s0} {s1}");
        }
    }

    #[test]
    fn ps_mode_parsing() {
        assert_eq!("fixed:0.02".parse::<PsMode>().unwrap(), PsMode::Fixed(0.02));
        assert_eq!("ratio:0.5".parse::<PsMode>().unwrap(), PsMode::Ratio(0.5));
        assert!("0.02".parse::<PsMode>().is_err());
        assert!("other:1".parse::<PsMode>().is_err());
        assert_eq!(PsMode::Fixed(0.02).to_string(), "fixed:0.02");
    }

    #[test]
    fn single_copy_cutoff() {
        let r = find_cutoff_probability(&CutoffProblem::default()).unwrap();
        assert!((r.p - 0.0192).abs() < 5e-4, "{r:?}");
        assert!((r.sigma0 + 0.5).abs() < 1e-3 && (r.sigma1 - 0.5).abs() < 1e-3);
    }

    #[test]
    fn bracket_without_sign_change() {
        let problem = CutoffProblem { bracket: (0.03, 0.05), ..CutoffProblem::default() };
        assert!(matches!(find_cutoff_probability(&problem), Err(Error::NoBracket { .. })));
    }

    #[test]
    fn c3_formula() {
        let p = ChannelParams::new(0.005, 0.005, 0.0).unwrap();
        let bound = complexity_bound(3, 1, &p, 3, 3, 4.0).unwrap();
        let bp = 1.0 + 7f64.log2();
        assert_relative_eq!(bound.c3, (0.5 - (-bp).exp2()) / (1.0 - (-bp).exp2()), max_relative = 1e-14);
        assert!(bound.cav.unwrap() > 0.0);
        assert!(bound.mean_incorrect < 0.0);
    }

    #[test]
    fn unbounded_above_cutoff() {
        let p = ChannelParams::new(0.03, 0.03, 0.0).unwrap();
        let bound = complexity_bound(3, 1, &p, 3, 3, 4.0).unwrap();
        assert!(bound.sigma0 + bound.sigma1 > 0.0);
        assert!(bound.cav.is_none());
    }

    #[test]
    fn enumeration_cap() {
        let p = ChannelParams::new(0.01, 0.01, 0.0).unwrap();
        assert!(matches!(build_distributions(10, 1, &p, 6, 3, 1), Err(Error::EnumerationTooLarge(_))));
    }
}
