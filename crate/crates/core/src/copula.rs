//! Parametric copula families: CDFs, partial derivatives, Pickands dependence
//! functions for the extreme-value families, Kendall-tau calibration, and
//! samplers.
//!
//! Every family implemented here is positive quadrant dependent (C >= uv);
//! parameter validation at construction enforces the ranges that guarantee
//! it, so downstream code can rely on `log C(u,v) >= log(uv)`.

use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::special::{norm_cdf, norm_quantile, t4_cdf, t4_quantile, t5_cdf};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::Serialize;

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Pickands dependence function of an extreme-value copula, with the closed
/// form of its derivative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PickandsFunction {
    /// A(t) = 1 (independence).
    ConstantOne,
    /// A(t) = (t^theta + (1-t)^theta)^(1/theta), theta >= 1.
    Gumbel { theta: f64 },
    /// A(t) = 1 - theta t + theta t^2, theta in [0, 1].
    Mixed { theta: f64 },
    /// A(t) = 1 - ((psi1 (1-t))^-theta + (psi2 t)^-theta)^(-1/theta).
    AsyNegLogistic { psi1: f64, psi2: f64, theta: f64 },
    /// A(t) = (1-t) Phi(theta + log((1-t)/t)/(2 theta)) + t Phi(theta + log(t/(1-t))/(2 theta)).
    HueslerReiss { theta: f64 },
}

impl PickandsFunction {
    /// A(t) for t in [0, 1]; endpoints return exactly 1.
    pub fn value(&self, t: f64) -> f64 {
        assert!((0.0..=1.0).contains(&t), "pickands argument outside [0,1]");
        if t == 0.0 || t == 1.0 {
            return 1.0;
        }
        match *self {
            Self::ConstantOne => 1.0,
            Self::Gumbel { theta } => (t.powf(theta) + (1.0 - t).powf(theta)).powf(1.0 / theta),
            Self::Mixed { theta } => 1.0 - theta * t + theta * t * t,
            Self::AsyNegLogistic { psi1, psi2, theta } => {
                // log-sum-exp keeps (psi t)^-theta from overflowing near the ends
                let la = -(psi1 * (1.0 - t)).ln();
                let lb = -(psi2 * t).ln();
                let (m, r) = if la > lb { (la, lb) } else { (lb, la) };
                let log_s = theta * m + (1.0 + (theta * (r - m)).exp()).ln();
                1.0 - (-log_s / theta).exp()
            }
            Self::HueslerReiss { theta } => {
                let g1 = theta + ((1.0 - t) / t).ln() / (2.0 * theta);
                let g2 = theta + (t / (1.0 - t)).ln() / (2.0 * theta);
                (1.0 - t) * norm_cdf(g1) + t * norm_cdf(g2)
            }
        }
    }

    /// Derivative A'(t) for t in (0, 1).
    pub fn derivative(&self, t: f64) -> f64 {
        assert!(t > 0.0 && t < 1.0, "pickands derivative needs t in (0,1)");
        match *self {
            Self::ConstantOne => 0.0,
            Self::Gumbel { theta } => {
                let s = t.powf(theta) + (1.0 - t).powf(theta);
                s.powf(1.0 / theta - 1.0) * (t.powf(theta - 1.0) - (1.0 - t).powf(theta - 1.0))
            }
            Self::Mixed { theta } => theta * (2.0 * t - 1.0),
            Self::AsyNegLogistic { psi1, psi2, theta } => {
                let la = -(psi1 * (1.0 - t)).ln();
                let lb = -(psi2 * t).ln();
                let (m, r) = if la > lb { (la, lb) } else { (lb, la) };
                let log_s = theta * m + (1.0 + (theta * (r - m)).exp()).ln();
                // S^(-1/theta-1) * (psi1 (psi1(1-t))^(-theta-1) - psi2 (psi2 t)^(-theta-1)),
                // assembled in log space; both exponents are <= 0.
                let e1 = (theta + 1.0) * (la - log_s / theta);
                let e2 = (theta + 1.0) * (lb - log_s / theta);
                psi1 * e1.exp() - psi2 * e2.exp()
            }
            Self::HueslerReiss { theta } => {
                // the density terms cancel: (1-t) phi(g1) = t phi(g2)
                let g1 = theta + ((1.0 - t) / t).ln() / (2.0 * theta);
                let g2 = theta + (t / (1.0 - t)).ln() / (2.0 * theta);
                norm_cdf(g2) - norm_cdf(g1)
            }
        }
    }

    /// mu(t) = A(t) - t A'(t), the first-margin partial factor.
    pub fn mu(&self, t: f64) -> f64 {
        self.value(t) - t * self.derivative(t)
    }

    /// nu(t) = A(t) + (1-t) A'(t), the second-margin partial factor.
    pub fn nu(&self, t: f64) -> f64 {
        self.value(t) + (1.0 - t) * self.derivative(t)
    }
}

/// Which argument of the copula a partial derivative is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    First,
    Second,
}

/// A parametric bivariate copula.
///
/// Construct through the checked constructors (or [`CopulaSpec::from_name`]);
/// parameter ranges are validated once so evaluation never fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CopulaSpec {
    Independence,
    Gumbel { theta: f64 },
    Mixed { theta: f64 },
    AsyNegLogistic { psi1: f64, psi2: f64, theta: f64 },
    HueslerReiss { theta: f64 },
    Clayton { theta: f64 },
    Frank { theta: f64 },
    Gaussian { rho: f64 },
    StudentT4 { rho: f64 },
    ConvexMix { weight: f64, first: Box<CopulaSpec>, second: Box<CopulaSpec> },
    ShuffleCounterexample,
}

impl CopulaSpec {
    pub fn independence() -> Self {
        Self::Independence
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta >= 1.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("Gumbel requires theta >= 1, got {theta}")));
        }
        Ok(Self::Gumbel { theta })
    }

    pub fn mixed(theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Domain(format!("Mixed requires theta in [0,1], got {theta}")));
        }
        Ok(Self::Mixed { theta })
    }

    pub fn asy_neg_logistic(psi1: f64, psi2: f64, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("AsyNegLogistic requires theta > 0, got {theta}")));
        }
        for (name, psi) in [("psi1", psi1), ("psi2", psi2)] {
            if !(psi > 0.0 && psi <= 1.0) {
                return Err(Error::Domain(format!(
                    "AsyNegLogistic requires {name} in (0,1], got {psi}"
                )));
            }
        }
        Ok(Self::AsyNegLogistic { psi1, psi2, theta })
    }

    pub fn huesler_reiss(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("HueslerReiss requires theta > 0, got {theta}")));
        }
        Ok(Self::HueslerReiss { theta })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("Clayton requires theta > 0, got {theta}")));
        }
        Ok(Self::Clayton { theta })
    }

    pub fn frank(theta: f64) -> Result<Self> {
        // positive quadrant dependence restricts Frank to theta > 0
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("Frank requires theta > 0, got {theta}")));
        }
        Ok(Self::Frank { theta })
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!("Gaussian requires rho in [0,1], got {rho}")));
        }
        Ok(Self::Gaussian { rho })
    }

    pub fn student_t4(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!("StudentT4 requires rho in [0,1], got {rho}")));
        }
        Ok(Self::StudentT4 { rho })
    }

    pub fn convex_mix(weight: f64, first: CopulaSpec, second: CopulaSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Domain(format!("mix weight must lie in [0,1], got {weight}")));
        }
        Ok(Self::ConvexMix { weight, first: Box::new(first), second: Box::new(second) })
    }

    pub fn shuffle_counterexample() -> Self {
        Self::ShuffleCounterexample
    }

    /// Pickands dependence function, for the extreme-value families.
    pub fn pickands(&self) -> Option<PickandsFunction> {
        match *self {
            Self::Independence => Some(PickandsFunction::ConstantOne),
            Self::Gumbel { theta } => Some(PickandsFunction::Gumbel { theta }),
            Self::Mixed { theta } => Some(PickandsFunction::Mixed { theta }),
            Self::AsyNegLogistic { psi1, psi2, theta } => {
                Some(PickandsFunction::AsyNegLogistic { psi1, psi2, theta })
            }
            Self::HueslerReiss { theta } => Some(PickandsFunction::HueslerReiss { theta }),
            _ => None,
        }
    }

    pub fn is_extreme_value(&self) -> bool {
        self.pickands().is_some()
    }

    /// C(u, v) on [0, 1]^2.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v));
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v;
        }
        if v >= 1.0 {
            return u;
        }
        match *self {
            Self::Independence => u * v,
            Self::Gumbel { .. }
            | Self::Mixed { .. }
            | Self::AsyNegLogistic { .. }
            | Self::HueslerReiss { .. } => {
                let a = self.pickands().expect("extreme-value family");
                let ell = u.ln() + v.ln();
                let t = v.ln() / ell;
                (ell * a.value(t)).exp()
            }
            Self::Clayton { theta } => {
                (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-1.0 / theta)
            }
            Self::Frank { theta } => {
                let e = (-theta).exp_m1();
                -(1.0 + (-theta * u).exp_m1() * (-theta * v).exp_m1() / e).ln() / theta
            }
            Self::Gaussian { rho } => {
                elliptical_cdf(u, v, rho, |p, y| gaussian_conditional(norm_quantile(p), y, rho))
            }
            Self::StudentT4 { rho } => {
                elliptical_cdf(u, v, rho, |p, y| t4_conditional(t4_quantile(p), y, rho))
            }
            Self::ConvexMix { weight, ref first, ref second } => {
                weight * first.cdf(u, v) + (1.0 - weight) * second.cdf(u, v)
            }
            Self::ShuffleCounterexample => shuffle_cdf(u, v),
        }
    }

    /// Partial derivative of the copula in the chosen margin. Closed form
    /// everywhere except the shuffle, which falls back to a central finite
    /// difference. The differentiated coordinate must be interior.
    pub fn partial(&self, which: Margin, u: f64, v: f64) -> Result<f64> {
        let (diff, other) = match which {
            Margin::First => (u, v),
            Margin::Second => (v, u),
        };
        if !(diff > 0.0 && diff < 1.0) {
            return Err(Error::Boundary(format!(
                "partial derivative undefined at differentiated coordinate {diff}"
            )));
        }
        if !(0.0..=1.0).contains(&other) {
            return Err(Error::Domain(format!("coordinate {other} outside [0,1]")));
        }
        if other == 0.0 {
            return Ok(0.0);
        }
        if other == 1.0 {
            return Ok(1.0);
        }
        Ok(self.partial_inner(which, u, v))
    }

    // partial in `which` at interior (u, v), original coordinate order
    fn partial_inner(&self, which: Margin, u: f64, v: f64) -> f64 {
        // all non-EV families here are exchangeable; reduce Second to First
        let sym = |x: f64, y: f64| -> (f64, f64) {
            match which {
                Margin::First => (x, y),
                Margin::Second => (y, x),
            }
        };
        match *self {
            Self::Independence => sym(u, v).1,
            Self::Gumbel { .. }
            | Self::Mixed { .. }
            | Self::AsyNegLogistic { .. }
            | Self::HueslerReiss { .. } => {
                let a = self.pickands().expect("extreme-value family");
                // d1 C = (C/u) mu(t), d2 C = (C/v) nu(t) with t = log v / log uv
                let ell = u.ln() + v.ln();
                let t = v.ln() / ell;
                let c = (ell * a.value(t)).exp();
                match which {
                    Margin::First => (c / u) * a.mu(t),
                    Margin::Second => (c / v) * a.nu(t),
                }
            }
            Self::Clayton { theta } => {
                let (x, y) = sym(u, v);
                let s = x.powf(-theta) + y.powf(-theta) - 1.0;
                x.powf(-theta - 1.0) * s.powf(-1.0 / theta - 1.0)
            }
            Self::Frank { theta } => {
                let (x, y) = sym(u, v);
                let ex = (-theta * x).exp();
                let num = ex * (-theta * y).exp_m1();
                let den = (-theta).exp_m1() + (-theta * x).exp_m1() * (-theta * y).exp_m1();
                num / den
            }
            Self::Gaussian { rho } => {
                let (x, y) = sym(u, v);
                gaussian_conditional(norm_quantile(x), y, rho)
            }
            Self::StudentT4 { rho } => {
                let (x, y) = sym(u, v);
                t4_conditional(t4_quantile(x), y, rho)
            }
            Self::ConvexMix { weight, ref first, ref second } => {
                weight * first.partial_inner(which, u, v)
                    + (1.0 - weight) * second.partial_inner(which, u, v)
            }
            Self::ShuffleCounterexample => {
                let (x, y) = sym(u, v);
                let h = 1e-6_f64.min(0.5 * x.min(1.0 - x));
                let (a, b) = (shuffle_cdf(x - h, y), shuffle_cdf(x + h, y));
                ((b - a) / (2.0 * h)).clamp(0.0, 1.0)
            }
        }
    }

    /// Upper tail-dependence coefficient 2(1 - A(1/2)) of an extreme-value
    /// family.
    pub fn tail_dependence(&self) -> Result<f64> {
        match self.pickands() {
            Some(a) => Ok(2.0 * (1.0 - a.value(0.5))),
            None => Err(Error::Unsupported(
                "tail dependence via Pickands function needs an extreme-value family".into(),
            )),
        }
    }

    /// Draws `n` pairs with this copula and uniform margins; bit-reproducible
    /// for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<(f64, f64)> {
        assert!(n >= 1);
        let mut rng = rng::stream(seed, 0);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.draw(&mut rng));
        }
        out
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            Self::Independence => (rng::uniform_open01(rng), rng::uniform_open01(rng)),
            Self::Clayton { theta } => {
                let u = rng::uniform_open01(rng);
                let w = rng::uniform_open01(rng);
                // conditional quantile of V given U = u
                let v = (1.0 + u.powf(-theta) * (w.powf(-theta / (1.0 + theta)) - 1.0))
                    .powf(-1.0 / theta);
                (u, v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
            }
            Self::Frank { theta } => {
                let u = rng::uniform_open01(rng);
                let w = rng::uniform_open01(rng);
                let a = (-theta * u).exp();
                let v = -(1.0 + w * (-theta).exp_m1() / (w + a * (1.0 - w))).ln() / theta;
                (u, v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
            }
            Self::Gaussian { rho } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let x2 = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
                (norm_cdf(z1), norm_cdf(x2))
            }
            Self::StudentT4 { rho } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let x2 = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
                let chi = ChiSquared::new(4.0).expect("valid dof").sample(rng);
                let scale = (4.0 / chi.max(1e-300)).sqrt();
                (t4_cdf(z1 * scale), t4_cdf(x2 * scale))
            }
            Self::ConvexMix { weight, ref first, ref second } => {
                if rng::uniform_open01(rng) < weight {
                    first.draw(rng)
                } else {
                    second.draw(rng)
                }
            }
            // conditional-distribution method: solve d1C(u, v) = w for v
            _ => {
                let u = rng::uniform_open01(rng);
                let w = rng::uniform_open01(rng);
                (u, self.conditional_quantile(u, w))
            }
        }
    }

    // Bisection on v -> d1C(u, v), which is a conditional CDF and hence
    // nondecreasing from 0 to 1. Tolerance 1e-10 on v.
    fn conditional_quantile(&self, u: f64, w: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            let p = self.partial_inner(Margin::First, u, mid);
            if p < w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
    }

    /// Parses the CLI/config model syntax, e.g. `gumbel:2`, `clayton:2`,
    /// `asy-neg-log:1:0.667:2.72`, `mix:0.5:clayton:2:gumbel:1.71`.
    pub fn from_name(name: &str) -> Result<Self> {
        let mut parts = name.split(':');
        let spec = Self::parse_parts(&mut parts, name)?;
        if parts.next().is_some() {
            return Err(Error::Input(format!("trailing arguments in model '{name}'")));
        }
        Ok(spec)
    }

    fn parse_parts<'a, I: Iterator<Item = &'a str>>(parts: &mut I, full: &str) -> Result<Self> {
        let family = parts
            .next()
            .ok_or_else(|| Error::Input(format!("empty model spec '{full}'")))?;
        let mut num = |what: &str| -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Input(format!("model '{full}': missing {what}")))?
                .parse::<f64>()
                .map_err(|e| Error::Input(format!("model '{full}': bad {what}: {e}")))
        };
        match family {
            "independence" => Ok(Self::Independence),
            "gumbel" => Self::gumbel(num("theta")?),
            "mixed" => Self::mixed(num("theta")?),
            "asy-neg-log" => {
                let psi1 = num("psi1")?;
                let psi2 = num("psi2")?;
                let theta = num("theta")?;
                Self::asy_neg_logistic(psi1, psi2, theta)
            }
            "huesler-reiss" => Self::huesler_reiss(num("theta")?),
            "clayton" => Self::clayton(num("theta")?),
            "frank" => Self::frank(num("theta")?),
            "gaussian" => Self::gaussian(num("rho")?),
            "t4" => Self::student_t4(num("rho")?),
            "shuffle-ce" => Ok(Self::ShuffleCounterexample),
            "mix" => {
                let weight = num("weight")?;
                let first = Self::parse_parts(parts, full)?;
                let second = Self::parse_parts(parts, full)?;
                Self::convex_mix(weight, first, second)
            }
            other => Err(Error::Input(format!("unknown copula family '{other}'"))),
        }
    }

    /// Canonical CLI name of the spec.
    pub fn name(&self) -> String {
        match self {
            Self::Independence => "independence".into(),
            Self::Gumbel { theta } => format!("gumbel:{theta}"),
            Self::Mixed { theta } => format!("mixed:{theta}"),
            Self::AsyNegLogistic { psi1, psi2, theta } => {
                format!("asy-neg-log:{psi1}:{psi2}:{theta}")
            }
            Self::HueslerReiss { theta } => format!("huesler-reiss:{theta}"),
            Self::Clayton { theta } => format!("clayton:{theta}"),
            Self::Frank { theta } => format!("frank:{theta}"),
            Self::Gaussian { rho } => format!("gaussian:{rho}"),
            Self::StudentT4 { rho } => format!("t4:{rho}"),
            Self::ConvexMix { weight, first, second } => {
                format!("mix:{weight}:{}:{}", first.name(), second.name())
            }
            Self::ShuffleCounterexample => "shuffle-ce".into(),
        }
    }
}

/// Copula families addressable in [`param_from_tau`] and
/// [`param_from_tail_dependence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Gumbel,
    Mixed,
    AsyNegLogistic,
    HueslerReiss,
    Clayton,
    Frank,
    Gaussian,
    StudentT4,
}

/// Parameter giving Kendall's tau for the family.
///
/// Clayton inverts tau = theta/(theta+2); Gaussian and t4 use
/// rho = sin(pi tau / 2); Gumbel inverts tau = 1 - 1/theta; Frank solves the
/// Debye-function relation numerically.
pub fn param_from_tau(family: Family, tau: f64) -> Result<f64> {
    match family {
        Family::Clayton => {
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::Domain(format!("Clayton tau must lie in (0,1), got {tau}")));
            }
            Ok(2.0 * tau / (1.0 - tau))
        }
        Family::Gaussian | Family::StudentT4 => {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::Domain(format!("tau must lie in [0,1], got {tau}")));
            }
            Ok((std::f64::consts::FRAC_PI_2 * tau).sin())
        }
        Family::Gumbel => {
            if !(0.0..1.0).contains(&tau) {
                return Err(Error::Domain(format!("Gumbel tau must lie in [0,1), got {tau}")));
            }
            Ok(1.0 / (1.0 - tau))
        }
        Family::Frank => {
            if !(tau > 0.0 && tau < 0.99) {
                return Err(Error::Domain(format!(
                    "Frank tau must lie in (0,0.99), got {tau}"
                )));
            }
            let f = |theta: f64| frank_tau(theta) - tau;
            Ok(bisect_increasing(f, 1e-8, 700.0))
        }
        _ => Err(Error::Unsupported(
            "tau calibration implemented for Clayton, Frank, Gaussian, t4, Gumbel".into(),
        )),
    }
}

/// Kendall's tau of the Frank copula via the first Debye function.
pub fn frank_tau(theta: f64) -> f64 {
    1.0 - 4.0 / theta * (1.0 - crate::special::debye1(theta))
}

/// Parameter of an extreme-value family with upper tail dependence
/// rho = 2(1 - A(1/2)). The asymmetric negative logistic model is the paper
/// instance psi1 = 1, psi2 = 2/3.
pub fn param_from_tail_dependence(family: Family, rho: f64) -> Result<f64> {
    match family {
        Family::Gumbel => {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::Domain(format!("Gumbel rho must lie in [0,1), got {rho}")));
            }
            Ok(std::f64::consts::LN_2 / (2.0 - rho).ln())
        }
        Family::Mixed => {
            if !(0.0..=0.5).contains(&rho) {
                return Err(Error::Domain(format!("Mixed rho must lie in [0,0.5], got {rho}")));
            }
            Ok(2.0 * rho)
        }
        Family::HueslerReiss => {
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Domain(format!(
                    "HueslerReiss rho must lie in (0,1), got {rho}"
                )));
            }
            Ok(-norm_quantile(rho / 2.0))
        }
        Family::AsyNegLogistic => {
            if !(rho > 0.0 && rho < 2.0 / 3.0) {
                return Err(Error::Domain(format!(
                    "asymmetric negative logistic rho must lie in (0,2/3), got {rho}"
                )));
            }
            // 2 (3^theta + 2^theta)^(-1/theta) = rho
            let f = |theta: f64| {
                2.0 * (-(3f64.powf(theta) + 2f64.powf(theta)).ln() / theta).exp() - rho
            };
            Ok(bisect_increasing(f, 1e-6, 200.0))
        }
        _ => Err(Error::Unsupported(
            "tail-dependence calibration needs an extreme-value family".into(),
        )),
    }
}

fn bisect_increasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// conditional CDF of the Gaussian copula given the first margin's normal
// score x: P(V <= v | X = x)
fn gaussian_conditional(x: f64, v: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    norm_cdf((norm_quantile(v) - rho * x) / s)
}

// conditional CDF of the t4 copula given the first margin's t score x
fn t4_conditional(x: f64, v: f64, rho: f64) -> f64 {
    let y = t4_quantile(v);
    let scale = (5.0 / ((1.0 - rho * rho) * (4.0 + x * x))).sqrt();
    t5_cdf((y - rho * x) * scale)
}

// C(u,v) = Int_0^u P(V <= v | first margin at quantile level p) dp by
// adaptive quadrature; relative target 1e-10.
fn elliptical_cdf<F: Fn(f64, f64) -> f64>(u: f64, v: f64, rho: f64, cond: F) -> f64 {
    if rho == 0.0 {
        return u * v;
    }
    if rho == 1.0 {
        return u.min(v);
    }
    let f = |p: f64| cond(p, v);
    quad::adaptive(&f, 0.0, u, 1e-14, 1e-10).value.clamp(0.0, u.min(v))
}

// the shuffle of min with cut at sqrt(1/2); its best approximation fails to
// be convex
fn shuffle_cdf(u: f64, v: f64) -> f64 {
    let s = SQRT_HALF;
    if u <= s && v <= s {
        u.min(v).min(0.5)
    } else if u <= s {
        u.min(v + 0.5 - s)
    } else if v <= s {
        v.min(u + 0.5 - s)
    } else {
        u.min(v).min(u + v + 0.5 - 2.0 * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ev_families() -> Vec<CopulaSpec> {
        vec![
            CopulaSpec::Independence,
            CopulaSpec::gumbel(2.0).unwrap(),
            CopulaSpec::gumbel(1.0).unwrap(),
            CopulaSpec::mixed(0.8).unwrap(),
            CopulaSpec::asy_neg_logistic(1.0, 2.0 / 3.0, 2.7201936179589758).unwrap(),
            CopulaSpec::huesler_reiss(1.0).unwrap(),
        ]
    }

    fn all_families() -> Vec<CopulaSpec> {
        let mut v = ev_families();
        v.push(CopulaSpec::clayton(2.0).unwrap());
        v.push(CopulaSpec::frank(5.736282707019971).unwrap());
        v.push(CopulaSpec::gaussian(SQRT_HALF).unwrap());
        v.push(CopulaSpec::student_t4(SQRT_HALF).unwrap());
        v.push(
            CopulaSpec::convex_mix(
                0.5,
                CopulaSpec::clayton(2.0).unwrap(),
                CopulaSpec::gumbel(std::f64::consts::LN_2 / 1.5f64.ln()).unwrap(),
            )
            .unwrap(),
        );
        v.push(CopulaSpec::ShuffleCounterexample);
        v
    }

    #[test]
    fn pickands_closed_forms() {
        let g1 = PickandsFunction::Gumbel { theta: 1.0 };
        for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert_abs_diff_eq!(g1.value(t), 1.0, epsilon = 1e-15);
        }
        let g2 = PickandsFunction::Gumbel { theta: 2.0 };
        assert_abs_diff_eq!(g2.value(0.5), 0.5f64.sqrt(), epsilon = 1e-15);
        let m = PickandsFunction::Mixed { theta: 0.8 };
        assert_abs_diff_eq!(m.value(0.5), 0.8, epsilon = 1e-15);
    }

    #[test]
    fn pickands_bounds_and_convexity_on_grid() {
        for c in ev_families() {
            let a = c.pickands().unwrap();
            assert_eq!(a.value(0.0), 1.0);
            assert_eq!(a.value(1.0), 1.0);
            let grid: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
            let vals: Vec<f64> = grid.iter().map(|&t| a.value(t)).collect();
            for (i, (&t, &v)) in grid.iter().zip(&vals).enumerate() {
                assert!(v <= 1.0 + 1e-12 && v >= t.max(1.0 - t) - 1e-12, "{c:?} t={t} v={v}");
                if i > 0 && i + 1 < grid.len() {
                    assert!(
                        vals[i - 1] + vals[i + 1] - 2.0 * v >= -1e-10,
                        "convexity fails for {c:?} at t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn pickands_derivative_matches_finite_difference() {
        for c in ev_families() {
            let a = c.pickands().unwrap();
            for i in 1..20 {
                let t = i as f64 / 20.0;
                let h = 1e-6;
                let fd = (a.value(t + h) - a.value(t - h)) / (2.0 * h);
                assert_abs_diff_eq!(a.derivative(t), fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn cdf_closed_values() {
        assert_abs_diff_eq!(CopulaSpec::Independence.cdf(0.3, 0.6), 0.18, epsilon = 1e-15);
        let clayton = CopulaSpec::clayton(2.0).unwrap();
        assert_abs_diff_eq!(clayton.cdf(0.5, 0.5), 7f64.powf(-0.5), epsilon = 1e-14);
        // first branch of the shuffle: (0.5, 0.5) is inside [0, sqrt(1/2)]^2
        assert_abs_diff_eq!(
            CopulaSpec::ShuffleCounterexample.cdf(0.5, 0.5),
            0.5,
            epsilon = 1e-15
        );
        // fourth branch, where the plane piece is active
        let s = SQRT_HALF;
        assert_abs_diff_eq!(
            CopulaSpec::ShuffleCounterexample.cdf(0.75, 0.75),
            1.5 + 0.5 - 2.0 * s,
            epsilon = 1e-15
        );
    }

    #[test]
    fn uniform_margins_on_grid() {
        for c in all_families() {
            let tol = match c {
                CopulaSpec::Gaussian { .. } | CopulaSpec::StudentT4 { .. } => 1e-6,
                _ => 1e-12,
            };
            for i in 1..20 {
                let u = i as f64 / 20.0;
                assert!((c.cdf(u, 1.0) - u).abs() <= tol, "{c:?} C(u,1) != u at {u}");
                assert!((c.cdf(1.0, u) - u).abs() <= tol, "{c:?} C(1,v) != v at {u}");
                assert_eq!(c.cdf(u, 0.0), 0.0);
                assert_eq!(c.cdf(0.0, u), 0.0);
            }
        }
    }

    #[test]
    fn two_increasing_and_pqd_on_grid() {
        let m = 50;
        for c in all_families() {
            let grid: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let mut vals = vec![vec![0.0; m + 1]; m + 1];
            for (i, &u) in grid.iter().enumerate() {
                for (j, &v) in grid.iter().enumerate() {
                    vals[i][j] = c.cdf(u, v);
                    assert!(
                        vals[i][j] >= u * v - 1e-9,
                        "{c:?} not PQD at ({u},{v}): {} < {}",
                        vals[i][j],
                        u * v
                    );
                    assert!(vals[i][j] <= u.min(v) + 1e-12);
                }
            }
            for i in 1..=m {
                for j in 1..=m {
                    let vol = vals[i][j] - vals[i - 1][j] - vals[i][j - 1] + vals[i - 1][j - 1];
                    assert!(vol >= -1e-9, "{c:?} rectangle volume {vol} < 0 at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn extreme_value_curve_roundtrip() {
        // C(y^{1-t}, y^t) = y^{A(t)} exactly for the EV families
        for c in ev_families() {
            let a = c.pickands().unwrap();
            for iy in 1..10 {
                let y = iy as f64 / 10.0;
                for it in 0..=10 {
                    let t = it as f64 / 10.0;
                    let lhs = c.cdf(y.powf(1.0 - t), y.powf(t));
                    let rhs = y.powf(a.value(t));
                    assert!((lhs - rhs).abs() <= 1e-12, "{c:?} y={y} t={t}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        for c in all_families() {
            if matches!(c, CopulaSpec::ShuffleCounterexample) {
                continue; // partial is itself a finite difference there
            }
            for &(u, v) in &[(0.3, 0.7), (0.5, 0.5), (0.9, 0.2), (0.12, 0.95)] {
                let h = 1e-6;
                let fd1 = (c.cdf(u + h, v) - c.cdf(u - h, v)) / (2.0 * h);
                let fd2 = (c.cdf(u, v + h) - c.cdf(u, v - h)) / (2.0 * h);
                let p1 = c.partial(Margin::First, u, v).unwrap();
                let p2 = c.partial(Margin::Second, u, v).unwrap();
                assert!((p1 - fd1).abs() < 5e-5, "{c:?} d1 at ({u},{v}): {p1} vs {fd1}");
                assert!((p2 - fd2).abs() < 5e-5, "{c:?} d2 at ({u},{v}): {p2} vs {fd2}");
            }
        }
    }

    #[test]
    fn gumbel_partial_on_curve() {
        // d1 C(y^{1-t}, y^t) = mu(t) y^{A(t)-(1-t)} at y = e^{-2}, t = 1/2,
        // confirmed against the central finite-difference oracle
        let c = CopulaSpec::gumbel(2.0).unwrap();
        let u = (-1.0f64).exp();
        let p = c.partial(Margin::First, u, u).unwrap();
        let h = 1e-6;
        let fd = (c.cdf(u + h, u) - c.cdf(u - h, u)) / (2.0 * h);
        assert_abs_diff_eq!(p, fd, epsilon = 1e-9);
        let mu = 0.5f64.sqrt();
        let closed = mu * (1.0 - 2.0f64.sqrt()).exp();
        assert_abs_diff_eq!(p, closed, epsilon = 1e-14);
    }

    #[test]
    fn partial_is_a_conditional_cdf() {
        for c in all_families() {
            for i in 1..20 {
                for j in 1..20 {
                    let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                    let p = c.partial(Margin::First, u, v).unwrap();
                    assert!((-1e-12..=1.0 + 1e-12).contains(&p), "{c:?} d1 = {p} at ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn partial_boundary_errors() {
        let c = CopulaSpec::gumbel(2.0).unwrap();
        assert!(matches!(c.partial(Margin::First, 0.0, 0.5), Err(Error::Boundary(_))));
        assert!(matches!(c.partial(Margin::First, 1.0, 0.5), Err(Error::Boundary(_))));
        assert!(matches!(c.partial(Margin::Second, 0.5, 1.0), Err(Error::Boundary(_))));
    }

    #[test]
    fn tail_dependence_values() {
        assert_abs_diff_eq!(
            CopulaSpec::gumbel(1.0).unwrap().tail_dependence().unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            CopulaSpec::gumbel(2.0).unwrap().tail_dependence().unwrap(),
            2.0 - 2f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            CopulaSpec::mixed(1.0).unwrap().tail_dependence().unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(CopulaSpec::clayton(2.0).unwrap().tail_dependence().is_err());
    }

    #[test]
    fn tau_calibration() {
        assert_abs_diff_eq!(param_from_tau(Family::Clayton, 0.5).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            param_from_tau(Family::Gaussian, 0.5).unwrap(),
            SQRT_HALF,
            epsilon = 1e-12
        );
        assert!(param_from_tau(Family::Clayton, 0.0).is_err());
        // mpmath: theta solving the Debye relation for tau = 1/2
        assert_abs_diff_eq!(
            param_from_tau(Family::Frank, 0.5).unwrap(),
            5.736282707019971,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(frank_tau(5.736), 0.49998444394399091864, epsilon = 1e-10);
    }

    #[test]
    fn tail_dependence_calibration() {
        assert_abs_diff_eq!(
            param_from_tail_dependence(Family::Gumbel, 0.5).unwrap(),
            1.709511291351454777,
            epsilon = 1e-12
        );
        let th = param_from_tail_dependence(Family::AsyNegLogistic, 0.6).unwrap();
        assert_abs_diff_eq!(th, 2.7201936179589758429, epsilon = 1e-5);
        let hr = param_from_tail_dependence(Family::HueslerReiss, 0.5).unwrap();
        assert_abs_diff_eq!(2.0 * (1.0 - norm_cdf(hr)), 0.5, epsilon = 1e-12);
    }

    // Monte Carlo oracle: tau = 4 E[C(U,V)] - 1 estimated from 10^6 draws
    #[test]
    fn tau_monte_carlo_oracle() {
        let n = 1_000_000;
        for (c, want) in [
            (CopulaSpec::clayton(2.0).unwrap(), 0.5),
            (CopulaSpec::gaussian(SQRT_HALF).unwrap(), 0.5),
        ] {
            let pairs = c.sample(n, 42);
            let mean_c: f64 =
                pairs.iter().map(|&(u, v)| c.cdf(u, v)).sum::<f64>() / n as f64;
            let tau = 4.0 * mean_c - 1.0;
            assert!((tau - want).abs() < 0.005, "{c:?} MC tau = {tau}");
        }
    }

    #[test]
    fn sampling_reproducible_and_calibrated() {
        let c = CopulaSpec::gumbel(2.0).unwrap();
        assert_eq!(c.sample(100, 9), c.sample(100, 9));
        assert_ne!(c.sample(100, 9), c.sample(100, 10));

        // empirical C(1/2,1/2) for Gumbel theta=2 approximates 0.5^sqrt(0.5)
        let pairs = c.sample(100_000, 3);
        let freq = pairs.iter().filter(|&&(u, v)| u <= 0.5 && v <= 0.5).count() as f64
            / pairs.len() as f64;
        assert!((freq - 0.5f64.powf(0.5f64.sqrt())).abs() < 0.005, "freq = {freq}");

        // empirical Kendall tau of an independence sample is near 0
        let indep = CopulaSpec::Independence.sample(100_000, 5);
        let tau = crate::empirical::kendall_tau(&indep);
        assert!(tau.abs() < 0.01, "tau = {tau}");

        // Clayton theta=2 has tau = 1/2
        let cl = CopulaSpec::clayton(2.0).unwrap().sample(100_000, 6);
        let tau = crate::empirical::kendall_tau(&cl);
        assert!((tau - 0.5).abs() < 0.01, "tau = {tau}");
    }

    #[test]
    fn conditional_sampler_matches_cdf() {
        // K-S style check: empirical joint CDF of conditional-method samples
        // against the closed form, a few grid points
        for c in [
            CopulaSpec::huesler_reiss(1.0).unwrap(),
            CopulaSpec::mixed(0.8).unwrap(),
            CopulaSpec::ShuffleCounterexample,
        ] {
            let n = 40_000;
            let pairs = c.sample(n, 11);
            for &(u, v) in &[(0.25, 0.25), (0.5, 0.5), (0.7, 0.3), (0.9, 0.9)] {
                let freq = pairs.iter().filter(|&&(a, b)| a <= u && b <= v).count() as f64
                    / n as f64;
                let want = c.cdf(u, v);
                assert!(
                    (freq - want).abs() < 0.012,
                    "{c:?} at ({u},{v}): {freq} vs {want}"
                );
            }
        }
    }

    #[test]
    fn shuffle_log_curve_not_midpoint_convex() {
        // t -> -log C(0.5^{1-t}, 0.5^t) dips on both sides of t = 1/2
        let c = CopulaSpec::ShuffleCounterexample;
        let g = |t: f64| -c.cdf(0.5f64.powf(1.0 - t), 0.5f64.powf(t)).ln();
        let mut violated = false;
        for i in 1..100 {
            let t = i as f64 / 100.0;
            if g(t - 0.01) + g(t + 0.01) - 2.0 * g(t) < -1e-9 {
                violated = true;
                break;
            }
        }
        assert!(violated, "expected a midpoint-convexity violation");
    }

    #[test]
    fn clayton_lemma_inequality_on_grid() {
        // [f_y'(t)]^2 >= f_y''(t) f_y(t) with finite differences
        let c = CopulaSpec::clayton(2.0).unwrap();
        let h = 1e-4;
        for iy in 1..10 {
            let y = iy as f64 / 10.0;
            let f = |t: f64| c.cdf(y.powf(1.0 - t), y.powf(t));
            for it in 1..20 {
                let t = it as f64 / 20.0;
                let fp = (f(t + h) - f(t - h)) / (2.0 * h);
                let fpp = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
                let lhs = fp * fp;
                let rhs = fpp * f(t);
                let scale = lhs.abs().max(rhs.abs()).max(1.0);
                assert!(lhs - rhs >= -1e-6 * scale, "y={y} t={t}: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn elliptical_diagonal_identity() {
        // C(1/2, 1/2) = 1/4 + asin(rho) / (2 pi) for Gaussian and t copulas
        for rho in [0.3, SQRT_HALF, 0.9] {
            let want = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
            let g = CopulaSpec::gaussian(rho).unwrap();
            assert_abs_diff_eq!(g.cdf(0.5, 0.5), want, epsilon = 1e-9);
            let t = CopulaSpec::student_t4(rho).unwrap();
            assert_abs_diff_eq!(t.cdf(0.5, 0.5), want, epsilon = 1e-8);
        }
    }

    #[test]
    fn model_name_roundtrip() {
        for name in [
            "independence",
            "gumbel:2",
            "mixed:0.8",
            "asy-neg-log:1:0.667:2.72",
            "huesler-reiss:1",
            "clayton:2",
            "frank:5.736",
            "gaussian:0.7071",
            "t4:0.7071",
            "shuffle-ce",
            "mix:0.5:clayton:2:gumbel:1.7095",
        ] {
            let c = CopulaSpec::from_name(name).unwrap();
            let c2 = CopulaSpec::from_name(&c.name()).unwrap();
            assert_eq!(c, c2);
        }
        assert!(CopulaSpec::from_name("gumbel:0.5").is_err());
        assert!(CopulaSpec::from_name("nosuch").is_err());
        assert!(CopulaSpec::from_name("gumbel:2:extra").is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(CopulaSpec::gumbel(0.99).is_err());
        assert!(CopulaSpec::clayton(0.0).is_err());
        assert!(CopulaSpec::frank(0.0).is_err());
        assert!(CopulaSpec::gaussian(-0.1).is_err());
        assert!(CopulaSpec::mixed(1.2).is_err());
        assert!(CopulaSpec::asy_neg_logistic(1.5, 0.5, 1.0).is_err());
    }
}
