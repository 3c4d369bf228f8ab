//! Kernelized regularizers `h(x) = sum_a theta(x_a)` on the simplex and their
//! choice maps `Q(y) = argmax_x { <y,x> - h(x) }`.
//!
//! Supported kernels: quadratic `z^2/2`, entropic `z log z` and the power family
//! `z^rho / (rho (rho - 1))` for `rho` in `(0,1) u (1,2]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::game::MixedStrategy;

/// Cap on bisection steps for the dual normalization of power kernels.
pub const MAX_BISECTION_ITERS: usize = 200;

/// Target residual `|sum x - 1|` of the dual normalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Kernel {
    Quadratic,
    Entropic,
    /// Exponent `rho`; `rho = 1/2` is the Tsallis kernel `-4 sqrt(z)`.
    Power(f64),
}

/// Norm on strategies and its dual on scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormPair {
    /// `(L1, Linf)`.
    L1LInf,
    /// `(L2, L2)`.
    L2L2,
}

impl NormPair {
    pub fn primal(self, v: &[f64]) -> f64 {
        match self {
            Self::L1LInf => v.iter().map(|x| x.abs()).sum(),
            Self::L2L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn dual(self, v: &[f64]) -> f64 {
        match self {
            Self::L1LInf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Self::L2L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }
}

/// Strong convexity modulus of `h` together with the norm it holds in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongConvexity {
    pub k: f64,
    pub norms: NormPair,
}

impl Kernel {
    pub fn power(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 2.0) || rho == 1.0 {
            return input(format!("power exponent must lie in (0,1) or (1,2], got {rho}"));
        }
        Ok(if rho == 2.0 { Self::Quadratic } else { Self::Power(rho) })
    }

    pub fn tsallis() -> Self {
        Self::Power(0.5)
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Quadratic => "euclidean".into(),
            Self::Entropic => "logit".into(),
            Self::Power(0.5) => "tsallis".into(),
            Self::Power(r) => format!("power:{r}"),
        }
    }

    /// `theta'(0+) = -inf`.
    pub fn is_steep(&self) -> bool {
        match *self {
            Self::Quadratic => false,
            Self::Entropic => true,
            Self::Power(r) => r < 1.0,
        }
    }

    pub fn theta(&self, z: f64) -> f64 {
        match *self {
            Self::Quadratic => 0.5 * z * z,
            Self::Entropic => {
                if z > 0.0 {
                    z * z.ln()
                } else {
                    0.0
                }
            }
            Self::Power(r) => z.powf(r) / (r * (r - 1.0)),
        }
    }

    pub fn theta_prime(&self, z: f64) -> f64 {
        match *self {
            Self::Quadratic => z,
            Self::Entropic => 1.0 + z.ln(),
            Self::Power(r) => z.powf(r - 1.0) / (r - 1.0),
        }
    }

    pub fn theta_second(&self, z: f64) -> f64 {
        match *self {
            Self::Quadratic => 1.0,
            Self::Entropic => 1.0 / z,
            Self::Power(r) => z.powf(r - 2.0),
        }
    }

    pub fn theta_prime_at_zero(&self) -> f64 {
        if self.is_steep() {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }

    pub fn theta_prime_at_one(&self) -> f64 {
        match *self {
            Self::Quadratic | Self::Entropic => 1.0,
            Self::Power(r) => 1.0 / (r - 1.0),
        }
    }

    /// `(theta')^{-1}(w)` on the range of `theta'` over `(0, inf)`.
    pub fn theta_prime_inv(&self, w: f64) -> f64 {
        match *self {
            Self::Quadratic => w,
            Self::Entropic => (w - 1.0).exp(),
            Self::Power(r) => ((r - 1.0) * w).powf(1.0 / (r - 1.0)),
        }
    }

    pub fn strong_convexity(&self) -> StrongConvexity {
        strong_convexity(*self)
    }

    /// `h(x)`.
    pub fn regularizer(&self, x: &[f64]) -> f64 {
        x.iter().map(|&z| self.theta(z)).sum()
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Quadratic),
            "logit" => Ok(Self::Entropic),
            "tsallis" => Ok(Self::tsallis()),
            _ => match s.strip_prefix("power:") {
                Some(r) => {
                    let rho: f64 = r.trim().parse().map_err(|_| Error::Input(format!("bad power exponent {r:?}")))?;
                    Self::power(rho)
                }
                None => input(format!("unknown kernel {s:?}; expected euclidean, logit, tsallis or power:<rho>")),
            },
        }
    }
}

impl TryFrom<String> for Kernel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Kernel> for String {
    fn from(k: Kernel) -> Self {
        k.name()
    }
}

pub fn strong_convexity(kernel: Kernel) -> StrongConvexity {
    // theta'' is nonincreasing on (0,1] for every supported kernel; the infimum sits at z = 1.
    let k = kernel.theta_second(1.0);
    let norms = match kernel {
        Kernel::Entropic => NormPair::L1LInf,
        Kernel::Power(r) if r < 1.0 => NormPair::L1LInf,
        _ => NormPair::L2L2,
    };
    StrongConvexity { k, norms }
}

pub fn choice_map(kernel: Kernel, y: &[f64]) -> Result<MixedStrategy> {
    let mut out = vec![0.0; y.len()];
    choice_map_into(kernel, y, &mut out)?;
    Ok(MixedStrategy::new_unchecked(out))
}

/// Writes `Q(y)` into `out`, which must have the length of `y`.
pub fn choice_map_into(kernel: Kernel, y: &[f64], out: &mut [f64]) -> Result<()> {
    if y.is_empty() {
        return input("score vector is empty");
    }
    if y.iter().any(|v| !v.is_finite()) {
        return input("score vector contains non-finite entries");
    }
    debug_assert_eq!(y.len(), out.len());
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match kernel {
        Kernel::Entropic => {
            let mut total = 0.0;
            for (o, &v) in out.iter_mut().zip(y) {
                *o = (v - top).exp();
                total += *o;
            }
            out.iter_mut().for_each(|o| *o /= total);
        }
        Kernel::Quadratic => project_simplex(y, top, out),
        Kernel::Power(r) => power_map(kernel, r, y, top, out)?,
    }
    Ok(())
}

/// Euclidean projection onto the simplex by sorting.
fn project_simplex(y: &[f64], top: f64, out: &mut [f64]) {
    let mut sorted: Vec<f64> = y.iter().map(|v| v - top).collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    for (o, &v) in out.iter_mut().zip(y) {
        *o = (v - top - tau).max(0.0);
    }
}

fn power_map(kernel: Kernel, r: f64, y: &[f64], top: f64, out: &mut [f64]) -> Result<()> {
    // Scores are shifted so that max y = 0; x_a(mu) is nonincreasing in mu.
    let fill = |mu: f64, out: &mut [f64]| -> f64 {
        let mut total = 0.0;
        for (o, &v) in out.iter_mut().zip(y) {
            let w = v - top - mu;
            *o = if r < 1.0 || w > 0.0 { kernel.theta_prime_inv(w) } else { 0.0 };
            total += *o;
        }
        total
    };
    let mut lo = -kernel.theta_prime_at_one();
    let mut hi = if r < 1.0 {
        let mut step = 1.0;
        loop {
            let cand = lo + step;
            if fill(cand, out) <= 1.0 {
                break cand;
            }
            step *= 2.0;
            if !step.is_finite() {
                return Err(Error::Numeric { message: "bracket growth diverged".into(), residual: f64::NAN });
            }
        }
    } else {
        0.0
    };
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let total = fill(mid, out);
        residual = (total - 1.0).abs();
        if residual <= NORMALIZATION_TOL || mid <= lo || mid >= hi {
            let total: f64 = out.iter().sum();
            if !(total > 0.0) {
                break;
            }
            out.iter_mut().for_each(|o| *o /= total);
            return Ok(());
        }
        if total > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric { message: "dual normalization did not converge".into(), residual })
}

/// `h*(y) = <y, Q(y)> - h(Q(y))`.
pub fn conjugate(kernel: Kernel, y: &[f64]) -> Result<f64> {
    if kernel == Kernel::Entropic {
        if y.is_empty() || y.iter().any(|v| !v.is_finite()) {
            return input("score vector must be finite and nonempty");
        }
        let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok(top + y.iter().map(|v| (v - top).exp()).sum::<f64>().ln());
    }
    let q = choice_map(kernel, y)?;
    let dot: f64 = y.iter().zip(q.probs()).map(|(a, b)| a * b).sum();
    Ok(dot - kernel.regularizer(q.probs()))
}

/// `F(p, y) = h(p) + h*(y) - <y, p>`.
pub fn fenchel_coupling(kernel: Kernel, p: &MixedStrategy, y: &[f64]) -> Result<f64> {
    if p.len() != y.len() {
        return input(format!("strategy has {} entries, scores have {}", p.len(), y.len()));
    }
    let dot: f64 = y.iter().zip(p.probs()).map(|(a, b)| a * b).sum();
    Ok(kernel.regularizer(p.probs()) + conjugate(kernel, y)? - dot)
}

/// `phi(z)`: `0` below `theta'(0+)`, `1` above `theta'(1)`, `(theta')^{-1}(z)` in between.
pub fn rate_function(kernel: Kernel, z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z <= kernel.theta_prime_at_zero() {
        0.0
    } else if z >= kernel.theta_prime_at_one() {
        1.0
    } else {
        kernel.theta_prime_inv(z).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KERNELS: [Kernel; 4] = [Kernel::Quadratic, Kernel::Entropic, Kernel::Power(0.5), Kernel::Power(1.5)];

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn names_round_trip() {
        for k in KERNELS {
            assert_eq!(k.name().parse::<Kernel>().unwrap(), k);
        }
        assert_eq!("power:2".parse::<Kernel>().unwrap(), Kernel::Quadratic);
        assert_eq!("power:0.5".parse::<Kernel>().unwrap(), Kernel::tsallis());
        for bad in ["power:1", "power:0", "power:2.5", "power:x", "softmax"] {
            assert!(bad.parse::<Kernel>().is_err(), "{bad}");
        }
        let json = serde_json::to_string(&Kernel::Entropic).unwrap();
        assert_eq!(json, "\"logit\"");
        assert_eq!(serde_json::from_str::<Kernel>("\"tsallis\"").unwrap(), Kernel::Power(0.5));
    }

    #[test]
    fn tsallis_kernel_values() {
        let k = Kernel::tsallis();
        assert!((k.theta(0.25) + 2.0).abs() < 1e-15);
        assert!((k.theta_prime(0.25) + 4.0).abs() < 1e-15);
        assert!((k.theta_prime_inv(-4.0) - 0.25).abs() < 1e-15);
        assert!(k.is_steep() && !Kernel::Quadratic.is_steep() && !Kernel::Power(1.5).is_steep());
    }

    #[test]
    fn choice_map_examples() {
        let q = choice_map(Kernel::Entropic, &[0.0, 0.0]).unwrap();
        assert_eq!(q.probs(), &[0.5, 0.5]);
        let q = choice_map(Kernel::Entropic, &[2f64.ln(), 0.0]).unwrap();
        assert!(close(q.probs(), &[2.0 / 3.0, 1.0 / 3.0], 1e-15));
        let q = choice_map(Kernel::Quadratic, &[1.2, -0.3]).unwrap();
        assert_eq!(q.probs(), &[1.0, 0.0]);
        let q = choice_map(Kernel::tsallis(), &[0.0, 0.0]).unwrap();
        assert!(close(q.probs(), &[0.5, 0.5], 1e-14));
        assert!(choice_map(Kernel::Entropic, &[f64::NAN]).is_err());
        assert!(choice_map(Kernel::Entropic, &[]).is_err());
    }

    #[test]
    fn quadratic_matches_water_filling() {
        // Interior case: x = y - mean(y) + 1/m.
        let q = choice_map(Kernel::Quadratic, &[0.1, 0.0, -0.1]).unwrap();
        assert!(close(q.probs(), &[1.0 / 3.0 + 0.1, 1.0 / 3.0, 1.0 / 3.0 - 0.1], 1e-15));
        // One coordinate clipped: (0.9, 0.5) shares the unit mass as (0.7, 0.3).
        let q = choice_map(Kernel::Quadratic, &[0.9, 0.5, -2.0]).unwrap();
        assert!(close(q.probs(), &[0.7, 0.3, 0.0], 1e-15));
        assert_eq!(q.probs()[2], 0.0);
    }

    #[test]
    fn power_map_satisfies_stationarity() {
        // On the support, theta'(x_a) - y_a is the same constant.
        for k in [Kernel::Power(0.5), Kernel::Power(0.3), Kernel::Power(1.5)] {
            let y = [0.4, -0.2, 0.1, -3.0];
            let q = choice_map(k, &y).unwrap();
            let mus: Vec<f64> =
                q.probs().iter().zip(&y).filter(|(x, _)| **x > 0.0).map(|(x, v)| v - k.theta_prime(*x)).collect();
            assert!(mus.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9), "{k}: {mus:?}");
            assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // The non-steep power kernel clips far-behind actions to zero.
        assert_eq!(choice_map(Kernel::Power(1.5), &[0.0, -10.0]).unwrap().probs(), &[1.0, 0.0]);
    }

    #[test]
    fn conjugate_examples() {
        assert!((conjugate(Kernel::Entropic, &[0.0; 3]).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((conjugate(Kernel::Quadratic, &[0.0; 2]).unwrap() + 0.25).abs() < 1e-15);
        for k in KERNELS {
            let y = [0.3, -0.7, 0.1];
            let shifted: Vec<f64> = y.iter().map(|v| v + 2.5).collect();
            let a = conjugate(k, &y).unwrap();
            let b = conjugate(k, &shifted).unwrap();
            assert!((b - a - 2.5).abs() < 1e-10, "{k}");
        }
    }

    #[test]
    fn fenchel_examples() {
        let p = MixedStrategy::new(vec![1.0, 0.0]).unwrap();
        assert!((fenchel_coupling(Kernel::Entropic, &p, &[0.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        for k in KERNELS {
            let y = [0.2, -0.4, 0.9];
            let q = choice_map(k, &y).unwrap();
            assert!(fenchel_coupling(k, &q, &y).unwrap().abs() < 1e-12, "{k}");
        }
        assert!(fenchel_coupling(Kernel::Entropic, &p, &[0.0]).is_err());
    }

    #[test]
    fn rate_function_examples() {
        let q = Kernel::Quadratic;
        assert_eq!(rate_function(q, -1.0), 0.0);
        assert_eq!(rate_function(q, 0.5), 0.5);
        assert_eq!(rate_function(q, 3.0), 1.0);
        assert!((rate_function(Kernel::tsallis(), -4.0) - 0.25).abs() < 1e-15);
        assert_eq!(rate_function(Kernel::tsallis(), -1.0), 1.0);
        assert_eq!(rate_function(Kernel::Entropic, 1.0), 1.0);
        assert!((rate_function(Kernel::Entropic, 0.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(rate_function(Kernel::Entropic, f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn strong_convexity_examples() {
        for k in KERNELS {
            assert_eq!(strong_convexity(k).k, 1.0);
        }
        assert_eq!(strong_convexity(Kernel::Entropic).norms, NormPair::L1LInf);
        assert_eq!(strong_convexity(Kernel::tsallis()).norms, NormPair::L1LInf);
        assert_eq!(strong_convexity(Kernel::Quadratic).norms, NormPair::L2L2);
    }
}
