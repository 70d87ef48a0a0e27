//! Composition operators `T f = f ∘ τ⁻¹` on `L^2[0,1]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::basis::Basis;
use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const VALIDATION_GRID: usize = 1024;
const INVERSE_TOL: f64 = 1e-14;
const INVERSE_MAX_ITER: usize = 200;

/// Orientation-preserving bijection of `[0,1]` with `alpha <= τ' <= beta`.
#[derive(Clone)]
pub struct Diffeomorphism {
    name: String,
    forward: ScalarFn,
    derivative: ScalarFn,
    alpha: f64,
    beta: f64,
}

impl fmt::Debug for Diffeomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Diffeomorphism")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .finish()
    }
}

impl Diffeomorphism {
    /// Validates a user-supplied map: endpoints fixed to 1e-12, derivative
    /// bounds on a 1024-point grid, and the derivative against centered
    /// finite differences of `forward`.
    pub fn new(
        name: impl Into<String>,
        forward: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let d = Self {
            name: name.into(),
            forward: Arc::new(forward),
            derivative: Arc::new(derivative),
            alpha,
            beta,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDiffeomorphism(format!("{}: {msg}", self.name)));
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta.is_finite() && self.beta >= self.alpha) {
            return bad(format!("need 0 < alpha <= beta, got alpha = {}, beta = {}", self.alpha, self.beta));
        }
        let (t0, t1) = (self.forward(0.0), self.forward(1.0));
        if t0.abs() > 1e-12 || (t1 - 1.0).abs() > 1e-12 {
            return bad(format!("endpoints map to ({t0}, {t1}), expected (0, 1)"));
        }
        let slack = 1e-12 * self.beta;
        let h = 1e-5;
        for k in 0..VALIDATION_GRID {
            let s = k as f64 / (VALIDATION_GRID - 1) as f64;
            let d = self.derivative(s);
            if !d.is_finite() || d < self.alpha - slack || d > self.beta + slack {
                return bad(format!("derivative {d} at s = {s} outside [{}, {}]", self.alpha, self.beta));
            }
            if s - h >= 0.0 && s + h <= 1.0 {
                let fd = (self.forward(s + h) - self.forward(s - h)) / (2.0 * h);
                if (fd - d).abs() > 1e-6 * d.abs().max(1.0) {
                    return bad(format!("derivative {d} disagrees with finite difference {fd} at s = {s}"));
                }
            }
        }
        Ok(())
    }

    pub fn identity() -> Self {
        Self::new("identity", |s| s, |_| 1.0, 1.0, 1.0).expect("identity is valid")
    }

    /// `τ(s) = (s + s^2) / 2`, with `τ'(s) = (1 + 2s) / 2` in `[1/2, 3/2]`.
    pub fn poly_quadratic() -> Self {
        Self::new("poly-quadratic", |s| 0.5 * (s + s * s), |s| 0.5 + s, 0.5, 1.5)
            .expect("poly-quadratic is valid")
    }

    /// `τ(s) = (e^{γs} - 1) / (e^γ - 1)`; `τ'` is monotone so its extremes sit
    /// at the endpoints.
    pub fn exponential(gamma: f64) -> Result<Self> {
        if gamma == 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidDiffeomorphism(format!("exponential map needs finite nonzero gamma, got {gamma}")));
        }
        let denom = gamma.exp_m1();
        let d0 = gamma / denom;
        let d1 = gamma * gamma.exp() / denom;
        Self::new(
            format!("exp:{gamma}"),
            move |s| (gamma * s).exp_m1() / denom,
            move |s| gamma * (gamma * s).exp() / denom,
            d0.min(d1),
            d0.max(d1),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn forward(&self, s: f64) -> f64 {
        (self.forward)(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        (self.derivative)(s)
    }

    /// `τ⁻¹(t)` by Newton iteration safeguarded with a bisection bracket.
    pub fn invert(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("point {t} outside [0, 1]")));
        }
        if t == 0.0 || t == 1.0 {
            return Ok(t);
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut s = t;
        for _ in 0..INVERSE_MAX_ITER {
            let r = self.forward(s) - t;
            if r == 0.0 {
                return Ok(s);
            }
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - r / self.derivative(s);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - s).abs();
            s = next;
            if step <= f64::EPSILON * s.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON {
                break;
            }
        }
        if (self.forward(s) - t).abs() <= INVERSE_TOL {
            Ok(s)
        } else {
            Err(Error::InverseNotConverged { at: t })
        }
    }

    /// The inverse map `τ⁻¹` as a diffeomorphism, with bounds `1/beta, 1/alpha`.
    pub fn inverse(&self) -> Result<Self> {
        let fwd = self.clone();
        let der = self.clone();
        Self::new(
            format!("inverse({})", self.name),
            move |t| fwd.invert(t).unwrap_or(f64::NAN),
            move |t| der.invert(t).map(|s| 1.0 / der.derivative(s)).unwrap_or(f64::NAN),
            1.0 / self.beta,
            1.0 / self.alpha,
        )
    }
}

/// Named entries of the built-in diffeomorphism catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalog {
    Identity,
    PolyQuadratic,
    Exponential { gamma: f64 },
}

impl Catalog {
    pub const DEFAULT_GAMMA: f64 = 1.0;

    /// Every catalog entry with default parameters.
    pub fn all() -> [Catalog; 3] {
        [Catalog::Identity, Catalog::PolyQuadratic, Catalog::Exponential { gamma: Self::DEFAULT_GAMMA }]
    }

    pub fn build(self) -> Result<Diffeomorphism> {
        match self {
            Catalog::Identity => Ok(Diffeomorphism::identity()),
            Catalog::PolyQuadratic => Ok(Diffeomorphism::poly_quadratic()),
            Catalog::Exponential { gamma } => Diffeomorphism::exponential(gamma),
        }
    }
}

impl FromStr for Catalog {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Catalog::Identity),
            "poly-quadratic" => Ok(Catalog::PolyQuadratic),
            "exp" => Ok(Catalog::Exponential { gamma: Self::DEFAULT_GAMMA }),
            other => match other.strip_prefix("exp:") {
                Some(g) => g
                    .parse()
                    .map(|gamma| Catalog::Exponential { gamma })
                    .map_err(|_| Error::InvalidInput(format!("bad gamma in `{other}`"))),
                None => Err(Error::InvalidInput(format!("unknown diffeomorphism `{other}`"))),
            },
        }
    }
}

/// Analytic bounds `|T| <= upper`, `|T⁻¹| <= inverse_upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    pub upper: f64,
    pub inverse_upper: f64,
}

#[derive(Debug, Clone)]
pub struct CompositionOperator {
    tau: Diffeomorphism,
    basis_in: Basis,
    basis_out: Basis,
}

impl CompositionOperator {
    pub fn new(tau: Diffeomorphism, basis_in: Basis, basis_out: Basis) -> Self {
        Self { tau, basis_in, basis_out }
    }

    pub fn tau(&self) -> &Diffeomorphism {
        &self.tau
    }

    pub fn basis_in(&self) -> Basis {
        self.basis_in
    }

    pub fn basis_out(&self) -> Basis {
        self.basis_out
    }

    /// `(T f)(t) = f(τ⁻¹(t))`.
    pub fn apply(&self, f: impl Fn(f64) -> f64, t: f64) -> Result<f64> {
        Ok(f(self.tau.invert(t)?))
    }

    /// `(T⁻¹ g)(s) = g(τ(s))`.
    pub fn apply_inverse(&self, g: impl Fn(f64) -> f64, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("point {s} outside [0, 1]")));
        }
        Ok(g(self.tau.forward(s)))
    }

    /// From the change of variables `|T f|^2 = ∫ f(s)^2 τ'(s) ds`.
    pub fn norm_bounds(&self) -> NormBounds {
        NormBounds { upper: self.tau.beta.sqrt(), inverse_upper: (1.0 / self.tau.alpha).sqrt() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::QuadratureRule;
    use approx::assert_abs_diff_eq;

    fn op(tau: Diffeomorphism) -> CompositionOperator {
        CompositionOperator::new(tau, Basis::Fourier, Basis::Fourier)
    }

    #[test]
    fn apply_examples() {
        let f = |s: f64| (3.0 * s).sin() + s;
        assert_eq!(op(Diffeomorphism::identity()).apply(f, 0.3).unwrap(), f(0.3));
        for tau in Catalog::all() {
            let o = op(tau.build().unwrap());
            for t in [0.0, 0.2, 0.77, 1.0] {
                assert_eq!(o.apply(|_| 1.0, t).unwrap(), 1.0);
            }
        }
        // (s + s^2)/2 = 0.375 has root s = 0.5
        let s = op(Diffeomorphism::poly_quadratic()).apply(|s| s, 0.375).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn inverse_is_accurate() {
        for tau in Catalog::all().into_iter().chain([Catalog::Exponential { gamma: -3.0 }]) {
            let d = tau.build().unwrap();
            for k in 0..=200 {
                let t = k as f64 / 200.0;
                let s = d.invert(t).unwrap();
                assert!((d.forward(s) - t).abs() <= 1e-14, "{:?} at {t}", d);
            }
        }
    }

    #[test]
    fn norm_bounds_examples() {
        let b = op(Diffeomorphism::identity()).norm_bounds();
        assert_eq!((b.upper, b.inverse_upper), (1.0, 1.0));
        let b = op(Diffeomorphism::poly_quadratic()).norm_bounds();
        assert_abs_diff_eq!(b.upper, 1.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.inverse_upper, 2f64.sqrt(), epsilon = 1e-15);
        // plug-in only, the map itself is not consulted
        let d = Diffeomorphism { name: "plug".into(), forward: Arc::new(|s| s), derivative: Arc::new(|_| 1.0), alpha: 0.25, beta: 4.0 };
        let b = op(d).norm_bounds();
        assert_eq!((b.upper, b.inverse_upper), (2.0, 2.0));
    }

    #[test]
    fn exponential_bounds_are_endpoint_derivatives() {
        let d = Diffeomorphism::exponential(1.0).unwrap();
        let e = 1f64.exp();
        assert_abs_diff_eq!(d.alpha(), 1.0 / (e - 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(d.beta(), e / (e - 1.0), epsilon = 1e-15);
        assert!(Diffeomorphism::exponential(0.0).is_err());
    }

    #[test]
    fn validation_rejects_bad_maps() {
        assert!(Diffeomorphism::new("shifted", |s| s + 0.1, |_| 1.0, 1.0, 1.0).is_err());
        assert!(Diffeomorphism::new("loose", |s| s * s, |s| 2.0 * s, 0.5, 2.0).is_err());
        assert!(Diffeomorphism::new("wrong-derivative", |s| 0.5 * (s + s * s), |_| 1.0, 0.5, 1.5).is_err());
        assert!(Diffeomorphism::new("bounds", |s| s, |_| 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn catalog_names_parse() {
        assert_eq!("identity".parse::<Catalog>().unwrap(), Catalog::Identity);
        assert_eq!("poly-quadratic".parse::<Catalog>().unwrap(), Catalog::PolyQuadratic);
        assert_eq!("exp:2.5".parse::<Catalog>().unwrap(), Catalog::Exponential { gamma: 2.5 });
        assert!("exp:x".parse::<Catalog>().is_err());
        assert!("cubic".parse::<Catalog>().is_err());
    }

    #[test]
    fn composing_with_inverse_reproduces_f() {
        let f = |s: f64| (5.0 * s).cos() * s.exp();
        for tau in Catalog::all() {
            let d = tau.build().unwrap();
            let fwd = op(d.clone());
            let back = op(d.inverse().unwrap());
            for k in 0..256 {
                let s = k as f64 / 255.0;
                // T_{τ⁻¹} (T_τ f) = (f ∘ τ⁻¹) ∘ τ
                let v = back.apply(|t| fwd.apply(f, t).unwrap(), s).unwrap();
                assert_abs_diff_eq!(v, f(s), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn change_of_variables_bound() {
        let rule = QuadratureRule::default();
        let fs: [fn(f64) -> f64; 3] = [|s| (7.0 * s).sin(), |s| 1.0 - 3.0 * s * s, |s| (-(s - 0.2) * (s - 0.2) * 40.0).exp()];
        for tau in Catalog::all() {
            let o = op(tau.build().unwrap());
            for f in fs {
                let lhs = rule.integrate(|t| o.apply(f, t).unwrap().powi(2)).unwrap();
                let norm_sq = rule.integrate(|s| f(s).powi(2)).unwrap();
                assert!(lhs <= o.tau().beta() * norm_sq + 1e-12);
                assert!(norm_sq <= lhs / o.tau().alpha() + 1e-12);
            }
        }
    }
}
