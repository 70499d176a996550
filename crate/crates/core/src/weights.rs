//! Weight families (ρ_ν, ρ_μ) on an interval and their admissible Sobolev
//! exponents.
//!
//! The catalog is deliberately closed: only pairs whose Sobolev range is
//! tabulated are given a `SigmaRange`, everything else is refused rather
//! than guessed. Mass integrals (`nu_measure`) and resistance integrals
//! (`mu_resistance`) use closed forms throughout; the adaptive quadrature
//! in [`crate::quad`] serves as an independent cross-check in tests.
//!
//! Families on (a, b), both weights strictly positive in the open interval:
//!
//! * `unit`          ρ_ν = ρ_μ = 1
//! * `power`         ρ_ν = x^α,            ρ_μ = x^β          on (0, b)
//! * `log_power`     ρ_ν = (1/x)|ln x|^α,  ρ_μ = x|ln x|^β    on (0, c), c < 1
//! * `exponential`   ρ_ν = e^{α|x|},       ρ_μ = e^{β|x|}
//! * `radial_power`  ρ_ν = ρ_μ = x^{N-1}  (radial N-d problem on a ball)

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which weight pair a [`WeightSpec`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFamily {
    Unit,
    Power,
    LogPower,
    Exponential,
    RadialPower,
}

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Unit => "unit",
            WeightFamily::Power => "power",
            WeightFamily::LogPower => "log_power",
            WeightFamily::Exponential => "exponential",
            WeightFamily::RadialPower => "radial_power",
        }
    }
}

/// A weight pair (ρ_ν, ρ_μ) on the open interval (a, b).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec<T> {
    family: WeightFamily,
    alpha: T,
    beta: T,
    a: T,
    b: T,
    /// Space dimension for `radial_power` (N ≥ 2).
    dim: Option<u32>,
}

/// Admissible range of the Sobolev exponent σ, always open at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaRange<T> {
    /// Upper endpoint; `infinity()` means every σ > 1 is admissible.
    pub upper: T,
    /// Whether a finite upper endpoint itself is admissible.
    pub upper_inclusive: bool,
    /// Explicit empty marker (catalog conditions failed).
    pub empty: bool,
}

impl<T: Real> SigmaRange<T> {
    pub fn all() -> Self {
        SigmaRange {
            upper: T::infinity(),
            upper_inclusive: false,
            empty: false,
        }
    }

    pub fn up_to(upper: T) -> Self {
        SigmaRange {
            upper,
            upper_inclusive: true,
            empty: false,
        }
    }

    pub fn empty() -> Self {
        SigmaRange {
            upper: T::one(),
            upper_inclusive: false,
            empty: true,
        }
    }

    pub fn contains(&self, sigma: T) -> bool {
        if self.empty || sigma <= T::one() {
            return false;
        }
        sigma < self.upper || (self.upper_inclusive && sigma == self.upper)
    }
}

impl<T: Real> WeightSpec<T> {
    /// Unweighted problem on (a, b).
    pub fn unit(a: T, b: T) -> Result<Self> {
        Self::build(WeightFamily::Unit, T::zero(), T::zero(), a, b, None)
    }

    /// (x^α, x^β) on (0, b).
    pub fn power(alpha: T, beta: T, b: T) -> Result<Self> {
        Self::build(WeightFamily::Power, alpha, beta, T::zero(), b, None)
    }

    /// ((1/x)|ln x|^α, x|ln x|^β) on (0, c) with c < 1.
    pub fn log_power(alpha: T, beta: T, c: T) -> Result<Self> {
        Self::build(WeightFamily::LogPower, alpha, beta, T::zero(), c, None)
    }

    /// (e^{α|x|}, e^{β|x|}) on (a, b).
    pub fn exponential(alpha: T, beta: T, a: T, b: T) -> Result<Self> {
        Self::build(WeightFamily::Exponential, alpha, beta, a, b, None)
    }

    /// Radial reduction of the N-dimensional ball of radius b: both weights
    /// are r^{N-1}.
    pub fn radial_power(dim: u32, b: T) -> Result<Self> {
        let exp = T::from_u32(dim - 1).unwrap();
        Self::build(WeightFamily::RadialPower, exp, exp, T::zero(), b, Some(dim))
    }

    pub fn new(
        family: WeightFamily,
        alpha: T,
        beta: T,
        a: T,
        b: T,
        dim: Option<u32>,
    ) -> Result<Self> {
        Self::build(family, alpha, beta, a, b, dim)
    }

    fn build(
        family: WeightFamily,
        alpha: T,
        beta: T,
        a: T,
        b: T,
        dim: Option<u32>,
    ) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::UnsupportedSpec(format!(
                "domain ({a}, {b}) must be a bounded interval with a < b"
            )));
        }
        match family {
            WeightFamily::Unit => {}
            WeightFamily::Power => {
                if a != T::zero() {
                    return Err(Error::UnsupportedSpec(
                        "power weights are cataloged on (0, b)".into(),
                    ));
                }
                // ν(Ω) = ∫_0^b x^α dx finite iff α > -1.
                if alpha <= -T::one() {
                    return Err(Error::UnsupportedSpec(format!(
                        "power alpha = {alpha} gives infinite total mass on (0, {b})"
                    )));
                }
            }
            WeightFamily::LogPower => {
                if a != T::zero() || b >= T::one() {
                    return Err(Error::UnsupportedSpec(
                        "log_power weights are cataloged on (0, c) with c < 1".into(),
                    ));
                }
                // ∫_0^c (1/x)|ln x|^α dx = ∫ u^α du up to u = ∞: finite iff α < -1.
                if alpha >= -T::one() {
                    return Err(Error::UnsupportedSpec(format!(
                        "log_power alpha = {alpha} gives infinite total mass on (0, {b})"
                    )));
                }
            }
            WeightFamily::Exponential => {}
            WeightFamily::RadialPower => {
                let n = dim.ok_or_else(|| {
                    Error::UnsupportedSpec("radial_power needs a space dimension N".into())
                })?;
                if n < 2 {
                    return Err(Error::UnsupportedSpec(format!(
                        "radial_power needs N >= 2, got {n}"
                    )));
                }
                if a != T::zero() {
                    return Err(Error::UnsupportedSpec(
                        "radial_power acts on the ball (0, b)".into(),
                    ));
                }
                let exp = T::from_u32(n - 1).unwrap();
                if alpha != exp || beta != exp {
                    return Err(Error::UnsupportedSpec(
                        "radial_power fixes alpha = beta = N - 1".into(),
                    ));
                }
            }
        }
        Ok(WeightSpec {
            family,
            alpha,
            beta,
            a,
            b,
            dim,
        })
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn beta(&self) -> T {
        self.beta
    }
    pub fn domain(&self) -> (T, T) {
        (self.a, self.b)
    }
    pub fn dim(&self) -> Option<u32> {
        self.dim
    }

    /// Whether either weight is singular or degenerate at the left endpoint;
    /// meshes for such specs default to grading toward x = a.
    pub fn singular_at_left(&self) -> bool {
        match self.family {
            WeightFamily::Unit | WeightFamily::Exponential => false,
            WeightFamily::Power | WeightFamily::RadialPower => {
                self.alpha != T::zero() || self.beta != T::zero()
            }
            WeightFamily::LogPower => true,
        }
    }

    fn check_inside(&self, x: T) -> Result<()> {
        if x > self.a && x < self.b {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: x.as_f64(),
                lo: self.a.as_f64(),
                hi: self.b.as_f64(),
            })
        }
    }

    /// Mass density ρ_ν at a point of the open interval.
    pub fn eval_nu(&self, x: T) -> Result<T> {
        self.check_inside(x)?;
        Ok(match self.family {
            WeightFamily::Unit => T::one(),
            WeightFamily::Power | WeightFamily::RadialPower => x.powf(self.alpha),
            WeightFamily::LogPower => x.recip() * x.ln().abs().powf(self.alpha),
            WeightFamily::Exponential => (self.alpha * x.abs()).exp(),
        })
    }

    /// Mobility density ρ_μ at a point of the open interval.
    pub fn eval_mu(&self, x: T) -> Result<T> {
        self.check_inside(x)?;
        Ok(match self.family {
            WeightFamily::Unit => T::one(),
            WeightFamily::Power | WeightFamily::RadialPower => x.powf(self.beta),
            WeightFamily::LogPower => x * x.ln().abs().powf(self.beta),
            WeightFamily::Exponential => (self.beta * x.abs()).exp(),
        })
    }

    /// Admissible σ range, exactly as tabulated for the interval entries of
    /// the catalog. The exponential pair is only tabulated on the whole real
    /// line, which the interval-based evolution cannot represent, so it is
    /// refused here (the weights themselves remain usable by the solver).
    pub fn admissible_sigma(&self) -> Result<SigmaRange<T>> {
        let one = T::one();
        let two = T::of(2.0);
        match self.family {
            WeightFamily::Unit => Ok(SigmaRange::all()),
            WeightFamily::Power | WeightFamily::RadialPower => {
                // (x^α, x^β) on (0, b): β ≤ 1, α > -1 → all σ > 1;
                // β > 1, α > β - 2 → σ ∈ (1, (α+1)/(β-1)].
                if self.beta <= one {
                    if self.alpha > -one {
                        Ok(SigmaRange::all())
                    } else {
                        Ok(SigmaRange::empty())
                    }
                } else if self.alpha > self.beta - two {
                    Ok(SigmaRange::up_to((self.alpha + one) / (self.beta - one)))
                } else {
                    Ok(SigmaRange::empty())
                }
            }
            WeightFamily::LogPower => {
                // ((1/x)|ln x|^α, x|ln x|^β) on (0, c): β ≥ 1, α < -1 → all;
                // β < 1, α < β - 2 → σ ∈ (1, (α+1)/(β-1)].
                if self.beta >= one {
                    if self.alpha < -one {
                        Ok(SigmaRange::all())
                    } else {
                        Ok(SigmaRange::empty())
                    }
                } else if self.alpha < self.beta - two {
                    Ok(SigmaRange::up_to((self.alpha + one) / (self.beta - one)))
                } else {
                    Ok(SigmaRange::empty())
                }
            }
            WeightFamily::Exponential => Err(Error::UnsupportedSpec(
                "exponential weights are cataloged on the whole line only; \
                 no σ range is tabulated for a bounded interval"
                    .into(),
            )),
        }
    }

    fn check_cell(&self, lo: T, hi: T) -> Result<()> {
        if lo > hi || lo < self.a || hi > self.b {
            return Err(Error::InvalidArgument(format!(
                "cell [{lo}, {hi}] not contained in [{}, {}]",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// ν-mass of a cell, ∫_lo^hi ρ_ν dx, in closed form.
    pub fn nu_measure(&self, lo: T, hi: T) -> Result<T> {
        self.check_cell(lo, hi)?;
        if lo == hi {
            return Ok(T::zero());
        }
        let one = T::one();
        match self.family {
            WeightFamily::Unit => Ok(hi - lo),
            WeightFamily::Power | WeightFamily::RadialPower => {
                let p = self.alpha;
                if lo <= T::zero() && p <= -one {
                    return Err(Error::InfiniteMeasure(format!(
                        "∫ x^{p} dx diverges at 0"
                    )));
                }
                Ok(power_antiderivative(hi, p) - power_antiderivative(lo, p))
            }
            WeightFamily::LogPower => {
                // substitute u = -ln x: ∫ u^α du between u(hi) and u(lo)
                let p = self.alpha;
                if lo <= T::zero() && p >= -one {
                    return Err(Error::InfiniteMeasure(format!(
                        "∫ x^-1 |ln x|^{p} dx diverges at 0"
                    )));
                }
                let u_hi = -hi.ln(); // smaller u
                let term_hi = power_antiderivative(u_hi, p);
                let term_lo = if lo <= T::zero() {
                    T::zero() // u → ∞ and α < -1 ⇒ antiderivative → 0
                } else {
                    power_antiderivative(-lo.ln(), p)
                };
                Ok(term_lo - term_hi)
            }
            WeightFamily::Exponential => Ok(exp_abs_integral(self.alpha, lo, hi)),
        }
    }

    /// Resistance of a cell, ∫_lo^hi ρ_μ(x)^{-1} dx.
    ///
    /// A divergent integral returns `+∞` as a value (the edge decouples),
    /// never an error.
    pub fn mu_resistance(&self, lo: T, hi: T) -> Result<T> {
        self.check_cell(lo, hi)?;
        if lo == hi {
            return Ok(T::zero());
        }
        let one = T::one();
        Ok(match self.family {
            WeightFamily::Unit => hi - lo,
            WeightFamily::Power | WeightFamily::RadialPower => {
                let p = -self.beta;
                if lo <= T::zero() && p <= -one {
                    T::infinity()
                } else {
                    power_antiderivative(hi, p) - power_antiderivative(lo, p)
                }
            }
            WeightFamily::LogPower => {
                // 1/ρ_μ = (1/x)|ln x|^{-β}: substitute u = -ln x again
                let p = -self.beta;
                if lo <= T::zero() && p >= -one {
                    T::infinity()
                } else {
                    let term_hi = power_antiderivative(-hi.ln(), p);
                    let term_lo = if lo <= T::zero() {
                        T::zero()
                    } else {
                        power_antiderivative(-lo.ln(), p)
                    };
                    term_lo - term_hi
                }
            }
            WeightFamily::Exponential => exp_abs_integral(-self.beta, lo, hi),
        })
    }

    /// Total mass ν(Ω); finite by construction.
    pub fn nu_total(&self) -> T {
        self.nu_measure(self.a, self.b)
            .expect("total mass finite by construction")
    }
}

/// Antiderivative of x^p (x > 0), picking the log branch at p = -1.
fn power_antiderivative<T: Real>(x: T, p: T) -> T {
    if x == T::zero() {
        // only called with p > -1 in this case
        return T::zero();
    }
    if p == -T::one() {
        x.ln()
    } else {
        x.powf(p + T::one()) / (p + T::one())
    }
}

/// ∫_lo^hi e^{c|x|} dx with the kink at 0 handled exactly.
fn exp_abs_integral<T: Real>(c: T, lo: T, hi: T) -> T {
    if c == T::zero() {
        return hi - lo;
    }
    // antiderivative of e^{c|x|}: sign(x) (e^{c|x|} - 1)/c  (continuous at 0)
    let prim = |x: T| x.signum() * ((c * x.abs()).exp() - T::one()) / c;
    prim(hi) - prim(lo)
}
