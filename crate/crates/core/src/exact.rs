//! Closed-form reference objects: Barenblatt profiles (radial N-dimensional
//! and the weighted one-dimensional family), the Φ_{r,m} integral with its
//! two-sided power bounds, and the bounded-ratio scan behind the numerical
//! lemma used by the smoothing iteration.

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::Real;

/// Self-similar source-type solution parameters.
///
/// `NdRadial` is the classical profile
/// u(x,t) = t^{-λ} (C - k |x|²/t^{2γ})_+^{1/(m-1)}
/// with λ = N/(N(m-1)+2), γ = λ/N, k = λ(m-1)/(2mN); it solves the radial
/// problem with weights r^{N-1}.
///
/// `Weighted1d` is the analogous family for (ρ_ν, ρ_μ) = (1, x^β):
/// u(x,t) = t^{-ζ} (C - k x^ω/t^{ωζ})_+^{1/(m-1)}
/// with ζ = 1/(m+1-β), ω = 2-β, k = (m-1)/(m(2-β)(m+1-β)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarenblattParams<T> {
    NdRadial { dim: u32, m: T, c: T },
    Weighted1d { m: T, beta: T, c: T },
}

/// Derived self-similar exponents: sup-norm decay, support growth, and the
/// profile coefficient k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarExponents<T> {
    /// Decay exponent of the sup norm (λ or ζ).
    pub decay: T,
    /// Growth exponent of the support radius (γ or ζ).
    pub spread: T,
    /// Power of |x| inside the bracket (2 or ω).
    pub shape: T,
    /// Profile coefficient k.
    pub k: T,
}

impl<T: Real> BarenblattParams<T> {
    pub fn nd_radial(dim: u32, m: T, c: T) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidArgument(format!(
                "radial profile needs N >= 3, got {dim}"
            )));
        }
        if !(m > T::one()) || !(c > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "need m > 1 and C > 0, got m={m}, C={c}"
            )));
        }
        Ok(BarenblattParams::NdRadial { dim, m, c })
    }

    pub fn weighted_1d(m: T, beta: T, c: T) -> Result<Self> {
        if !(m > T::one()) || !(c > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "need m > 1 and C > 0, got m={m}, C={c}"
            )));
        }
        if !(beta > T::one() && beta < T::of(2.0)) {
            return Err(Error::InvalidArgument(format!(
                "weighted profile needs beta in (1, 2), got {beta}"
            )));
        }
        Ok(BarenblattParams::Weighted1d { m, beta, c })
    }

    pub fn m(&self) -> T {
        match *self {
            BarenblattParams::NdRadial { m, .. } => m,
            BarenblattParams::Weighted1d { m, .. } => m,
        }
    }

    pub fn mass_parameter(&self) -> T {
        match *self {
            BarenblattParams::NdRadial { c, .. } => c,
            BarenblattParams::Weighted1d { c, .. } => c,
        }
    }

    pub fn exponents(&self) -> SelfSimilarExponents<T> {
        let one = T::one();
        let two = T::of(2.0);
        match *self {
            BarenblattParams::NdRadial { dim, m, .. } => {
                let n = T::from_u32(dim).unwrap();
                let lambda = n / (n * (m - one) + two);
                let gamma = lambda / n;
                let k = lambda * (m - one) / (two * m * n);
                SelfSimilarExponents {
                    decay: lambda,
                    spread: gamma,
                    shape: two,
                    k,
                }
            }
            BarenblattParams::Weighted1d { m, beta, .. } => {
                let zeta = one / (m + one - beta);
                let omega = two - beta;
                let k = (m - one) / (m * omega * (m + one - beta));
                SelfSimilarExponents {
                    decay: zeta,
                    spread: zeta,
                    shape: omega,
                    k,
                }
            }
        }
    }
}

/// Profile value at radius/point x ≥ 0 and time t > 0; zero outside the
/// support.
pub fn barenblatt_value<T: Real>(p: &BarenblattParams<T>, x: T, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument(format!("need t > 0, got {t}")));
    }
    if x < T::zero() {
        return Err(Error::InvalidArgument(format!("need x >= 0, got {x}")));
    }
    let e = p.exponents();
    let c = p.mass_parameter();
    let m = p.m();
    let bracket = c - e.k * x.powf(e.shape) / t.powf(e.shape * e.spread);
    if bracket <= T::zero() {
        return Ok(T::zero());
    }
    Ok(t.powf(-e.decay) * bracket.powf((m - T::one()).recip()))
}

/// Radius at which the profile bracket vanishes.
pub fn barenblatt_support_radius<T: Real>(p: &BarenblattParams<T>, t: T) -> T {
    let e = p.exponents();
    (p.mass_parameter() / e.k).powf(e.shape.recip()) * t.powf(e.spread)
}

/// Sup norm at time t: C^{1/(m-1)} t^{-decay}, attained at x = 0.
pub fn barenblatt_sup<T: Real>(p: &BarenblattParams<T>, t: T) -> T {
    let e = p.exponents();
    p.mass_parameter().powf((p.m() - T::one()).recip()) * t.powf(-e.decay)
}

/// ν-mass of the profile at time t by quadrature over the support
/// (ν = r^{N-1} dr for the radial family, dx for the weighted one).
pub fn barenblatt_nu_mass<T: Real>(p: &BarenblattParams<T>, t: T) -> Result<T> {
    let radius = barenblatt_support_radius(p, t);
    let weight_exp = match *p {
        BarenblattParams::NdRadial { dim, .. } => T::from_u32(dim - 1).unwrap(),
        BarenblattParams::Weighted1d { .. } => T::zero(),
    };
    quad::integrate(
        |x| {
            let u = barenblatt_value(p, x, t).unwrap();
            u * x.powf(weight_exp)
        },
        T::zero(),
        radius,
        T::of(1e-11),
    )
}

/// Largest T such that the support stays within 0.9 of `domain_radius` for
/// all t ≤ T. The 0.9 margin keeps the Neumann data exactly satisfied while
/// leaving room for numerical smearing.
pub fn time_of_confinement<T: Real>(p: &BarenblattParams<T>, domain_radius: T) -> Result<T> {
    if !(domain_radius > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "need positive domain radius, got {domain_radius}"
        )));
    }
    let e = p.exponents();
    let margin = T::of(0.9) * domain_radius;
    let base = margin * (e.k / p.mass_parameter()).powf(e.shape.recip());
    Ok(base.powf(e.spread.recip()))
}

/// Φ_{r,m}(x) = ∫_0^x |y|^{r-1} |y+1|^{(m-1)/2} dy, by adaptive quadrature
/// split at the integrand kinks y ∈ {-1, 0}.
pub fn phi_rm<T: Real>(r: T, m: T, x: T) -> Result<T> {
    if !(r >= T::of(0.5)) || !(m > T::one()) {
        return Err(Error::InvalidArgument(format!(
            "phi needs r >= 1/2 and m > 1, got r={r}, m={m}"
        )));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    let s = (m - T::one()) * T::of(0.5);
    let f = move |y: T| y.abs().powf(r - T::one()) * (y + T::one()).abs().powf(s);
    let tol = T::of(1e-11);
    if x > T::zero() {
        quad::integrate(f, T::zero(), x, tol)
    } else if x >= -T::one() {
        Ok(-(quad::integrate(f, x, T::zero(), tol)?))
    } else {
        let inner = quad::integrate(f, -T::one(), T::zero(), tol)?;
        let outer = quad::integrate(f, x, -T::one(), tol)?;
        Ok(-(inner + outer))
    }
}

/// Margins of the two-sided power bounds for Φ_{r,m} over a sample grid:
///
/// `low  = min over samples of r^{1 + max(1, (m-1)/2)} |Φ| / |x|^r`
/// `high = max over samples of r |Φ| / |x|^r`
///
/// Both are finite and positive whenever the bounds hold; `high` never
/// exceeds (R+1)^{(m-1)/2}.
pub fn phi_bounds_margin<T: Real>(r: T, m: T, big_r: T, samples: &[T]) -> Result<(T, T)> {
    if !(big_r > T::one()) {
        return Err(Error::InvalidArgument(format!(
            "scan radius must exceed 1, got {big_r}"
        )));
    }
    let one = T::one();
    let low_power = one + ((m - one) * T::of(0.5)).max(one);
    let mut low = T::infinity();
    let mut high = T::zero();
    let mut used = 0usize;
    for &x in samples {
        if x == T::zero() || x.abs() > big_r {
            continue;
        }
        used += 1;
        let ratio = phi_rm(r, m, x)?.abs() / x.abs().powf(r);
        let lo = r.powf(low_power) * ratio;
        let hi = r * ratio;
        if lo < low {
            low = lo;
        }
        if hi > high {
            high = hi;
        }
    }
    if used == 0 {
        return Err(Error::InvalidArgument(
            "no nonzero samples inside [-R, R]".into(),
        ));
    }
    Ok((low, high))
}

/// Grid supremum of R(x, y) = x^{-β} y^{1-β} / (x^{-α} y^{1-α} + y) over
/// (0, X]²; log-spaced sampling with `per_decade` points per decade and a
/// fixed span of eight decades below X.
pub fn lemma31_sup<T: Real>(alpha: T, beta: T, x_max: T, per_decade: usize) -> Result<T> {
    if !(beta > T::zero() && alpha > beta && alpha < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < beta < alpha < 1, got alpha={alpha}, beta={beta}"
        )));
    }
    if !(x_max > T::zero()) || per_decade == 0 {
        return Err(Error::InvalidArgument(
            "need positive grid extent and density".into(),
        ));
    }
    let decades = T::of(8.0);
    let lo = x_max * T::of(10.0).powf(-decades);
    let steps = 8 * per_decade;
    let ratio = (x_max / lo).powf(T::from_usize(steps).unwrap().recip());
    let grid: Vec<T> = (0..=steps)
        .map(|i| lo * ratio.powi(i as i32))
        .collect();
    let one = T::one();
    let mut sup = T::zero();
    for &x in &grid {
        for &y in &grid {
            let num = x.powf(-beta) * y.powf(one - beta);
            let den = x.powf(-alpha) * y.powf(one - alpha) + y;
            let r = num / den;
            if r > sup {
                sup = r;
            }
        }
    }
    Ok(sup)
}
