//! Closed forms and quadratures for the laws that govern CRT subtrees and
//! their record processes. These serve as oracles for the simulations.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{invalid, Result};
use crate::quad::{integrate, integrate_to_infinity, quad, quad_inf, QuadratureSpec};

/// Density and distribution function evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    pub pdf: f64,
    pub cdf: f64,
}

pub fn rayleigh(x: f64) -> Result<Density> {
    if !(x >= 0.0) {
        return Err(invalid(format!("Rayleigh argument {x} < 0")));
    }
    let tail = (-0.5 * x * x).exp();
    Ok(Density {
        pdf: x * tail,
        cdf: -(-0.5 * x * x).exp_m1(),
    })
}

pub fn rayleigh_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-0.5 * x * x).exp_m1()
    }
}

/// `E[R^k]` for a Rayleigh variable, by quadrature.
pub fn rayleigh_moment(k: u32) -> Result<f64> {
    quad_inf(|x| x.powi(k as i32 + 1) * (-0.5 * x * x).exp(), 0.0)
}

/// Chi law with `2n` degrees of freedom: the law of `L_n`.
pub fn chi2n(n: u32, x: f64) -> Result<Density> {
    if n < 1 {
        return Err(invalid("chi2n needs n >= 1"));
    }
    if !(x >= 0.0) {
        return Err(invalid(format!("chi2n argument {x} < 0")));
    }
    let nf = n as f64;
    let pdf = if x == 0.0 {
        0.0
    } else {
        ((1.0 - nf) * std::f64::consts::LN_2 - ln_gamma(nf) + (2.0 * nf - 1.0) * x.ln() - 0.5 * x * x).exp()
    };
    let cdf = if n == 1 {
        rayleigh_cdf(x)
    } else if x == 0.0 {
        0.0
    } else if x == f64::INFINITY {
        1.0
    } else {
        gamma_lr(nf, 0.5 * x * x)
    };
    Ok(Density { pdf, cdf })
}

/// `E[h_{∅,n}^α] = Γ(α+1) 2^{-α/2} Γ(n-1/2) / Γ(n+α/2-1/2)`.
pub fn h_moment(n: u64, alpha: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("h_moment needs n >= 2, got {n}")));
    }
    if !(alpha > -1.0) {
        return Err(invalid(format!("h_moment needs alpha > -1, got {alpha}")));
    }
    let nf = n as f64;
    let log = ln_gamma(alpha + 1.0) - 0.5 * alpha * std::f64::consts::LN_2 + ln_gamma(nf - 0.5)
        - ln_gamma(nf + 0.5 * alpha - 0.5);
    Ok(log.exp())
}

/// Density of the root-fragment mass at fragmentation time `a`.
pub fn tagged_fragment_pdf(a: f64, v: f64) -> Result<f64> {
    if !(a > 0.0) || !(v > 0.0 && v < 1.0) {
        return Err(invalid(format!(
            "tagged fragment density needs a > 0, 0 < v < 1 (a={a}, v={v})"
        )));
    }
    let w = 1.0 - v;
    Ok(a * (-a * a * v / (2.0 * w)).exp() / ((2.0 * PI).sqrt() * v.sqrt() * w * w.sqrt()))
}

/// `∫_0^1 f_a(v) dv`, with `v = sin²(φ)` absorbing both endpoint behaviours.
pub fn tagged_fragment_mass(a: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
        return Err(invalid(format!("bad interval [{lo}, {hi}]")));
    }
    let to_angle = |v: f64| v.sqrt().asin();
    quad(
        |phi| {
            let (s, c) = phi.sin_cos();
            let v = s * s;
            if v <= 0.0 || v >= 1.0 {
                return 0.0;
            }
            // dv = 2 sin cos dφ
            tagged_fragment_pdf(a, v).map_or(0.0, |f| f * 2.0 * s * c)
        },
        to_angle(lo),
        to_angle(hi),
    )
}

fn check_branch_args(a: f64, x: f64) -> Result<()> {
    if !(a >= 0.0) || !a.is_finite() || !(x >= 0.0) {
        return Err(invalid(format!(
            "branch length law needs a >= 0, x >= 0 (a={a}, x={x})"
        )));
    }
    Ok(())
}

/// `r_a(x) = (a+x) e^{-x²/2 - a x}`: new-branch length given total length `a`.
pub fn branch_length_pdf(a: f64, x: f64) -> Result<f64> {
    check_branch_args(a, x)?;
    Ok((a + x) * (-0.5 * x * x - a * x).exp())
}

pub fn branch_length_cdf(a: f64, x: f64) -> Result<f64> {
    check_branch_args(a, x)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(-(-0.5 * x * x - a * x).exp_m1())
}

/// `∫ x^λ r_a(dx)`.
pub fn branch_length_moment(a: f64, lambda: f64) -> Result<f64> {
    check_branch_args(a, 0.0)?;
    if !(lambda > 0.0) {
        return Err(invalid(format!("moment order {lambda} must be positive")));
    }
    // natural scale of r_a is min(1, 1/a)
    let scale = if a > 1.0 { 1.0 / a } else { 1.0 };
    quad_inf(
        |u| {
            let x = u * scale;
            x.powf(lambda) * (a + x) * (-0.5 * x * x - a * x).exp() * scale
        },
        0.0,
    )
}

/// `E_q[θ(s)] = (1 - e^{-qs})/s`; `q = ∞` gives `1/s`.
pub fn mean_theta_linear(q: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid(format!("position {s} must be positive")));
    }
    if !(q > 0.0) {
        return Err(invalid(format!("level {q} must be positive")));
    }
    if q.is_infinite() {
        return Ok(1.0 / s);
    }
    Ok(-(-q * s).exp_m1() / s)
}

/// Mean of `Θ` on a subtree of scaled mass `v` hanging below level `q`:
/// `√v ∫_0^∞ e^{-x²/2}(1 - e^{-x q √v}) dx`.
pub fn mean_theta_qv(q: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(invalid(format!("mass parameter {v} must be positive")));
    }
    if !(q > 0.0) {
        return Err(invalid(format!("level {q} must be positive")));
    }
    let sv = v.sqrt();
    if q.is_infinite() {
        return Ok((FRAC_PI_2 * v).sqrt());
    }
    let rate = q * sv;
    let spec = QuadratureSpec::with_tol(1e-14, 1e-12);
    let inner = integrate_to_infinity(|x| (-0.5 * x * x).exp() * -(-x * rate).exp_m1(), 0.0, &spec)?;
    Ok(sv * inner.value)
}

/// `(1 - e^{-y})/y`, continuous at 0.
fn decay_ratio(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - 0.5 * y
    } else {
        -(-y).exp_m1() / y
    }
}

/// Derivative of [`decay_ratio`].
fn decay_ratio_prime(y: f64) -> f64 {
    if y < 1e-2 {
        -0.5 + y / 3.0 - y * y / 8.0 + y * y * y / 30.0
    } else {
        ((-y).exp() * (1.0 + y) - 1.0) / (y * y)
    }
}

/// `∫_0^x ((1 - e^{-s})/s - e^{-s}) ds`.
pub fn f_tilde(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("argument {x} < 0")));
    }
    let spec = QuadratureSpec::with_tol(1e-15, 1e-12);
    Ok(integrate(|s| decay_ratio(s) - (-s).exp(), 0.0, x, &spec)?.value)
}

/// `G(x) = ∫_0^x ds ∫_0^s dt (g(t) - g(s))/(s - t)` with `g(y) = (1-e^{-y})/y`.
pub fn g_double(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("argument {x} < 0")));
    }
    let inner_spec = QuadratureSpec::with_tol(1e-15, 1e-12);
    let outer_spec = QuadratureSpec::with_tol(1e-14, 1e-11);
    let mut failure = None;
    let outer = integrate(
        |s| {
            let gs = decay_ratio(s);
            let inner = integrate(
                |t| {
                    let d = s - t;
                    if d < 1e-6 * s.max(1.0) {
                        // removable singularity on the diagonal
                        -decay_ratio_prime(0.5 * (s + t))
                    } else {
                        (decay_ratio(t) - gs) / d
                    }
                },
                0.0,
                s,
                &inner_spec,
            );
            match inner {
                Ok(e) => e.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        x,
        &outer_spec,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(outer.value),
    }
}

/// `F(q,t) = E_q[(∫_0^t θ(s) ds)²] = 2 (F̃(qt) + G(qt))`.
///
/// Under `s ↦ qs` the process started at `q` is `q` times the one started at
/// 1, so `F` depends on `(q, t)` only through `qt`.
pub fn f_qt(q: f64, t: f64) -> Result<f64> {
    if !(q > 0.0) || !(t > 0.0) || !q.is_finite() || !t.is_finite() {
        return Err(invalid(format!("F(q,t) needs finite q, t > 0 (q={q}, t={t})")));
    }
    let x = q * t;
    Ok(2.0 * (f_tilde(x)? + g_double(x)?))
}

/// `E[e^{itZ}] = ∫_0^∞ x e^{-x²/2} e^{-t² x/√2} dx` for the limit law of
/// the fluctuations.
pub fn clt_char_fn(t: f64) -> Result<f64> {
    let rate = t * t / SQRT_2;
    let spec = QuadratureSpec::with_tol(1e-13, 1e-12);
    Ok(integrate_to_infinity(|x| x * (-0.5 * x * x - rate * x).exp(), 0.0, &spec)?.value)
}

/// `(E[Z²], E[Z⁴])` for `Z = 2^{1/4} √Θ G`, from Rayleigh moments.
pub fn z_moments() -> Result<(f64, f64)> {
    let second = SQRT_2 * rayleigh_moment(1)?;
    let fourth = 2.0 * 3.0 * rayleigh_moment(2)?;
    Ok((second, fourth))
}
