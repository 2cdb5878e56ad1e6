//! Whole-space norms of radially symmetric linear solutions.
//!
//! A mode at `|xi| = r` carries `(rho_0, v_0)`, with `v` the longitudinal
//! velocity of the symbol module. Norms are reduced to
//! `||Lambda^sigma grad^l q||^2 = 4 pi int r^{2(l + sigma)} |q(r)|^2 r^2 dr`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quad::integrate;
use super::LinearSymbol;
use crate::error::{NspError, Result};
use crate::model::PhysParams;

const PANEL_TOL: f64 = 1e-10;
/// Lower cut relative to the peak of `r F(r)`; below it `F` is a pure power.
const LOWER_CUT: f64 = 1e-8;
const UPPER_DROP: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialAmplitude {
    Zero,
    /// `scale r^power exp(-r^2 / (2 width^2))`.
    PowerGaussian { scale: f64, power: f64, width: f64 },
}

impl RadialAmplitude {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialAmplitude::Zero => 0.0,
            RadialAmplitude::PowerGaussian { scale, power, width } => {
                scale * r.powf(power) * (-r * r / (2.0 * width * width)).exp()
            }
        }
    }

    /// `|A|^2 = r^{2s - 3 + 2 offset} exp(-r^2)`: in `Hdot^{-s'}` exactly for
    /// `s' < s + offset`.
    pub fn s_tail(s: f64, offset: f64) -> Self {
        RadialAmplitude::PowerGaussian {
            scale: 1.0,
            power: s - 1.5 + offset,
            width: 1.0,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        match *self {
            RadialAmplitude::Zero => RadialAmplitude::Zero,
            RadialAmplitude::PowerGaussian { scale, power, width } => RadialAmplitude::PowerGaussian {
                scale: scale * a,
                power,
                width,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub density: RadialAmplitude,
    pub velocity: RadialAmplitude,
    /// Phase of `rho_0` relative to `v_0`.
    pub phase: f64,
    pub s_index: f64,
}

impl RadialProfile {
    /// Validates `s_index` in `[0, 3/2)` and that every component has a
    /// finite `Hdot^{-s}` norm.
    pub fn new(density: RadialAmplitude, velocity: RadialAmplitude, phase: f64, s_index: f64) -> Result<Self> {
        if !(0.0..1.5).contains(&s_index) {
            return Err(NspError::InvalidArgument(format!("s must lie in [0, 3/2), got {s_index}")));
        }
        let p = Self {
            density,
            velocity,
            phase,
            s_index,
        };
        for amp in [density, velocity] {
            radial_integral(|r| r.powf(-2.0 * s_index) * amp.eval(r).powi(2) * r * r)?;
        }
        // electric field carries rho / r
        radial_integral(|r| r.powf(-2.0 * s_index - 2.0) * density.eval(r).powi(2) * r * r)?;
        Ok(p)
    }

    /// Gradient data `u_0 = grad g` in the sharp `Hdot^{-s}` class, with the
    /// density a quarter period ahead of the velocity:
    /// `|v_0|^2 = r^{2s-3+2e} exp(-r^2)` and `|rho_0| = r |v_0|`.
    pub fn gaussian_grad(s: f64, offset: f64) -> Result<Self> {
        let velocity = RadialAmplitude::s_tail(s, offset);
        let density = RadialAmplitude::s_tail(s + 1.0, offset);
        Self::new(density, velocity, std::f64::consts::FRAC_PI_2, s)
    }

    pub fn mode(&self, r: f64) -> (Complex64, Complex64) {
        let rho = Complex64::from_polar(self.density.eval(r), self.phase);
        (rho, Complex64::new(self.velocity.eval(r), 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialNorms {
    pub density: f64,
    pub velocity: f64,
    pub electric: f64,
}

/// `int_0^inf F(r) dr` for an integrand that behaves like a power of `r` near
/// the origin and decays like a Gaussian. Quadrature runs in `ln r`; the
/// part below `LOWER_CUT` times the peak is integrated analytically.
pub(crate) fn radial_integral(f: impl Fn(f64) -> f64) -> Result<f64> {
    let g = |y: f64| {
        let r = y.exp();
        f(r) * r
    };
    let (y0, y1, samples) = (-12.0 * std::f64::consts::LN_10, 4.0 * std::f64::consts::LN_10, 481);
    let mut peak = (f64::NEG_INFINITY, y0);
    for i in 0..samples {
        let y = y0 + (y1 - y0) * i as f64 / (samples - 1) as f64;
        let v = g(y);
        if !v.is_finite() {
            return Err(NspError::Divergent(format!("integrand not finite at r = {:.3e}", y.exp())));
        }
        if v > peak.0 {
            peak = (v, y);
        }
    }
    let (gmax, ypeak) = peak;
    if gmax <= 0.0 {
        return Ok(0.0);
    }
    let rpeak = ypeak.exp();

    let mut rhi = rpeak * 2.0;
    while g(rhi.ln()) > UPPER_DROP * gmax {
        rhi *= 2.0;
        if rhi > 1e8 {
            return Err(NspError::Divergent("integrand does not decay at large r".into()));
        }
    }

    let rlo = LOWER_CUT * rpeak;
    let flo = f(rlo);
    let tail = if flo == 0.0 {
        0.0
    } else {
        let q = (flo / f(0.5 * rlo)).ln() / std::f64::consts::LN_2;
        if !(q > -1.0 + 1e-9) {
            return Err(NspError::Divergent(format!(
                "integrand behaves like r^{q:.4} at the origin"
            )));
        }
        flo * rlo / (q + 1.0)
    };
    let body = integrate(g, rlo.ln(), rhi.ln(), PANEL_TOL)?;
    Ok(body.value + tail)
}

fn check_order(ell: f64, sigma: f64) -> Result<()> {
    if !(ell >= 0.0 && ell.is_finite() && sigma.is_finite() && ell + sigma > -1.5) {
        return Err(NspError::InvalidArgument(format!(
            "need l >= 0 and l + sigma > -3/2, got l = {ell}, sigma = {sigma}"
        )));
    }
    Ok(())
}

/// `||Lambda^sigma grad^l q(t)||` for the density, longitudinal velocity and
/// electric field of the linear flow started from `profile`.
pub fn radial_norm(profile: &RadialProfile, params: &PhysParams, t: f64, ell: f64, sigma: f64) -> Result<RadialNorms> {
    check_order(ell, sigma)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(NspError::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    params.validate()?;
    let state = |r: f64| -> (f64, f64) {
        let (rho0, v0) = profile.mode(r);
        let m = LinearSymbol::radial(r, params)
            .expect("r > 0")
            .comp_propagator(t);
        let rho = m[0][0] * rho0 + m[0][1] * v0;
        let v = m[1][0] * rho0 + m[1][1] * v0;
        (rho.norm_sqr(), v.norm_sqr())
    };
    let weight = |r: f64| r.powf(2.0 * (ell + sigma)) * r * r;
    let four_pi = 4.0 * std::f64::consts::PI;
    let density = radial_integral(|r| weight(r) * state(r).0)?;
    let velocity = radial_integral(|r| weight(r) * state(r).1)?;
    let electric = radial_integral(|r| weight(r) * state(r).0 / (r * r))?;
    Ok(RadialNorms {
        density: (four_pi * density).sqrt(),
        velocity: (four_pi * velocity).sqrt(),
        electric: (four_pi * electric).sqrt(),
    })
}

/// `||grad^l u(t)||` for the heat flow `u_t = Lap u` with radial data.
pub fn heat_evolve(amplitude: &RadialAmplitude, t: f64, ell: f64) -> Result<f64> {
    check_order(ell, 0.0)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(NspError::InvalidArgument(format!("time must be nonnegative, got {t}")));
    }
    let v = radial_integral(|r| r.powf(2.0 * ell) * amplitude.eval(r).powi(2) * (-2.0 * r * r * t).exp() * r * r)?;
    Ok((4.0 * std::f64::consts::PI * v).sqrt())
}
