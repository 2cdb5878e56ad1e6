//! Power-law decay fits in `log(1 + t)` and the theoretical exponent table.
//!
//! All exponents are for squared norms unless a name says `amplitude`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{NspError, Result};

/// Fewest samples a fit accepts.
pub const MIN_SAMPLES: usize = 10;
/// Earliest admissible window start.
pub const MIN_WINDOW_START: f64 = 5.0;
/// Default tolerance on squared-norm exponents.
pub const DEFAULT_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    pub fn new(t_lo: f64, t_hi: f64) -> Result<Self> {
        if !(t_lo >= MIN_WINDOW_START && t_hi > t_lo && t_hi.is_finite()) {
            return Err(NspError::InvalidArgument(format!(
                "window [{t_lo}, {t_hi}] must satisfy {MIN_WINDOW_START} <= t_lo < t_hi < inf"
            )));
        }
        Ok(Self { t_lo, t_hi })
    }

    /// `[10, 10^3]`.
    pub fn quadrature() -> Self {
        Self { t_lo: 10.0, t_hi: 1e3 }
    }

    /// `[5, t_max]` for a box of the given validity horizon.
    pub fn for_box(t_max: f64) -> Result<Self> {
        Self::new(MIN_WINDOW_START, t_max)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_lo && t <= self.t_hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `2 log norm` against `log(1 + t)`.
    pub exponent: f64,
    /// Half-width of the 95% interval on the slope.
    pub ci: f64,
    pub window: Window,
    pub samples: usize,
    pub target: Option<f64>,
    pub tol: Option<f64>,
    pub pass: Option<bool>,
}

impl DecayFit {
    pub fn amplitude_exponent(&self) -> f64 {
        0.5 * self.exponent
    }

    /// Attaches a target and its verdict.
    pub fn judged(mut self, target: f64, tol: f64) -> Self {
        self.pass = Some(compare(&self, target, tol));
        self.target = Some(target);
        self.tol = Some(tol);
        self
    }
}

pub fn fit(times: &[f64], norms: &[f64], window: Window) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(NspError::Shape(format!("{} times but {} norms", times.len(), norms.len())));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(norms) {
        if !window.contains(t) {
            continue;
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(NspError::InvalidArgument(format!("norm {v} at t = {t} is not positive")));
        }
        xs.push((1.0 + t).ln());
        ys.push(2.0 * v.ln());
    }
    let n = xs.len();
    if n < MIN_SAMPLES {
        return Err(NspError::InsufficientSamples { found: n, needed: MIN_SAMPLES });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(NspError::InvalidArgument("window holds a single distinct time".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = nf - 2.0;
    let t_crit = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| NspError::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.975);
    let ci = t_crit * (sse / dof / sxx).sqrt();
    Ok(DecayFit {
        exponent: slope,
        ci,
        window,
        samples: n,
        target: None,
        tol: None,
        pass: None,
    })
}

/// Closed tolerance, up to rounding in the difference itself.
pub fn compare(fit: &DecayFit, target: f64, tol: f64) -> bool {
    let slack = 4.0 * f64::EPSILON * fit.exponent.abs().max(target.abs()).max(tol);
    (fit.exponent - target).abs() <= tol + slack
}

/// `sup / first` of a norm series inside the window; the check used when the
/// target exponent is zero.
pub fn boundedness_ratio(times: &[f64], norms: &[f64], window: Window) -> Result<f64> {
    let inside: Vec<f64> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| window.contains(**t))
        .map(|(_, &v)| v)
        .collect();
    let Some(&first) = inside.first() else {
        return Err(NspError::InsufficientSamples { found: 0, needed: 1 });
    };
    if !(first > 0.0) {
        return Err(NspError::InvalidArgument("first norm in window is not positive".into()));
    }
    Ok(inside.iter().fold(0.0, |a: f64, &v| a.max(v / first)))
}

/// Class of initial data that sets the decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataClass {
    /// Data in `Hdot^{-s}`, `0 <= s < 3/2`.
    NegativeSobolev(f64),
    /// Data in `L^p`, `1 < p <= 2`.
    Lebesgue(f64),
}

impl DataClass {
    /// The Sobolev index, `s = 3 (1/p - 1/2)` for Lebesgue data.
    pub fn s_index(&self) -> Result<f64> {
        match *self {
            DataClass::NegativeSobolev(s) if (0.0..1.5).contains(&s) => Ok(s),
            DataClass::Lebesgue(p) if p > 1.0 && p <= 2.0 => Ok(3.0 * (1.0 / p - 0.5)),
            other => Err(NspError::InvalidArgument(format!("{other:?} outside 0 <= s < 3/2 or 1 < p <= 2"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `||grad^l (rho, u, grad Phi)||` in `H^{N-l}`.
    Triple,
    /// `||grad^l u||`.
    Velocity,
    /// `||grad^l grad Phi||`.
    ElectricField,
    /// `||grad^l rho||_{L^2}`.
    Density,
    /// `||rho||_{L^inf}`.
    DensityLinf,
    /// `||(u, grad Phi)||_{L^inf}`.
    VelocityLinf,
}

/// `3/2 (1/p - 1/2) + l/2`.
pub fn sigma_pl(p: f64, ell: u32) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(NspError::InvalidArgument(format!("p = {p} outside (1, 2]")));
    }
    Ok(1.5 * (1.0 / p - 0.5) + 0.5 * ell as f64)
}

/// Squared-norm exponent of `quantity` at derivative order `ell` for data of
/// the given class, with `n_max` derivatives controlled.
pub fn theory_target(quantity: Quantity, ell: u32, data: DataClass, n_max: u32) -> Result<f64> {
    let s = data.s_index()?;
    let l = ell as f64;
    let max_ell = match quantity {
        Quantity::Triple | Quantity::Velocity | Quantity::ElectricField => n_max.checked_sub(1),
        Quantity::Density => n_max.checked_sub(2),
        Quantity::DensityLinf | Quantity::VelocityLinf => Some(0),
    };
    if max_ell.is_none_or(|m| ell > m) {
        return Err(NspError::InvalidArgument(format!(
            "l = {ell} out of range for {quantity:?} with N = {n_max}"
        )));
    }
    let amplitude = match quantity {
        Quantity::Triple | Quantity::Velocity | Quantity::ElectricField => -(l + s) / 2.0,
        Quantity::Density => -(l + s + 1.0) / 2.0,
        // 3/(2p) = s/2 + 3/4
        Quantity::DensityLinf => -(s / 2.0 + 0.75) - 0.5,
        Quantity::VelocityLinf => -(s / 2.0 + 0.75),
    };
    Ok(2.0 * amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..200).map(|i| 10f64.powf(1.0 + 2.0 * i as f64 / 199.0)).collect();
        let v = t.iter().map(|&t| f(t)).collect();
        (t, v)
    }

    #[test]
    fn exact_power_law() {
        let (t, v) = series(|t| (1.0 + t).powf(-0.75));
        let f = fit(&t, &v, Window::quadrature()).unwrap();
        assert!((f.exponent + 1.5).abs() < 1e-6);
        assert!(f.ci < 1e-6);
    }

    #[test]
    fn perturbed_power_law() {
        let (t, v) = series(|t| (1.0 + t).powi(-1) * (1.0 + 0.01 * t.ln().sin()));
        let f = fit(&t, &v, Window::quadrature()).unwrap();
        assert!((f.exponent + 2.0).abs() < 0.02, "{}", f.exponent);
    }

    #[test]
    fn constant_series() {
        let (t, v) = series(|_| 3.0);
        let f = fit(&t, &v, Window::quadrature()).unwrap();
        assert!(f.exponent.abs() < 1e-14);
        assert!(boundedness_ratio(&t, &v, Window::quadrature()).unwrap() == 1.0);
    }

    #[test]
    fn fit_rejections() {
        let (t, v) = series(|t| 1.0 / t);
        assert!(matches!(
            fit(&t[..5], &v[..5], Window::quadrature()),
            Err(NspError::InsufficientSamples { .. })
        ));
        let mut bad = v.clone();
        bad[50] = 0.0;
        assert!(fit(&t, &bad, Window::quadrature()).is_err());
        assert!(Window::new(1.0, 10.0).is_err());
        assert!(fit(&t, &v[..10], Window::quadrature()).is_err());
    }

    #[test]
    fn compare_is_closed() {
        let f = DecayFit {
            exponent: -1.5,
            ci: 0.0,
            window: Window::quadrature(),
            samples: 10,
            target: None,
            tol: None,
            pass: None,
        };
        assert!(compare(&f, -1.5, 0.1));
        assert!(!compare(&f, -1.3, 0.1));
        assert!(compare(&f, -1.4, 0.1));
        assert!(compare(&f, -1.6, 0.1));
        let j = f.judged(-1.2, 0.1);
        assert_eq!(j.pass, Some(false));
    }

    #[test]
    fn target_table() {
        let half = DataClass::NegativeSobolev(0.5);
        assert_eq!(theory_target(Quantity::Velocity, 0, half, 3).unwrap(), -0.5);
        assert_eq!(theory_target(Quantity::Density, 0, half, 3).unwrap(), -1.5);
        assert_eq!(theory_target(Quantity::Triple, 2, half, 3).unwrap(), -2.5);
        // p = 2 is s = 0: velocity bounded, density gains a half
        let l2 = DataClass::Lebesgue(2.0);
        assert_eq!(theory_target(Quantity::Velocity, 0, l2, 3).unwrap(), 0.0);
        assert_eq!(theory_target(Quantity::Density, 0, l2, 3).unwrap(), -1.0);
        let p65 = DataClass::Lebesgue(1.2);
        assert!((DataClass::Lebesgue(1.2).s_index().unwrap() - 1.0).abs() < 1e-15);
        assert!((theory_target(Quantity::Velocity, 1, p65, 3).unwrap() + 2.0 * sigma_pl(1.2, 1).unwrap()).abs() < 1e-15);
        assert!((theory_target(Quantity::DensityLinf, 0, p65, 3).unwrap() + 2.0 * (1.5 / 1.2 + 0.5)).abs() < 1e-14);
        assert!((theory_target(Quantity::VelocityLinf, 0, p65, 3).unwrap() + 2.0 * (1.5 / 1.2)).abs() < 1e-14);
    }

    #[test]
    fn target_ranges() {
        let d = DataClass::NegativeSobolev(0.5);
        assert!(theory_target(Quantity::Velocity, 3, d, 3).is_err());
        assert!(theory_target(Quantity::Density, 2, d, 3).is_err());
        assert!(theory_target(Quantity::DensityLinf, 1, d, 3).is_err());
        assert!(theory_target(Quantity::Velocity, 0, DataClass::NegativeSobolev(1.5), 3).is_err());
        assert!(theory_target(Quantity::Velocity, 0, DataClass::Lebesgue(1.0), 3).is_err());
        assert!(sigma_pl(2.5, 0).is_err());
    }
}
