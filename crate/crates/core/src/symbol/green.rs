//! Measured constants of the mode-wise Green-function envelopes.
//!
//! For `|xi| <= eta` the density is compared against
//! `e^{-(mu + lambda/2)|xi|^2 t} (|rho_0| + |xi| |u_0|)` and the velocity
//! against `e^{-mu |xi|^2 t} (|rho_0| / |xi| + |u_0|)`; for `|xi| >= eta`
//! both against `e^{-R_0 t} (|rho_0| + |u_0|)`. The worst case over data of
//! unit weight is the largest weighted entry of the propagator row.

use serde::{Deserialize, Serialize};

use super::{regime_threshold, LinearSymbol};
use crate::error::{NspError, Result};
use crate::model::PhysParams;

/// Relative slack on the late-time monotonicity test.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenReport {
    pub eta: f64,
    /// `-max Re(spectrum)` over the grid points with `|xi| >= eta`.
    pub r0: Option<f64>,
    pub density_small: f64,
    pub velocity_small: f64,
    pub density_large: f64,
    pub velocity_large: f64,
    /// Largest envelope ratio over all four bounds.
    pub max_ratio: f64,
    /// Largest ratio of the propagator itself, which the envelope dominates.
    pub sampled_max: f64,
    pub times: Vec<f64>,
    /// Envelope ratio at each time, maximized over wavenumbers and bounds.
    pub ratio_by_time: Vec<f64>,
    pub sampled_by_time: Vec<f64>,
    /// Whether `ratio_by_time` never increases over the last decade of time.
    pub late_non_increasing: bool,
}

impl GreenReport {
    pub fn passes(&self, bound: f64) -> bool {
        self.max_ratio.is_finite()
            && self.max_ratio <= bound
            && self.late_non_increasing
            && self.r0.is_some_and(|r| r > 0.0)
    }
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

struct Ratios {
    density: f64,
    velocity: f64,
}

fn small_ratios(m: [[f64; 2]; 2], r: f64, heat: f64) -> Ratios {
    Ratios {
        density: m[0][0].abs().max(m[0][1].abs() / r),
        velocity: (r * m[1][0].abs()).max(m[1][1].abs()).max(heat),
    }
}

fn large_ratios(m: [[f64; 2]; 2], heat: f64) -> Ratios {
    Ratios {
        density: m[0][0].abs().max(m[0][1].abs()),
        velocity: m[1][0].abs().max(m[1][1].abs()).max(heat),
    }
}

pub fn green_bound_check(params: &PhysParams, xi_grid: &[f64], t_grid: &[f64]) -> Result<GreenReport> {
    params.validate()?;
    if xi_grid.is_empty() || t_grid.is_empty() {
        return Err(NspError::InvalidArgument("empty wavenumber or time grid".into()));
    }
    if xi_grid.iter().any(|&r| !(r > 0.0 && r.is_finite())) || t_grid.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(NspError::InvalidArgument("grids need positive wavenumbers and nonnegative times".into()));
    }
    let eta = regime_threshold(params.nu());
    let symbols = xi_grid
        .iter()
        .map(|&r| LinearSymbol::radial(r, params))
        .collect::<Result<Vec<_>>>()?;
    let r0 = symbols
        .iter()
        .filter(|s| s.magnitude() >= eta)
        .map(|s| -s.spectral_abscissa())
        .reduce(f64::min);

    let mut report = GreenReport {
        eta,
        r0,
        density_small: 0.0,
        velocity_small: 0.0,
        density_large: 0.0,
        velocity_large: 0.0,
        max_ratio: 0.0,
        sampled_max: 0.0,
        times: t_grid.to_vec(),
        ratio_by_time: Vec::with_capacity(t_grid.len()),
        sampled_by_time: Vec::with_capacity(t_grid.len()),
        late_non_increasing: true,
    };
    for &t in t_grid {
        let mut env_t: f64 = 0.0;
        let mut raw_t: f64 = 0.0;
        for s in &symbols {
            let r = s.magnitude();
            if r <= eta {
                let comp = s.comp_rate();
                let env = small_ratios(s.comp_envelope(t, comp), r, 0.0);
                let raw = small_ratios(s.comp_propagator_shifted(t, comp), r, 0.0);
                // the velocity bound carries the solenoidal exponent
                let vshift = -s.heat_rate();
                let venv = small_ratios(s.comp_envelope(t, vshift), r, 1.0);
                let vraw = small_ratios(s.comp_propagator_shifted(t, vshift), r, 1.0);
                report.density_small = report.density_small.max(env.density);
                report.velocity_small = report.velocity_small.max(venv.velocity);
                env_t = env_t.max(env.density).max(venv.velocity);
                raw_t = raw_t.max(raw.density).max(vraw.velocity);
            } else {
                let shift = r0.expect("grid point above eta");
                let heat = ((s.heat_rate() + shift) * t).exp();
                let env = large_ratios(s.comp_envelope(t, shift), heat);
                let raw = large_ratios(s.comp_propagator_shifted(t, shift), heat);
                report.density_large = report.density_large.max(env.density);
                report.velocity_large = report.velocity_large.max(env.velocity);
                env_t = env_t.max(env.density).max(env.velocity);
                raw_t = raw_t.max(raw.density).max(raw.velocity);
            }
        }
        report.ratio_by_time.push(env_t);
        report.sampled_by_time.push(raw_t);
    }
    report.max_ratio = report.ratio_by_time.iter().cloned().fold(0.0, f64::max);
    report.sampled_max = report.sampled_by_time.iter().cloned().fold(0.0, f64::max);

    let t_last = t_grid.iter().cloned().fold(0.0, f64::max);
    let late: Vec<(f64, f64)> = t_grid
        .iter()
        .zip(&report.ratio_by_time)
        .filter(|(&t, _)| t >= t_last / 10.0)
        .map(|(&t, &v)| (t, v))
        .collect();
    let mut late = late;
    late.sort_by(|a, b| a.0.total_cmp(&b.0));
    report.late_non_increasing = late
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 * (1.0 + MONOTONE_SLACK));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PressureLaw;

    fn standard_grids() -> (Vec<f64>, Vec<f64>) {
        let xi = log_spaced(1e-3, 10.0, 40);
        let mut t = vec![0.0];
        t.extend(log_spaced(1e-2, 1e4, 39));
        (xi, t)
    }

    #[test]
    fn default_viscosities_pass() {
        let (xi, t) = standard_grids();
        let rep = green_bound_check(&PhysParams::default(), &xi, &t).unwrap();
        assert!(rep.passes(10.0), "{rep:?}");
        assert!(rep.sampled_max <= rep.max_ratio * (1.0 + 1e-12));
        let r0 = rep.r0.unwrap();
        assert!(r0 > 0.0 && r0 < 1.0);
    }

    #[test]
    fn measured_r0_matches_eigenvalue_sweep() {
        let p = PhysParams::default();
        let xi = log_spaced(1.0, 10.0, 25);
        let rep = green_bound_check(&p, &xi, &[0.0, 1.0]).unwrap();
        // oracle: eigenvalues of the real 2x2 block from the quadratic formula
        let oracle = xi
            .iter()
            .filter(|&&r| r >= rep.eta)
            .map(|&r| {
                let (tr, det) = (-2.0 * r * r, r * r + 1.0);
                let disc = tr * tr / 4.0 - det;
                let top = if disc >= 0.0 { tr / 2.0 + disc.sqrt() } else { tr / 2.0 };
                (-top).min(r * r)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((rep.r0.unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn density_ratio_at_small_frequency_is_bounded() {
        let p = PhysParams::default();
        let s = LinearSymbol::radial(1e-2, &p).unwrap();
        let t = log_spaced(1e-2, 1e4, 60);
        for &t in &t {
            let m = s.comp_propagator_shifted(t, s.comp_rate());
            assert!(m[0][0].abs() <= 10.0);
        }
    }

    #[test]
    fn solenoidal_data_ratio_is_one() {
        use num_complex::Complex64;
        let p = PhysParams::new(1.0, 0.0, PressureLaw::Linear).unwrap();
        let s = LinearSymbol::new([0.0, 0.3, 0.0], &p).unwrap();
        let u0 = [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::new(0.0, -2.0)];
        let norm0 = (u0[0].norm_sqr() + u0[2].norm_sqr()).sqrt();
        for t in [0.0, 1.0, 100.0] {
            let (_, u) = s.evolve(Complex64::default(), u0, t).unwrap();
            let n = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let ratio = n / ((s.heat_rate() * t).exp() * norm0);
            assert!((ratio - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_empty_grids() {
        assert!(green_bound_check(&PhysParams::default(), &[], &[1.0]).is_err());
        assert!(green_bound_check(&PhysParams::default(), &[1.0], &[]).is_err());
    }
}
