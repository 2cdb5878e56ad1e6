//! Named initial data. Radial recipes feed the whole-space quadrature; box
//! recipes produce an [`NspState`] scaled to `sqrt(E_0^3(0)) = delta`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{NspError, Result};
use crate::model::NspState;
use crate::spectral::{hdot_squared, Grid, SpectralField, ZeroModePolicy};
use crate::symbol::{RadialAmplitude, RadialProfile};

/// Exponent offset that puts s-tail data strictly inside its class.
pub const SHARP_OFFSET: f64 = 0.01;

/// Box spectral width as a fraction of the dealias radius.
const BOX_WIDTH_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "kebab-case")]
pub enum Recipe {
    /// Gaussian density with a gradient velocity; with `s`, both amplitudes
    /// carry the sharp `Hdot^{-s}` power at the origin.
    GaussianGrad { s: Option<f64> },
    /// `|A|^2 = |xi|^{2a} e^{-|xi|^2}` with `a = s - 3/2 + SHARP_OFFSET` on
    /// the velocity and the electric field.
    STail { s: f64 },
    /// Complex Gaussian coefficients times `|k|^{-slope}`; box only.
    Random { seed: u64, slope: f64 },
    Zero,
}

impl Recipe {
    pub fn name(&self) -> &'static str {
        match self {
            Recipe::GaussianGrad { .. } => "gaussian-grad",
            Recipe::STail { .. } => "s-tail",
            Recipe::Random { .. } => "random",
            Recipe::Zero => "zero",
        }
    }

    /// Whole-space profile; the density leads the velocity by a quarter
    /// period.
    pub fn radial(&self) -> Result<RadialProfile> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        match *self {
            Recipe::GaussianGrad { s: Some(s) } => RadialProfile::gaussian_grad(s, SHARP_OFFSET),
            Recipe::GaussianGrad { s: None } => {
                let density = RadialAmplitude::PowerGaussian { scale: 1.0, power: 0.0, width: 1.0 };
                let velocity = RadialAmplitude::PowerGaussian { scale: 1.0, power: 1.0, width: 1.0 };
                RadialProfile::new(density, velocity, half_pi, 0.0)
            }
            // the electric field rho / |xi| carries the tail, so the density
            // is one power steeper than the velocity
            Recipe::STail { s } => RadialProfile::gaussian_grad(s, SHARP_OFFSET),
            Recipe::Zero => RadialProfile::new(RadialAmplitude::Zero, RadialAmplitude::Zero, 0.0, 0.0),
            Recipe::Random { .. } => Err(NspError::InvalidArgument("random data has no radial profile".into())),
        }
    }

    /// Scalar heat amplitude.
    pub fn heat_amplitude(&self) -> Result<RadialAmplitude> {
        match *self {
            Recipe::STail { s } => {
                if !(0.0..1.5).contains(&s) {
                    return Err(NspError::InvalidArgument(format!("s = {s} outside [0, 3/2)")));
                }
                Ok(RadialAmplitude::s_tail(s, SHARP_OFFSET))
            }
            Recipe::GaussianGrad { .. } => Ok(self.radial()?.velocity),
            Recipe::Zero => Ok(RadialAmplitude::Zero),
            Recipe::Random { .. } => Err(NspError::InvalidArgument("random data has no radial profile".into())),
        }
    }

    /// Box state with `sqrt(E_0^3(0)) = delta`.
    pub fn box_state(&self, grid: Grid, delta: f64) -> Result<NspState> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(NspError::InvalidArgument(format!("amplitude {delta} must be finite and >= 0")));
        }
        let (rho, u) = match *self {
            Recipe::Zero => return Ok(NspState::zero(grid)),
            Recipe::Random { seed, slope } => random_pair(grid, seed, slope)?,
            _ => profile_pair(grid, &self.radial()?),
        };
        let state = NspState::new(rho, u, 0.0)?;
        let e = energy_03(&state);
        if e == 0.0 || delta == 0.0 {
            return Ok(NspState::zero(grid));
        }
        let a = delta / e.sqrt();
        NspState::new(state.rho().scaled(a), state.velocity().scaled(a), 0.0)
    }
}

/// `E_0^3 = sum_{k <= 3} ||grad^k (rho, u, grad Phi)||^2`.
pub fn energy_03(state: &NspState) -> f64 {
    (0..=3)
        .map(|k| {
            let policy = if k == 0 { ZeroModePolicy::Include } else { ZeroModePolicy::Exclude };
            [state.rho(), state.velocity(), state.grad_phi()]
                .iter()
                .map(|f| hdot_squared(f, k as f64, policy).expect("nonnegative order"))
                .sum::<f64>()
        })
        .sum()
}

/// Generic direction with no lattice vector orthogonal to it.
const SIGN_AXIS: [f64; 3] = [1.0, std::f64::consts::SQRT_2, 1.732_050_807_568_877_2];

/// Lattice realization of a radial profile. The density takes the odd sign
/// `sgn(k . e)` so that a quarter-period phase stays Hermitian.
fn profile_pair(grid: Grid, profile: &RadialProfile) -> (SpectralField, SpectralField) {
    let kappa = BOX_WIDTH_FRACTION * grid.dealias_radius() * grid.dk();
    let n = grid.len();
    let mut rho = vec![Complex64::default(); n];
    let mut u = vec![vec![Complex64::default(); n]; 3];
    for idx in 1..n {
        if !grid.is_dealiased(idx) {
            continue;
        }
        let k = grid.wavevector(idx);
        let r = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let (dr, v) = profile.mode(r / kappa);
        let sign = (0..3).map(|a| k[a] * SIGN_AXIS[a]).sum::<f64>().signum();
        // odd part of the phase carried by the sign
        rho[idx] = Complex64::new(dr.re, sign * dr.im);
        // i xi_hat . u = v
        for a in 0..3 {
            u[a][idx] = Complex64::new(0.0, -k[a] / r) * v;
        }
    }
    (
        SpectralField::from_components(grid, vec![rho]).expect("finite"),
        SpectralField::from_components(grid, u).expect("finite"),
    )
}

fn random_pair(grid: Grid, seed: u64, slope: f64) -> Result<(SpectralField, SpectralField)> {
    if !(slope.is_finite() && slope >= 0.0) {
        return Err(NspError::InvalidArgument(format!("slope {slope} must be finite and >= 0")));
    }
    let comp = |stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let raw: Vec<Complex64> = (0..grid.len())
            .map(|idx| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                if idx == 0 || !grid.is_dealiased(idx) {
                    Complex64::default()
                } else {
                    Complex64::new(a, b) * (grid.shell(idx) as f64).powf(-0.5 * slope)
                }
            })
            .collect();
        (0..grid.len())
            .map(|idx| 0.5 * (raw[idx] + raw[grid.conjugate_index(idx)].conj()))
            .collect::<Vec<_>>()
    };
    Ok((
        SpectralField::from_components(grid, vec![comp(0)])?,
        SpectralField::from_components(grid, vec![comp(1), comp(2), comp(3)])?,
    ))
}
