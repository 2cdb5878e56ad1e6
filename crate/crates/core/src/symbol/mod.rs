//! Per-wavenumber analysis of the linearized system.
//!
//! With `xh = xi / |xi|`, `r = |xi|` and the longitudinal variable
//! `v = i xh.u`, the generator splits into two solenoidal heat modes with
//! rate `-mu r^2` and the compressible block
//!
//! ```text
//! d/dt (rho, v) = [[0, -r], [r + 1/r, -nu r^2]] (rho, v),   nu = 2 mu + lambda,
//! ```
//!
//! whose trace is `-nu r^2` and determinant `r^2 + 1`.

mod green;
mod quad;
mod radial;

use num_complex::Complex64;

use crate::error::{NspError, Result};
use crate::model::PhysParams;

pub use green::{green_bound_check, log_spaced, GreenReport};
pub use quad::{integrate, QuadResult};
pub use radial::{heat_evolve, radial_norm, RadialAmplitude, RadialNorms, RadialProfile};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative eigenvalue gap below which the Jordan-block formula is used.
pub const JORDAN_TOL: f64 = 1e-8;

/// `|xi|` where the compressible eigenvalues turn from a complex pair into
/// two real ones: `nu^2 r^4 / 4 = r^2 + 1`.
pub fn regime_threshold(nu: f64) -> f64 {
    (2.0 * (1.0 + (1.0 + nu * nu).sqrt()) / (nu * nu)).sqrt()
}

/// Eigenvalue structure of the compressible block, `tau = -nu r^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Branch {
    /// Complex pair `tau +- i omega`.
    Oscillatory { omega: f64 },
    /// Real pair `tau +- delta`.
    Real { delta: f64 },
    /// Double eigenvalue `tau`.
    Jordan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSymbol {
    xi: [f64; 3],
    r: f64,
    mu: f64,
    lambda: f64,
}

impl LinearSymbol {
    pub fn new(xi: [f64; 3], params: &PhysParams) -> Result<Self> {
        params.validate()?;
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if !(r > 0.0 && r.is_finite()) {
            return Err(NspError::InvalidArgument(format!(
                "symbol needs a finite nonzero wavevector, got {xi:?}"
            )));
        }
        Ok(Self {
            xi,
            r,
            mu: params.mu,
            lambda: params.lambda,
        })
    }

    /// Symbol at `xi = (r, 0, 0)`; the analysis depends on `|xi|` only.
    pub fn radial(r: f64, params: &PhysParams) -> Result<Self> {
        Self::new([r, 0.0, 0.0], params)
    }

    pub fn xi(&self) -> [f64; 3] {
        self.xi
    }

    pub fn magnitude(&self) -> f64 {
        self.r
    }

    pub fn nu(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// Rate of both solenoidal modes.
    pub fn heat_rate(&self) -> f64 {
        -self.mu * self.r * self.r
    }

    pub fn comp_block(&self) -> [[f64; 2]; 2] {
        let r = self.r;
        [[0.0, -r], [r + 1.0 / r, -self.nu() * r * r]]
    }

    fn tau(&self) -> f64 {
        -0.5 * self.nu() * self.r * self.r
    }

    /// `tau^2 - det`; negative in the oscillatory regime.
    fn discriminant(&self) -> f64 {
        let t = self.tau();
        t * t - (self.r * self.r + 1.0)
    }

    pub(crate) fn branch(&self) -> Branch {
        let d = self.discriminant();
        let tau = self.tau();
        let scale = (tau * tau + d.abs()).sqrt().max(f64::MIN_POSITIVE);
        let gap = 2.0 * d.abs().sqrt();
        if gap < JORDAN_TOL * scale {
            Branch::Jordan
        } else if d < 0.0 {
            Branch::Oscillatory { omega: (-d).sqrt() }
        } else {
            Branch::Real { delta: d.sqrt() }
        }
    }

    /// Eigenvalues `(lambda_+, lambda_-)` of the compressible block, ordered
    /// by real part and then by imaginary part.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let tau = self.tau();
        let d = self.discriminant();
        if d >= 0.0 {
            // tau - sqrt(d) loses digits when r is large; use the product.
            let big = tau - d.sqrt();
            let det = self.r * self.r + 1.0;
            (Complex64::new(det / big, 0.0), Complex64::new(big, 0.0))
        } else {
            let w = (-d).sqrt();
            (Complex64::new(tau, w), Complex64::new(tau, -w))
        }
    }

    /// Largest real part over the whole 4x4 spectrum.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues().0.re.max(self.heat_rate())
    }

    /// Full generator acting on `(rho, u_1, u_2, u_3)`.
    pub fn matrix(&self) -> [[Complex64; 4]; 4] {
        let xi = self.xi;
        let r2 = self.r * self.r;
        let mut m = [[Complex64::default(); 4]; 4];
        for j in 0..3 {
            m[0][j + 1] = -I * xi[j];
            m[j + 1][0] = -I * xi[j] * (1.0 + 1.0 / r2);
            for k in 0..3 {
                let diag = if j == k { self.mu * r2 } else { 0.0 };
                m[j + 1][k + 1] = Complex64::new(-diag - (self.mu + self.lambda) * xi[j] * xi[k], 0.0);
            }
        }
        m
    }

    /// Generator applied to one mode.
    pub fn apply(&self, rho: Complex64, u: [Complex64; 3]) -> (Complex64, [Complex64; 3]) {
        let m = self.matrix();
        let x = [rho, u[0], u[1], u[2]];
        let row = |i: usize| (0..4).map(|j| m[i][j] * x[j]).sum::<Complex64>();
        (row(0), [row(1), row(2), row(3)])
    }

    /// `(scale, c, s)` with `e^{shift t} exp(B t) = scale (c I + s (B - tau I))`.
    /// On the real branch the exponentials are folded into `c` and `s` and
    /// `scale = 1`. The shift enters every exponent before evaluation, so
    /// ratios against decaying envelopes neither overflow nor underflow.
    fn coefficients_for(&self, branch: Branch, t: f64, shift: f64) -> (f64, f64, f64) {
        let tau = self.tau() + shift;
        match branch {
            Branch::Jordan => ((tau * t).exp(), 1.0, t),
            Branch::Oscillatory { omega } => {
                let (sin, cos) = (omega * t).sin_cos();
                ((tau * t).exp(), cos, sin / omega)
            }
            Branch::Real { delta } => {
                // e^{tau t} cosh(delta t) = (e^{(tau+delta)t} + e^{(tau-delta)t}) / 2
                let lo = ((tau - delta) * t).exp();
                let hi = ((tau + delta) * t).exp();
                let c = 0.5 * (hi + lo);
                let s = if 2.0 * delta * t < 1.0 {
                    lo * (2.0 * delta * t).exp_m1() / (2.0 * delta)
                } else {
                    (hi - lo) / (2.0 * delta)
                };
                (1.0, c, s)
            }
        }
    }

    /// `B - tau I`, whose square is `(tau^2 - det) I`.
    fn shifted_block(&self) -> [[f64; 2]; 2] {
        let r = self.r;
        let tau = self.tau();
        [[-tau, -r], [r + 1.0 / r, tau]]
    }

    /// `exp(B t)` for the compressible block.
    pub fn comp_propagator(&self, t: f64) -> [[f64; 2]; 2] {
        self.comp_propagator_shifted(t, 0.0)
    }

    /// `e^{shift t} exp(B t)`.
    pub fn comp_propagator_shifted(&self, t: f64, shift: f64) -> [[f64; 2]; 2] {
        self.propagator_for(self.branch(), t, shift)
    }

    fn propagator_for(&self, branch: Branch, t: f64, shift: f64) -> [[f64; 2]; 2] {
        let (scale, c, s) = self.coefficients_for(branch, t, shift);
        let b = self.shifted_block();
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                out[i][j] = scale * (c * id + s * b[i][j]);
            }
        }
        out
    }

    /// Entry-wise bound on `e^{shift t} |exp(B t)|` that is attained for some
    /// phase of the oscillation: `sqrt(a^2 + b^2)` for `a cos + b sin`, and
    /// the sum of the two exponential magnitudes on the real branch.
    pub fn comp_envelope(&self, t: f64, shift: f64) -> [[f64; 2]; 2] {
        let b = self.shifted_block();
        let tau = self.tau() + shift;
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                out[i][j] = match self.branch() {
                    Branch::Jordan => (id + b[i][j].abs() * t) * (tau * t).exp(),
                    Branch::Oscillatory { omega } => id.hypot(b[i][j] / omega) * (tau * t).exp(),
                    Branch::Real { delta } => {
                        let p = 0.5 * (id + b[i][j] / delta);
                        let q = 0.5 * (id - b[i][j] / delta);
                        p.abs() * ((tau + delta) * t).exp() + q.abs() * ((tau - delta) * t).exp()
                    }
                };
            }
        }
        out
    }

    /// `-tau`, the decay rate of the compressible pair for `|xi|` below the
    /// regime threshold.
    pub fn comp_rate(&self) -> f64 {
        -self.tau()
    }

    /// Exact linear evolution of one mode.
    pub fn evolve(&self, rho0: Complex64, u0: [Complex64; 3], t: f64) -> Result<(Complex64, [Complex64; 3])> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(NspError::InvalidArgument(format!("time must be nonnegative, got {t}")));
        }
        let xh = self.xi.map(|x| x / self.r);
        let along: Complex64 = (0..3).map(|a| xh[a] * u0[a]).sum();
        let v0 = I * along;
        let p = self.comp_propagator(t);
        let rho = p[0][0] * rho0 + p[0][1] * v0;
        let v = p[1][0] * rho0 + p[1][1] * v0;
        let heat = (self.heat_rate() * t).exp();
        let along_t = -I * v;
        let u = std::array::from_fn(|a| heat * (u0[a] - along * xh[a]) + along_t * xh[a]);
        Ok((rho, u))
    }
}

pub fn symbol_matrix(xi: [f64; 3], params: &PhysParams) -> Result<LinearSymbol> {
    LinearSymbol::new(xi, params)
}

pub fn evolve_mode(
    sym: &LinearSymbol,
    rho0: Complex64,
    u0: [Complex64; 3],
    t: f64,
) -> Result<(Complex64, [Complex64; 3])> {
    sym.evolve(rho0, u0, t)
}
