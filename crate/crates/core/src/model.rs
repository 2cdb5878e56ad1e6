//! The perturbation system around `(rho, u) = (1, 0)`:
//!
//! ```text
//! d_t r + div u = -div(r u)
//! d_t u - mu Lap u - (mu + lambda) grad div u + grad r - grad Phi
//!     = -u.grad u - h(r) (mu Lap u + (mu + lambda) grad div u) - f(r) grad r
//! Lap Phi = r
//! ```
//!
//! with `h(r) = r / (1 + r)` and `f(r) = p'(1 + r) / (1 + r) - 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NspError, Result};
use crate::spectral::{
    divergence, hdot_squared, Grid, Rank, SpectralField, Transformer, ZeroModePolicy,
};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// States with `1 + rho` below this value are rejected.
pub const VACUUM_GUARD: f64 = 0.4;
/// Upper end of the admissible density range.
pub const DENSITY_MAX: f64 = 2.0;
/// Relative tolerance on the mean of `rho`.
pub const NEUTRALITY_TOL: f64 = 1e-12;

/// Smooth pressure law normalized so that `p'(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureLaw {
    /// `p(rho) = rho`.
    Linear,
    /// `p(rho) = rho^gamma / gamma`.
    Gamma(f64),
}

impl PressureLaw {
    pub fn derivative(&self, rho: f64) -> f64 {
        match *self {
            PressureLaw::Linear => 1.0,
            PressureLaw::Gamma(g) => rho.powf(g - 1.0),
        }
    }
}

impl Default for PressureLaw {
    fn default() -> Self {
        PressureLaw::Linear
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysParams {
    pub mu: f64,
    pub lambda: f64,
    pub pressure: PressureLaw,
}

impl PhysParams {
    pub fn new(mu: f64, lambda: f64, pressure: PressureLaw) -> Result<Self> {
        let p = Self {
            mu,
            lambda,
            pressure,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(NspError::InvalidParams(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.lambda.is_finite() && self.lambda + 2.0 * self.mu / 3.0 >= 0.0) {
            return Err(NspError::InvalidParams(format!(
                "lambda + 2 mu / 3 must be nonnegative, got lambda = {}",
                self.lambda
            )));
        }
        if let PressureLaw::Gamma(g) = self.pressure {
            if !(g.is_finite() && g >= 1.0) {
                return Err(NspError::InvalidParams(format!("gamma must be >= 1, got {g}")));
            }
        }
        let slope = self.pressure.derivative(1.0);
        if (slope - 1.0).abs() > 1e-14 {
            return Err(NspError::InvalidParams(format!("p'(1) = {slope}, expected 1")));
        }
        Ok(())
    }

    /// Longitudinal viscosity `2 mu + lambda`.
    pub fn nu(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// Coercivity constant of the viscous form, `min(mu, 2 mu + lambda)`.
    pub fn sigma0(&self) -> f64 {
        self.mu.min(self.nu())
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            lambda: 0.0,
            pressure: PressureLaw::Linear,
        }
    }
}

#[inline]
pub fn h_scalar(r: f64) -> f64 {
    r / (r + 1.0)
}

#[inline]
pub fn f_scalar(r: f64, law: PressureLaw) -> f64 {
    law.derivative(r + 1.0) / (r + 1.0) - 1.0
}

fn check_positive(values: &[f64]) -> Result<()> {
    let min = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min + 1.0 <= 0.0 {
        return Err(NspError::Vacuum {
            min_density: min + 1.0,
            guard: 0.0,
        });
    }
    Ok(())
}

/// `h(rho) = rho / (rho + 1)`, pointwise.
pub fn closure_h(rho: &[f64]) -> Result<Vec<f64>> {
    check_positive(rho)?;
    Ok(rho.iter().map(|&r| h_scalar(r)).collect())
}

/// `f(rho) = p'(rho + 1) / (rho + 1) - 1`, pointwise.
pub fn closure_f(rho: &[f64], law: PressureLaw) -> Result<Vec<f64>> {
    check_positive(rho)?;
    Ok(rho.iter().map(|&r| f_scalar(r, law)).collect())
}

/// Sets the zero mode to zero and leaves every other mode untouched.
pub fn enforce_neutrality(rho: &SpectralField) -> SpectralField {
    let mut out = rho.clone();
    for c in out.components_mut() {
        c[0] = Complex64::default();
    }
    out
}

pub fn check_neutral(rho: &SpectralField) -> Result<()> {
    let mean = rho.component(0)[0].norm();
    let l2 = hdot_squared(rho, 0.0, ZeroModePolicy::Include)?.sqrt();
    let rms = l2 / rho.grid().volume().sqrt();
    if mean > NEUTRALITY_TOL * rms {
        return Err(NspError::Neutrality { mean });
    }
    Ok(())
}

/// Electric field from `Lap Phi = rho`: `gradPhi_k = -i k rho_k / |k|^2`.
pub fn poisson_solve(rho: &SpectralField) -> Result<SpectralField> {
    if rho.rank() != Rank::Scalar {
        return Err(NspError::Shape("density must be scalar".into()));
    }
    check_neutral(rho)?;
    let grid = *rho.grid();
    let r = rho.component(0);
    let comps = (0..3)
        .map(|a| {
            (0..grid.len())
                .map(|idx| {
                    if idx == 0 {
                        return Complex64::default();
                    }
                    let k = grid.wavevector(idx);
                    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    -I * k[a] * r[idx] / k2
                })
                .collect()
        })
        .collect();
    SpectralField::from_components(grid, comps)
}

/// Perturbation unknowns at one instant. The electric field is derived from
/// the density on construction and is never evolved independently.
#[derive(Debug, Clone, PartialEq)]
pub struct NspState {
    rho: SpectralField,
    velocity: SpectralField,
    grad_phi: SpectralField,
    time: f64,
}

impl NspState {
    pub fn new(rho: SpectralField, velocity: SpectralField, time: f64) -> Result<Self> {
        if rho.rank() != Rank::Scalar || velocity.rank() != Rank::Vector {
            return Err(NspError::Shape("state needs scalar density and vector velocity".into()));
        }
        if rho.grid() != velocity.grid() {
            return Err(NspError::Shape("density and velocity grids differ".into()));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(NspError::InvalidArgument(format!("time must be nonnegative, got {time}")));
        }
        let grad_phi = poisson_solve(&rho)?;
        Ok(Self {
            rho,
            velocity,
            grad_phi,
            time,
        })
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            rho: SpectralField::zeros(grid, Rank::Scalar),
            velocity: SpectralField::zeros(grid, Rank::Vector),
            grad_phi: SpectralField::zeros(grid, Rank::Vector),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn rho(&self) -> &SpectralField {
        &self.rho
    }

    pub fn velocity(&self) -> &SpectralField {
        &self.velocity
    }

    pub fn grad_phi(&self) -> &SpectralField {
        &self.grad_phi
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn is_finite(&self) -> bool {
        [&self.rho, &self.velocity]
            .iter()
            .flat_map(|f| f.components().iter().flatten())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `||div gradPhi - rho|| / ||rho||`.
    pub fn poisson_defect(&self) -> f64 {
        let div = divergence(&self.grad_phi).expect("vector field");
        let diff = div.axpy(-1.0, &self.rho).expect("same grid");
        let num = hdot_squared(&diff, 0.0, ZeroModePolicy::Include).unwrap_or(f64::NAN).sqrt();
        let den = hdot_squared(&self.rho, 0.0, ZeroModePolicy::Include).unwrap_or(f64::NAN).sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Range of the physical density `1 + rho` on the grid.
    pub fn density_bounds(&self, plan: &mut Transformer) -> (f64, f64) {
        let phys = plan.to_physical(&self.rho);
        phys.component(0)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(1.0 + r), hi.max(1.0 + r))
            })
    }

    /// Rejects states whose density leaves `[VACUUM_GUARD, DENSITY_MAX]`.
    pub fn check_density(&self, plan: &mut Transformer) -> Result<()> {
        let (lo, hi) = self.density_bounds(plan);
        if lo < VACUUM_GUARD {
            return Err(NspError::Vacuum {
                min_density: lo,
                guard: VACUUM_GUARD,
            });
        }
        if hi > DENSITY_MAX {
            return Err(NspError::DensityRange {
                max_density: hi,
                limit: DENSITY_MAX,
            });
        }
        Ok(())
    }
}

/// Time derivative of `(rho, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub rho: SpectralField,
    pub velocity: SpectralField,
}

impl Tendency {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            rho: SpectralField::zeros(grid, Rank::Scalar),
            velocity: SpectralField::zeros(grid, Rank::Vector),
        }
    }

    pub fn axpy(&self, a: f64, other: &Tendency) -> Result<Tendency> {
        Ok(Tendency {
            rho: self.rho.axpy(a, &other.rho)?,
            velocity: self.velocity.axpy(a, &other.velocity)?,
        })
    }
}

/// Right-hand side evaluator. Holds a transform plan, so one per worker.
pub struct NspModel {
    grid: Grid,
    params: PhysParams,
    nonlinear: bool,
    plan: Transformer,
}

impl NspModel {
    pub fn new(grid: Grid, params: PhysParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid,
            params,
            nonlinear: true,
            plan: Transformer::new(grid),
        })
    }

    /// Model with the nonlinear terms switched off.
    pub fn linear(grid: Grid, params: PhysParams) -> Result<Self> {
        let mut m = Self::new(grid, params)?;
        m.nonlinear = false;
        Ok(m)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn is_nonlinear(&self) -> bool {
        self.nonlinear
    }

    pub fn plan(&mut self) -> &mut Transformer {
        &mut self.plan
    }

    pub fn rhs(&mut self, state: &NspState) -> Result<Tendency> {
        let lin = self.linear_tendency(state);
        if !self.nonlinear {
            return Ok(lin);
        }
        let non = self.nonlinear_tendency(state)?;
        lin.axpy(1.0, &non)
    }

    /// Mode-wise linear part.
    pub fn linear_tendency(&self, state: &NspState) -> Tendency {
        let grid = self.grid;
        let (mu, lam) = (self.params.mu, self.params.lambda);
        let r = state.rho.component(0);
        let u = state.velocity.components();
        let mut dr = vec![Complex64::default(); grid.len()];
        let mut du = vec![vec![Complex64::default(); grid.len()]; 3];
        for idx in 1..grid.len() {
            let k = grid.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let dot: Complex64 = (0..3).map(|a| k[a] * u[a][idx]).sum();
            dr[idx] = -I * dot;
            let coupling = -I * r[idx] * (1.0 + 1.0 / k2);
            for a in 0..3 {
                du[a][idx] = -mu * k2 * u[a][idx] - (mu + lam) * k[a] * dot + coupling * k[a];
            }
        }
        Tendency {
            rho: SpectralField::from_components(grid, vec![dr]).expect("shape"),
            velocity: SpectralField::from_components(grid, du).expect("shape"),
        }
    }

    /// Pseudo-spectral nonlinear part, dealiased.
    pub fn nonlinear_tendency(&mut self, state: &NspState) -> Result<Tendency> {
        let (nr, nu) = self.nonlinear_raw(state.rho.component(0), state.velocity.components())?;
        Ok(Tendency {
            rho: SpectralField::from_components(self.grid, vec![nr])?,
            velocity: SpectralField::from_components(self.grid, nu)?,
        })
    }

    /// Nonlinear terms from raw coefficient arrays; the integrator calls this
    /// directly to skip re-deriving the electric field at each stage.
    pub(crate) fn nonlinear_raw(
        &mut self,
        rho: &[Complex64],
        u: &[Vec<Complex64>],
    ) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
        let grid = self.grid;
        let len = grid.len();
        let (mu, lam) = (self.params.mu, self.params.lambda);
        let half = -((grid.n() / 2) as i64);

        // spectral inputs: rho, u_a, d_a rho, d_b u_a, viscous term V_a
        let mut spectral: Vec<Vec<Complex64>> = Vec::with_capacity(19);
        spectral.push(rho.to_vec());
        for ua in u {
            spectral.push(ua.clone());
        }
        let deriv = |f: &[Complex64], axis: usize| -> Vec<Complex64> {
            (0..len)
                .map(|idx| {
                    let m = grid.mode(idx)[axis];
                    if m == half {
                        Complex64::default()
                    } else {
                        f[idx] * I * (m as f64 * grid.dk())
                    }
                })
                .collect()
        };
        for a in 0..3 {
            spectral.push(deriv(rho, a));
        }
        for ua in u {
            for b in 0..3 {
                spectral.push(deriv(ua, b));
            }
        }
        let mut visc = vec![vec![Complex64::default(); len]; 3];
        for idx in 1..len {
            let k = grid.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let dot: Complex64 = (0..3).map(|a| k[a] * u[a][idx]).sum();
            for a in 0..3 {
                visc[a][idx] = -mu * k2 * u[a][idx] - (mu + lam) * k[a] * dot;
            }
        }
        spectral.extend(visc);

        let refs: Vec<&[Complex64]> = spectral.iter().map(|v| v.as_slice()).collect();
        let phys = self.plan.inverse_real(&refs);
        let r = &phys[0];
        let uu = &phys[1..4];
        let dr = &phys[4..7];
        let du = &phys[7..16];
        let v = &phys[16..19];

        let h = closure_h(r)?;
        let f = closure_f(r, self.params.pressure)?;

        let mut products: Vec<Vec<f64>> = vec![vec![0.0; len]; 6];
        for x in 0..len {
            for a in 0..3 {
                products[a][x] = r[x] * uu[a][x];
                let adv = uu[0][x] * du[3 * a][x] + uu[1][x] * du[3 * a + 1][x] + uu[2][x] * du[3 * a + 2][x];
                products[3 + a][x] = -adv - h[x] * v[a][x] - f[x] * dr[a][x];
            }
        }
        let prefs: Vec<&[f64]> = products.iter().map(|v| v.as_slice()).collect();
        let mut hat = self.plan.forward_real(&prefs);

        let mut nr = vec![Complex64::default(); len];
        for idx in 0..len {
            if !grid.is_dealiased(idx) {
                continue;
            }
            let m = grid.mode(idx);
            let mut acc = Complex64::default();
            for a in 0..3 {
                if m[a] != half {
                    acc += I * (m[a] as f64 * grid.dk()) * hat[a][idx];
                }
            }
            nr[idx] = -acc;
        }
        let mut nu: Vec<Vec<Complex64>> = hat.drain(3..).collect();
        for c in nu.iter_mut() {
            for (idx, z) in c.iter_mut().enumerate() {
                if !grid.is_dealiased(idx) {
                    *z = Complex64::default();
                }
            }
        }
        Ok((nr, nu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norm, to_physical, to_spectral, NormRequest, PhysicalField};
    use std::f64::consts::PI;

    #[test]
    fn closures_at_equilibrium() {
        assert_eq!(closure_h(&[0.0]).unwrap(), vec![0.0]);
        assert_eq!(closure_f(&[0.0], PressureLaw::Linear).unwrap(), vec![0.0]);
        assert_eq!(closure_f(&[0.0], PressureLaw::Gamma(1.4)).unwrap(), vec![0.0]);
        assert_eq!(closure_h(&[1.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn linear_law_gives_f_equal_minus_h() {
        let h = closure_h(&[0.2]).unwrap()[0];
        let f = closure_f(&[0.2], PressureLaw::Linear).unwrap()[0];
        assert!((h - 1.0 / 6.0).abs() < 1e-15);
        assert!((f + 1.0 / 6.0).abs() < 1e-15);
        for r in [-0.45, -0.1, 0.3, 0.9] {
            let h = closure_h(&[r]).unwrap()[0];
            let f = closure_f(&[r], PressureLaw::Linear).unwrap()[0];
            assert!((f + h).abs() < 1e-15);
        }
    }

    #[test]
    fn closures_are_linearly_bounded_on_admissible_range() {
        // |h|, |f| <= C |rho| with C = 2 on 1/2 <= 1 + rho <= 2
        for i in 0..=200 {
            let r = -0.5 + 1.5 * i as f64 / 200.0;
            let h = h_scalar(r);
            let f = f_scalar(r, PressureLaw::Gamma(5.0 / 3.0));
            assert!(h.abs() <= 2.0 * r.abs() + 1e-15);
            assert!(f.abs() <= 2.0 * r.abs() + 1e-15);
        }
    }

    #[test]
    fn closures_reject_vacuum() {
        assert!(matches!(closure_h(&[0.1, -1.0]), Err(NspError::Vacuum { .. })));
        assert!(matches!(closure_f(&[-1.5], PressureLaw::Linear), Err(NspError::Vacuum { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(PhysParams::new(0.0, 0.0, PressureLaw::Linear).is_err());
        assert!(PhysParams::new(1.0, -0.7, PressureLaw::Linear).is_err());
        assert!(PhysParams::new(1.0, -2.0 / 3.0, PressureLaw::Linear).is_ok());
        assert!(PhysParams::new(1.0, 0.0, PressureLaw::Gamma(1.4)).is_ok());
        assert!(PhysParams::new(1.0, 0.0, PressureLaw::Gamma(0.5)).is_err());
    }

    #[test]
    fn poisson_single_mode() {
        // Lap Phi = cos(kx) gives gradPhi = sin(kx) / k
        let g = Grid::new(16, 3.0).unwrap();
        let k = 2.0 * PI / g.length();
        let rho = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| (k * x[0]).cos())).unwrap();
        let e = to_physical(&poisson_solve(&rho).unwrap());
        for idx in 0..g.len() {
            let x = g.position(idx);
            assert!((e.component(0)[idx] - (k * x[0]).sin() / k).abs() < 1e-13);
            assert!(e.component(1)[idx].abs() < 1e-14);
            assert!(e.component(2)[idx].abs() < 1e-14);
        }
    }

    #[test]
    fn poisson_zero_and_nonneutral() {
        let g = Grid::new(16, 1.0).unwrap();
        let zero = SpectralField::zeros(g, Rank::Scalar);
        assert!(poisson_solve(&zero).unwrap().is_zero());
        let c = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| 0.1 + x[1].sin())).unwrap();
        assert!(matches!(poisson_solve(&c), Err(NspError::Neutrality { .. })));
        assert!(poisson_solve(&enforce_neutrality(&c)).is_ok());
    }

    #[test]
    fn neutrality_enforcement() {
        let g = Grid::new(16, 1.0).unwrap();
        let constant = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, _| 2.0)).unwrap();
        assert!(enforce_neutrality(&constant).is_zero());
        let f = crate::spectral::tests_support::random_field(g, Rank::Scalar, 2);
        assert_eq!(enforce_neutrality(&f), f);
        let mut shifted = f.clone();
        shifted.components_mut()[0][0] = Complex64::new(0.7, 0.0);
        assert_eq!(enforce_neutrality(&shifted), f);
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let g = Grid::new(16, 4.0).unwrap();
        let mut m = NspModel::new(g, PhysParams::default()).unwrap();
        let t = m.rhs(&NspState::zero(g)).unwrap();
        assert!(t.rho.is_zero() && t.velocity.is_zero());
    }

    #[test]
    fn state_checks_density_range() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        let mut plan = Transformer::new(g);
        let big = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| 0.7 * x[0].cos())).unwrap();
        let s = NspState::new(big, SpectralField::zeros(g, Rank::Vector), 0.0).unwrap();
        assert!(matches!(s.check_density(&mut plan), Err(NspError::Vacuum { .. })));
        let ok = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| 0.3 * x[0].cos())).unwrap();
        let s = NspState::new(ok, SpectralField::zeros(g, Rank::Vector), 0.0).unwrap();
        assert!(s.check_density(&mut plan).is_ok());
        assert!(s.poisson_defect() < 1e-14);
        let _ = norm(s.grad_phi(), NormRequest::l2()).unwrap();
    }
}
