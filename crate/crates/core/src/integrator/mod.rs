//! Time stepping of the perturbation system with the linear part treated
//! exactly (ETD-RK4) or by Crank-Nicolson (IMEX-CNAB2).

mod checkpoint;
mod coeffs;

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NspError, Result};
use crate::model::{NspModel, NspState, PhysParams};
use crate::spectral::{Grid, SpectralField};
use crate::symbol::LinearSymbol;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
use coeffs::{cnab, etd, shell_table, LinOps, OpFamily};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EtdRk4,
    ImexCnab2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub safety: f64,
    /// Directory for the last-good state when a run aborts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::EtdRk4,
            dt: 0.25,
            t_end: 1.0,
            output_stride: 1,
            safety: 1.0,
            checkpoint_dir: None,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(NspError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(NspError::InvalidArgument(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(NspError::InvalidArgument("output_stride must be at least 1".into()));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(NspError::InvalidArgument(format!("safety must lie in (0, 1], got {}", self.safety)));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk so that they tile `[0, t_end]`.
    pub fn steps(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
        }
    }

    pub fn effective_dt(&self) -> f64 {
        match self.steps() {
            0 => self.dt,
            n => self.t_end / n as f64,
        }
    }
}

/// Largest admissible step: `safety * min(dx / max|u|, 2 pi / (10 max Im lambda))`.
pub fn max_stable_dt(grid: &Grid, params: &PhysParams, max_speed: f64, safety: f64) -> f64 {
    let mut omega: f64 = 0.0;
    let mut seen = vec![false; grid.max_shell() + 1];
    for idx in 1..grid.len() {
        let shell = grid.shell(idx);
        if std::mem::replace(&mut seen[shell], true) {
            continue;
        }
        let r = (shell as f64).sqrt() * grid.dk();
        let sym = LinearSymbol::radial(r, params).expect("r > 0");
        omega = omega.max(sym.eigenvalues().0.im.abs());
    }
    let oscillation = if omega > 0.0 {
        2.0 * std::f64::consts::PI / (10.0 * omega)
    } else {
        f64::INFINITY
    };
    let advection = if max_speed > 0.0 {
        grid.spacing() / max_speed
    } else {
        f64::INFINITY
    };
    safety * oscillation.min(advection)
}

/// Raw coefficient arrays of `(rho, u)`.
#[derive(Clone)]
struct Modes {
    rho: Vec<Complex64>,
    u: Vec<Vec<Complex64>>,
}

impl Modes {
    fn of(state: &NspState) -> Self {
        Self {
            rho: state.rho().component(0).to_vec(),
            u: state.velocity().components().to_vec(),
        }
    }

    fn into_state(self, grid: Grid, time: f64) -> Result<NspState> {
        let rho = SpectralField::from_components(grid, vec![self.rho])?;
        let u = SpectralField::from_components(grid, self.u)?;
        NspState::new(rho, u, time)
    }

    fn is_finite(&self) -> bool {
        self.rho
            .iter()
            .chain(self.u.iter().flatten())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Trajectory summary returned by [`Integrator::integrate`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: NspState,
    pub steps: usize,
    pub dt: f64,
    pub sample_times: Vec<f64>,
}

pub struct Integrator {
    grid: Grid,
    cfg: IntegratorConfig,
    h: f64,
    model: NspModel,
    ops: Vec<LinOps>,
    prev_nonlinear: Option<(f64, Modes)>,
}

impl Integrator {
    /// `nonlinear = false` switches the nonlinear terms off.
    pub fn new(grid: Grid, params: PhysParams, cfg: IntegratorConfig, nonlinear: bool) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.effective_dt();
        let model = if nonlinear {
            NspModel::new(grid, params)?
        } else {
            NspModel::linear(grid, params)?
        };
        let family = match cfg.scheme {
            Scheme::EtdRk4 => OpFamily::Etd,
            Scheme::ImexCnab2 => OpFamily::Cnab,
        };
        let ops = shell_table(&grid, &params, h, family);
        Ok(Self {
            grid,
            cfg,
            h,
            model,
            ops,
            prev_nonlinear: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn model(&mut self) -> &mut NspModel {
        &mut self.model
    }

    fn nonlinear(&mut self, x: &Modes) -> Result<Modes> {
        let (rho, u) = self.model.nonlinear_raw(&x.rho, &x.u)?;
        Ok(Modes { rho, u })
    }

    /// `sum_k w_k op_k(X_k)`, mode by mode.
    fn combine(&self, terms: &[(usize, f64, &Modes)]) -> Modes {
        let len = self.grid.len();
        let mut out = Modes {
            rho: vec![Complex64::default(); len],
            u: vec![vec![Complex64::default(); len]; 3],
        };
        for idx in 0..len {
            let ops = &self.ops[self.grid.shell(idx)];
            if idx == 0 {
                for &(k, w, x) in terms {
                    let c = w * ops.heat[k];
                    out.rho[0] += c * x.rho[0];
                    for a in 0..3 {
                        out.u[a][0] += c * x.u[a][0];
                    }
                }
                continue;
            }
            let xi = self.grid.wavevector(idx);
            let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            let xh = xi.map(|v| v / r);
            let mut rho = Complex64::default();
            let mut v = Complex64::default();
            let mut sol = [Complex64::default(); 3];
            for &(k, w, x) in terms {
                let along: Complex64 = (0..3).map(|a| xh[a] * x.u[a][idx]).sum();
                let vin = I * along;
                let m = ops.comp[k];
                rho += w * (m[0][0] * x.rho[idx] + m[0][1] * vin);
                v += w * (m[1][0] * x.rho[idx] + m[1][1] * vin);
                let hk = w * ops.heat[k];
                for a in 0..3 {
                    sol[a] += hk * (x.u[a][idx] - along * xh[a]);
                }
            }
            out.rho[idx] = rho;
            let along = -I * v;
            for a in 0..3 {
                out.u[a][idx] = sol[a] + along * xh[a];
            }
        }
        out
    }

    fn advance(&mut self, x: &Modes, time: f64) -> Result<Modes> {
        let nonlinear = self.model.is_nonlinear();
        match self.cfg.scheme {
            Scheme::EtdRk4 => {
                if !nonlinear {
                    return Ok(self.combine(&[(etd::E, 1.0, x)]));
                }
                let nx = self.nonlinear(x)?;
                let a = self.combine(&[(etd::E2, 1.0, x), (etd::Q, 1.0, &nx)]);
                let na = self.nonlinear(&a)?;
                let b = self.combine(&[(etd::E2, 1.0, x), (etd::Q, 1.0, &na)]);
                let nb = self.nonlinear(&b)?;
                let c = self.combine(&[(etd::E2, 1.0, &a), (etd::Q, 2.0, &nb), (etd::Q, -1.0, &nx)]);
                let nc = self.nonlinear(&c)?;
                Ok(self.combine(&[
                    (etd::E, 1.0, x),
                    (etd::F1, 1.0, &nx),
                    (etd::F2, 2.0, &na),
                    (etd::F2, 2.0, &nb),
                    (etd::F3, 1.0, &nc),
                ]))
            }
            Scheme::ImexCnab2 => {
                if !nonlinear {
                    return Ok(self.combine(&[(cnab::A, 1.0, x)]));
                }
                let nx = self.nonlinear(x)?;
                let prev = self
                    .prev_nonlinear
                    .take()
                    .filter(|(t, _)| (time - self.h - t).abs() <= 1e-9 * self.h.max(time.abs()));
                let next = match &prev {
                    Some((_, np)) => self.combine(&[(cnab::A, 1.0, x), (cnab::C, 1.5, &nx), (cnab::C, -0.5, np)]),
                    None => self.combine(&[(cnab::A, 1.0, x), (cnab::C, 1.0, &nx)]),
                };
                self.prev_nonlinear = Some((time, nx));
                Ok(next)
            }
        }
    }

    /// One step of length [`Self::dt`]. The density mean is reset to zero,
    /// the electric field re-derived, and the density range checked.
    pub fn step(&mut self, state: &NspState) -> Result<NspState> {
        let x = Modes::of(state);
        let mut next = self.advance(&x, state.time())?;
        next.rho[0] = Complex64::default();
        let time = state.time() + self.h;
        if !next.is_finite() {
            return Err(NspError::NonFiniteState { time });
        }
        let out = next.into_state(self.grid, time)?;
        out.check_density(self.model.plan())?;
        Ok(out)
    }

    fn abort(&self, last_good: &NspState, reason: NspError) -> NspError {
        let checkpoint = self.cfg.checkpoint_dir.as_ref().and_then(|dir| {
            let path = dir.join(format!("abort_t{:.6}.ckpt", last_good.time()));
            std::fs::create_dir_all(dir).ok()?;
            write_checkpoint(&path, last_good, self.model.params()).ok()?;
            Some(path)
        });
        NspError::Aborted {
            time: last_good.time(),
            reason: Box::new(reason),
            checkpoint,
        }
    }

    fn max_speed(&mut self, state: &NspState) -> f64 {
        let phys = self.model.plan().to_physical(state.velocity());
        phys.magnitude().into_iter().fold(0.0, f64::max)
    }

    fn check_step_size(&mut self, state: &NspState) -> Result<()> {
        let speed = self.max_speed(state);
        let limit = max_stable_dt(&self.grid, self.model.params(), speed, self.cfg.safety);
        if self.h > limit * (1.0 + 1e-12) {
            return Err(NspError::InvalidArgument(format!(
                "dt = {} exceeds the stable step {limit:.6} at t = {}",
                self.h,
                state.time()
            )));
        }
        Ok(())
    }

    /// Advances `state0` to `state0.time() + t_end`, calling `monitor` on the
    /// initial state, every `output_stride` steps and on the final state.
    pub fn integrate(
        &mut self,
        state0: &NspState,
        mut monitor: impl FnMut(&NspState) -> Result<()>,
    ) -> Result<Trajectory> {
        if state0.grid() != &self.grid {
            return Err(NspError::Shape("state grid differs from integrator grid".into()));
        }
        self.prev_nonlinear = None;
        self.check_step_size(state0)?;
        let steps = self.cfg.steps();
        let t0 = state0.time();
        let mut state = state0.clone();
        let mut sample_times = vec![t0];
        monitor(&state)?;
        for n in 1..=steps {
            let next = match self.step(&state) {
                Ok(s) => s.with_time(t0 + n as f64 * self.h),
                Err(e) => return Err(self.abort(&state, e)),
            };
            state = next;
            if n % self.cfg.output_stride == 0 || n == steps {
                if let Err(e) = self.check_step_size(&state) {
                    return Err(self.abort(&state, e));
                }
                sample_times.push(state.time());
                monitor(&state)?;
            }
        }
        Ok(Trajectory {
            final_state: state,
            steps,
            dt: self.h,
            sample_times,
        })
    }
}

pub fn step(state: &NspState, cfg: &IntegratorConfig, params: &PhysParams) -> Result<NspState> {
    Integrator::new(*state.grid(), *params, cfg.clone(), true)?.step(state)
}

pub fn integrate(
    state0: &NspState,
    cfg: &IntegratorConfig,
    params: &PhysParams,
    monitor: impl FnMut(&NspState) -> Result<()>,
) -> Result<Trajectory> {
    Integrator::new(*state0.grid(), *params, cfg.clone(), true)?.integrate(state0, monitor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norm, NormRequest, Rank};

    /// Random state with `max |rho| = max |u| = amp` on the grid.
    fn smooth_state(grid: Grid, amp: f64) -> NspState {
        let unit = |rank, seed| {
            let f = crate::spectral::tests_support::smooth_random_field(grid, rank, seed, 4);
            let peak = norm(&f, NormRequest::linf()).unwrap();
            f.scaled(amp / peak)
        };
        NspState::new(unit(Rank::Scalar, 11), unit(Rank::Vector, 12), 0.0).unwrap()
    }

    fn cfg(scheme: Scheme, dt: f64, t_end: f64) -> IntegratorConfig {
        IntegratorConfig {
            scheme,
            dt,
            t_end,
            output_stride: 1,
            safety: 1.0,
            checkpoint_dir: None,
        }
    }

    fn diff(a: &NspState, b: &NspState) -> f64 {
        let r = norm(&a.rho().axpy(-1.0, b.rho()).unwrap(), NormRequest::l2()).unwrap();
        let u = norm(&a.velocity().axpy(-1.0, b.velocity()).unwrap(), NormRequest::l2()).unwrap();
        r.hypot(u)
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = Grid::new(16, 8.0).unwrap();
        for scheme in [Scheme::EtdRk4, Scheme::ImexCnab2] {
            let mut it = Integrator::new(g, PhysParams::default(), cfg(scheme, 0.1, 0.5), true).unwrap();
            let out = it.integrate(&NspState::zero(g), |_| Ok(())).unwrap();
            assert!(out.final_state.rho().is_zero() && out.final_state.velocity().is_zero());
        }
    }

    #[test]
    fn zero_duration_returns_initial_state() {
        let g = Grid::new(16, 8.0).unwrap();
        let s = smooth_state(g, 0.01);
        let mut calls = 0;
        let out = integrate(&s, &cfg(Scheme::EtdRk4, 0.1, 0.0), &PhysParams::default(), |_| {
            calls += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(out.final_state, s);
        assert_eq!(calls, 1);
    }

    #[test]
    fn linear_step_is_the_exact_propagator() {
        let g = Grid::new(16, 8.0).unwrap();
        let p = PhysParams::default();
        let s = smooth_state(g, 0.1);
        let mut it = Integrator::new(g, p, cfg(Scheme::EtdRk4, 0.3, 0.3), false).unwrap();
        let out = it.step(&s).unwrap();
        let mut worst: f64 = 0.0;
        for idx in 1..g.len() {
            let sym = LinearSymbol::new(g.wavevector(idx), &p).unwrap();
            let u0 = [0, 1, 2].map(|a| s.velocity().component(a)[idx]);
            let (rho, u) = sym.evolve(s.rho().component(0)[idx], u0, 0.3).unwrap();
            worst = worst.max((rho - out.rho().component(0)[idx]).norm());
            for a in 0..3 {
                worst = worst.max((u[a] - out.velocity().component(a)[idx]).norm());
            }
        }
        assert!(worst < 1e-13, "{worst}");
    }

    #[test]
    fn mass_stays_zero() {
        let g = Grid::new(16, 8.0).unwrap();
        let s = smooth_state(g, 0.02);
        let mut it = Integrator::new(g, PhysParams::default(), cfg(Scheme::EtdRk4, 0.2, 1.0), true).unwrap();
        it.integrate(&s, |st| {
            assert!(st.rho().component(0)[0].norm() <= 1e-12);
            Ok(())
        })
        .unwrap();
    }

    fn convergence_order(scheme: Scheme, dts: [f64; 3]) -> f64 {
        let g = Grid::new(16, 8.0).unwrap();
        let s = smooth_state(g, 0.2);
        let p = PhysParams::default();
        let run = |dt: f64| {
            let mut it = Integrator::new(g, p, cfg(scheme, dt, 1.0), true).unwrap();
            it.integrate(&s, |_| Ok(())).unwrap().final_state
        };
        let [a, b, c] = dts.map(run);
        (diff(&a, &b) / diff(&b, &c)).log2()
    }

    #[test]
    fn etd_rk4_converges_at_fourth_order() {
        let order = convergence_order(Scheme::EtdRk4, [0.5, 0.25, 0.125]);
        assert!((order - 4.0).abs() <= 0.3, "order {order}");
    }

    #[test]
    fn cnab2_converges_at_second_order() {
        let order = convergence_order(Scheme::ImexCnab2, [0.1, 0.05, 0.025]);
        assert!(order >= 1.8, "order {order}");
    }

    #[test]
    fn vacuum_breach_aborts_with_checkpoint() {
        let g = Grid::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let rho = crate::spectral::to_spectral(&crate::spectral::PhysicalField::from_fn(g, Rank::Scalar, |_, x| {
            0.55 * x[0].cos()
        }))
        .unwrap();
        let u = crate::spectral::to_spectral(&crate::spectral::PhysicalField::from_fn(g, Rank::Vector, |c, x| {
            if c == 0 { -x[0].sin() } else { 0.0 }
        }))
        .unwrap();
        let s = NspState::new(rho, u, 0.0).unwrap();
        let mut c = cfg(Scheme::EtdRk4, 0.05, 3.0);
        c.checkpoint_dir = Some(dir.path().to_path_buf());
        let mut it = Integrator::new(g, PhysParams::default(), c, true).unwrap();
        // the converging flow at x = pi drives the density below the guard
        let err = it.integrate(&s, |_| Ok(())).unwrap_err();
        match err {
            NspError::Aborted { checkpoint: Some(path), reason, .. } => {
                assert!(matches!(*reason, NspError::Vacuum { .. } | NspError::DensityRange { .. }));
                let (back, _) = read_checkpoint(&path).unwrap();
                assert!(back.check_density(&mut crate::spectral::Transformer::new(g)).is_ok());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn step_size_limit() {
        let g = Grid::new(16, 8.0).unwrap();
        let limit = max_stable_dt(&g, &PhysParams::default(), 0.0, 1.0);
        // max Im lambda^2 = 1 + 1/nu^2 bounds the oscillation frequency
        assert!(limit >= 2.0 * std::f64::consts::PI / (10.0 * (1.25f64).sqrt()) - 1e-12);
        let mut it = Integrator::new(g, PhysParams::default(), cfg(Scheme::EtdRk4, 2.0 * limit, 4.0 * limit), true).unwrap();
        assert!(it.integrate(&NspState::zero(g), |_| Ok(())).is_err());
    }
}
