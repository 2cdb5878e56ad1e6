//! Energy functionals, dissipations and the balance residuals of the energy
//! method. All norms are spectral and agree with [`crate::spectral::norm`].

use serde::{Deserialize, Serialize};

use crate::error::{NspError, Result};
use crate::model::{f_scalar, h_scalar, NspModel, NspState, PhysParams};
use crate::spectral::{hdot_squared, SpectralField, ZeroModePolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRequest {
    /// Highest derivative order `N`.
    pub n_max: u32,
    /// Negative Sobolev indices `s` reported as order `-s`.
    pub s_list: Vec<f64>,
    /// `(l, m)` pairs for `E_l^m` and `D_l^m`.
    pub lm_pairs: Vec<(u32, u32)>,
    /// Weight of the cross term in the corrected functional.
    pub eps_cross: f64,
}

impl EnergyRequest {
    pub fn new(n_max: u32, s_list: Vec<f64>, lm_pairs: Vec<(u32, u32)>, eps_cross: f64) -> Result<Self> {
        for &(l, m) in &lm_pairs {
            if l > m || m > n_max {
                return Err(NspError::InvalidArgument(format!("need l <= m <= N, got ({l}, {m}) with N = {n_max}")));
            }
        }
        for &s in &s_list {
            if !(0.0..1.5).contains(&s) {
                return Err(NspError::InvalidArgument(format!("s must lie in [0, 3/2), got {s}")));
            }
        }
        Ok(Self {
            n_max,
            s_list,
            lm_pairs,
            eps_cross,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevRow {
    pub order: f64,
    pub rho: f64,
    pub u: f64,
    pub grad_phi: f64,
}

impl SobolevRow {
    pub fn triple(&self) -> f64 {
        (self.rho.powi(2) + self.u.powi(2) + self.grad_phi.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmValue {
    pub l: u32,
    pub m: u32,
    pub energy: f64,
    pub corrected: f64,
    pub dissipation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub time: f64,
    pub sobolev: Vec<SobolevRow>,
    pub lm: Vec<LmValue>,
    /// `int grad^k u . grad grad^k rho` for `k = 0..N-1`.
    pub cross: Vec<f64>,
    /// `||rho||^2 + ||u||^2 + ||grad Phi||^2`.
    pub energy: f64,
    /// `mu ||grad u||^2 + (mu + lambda) ||div u||^2`.
    pub dissipation: f64,
    /// `d/dt energy / 2 + dissipation`, from the exact tendency.
    pub identity_residual: f64,
    /// `|identity_residual| / dissipation`.
    pub identity_residual_rel: f64,
    /// Same balance with a backward difference against the previous state.
    pub step_residual: Option<f64>,
    /// Viscous form over `sigma_0 ||grad u||^2`.
    pub coercivity_ratio: f64,
    /// `|mean rho|`.
    pub mass: f64,
    /// `max(|h(rho)|, |f(rho)|) / |rho|` over the grid.
    pub closure_constant: f64,
}

impl EnergyReport {
    pub fn row(&self, order: f64) -> Option<&SobolevRow> {
        self.sobolev.iter().find(|r| (r.order - order).abs() < 1e-12)
    }

    pub fn lm_value(&self, l: u32, m: u32) -> Option<&LmValue> {
        self.lm.iter().find(|v| v.l == l && v.m == m)
    }
}

/// `min(mu, 2 mu + lambda)`.
pub fn sigma0(params: &PhysParams) -> f64 {
    params.sigma0()
}

/// The mean counts at order zero only.
fn sq(f: &SpectralField, s: f64) -> f64 {
    let policy = if s == 0.0 { ZeroModePolicy::Include } else { ZeroModePolicy::Exclude };
    hdot_squared(f, s, policy).expect("zero mode never rejected here")
}

/// `L^3 sum |xi|^{2k} Re(conj(u) . i xi rho)`.
fn cross_term(state: &NspState, k: u32) -> f64 {
    let grid = *state.grid();
    let r = state.rho().component(0);
    let u = state.velocity().components();
    let mut acc = 0.0;
    for idx in 1..grid.len() {
        let xi = grid.wavevector(idx);
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let w = k2.powi(k as i32);
        for a in 0..3 {
            // Re(conj(u_a) i xi_a rho) = -xi_a Im(conj(u_a) rho)
            acc -= w * xi[a] * (u[a][idx].conj() * r[idx]).im;
        }
    }
    acc * grid.volume()
}

/// `(energy, dissipation, d/dt energy)` at level 0. The time derivative uses
/// the tendency; the electric field contributes `|rho|^2 / |xi|^2` per mode.
fn balance(state: &NspState, tendency: Option<(&SpectralField, &SpectralField)>, params: &PhysParams) -> (f64, f64, f64) {
    let grid = *state.grid();
    let r = state.rho().component(0);
    let u = state.velocity().components();
    let mut energy = 0.0;
    let mut diss = 0.0;
    let mut rate = 0.0;
    for idx in 0..grid.len() {
        let xi = grid.wavevector(idx);
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let weight = if idx == 0 { 1.0 } else { 1.0 + 1.0 / k2 };
        let uu: f64 = (0..3).map(|a| u[a][idx].norm_sqr()).sum();
        energy += weight * r[idx].norm_sqr() + uu;
        let div = (0..3).map(|a| xi[a] * u[a][idx]).sum::<num_complex::Complex64>();
        diss += params.mu * k2 * uu + (params.mu + params.lambda) * div.norm_sqr();
        if let Some((rt, ut)) = tendency {
            rate += 2.0 * weight * (r[idx].conj() * rt.component(0)[idx]).re;
            for a in 0..3 {
                rate += 2.0 * (u[a][idx].conj() * ut.component(a)[idx]).re;
            }
        }
    }
    let v = grid.volume();
    (energy * v, diss * v, rate * v)
}

fn closure_constant(state: &NspState, model: &mut NspModel) -> f64 {
    let law = model.params().pressure;
    let phys = model.plan().to_physical(state.rho());
    phys.component(0)
        .iter()
        .filter(|r| r.abs() > 1e-14)
        .map(|&r| h_scalar(r).abs().max(f_scalar(r, law).abs()) / r.abs())
        .fold(0.0, f64::max)
}

/// All monitored functionals of `state`. The tendency comes from `model`, so
/// a linear model gives the linear balance. With `prev`, a backward-difference
/// residual is added.
pub fn report(
    state: &NspState,
    prev: Option<&NspState>,
    model: &mut NspModel,
    request: &EnergyRequest,
) -> Result<EnergyReport> {
    if state.grid() != model.grid() || prev.is_some_and(|p| p.grid() != state.grid()) {
        return Err(NspError::Shape("states and model must share a grid".into()));
    }
    let params = *model.params();
    let mut orders: Vec<f64> = request.s_list.iter().map(|s| -s).collect();
    orders.extend((0..=request.n_max + 2).map(|k| k as f64));
    let sobolev: Vec<SobolevRow> = orders
        .iter()
        .map(|&k| SobolevRow {
            order: k,
            rho: sq(state.rho(), k).sqrt(),
            u: sq(state.velocity(), k).sqrt(),
            grad_phi: sq(state.grad_phi(), k).sqrt(),
        })
        .collect();
    let level = |k: u32| {
        let row = sobolev.iter().find(|r| r.order == k as f64).expect("integer orders present");
        (row.rho.powi(2), row.u.powi(2), row.grad_phi.powi(2))
    };
    let cross: Vec<f64> = (0..request.n_max).map(|k| cross_term(state, k)).collect();
    let lm = request
        .lm_pairs
        .iter()
        .map(|&(l, m)| {
            let energy: f64 = (l..=m).map(|k| {
                let (a, b, c) = level(k);
                a + b + c
            }).sum();
            let corrected = energy + request.eps_cross * (l..m).map(|k| cross[k as usize]).sum::<f64>();
            let dissipation: f64 = (0..=m - l)
                .map(|j| level(l + j).0 + level(l + 1 + j).1 + level(l + 1 + j).2)
                .sum();
            LmValue { l, m, energy, corrected, dissipation }
        })
        .collect();

    let tendency = model.rhs(state)?;
    let (energy, dissipation, rate) = balance(state, Some((&tendency.rho, &tendency.velocity)), &params);
    let identity_residual = 0.5 * rate + dissipation;
    let identity_residual_rel = if dissipation > 0.0 {
        identity_residual.abs() / dissipation
    } else {
        identity_residual.abs()
    };
    let step_residual = prev.map(|p| {
        let (e0, d0, _) = balance(p, None, &params);
        let dt = state.time() - p.time();
        0.5 * (energy - e0) / dt + 0.5 * (dissipation + d0)
    });

    let grad_u = sq(state.velocity(), 1.0);
    let sigma = params.sigma0();
    let coercivity_ratio = if grad_u > 0.0 { dissipation / (sigma * grad_u) } else { 1.0 };

    Ok(EnergyReport {
        time: state.time(),
        sobolev,
        lm,
        cross,
        energy,
        dissipation,
        identity_residual,
        identity_residual_rel,
        step_residual,
        coercivity_ratio,
        mass: state.rho().component(0)[0].norm(),
        closure_constant: closure_constant(state, model),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovVerdict {
    pub pass: bool,
    /// Largest relative increase between consecutive samples.
    pub max_increase: f64,
    /// `sup_t E(t) / E(0)`.
    pub max_ratio: f64,
}

/// Relative slack on monotonicity of the linear functional.
const LYAPUNOV_SLACK: f64 = 1e-12;

/// Linear runs must have `E_l^m` non-increasing; nonlinear runs must stay
/// below twice the initial value.
pub fn lyapunov_check(series: &[EnergyReport], l: u32, m: u32, linear: bool) -> Result<LyapunovVerdict> {
    if series.len() < 3 {
        return Err(NspError::InsufficientSamples { found: series.len(), needed: 3 });
    }
    let values = series
        .iter()
        .map(|r| {
            r.lm_value(l, m)
                .map(|v| v.energy)
                .ok_or_else(|| NspError::InvalidArgument(format!("E_{l}^{m} not in report")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let e0 = values[0];
    let max_increase = values
        .windows(2)
        .map(|w| if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else { w[1] - w[0] })
        .fold(f64::NEG_INFINITY, f64::max);
    let max_ratio = if e0 > 0.0 {
        values.iter().fold(0.0, |a: f64, &v| a.max(v / e0))
    } else {
        0.0
    };
    let pass = if e0 == 0.0 {
        values.iter().all(|&v| v == 0.0)
    } else if linear {
        max_increase <= LYAPUNOV_SLACK
    } else {
        max_ratio <= 2.0
    };
    Ok(LyapunovVerdict { pass, max_increase, max_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeTrack {
    pub s: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// `sup_t` of the `Hdot^{-s}` triple norm over its initial value; passes at 3.
pub fn hs_negative_track(series: &[EnergyReport], s: f64) -> Result<NegativeTrack> {
    if !(0.0..1.5).contains(&s) {
        return Err(NspError::InvalidArgument(format!("s must lie in [0, 3/2), got {s}")));
    }
    let values = series
        .iter()
        .map(|r| {
            r.row(-s)
                .map(|row| row.triple())
                .ok_or_else(|| NspError::InvalidArgument(format!("order -{s} not in report")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let Some(&v0) = values.first() else {
        return Err(NspError::InsufficientSamples { found: 0, needed: 1 });
    };
    let ratio = if v0 > 0.0 {
        values.iter().fold(0.0, |a: f64, &v| a.max(v / v0))
    } else if values.iter().all(|&v| v == 0.0) {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(NegativeTrack { s, ratio, pass: ratio <= 3.0 })
}

/// Centered differences at interior samples, one-sided at the ends.
pub fn discrete_rate(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(NspError::InsufficientSamples { found: times.len().min(values.len()), needed: 2 });
    }
    let n = times.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norm, Grid, NormRequest, Rank};
    use rand::{Rng, SeedableRng};

    fn request() -> EnergyRequest {
        EnergyRequest::new(3, vec![0.5], vec![(0, 3), (1, 3)], 0.001).unwrap()
    }

    fn random_state(grid: Grid, seed: u64, amp: f64) -> NspState {
        let rho = crate::spectral::tests_support::smooth_random_field(grid, Rank::Scalar, seed, 6);
        let u = crate::spectral::tests_support::smooth_random_field(grid, Rank::Vector, seed + 1, 6);
        let pr = norm(&rho, NormRequest::linf()).unwrap();
        let pu = norm(&u, NormRequest::linf()).unwrap();
        NspState::new(rho.scaled(amp / pr), u.scaled(amp / pu), 0.0).unwrap()
    }

    #[test]
    fn zero_state_reports_zero() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::new(g, PhysParams::default()).unwrap();
        let r = report(&NspState::zero(g), None, &mut m, &request()).unwrap();
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.dissipation, 0.0);
        assert!(r.sobolev.iter().all(|row| row.triple() == 0.0));
        assert!(r.lm.iter().all(|v| v.energy == 0.0 && v.dissipation == 0.0));
        assert_eq!(r.identity_residual, 0.0);
    }

    #[test]
    fn solenoidal_mode_balance_is_exact() {
        let g = Grid::new(16, 2.0 * std::f64::consts::PI).unwrap();
        let u = crate::spectral::to_spectral(&crate::spectral::PhysicalField::from_fn(g, Rank::Vector, |c, x| {
            if c == 1 { x[0].sin() } else { 0.0 }
        }))
        .unwrap();
        let s = NspState::new(SpectralField::zeros(g, Rank::Scalar), u, 0.0).unwrap();
        let mut m = NspModel::linear(g, PhysParams::default()).unwrap();
        let r = report(&s, None, &mut m, &request()).unwrap();
        // d/dt ||u||^2 / 2 = -mu ||grad u||^2
        let grad = norm(s.velocity(), NormRequest::hdot(1.0)).unwrap().powi(2);
        assert!((r.dissipation - grad).abs() < 1e-12 * grad);
        assert!(r.identity_residual.abs() <= 1e-10 * grad);
    }

    #[test]
    fn linear_balance_holds_for_random_states() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::linear(g, PhysParams::new(0.7, 0.3, Default::default()).unwrap()).unwrap();
        for seed in 0..4 {
            let r = report(&random_state(g, 10 * seed, 0.1), None, &mut m, &request()).unwrap();
            assert!(r.identity_residual_rel < 1e-12, "{}", r.identity_residual_rel);
        }
    }

    #[test]
    fn nonlinear_residual_is_cubic() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::new(g, PhysParams::default()).unwrap();
        let s = random_state(g, 3, 0.02);
        let half = NspState::new(s.rho().scaled(0.5), s.velocity().scaled(0.5), 0.0).unwrap();
        let a = report(&s, None, &mut m, &request()).unwrap().identity_residual;
        let b = report(&half, None, &mut m, &request()).unwrap().identity_residual;
        let ratio = a / b;
        assert!((ratio - 8.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn norms_agree_with_spectral_core() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::new(g, PhysParams::default()).unwrap();
        let s = random_state(g, 5, 0.05);
        let r = report(&s, None, &mut m, &request()).unwrap();
        for row in &r.sobolev {
            let want = norm(s.velocity(), NormRequest::hdot(row.order)).unwrap();
            assert!((row.u - want).abs() <= 1e-12 * want);
        }
        // energy = E_0^0
        let e00 = r.row(0.0).unwrap().triple().powi(2);
        assert!((r.energy - e00).abs() < 1e-12 * e00);
    }

    #[test]
    fn cross_term_obeys_cauchy_schwarz() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::new(g, PhysParams::default()).unwrap();
        for seed in 0..5 {
            let s = random_state(g, 100 + seed, 0.05);
            let r = report(&s, None, &mut m, &request()).unwrap();
            for (k, c) in r.cross.iter().enumerate() {
                let bound = r.row(k as f64).unwrap().u * r.row(k as f64 + 1.0).unwrap().rho;
                assert!(c.abs() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn coercivity_constant_by_brute_force() {
        // min over unit a of (mu |a|^2 + (mu + lambda) |xh.a|^2) is min(mu, 2 mu + lambda)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for &(mu, lam) in &[(1.0, 0.0), (1.0, -2.0 / 3.0), (0.5, 3.0), (2.0, -1.0)] {
            let p = PhysParams::new(mu, lam, Default::default()).unwrap();
            let xh = [0.6, 0.0, 0.8];
            let mut best = f64::INFINITY;
            for _ in 0..20000 {
                let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let n2: f64 = a.iter().map(|v| v * v).sum();
                let dot: f64 = (0..3).map(|i| xh[i] * a[i]).sum();
                best = best.min(mu + (mu + lam) * dot * dot / n2);
            }
            assert!(best >= sigma0(&p) - 1e-12);
            assert!(best <= sigma0(&p) + 1e-2);
        }
    }

    #[test]
    fn coercivity_ratio_at_least_one() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::new(g, PhysParams::new(1.0, -0.5, Default::default()).unwrap()).unwrap();
        for seed in 0..4 {
            let r = report(&random_state(g, 40 + seed, 0.05), None, &mut m, &request()).unwrap();
            assert!(r.coercivity_ratio >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn lyapunov_verdicts() {
        let mk = |vals: &[f64]| -> Vec<EnergyReport> {
            vals.iter()
                .enumerate()
                .map(|(i, &v)| EnergyReport {
                    time: i as f64,
                    sobolev: vec![SobolevRow { order: -0.5, rho: v, u: 0.0, grad_phi: 0.0 }],
                    lm: vec![LmValue { l: 0, m: 3, energy: v, corrected: v, dissipation: 0.0 }],
                    cross: vec![],
                    energy: v,
                    dissipation: 0.0,
                    identity_residual: 0.0,
                    identity_residual_rel: 0.0,
                    step_residual: None,
                    coercivity_ratio: 1.0,
                    mass: 0.0,
                    closure_constant: 0.0,
                })
                .collect()
        };
        assert!(lyapunov_check(&mk(&[3.0, 2.0, 1.0]), 0, 3, true).unwrap().pass);
        assert!(!lyapunov_check(&mk(&[3.0, 2.0, 2.5]), 0, 3, true).unwrap().pass);
        assert!(lyapunov_check(&mk(&[3.0, 2.0, 2.5]), 0, 3, false).unwrap().pass);
        assert!(!lyapunov_check(&mk(&[1.0, 2.5, 2.0]), 0, 3, false).unwrap().pass);
        assert!(lyapunov_check(&mk(&[0.0, 0.0, 0.0]), 0, 3, true).unwrap().pass);
        assert!(lyapunov_check(&mk(&[1.0, 0.5]), 0, 3, true).is_err());
        let t = hs_negative_track(&mk(&[1.0, 2.0, 2.9]), 0.5).unwrap();
        assert!(t.pass && (t.ratio - 2.9).abs() < 1e-15);
        assert!(!hs_negative_track(&mk(&[1.0, 3.5]), 0.5).unwrap().pass);
        assert!(hs_negative_track(&mk(&[1.0]), 1.5).is_err());
    }

    #[test]
    fn discrete_rate_of_quadratic() {
        let t: Vec<f64> = (0..5).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|x| x * x).collect();
        let d = discrete_rate(&t, &v).unwrap();
        assert!((d[2] - 2.0).abs() < 1e-14);
        assert!((d[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn step_residual_is_reported() {
        let g = Grid::new(16, 8.0).unwrap();
        let mut m = NspModel::linear(g, PhysParams::default()).unwrap();
        let s0 = random_state(g, 7, 0.05);
        let mut u = s0.velocity().clone();
        u = u.scaled(0.99);
        let s1 = NspState::new(s0.rho().clone(), u, 0.1).unwrap();
        let r = report(&s1, Some(&s0), &mut m, &request()).unwrap();
        assert!(r.step_residual.is_some());
    }
}
