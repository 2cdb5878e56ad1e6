use std::f64::consts::PI;

use nsp_core::model::{f_scalar, h_scalar};
use nsp_core::spectral::{PhysicalField, Transformer};
use nsp_core::{Grid, NspModel, NspState, PhysParams, PressureLaw, Rank, Recipe, SpectralField};

const A: f64 = 0.2;
const B: f64 = 0.1;
const C: f64 = 0.15;
const D: f64 = -0.1;
const E: f64 = 0.05;

struct Exact {
    r: f64,
    grad_r: [f64; 3],
    grad_phi: [f64; 3],
    u: [f64; 3],
    jac: [[f64; 3]; 3],
    lap_u: [f64; 3],
    grad_div: [f64; 3],
    div_u: f64,
}

/// `rho = A cos(x + y)`, `u = (B sin y + E sin x, C cos z, D sin x)`.
fn exact(p: [f64; 3]) -> Exact {
    let [x, y, z] = p;
    let (sxy, cxy) = (x + y).sin_cos();
    Exact {
        r: A * cxy,
        grad_r: [-A * sxy, -A * sxy, 0.0],
        // Lap Phi = rho gives Phi = -A cos(x + y) / 2
        grad_phi: [0.5 * A * sxy, 0.5 * A * sxy, 0.0],
        u: [B * y.sin() + E * x.sin(), C * z.cos(), D * x.sin()],
        jac: [
            [E * x.cos(), B * y.cos(), 0.0],
            [0.0, 0.0, -C * z.sin()],
            [D * x.cos(), 0.0, 0.0],
        ],
        lap_u: [-B * y.sin() - E * x.sin(), -C * z.cos(), -D * x.sin()],
        grad_div: [-E * x.sin(), 0.0, 0.0],
        div_u: E * x.cos(),
    }
}

fn grid() -> Grid {
    Grid::new(16, 2.0 * PI).unwrap()
}

fn sampled(grid: Grid, plan: &mut Transformer, rank: Rank, f: impl Fn([f64; 3], usize) -> f64) -> SpectralField {
    plan.to_spectral(&PhysicalField::from_fn(grid, rank, |c, x| f(x, c)))
        .unwrap()
        .dealiased()
}

fn manufactured_state(grid: Grid, plan: &mut Transformer) -> NspState {
    let rho = sampled(grid, plan, Rank::Scalar, |p, _| exact(p).r);
    let u = sampled(grid, plan, Rank::Vector, |p, c| exact(p).u[c]);
    NspState::new(rho, u, 0.0).unwrap()
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.components()
        .iter()
        .flatten()
        .zip(b.components().iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

#[test]
fn rhs_matches_pointwise_tendency() {
    let g = grid();
    let mut plan = Transformer::new(g);
    for (mu, lambda, law) in [
        (1.0, 0.0, PressureLaw::Linear),
        (0.7, 0.3, PressureLaw::Gamma(1.4)),
        (0.2, -0.1, PressureLaw::Gamma(2.0)),
    ] {
        let params = PhysParams::new(mu, lambda, law).unwrap();
        let state = manufactured_state(g, &mut plan);
        let mut model = NspModel::new(g, params).unwrap();
        let got = model.rhs(&state).unwrap();

        let want_rho = sampled(g, &mut plan, Rank::Scalar, |p, _| {
            let e = exact(p);
            let adv: f64 = (0..3).map(|a| e.u[a] * e.grad_r[a]).sum();
            -e.div_u - (adv + e.r * e.div_u)
        });
        let want_u = sampled(g, &mut plan, Rank::Vector, |p, a| {
            let e = exact(p);
            let visc = mu * e.lap_u[a] + (mu + lambda) * e.grad_div[a];
            let adv: f64 = (0..3).map(|b| e.u[b] * e.jac[a][b]).sum();
            visc - e.grad_r[a] + e.grad_phi[a] - adv - h_scalar(e.r) * visc - f_scalar(e.r, law) * e.grad_r[a]
        });
        let dr = max_diff(&got.rho, &want_rho);
        let du = max_diff(&got.velocity, &want_u);
        assert!(dr < 1e-14, "density tendency off by {dr:.2e} for {params:?}");
        assert!(du < 1e-14, "velocity tendency off by {du:.2e} for {params:?}");
    }
}

#[test]
fn manufactured_electric_field() {
    let g = grid();
    let mut plan = Transformer::new(g);
    let state = manufactured_state(g, &mut plan);
    let want = sampled(g, &mut plan, Rank::Vector, |p, a| exact(p).grad_phi[a]);
    assert!(max_diff(state.grad_phi(), &want) < 1e-15);
}

#[test]
fn nonlinear_tendency_is_quadratic_at_small_amplitude() {
    let g = Grid::new(16, 16.0 * PI).unwrap();
    let mut model = NspModel::new(g, PhysParams::default()).unwrap();
    let size = |m: &mut NspModel, delta: f64| {
        let s = Recipe::Random { seed: 11, slope: 2.0 }.box_state(g, delta).unwrap();
        let t = m.nonlinear_tendency(&s).unwrap();
        (t.rho.weighted_energy(|_| 1.0) + t.velocity.weighted_energy(|_| 1.0)).sqrt()
    };
    let mut prev = size(&mut model, 1e-2);
    for k in 1..=4 {
        let next = size(&mut model, 1e-2 / 2f64.powi(k));
        let ratio = prev / next;
        assert!((ratio - 4.0).abs() < 0.05, "halving ratio {ratio}");
        prev = next;
    }
}

#[test]
fn full_rhs_linearizes_to_linear_part() {
    let g = Grid::new(16, 16.0 * PI).unwrap();
    let params = PhysParams::new(0.8, 0.1, PressureLaw::Gamma(1.4)).unwrap();
    let mut full = NspModel::new(g, params).unwrap();
    let lin = NspModel::linear(g, params).unwrap();
    let base = Recipe::Random { seed: 5, slope: 1.5 }.box_state(g, 1.0).unwrap();
    let lin_base = lin.linear_tendency(&base);
    let scale = (lin_base.rho.weighted_energy(|_| 1.0) + lin_base.velocity.weighted_energy(|_| 1.0)).sqrt();
    let mut errs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let s = NspState::new(base.rho().scaled(eps), base.velocity().scaled(eps), 0.0).unwrap();
        let t = full.rhs(&s).unwrap();
        let d = t.axpy(-eps, &lin_base).unwrap();
        let err = (d.rho.weighted_energy(|_| 1.0) + d.velocity.weighted_energy(|_| 1.0)).sqrt() / (eps * scale);
        errs.push(err);
    }
    // the relative defect is first order in the amplitude
    for w in errs.windows(2) {
        assert!((w[0] / w[1] - 10.0).abs() < 0.5, "{errs:?}");
    }
}

#[test]
fn linear_tendency_is_linear() {
    let g = Grid::new(16, 16.0 * PI).unwrap();
    let lin = NspModel::linear(g, PhysParams::default()).unwrap();
    let a = Recipe::Random { seed: 1, slope: 1.0 }.box_state(g, 0.3).unwrap();
    let b = Recipe::Random { seed: 2, slope: 1.0 }.box_state(g, 0.7).unwrap();
    let sum = NspState::new(
        a.rho().axpy(-2.5, b.rho()).unwrap(),
        a.velocity().axpy(-2.5, b.velocity()).unwrap(),
        0.0,
    )
    .unwrap();
    let want = lin.linear_tendency(&a).axpy(-2.5, &lin.linear_tendency(&b)).unwrap();
    let got = lin.linear_tendency(&sum);
    assert!(max_diff(&got.rho, &want.rho) < 1e-14);
    assert!(max_diff(&got.velocity, &want.velocity) < 1e-14);
}
