//! Numerical checks of the interpolation, composition, commutator and
//! Riesz-potential inequalities on ensembles of random band-limited fields.
//!
//! Every check measures the largest ratio of left to right side over the
//! ensemble and over the doubled ensemble; the check is stable when the two
//! maxima differ by less than [`STABILITY_TOL`].

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{NspError, Result};
use crate::model::{f_scalar, h_scalar, PressureLaw};
use crate::spectral::{lambda_power, lp_of_samples, partials, Grid, Rank, SpectralField, Transformer};
use crate::symbol::integrate;

/// Largest relative change of the maximum ratio under doubling.
pub const STABILITY_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldEnsemble {
    pub count: usize,
    /// Coefficients scale like `|k|^{-slope}`.
    pub slope: f64,
    /// Largest retained `|m|`; products of two members stay resolved.
    pub cutoff: f64,
    pub seed: u64,
    pub n: usize,
    pub length: f64,
}

impl FieldEnsemble {
    /// `count` members on a `32^3` grid of edge `2 pi`, slope 2.
    pub fn new(count: usize, seed: u64) -> Result<Self> {
        Self::with_shape(count, 2.0, seed, 32, 2.0 * std::f64::consts::PI)
    }

    pub fn with_shape(count: usize, slope: f64, seed: u64, n: usize, length: f64) -> Result<Self> {
        let ens = Self {
            count,
            slope,
            cutoff: (n / 4) as f64 - 1.0,
            seed,
            n,
            length,
        };
        ens.validate()?;
        Ok(ens)
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n, self.length)?;
        if self.count == 0 {
            return Err(NspError::InvalidArgument("ensemble needs at least one member".into()));
        }
        if !(self.slope.is_finite() && self.slope >= 0.0) {
            return Err(NspError::InvalidArgument(format!("slope {} must be finite and >= 0", self.slope)));
        }
        if !(self.cutoff >= 1.0 && self.cutoff < self.n as f64 / 4.0) {
            return Err(NspError::InvalidArgument(format!(
                "cutoff {} must lie in [1, n/4) so that products are resolved",
                self.cutoff
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.length).expect("validated")
    }

    pub fn doubled(&self) -> Self {
        Self {
            count: 2 * self.count,
            ..*self
        }
    }

    /// Member `index`: real, mean zero, unit `L^2` norm. Each index draws
    /// from its own ChaCha stream.
    pub fn member(&self, index: usize) -> SpectralField {
        let grid = self.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let cut2 = self.cutoff * self.cutoff;
        let raw: Vec<Complex64> = (0..grid.len())
            .map(|idx| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                let shell = grid.shell(idx) as f64;
                if idx == 0 || shell > cut2 {
                    Complex64::default()
                } else {
                    Complex64::new(a, b) * shell.powf(-0.5 * self.slope)
                }
            })
            .collect();
        let sym: Vec<Complex64> = (0..grid.len())
            .map(|idx| 0.5 * (raw[idx] + raw[grid.conjugate_index(idx)].conj()))
            .collect();
        let f = SpectralField::from_components(grid, vec![sym]).expect("finite coefficients");
        let norm = f.weighted_energy(|_| 1.0).sqrt();
        f.scaled(1.0 / norm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    /// Maximum ratio over the ensemble.
    pub max_ratio: f64,
    /// Maximum ratio over the doubled ensemble.
    pub doubled_max_ratio: f64,
    /// `|doubled - max| / max`.
    pub change: f64,
    pub stable: bool,
    pub pass: bool,
}

fn run_check(
    name: String,
    ens: &FieldEnsemble,
    bound: Option<f64>,
    mut ratio: impl FnMut(usize) -> Result<f64>,
) -> Result<LemmaCheck> {
    ens.validate()?;
    let mut max_ratio = 0.0f64;
    let mut doubled_max_ratio = 0.0f64;
    for i in 0..2 * ens.count {
        let r = ratio(i)?;
        if !r.is_finite() {
            return Err(NspError::Divergent(format!("{name}: member {i} gave ratio {r}")));
        }
        if i < ens.count {
            max_ratio = max_ratio.max(r);
        }
        doubled_max_ratio = doubled_max_ratio.max(r);
    }
    let change = if max_ratio > 0.0 {
        (doubled_max_ratio - max_ratio).abs() / max_ratio
    } else {
        doubled_max_ratio
    };
    let stable = change < STABILITY_TOL;
    let pass = stable && bound.is_none_or(|b| doubled_max_ratio <= b);
    Ok(LemmaCheck {
        name,
        max_ratio,
        doubled_max_ratio,
        change,
        stable,
        pass,
    })
}

/// Sorted axis tuples of length `k` with their multinomial multiplicities.
fn multisets(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..3 {
            cur.push(a);
            rec(k, a, cur, out);
            cur.pop();
        }
    }
    let mut sets = Vec::new();
    rec(k, 0, &mut Vec::new(), &mut sets);
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    sets.into_iter()
        .map(|s| {
            let counts = [0, 1, 2].map(|a| s.iter().filter(|&&b| b == a).count());
            let w = fact(k) / counts.iter().map(|&c| fact(c)).product::<f64>();
            (s, w)
        })
        .collect()
}

fn samples(plan: &mut Transformer, f: &SpectralField) -> Vec<f64> {
    plan.inverse_real(&[f.component(0)]).pop().expect("one component")
}

/// Pointwise Frobenius magnitude of the tensor `grad^k f`.
fn grad_magnitude(plan: &mut Transformer, f: &SpectralField, k: usize) -> Vec<f64> {
    if k == 0 {
        return samples(plan, f).into_iter().map(f64::abs).collect();
    }
    let mut acc = vec![0.0; f.grid().len()];
    for (axes, w) in multisets(k) {
        let d = samples(plan, &partials(f, &axes));
        for (a, v) in acc.iter_mut().zip(d) {
            *a += w * v * v;
        }
    }
    acc.into_iter().map(f64::sqrt).collect()
}

fn lp(grid: &Grid, values: &[f64], p: f64) -> f64 {
    lp_of_samples(values, p, grid.cell_volume())
}

fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Indices of `||grad^alpha f||_p <= C ||grad^m f||_q^{1-theta} ||grad^l f||_r^theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnIndices {
    pub alpha: u32,
    pub m: u32,
    pub ell: u32,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl GnIndices {
    /// `theta` from the scaling relation, with the admissibility conditions.
    pub fn theta(&self) -> Result<f64> {
        let GnIndices { alpha, m, ell, p, q, r } = *self;
        if !(m <= ell && alpha <= ell) {
            return Err(NspError::InvalidArgument(format!("need m, alpha <= l, got ({alpha}, {m}, {ell})")));
        }
        if [p, q, r].iter().any(|&x| !(x >= 1.0)) {
            return Err(NspError::InvalidArgument("Lebesgue exponents must be >= 1".into()));
        }
        let lo = m as f64 / 3.0 - recip(q);
        let hi = ell as f64 / 3.0 - recip(r);
        let lhs = alpha as f64 / 3.0 - recip(p);
        if (hi - lo).abs() < 1e-14 {
            return Err(NspError::InvalidArgument(
                "scaling relation does not determine theta".into(),
            ));
        }
        let theta = (lhs - lo) / (hi - lo);
        let floor = if ell > m {
            (alpha as f64 - m as f64) / (ell - m) as f64
        } else {
            0.0
        };
        if !(-1e-14..=1.0 + 1e-14).contains(&theta) || theta < floor - 1e-14 {
            return Err(NspError::InvalidArgument(format!(
                "scaling relation requires theta = {theta}, outside [{floor}, 1]"
            )));
        }
        let gap = ell as f64 - m as f64 - 3.0 * recip(r);
        let exceptional = r > 1.0 && r.is_finite() && gap >= 0.0 && (gap - gap.round()).abs() < 1e-12;
        if exceptional && theta > 1.0 - 1e-14 {
            return Err(NspError::InvalidArgument(format!(
                "theta = 1 is excluded when l - m - 3/r = {gap} is a nonnegative integer"
            )));
        }
        Ok(theta.clamp(0.0, 1.0))
    }
}

pub fn gn_ratio(f: &SpectralField, idx: &GnIndices, plan: &mut Transformer) -> Result<f64> {
    let theta = idx.theta()?;
    let grid = *f.grid();
    let lhs = lp(&grid, &grad_magnitude(plan, f, idx.alpha as usize), idx.p);
    let low = lp(&grid, &grad_magnitude(plan, f, idx.m as usize), idx.q);
    let high = lp(&grid, &grad_magnitude(plan, f, idx.ell as usize), idx.r);
    Ok(lhs / (low.powf(1.0 - theta) * high.powf(theta)))
}

pub fn gn_check(ens: &FieldEnsemble, idx: GnIndices) -> Result<LemmaCheck> {
    idx.theta()?;
    let mut plan = Transformer::new(ens.grid());
    let GnIndices { alpha, m, ell, p, q, r } = idx;
    let name = format!("gagliardo-nirenberg a={alpha} m={m} l={ell} p={p} q={q} r={r}");
    run_check(name, ens, None, |i| {
        gn_ratio(&ens.member(i), &idx, &mut plan)
    })
}

/// `||grad^l f|| / (||grad^{l+1} f||^{1-theta} ||f||_{Hdot^{-s}}^theta)` with
/// `theta = 1 / (l + 1 + s)`; at most one by Hoelder.
pub fn neg_interp_ratio(f: &SpectralField, ell: u32, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(NspError::InvalidArgument(format!("s = {s} must be >= 0")));
    }
    let mean = f.zero_mode().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = f.component(0).iter().fold(0.0, |a: f64, z| a.max(z.norm()));
    if mean > 1e-12 * scale {
        return Err(NspError::ZeroModeRetained { magnitude: mean });
    }
    let theta = 1.0 / (ell as f64 + 1.0 + s);
    let hdot = |order: f64| {
        crate::spectral::hdot_squared(f, order, crate::spectral::ZeroModePolicy::Exclude).map(f64::sqrt)
    };
    let lhs = hdot(ell as f64)?;
    let rhs = hdot(ell as f64 + 1.0)?.powf(1.0 - theta) * hdot(-s)?.powf(theta);
    Ok(lhs / rhs)
}

pub fn neg_interp_check(ens: &FieldEnsemble, ell: u32, s: f64) -> Result<LemmaCheck> {
    run_check(format!("negative interpolation l={ell} s={s}"), ens, Some(1.0 + 1e-10), |i| {
        neg_interp_ratio(&ens.member(i), ell, s)
    })
}

/// `q` with `1/q + s/3 = 1/p`, after checking `0 < s < 3` and `1 < p < q < inf`.
pub fn hls_exponent(s: f64, p: f64) -> Result<f64> {
    if !(s > 0.0 && s < 3.0) {
        return Err(NspError::InvalidArgument(format!("s = {s} outside (0, 3)")));
    }
    let inv_q = 1.0 / p - s / 3.0;
    if !(p > 1.0 && inv_q > 0.0) {
        return Err(NspError::InvalidArgument(format!(
            "need 1 < p and 1/p - s/3 > 0, got p = {p}, s = {s}"
        )));
    }
    Ok(1.0 / inv_q)
}

pub fn hls_ratio(f: &SpectralField, s: f64, p: f64, plan: &mut Transformer) -> Result<f64> {
    let q = hls_exponent(s, p)?;
    let grid = *f.grid();
    let riesz = samples(plan, &lambda_power(f, -s));
    let base = samples(plan, f);
    Ok(lp(&grid, &riesz, q) / lp(&grid, &base, p))
}

pub fn hls_check(ens: &FieldEnsemble, s: f64, p: f64) -> Result<LemmaCheck> {
    hls_exponent(s, p)?;
    let mut plan = Transformer::new(ens.grid());
    run_check(format!("hardy-littlewood-sobolev s={s} p={p}"), ens, None, |i| {
        hls_ratio(&ens.member(i), s, p, &mut plan)
    })
}

/// Radius beyond which the Riesz potential of the Gaussian is replaced by
/// its asymptotic series.
const HLS_SWITCH: f64 = 20.0;

/// `Lambda^{-s} e^{-|x|^2/2}` at radius `rho`, in whole space.
fn riesz_gaussian(rho: f64, s: f64) -> Result<f64> {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    if rho <= HLS_SWITCH {
        let k_max = 12.0;
        if rho < 1e-6 {
            let v = integrate(|k| k.powf(2.0 - s) * (-0.5 * k * k).exp(), 0.0, k_max, 1e-12)?.value;
            return Ok(c * v);
        }
        let v = integrate(|k| k.powf(1.0 - s) * (-0.5 * k * k).exp() * (k * rho).sin(), 0.0, k_max, 1e-12)?.value;
        return Ok(c * v / rho);
    }
    // 1F1(a; 3/2; -z) ~ Gamma(3/2) / Gamma(3/2 - a) z^{-a} sum (a)_n (a - 1/2)_n / n! z^{-n}
    let a = 0.5 * (3.0 - s);
    let z = 0.5 * rho * rho;
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 0..30 {
        sum += term;
        let nf = n as f64;
        term *= (a + nf) * (a - 0.5 + nf) / ((nf + 1.0) * z);
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(2f64.powf(-0.5 * s) * gamma(a) / gamma(1.5 - a) * z.powf(-a) * sum)
}

/// `||Lambda^{-s} G||_{L^q} / ||G||_{L^p}` for the Gaussian `G = e^{-|x|^2/2}`
/// on whole space, by radial quadrature.
pub fn hls_gaussian_ratio(s: f64, p: f64) -> Result<f64> {
    let q = hls_exponent(s, p)?;
    let four_pi = 4.0 * std::f64::consts::PI;
    let inner = integrate(
        |rho| {
            let g = riesz_gaussian(rho, s).unwrap_or(f64::NAN);
            rho * rho * g.abs().powf(q)
        },
        0.0,
        HLS_SWITCH,
        1e-11,
    )?
    .value;
    // integrand in log radius decays like rho^{3q (1/p - 1)}
    let rate = 3.0 * q * (1.0 - 1.0 / p);
    let span = 45.0 / rate;
    let x0 = HLS_SWITCH.ln();
    let outer = integrate(
        |x| {
            let rho = x.exp();
            let g = riesz_gaussian(rho, s).unwrap_or(f64::NAN);
            rho.powi(3) * g.abs().powf(q)
        },
        x0,
        x0 + span,
        1e-11,
    )?
    .value;
    let lq = (four_pi * (inner + outer)).powf(1.0 / q);
    let lp_norm = (2.0 * std::f64::consts::PI / p).powf(1.5 / p);
    Ok(lq / lp_norm)
}

/// `[grad^m, f] g = grad^m (f g) - f grad^m g`, pointwise Frobenius magnitude.
pub fn commutator(f: &SpectralField, g: &SpectralField, m: u32, plan: &mut Transformer) -> Result<Vec<f64>> {
    f.check_compatible(g)?;
    if f.rank() != Rank::Scalar || g.rank() != Rank::Scalar {
        return Err(NspError::Shape("commutator needs scalar fields".into()));
    }
    if m == 0 {
        return Err(NspError::InvalidArgument("commutator needs m >= 1".into()));
    }
    let grid = *f.grid();
    let fx = samples(plan, f);
    let gx = samples(plan, g);
    let prod: Vec<f64> = fx.iter().zip(&gx).map(|(a, b)| a * b).collect();
    let fg = SpectralField::from_components(grid, plan.forward_real(&[&prod]))?;
    let mut acc = vec![0.0; grid.len()];
    for (axes, w) in multisets(m as usize) {
        let d_fg = samples(plan, &partials(&fg, &axes));
        let d_g = samples(plan, &partials(g, &axes));
        for i in 0..grid.len() {
            let c = d_fg[i] - fx[i] * d_g[i];
            acc[i] += w * c * c;
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorExponents {
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl Default for CommutatorExponents {
    fn default() -> Self {
        Self {
            p: 2.0,
            p1: f64::INFINITY,
            p2: 2.0,
            p3: 2.0,
            p4: f64::INFINITY,
        }
    }
}

impl CommutatorExponents {
    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 1.0 && x.is_finite();
        if !(open(self.p) && open(self.p2) && open(self.p3) && self.p1 >= 1.0 && self.p4 >= 1.0) {
            return Err(NspError::InvalidArgument(format!("{self:?}: p, p2, p3 must lie in (1, inf)")));
        }
        let a = recip(self.p1) + recip(self.p2);
        let b = recip(self.p3) + recip(self.p4);
        if (a - recip(self.p)).abs() > 1e-12 || (b - recip(self.p)).abs() > 1e-12 {
            return Err(NspError::InvalidArgument(format!(
                "{self:?}: need 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4"
            )));
        }
        Ok(())
    }
}

pub fn commutator_ratio(
    f: &SpectralField,
    g: &SpectralField,
    m: u32,
    ex: &CommutatorExponents,
    plan: &mut Transformer,
) -> Result<f64> {
    ex.validate()?;
    let grid = *f.grid();
    let lhs = lp(&grid, &commutator(f, g, m, plan)?, ex.p);
    let m = m as usize;
    let rhs = lp(&grid, &grad_magnitude(plan, f, 1), ex.p1) * lp(&grid, &grad_magnitude(plan, g, m - 1), ex.p2)
        + lp(&grid, &grad_magnitude(plan, f, m), ex.p3) * lp(&grid, &grad_magnitude(plan, g, 0), ex.p4);
    Ok(lhs / rhs)
}

/// Members `2i` and `2i + 1` form pair `i`.
pub fn commutator_check(ens: &FieldEnsemble, m: u32, ex: CommutatorExponents) -> Result<LemmaCheck> {
    ex.validate()?;
    if m == 0 {
        return Err(NspError::InvalidArgument("commutator needs m >= 1".into()));
    }
    let mut plan = Transformer::new(ens.grid());
    run_check(format!("commutator m={m}"), ens, None, |i| {
        commutator_ratio(&ens.member(2 * i), &ens.member(2 * i + 1), m, &ex, &mut plan)
    })
}

/// Smooth function applied pointwise to a density perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Composite {
    Identity,
    /// `r / (1 + r)`.
    H,
    /// `p'(1 + r) / (1 + r) - 1`.
    F(PressureLaw),
}

impl Composite {
    /// Value and first three derivatives at `r`.
    pub fn derivatives(&self, r: f64) -> [f64; 4] {
        let x = 1.0 + r;
        match *self {
            Composite::Identity => [r, 1.0, 0.0, 0.0],
            Composite::H => [h_scalar(r), x.powi(-2), -2.0 * x.powi(-3), 6.0 * x.powi(-4)],
            Composite::F(law) => {
                let a = match law {
                    PressureLaw::Linear => -1.0,
                    PressureLaw::Gamma(g) => g - 2.0,
                };
                [
                    f_scalar(r, law),
                    a * x.powf(a - 1.0),
                    a * (a - 1.0) * x.powf(a - 2.0),
                    a * (a - 1.0) * (a - 2.0) * x.powf(a - 3.0),
                ]
            }
        }
    }
}

/// Pointwise magnitude of `grad^m g(rho)` by the chain rule, for `m <= 3`.
pub fn composite_gradient(rho: &SpectralField, g: Composite, m: u32, plan: &mut Transformer) -> Result<Vec<f64>> {
    if !(1..=3).contains(&m) {
        return Err(NspError::InvalidArgument(format!("composition check supports 1 <= m <= 3, got {m}")));
    }
    let r = samples(plan, rho);
    let d: Vec<[f64; 4]> = r.iter().map(|&v| g.derivatives(v)).collect();
    let mut cache = std::collections::HashMap::new();
    let mut deriv = |axes: Vec<usize>, plan: &mut Transformer| -> Vec<f64> {
        cache.entry(axes.clone()).or_insert_with(|| samples(plan, &partials(rho, &axes))).clone()
    };
    let mut acc = vec![0.0; r.len()];
    for (axes, w) in multisets(m as usize) {
        let term: Vec<f64> = match axes.as_slice() {
            &[a] => {
                let ra = deriv(vec![a], plan);
                (0..r.len()).map(|i| d[i][1] * ra[i]).collect()
            }
            &[a, b] => {
                let (ra, rb, rab) = (deriv(vec![a], plan), deriv(vec![b], plan), deriv(vec![a, b], plan));
                (0..r.len()).map(|i| d[i][2] * ra[i] * rb[i] + d[i][1] * rab[i]).collect()
            }
            &[a, b, c] => {
                let (ra, rb, rc) = (deriv(vec![a], plan), deriv(vec![b], plan), deriv(vec![c], plan));
                let (rab, rac, rbc) = (deriv(vec![a, b], plan), deriv(vec![a, c], plan), deriv(vec![b, c], plan));
                let rabc = deriv(vec![a, b, c], plan);
                (0..r.len())
                    .map(|i| {
                        d[i][3] * ra[i] * rb[i] * rc[i]
                            + d[i][2] * (rab[i] * rc[i] + rac[i] * rb[i] + rbc[i] * ra[i])
                            + d[i][1] * rabc[i]
                    })
                    .collect()
            }
            _ => unreachable!("m <= 3"),
        };
        for (a, t) in acc.iter_mut().zip(term) {
            *a += w * t * t;
        }
    }
    if acc.iter().any(|v| !v.is_finite()) {
        return Err(NspError::Divergent("composite derivative is not finite".into()));
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// `||grad^m g(rho)||_inf / ||grad^m rho||_inf`; needs `||rho||_inf <= 1`.
pub fn composition_ratio(rho: &SpectralField, g: Composite, m: u32, plan: &mut Transformer) -> Result<f64> {
    let sup = samples(plan, rho).iter().fold(0.0, |a: f64, v| a.max(v.abs()));
    if sup > 1.0 {
        return Err(NspError::InvalidArgument(format!("||rho||_inf = {sup} exceeds 1")));
    }
    let grid = *rho.grid();
    let lhs = lp(&grid, &composite_gradient(rho, g, m, plan)?, f64::INFINITY);
    let rhs = lp(&grid, &grad_magnitude(plan, rho, m as usize), f64::INFINITY);
    Ok(lhs / rhs)
}

/// Members are rescaled to `||rho||_inf = amplitude` before the check.
pub fn composition_check(ens: &FieldEnsemble, g: Composite, m: u32, amplitude: f64) -> Result<LemmaCheck> {
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        return Err(NspError::InvalidArgument(format!("amplitude {amplitude} outside (0, 1]")));
    }
    let mut plan = Transformer::new(ens.grid());
    run_check(format!("composition {g:?} m={m}"), ens, None, |i| {
        let f = ens.member(i);
        let sup = samples(&mut plan, &f).iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        composition_ratio(&f.scaled(amplitude / sup), g, m, &mut plan)
    })
}

/// The six default measurements.
pub fn default_suite(ens: &FieldEnsemble) -> Result<Vec<LemmaCheck>> {
    Ok(vec![
        gn_check(ens, GnIndices { alpha: 0, m: 0, ell: 1, p: 6.0, q: 2.0, r: 2.0 })?,
        gn_check(ens, GnIndices { alpha: 0, m: 1, ell: 2, p: f64::INFINITY, q: 2.0, r: 2.0 })?,
        neg_interp_check(ens, 1, 0.5)?,
        hls_check(ens, 1.0, 1.2)?,
        commutator_check(ens, 2, CommutatorExponents::default())?,
        composition_check(ens, Composite::H, 1, 0.5)?,
    ])
}
