use serde::{Deserialize, Serialize};

use super::field::{SpectralField, Transformer};
use crate::error::{NspError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    /// Lebesgue norm, `p` in `[1, inf]`.
    Lp(f64),
    /// Homogeneous Sobolev norm `||Lambda^s f||_{L^2}`; `s` may be negative.
    Hdot(f64),
    /// Inhomogeneous Sobolev norm, `sum_{j <= k} ||f||_{Hdot^j}^2`.
    Hk(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroModePolicy {
    Exclude,
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub kind: NormKind,
    pub zero_mode: ZeroModePolicy,
}

impl NormRequest {
    pub fn l2() -> Self {
        Self::lp(2.0)
    }

    pub fn lp(p: f64) -> Self {
        Self {
            kind: NormKind::Lp(p),
            zero_mode: ZeroModePolicy::Include,
        }
    }

    pub fn linf() -> Self {
        Self::lp(f64::INFINITY)
    }

    /// Homogeneous norm; the zero mode is excluded.
    pub fn hdot(s: f64) -> Self {
        Self {
            kind: NormKind::Hdot(s),
            zero_mode: ZeroModePolicy::Exclude,
        }
    }

    pub fn hk(k: u32) -> Self {
        Self {
            kind: NormKind::Hk(k),
            zero_mode: ZeroModePolicy::Include,
        }
    }
}

/// `||f||_{Hdot^s}^2` by Parseval, `L^3 sum |k|^{2s} |c_k|^2`.
pub fn hdot_squared(field: &SpectralField, s: f64, zero_mode: ZeroModePolicy) -> Result<f64> {
    let grid = *field.grid();
    let zero = field.zero_mode().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let zero_weight = match zero_mode {
        ZeroModePolicy::Exclude => 0.0,
        ZeroModePolicy::Include if s < 0.0 => {
            if zero > 0.0 {
                return Err(NspError::ZeroModeRetained { magnitude: zero });
            }
            0.0
        }
        ZeroModePolicy::Include if s == 0.0 => 1.0,
        ZeroModePolicy::Include => 0.0,
    };
    let dk2 = grid.dk() * grid.dk();
    Ok(field.weighted_energy(|idx| {
        if idx == 0 {
            zero_weight
        } else if s == 0.0 {
            1.0
        } else {
            (grid.shell(idx) as f64 * dk2).powf(s)
        }
    }))
}

/// Norms that need no physical-space samples.
fn spectral_norm(field: &SpectralField, req: NormRequest) -> Option<Result<f64>> {
    match req.kind {
        NormKind::Lp(p) if p == 2.0 => Some(hdot_squared(field, 0.0, req.zero_mode).map(f64::sqrt)),
        NormKind::Hdot(s) => Some(hdot_squared(field, s, req.zero_mode).map(f64::sqrt)),
        NormKind::Hk(k) => Some(
            (0..=k)
                .map(|j| hdot_squared(field, j as f64, req.zero_mode))
                .sum::<Result<f64>>()
                .map(f64::sqrt),
        ),
        NormKind::Lp(_) => None,
    }
}

/// Grid-quadrature `L^p` norm of the pointwise magnitude; `L^inf` is the
/// grid maximum, a lower bound on the true supremum.
pub fn lp_of_samples(samples: &[f64], p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if p == 2.0 {
        (samples.iter().map(|v| v * v).sum::<f64>() * cell_volume).sqrt()
    } else {
        (samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * cell_volume).powf(1.0 / p)
    }
}

fn validate(req: NormRequest) -> Result<()> {
    if let NormKind::Lp(p) = req.kind {
        if !(p >= 1.0) {
            return Err(NspError::InvalidArgument(format!("L^p needs p >= 1, got {p}")));
        }
    }
    Ok(())
}

impl Transformer {
    pub fn norm(&mut self, field: &SpectralField, req: NormRequest) -> Result<f64> {
        validate(req)?;
        if let Some(v) = spectral_norm(field, req) {
            return v;
        }
        let NormKind::Lp(p) = req.kind else { unreachable!() };
        let mut f = field.clone();
        if req.zero_mode == ZeroModePolicy::Exclude {
            for c in f.components_mut() {
                c[0] = Default::default();
            }
        }
        let phys = self.to_physical(&f);
        Ok(lp_of_samples(&phys.magnitude(), p, field.grid().cell_volume()))
    }
}

/// Norm of a field; builds a transform plan only when the request needs
/// physical-space quadrature.
pub fn norm(field: &SpectralField, req: NormRequest) -> Result<f64> {
    validate(req)?;
    match spectral_norm(field, req) {
        Some(v) => v,
        None => Transformer::new(*field.grid()).norm(field, req),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{to_spectral, Grid, PhysicalField, Rank};
    use std::f64::consts::PI;

    #[test]
    fn zero_field_norms_vanish() {
        let g = Grid::new(16, 5.0).unwrap();
        let f = SpectralField::zeros(g, Rank::Vector);
        for req in [
            NormRequest::l2(),
            NormRequest::lp(3.0),
            NormRequest::linf(),
            NormRequest::hdot(-0.7),
            NormRequest::hdot(1.5),
            NormRequest::hk(3),
        ] {
            assert_eq!(norm(&f, req).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_mode_hdot() {
        let g = Grid::new(16, 3.0).unwrap();
        let l = g.length();
        let f = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| {
            (2.0 * PI * x[0] / l).cos()
        }))
        .unwrap();
        let l2 = norm(&f, NormRequest::l2()).unwrap();
        assert!((l2 - (l.powi(3) / 2.0).sqrt()).abs() < 1e-12 * l2);
        for s in [-1.2, -0.5, 0.5, 2.0] {
            let h = norm(&f, NormRequest::hdot(s)).unwrap();
            let expect = (2.0 * PI / l).powf(s) * l2;
            assert!((h - expect).abs() < 1e-12 * expect, "s={s}");
        }
    }

    #[test]
    fn negative_order_with_retained_mean_is_an_error() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| 1.0 + x[0].sin())).unwrap();
        let req = NormRequest {
            kind: NormKind::Hdot(-0.5),
            zero_mode: ZeroModePolicy::Include,
        };
        assert!(matches!(norm(&f, req), Err(NspError::ZeroModeRetained { .. })));
        assert!(norm(&f, NormRequest::hdot(-0.5)).is_ok());
    }

    #[test]
    fn quadrature_l2_matches_parseval() {
        let g = Grid::new(16, 2.0).unwrap();
        let f = crate::spectral::tests_support::random_field(g, Rank::Vector, 9);
        let phys = crate::spectral::to_physical(&f);
        let quad = lp_of_samples(&phys.magnitude(), 2.0, g.cell_volume());
        let spec = norm(&f, NormRequest::l2()).unwrap();
        assert!((quad - spec).abs() < 1e-12 * spec);
    }

    #[test]
    fn linf_of_cosine() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = to_spectral(&PhysicalField::from_fn(g, Rank::Scalar, |_, x| {
            -2.5 * (2.0 * PI * x[1]).cos()
        }))
        .unwrap();
        assert!((norm(&f, NormRequest::linf()).unwrap() - 2.5).abs() < 1e-12);
    }
}
