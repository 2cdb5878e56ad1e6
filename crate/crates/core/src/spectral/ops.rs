//! Fourier multipliers, derivatives and the Helmholtz split.

use num_complex::Complex64;

use super::field::{Rank, SpectralField};
use crate::error::{NspError, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn magnitude(k: [f64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Coefficient-wise product with a scalar symbol `m(k)`.
///
/// The symbol is never evaluated at `k = 0`; `zero_value` is used there.
/// Every component of a vector field is multiplied by the same symbol.
pub fn apply_multiplier(
    field: &SpectralField,
    m: impl Fn([f64; 3]) -> Complex64,
    zero_value: Complex64,
) -> Result<SpectralField> {
    let grid = *field.grid();
    let mut symbol = vec![zero_value; grid.len()];
    for (idx, s) in symbol.iter_mut().enumerate().skip(1) {
        let k = grid.wavevector(idx);
        let v = m(k);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(NspError::NonFiniteMultiplier { k });
        }
        *s = v;
    }
    let mut out = field.clone();
    for c in out.components_mut() {
        for (z, s) in c.iter_mut().zip(&symbol) {
            *z *= s;
        }
    }
    Ok(out)
}

/// Coefficient-wise product of a vector field with a 3x3 symbol.
pub fn apply_matrix_multiplier(
    field: &SpectralField,
    m: impl Fn([f64; 3]) -> [[Complex64; 3]; 3],
    zero_value: [[Complex64; 3]; 3],
) -> Result<SpectralField> {
    if field.rank() != Rank::Vector {
        return Err(NspError::Shape("matrix symbol needs a vector field".into()));
    }
    let grid = *field.grid();
    let src = field.components();
    let mut out = SpectralField::zeros(grid, Rank::Vector);
    {
        let dst = out.components_mut();
        for idx in 0..grid.len() {
            let mat = if idx == 0 {
                zero_value
            } else {
                let k = grid.wavevector(idx);
                let mat = m(k);
                if mat.iter().flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(NspError::NonFiniteMultiplier { k });
                }
                mat
            };
            for (r, row) in mat.iter().enumerate() {
                dst[r][idx] = row[0] * src[0][idx] + row[1] * src[1][idx] + row[2] * src[2][idx];
            }
        }
    }
    Ok(out)
}

/// `Lambda^s`, the symbol `|k|^s`. The zero mode is kept for `s = 0` and
/// dropped otherwise.
pub fn lambda_power(field: &SpectralField, s: f64) -> SpectralField {
    let zero = if s == 0.0 { 1.0 } else { 0.0 };
    apply_multiplier(field, |k| Complex64::new(magnitude(k).powf(s), 0.0), Complex64::new(zero, 0.0))
        .expect("|k|^s is finite away from k = 0")
}

/// Spectral partial derivative along `axis`. The Nyquist plane of that axis
/// is zeroed so the result stays Hermitian.
pub fn partial(field: &SpectralField, axis: usize) -> SpectralField {
    let grid = *field.grid();
    let half = -((grid.n() / 2) as i64);
    let mut out = field.clone();
    for c in out.components_mut() {
        for (idx, z) in c.iter_mut().enumerate() {
            let m = grid.mode(idx)[axis];
            if m == half {
                *z = Complex64::default();
            } else {
                *z *= I * (m as f64 * grid.dk());
            }
        }
    }
    out
}

/// Mixed partial derivative over the listed axes.
pub fn partials(field: &SpectralField, axes: &[usize]) -> SpectralField {
    axes.iter().fold(field.clone(), |f, &a| partial(&f, a))
}

pub fn gradient(field: &SpectralField) -> Result<SpectralField> {
    if field.rank() != Rank::Scalar {
        return Err(NspError::Shape("gradient needs a scalar field".into()));
    }
    let comps = (0..3)
        .map(|a| partial(field, a).into_components().remove(0))
        .collect();
    SpectralField::from_components(*field.grid(), comps)
}

pub fn divergence(field: &SpectralField) -> Result<SpectralField> {
    if field.rank() != Rank::Vector {
        return Err(NspError::Shape("divergence needs a vector field".into()));
    }
    let grid = *field.grid();
    let mut acc = vec![Complex64::default(); grid.len()];
    for a in 0..3 {
        let d = partial(&field.scalar_component(a), a);
        for (s, v) in acc.iter_mut().zip(d.component(0)) {
            *s += v;
        }
    }
    SpectralField::from_components(grid, vec![acc])
}

/// Splits a vector field into its longitudinal part `k (k.u) / |k|^2` and
/// the divergence-free remainder. The zero mode goes to the solenoidal part.
pub fn helmholtz_split(field: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    if field.rank() != Rank::Vector {
        return Err(NspError::Shape("Helmholtz split needs a vector field".into()));
    }
    let grid = *field.grid();
    let src = field.components();
    let mut comp = SpectralField::zeros(grid, Rank::Vector);
    let mut sol = field.clone();
    {
        let c = comp.components_mut();
        let s = sol.components_mut();
        for idx in 1..grid.len() {
            let k = grid.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let dot = (0..3).map(|a| src[a][idx] * k[a]).sum::<Complex64>() / k2;
            for a in 0..3 {
                c[a][idx] = dot * k[a];
                s[a][idx] = src[a][idx] - c[a][idx];
            }
        }
    }
    Ok((comp, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norm, to_physical, to_spectral, Grid, NormRequest, PhysicalField};
    use std::f64::consts::PI;

    fn g() -> Grid {
        Grid::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn identity_multiplier() {
        let f = crate::spectral::tests_support::random_field(g(), Rank::Vector, 3);
        let out = apply_multiplier(&f, |_| Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn lambda_two_on_cosine_is_minus_laplacian() {
        let grid = Grid::new(16, 3.0).unwrap();
        let l = grid.length();
        let f = PhysicalField::from_fn(grid, Rank::Scalar, |_, x| (2.0 * PI * x[0] / l).cos());
        let out = to_physical(&lambda_power(&to_spectral(&f).unwrap(), 2.0));
        let c = (2.0 * PI / l).powi(2);
        for (a, b) in out.component(0).iter().zip(f.component(0)) {
            assert!((a - c * b).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_symbol_names_wavevector() {
        let f = crate::spectral::tests_support::random_field(g(), Rank::Scalar, 1);
        let err = apply_multiplier(
            &f,
            |k| if k[0] > 2.5 { Complex64::new(f64::INFINITY, 0.0) } else { Complex64::new(1.0, 0.0) },
            Complex64::new(0.0, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, NspError::NonFiniteMultiplier { k } if k[0] > 2.5));
    }

    #[test]
    fn gradient_has_no_solenoidal_part() {
        let s = crate::spectral::tests_support::random_field(g(), Rank::Scalar, 5);
        let grad = gradient(&s).unwrap();
        let (comp, sol) = helmholtz_split(&grad).unwrap();
        let n = norm(&grad, NormRequest::l2()).unwrap();
        assert!(norm(&sol, NormRequest::l2()).unwrap() < 1e-13 * n);
        assert!(norm(&comp.axpy(-1.0, &grad).unwrap(), NormRequest::l2()).unwrap() < 1e-13 * n);
    }

    #[test]
    fn curl_type_field_has_no_compressible_part() {
        let psi = crate::spectral::tests_support::random_field(g(), Rank::Scalar, 6);
        let u = SpectralField::from_components(
            *psi.grid(),
            vec![
                partial(&psi, 1).scaled(-1.0).into_components().remove(0),
                partial(&psi, 0).into_components().remove(0),
                vec![Complex64::default(); psi.grid().len()],
            ],
        )
        .unwrap();
        let (comp, _) = helmholtz_split(&u).unwrap();
        assert!(norm(&comp, NormRequest::l2()).unwrap() < 1e-13 * norm(&u, NormRequest::l2()).unwrap());
    }

    #[test]
    fn helmholtz_rejects_scalar() {
        let f = SpectralField::zeros(g(), Rank::Scalar);
        assert!(helmholtz_split(&f).is_err());
    }
}
