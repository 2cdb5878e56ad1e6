use num_complex::Complex64;

use super::fft::Fft3;
use super::grid::Grid;
use crate::error::{NspError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 3,
        }
    }
}

/// Fourier coefficients of a real scalar or 3-vector field.
///
/// Coefficients follow `f(x) = sum_k c_k exp(i k.x)`, so a constant field
/// `c` has zero mode `c` and `cos(2 pi x / L)` has two modes of value 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: Grid, rank: Rank) -> Self {
        Self {
            grid,
            comps: vec![vec![Complex64::default(); grid.len()]; rank.components()],
        }
    }

    pub fn from_components(grid: Grid, comps: Vec<Vec<Complex64>>) -> Result<Self> {
        if comps.len() != 1 && comps.len() != 3 {
            return Err(NspError::Shape(format!(
                "expected 1 or 3 components, got {}",
                comps.len()
            )));
        }
        if let Some(c) = comps.iter().find(|c| c.len() != grid.len()) {
            return Err(NspError::Shape(format!(
                "component has {} coefficients, grid needs {}",
                c.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, comps })
    }

    /// Builds a field mode by mode from a function of the flat index.
    pub fn from_fn(grid: Grid, rank: Rank, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let comps = (0..rank.components())
            .map(|c| (0..grid.len()).map(|idx| f(c, idx)).collect())
            .collect();
        Self { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        if self.comps.len() == 1 {
            Rank::Scalar
        } else {
            Rank::Vector
        }
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.comps
    }

    /// Extracts component `c` as a scalar field.
    pub fn scalar_component(&self, c: usize) -> SpectralField {
        SpectralField {
            grid: self.grid,
            comps: vec![self.comps[c].clone()],
        }
    }

    pub fn zero_mode(&self) -> Vec<Complex64> {
        self.comps.iter().map(|c| c[0]).collect()
    }

    /// Spatial mean of each component.
    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c[0].re).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().flatten().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.comps.iter_mut().flatten().for_each(|z| *z *= a);
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (dst, src) in out.comps.iter_mut().zip(&other.comps) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
        Ok(out)
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(NspError::Shape("fields live on different grids".into()));
        }
        if self.comps.len() != other.comps.len() {
            return Err(NspError::Shape("fields have different ranks".into()));
        }
        Ok(())
    }

    /// Largest violation of `c(-k) = conj(c(k))`, relative to the largest
    /// coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self
            .comps
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for c in &self.comps {
            for idx in 0..self.grid.len() {
                let j = self.grid.conjugate_index(idx);
                worst = worst.max((c[idx] - c[j].conj()).norm());
            }
        }
        worst / scale
    }

    /// Zeroes every coefficient outside the 2/3 dealias sphere.
    pub fn dealias(&mut self) {
        let grid = self.grid;
        for c in &mut self.comps {
            for (idx, z) in c.iter_mut().enumerate() {
                if !grid.is_dealiased(idx) {
                    *z = Complex64::default();
                }
            }
        }
    }

    pub fn dealiased(mut self) -> SpectralField {
        self.dealias();
        self
    }

    pub fn is_band_limited(&self) -> bool {
        self.comps.iter().all(|c| {
            c.iter()
                .enumerate()
                .all(|(idx, z)| self.grid.is_dealiased(idx) || (z.re == 0.0 && z.im == 0.0))
        })
    }

    /// Weighted Parseval sum `L^3 sum_k w(k) |c_k|^2` over all components.
    pub fn weighted_energy(&self, mut weight: impl FnMut(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for idx in 0..self.grid.len() {
            let w = weight(idx);
            if w == 0.0 {
                continue;
            }
            let s: f64 = self.comps.iter().map(|c| c[idx].norm_sqr()).sum();
            acc += w * s;
        }
        acc * self.grid.volume()
    }
}

/// Real samples on the grid, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    comps: Vec<Vec<f64>>,
}

impl PhysicalField {
    pub fn new(grid: Grid, comps: Vec<Vec<f64>>) -> Result<Self> {
        if comps.len() != 1 && comps.len() != 3 {
            return Err(NspError::Shape(format!(
                "expected 1 or 3 components, got {}",
                comps.len()
            )));
        }
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(NspError::Shape("sample array does not match n^3".into()));
        }
        Ok(Self { grid, comps })
    }

    pub fn scalar(grid: Grid, samples: Vec<f64>) -> Result<Self> {
        Self::new(grid, vec![samples])
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Grid, rank: Rank, f: impl Fn(usize, [f64; 3]) -> f64) -> Self {
        let comps = (0..rank.components())
            .map(|c| (0..grid.len()).map(|idx| f(c, grid.position(idx))).collect())
            .collect();
        Self { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect()
    }
}

/// Transform plan with its scratch space. Plans are cheap to build but not
/// shareable: use one per worker.
pub struct Transformer {
    grid: Grid,
    fft: Fft3,
    buf: Vec<Complex64>,
}

impl Transformer {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            fft: Fft3::new(grid.n()),
            buf: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn to_spectral(&mut self, field: &PhysicalField) -> Result<SpectralField> {
        if field.grid != self.grid {
            return Err(NspError::Shape("field grid differs from plan grid".into()));
        }
        for c in &field.comps {
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(NspError::NonFiniteInput { index });
            }
        }
        let refs: Vec<&[f64]> = field.comps.iter().map(|c| c.as_slice()).collect();
        let comps = self.forward_real(&refs);
        Ok(SpectralField {
            grid: self.grid,
            comps,
        })
    }

    pub fn to_physical(&mut self, field: &SpectralField) -> PhysicalField {
        assert_eq!(field.grid, self.grid, "field grid differs from plan grid");
        let refs: Vec<&[Complex64]> = field.comps.iter().map(|c| c.as_slice()).collect();
        PhysicalField {
            grid: self.grid,
            comps: self.inverse_real(&refs),
        }
    }

    /// Forward transforms of real arrays, two per complex FFT. The result is
    /// exactly Hermitian by construction.
    pub fn forward_real(&mut self, fields: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let grid = self.grid;
        let norm = 1.0 / grid.len() as f64;
        let mut out = Vec::with_capacity(fields.len());
        for pair in fields.chunks(2) {
            let a = pair[0];
            let b = pair.get(1);
            for (i, z) in self.buf.iter_mut().enumerate() {
                *z = Complex64::new(a[i], b.map_or(0.0, |b| b[i]));
            }
            self.fft.forward(&mut self.buf);
            let mut fa = vec![Complex64::default(); grid.len()];
            let mut fb = b.map(|_| vec![Complex64::default(); grid.len()]);
            for idx in 0..grid.len() {
                let z = self.buf[idx];
                let zc = self.buf[grid.conjugate_index(idx)].conj();
                fa[idx] = 0.5 * (z + zc) * norm;
                if let Some(fb) = fb.as_mut() {
                    fb[idx] = Complex64::new(0.0, -0.5) * (z - zc) * norm;
                }
            }
            out.push(fa);
            if let Some(fb) = fb {
                out.push(fb);
            }
        }
        out
    }

    /// Inverse transforms of Hermitian coefficient arrays, two per complex
    /// FFT; imaginary round-off is discarded.
    pub fn inverse_real(&mut self, fields: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(fields.len());
        let i = Complex64::new(0.0, 1.0);
        for pair in fields.chunks(2) {
            let a = pair[0];
            match pair.get(1) {
                Some(b) => {
                    for (k, z) in self.buf.iter_mut().enumerate() {
                        *z = a[k] + i * b[k];
                    }
                }
                None => self.buf.copy_from_slice(a),
            }
            self.fft.inverse(&mut self.buf);
            out.push(self.buf.iter().map(|z| z.re).collect());
            if pair.len() == 2 {
                out.push(self.buf.iter().map(|z| z.im).collect());
            }
        }
        out
    }
}

/// One-shot forward transform; builds a plan internally.
pub fn to_spectral(field: &PhysicalField) -> Result<SpectralField> {
    Transformer::new(*field.grid()).to_spectral(field)
}

/// One-shot inverse transform; builds a plan internally.
pub fn to_physical(field: &SpectralField) -> PhysicalField {
    Transformer::new(*field.grid()).to_physical(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16, 2.0).unwrap()
    }

    #[test]
    fn constant_field_has_only_zero_mode() {
        let g = grid();
        let f = PhysicalField::from_fn(g, Rank::Scalar, |_, _| 3.5);
        let s = to_spectral(&f).unwrap();
        assert!((s.component(0)[0] - Complex64::new(3.5, 0.0)).norm() < 1e-14);
        assert!(s.component(0)[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn cosine_has_two_half_modes() {
        let g = grid();
        let l = g.length();
        let f = PhysicalField::from_fn(g, Rank::Scalar, |_, x| (2.0 * PI * x[0] / l).cos());
        let s = to_spectral(&f).unwrap();
        let plus = g.flat_index([1, 0, 0]);
        let minus = g.flat_index([g.n() - 1, 0, 0]);
        for (idx, z) in s.component(0).iter().enumerate() {
            let expect = if idx == plus || idx == minus { 0.5 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-14, "{idx}");
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = grid();
        let mut v = vec![0.0; g.len()];
        v[17] = f64::NAN;
        let f = PhysicalField::scalar(g, v).unwrap();
        match to_spectral(&f) {
            Err(NspError::NonFiniteInput { index }) => assert_eq!(index, 17),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn vector_round_trip_with_odd_packing() {
        let g = grid();
        let f = PhysicalField::from_fn(g, Rank::Vector, |c, x| {
            (x[0] * (c + 1) as f64).sin() + 0.3 * (x[1] * 2.0 + x[2]).cos()
        });
        let mut t = Transformer::new(g);
        let s = t.to_spectral(&f).unwrap();
        assert!(s.hermitian_defect() == 0.0);
        let back = t.to_physical(&s);
        for (a, b) in back.components().iter().zip(f.components()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }
}
