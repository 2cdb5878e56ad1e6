use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{NspError, Result};

/// Cubic periodic box of edge `length` sampled with `n` points per axis.
///
/// Coefficient arrays are stored row-major in `(i, j, k)` with `k` fastest.
/// Axis index `i` maps to the integer wavenumber `i` for `i < n/2` and
/// `i - n` otherwise, so the Nyquist plane carries `-n/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(NspError::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(NspError::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest nonzero wavenumber magnitude, `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight of a single physical sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Signed integer wavenumber of an axis index.
    #[inline]
    pub fn wavenumber_index(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i < half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn split_index(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn flat_index(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.n + ijk[1]) * self.n + ijk[2]
    }

    /// Integer wavevector of a flat coefficient index.
    #[inline]
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let [i, j, k] = self.split_index(idx);
        [
            self.wavenumber_index(i),
            self.wavenumber_index(j),
            self.wavenumber_index(k),
        ]
    }

    /// Physical wavevector of a flat coefficient index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let m = self.mode(idx);
        let dk = self.dk();
        [m[0] as f64 * dk, m[1] as f64 * dk, m[2] as f64 * dk]
    }

    /// Squared integer radius `|m|^2`; modes on one shell share every
    /// isotropic multiplier.
    #[inline]
    pub fn shell(&self, idx: usize) -> usize {
        let m = self.mode(idx);
        (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as usize
    }

    pub fn max_shell(&self) -> usize {
        3 * (self.n / 2) * (self.n / 2)
    }

    /// True when any axis sits on the Nyquist plane, where odd multipliers
    /// cannot stay Hermitian.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = (self.n / 2) as i64;
        self.mode(idx).iter().any(|&m| m == -half)
    }

    /// Flat index of `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [i, j, k] = self.split_index(idx);
        self.flat_index([(n - i) % n, (n - j) % n, (n - k) % n])
    }

    /// Integer dealias radius: modes with `|m| >= n/3` are removed.
    pub fn dealias_radius(&self) -> f64 {
        self.n as f64 / 3.0
    }

    #[inline]
    pub fn is_dealiased(&self, idx: usize) -> bool {
        (self.shell(idx) as f64) < self.dealias_radius().powi(2)
    }

    /// Physical-space coordinates of a sample, `x_i = i L / n`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.split_index(idx);
        let h = self.spacing();
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    /// End of the window over which the box mimics whole-space algebraic
    /// decay: `(L / 2 pi)^2 / 4`.
    pub fn t_max(&self) -> f64 {
        (self.length / (2.0 * PI)).powi(2) / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(24, 1.0).is_err());
        assert!(Grid::new(16, 0.0).is_err());
        assert!(Grid::new(16, f64::NAN).is_err());
        assert!(Grid::new(16, 1.0).is_ok());
    }

    #[test]
    fn smallest_wavenumber_is_two_pi_over_l() {
        let g = Grid::new(16, 3.0).unwrap();
        let kmin = (0..g.len())
            .filter(|&i| g.shell(i) > 0)
            .map(|i| {
                let k = g.wavevector(i);
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((kmin - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_index_negates_mode() {
        let g = Grid::new(16, 1.0).unwrap();
        for idx in [1usize, 17, 300, 4000] {
            let m = g.mode(idx);
            let c = g.mode(g.conjugate_index(idx));
            if !g.is_nyquist(idx) {
                assert_eq!(c, [-m[0], -m[1], -m[2]]);
            }
        }
    }

    #[test]
    fn box_window() {
        let g = Grid::new(64, 32.0 * PI).unwrap();
        assert!((g.t_max() - 64.0).abs() < 1e-12);
    }
}
