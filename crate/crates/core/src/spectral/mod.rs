//! Periodic-box discretization: grids, transforms, multipliers and norms.
//!
//! The box of edge `L` stands in for the whole space. Coefficients use the
//! convention `f(x) = sum_k c_k exp(i k.x)` and every norm carries the
//! volume factor `(L/n)^3` per sample, equivalently `L^3` per mode, so that
//! physical quadrature and Parseval sums agree.

mod fft;
mod field;
mod grid;
mod norm;
mod ops;

pub use fft::Fft3;
pub use field::{to_physical, to_spectral, PhysicalField, Rank, SpectralField, Transformer};
pub use grid::Grid;
pub use norm::{hdot_squared, lp_of_samples, norm, NormKind, NormRequest, ZeroModePolicy};
pub use ops::{
    apply_matrix_multiplier, apply_multiplier, divergence, gradient, helmholtz_split,
    lambda_power, partial, partials,
};

#[cfg(test)]
pub(crate) mod tests_support {
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;

    /// Mean-zero, Hermitian, band-limited random field.
    pub fn random_field(grid: Grid, rank: Rank, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::from_fn(grid, rank, |_, idx| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            if idx == 0 || !grid.is_dealiased(idx) {
                Complex64::default()
            } else {
                Complex64::new(a, b) / (1.0 + grid.shell(idx) as f64)
            }
        });
        let copy = f.clone();
        for (c, src) in f.components_mut().iter_mut().zip(copy.components()) {
            for idx in 0..grid.len() {
                c[idx] = 0.5 * (src[idx] + src[grid.conjugate_index(idx)].conj());
            }
        }
        f
    }

    /// [`random_field`] restricted to shells `|m|^2 <= max_shell`.
    pub fn smooth_random_field(grid: Grid, rank: Rank, seed: u64, max_shell: usize) -> SpectralField {
        let f = random_field(grid, rank, seed);
        let comps = f
            .components()
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(idx, &z)| if grid.shell(idx) <= max_shell { z } else { Complex64::default() })
                    .collect()
            })
            .collect();
        SpectralField::from_components(grid, comps).unwrap()
    }
}
