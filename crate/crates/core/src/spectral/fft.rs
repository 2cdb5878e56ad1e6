use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// In-place 3-D complex FFT over an `n^3` cube stored with the last axis
/// contiguous. Both directions are unnormalized.
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    plane: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            plane: vec![Complex64::default(); n * n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        let fft = Arc::clone(&self.forward);
        self.transform(data, fft.as_ref());
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let fft = Arc::clone(&self.inverse);
        self.transform(data, fft.as_ref());
    }

    fn transform(&mut self, data: &mut [Complex64], fft: &dyn Fft<f64>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "cube size mismatch");
        let nn = n * n;

        // last axis: contiguous lines
        fft.process_with_scratch(data, &mut self.scratch);

        // middle axis: transpose each i-plane so j becomes contiguous
        for i in 0..n {
            let plane = &mut data[i * nn..(i + 1) * nn];
            for j in 0..n {
                for k in 0..n {
                    self.plane[k * n + j] = plane[j * n + k];
                }
            }
            fft.process_with_scratch(&mut self.plane, &mut self.scratch);
            for j in 0..n {
                for k in 0..n {
                    plane[j * n + k] = self.plane[k * n + j];
                }
            }
        }

        // first axis: gather one j-slab at a time
        for j in 0..n {
            for i in 0..n {
                let row = &data[i * nn + j * n..i * nn + j * n + n];
                for (k, &v) in row.iter().enumerate() {
                    self.plane[k * n + i] = v;
                }
            }
            fft.process_with_scratch(&mut self.plane, &mut self.scratch);
            for i in 0..n {
                let row = &mut data[i * nn + j * n..i * nn + j * n + n];
                for (k, v) in row.iter_mut().enumerate() {
                    *v = self.plane[k * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], n: usize, sign: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); data.len()];
        let w = sign * 2.0 * std::f64::consts::PI / n as f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = Complex64::default();
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let ph = w * ((a * i + b * j + c * k) % n) as f64;
                                acc += data[(i * n + j) * n + k] * Complex64::from_polar(1.0, ph);
                            }
                        }
                    }
                    out[(a * n + b) * n + c] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 4;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        Fft3::new(n).forward(&mut fast);
        let slow = naive_dft(&data, n, -1.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        let mut back = fast.clone();
        Fft3::new(n).inverse(&mut back);
        for (a, b) in back.iter().zip(&data) {
            assert!((a / (n * n * n) as f64 - b).norm() < 1e-13);
        }
    }
}
