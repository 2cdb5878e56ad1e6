//! Per-shell linear operators. Every operator is a function of the generator
//! and so splits into a real 2x2 matrix on `(rho, v)` and a scalar on the
//! solenoidal velocity.

use nalgebra::SMatrix;

use crate::model::PhysParams;
use crate::spectral::Grid;
use crate::symbol::LinearSymbol;

pub(crate) type M2 = [[f64; 2]; 2];

const SERIES_SWITCH: f64 = 0.5;

#[derive(Debug, Clone)]
pub(crate) struct LinOps {
    pub comp: Vec<M2>,
    pub heat: Vec<f64>,
}

/// Operator slots for ETD-RK4.
pub(crate) mod etd {
    pub const E: usize = 0;
    pub const E2: usize = 1;
    pub const Q: usize = 2;
    pub const F1: usize = 3;
    pub const F2: usize = 4;
    pub const F3: usize = 5;
}

/// Operator slots for Crank-Nicolson / Adams-Bashforth.
pub(crate) mod cnab {
    pub const A: usize = 0;
    pub const C: usize = 1;
}

fn scale(m: M2, a: f64) -> M2 {
    m.map(|row| row.map(|v| v * a))
}

fn lin_comb(terms: &[(f64, M2)]) -> M2 {
    let mut out = [[0.0; 2]; 2];
    for (a, m) in terms {
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += a * m[i][j];
            }
        }
    }
    out
}

/// `[e^Z, phi_1(Z), phi_2(Z), phi_3(Z)]` from the exponential of the
/// block-companion matrix `[[Z, I, 0, 0], [0, 0, I, 0], [0, 0, 0, I], 0]`.
pub(crate) fn matrix_phis(z: M2) -> [M2; 4] {
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            a[(i, j)] = z[i][j];
        }
    }
    for k in 0..6 {
        a[(k, k + 2)] = 1.0;
    }
    let e = a.exp();
    std::array::from_fn(|b| std::array::from_fn(|i| std::array::from_fn(|j| e[(i, 2 * b + j)])))
}

/// `[e^z, phi_1(z), phi_2(z), phi_3(z)]`, by Taylor series for small `|z|`.
pub(crate) fn scalar_phis(z: f64) -> [f64; 4] {
    if z.abs() < SERIES_SWITCH {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            // phi_k(z) = sum_j z^j / (j + k)!
            let mut term = 1.0 / (1..=k).product::<usize>() as f64;
            let mut sum = 0.0;
            for j in 0..25 {
                sum += term;
                term *= z / (j + k + 1) as f64;
            }
            *o = sum;
        }
        out
    } else {
        let e = z.exp();
        [
            e,
            (e - 1.0) / z,
            (e - 1.0 - z) / (z * z),
            (e - 1.0 - z - 0.5 * z * z) / (z * z * z),
        ]
    }
}

pub(crate) fn etd_ops(b: M2, mu_r2: f64, h: f64) -> LinOps {
    let [e, p1, p2, p3] = matrix_phis(scale(b, h));
    let [e2, q1, _, _] = matrix_phis(scale(b, 0.5 * h));
    let comp = vec![
        e,
        e2,
        scale(q1, 0.5 * h),
        scale(lin_comb(&[(1.0, p1), (-3.0, p2), (4.0, p3)]), h),
        scale(lin_comb(&[(1.0, p2), (-2.0, p3)]), h),
        scale(lin_comb(&[(-1.0, p2), (4.0, p3)]), h),
    ];
    let z = -mu_r2 * h;
    let [se, s1, s2, s3] = scalar_phis(z);
    let [se2, sq1, _, _] = scalar_phis(0.5 * z);
    let heat = vec![
        se,
        se2,
        0.5 * h * sq1,
        h * (s1 - 3.0 * s2 + 4.0 * s3),
        h * (s2 - 2.0 * s3),
        h * (-s2 + 4.0 * s3),
    ];
    LinOps { comp, heat }
}

fn inverse(m: M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn mul(a: M2, b: M2) -> M2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub(crate) fn cnab_ops(b: M2, mu_r2: f64, h: f64) -> LinOps {
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let minus = inverse(lin_comb(&[(1.0, id), (-0.5 * h, b)]));
    let plus = lin_comb(&[(1.0, id), (0.5 * h, b)]);
    let z = -mu_r2 * h;
    LinOps {
        comp: vec![mul(minus, plus), scale(minus, h)],
        heat: vec![(1.0 + 0.5 * z) / (1.0 - 0.5 * z), h / (1.0 - 0.5 * z)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum OpFamily {
    Etd,
    Cnab,
}

/// Operators for every shell on the grid; slot 0 holds the zero mode, whose
/// generator vanishes.
pub(crate) fn shell_table(grid: &Grid, params: &PhysParams, h: f64, family: OpFamily) -> Vec<LinOps> {
    let build = |b: M2, mu_r2: f64| match family {
        OpFamily::Etd => etd_ops(b, mu_r2, h),
        OpFamily::Cnab => cnab_ops(b, mu_r2, h),
    };
    let max = grid.max_shell();
    let mut present = vec![false; max + 1];
    for idx in 0..grid.len() {
        present[grid.shell(idx)] = true;
    }
    (0..=max)
        .map(|shell| {
            if shell == 0 {
                let zero = build([[0.0; 2]; 2], 0.0);
                LinOps {
                    comp: zero.heat.iter().map(|&v| [[v, 0.0], [0.0, v]]).collect(),
                    heat: zero.heat,
                }
            } else if !present[shell] {
                LinOps { comp: Vec::new(), heat: Vec::new() }
            } else {
                let r = (shell as f64).sqrt() * grid.dk();
                let sym = LinearSymbol::radial(r, params).expect("r > 0");
                build(sym.comp_block(), -sym.heat_rate())
            }
        })
        .collect()
}
