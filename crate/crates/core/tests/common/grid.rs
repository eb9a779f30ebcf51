//! The state sampled as an explicit matrix on a 13³ grid, with the inequality
//! evaluated through literal two-copy permutation operators.

use super::{ghz_kernel, trapezoid_3d, PI};

pub const SIDE: usize = 13;
pub const L: f64 = 4.0;
pub const X0: f64 = 2.0 / 3.0;

pub fn coord(i: usize) -> f64 {
    -L + 2.0 * L * i as f64 / (SIDE - 1) as f64
}

fn flat(idx: [usize; 3]) -> usize {
    (idx[0] * SIDE + idx[1]) * SIDE + idx[2]
}

/// Two-copy basis vector `|a⟩ ⊗ |b⟩`, each copy a triple of grid indices.
pub type TwoCopy = ([usize; 3], [usize; 3]);

/// The permutation operator exchanging the listed subsystems between copies.
fn permute((a, b): TwoCopy, subsystems: &[usize]) -> TwoCopy {
    let (mut a2, mut b2) = (a, b);
    for &i in subsystems {
        a2[i] = b[i];
        b2[i] = a[i];
    }
    (a2, b2)
}

pub struct GridDensity {
    rho: Vec<f64>,
}

impl GridDensity {
    /// `ρ[i, j] = p ω(x_i) ω(x_j) / N + (1 − p) δ_ij g(x_i)`.
    pub fn new(sigma: f64, eps: f64, p: f64, delta: f64) -> Self {
        let norm = trapezoid_3d(|x| ghz_kernel(x, sigma, eps).powi(2), 9.0, 0.1);
        let dim = SIDE.pow(3);
        let mut pts = Vec::with_capacity(dim);
        for i in 0..SIDE {
            for j in 0..SIDE {
                for k in 0..SIDE {
                    pts.push([coord(i), coord(j), coord(k)]);
                }
            }
        }
        let omega: Vec<f64> = pts.iter().map(|x| ghz_kernel(x, sigma, eps)).collect();
        let gauss = |x: f64| (-x * x / (2.0 * delta)).exp() / (2.0 * PI * delta).sqrt();
        let mut rho = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                rho[r * dim + c] = p * omega[r] * omega[c] / norm;
            }
            rho[r * dim + r] += (1.0 - p) * pts[r].iter().map(|&x| gauss(x)).product::<f64>();
        }
        Self { rho }
    }

    fn at(&self, bra: [usize; 3], ket: [usize; 3]) -> f64 {
        self.rho[flat(bra) * SIDE.pow(3) + flat(ket)]
    }

    /// `⟨u| ρ⊗ρ |v⟩`.
    fn two_copy(&self, u: TwoCopy, v: TwoCopy) -> f64 {
        self.at(u.0, v.0) * self.at(u.1, v.1)
    }

    pub fn lhs(&self, phi: TwoCopy, k: usize) -> f64 {
        let all = [0, 1, 2];
        let coherence = self.two_copy(phi, permute(phi, &all)).sqrt();
        let partitions: &[&[&[usize]]] = match k {
            2 => &[&[&[0, 1], &[2]], &[&[0, 2], &[1]], &[&[0], &[1, 2]]],
            3 => &[&[&[0], &[1], &[2]]],
            _ => unreachable!(),
        };
        let power = 1.0 / (2 * k) as f64;
        let subtracted: f64 = partitions
            .iter()
            .map(|blocks| {
                blocks
                    .iter()
                    .map(|b| {
                        let swapped = permute(phi, b);
                        self.two_copy(swapped, swapped).powf(power)
                    })
                    .product::<f64>()
            })
            .sum();
        coherence - subtracted
    }
}

pub fn probe_indices() -> TwoCopy {
    let i = (0..SIDE).find(|&i| (coord(i) - X0).abs() < 1e-12).unwrap();
    let j = (0..SIDE).find(|&i| (coord(i) + X0).abs() < 1e-12).unwrap();
    ([i; 3], [j; 3])
}
