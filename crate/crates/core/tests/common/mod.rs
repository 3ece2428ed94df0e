#![allow(dead_code)]

use crossdiff::{ChannelPair, ImageGrid, ScalarField};
use rand::{Rng, SeedableRng};
use rustfft::num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(rng: &mut ChaCha8Rng, grid: ImageGrid, lo: f64, hi: f64) -> ScalarField {
    let values = (0..grid.len()).map(|_| rng.random_range(lo..hi)).collect();
    ScalarField::new(grid, values).unwrap()
}

/// `u` uniform in [0, 255), `v` uniform in [−v_amp, v_amp).
pub fn random_pair(rng: &mut ChaCha8Rng, width: usize, height: usize, v_amp: f64) -> ChannelPair {
    let grid = ImageGrid::unit(width, height).unwrap();
    let u = random_field(rng, grid, 0.0, 255.0);
    let v = if v_amp > 0.0 {
        random_field(rng, grid, -v_amp, v_amp)
    } else {
        ScalarField::zeros(grid)
    };
    ChannelPair::new(u, v).unwrap()
}

/// Explicit five-point heat scheme with mirrored ghost cells.
pub fn heat_oracle(u0: &[f64], w: usize, h: usize, dx: f64, dt: f64, steps: usize) -> Vec<f64> {
    let mut u = u0.to_vec();
    let at = |u: &[f64], i: isize, j: isize| {
        let i = i.clamp(0, w as isize - 1) as usize;
        let j = j.clamp(0, h as isize - 1) as usize;
        u[j * w + i]
    };
    for _ in 0..steps {
        let mut next = u.clone();
        for j in 0..h as isize {
            for i in 0..w as isize {
                let c = at(&u, i, j);
                let lap = (at(&u, i + 1, j) - c) - (c - at(&u, i - 1, j)) + (at(&u, i, j + 1) - c)
                    - (c - at(&u, i, j - 1));
                next[j as usize * w + i as usize] = c + dt * lap / (dx * dx);
            }
        }
        u = next;
    }
    u
}

/// Flux-form complex diffusion `I_t = ∇·(c ∇I)`, `c = e^{iθ} / (1 + (Im I / (κθ))²)`,
/// zero flux across the border, edge coefficient = mean of the nodal ones.
pub fn complex_oracle(u0: &[f64], w: usize, h: usize, theta: f64, kappa: f64, dt: f64, steps: usize) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, theta);
    let mut z: Vec<Complex64> = u0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for _ in 0..steps {
        let c: Vec<Complex64> = z
            .iter()
            .map(|v| rot / (1.0 + (v.im / (kappa * theta)).powi(2)))
            .collect();
        let mut rate = vec![Complex64::new(0.0, 0.0); w * h];
        for j in 0..h {
            for i in 0..w {
                let p = j * w + i;
                if i + 1 < w {
                    let q = p + 1;
                    let flux = 0.5 * (c[p] + c[q]) * (z[q] - z[p]);
                    rate[p] += flux;
                    rate[q] -= flux;
                }
                if j + 1 < h {
                    let q = p + w;
                    let flux = 0.5 * (c[p] + c[q]) * (z[q] - z[p]);
                    rate[p] += flux;
                    rate[q] -= flux;
                }
            }
        }
        for (zz, r) in z.iter_mut().zip(rate) {
            *zz += dt * r;
        }
    }
    z
}
