//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's propagation code; schedules and
//! Hamiltonians are rebuilt from scratch and evolved with dense matrix
//! exponentials.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CM = DMatrix<C64>;

pub const TWO_PI_KHZ: f64 = 2.0 * PI * 1e3;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn pauli() -> [CM; 3] {
    let z = c(0.0);
    let o = c(1.0);
    let i = C64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

pub fn kron_all(ops: &[CM]) -> CM {
    ops.iter()
        .skip(1)
        .fold(ops[0].clone(), |acc, m| acc.kronecker(m))
}

/// Field vectors `(h0, h1)` in rad/s for one nucleus.
pub fn fields(apar: f64, aperp: f64, wl: f64) -> ([f64; 3], [f64; 3]) {
    ([0.0, 0.0, wl], [-aperp, 0.0, wl - apar])
}

/// Absolute pulse times for `n` repetitions of a unit of length `t`.
pub fn pulse_times_unit(unit: &[f64], t: f64, n: u32) -> (Vec<f64>, f64) {
    let mut out = Vec::new();
    for r in 0..n {
        for d in unit {
            out.push((r as f64 + d) * t);
        }
    }
    (out, n as f64 * t)
}

pub fn cpmg_unit() -> Vec<f64> {
    vec![0.25, 0.75]
}

pub fn udd_unit(order: u32) -> Vec<f64> {
    (1..=order)
        .map(|j| (j as f64 * PI / (2.0 * order as f64 + 2.0)).sin().powi(2))
        .collect()
}

/// Composite hybrid block: `nc` CPMG units then `nu` UDD units, each of length `t`.
pub fn hybrid_unit(nc: u32, order: u32, nu: u32) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..nc {
        out.extend(cpmg_unit().iter().map(|d| r as f64 + d));
    }
    for r in 0..nu {
        out.extend(udd_unit(order).iter().map(|d| (nc + r) as f64 + d));
    }
    let len = (nc + nu) as f64;
    out.iter().map(|x| x / len).collect()
}

/// Full electron-plus-nuclei Hamiltonian. The electron is the leading factor.
pub fn register_hamiltonian(spins: &[(f64, f64)], wl: f64) -> CM {
    let n = spins.len();
    let s = pauli();
    let id = CM::identity(2, 2);
    let dim = 1 << n;
    let mut h0 = CM::zeros(dim, dim);
    let mut h1 = CM::zeros(dim, dim);
    for (k, &(apar, aperp)) in spins.iter().enumerate() {
        let (b0, b1) = fields(apar, aperp, wl);
        for (a, sa) in s.iter().enumerate() {
            let mut ops = vec![id.clone(); n];
            ops[k] = sa.clone();
            let op = if n == 0 {
                CM::identity(1, 1)
            } else {
                kron_all(&ops)
            };
            h0 += &op * c(0.5 * b0[a]);
            h1 += &op * c(0.5 * b1[a]);
        }
    }
    let p0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
    let p1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
    p0.kronecker(&h0) + p1.kronecker(&h1)
}

pub fn expm_ih(h: &CM, dt: f64) -> CM {
    (h * C64::new(0.0, -dt)).exp()
}

/// Full propagator with ideal electron X pulses at the given times.
pub fn pulsed_propagator(h: &CM, times: &[f64], total: f64) -> CM {
    let dim = h.nrows();
    let x = kron_all(&[pauli()[0].clone(), CM::identity(dim / 2, dim / 2)]);
    let mut u = CM::identity(dim, dim);
    let mut prev = 0.0;
    for &tp in times {
        u = &x * expm_ih(h, tp - prev) * u;
        prev = tp;
    }
    expm_ih(h, total - prev) * u
}

/// `Px` of the electron prepared in `|+x⟩` with every nucleus maximally mixed.
pub fn brute_force_px(spins: &[(f64, f64)], wl: f64, times: &[f64], total: f64) -> f64 {
    let n = spins.len();
    let dim = 2usize << n;
    let h = register_hamiltonian(spins, wl);
    let u = pulsed_propagator(&h, times, total);
    let half = c(0.5);
    let plus = DMatrix::from_row_slice(2, 2, &[half, half, half, half]);
    let nuc = CM::identity(dim / 2, dim / 2) * c(1.0 / (dim / 2) as f64);
    let rho0 = plus.kronecker(&nuc);
    let rho = &u * rho0 * u.adjoint();
    let proj = plus.kronecker(&CM::identity(dim / 2, dim / 2));
    (proj * rho).trace().re
}

/// Dipolar hyperfine tensor row for the quantization axis z:
/// `A_ij = pre (δ_ij − 3 u_i u_j)`, returns `(A_zz, hypot(A_zx, A_zy))`.
pub fn dipolar_tensor(r: [f64; 3], gamma_e: f64, gamma_n: f64) -> (f64, f64) {
    let mu0 = 4.0e-7 * PI * 1.000_000_000_55;
    let hbar = 1.054_571_817e-34;
    let d = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let u = [r[0] / d, r[1] / d, r[2] / d];
    let pre = mu0 * gamma_e * gamma_n * hbar / (4.0 * PI * d.powi(3));
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 } else { 0.0 };
            a[i][j] = pre * (delta - 3.0 * u[i] * u[j]);
        }
    }
    (a[2][2], a[2][0].hypot(a[2][1]))
}

/// Adaptive Simpson on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Unit-area Lorentzian of half width `gamma` centred at `w0`, scaled by `s0`.
pub fn lorentzian(s0: f64, w0: f64, gamma: f64) -> impl Fn(f64) -> f64 {
    move |w| s0 * gamma * gamma / ((w - w0).powi(2) + gamma * gamma)
}

/// Direct pulse sum `|1 + (−1)^{m+1} e^{ix} + 2Σ(−1)^j e^{iδ_j x}|²` from scratch.
pub fn filter_direct(fr: &[f64], x: f64) -> f64 {
    let m = fr.len();
    let mut s = c(1.0) + C64::from_polar(if m.is_multiple_of(2) { -1.0 } else { 1.0 }, x);
    for (j, d) in fr.iter().enumerate() {
        let sign = if (j + 1) % 2 == 0 { 2.0 } else { -2.0 };
        s += C64::from_polar(sign, d * x);
    }
    s.norm_sqr()
}

/// Small seeded generator for reproducible parameter draws.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
