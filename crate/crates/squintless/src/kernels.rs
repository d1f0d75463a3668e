//! The squared-Fejér interpolation kernel family K_p, its autocorrelation
//! coefficients g_N, and partial derivatives up to the orders the certificate
//! Hessian needs.
//!
//! The 1D kernel of nominal size n is the degree-2n trigonometric polynomial
//! built from the autocorrelation coefficients of the length-(n+1) triangle,
//!
//! ```text
//! K_p(ω) = (1/(p(n+1))) Σ_{|k| ≤ 2n} g_{n+1}(k) e^{−j2πkpω},
//! ```
//!
//! which satisfies K_1(0) = 1 and K_1″(0) = −π² f_c (f_c + 4)/3 with f_c = 2n.
//! The sum is conjugate-symmetric, so every order evaluates to a real number;
//! results are returned as complex to keep the term-wise derivative algebra
//! uniform, with [`strip_imag`] as the checked extraction.

use crate::model::Angle2;
use crate::{C64, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Triangle autocorrelation coefficient g_N(k).
///
/// Symmetric in k ↔ −k and nonnegative; vanishes at |k| = 2N (and |k| = 2N−1).
pub fn g_coeff(k: i64, n: u32) -> Result<f64> {
    if k.unsigned_abs() > 2 * n as u64 {
        return Err(Error::KernelSupport { k, n });
    }
    let n = n as i64;
    let lo = (k - n).max(-n);
    let hi = (k + n).min(n);
    let nf = n as f64;
    let mut s = 0.0;
    for t in lo..=hi {
        s += (1.0 - (t.abs() as f64) / nf) * (1.0 - ((k - t).abs() as f64) / nf);
    }
    Ok(s / nf)
}

/// 1D kernel value or derivative by direct summation (the authoritative path).
///
/// `order` selects K, K′, K″ or K‴ (term-wise factor (−j2πkp)^order). The
/// third order exists for the certificate Hessian; the interpolation system
/// itself only uses orders 0–2.
pub fn kernel_1d(omega: f64, p: usize, n: u32, order: u32) -> C64 {
    assert!(p >= 1, "frequency index starts at 1");
    assert!(order <= 3, "kernel derivatives implemented up to order 3");
    let block = n + 1;
    let mut acc = if order == 0 { g_coeff(0, block).unwrap() } else { 0.0 };
    for k in 1..=(2 * n as i64) {
        let g = g_coeff(k, block).unwrap();
        acc += paired_term(g, k, p, omega, order);
    }
    C64::new(acc / (p as f64 * block as f64), 0.0)
}

/// Contribution of the conjugate pair ±k, which is real for every order.
fn paired_term(g: f64, k: i64, p: usize, omega: f64, order: u32) -> f64 {
    let theta = TAU * (k * p as i64) as f64 * omega;
    let pw = TAU * (k * p as i64) as f64;
    match order {
        0 => 2.0 * g * theta.cos(),
        1 => -2.0 * g * pw * theta.sin(),
        2 => -2.0 * g * pw * pw * theta.cos(),
        3 => 2.0 * g * pw * pw * pw * theta.sin(),
        _ => unreachable!(),
    }
}

/// Precomputed-coefficient kernel evaluator (the accelerated path).
///
/// Holds the g table once; agrees with [`kernel_1d`] to 1e−12.
#[derive(Debug, Clone)]
pub struct Kernel1d {
    n: u32,
    g: Vec<f64>, // g_{n+1}(k) for k = 0..=2n
}

impl Kernel1d {
    pub fn new(n: u32) -> Self {
        let block = n + 1;
        let g = (0..=2 * n as i64).map(|k| g_coeff(k, block).unwrap()).collect();
        Self { n, g }
    }

    pub fn size(&self) -> u32 {
        self.n
    }

    pub fn eval(&self, omega: f64, p: usize, order: u32) -> C64 {
        assert!(order <= 3);
        let mut acc = if order == 0 { self.g[0] } else { 0.0 };
        for (k, &g) in self.g.iter().enumerate().skip(1) {
            acc += paired_term(g, k as i64, p, omega, order);
        }
        C64::new(acc / (p as f64 * (self.n + 1) as f64), 0.0)
    }

    /// All four orders in one pass over the coefficient table.
    pub fn eval_all(&self, omega: f64, p: usize) -> [f64; 4] {
        let mut acc = [self.g[0], 0.0, 0.0, 0.0];
        for (k, &g) in self.g.iter().enumerate().skip(1) {
            let theta = TAU * (k * p) as f64 * omega;
            let pw = TAU * (k * p) as f64;
            let (s, c) = theta.sin_cos();
            acc[0] += 2.0 * g * c;
            acc[1] -= 2.0 * g * pw * s;
            acc[2] -= 2.0 * g * pw * pw * c;
            acc[3] += 2.0 * g * pw * pw * pw * s;
        }
        let norm = p as f64 * (self.n + 1) as f64;
        acc.map(|x| x / norm)
    }
}

/// Kernel geometry implied by an N_r × N_t array with N ≡ 1 (mod 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelParams {
    /// N_a = (N_r − 1)/4.
    pub n_a: u32,
    /// M_a = (N_t − 1)/4.
    pub m_a: u32,
    /// f_c = max{2M_a, 2N_a}.
    pub f_c: u32,
}

impl KernelParams {
    pub fn new(n_a: u32, m_a: u32) -> Result<Self> {
        if n_a == 0 || m_a == 0 {
            return Err(Error::InvalidKernelParams("kernel sizes must be positive".into()));
        }
        Ok(Self {
            n_a,
            m_a,
            f_c: (2 * n_a).max(2 * m_a),
        })
    }

    /// Derive parameters from array dimensions; requires N ≡ 1 (mod 4) exactly
    /// so the shifted index ranges {−2N_a, …, 2N_a} tile the arrays without
    /// off-by-one slack.
    pub fn from_array_dims(n_rx: usize, n_tx: usize) -> Result<Self> {
        let check = |n: usize, name: &str| -> Result<u32> {
            if n < 5 || !(n - 1).is_multiple_of(4) {
                return Err(Error::InvalidKernelParams(format!(
                    "{name} = {n} must satisfy {name} ≡ 1 (mod 4) and {name} ≥ 5 so that ({name}−1)/4 is a positive integer"
                )));
            }
            Ok(((n - 1) / 4) as u32)
        };
        Self::new(check(n_rx, "n_rx")?, check(n_tx, "n_tx")?)
    }

    /// The implied array sizes (N_r, N_t) = (4N_a + 1, 4M_a + 1).
    pub fn implied_dims(&self) -> (usize, usize) {
        (4 * self.n_a as usize + 1, 4 * self.m_a as usize + 1)
    }
}

/// 2D product kernel K_p^{(i,j)}(ω) with i derivatives in ω^r and j in ω^t.
pub fn kernel_2d(omega: Angle2, p: usize, params: &KernelParams, orders: (u32, u32)) -> C64 {
    kernel_1d(omega.omega_r, p, params.n_a, orders.0) * kernel_1d(omega.omega_t, p, params.m_a, orders.1)
}

/// Extract the real part, asserting the imaginary part is below 1e−10 in
/// magnitude relative to the value scale.
pub fn strip_imag(z: C64) -> f64 {
    let scale = z.re.abs().max(1.0);
    assert!(
        z.im.abs() <= 1e-10 * scale,
        "imaginary residue {:.3e} exceeds tolerance at scale {:.3e}",
        z.im,
        scale
    );
    z.re
}

/// K_1″(0) for a kernel of nominal size n: −π² f_c (f_c + 4)/3 with f_c = 2n.
pub fn second_derivative_at_origin(n: u32) -> f64 {
    let fc = 2.0 * n as f64;
    -std::f64::consts::PI.powi(2) * fc * (fc + 4.0) / 3.0
}
