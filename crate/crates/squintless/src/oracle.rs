//! Independent brute-force references: grid dual-norm evaluation, duality-gap
//! bracketing, and a tiny-instance central-path minimizer used to validate the
//! ADMM updates.
//!
//! The atomic norm itself is an infimum over continuous decompositions and is
//! never computed exactly; these oracles bound it from above (any explicit
//! decomposition) and below (any feasible dual via ⟨Q,Y⟩_R) and report the
//! bracket.

use crate::linalg::{eigh, fro_norm, real_inner};
use crate::model::{steering_vector, MultiFreqTensor, Source};
use crate::recovery::dual_polynomial_norm;
use crate::solver::{r_map, HermitianToeplitz};
use crate::{C64, CMat, Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// max over an evenly spaced grid of ‖χ_{ω^t,ω^r}‖₂; nondecreasing under
/// dyadic refinement because the finer grid contains the coarser points.
pub fn dual_norm_grid(q: &[CMat], grid_resolution: usize) -> f64 {
    assert!(grid_resolution >= 16, "grid resolution below 16");
    assert!(!q.is_empty());
    let res = grid_resolution;
    (0..res)
        .into_par_iter()
        .map(|ir| {
            let wr = ir as f64 / res as f64;
            (0..res)
                .map(|it| dual_polynomial_norm(q, wr, it as f64 / res as f64))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Primal/dual bracket of the atomic objective.
#[derive(Debug, Clone, Serialize)]
pub struct DualityGap {
    /// Σ_{l,p} |c_l^p| of the provided decomposition.
    pub primal: f64,
    /// ⟨Q, Y⟩_R.
    pub dual: f64,
    pub gap: f64,
    /// Grid estimate of ‖Q‖*_A.
    pub dual_norm: f64,
    /// Whether the weak-duality reading applies (‖Q‖* ≤ 1 at grid precision).
    pub dual_feasible: bool,
}

/// Evaluate the duality bracket for a decomposition of `y` and a dual
/// candidate `q`.
///
/// Errors when the decomposition does not synthesize `y` to 1e−8 relative.
pub fn duality_gap(
    y: &MultiFreqTensor,
    decomposition: &[Source],
    q: &[CMat],
    grid_resolution: usize,
) -> Result<DualityGap> {
    let (nr, nt, p_max) = (y.n_rx(), y.n_tx(), y.n_freq());
    // verify the decomposition reproduces the data
    let mut resid2 = 0.0;
    for p in 1..=p_max {
        let mut slice = CMat::zeros(nr, nt);
        for s in decomposition {
            if s.coeffs.len() != p_max {
                return Err(Error::DimensionMismatch(format!(
                    "decomposition source has {} coefficients for P = {p_max}",
                    s.coeffs.len()
                )));
            }
            let a = steering_vector(s.omega_r, p, nr);
            let b = steering_vector(s.omega_t, p, nt);
            for i in 0..nr {
                for j in 0..nt {
                    slice[(i, j)] += s.coeffs[p - 1] * a[i] * b[j];
                }
            }
        }
        resid2 += fro_norm(&(&slice - &y.slices[p - 1])).powi(2);
    }
    let rel = resid2.sqrt() / y.frobenius_norm().max(1e-300);
    if rel > 1e-8 {
        return Err(Error::DecompositionMismatch { relative_error: rel });
    }
    let primal: f64 = decomposition
        .iter()
        .flat_map(|s| s.coeffs.iter())
        .map(|c| c.norm())
        .sum();
    let dual: f64 = q
        .iter()
        .zip(&y.slices)
        .map(|(qp, yp)| real_inner(qp, yp))
        .sum();
    let dual_norm = dual_norm_grid(q, grid_resolution);
    Ok(DualityGap {
        primal,
        dual,
        gap: primal - dual,
        dual_norm,
        dual_feasible: dual_norm <= 1.0 + 1e-6,
    })
}

/// Output of the tiny-instance minimizer.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub t_r: HermitianToeplitz,
    pub t_t: HermitianToeplitz,
    pub objective: f64,
}

/// Independent minimizer of the solver's semidefinite program at tiny
/// dimensions (N_r, N_t ≤ 3, P ≤ 2) by a log-det barrier central path with
/// damped Newton steps — an algorithm class disjoint from the ADMM it checks.
pub fn toeplitz_minimizer_oracle(y: &MultiFreqTensor) -> Result<OracleSolution> {
    let (nr, nt, p_max) = (y.n_rx(), y.n_tx(), y.n_freq());
    if nr > 3 || nt > 3 || p_max > 2 {
        return Err(Error::OracleTooLarge(format!(
            "supported up to 3x3 arrays with P <= 2, got {nr}x{nt} P={p_max}"
        )));
    }
    let problem = Barrier::new(y);
    problem.solve()
}

/// Real parameterization of (T^r, T^t, {V_p off-pattern}).
enum Param {
    VrRe(usize),
    VrIm(usize),
    VtRe(usize),
    VtIm(usize),
    VRe(usize, usize, usize),
    VIm(usize, usize, usize),
}

struct Barrier {
    big_r: usize,
    big_t: usize,
    p_max: usize,
    dim: usize,
    params: Vec<Param>,
    /// basis[a][p] = ∂Z_p/∂x_a (dense, tiny dims)
    basis: Vec<Vec<CMat>>,
    y_emb: Vec<CMat>,
    obj_grad: Vec<f64>,
}

impl Barrier {
    fn new(y: &MultiFreqTensor) -> Self {
        let (nr, nt, p_max) = (y.n_rx(), y.n_tx(), y.n_freq());
        let big_r = p_max * (nr - 1) + 1;
        let big_t = p_max * (nt - 1) + 1;
        let dim = big_r + big_t;
        let mut params = Vec::new();
        for k in 0..big_r {
            params.push(Param::VrRe(k));
            if k > 0 {
                params.push(Param::VrIm(k));
            }
        }
        for k in 0..big_t {
            params.push(Param::VtRe(k));
            if k > 0 {
                params.push(Param::VtIm(k));
            }
        }
        let mut y_emb = Vec::with_capacity(p_max);
        for p in 1..=p_max {
            y_emb.push(r_map(&y.slices[p - 1], p, (big_r, big_t)).expect("dims checked"));
        }
        let mut on_pattern = vec![vec![vec![false; big_t]; big_r]; p_max];
        for (pi, pat) in on_pattern.iter_mut().enumerate() {
            let p = pi + 1;
            for i in 0..nr {
                for j in 0..nt {
                    pat[i * p][j * p] = true;
                }
            }
        }
        for (pi, pat) in on_pattern.iter().enumerate() {
            for (i, row) in pat.iter().enumerate() {
                for (j, &on) in row.iter().enumerate() {
                    if !on {
                        params.push(Param::VRe(pi, i, j));
                        params.push(Param::VIm(pi, i, j));
                    }
                }
            }
        }
        // basis matrices
        let basis: Vec<Vec<CMat>> = params
            .iter()
            .map(|prm| {
                (0..p_max)
                    .map(|pi| {
                        let mut a = CMat::zeros(dim, dim);
                        match prm {
                            Param::VrRe(k) => {
                                for i in 0..big_r - k {
                                    a[(i, i + k)] += C64::new(2.0, 0.0);
                                    if *k > 0 {
                                        a[(i + k, i)] += C64::new(2.0, 0.0);
                                    }
                                }
                            }
                            Param::VrIm(k) => {
                                for i in 0..big_r - k {
                                    a[(i, i + k)] += C64::new(0.0, 2.0);
                                    a[(i + k, i)] += C64::new(0.0, -2.0);
                                }
                            }
                            Param::VtRe(k) => {
                                let s = 2.0 / p_max as f64;
                                for i in 0..big_t - k {
                                    a[(big_r + i, big_r + i + k)] += C64::new(s, 0.0);
                                    if *k > 0 {
                                        a[(big_r + i + k, big_r + i)] += C64::new(s, 0.0);
                                    }
                                }
                            }
                            Param::VtIm(k) => {
                                let s = 2.0 / p_max as f64;
                                for i in 0..big_t - k {
                                    a[(big_r + i, big_r + i + k)] += C64::new(0.0, s);
                                    a[(big_r + i + k, big_r + i)] += C64::new(0.0, -s);
                                }
                            }
                            Param::VRe(pp, i, j) => {
                                if *pp == pi {
                                    a[(*i, big_r + j)] += C64::new(1.0, 0.0);
                                    a[(big_r + j, *i)] += C64::new(1.0, 0.0);
                                }
                            }
                            Param::VIm(pp, i, j) => {
                                if *pp == pi {
                                    a[(*i, big_r + j)] += C64::new(0.0, 1.0);
                                    a[(big_r + j, *i)] += C64::new(0.0, -1.0);
                                }
                            }
                        }
                        a
                    })
                    .collect()
            })
            .collect();
        let obj_grad: Vec<f64> = params
            .iter()
            .map(|p| match p {
                Param::VrRe(0) | Param::VtRe(0) => 1.0,
                _ => 0.0,
            })
            .collect();
        Self {
            big_r,
            big_t,
            p_max,
            dim,
            params,
            basis,
            y_emb,
            obj_grad,
        }
    }

    /// Assemble the Z_p slices from the parameter vector.
    fn z_of(&self, x: &[f64]) -> Vec<CMat> {
        let mut z: Vec<CMat> = (0..self.p_max)
            .map(|pi| {
                let mut m = CMat::zeros(self.dim, self.dim);
                // pinned data entries of the coupling block
                for i in 0..self.big_r {
                    for j in 0..self.big_t {
                        let v = self.y_emb[pi][(i, j)];
                        m[(i, self.big_r + j)] = v;
                        m[(self.big_r + j, i)] = v.conj();
                    }
                }
                m
            })
            .collect();
        for (a, prm) in self.params.iter().enumerate() {
            if x[a] == 0.0 {
                continue;
            }
            match prm {
                Param::VRe(pp, _, _) | Param::VIm(pp, _, _) => {
                    let b = &self.basis[a][*pp];
                    z[*pp] += b * C64::new(x[a], 0.0);
                }
                _ => {
                    for (pi, zp) in z.iter_mut().enumerate() {
                        *zp += &self.basis[a][pi] * C64::new(x[a], 0.0);
                    }
                }
            }
        }
        z
    }

    fn log_det_sum(z: &[CMat]) -> Option<f64> {
        let mut acc = 0.0;
        for m in z {
            let (w, _) = eigh(m);
            if w.iter().any(|&lam| lam <= 0.0) {
                return None;
            }
            acc += w.iter().map(|&lam| lam.ln()).sum::<f64>();
        }
        Some(acc)
    }

    fn solve(&self) -> Result<OracleSolution> {
        let n = self.params.len();
        let mut x = vec![0.0; n];
        let scale = 1.0 + self.y_emb.iter().map(fro_norm).fold(0.0, f64::max);
        x[0] = scale; // vr_0
        // index of vt_0: after vr block of size 2*big_r - 1
        let vt0 = 2 * self.big_r - 1;
        x[vt0] = scale * self.p_max as f64;
        let mut t = 1.0;
        let m_total = (self.p_max * self.dim) as f64;
        while m_total / t > 1e-10 {
            for _ in 0..80 {
                let z = self.z_of(&x);
                let zinv: Vec<CMat> = z
                    .iter()
                    .map(|m| {
                        let (w, v) = eigh(m);
                        let mut inv = CMat::zeros(self.dim, self.dim);
                        for (k, &lam) in w.iter().enumerate() {
                            let col = v.column(k);
                            for i in 0..self.dim {
                                for j in 0..self.dim {
                                    inv[(i, j)] += col[i] * col[j].conj() / lam;
                                }
                            }
                        }
                        inv
                    })
                    .collect();
                // gradient and Hessian of t·obj − Σ logdet
                let w_mats: Vec<Vec<CMat>> = (0..n)
                    .into_par_iter()
                    .map(|a| {
                        (0..self.p_max)
                            .map(|pi| &zinv[pi] * &self.basis[a][pi])
                            .collect()
                    })
                    .collect();
                let mut g = vec![0.0; n];
                for a in 0..n {
                    g[a] = t * self.obj_grad[a];
                    for w in &w_mats[a] {
                        g[a] -= w.diagonal().iter().map(|v| v.re).sum::<f64>();
                    }
                }
                let h_rows: Vec<Vec<f64>> = (0..n)
                    .into_par_iter()
                    .map(|a| {
                        let mut row = vec![0.0; n];
                        for b in a..n {
                            let mut acc = 0.0;
                            for (wa, wb) in w_mats[a].iter().zip(&w_mats[b]) {
                                for i in 0..self.dim {
                                    for j in 0..self.dim {
                                        acc += (wa[(i, j)] * wb[(j, i)]).re;
                                    }
                                }
                            }
                            row[b] = acc;
                        }
                        row
                    })
                    .collect();
                let mut h = nalgebra::DMatrix::<f64>::zeros(n, n);
                for a in 0..n {
                    for b in a..n {
                        h[(a, b)] = h_rows[a][b];
                        h[(b, a)] = h_rows[a][b];
                    }
                }
                for a in 0..n {
                    h[(a, a)] += 1e-12;
                }
                let gv = nalgebra::DVector::from_vec(g.clone());
                let dx = h
                    .clone()
                    .cholesky()
                    .map(|ch| ch.solve(&-&gv))
                    .unwrap_or_else(|| h.lu().solve(&-&gv).unwrap_or_else(|| -gv.clone()));
                let lambda2: f64 = -gv.dot(&dx);
                // backtracking line search staying inside the cone
                let f0 = t * self.objective_of(&x)
                    - Self::log_det_sum(&self.z_of(&x)).expect("iterate in cone");
                let mut step = 1.0;
                let mut accepted = false;
                while step > 1e-16 {
                    let cand: Vec<f64> = x.iter().zip(dx.iter()).map(|(xi, di)| xi + step * di).collect();
                    if let Some(ld) = Self::log_det_sum(&self.z_of(&cand)) {
                        let f_cand = t * self.objective_of(&cand) - ld;
                        if f_cand <= f0 - 0.25 * step * lambda2 {
                            x = cand;
                            accepted = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !accepted || lambda2 / 2.0 < 1e-11 {
                    break;
                }
            }
            t *= 8.0;
        }
        let (t_r, t_t) = self.toeplitz_of(&x);
        let objective = self.objective_of(&x);
        Ok(OracleSolution { t_r, t_t, objective })
    }

    fn objective_of(&self, x: &[f64]) -> f64 {
        // tr(T^r)/N_R + tr(T^t)/N_T = vr_0 + vt_0
        x[0] + x[2 * self.big_r - 1]
    }

    fn toeplitz_of(&self, x: &[f64]) -> (HermitianToeplitz, HermitianToeplitz) {
        let mut vr = vec![C64::new(0.0, 0.0); self.big_r];
        let mut vt = vec![C64::new(0.0, 0.0); self.big_t];
        for (a, prm) in self.params.iter().enumerate() {
            match prm {
                Param::VrRe(k) => vr[*k] += C64::new(x[a], 0.0),
                Param::VrIm(k) => vr[*k] += C64::new(0.0, x[a]),
                Param::VtRe(k) => vt[*k] += C64::new(x[a], 0.0),
                Param::VtIm(k) => vt[*k] += C64::new(0.0, x[a]),
                _ => {}
            }
        }
        (
            HermitianToeplitz::new(vr).expect("real leading entry"),
            HermitianToeplitz::new(vt).expect("real leading entry"),
        )
    }
}
