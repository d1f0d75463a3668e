//! The semidefinite reformulation and its ADMM solver: index-dilation maps
//! R/R*, PSD projection, Toeplitz-constrained updates and convergence control.
//!
//! The solved program is
//!
//! ```text
//! min  tr(T^r)/N_R + tr(T^t)/N_T
//! s.t. Z_p = [[2T^r, V_p], [V_p^H, 2T^t/P]] ⪰ 0,   R*(V_p) = Y_p,
//! ```
//!
//! with N_R = P(N_r−1)+1, N_T = P(N_t−1)+1. By default the entries of V_p off
//! the stride-p pattern are free completion variables; `pin_offdiag` pins the
//! whole block to R(Y_p) instead (zeros off the pattern), which reproduces the
//! literal dilated formulation at the cost of alias artifacts in the recovered
//! Toeplitz factors for P ≥ 2.

use crate::linalg::{eigh, fro_norm, hermitian_part, real_inner};
use crate::model::MultiFreqTensor;
use crate::{C64, CMat, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A PSD-intended Hermitian Toeplitz matrix stored by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianToeplitz {
    first_row: Vec<C64>,
}

impl HermitianToeplitz {
    /// The leading entry must be real (it is the diagonal value).
    pub fn new(first_row: Vec<C64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::DimensionMismatch("empty Toeplitz generator".into()));
        }
        if first_row[0].im.abs() > 1e-9 * first_row[0].re.abs().max(1.0) {
            return Err(Error::DimensionMismatch(format!(
                "leading Toeplitz generator entry must be real, got imaginary part {:.3e}",
                first_row[0].im
            )));
        }
        let mut fr = first_row;
        fr[0] = C64::new(fr[0].re, 0.0);
        Ok(Self { first_row: fr })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            first_row: vec![C64::new(0.0, 0.0); n],
        }
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    pub fn first_row(&self) -> &[C64] {
        &self.first_row
    }

    pub fn trace(&self) -> f64 {
        self.first_row[0].re * self.size() as f64
    }

    /// Materialize the full matrix: entry (i,j) = v_{j−i} for j ≥ i, conjugate below.
    pub fn materialize(&self) -> CMat {
        let n = self.size();
        CMat::from_fn(n, n, |i, j| {
            if j >= i {
                self.first_row[j - i]
            } else {
                self.first_row[i - j].conj()
            }
        })
    }

    /// Frobenius projection of a Hermitian matrix onto the Hermitian Toeplitz
    /// subspace: per-diagonal averaging.
    pub fn project_from(m: &CMat) -> Self {
        let n = m.nrows();
        let mut fr = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..n - k {
                acc += m[(i, i + k)] + m[(i + k, i)].conj();
            }
            fr.push(acc / (2.0 * (n - k) as f64));
        }
        fr[0] = C64::new(fr[0].re, 0.0);
        Self { first_row: fr }
    }

    /// Smallest eigenvalue of the materialized matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let (w, _) = eigh(&self.materialize());
        w.first().copied().unwrap_or(0.0)
    }
}

/// Dilation embedding: place q's (r,t) entry at ((r−1)p+1, (t−1)p+1) (1-based)
/// in an N_R × N_T frame of zeros.
pub fn r_map(q: &CMat, p: usize, dims: (usize, usize)) -> Result<CMat> {
    let (big_r, big_t) = dims;
    let (nr, nt) = (q.nrows(), q.ncols());
    if p < 1 || (nr - 1) * p + 1 > big_r || (nt - 1) * p + 1 > big_t {
        return Err(Error::DimensionMismatch(format!(
            "r_map: {nr}x{nt} at stride {p} does not fit in {big_r}x{big_t}"
        )));
    }
    let mut out = CMat::zeros(big_r, big_t);
    for i in 0..nr {
        for j in 0..nt {
            out[(i * p, j * p)] = q[(i, j)];
        }
    }
    Ok(out)
}

/// Adjoint of [`r_map`]: extract the stride-p pattern entries into an
/// n_rx × n_tx matrix.
pub fn r_adjoint(u: &CMat, p: usize, dims: (usize, usize)) -> Result<CMat> {
    let (nr, nt) = dims;
    if p < 1 || (nr - 1) * p + 1 > u.nrows() || (nt - 1) * p + 1 > u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "r_adjoint: {nr}x{nt} at stride {p} does not fit in {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    Ok(CMat::from_fn(nr, nt, |i, j| u[(i * p, j * p)]))
}

/// Frobenius-nearest PSD matrix: symmetrize, eigendecompose, clamp negative
/// eigenvalues to zero.
pub fn psd_project(m: &CMat) -> Result<CMat> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("psd_project input"));
    }
    let h = hermitian_part(m);
    let (w, v) = eigh(&h);
    let n = h.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in w.iter().enumerate() {
        if lam > 0.0 {
            let col = v.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += col[i] * col[j].conj() * lam;
                }
            }
        }
    }
    Ok(out)
}

/// Solver parameters; every field has a sensible default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub adaptive_rho: bool,
    pub pin_offdiag: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.5,
            tol: 1e-6,
            max_iter: 20_000,
            adaptive_rho: true,
            pin_offdiag: false,
        }
    }
}

/// Mutable ADMM iterate: the Toeplitz variables, the per-frequency slack and
/// multiplier matrices, the penalty and the residuals.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub t_r: HermitianToeplitz,
    pub t_t: HermitianToeplitz,
    pub z: Vec<CMat>,
    pub psi: Vec<CMat>,
    pub rho: f64,
    pub iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    big_r: usize,
    big_t: usize,
    n_freq: usize,
    /// R(Y_p) with the stride-p pattern marked.
    y_emb: Vec<CMat>,
    mask: Vec<Vec<(usize, usize)>>,
    residual_norm: f64,
    pin_offdiag: bool,
    adaptive_rho: bool,
}

impl AdmmState {
    pub fn new(y: &MultiFreqTensor, config: &SolverConfig) -> Result<Self> {
        if config.rho <= 0.0 {
            return Err(Error::DimensionMismatch("rho must be positive".into()));
        }
        let (nr, nt, p_max) = (y.n_rx(), y.n_tx(), y.n_freq());
        let big_r = p_max * (nr - 1) + 1;
        let big_t = p_max * (nt - 1) + 1;
        let dim = big_r + big_t;
        let mut y_emb = Vec::with_capacity(p_max);
        let mut mask = Vec::with_capacity(p_max);
        for p in 1..=p_max {
            y_emb.push(r_map(&y.slices[p - 1], p, (big_r, big_t))?);
            let mut pat = Vec::with_capacity(nr * nt);
            for i in 0..nr {
                for j in 0..nt {
                    pat.push((i * p, j * p));
                }
            }
            mask.push(pat);
        }
        let residual_norm = y_emb.iter().map(|m| 1.0 + fro_norm(m)).sum();
        Ok(Self {
            t_r: HermitianToeplitz::zeros(big_r),
            t_t: HermitianToeplitz::zeros(big_t),
            z: vec![CMat::zeros(dim, dim); p_max],
            psi: vec![CMat::zeros(dim, dim); p_max],
            rho: config.rho,
            iter: 0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            big_r,
            big_t,
            n_freq: p_max,
            y_emb,
            mask,
            residual_norm,
            pin_offdiag: config.pin_offdiag,
            adaptive_rho: config.adaptive_rho,
        })
    }

    pub fn objective(&self) -> f64 {
        self.t_r.trace() / self.big_r as f64 + self.t_t.trace() / self.big_t as f64
    }

    /// One ADMM iteration: Toeplitz/completion update, PSD projection of the
    /// slack blocks, dual ascent.
    pub fn step(&mut self) {
        let p_max = self.n_freq;
        let (big_r, big_t) = (self.big_r, self.big_t);
        let rho = self.rho;

        // Toeplitz-constrained T-updates: per-diagonal averaging of the
        // unstructured minimizer of the augmented Lagrangian.
        let mut m_r = CMat::zeros(big_r, big_r);
        let mut m_t = CMat::zeros(big_t, big_t);
        for p in 0..p_max {
            m_r += self.z[p].view((0, 0), (big_r, big_r))
                + self.psi[p].view((0, 0), (big_r, big_r)) / C64::new(rho, 0.0);
            m_t += self.z[p].view((big_r, big_r), (big_t, big_t))
                + self.psi[p].view((big_r, big_r), (big_t, big_t)) / C64::new(rho, 0.0);
        }
        let pf = p_max as f64;
        m_r /= C64::new(2.0 * pf, 0.0);
        m_t /= C64::new(2.0, 0.0);
        let diag_r = 1.0 / (4.0 * rho * pf * big_r as f64);
        let diag_t = pf / (4.0 * rho * big_t as f64);
        for i in 0..big_r {
            m_r[(i, i)] -= C64::new(diag_r, 0.0);
        }
        for i in 0..big_t {
            m_t[(i, i)] -= C64::new(diag_t, 0.0);
        }
        self.t_r = HermitianToeplitz::project_from(&m_r);
        self.t_t = HermitianToeplitz::project_from(&m_t);

        let tr_mat = self.t_r.materialize();
        let tt_mat = self.t_t.materialize();

        // per-frequency Z and Ψ updates are independent
        let pin = self.pin_offdiag;
        let updates: Vec<(CMat, CMat, f64, f64, f64)> = (0..p_max)
            .into_par_iter()
            .map(|p| {
                // coupling block: data on the stride pattern, consensus
                // completion elsewhere
                let mut v = if pin {
                    self.y_emb[p].clone()
                } else {
                    self.z[p].view((0, big_r), (big_r, big_t)).into_owned()
                        + self.psi[p].view((0, big_r), (big_r, big_t)) / C64::new(rho, 0.0)
                };
                if !pin {
                    for &(i, j) in &self.mask[p] {
                        v[(i, j)] = self.y_emb[p][(i, j)];
                    }
                }
                let dim = big_r + big_t;
                let mut b = CMat::zeros(dim, dim);
                b.view_mut((0, 0), (big_r, big_r))
                    .copy_from(&(&tr_mat * C64::new(2.0, 0.0)));
                b.view_mut((big_r, big_r), (big_t, big_t))
                    .copy_from(&(&tt_mat * C64::new(2.0 / pf, 0.0)));
                b.view_mut((0, big_r), (big_r, big_t)).copy_from(&v);
                b.view_mut((big_r, 0), (big_t, big_r)).copy_from(&v.adjoint());

                let z_new = psd_project(&(&b - &self.psi[p] / C64::new(rho, 0.0)))
                    .expect("finite ADMM iterate");
                let dz = fro_norm(&(&z_new - &self.z[p]));
                let r = &z_new - &b;
                let prim = fro_norm(&r);
                let psi_new = &self.psi[p] + &r * C64::new(rho, 0.0);
                let psi_norm = fro_norm(&psi_new);
                (z_new, psi_new, dz * dz, prim * prim, psi_norm * psi_norm)
            })
            .collect();

        let mut dz2 = 0.0;
        let mut prim2 = 0.0;
        let mut psi2 = 0.0;
        for (p, (z_new, psi_new, dz, prim, psi_n)) in updates.into_iter().enumerate() {
            self.z[p] = z_new;
            self.psi[p] = psi_new;
            dz2 += dz;
            prim2 += prim;
            psi2 += psi_n;
        }
        self.primal_residual = prim2.sqrt() / self.residual_norm;
        self.dual_residual = rho * dz2.sqrt() / psi2.sqrt().max(1e-12);
        self.iter += 1;

        if self.adaptive_rho && self.iter.is_multiple_of(50) {
            if self.primal_residual > 10.0 * self.dual_residual {
                self.rho *= 2.0;
            } else if self.dual_residual > 10.0 * self.primal_residual {
                self.rho /= 2.0;
            }
        }
    }

    pub fn converged(&self, tol: f64) -> bool {
        self.primal_residual <= tol && self.dual_residual <= tol
    }
}

/// Final solver output: the Toeplitz factors, dual estimates and diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub t_r: HermitianToeplitz,
    pub t_t: HermitianToeplitz,
    /// Q_p = −2 R*(Ψ̂_p): pattern extraction of the converged multipliers.
    pub dual_q: Vec<CMat>,
    /// P^r = 2 Σ_p Ψ_p^{r}: satisfies the dual trace conditions at optimality.
    pub dual_p_r: CMat,
    /// P^t = (2/P) Σ_p Ψ_p^{t}.
    pub dual_p_t: CMat,
    /// Per-frequency smallest eigenvalue of Ψ_p (PSD at convergence).
    pub psi_min_eigs: Vec<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    pub objective: f64,
    /// (primal, dual) residual pair per iteration.
    pub residual_history: Vec<(f64, f64)>,
}

/// Run the ADMM to the requested tolerance.
///
/// Non-convergence is reported through `converged = false`, not an error.
pub fn admm_solve(y: &MultiFreqTensor, config: &SolverConfig) -> Result<SolveResult> {
    let mut state = AdmmState::new(y, config)?;
    let mut history = Vec::new();
    while state.iter < config.max_iter {
        state.step();
        history.push((state.primal_residual, state.dual_residual));
        if state.iter % 500 == 0 {
            log::debug!(
                "admm iter {}: primal {:.3e} dual {:.3e} rho {:.3e} objective {:.8}",
                state.iter,
                state.primal_residual,
                state.dual_residual,
                state.rho,
                state.objective()
            );
        }
        if state.converged(config.tol) {
            break;
        }
    }
    let (nr, nt, p_max) = (y.n_rx(), y.n_tx(), y.n_freq());
    let (big_r, big_t) = (state.big_r, state.big_t);
    let mut dual_q = Vec::with_capacity(p_max);
    let mut p_r = CMat::zeros(big_r, big_r);
    let mut p_t = CMat::zeros(big_t, big_t);
    let mut psi_min_eigs = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let psi = &state.psi[p - 1];
        let psi_hat = psi.view((0, big_r), (big_r, big_t)).into_owned();
        dual_q.push(r_adjoint(&psi_hat, p, (nr, nt))? * C64::new(-2.0, 0.0));
        p_r += psi.view((0, 0), (big_r, big_r)) * C64::new(2.0, 0.0);
        p_t += psi.view((big_r, big_r), (big_t, big_t)) * C64::new(2.0 / p_max as f64, 0.0);
        let (w, _) = eigh(&hermitian_part(psi));
        psi_min_eigs.push(w.first().copied().unwrap_or(0.0));
    }
    let converged = state.converged(config.tol);
    Ok(SolveResult {
        objective: state.objective(),
        t_r: state.t_r,
        t_t: state.t_t,
        dual_q,
        dual_p_r: p_r,
        dual_p_t: p_t,
        psi_min_eigs,
        iterations: state.iter,
        primal_residual: state.primal_residual,
        dual_residual: state.dual_residual,
        converged,
        residual_history: history,
    })
}

/// Per-constraint margins of the dual semidefinite program's feasibility
/// conditions for a candidate (Q, P^r, P^t).
#[derive(Debug, Clone, Serialize)]
pub struct DualFeasibility {
    /// Smallest eigenvalue of each G_p = [[P^r/P, R(Q_p)], [R(Q_p)^H, P^t]].
    pub g_min_eigs: Vec<f64>,
    /// max_k |Σ_i P^r_{(i,i+k)} − δ(k)|.
    pub trace_violation_r: f64,
    pub trace_violation_t: f64,
    pub p_r_min_eig: f64,
    pub p_t_min_eig: f64,
}

impl DualFeasibility {
    pub fn feasible(&self, tol: f64) -> bool {
        self.g_min_eigs.iter().all(|&e| e >= -tol)
            && self.trace_violation_r <= tol
            && self.trace_violation_t <= tol
            && self.p_r_min_eig >= -tol
            && self.p_t_min_eig >= -tol
    }
}

/// Report-only verifier of the dual SDP constraints for given dual variables.
pub fn dual_feasibility_check(q: &[CMat], p_r: &CMat, p_t: &CMat) -> Result<DualFeasibility> {
    let p_max = q.len();
    if p_max == 0 {
        return Err(Error::DimensionMismatch("no dual matrices".into()));
    }
    let big_r = p_r.nrows();
    let big_t = p_t.nrows();
    let trace_violation = |m: &CMat| -> f64 {
        let n = m.nrows();
        (0..n)
            .map(|k| {
                let s: C64 = (0..n - k).map(|i| m[(i, i + k)]).sum();
                let target = if k == 0 { 1.0 } else { 0.0 };
                (s - C64::new(target, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    };
    let mut g_min_eigs = Vec::with_capacity(p_max);
    for (pi, qp) in q.iter().enumerate() {
        let p = pi + 1;
        let qb = r_map(qp, p, (big_r, big_t))?;
        let dim = big_r + big_t;
        let mut g = CMat::zeros(dim, dim);
        g.view_mut((0, 0), (big_r, big_r))
            .copy_from(&(p_r / C64::new(p_max as f64, 0.0)));
        g.view_mut((big_r, big_r), (big_t, big_t)).copy_from(p_t);
        g.view_mut((0, big_r), (big_r, big_t)).copy_from(&qb);
        g.view_mut((big_r, 0), (big_t, big_r)).copy_from(&qb.adjoint());
        let (w, _) = eigh(&hermitian_part(&g));
        g_min_eigs.push(w.first().copied().unwrap_or(0.0));
    }
    let (wr, _) = eigh(&hermitian_part(p_r));
    let (wt, _) = eigh(&hermitian_part(p_t));
    Ok(DualFeasibility {
        g_min_eigs,
        trace_violation_r: trace_violation(p_r),
        trace_violation_t: trace_violation(p_t),
        p_r_min_eig: wr.first().copied().unwrap_or(0.0),
        p_t_min_eig: wt.first().copied().unwrap_or(0.0),
    })
}

/// ⟨Q, Y⟩_R — the dual objective value for multi-frequency data.
pub fn dual_objective(q: &[CMat], y: &MultiFreqTensor) -> f64 {
    q.iter()
        .zip(&y.slices)
        .map(|(qp, yp)| real_inner(qp, yp))
        .sum()
}
