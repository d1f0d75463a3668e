//! Angle extraction from solver output: Toeplitz–Vandermonde decomposition,
//! DOA/DOD pairing by least squares over bijections, and dual-polynomial peak
//! localization.

use crate::linalg::{eigh, lstsq, lstsq_mat, small_eigenvalues};
use crate::model::{
    steering_vector, steering_vector_deriv, wrap_dist, wrap_unit, MultiFreqTensor,
};
use crate::solver::{HermitianToeplitz, SolveResult};
use crate::{C64, CMat, CVec, Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Vandermonde factorization T = W diag(powers) W^H with unit-modulus-entry
/// columns W(:,l) = [z_l^{r_1}, …, z_l^{r_N}]^T, z_l = e^{−j2πω_l}.
#[derive(Debug, Clone, Serialize)]
pub struct VandermondeFactors {
    /// Frequencies in cycles, each in [0,1).
    pub omegas: Vec<f64>,
    /// Positive diagonal of D.
    pub powers: Vec<f64>,
    /// Exponent grid; the regular grid 0…N−1 for solver output.
    pub indices: Vec<f64>,
}

impl VandermondeFactors {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// W diag(powers) W^H on the stored exponent grid.
    pub fn reconstruct(&self) -> CMat {
        let n = self.indices.len();
        let mut m = CMat::zeros(n, n);
        for (l, (&w, &d)) in self.omegas.iter().zip(&self.powers).enumerate() {
            let _ = l;
            let col = CVec::from_fn(n, |i, _| C64::from_polar(1.0, -TAU * self.indices[i] * w));
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += col[i] * col[j].conj() * d;
                }
            }
        }
        m
    }

    /// Frequencies of the entry-wise conjugated matrix: ω ↦ (−ω) mod 1.
    ///
    /// The transmit-side block of the semidefinite program carries conjugated
    /// steering structure, so its decomposition needs this flip before the
    /// frequencies can be read as DODs.
    pub fn conjugated(&self) -> Self {
        Self {
            omegas: self.omegas.iter().map(|&w| wrap_unit(-w)).collect(),
            powers: self.powers.clone(),
            indices: self.indices.clone(),
        }
    }
}

/// Subspace (matrix-pencil) Vandermonde decomposition of a PSD Hermitian
/// Toeplitz matrix.
///
/// The numerical rank L̂ counts eigenvalues above `rank_tol`·λ_max; the full
/// rank case has no unique decomposition and errors out.
pub fn vandermonde_decompose(
    t: &HermitianToeplitz,
    rank_tol: f64,
) -> Result<VandermondeFactors> {
    let n = t.size();
    let tm = t.materialize();
    let (w, v) = eigh(&tm);
    let lam_max = w.last().copied().unwrap_or(0.0);
    // The solver guarantees PSD only to about its tolerance, so the gate is
    // relative; genuinely indefinite inputs are far below it.
    if w[0] < -1e-6 * lam_max.abs().max(1.0) {
        return Err(Error::NotPsd { min_eig: w[0] });
    }
    if lam_max <= 0.0 {
        return Ok(VandermondeFactors {
            omegas: Vec::new(),
            powers: Vec::new(),
            indices: (0..n).map(|i| i as f64).collect(),
        });
    }
    let rank = w.iter().filter(|&&x| x > rank_tol * lam_max).count();
    if rank == n {
        return Err(Error::DecompositionNotUnique { rank, size: n });
    }
    // signal subspace: eigenvectors of the top `rank` eigenvalues
    let mut s = CMat::zeros(n, rank);
    for (dst, src) in (n - rank..n).enumerate() {
        s.set_column(dst, &v.column(src));
    }
    // shift invariance: S_lower = S_upper Φ, eig(Φ) = e^{−j2πω}
    let upper = s.view((0, 0), (n - 1, rank)).into_owned();
    let lower = s.view((1, 0), (n - 1, rank)).into_owned();
    let phi = lstsq_mat(&upper, &lower);
    let mut omegas: Vec<f64> = small_eigenvalues(&phi)
        .iter()
        .map(|z| wrap_unit(-z.arg() / TAU))
        .collect();
    omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // powers from the generator sequence: v_k = Σ_l d_l e^{+j2πkω_l}
    let gen = t.first_row();
    let a = CMat::from_fn(n, rank, |k, l| C64::from_polar(1.0, TAU * k as f64 * omegas[l]));
    let rhs = CVec::from_fn(n, |k, _| gen[k]);
    let d = lstsq(&a, &rhs);
    let powers: Vec<f64> = d.iter().map(|z| z.re).collect();
    if powers.iter().any(|&p| p <= 0.0) {
        return Err(Error::DecompositionNotUnique { rank, size: n });
    }
    Ok(VandermondeFactors {
        omegas,
        powers,
        indices: (0..n).map(|i| i as f64).collect(),
    })
}

/// One recovered source: angle pair plus per-frequency amplitudes.
#[derive(Debug, Clone, Serialize)]
pub struct PairedSource {
    pub omega_r: f64,
    pub omega_t: f64,
    #[serde(with = "crate::model::serde_c64_vec")]
    pub amplitudes: Vec<C64>,
}

/// Paired DOA/DOD estimates and the data residual of the fitted model.
#[derive(Debug, Clone, Serialize)]
pub struct AnglePairing {
    pub pairs: Vec<PairedSource>,
    /// ‖Y − Σ_l ĉ_l atoms‖_F of the winning bijection.
    pub residual: f64,
}

/// Pair the DOA candidates of `r_factors` with the DOD candidates of
/// `t_factors` by amplitude least squares over bijections (exhaustive up to
/// six sources, greedy power matching above).
pub fn pair_angles(
    r_factors: &VandermondeFactors,
    t_factors: &VandermondeFactors,
    y: &MultiFreqTensor,
) -> Result<AnglePairing> {
    if r_factors.len() != t_factors.len() {
        return Err(Error::PairingCountMismatch {
            n_rx: r_factors.len(),
            n_tx: t_factors.len(),
        });
    }
    let l = r_factors.len();
    if l == 0 {
        return Ok(AnglePairing {
            pairs: Vec::new(),
            residual: 0.0,
        });
    }
    let candidates: Vec<Vec<usize>> = if l <= 6 {
        permutations(l)
    } else {
        vec![greedy_by_power(r_factors, t_factors)]
    };
    let fits: Vec<(f64, Vec<Vec<C64>>)> = candidates
        .par_iter()
        .map(|perm| fit_amplitudes(r_factors, t_factors, perm, y))
        .collect();
    let best = fits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let perm = &candidates[best];
    let (residual, amps) = (&fits[best].0, &fits[best].1);
    let pairs = (0..l)
        .map(|i| PairedSource {
            omega_r: r_factors.omegas[i],
            omega_t: t_factors.omegas[perm[i]],
            amplitudes: amps[i].clone(),
        })
        .collect();
    Ok(AnglePairing {
        pairs,
        residual: *residual,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut arr: Vec<usize> = (0..n).collect();
    heap_permute(&mut arr, n, &mut out);
    out
}

fn heap_permute(arr: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(arr.clone());
        return;
    }
    for i in 0..k {
        heap_permute(arr, k - 1, out);
        if k.is_multiple_of(2) {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}

fn greedy_by_power(r: &VandermondeFactors, t: &VandermondeFactors) -> Vec<usize> {
    let mut order_r: Vec<usize> = (0..r.len()).collect();
    let mut order_t: Vec<usize> = (0..t.len()).collect();
    order_r.sort_by(|&a, &b| r.powers[b].partial_cmp(&r.powers[a]).unwrap());
    order_t.sort_by(|&a, &b| t.powers[b].partial_cmp(&t.powers[a]).unwrap());
    let mut perm = vec![0usize; r.len()];
    for (ri, ti) in order_r.iter().zip(order_t.iter()) {
        perm[*ri] = *ti;
    }
    perm
}

/// Least-squares amplitudes for one bijection; returns the Frobenius residual
/// and per-source amplitude vectors.
fn fit_amplitudes(
    r: &VandermondeFactors,
    t: &VandermondeFactors,
    perm: &[usize],
    y: &MultiFreqTensor,
) -> (f64, Vec<Vec<C64>>) {
    let l = r.len();
    let (nr, nt, p_max) = (y.n_rx(), y.n_tx(), y.n_freq());
    let mut res2 = 0.0;
    let mut amps = vec![Vec::with_capacity(p_max); l];
    for p in 1..=p_max {
        let mut design = CMat::zeros(nr * nt, l);
        for (col, (&wr, &pi)) in r.omegas.iter().zip(perm.iter()).enumerate() {
            let a = steering_vector(wr, p, nr);
            let b = steering_vector(t.omegas[pi], p, nt);
            for i in 0..nr {
                for j in 0..nt {
                    design[(i * nt + j, col)] = a[i] * b[j];
                }
            }
        }
        let rhs = CVec::from_fn(nr * nt, |k, _| y.slices[p - 1][(k / nt, k % nt)]);
        let coef = lstsq(&design, &rhs);
        let fitted = &design * &coef;
        res2 += (&rhs - fitted).norm_squared();
        for (i, amp) in amps.iter_mut().enumerate() {
            amp.push(coef[i]);
        }
    }
    (res2.sqrt(), amps)
}

/// Decompose both Toeplitz factors of a solve, apply the transmit-side
/// conjugation, and pair.
pub fn recover_from_solve(
    result: &SolveResult,
    y: &MultiFreqTensor,
    rank_tol: f64,
) -> Result<AnglePairing> {
    let r_factors = vandermonde_decompose(&result.t_r, rank_tol)?;
    let t_factors = vandermonde_decompose(&result.t_t, rank_tol)?.conjugated();
    pair_angles(&r_factors, &t_factors, y)
}

/// Peaks of the dual polynomial norm plus the per-entry modulus report.
#[derive(Debug, Clone, Serialize)]
pub struct SupportLocalization {
    /// (ω^r, ω^t, ‖χ‖₂) per refined local maximum with value ≥ 1 − 1e−3.
    pub peaks: Vec<(f64, f64, f64)>,
    /// max over the grid of max_p |χ_{(p)}|, reported against 1/√P.
    pub max_entry_modulus: f64,
    pub entry_bound: f64,
}

/// χ(ω) = [b^T(ω^t,p) Q_p^H a(ω^r,p)]_p and its partials up to the requested
/// order, assembled from steering-vector derivatives.
fn chi_derivs(q: &[CMat], omega_r: f64, omega_t: f64, order: u32) -> Vec<Vec<Vec<C64>>> {
    // out[i][j][p] = χ_p^{(i,j)}
    let p_max = q.len();
    let (nr, nt) = (q[0].nrows(), q[0].ncols());
    let mut out = vec![vec![vec![C64::new(0.0, 0.0); p_max]; (order + 1) as usize]; (order + 1) as usize];
    for (pi, qp) in q.iter().enumerate() {
        let p = pi + 1;
        let a: Vec<CVec> = (0..=order).map(|i| steering_vector_deriv(omega_r, p, nr, i)).collect();
        let b: Vec<CVec> = (0..=order).map(|j| steering_vector_deriv(omega_t, p, nt, j)).collect();
        // q^H a precomputed per derivative order of a
        for (i, ai) in a.iter().enumerate() {
            let qa = qp.adjoint() * ai;
            for (j, bj) in b.iter().enumerate() {
                if i as u32 + j as u32 > order {
                    continue;
                }
                out[i][j][pi] = bj.dot(&qa);
            }
        }
    }
    out
}

/// ‖χ(ω)‖₂ from dual matrices (no derivatives).
pub fn dual_polynomial_norm(q: &[CMat], omega_r: f64, omega_t: f64) -> f64 {
    chi_derivs(q, omega_r, omega_t, 0)[0][0]
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Localize support estimates as refined peaks of ‖χ‖₂ on a grid.
pub fn localize_support(q: &[CMat], grid_resolution: usize) -> SupportLocalization {
    assert!(grid_resolution >= 32, "grid resolution below 32");
    assert!(!q.is_empty());
    let res = grid_resolution;
    let p_max = q.len();
    let (nr, nt) = (q[0].nrows(), q[0].ncols());
    // value[ir][it] = ||chi||2, entry_max = max_p |chi_p|
    let mut value = vec![vec![0.0f64; res]; res];
    let mut entry_max = 0.0f64;
    for (pi, qp) in q.iter().enumerate() {
        let p = pi + 1;
        let a = CMat::from_fn(res, nr, |g, i| {
            C64::from_polar(1.0, -TAU * (i * p) as f64 * g as f64 / res as f64)
        });
        let b = CMat::from_fn(res, nt, |g, j| {
            C64::from_polar(1.0, -TAU * (j * p) as f64 * g as f64 / res as f64)
        });
        // chi_p(ir, it) = a_row · conj(Q) · b_row
        let m = &a * qp.map(|z| z.conj()) * b.transpose();
        for ir in 0..res {
            for it in 0..res {
                let v = m[(ir, it)].norm();
                value[ir][it] += v * v;
                if v > entry_max {
                    entry_max = v;
                }
            }
        }
    }
    for row in value.iter_mut() {
        for v in row.iter_mut() {
            *v = v.sqrt();
        }
    }
    // Local maxima over the 8-neighborhood (torus). Seeding uses a loose
    // floor; the 1 − 1e−3 peak criterion applies to the refined value, since
    // the nearest grid point can sit noticeably below a sharp peak.
    let mut seeds = Vec::new();
    for ir in 0..res {
        for it in 0..res {
            let v = value[ir][it];
            if v < 0.9 {
                continue;
            }
            let mut is_max = true;
            for di in [res - 1, 0, 1] {
                for dj in [res - 1, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    if value[(ir + di) % res][(it + dj) % res] > v {
                        is_max = false;
                    }
                }
            }
            if is_max {
                seeds.push((ir as f64 / res as f64, it as f64 / res as f64));
            }
        }
    }
    // refine each seed by damped Newton ascent on ||chi||²
    let spacing = 1.0 / res as f64;
    let mut peaks: Vec<(f64, f64, f64)> = Vec::new();
    for (wr0, wt0) in seeds {
        let (wr, wt) = refine_peak(q, wr0, wt0, spacing);
        let v = dual_polynomial_norm(q, wr, wt);
        if v < 1.0 - 1e-3 {
            continue;
        }
        if !peaks
            .iter()
            .any(|&(pr, pt, _)| wrap_dist(pr, wr) < 2.0 * spacing && wrap_dist(pt, wt) < 2.0 * spacing)
        {
            peaks.push((wrap_unit(wr), wrap_unit(wt), v));
        }
    }
    peaks.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    SupportLocalization {
        peaks,
        max_entry_modulus: entry_max,
        entry_bound: 1.0 / (p_max as f64).sqrt(),
    }
}

/// Damped Newton ascent on F = ‖χ‖²; golden-section per axis when the Hessian
/// is not negative definite.
fn refine_peak(q: &[CMat], mut wr: f64, mut wt: f64, spacing: f64) -> (f64, f64) {
    let f_val = |r: f64, t: f64| {
        let d = chi_derivs(q, r, t, 0);
        d[0][0].iter().map(|z| z.norm_sqr()).sum::<f64>()
    };
    for _ in 0..60 {
        let d = chi_derivs(q, wr, wt, 2);
        let mut g_r = 0.0;
        let mut g_t = 0.0;
        let mut h_rr = 0.0;
        let mut h_tt = 0.0;
        let mut h_rt = 0.0;
        #[allow(clippy::needless_range_loop)]
        for pi in 0..q.len() {
            let chi = d[0][0][pi];
            let cr = d[1][0][pi];
            let ct = d[0][1][pi];
            g_r += 2.0 * (chi.conj() * cr).re;
            g_t += 2.0 * (chi.conj() * ct).re;
            h_rr += 2.0 * ((cr.conj() * cr).re + (chi.conj() * d[2][0][pi]).re);
            h_tt += 2.0 * ((ct.conj() * ct).re + (chi.conj() * d[0][2][pi]).re);
            h_rt += 2.0 * ((cr.conj() * ct).re + (chi.conj() * d[1][1][pi]).re);
        }
        let gnorm = (g_r * g_r + g_t * g_t).sqrt();
        if gnorm <= 1e-8 {
            break;
        }
        let det = h_rr * h_tt - h_rt * h_rt;
        if det > 0.0 && h_rr < 0.0 {
            // Newton step with backtracking damping
            let dr = -(h_tt * g_r - h_rt * g_t) / det;
            let dt = -(h_rr * g_t - h_rt * g_r) / det;
            let base = f_val(wr, wt);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..30 {
                let cand = f_val(wr + step * dr, wt + step * dt);
                if cand >= base {
                    wr += step * dr;
                    wt += step * dt;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        } else {
            // indefinite Hessian: golden-section on each axis in turn
            wr = golden_axis(&|x| f_val(x, wt), wr, spacing);
            wt = golden_axis(&|x| f_val(wr, x), wt, spacing);
        }
    }
    (wr, wt)
}

fn golden_axis(f: &dyn Fn(f64) -> f64, center: f64, spacing: f64) -> f64 {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut lo = center - spacing;
    let mut hi = center + spacing;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) / 2.0
}
