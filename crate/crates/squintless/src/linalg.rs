//! Small dense linear-algebra helpers shared across modules.

use crate::{C64, CMat, CVec};


/// (M + M^H)/2, guarding eigensolvers against accumulation drift.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, so that
/// `m == v * diag(w) * v^H` up to round-off.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let n = m.nrows();
    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(se.eigenvalues[src]);
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &CMat, b: &CVec) -> CVec {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-13 * svd.singular_values.max().max(1e-300))
        .expect("svd solve")
}

/// Least squares with a matrix right-hand side.
pub fn lstsq_mat(a: &CMat, b: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-13 * svd.singular_values.max().max(1e-300))
        .expect("svd solve")
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real part of the trace inner product `<a, b>_R = Re tr(a^H b)`.
pub fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Eigenvalues of a small general complex matrix by shifted QR iteration.
///
/// Hessenberg reduction followed by implicit single-shift QR with deflation.
/// Intended for the small rotation matrices that arise in subspace frequency
/// estimation (dimension at most a few dozen).
pub fn small_eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let mut h = hessenberg(m);
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is 0..hi
    let mut stall = 0usize;
    while hi > 0 {
        if hi == 1 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // deflate where the subdiagonal is negligible
        let mut deflated = false;
        for i in (1..hi).rev() {
            let tiny = 1e-14 * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm()).max(1e-300);
            if h[(i, i - 1)].norm() <= tiny
                && i == hi - 1 {
                    eigs.push(h[(hi - 1, hi - 1)]);
                    hi -= 1;
                    deflated = true;
                    stall = 0;
                    break;
                }
        }
        if deflated {
            continue;
        }
        if hi == 2 {
            let (l1, l2) = eig2(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
            eigs.push(l1);
            eigs.push(l2);
            break;
        }
        let shift = wilkinson_shift(&h, hi, stall);
        qr_step(&mut h, hi, shift);
        stall += 1;
        if stall > 30 * n {
            // give up on further deflation; diagonal is the best estimate
            for i in 0..hi {
                eigs.push(h[(i, i)]);
            }
            break;
        }
    }
    eigs
}

fn hessenberg(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal
        let mut x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = x[0];
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm < 1e-300 {
            continue;
        }
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { C64::new(1.0, 0.0) };
        x[0] += phase * xnorm;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm < 1e-300 {
            continue;
        }
        for z in x.iter_mut() {
            *z /= vnorm;
        }
        // H = I - 2 v v^H applied on both sides
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (idx, i) in (k + 1..n).enumerate() {
                s += x[idx].conj() * h[(i, j)];
            }
            s *= 2.0;
            for (idx, i) in (k + 1..n).enumerate() {
                let upd = x[idx] * s;
                h[(i, j)] -= upd;
            }
        }
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (idx, j) in (k + 1..n).enumerate() {
                s += h[(i, j)] * x[idx];
            }
            s *= 2.0;
            for (idx, j) in (k + 1..n).enumerate() {
                let upd = s * x[idx].conj();
                h[(i, j)] -= upd;
            }
        }
    }
    h
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

fn wilkinson_shift(h: &CMat, hi: usize, stall: usize) -> C64 {
    if stall > 0 && stall.is_multiple_of(12) {
        // exceptional shift breaks symmetry-induced cycling
        return h[(hi - 1, hi - 2)] * 0.5 + h[(hi - 1, hi - 1)];
    }
    let (l1, l2) = eig2(
        h[(hi - 2, hi - 2)],
        h[(hi - 2, hi - 1)],
        h[(hi - 1, hi - 2)],
        h[(hi - 1, hi - 1)],
    );
    let target = h[(hi - 1, hi - 1)];
    if (l1 - target).norm() < (l2 - target).norm() {
        l1
    } else {
        l2
    }
}

/// One implicit single-shift QR sweep on the leading `hi` block.
fn qr_step(h: &mut CMat, hi: usize, shift: C64) {
    let n = h.nrows();
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(hi - 1);
    for i in 0..hi {
        h[(i, i)] -= shift;
    }
    // QR by Givens rotations on the Hessenberg band
    for i in 0..hi - 1 {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r < 1e-300 {
            (1.0, C64::new(0.0, 0.0))
        } else {
            let c = a.norm() / r;
            let phase = if a.norm() > 0.0 { a / a.norm() } else { C64::new(1.0, 0.0) };
            (c, phase.conj() * b / r)
        };
        rots.push((c, s));
        for j in i..n.min(hi) {
            let t1 = h[(i, j)];
            let t2 = h[(i + 1, j)];
            h[(i, j)] = t1 * c + t2 * s.conj();
            h[(i + 1, j)] = t2 * c - t1 * s;
        }
    }
    // RQ: apply the rotations from the right
    for (i, &(c, s)) in rots.iter().enumerate() {
        for j in 0..(i + 2).min(hi) {
            let t1 = h[(j, i)];
            let t2 = h[(j, i + 1)];
            h[(j, i)] = t1 * c + t2 * s;
            h[(j, i + 1)] = t2 * c - t1 * s.conj();
        }
    }
    for i in 0..hi {
        h[(i, i)] += shift;
    }
}
