//! Multi-frequency array signal model: steering vectors, tensor synthesis,
//! separation metrics and scenario validation.
//!
//! Angles are normalized frequencies ω ∈ [0,1) (cycles). The physical DOA/DOD
//! θ, φ relate to ω through ω = d f₀ sin(θ)/c with half-wavelength spacing
//! d = c/(2f₀); only ω is ever stored.

use crate::{C64, CMat, CVec, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Reduce an angle to [0, 1).
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r == 1.0 {
        0.0
    } else {
        r
    }
}

/// Wrap-around distance on the unit torus.
pub fn wrap_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// A 2D angle pair (ω^r, ω^t) in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Angle2 {
    pub omega_r: f64,
    pub omega_t: f64,
}

impl Angle2 {
    pub fn new(omega_r: f64, omega_t: f64) -> Self {
        Self {
            omega_r: wrap_unit(omega_r),
            omega_t: wrap_unit(omega_t),
        }
    }
}

/// One source: DOA/DOD pair plus its per-frequency complex amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    /// Normalized DOA ω^r ∈ [0,1).
    pub omega_r: f64,
    /// Normalized DOD ω^t ∈ [0,1).
    pub omega_t: f64,
    /// c_l = [c_l^1, …, c_l^P].
    #[serde(with = "serde_c64_vec")]
    pub coeffs: Vec<C64>,
}

impl Source {
    pub fn new(omega_r: f64, omega_t: f64, coeffs: Vec<C64>) -> Self {
        Self {
            omega_r: wrap_unit(omega_r),
            omega_t: wrap_unit(omega_t),
            coeffs,
        }
    }

    pub fn angles(&self) -> Angle2 {
        Angle2::new(self.omega_r, self.omega_t)
    }

    /// ℓ₂ norm of the amplitude vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Ground-truth source set plus array/frequency dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_freq: usize,
    pub sources: Vec<Source>,
}

impl Scenario {
    /// Validates the structural invariants and normalizes angles into [0,1).
    pub fn new(n_rx: usize, n_tx: usize, n_freq: usize, sources: Vec<Source>) -> Result<Self> {
        let s = Self {
            n_rx,
            n_tx,
            n_freq,
            sources,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx < 2 {
            return Err(Error::InvalidScenario(format!("n_rx = {} < 2", self.n_rx)));
        }
        if self.n_tx < 2 {
            return Err(Error::InvalidScenario(format!("n_tx = {} < 2", self.n_tx)));
        }
        if self.n_freq < 1 {
            return Err(Error::InvalidScenario("n_freq = 0".into()));
        }
        if self.sources.is_empty() {
            return Err(Error::InvalidScenario("no sources".into()));
        }
        for (l, src) in self.sources.iter().enumerate() {
            if src.coeffs.len() != self.n_freq {
                return Err(Error::InvalidScenario(format!(
                    "source {l}: coefficient vector has length {} but n_freq = {}",
                    src.coeffs.len(),
                    self.n_freq
                )));
            }
            if src.coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
                return Err(Error::InvalidScenario(format!("source {l}: zero coefficient vector")));
            }
            if !src.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
                || !src.omega_r.is_finite()
                || !src.omega_t.is_finite()
            {
                return Err(Error::InvalidScenario(format!("source {l}: non-finite entries")));
            }
        }
        Ok(())
    }

    /// Indices of sources whose amplitude vector exceeds the ‖c_l‖₂ ≤ 1 normalization.
    ///
    /// Amplitudes are never rescaled; certificate theory is the only consumer of
    /// the normalization, so violations are reported rather than repaired.
    pub fn norm_violations(&self) -> Vec<usize> {
        self.sources
            .iter()
            .enumerate()
            .filter(|(_, s)| s.coeff_norm() > 1.0 + 1e-12)
            .map(|(l, _)| l)
            .collect()
    }

    pub fn support(&self) -> Vec<Angle2> {
        self.sources.iter().map(|s| s.angles()).collect()
    }
}

/// The observation 𝒳: P complex matrices of size N_r × N_t.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFreqTensor {
    pub slices: Vec<CMat>,
}

impl MultiFreqTensor {
    pub fn new(slices: Vec<CMat>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::DimensionMismatch("tensor needs at least one slice".into()));
        }
        let (nr, nt) = (slices[0].nrows(), slices[0].ncols());
        if slices.iter().any(|s| s.nrows() != nr || s.ncols() != nt) {
            return Err(Error::DimensionMismatch("tensor slices differ in size".into()));
        }
        Ok(Self { slices })
    }

    pub fn n_rx(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.slices[0].ncols()
    }

    pub fn n_freq(&self) -> usize {
        self.slices.len()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.slices
            .iter()
            .map(|s| s.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }
}

/// Steering vector a(ω, p) with entries exp(−j2π·i·p·ω), i = 0..n−1.
///
/// Entry 0 is exactly 1.
pub fn steering_vector(omega: f64, p: usize, n: usize) -> CVec {
    assert!(p >= 1, "frequency index starts at 1");
    assert!(n >= 1);
    CVec::from_fn(n, |i, _| {
        if i == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, -TAU * (i * p) as f64 * omega)
        }
    })
}

/// Derivative of the steering vector with respect to ω, term-wise factor (−j2π·i·p)^order.
pub fn steering_vector_deriv(omega: f64, p: usize, n: usize, order: u32) -> CVec {
    let base = steering_vector(omega, p, n);
    CVec::from_fn(n, |i, _| {
        let f = C64::new(0.0, -TAU * (i * p) as f64).powu(order);
        f * base[i]
    })
}

/// Synthesize the noise-free observation: slice p = Σ_l c_l^p a(ω^r_l, p) b^T(ω^t_l, p).
pub fn synthesize(scenario: &Scenario) -> MultiFreqTensor {
    let (nr, nt) = (scenario.n_rx, scenario.n_tx);
    let slices = (1..=scenario.n_freq)
        .map(|p| {
            let mut x = CMat::zeros(nr, nt);
            for src in &scenario.sources {
                let a = steering_vector(src.omega_r, p, nr);
                let b = steering_vector(src.omega_t, p, nt);
                let c = src.coeffs[p - 1];
                for i in 0..nr {
                    for j in 0..nt {
                        x[(i, j)] += c * a[i] * b[j];
                    }
                }
            }
            x
        })
        .collect();
    MultiFreqTensor { slices }
}

/// Minimum pairwise wrap-around separation of the p-scaled angles.
pub fn separation_1d(omegas: &[f64], p: usize) -> Result<f64> {
    if omegas.len() < 2 {
        return Err(Error::UndefinedSeparation);
    }
    let mut best = f64::INFINITY;
    for (m, &a) in omegas.iter().enumerate() {
        for &b in omegas.iter().skip(m + 1) {
            let d = (p as f64 * (a - b).abs()).rem_euclid(1.0);
            best = best.min(d.min(1.0 - d));
        }
    }
    Ok(best)
}

/// 2D separation at frequency index p: per-pair max over the two coordinates,
/// then min over pairs.
pub fn separation_2d(sources: &[(f64, f64)], p: usize) -> Result<f64> {
    if sources.len() < 2 {
        return Err(Error::UndefinedSeparation);
    }
    let wrap = |a: f64, b: f64| {
        let d = (p as f64 * (a - b).abs()).rem_euclid(1.0);
        d.min(1.0 - d)
    };
    let mut best = f64::INFINITY;
    for (m, &(ar, at)) in sources.iter().enumerate() {
        for &(br, bt) in sources.iter().skip(m + 1) {
            best = best.min(wrap(ar, br).max(wrap(at, bt)));
        }
    }
    Ok(best)
}

/// Complex numbers serialize as two-element [re, im] arrays.
pub mod serde_c64 {
    use crate::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(de)?;
        Ok(C64::new(re, im))
    }
}

/// Vectors of complex numbers as arrays of [re, im] pairs.
pub mod serde_c64_vec {
    use crate::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], ser: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(de)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}
