//! Functions of potential matrices through their spectral decomposition.
//!
//! Everything here runs over a full symmetric eigendecomposition: dense,
//! deterministic, and accurate to machine precision at the desk scales this
//! crate targets (matrices up to a few thousand rows). Half powers and the
//! inverse are computed once per matrix and cached behind the
//! [`PotentialMatrix`](crate::potential::PotentialMatrix) handle, which is
//! safe to share across threads.
//!
//! Thermal state kernels `W(T)^{-1} V^{1/2}` and `W(T)^{-1} V^{-1/2}` — the
//! matrices whose entries control every finite-temperature bound — are
//! evaluated in one pass over the eigenvalues as
//! `tanh(sqrt(l)/(2T)) * l^(+-1/2)`, which neither overflows at small `T` nor
//! cancels at large `T`. Zero temperature is an explicit branch that returns
//! the plain half power.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec, Site};
use crate::potential::PotentialMatrix;

/// Which half power of the potential matrix to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPower {
    /// `V^{+1/2}`
    Plus,
    /// `V^{-1/2}`
    Minus,
}

/// Eigenvalues (ascending) and the orthonormal basis of a real symmetric
/// matrix. Column `i` of `basis` belongs to `eigenvalues[i]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis: DMatrix<f64>,
}

impl SpectralDecomposition {
    /// Full symmetric eigendecomposition, eigenvalues sorted ascending with
    /// their columns. Deterministic for a given input matrix.
    pub fn compute(matrix: &DMatrix<f64>) -> Self {
        let eigen = matrix.clone().symmetric_eigen();
        let n = eigen.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
        let mut basis = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            basis.set_column(dst, &eigen.eigenvectors.column(src));
        }
        SpectralDecomposition { eigenvalues, basis }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("decomposition is never empty")
    }

    /// `U f(L) U^T`, symmetrized so roundoff cannot leave a skew part.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.eigenvalues.len();
        let mut scaled = self.basis.clone();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            let fi = f(l);
            for r in 0..n {
                scaled[(r, i)] *= fi;
            }
        }
        let mut out = scaled * self.basis.transpose();
        for i in 0..n {
            for j in (i + 1)..n {
                let mean = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = mean;
                out[(j, i)] = mean;
            }
        }
        out
    }
}

/// `V^{+1/2}` or `V^{-1/2}`, from the cache on `v`.
pub fn half_power(v: &PotentialMatrix, which: HalfPower) -> &DMatrix<f64> {
    let powers = v.cached_half_powers();
    match which {
        HalfPower::Plus => &powers.plus,
        HalfPower::Minus => &powers.minus,
    }
}

/// Thermal weight `W(T) = 1 + 2 (exp(V^{1/2}/T) - 1)^{-1}`, i.e.
/// `coth(sqrt(l)/(2T))` on each eigenvalue. `W(0)` is the identity and
/// `W(T) >= 1` for every `T`.
pub fn thermal_weight(v: &PotentialMatrix, temperature: f64) -> Result<DMatrix<f64>> {
    check_temperature(temperature)?;
    let n = v.matrix().nrows();
    if temperature == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    Ok(v.decomposition()
        .apply(|l| 1.0 / (l.sqrt() / (2.0 * temperature)).tanh()))
}

/// Thermally damped half power `W(T)^{-1} V^{+-1/2}`. At `T = 0` this is the
/// plain half power; entries shrink monotonically as `T` grows.
pub fn thermal_half_power(
    v: &PotentialMatrix,
    temperature: f64,
    which: HalfPower,
) -> Result<DMatrix<f64>> {
    check_temperature(temperature)?;
    if temperature == 0.0 {
        return Ok(half_power(v, which).clone());
    }
    let f = move |l: f64| {
        let damp = (l.sqrt() / (2.0 * temperature)).tanh();
        match which {
            HalfPower::Plus => damp * l.sqrt(),
            HalfPower::Minus => damp / l.sqrt(),
        }
    };
    Ok(v.decomposition().apply(f))
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "temperature {temperature} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// Half-power entry of the uniform nearest-neighbour model, evaluated
/// directly from the circulant eigenbasis:
/// `n^{-D} * sum_k cos(2 pi k.(i-j)/n) * lambda_k^{+-1/2}` with
/// `lambda_k = 1 - 2c sum_d cos(2 pi k_d / n)`. Exact up to summation
/// roundoff; costs one pass over the lattice per entry.
pub fn circulant_half_power_entry(
    lattice: LatticeSpec,
    c: f64,
    which: HalfPower,
    i: &Site,
    j: &Site,
) -> Result<f64> {
    if lattice.boundary() != Boundary::Periodic {
        return Err(Error::InvalidParameter(
            "circulant entries require a periodic lattice".into(),
        ));
    }
    let limit = 1.0 / (2.0 * lattice.dim() as f64);
    if !c.is_finite() || c < 0.0 || c >= limit {
        return Err(Error::InvalidParameter(format!(
            "nearest-neighbour coupling c = {c} outside [0, {limit})"
        )));
    }
    let side = lattice.side() as f64;
    let tau = 2.0 * std::f64::consts::PI / side;
    let offsets: Vec<f64> = i
        .coords()
        .iter()
        .zip(j.coords())
        .map(|(&a, &b)| a as f64 - b as f64)
        .collect();
    if offsets.len() != lattice.dim() {
        return Err(Error::InvalidParameter(
            "sites do not match the lattice dimension".into(),
        ));
    }
    lattice.index_of(i)?;
    lattice.index_of(j)?;
    let count = lattice.site_count()?;
    let mut acc = 0.0f64;
    let mut wave = vec![1usize; lattice.dim()];
    for _ in 0..count {
        let mut phase = 0.0;
        let mut lambda = 1.0;
        for (axis, &k) in wave.iter().enumerate() {
            phase += tau * k as f64 * offsets[axis];
            lambda -= 2.0 * c * (tau * k as f64).cos();
        }
        let weight = match which {
            HalfPower::Plus => lambda.sqrt(),
            HalfPower::Minus => 1.0 / lambda.sqrt(),
        };
        acc += phase.cos() * weight;
        for k in wave.iter_mut().rev() {
            if *k < lattice.side() {
                *k += 1;
                break;
            }
            *k = 1;
        }
    }
    Ok(acc / count as f64)
}

/// Constants of the exponential entry decay of `W(T)^{-1} V^{-1/2}` for a
/// `k`-banded potential with spectrum in `[a, b]`:
/// `|entry(i, j)| <= prefactor * ratio^distance(i, j)`.
#[derive(Debug, Clone, Copy)]
pub struct DecayConstants {
    /// `K` in the envelope `K * q^d`.
    pub prefactor: f64,
    /// Per-unit-distance ratio `q = ((kappa-1)/(kappa+1))^(2/k)`, in `[0, 1)`.
    pub ratio: f64,
    /// Energy scale `eta = sqrt(a kappa / (kappa + 1))` of the thermal factor.
    pub eta: f64,
    /// `(kappa+1)/(kappa-1)`; infinite in the flat-spectrum case `kappa = 1`.
    pub chi: f64,
}

/// Decay constants for spectrum `[a, b]`, bandwidth `k` and temperature `t`.
///
/// A flat spectrum (`a = b`, so the matrix is a multiple of the identity)
/// yields `ratio = 0` and the prefactor equal to the single diagonal value
/// `tanh(sqrt(a)/(2T))/sqrt(a)` (or `1/sqrt(a)` at `T = 0`), with the
/// convention `0^0 = 1` on the diagonal.
pub fn decay_constants(a: f64, b: f64, k: usize, temperature: f64) -> Result<DecayConstants> {
    if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b < a {
        return Err(Error::InvalidParameter(format!(
            "spectral interval [{a}, {b}] must satisfy 0 < a <= b"
        )));
    }
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth k = {k} must be a positive even integer"
        )));
    }
    check_temperature(temperature)?;
    let kappa = b / a;
    if kappa == 1.0 {
        let diagonal = if temperature == 0.0 {
            1.0 / a.sqrt()
        } else {
            (a.sqrt() / (2.0 * temperature)).tanh() / a.sqrt()
        };
        return Ok(DecayConstants {
            prefactor: diagonal,
            ratio: 0.0,
            eta: (a / 2.0).sqrt(),
            chi: f64::INFINITY,
        });
    }
    let chi = (kappa + 1.0) / (kappa - 1.0);
    let ratio = ((kappa - 1.0) / (kappa + 1.0)).powf(2.0 / k as f64);
    let eta = (a * kappa / (kappa + 1.0)).sqrt();
    let thermal = if temperature == 0.0 {
        1.0
    } else {
        (eta / (2.0 * temperature)).tanh()
    };
    Ok(DecayConstants {
        prefactor: thermal * (kappa + 1.0) / eta,
        ratio,
        eta,
        chi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::potential::PotentialMatrix;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nn_chain(n: usize, c: f64) -> PotentialMatrix {
        let lat = LatticeSpec::new(1, n, Boundary::Periodic).unwrap();
        PotentialMatrix::nearest_neighbor(lat, c).unwrap()
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn decomposition_of_a_two_by_two_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let dec = SpectralDecomposition::compute(&m);
        assert!((dec.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((dec.eigenvalues()[1] - 3.0).abs() < 1e-14);
        let sqrt3 = 3.0f64.sqrt();
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                (sqrt3 + 1.0) / 2.0,
                (sqrt3 - 1.0) / 2.0,
                (sqrt3 - 1.0) / 2.0,
                (sqrt3 + 1.0) / 2.0,
            ],
        );
        assert!(max_abs_diff(&dec.apply(f64::sqrt), &expected) < 1e-14);
    }

    #[test]
    fn decomposition_reconstructs_random_symmetric_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5;
                m[(i, j)] = u;
                m[(j, i)] = u;
            }
        }
        let dec = SpectralDecomposition::compute(&m);
        assert!(
            dec.eigenvalues().windows(2).all(|w| w[0] <= w[1]),
            "eigenvalues sorted ascending"
        );
        let rebuilt = dec.apply(|l| l);
        assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
        let gram = dec.basis().transpose() * dec.basis();
        assert!(max_abs_diff(&gram, &DMatrix::identity(n, n)) < 1e-12);
    }

    #[test]
    fn half_powers_invert_and_square_back() {
        let v = nn_chain(12, 0.3);
        let plus = half_power(&v, HalfPower::Plus);
        let minus = half_power(&v, HalfPower::Minus);
        assert!(max_abs_diff(&(plus * plus), v.matrix()) < 1e-12);
        assert!(max_abs_diff(&(plus * minus), &DMatrix::identity(12, 12)) < 1e-12);
    }

    #[test]
    fn half_powers_commute_with_the_matrix() {
        let v = nn_chain(10, 0.25);
        let plus = half_power(&v, HalfPower::Plus);
        let left = plus * v.matrix();
        let right = v.matrix() * plus;
        assert!(max_abs_diff(&left, &right) < 1e-12);
    }

    #[test]
    fn thermal_weight_of_the_identity_potential() {
        let lat = LatticeSpec::new(1, 3, Boundary::Periodic).unwrap();
        let v = PotentialMatrix::nearest_neighbor(lat, 0.0).unwrap();
        let w = thermal_weight(&v, 1.0).unwrap();
        let expected = (std::f64::consts::E + 1.0) / (std::f64::consts::E - 1.0);
        assert!(max_abs_diff(&w, &(DMatrix::identity(3, 3) * expected)) < 1e-14);
        let frozen = thermal_weight(&v, 0.0).unwrap();
        assert_eq!(frozen, DMatrix::identity(3, 3));
    }

    #[test]
    fn thermal_weight_smallest_eigenvalue_matches_the_closed_form() {
        let v = nn_chain(8, 0.2);
        let b = v.spectral_bounds().lambda_max;
        for t in [0.3, 1.0, 4.0] {
            let w = thermal_weight(&v, t).unwrap();
            let dec = SpectralDecomposition::compute(&w);
            let expected = 1.0 / (b.sqrt() / (2.0 * t)).tanh();
            assert!((dec.lambda_min() - expected).abs() < 1e-10);
            assert!(dec.lambda_min() >= 1.0, "thermal weight stays at or above 1");
        }
    }

    #[test]
    fn thermal_half_power_interpolates_between_limits() {
        let lat = LatticeSpec::new(1, 3, Boundary::Periodic).unwrap();
        let v = PotentialMatrix::nearest_neighbor(lat, 0.0).unwrap();
        let damped = thermal_half_power(&v, 1.0, HalfPower::Minus).unwrap();
        let expected = (std::f64::consts::E - 1.0) / (std::f64::consts::E + 1.0);
        assert!(max_abs_diff(&damped, &(DMatrix::identity(3, 3) * expected)) < 1e-14);

        let v = nn_chain(10, 0.2);
        let frozen = thermal_half_power(&v, 0.0, HalfPower::Minus).unwrap();
        assert_eq!(&frozen, half_power(&v, HalfPower::Minus));
        let hot = thermal_half_power(&v, 1e6, HalfPower::Minus).unwrap();
        assert!(hot.iter().all(|x| x.abs() < 1e-5), "entries vanish at high T");
        assert!(thermal_half_power(&v, -1.0, HalfPower::Minus).is_err());
    }

    #[test]
    fn circulant_entries_match_the_dense_half_power() {
        let v = nn_chain(16, 0.3);
        let lat = *v.lattice();
        let sites = lat.sites();
        for which in [HalfPower::Plus, HalfPower::Minus] {
            let dense = half_power(&v, which);
            for i in 0..16 {
                for j in 0..16 {
                    let entry =
                        circulant_half_power_entry(lat, 0.3, which, &sites[i], &sites[j]).unwrap();
                    assert!(
                        (entry - dense[(i, j)]).abs() < 1e-12,
                        "entry ({i},{j}) mismatch"
                    );
                }
            }
        }
    }

    #[test]
    fn circulant_entries_are_translation_invariant() {
        let lat = LatticeSpec::new(2, 5, Boundary::Periodic).unwrap();
        let sites = lat.sites();
        let a = circulant_half_power_entry(lat, 0.1, HalfPower::Minus, &sites[0], &sites[7])
            .unwrap();
        let b = circulant_half_power_entry(lat, 0.1, HalfPower::Minus, &sites[5], &sites[12])
            .unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn circulant_entries_of_the_identity() {
        let lat = LatticeSpec::new(1, 9, Boundary::Periodic).unwrap();
        let sites = lat.sites();
        let diag =
            circulant_half_power_entry(lat, 0.0, HalfPower::Plus, &sites[2], &sites[2]).unwrap();
        let off =
            circulant_half_power_entry(lat, 0.0, HalfPower::Plus, &sites[2], &sites[5]).unwrap();
        assert!((diag - 1.0).abs() < 1e-13);
        assert!(off.abs() < 1e-13);
        let open = LatticeSpec::new(1, 9, Boundary::Open).unwrap();
        assert!(circulant_half_power_entry(open, 0.1, HalfPower::Plus, &sites[0], &sites[1])
            .is_err());
    }

    #[test]
    fn decay_constants_of_the_reference_interval() {
        let d = decay_constants(0.6, 1.4, 2, 0.0).unwrap();
        assert!((d.ratio - 0.4).abs() < 1e-14);
        let expected_prefactor = (10.0 / 3.0) / 0.42f64.sqrt();
        assert!((d.prefactor - expected_prefactor).abs() < 1e-12);
        assert!((d.eta - 0.42f64.sqrt()).abs() < 1e-14);
        assert!((d.chi - 2.5).abs() < 1e-12);
    }

    #[test]
    fn decay_constants_shrink_with_temperature() {
        let cold = decay_constants(0.6, 1.4, 2, 0.0).unwrap();
        let warm = decay_constants(0.6, 1.4, 2, 1.0).unwrap();
        let hot = decay_constants(0.6, 1.4, 2, 10.0).unwrap();
        assert!(cold.prefactor > warm.prefactor);
        assert!(warm.prefactor > hot.prefactor);
        assert_eq!(cold.ratio, warm.ratio, "the ratio does not depend on T");
        let expected = (cold.eta / 2.0).tanh() * cold.prefactor;
        assert!((warm.prefactor - expected).abs() < 1e-12);
    }

    #[test]
    fn decay_constants_flat_spectrum_case() {
        let d = decay_constants(4.0, 4.0, 2, 0.0).unwrap();
        assert_eq!(d.ratio, 0.0);
        assert!((d.prefactor - 0.5).abs() < 1e-14);
        assert!(d.chi.is_infinite());
        let warm = decay_constants(4.0, 4.0, 2, 1.0).unwrap();
        assert!((warm.prefactor - 1.0f64.tanh() / 2.0).abs() < 1e-14);
        assert!(decay_constants(0.0, 1.0, 2, 0.0).is_err());
        assert!(decay_constants(1.0, 0.5, 2, 0.0).is_err());
        assert!(decay_constants(0.5, 1.0, 3, 0.0).is_err());
    }

    #[test]
    fn wider_bands_decay_more_slowly() {
        let narrow = decay_constants(0.6, 1.4, 2, 0.0).unwrap();
        let wide = decay_constants(0.6, 1.4, 6, 0.0).unwrap();
        assert!(narrow.ratio < wide.ratio);
        assert!(wide.ratio < 1.0);
    }
}
