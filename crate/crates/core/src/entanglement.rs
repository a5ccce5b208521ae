//! Exact entanglement and correlation measures for lattice regions.
//!
//! The ground state of a potential matrix `V` is Gaussian with covariances
//! built from `V^{+-1/2}`, so every measure here reduces to eigenvalues of
//! small symmetric products:
//!
//! - the symplectic spectrum of a region comes from
//!   `A_I = V^{-1/2}|_I V^{1/2}|_I`, whose eigenvalues are the squared
//!   symplectic eigenvalues and never fall below 1;
//! - the logarithmic negativity at temperature `T` comes from
//!   `Q = P w^- P w^+` with `w^{+-} = W(T)^{-1} V^{+-1/2}` and `P` the sign
//!   flip on the region, evaluated through the manifestly symmetric similar
//!   form `S^{1/2} w^+ S^{1/2}`, `S = P w^- P`;
//! - the classical mutual information of the thermal Gibbs distribution is
//!   `log det(V|_I (V^{-1})|_I) / 2`, temperature-independent.
//!
//! Products of two positive definite reductions `G|_I H|_I` are diagonalized
//! through the similar symmetric matrix `L^T G|_I L` with `H|_I = L L^T`, so
//! all spectra are real by construction.
//!
//! Entropies and negativities are reported in bits; the classical
//! differential entropy is in nats, as its additive constants are natural in
//! that unit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::potential::{Bandwidth, PotentialMatrix};
use crate::spectral::{half_power, thermal_half_power, HalfPower, SpectralDecomposition};

/// Symplectic eigenvalues of a reduced ground state, sorted descending.
/// Every value is at least 1; the value 1 marks a mode carrying no
/// entanglement.
#[derive(Debug, Clone)]
pub struct SymplecticSpectrum {
    mus: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.mus
    }

    pub fn len(&self) -> usize {
        self.mus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mus.is_empty()
    }
}

/// Large-`n` closed forms for the interaction block of a squared
/// nearest-neighbour chain (coupling `-c`, block `[1..m]` of `n` sites).
#[derive(Debug, Clone, Copy)]
pub struct ChainSquaredClosedForm {
    /// Eigenvalue `-c * (inverse_corner + inverse_reach)` of the interaction
    /// block.
    pub lambda_plus: f64,
    /// Eigenvalue `-c * (inverse_corner - inverse_reach)`.
    pub lambda_minus: f64,
    /// Nearest-neighbour entry of the inverse chain matrix,
    /// `1/(2c sqrt(1-4c^2)) - 1/(2c)`.
    pub inverse_corner: f64,
    /// Entry of the inverse chain matrix at distance `m`, decaying as
    /// `((1 - sqrt(1-4c^2))/(2c))^m`.
    pub inverse_reach: f64,
}

/// Eigenvalues of `G|_I * H|_I` for symmetric positive definite reductions,
/// ascending. Uses the similar symmetric form `L^T G|_I L` with
/// `H|_I = L L^T`.
fn product_eigenvalues(g_sub: &DMatrix<f64>, h_sub: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = nalgebra::linalg::Cholesky::new(h_sub.clone())
        .ok_or(Error::ReductionFactorization)?;
    let l = chol.unpack();
    let symmetric = symmetrize(l.transpose() * g_sub * &l);
    Ok(SpectralDecomposition::compute(&symmetric)
        .eigenvalues()
        .to_vec())
}

fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            out[(a, b)] = m[(i, j)];
        }
    }
    out
}

fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let mean = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = mean;
            m[(j, i)] = mean;
        }
    }
    m
}

pub(crate) fn check_same_lattice(v: &PotentialMatrix, region: &Region) -> Result<()> {
    if v.lattice() != region.lattice() {
        return Err(Error::InvalidParameter(
            "region and potential matrix live on different lattices".into(),
        ));
    }
    Ok(())
}

/// Turns eigenvalues of a reduced product (mathematically `>= 1`) into
/// symplectic eigenvalues. Values in `[1 - 1e-8, 1)` are roundoff and clamp
/// to exactly 1; anything lower is reported as an eigensolver failure.
fn symplectic_from_product(eigenvalues: Vec<f64>) -> Result<SymplecticSpectrum> {
    let mut mus = Vec::with_capacity(eigenvalues.len());
    for lambda in eigenvalues {
        if lambda < 1.0 - 1e-8 {
            return Err(Error::SpectrumBelowOne { value: lambda });
        }
        mus.push(if lambda < 1.0 { 1.0 } else { lambda.sqrt() });
    }
    mus.sort_by(|a, b| b.total_cmp(a));
    Ok(SymplecticSpectrum { mus })
}

/// Symplectic spectrum of the ground state reduced to `region`, from the
/// eigenvalues of `A_I = V^{-1/2}|_I V^{1/2}|_I`.
pub fn reduced_symplectic_spectrum(
    v: &PotentialMatrix,
    region: &Region,
) -> Result<SymplecticSpectrum> {
    check_same_lattice(v, region)?;
    let idx = region.indices();
    let g = submatrix(half_power(v, HalfPower::Minus), &idx, &idx);
    let h = submatrix(half_power(v, HalfPower::Plus), &idx, &idx);
    symplectic_from_product(product_eigenvalues(&g, &h)?)
}

/// Entropy of entanglement in bits for a reduced ground state:
/// `sum_i [ (mu+1)/2 log2 (mu+1)/2 - (mu-1)/2 log2 (mu-1)/2 ]`.
pub fn entanglement_entropy(spectrum: &SymplecticSpectrum) -> f64 {
    fn xlog2x(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * x.log2()
        }
    }
    spectrum
        .mus
        .iter()
        .map(|&mu| xlog2x((mu + 1.0) / 2.0) - xlog2x((mu - 1.0) / 2.0))
        .sum()
}

/// Logarithmic negativity in bits of the thermal state at `temperature`,
/// split along `region`: `sum_i log2 max(1, lambda_i(Q))` with
/// `Q = P w^- P w^+`. Zero means no detected entanglement across the cut.
pub fn log_negativity(v: &PotentialMatrix, region: &Region, temperature: f64) -> Result<f64> {
    check_same_lattice(v, region)?;
    let minus = thermal_half_power(v, temperature, HalfPower::Minus)?;
    let plus = thermal_half_power(v, temperature, HalfPower::Plus)?;
    let count = minus.nrows();
    let mut sign = vec![1.0f64; count];
    for i in region.indices() {
        sign[i] = -1.0;
    }
    let mut s = minus;
    for i in 0..count {
        for j in 0..count {
            s[(i, j)] *= sign[i] * sign[j];
        }
    }
    let dec = SpectralDecomposition::compute(&s);
    if dec.lambda_min() <= 0.0 {
        return Err(Error::ReductionFactorization);
    }
    let root = dec.apply(f64::sqrt);
    let similar = symmetrize(&root * plus * &root);
    Ok(SpectralDecomposition::compute(&similar)
        .eigenvalues()
        .iter()
        .map(|&l| if l > 1.0 { l.log2() } else { 0.0 })
        .sum())
}

/// Symplectic spectrum of a region when the potential is the square `M^2` of
/// a banded interaction matrix, computed from `M` alone: the eigenvalues of
/// `1 - R = M^{-1}|_I M|_I`, whose square roots are the symplectic
/// eigenvalues. `R` couples the region to the exterior only through sites
/// within the band, so all but a boundary handful of eigenvalues of `1 - R`
/// sit at exactly 1.
pub fn squared_reduced_spectrum(
    m: &PotentialMatrix,
    region: &Region,
) -> Result<SymplecticSpectrum> {
    check_same_lattice(m, region)?;
    if !matches!(m.bandwidth(), Bandwidth::Banded(_)) {
        return Err(Error::InvalidParameter(
            "the squared route requires a banded interaction matrix".into(),
        ));
    }
    let idx = region.indices();
    let inv = submatrix(m.inverse(), &idx, &idx);
    let sub = submatrix(m.matrix(), &idx, &idx);
    symplectic_from_product(product_eigenvalues(&inv, &sub)?)
}

/// Large-`n` closed forms for the two nonzero eigenvalues of the interaction
/// block `R` of a squared nearest-neighbour chain with coupling `-c` and
/// region `[1..m]`. Exact in the block length `m`; corrections in the chain
/// length `n` are geometrically small.
pub fn chain_squared_closed_form(c: f64, m: usize, n: usize) -> Result<ChainSquaredClosedForm> {
    if !c.is_finite() || c <= 0.0 || c >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "chain coupling c = {c} outside (0, 1/2)"
        )));
    }
    if m < 1 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "block length m = {m} must satisfy 1 <= m < n = {n}"
        )));
    }
    let s = (1.0 - 4.0 * c * c).sqrt();
    let inverse_corner = 1.0 / (2.0 * c * s) - 1.0 / (2.0 * c);
    let inverse_reach = ((1.0 - s) / (2.0 * c)).powi(m as i32) / s;
    Ok(ChainSquaredClosedForm {
        lambda_plus: -c * (inverse_corner + inverse_reach),
        lambda_minus: -c * (inverse_corner - inverse_reach),
        inverse_corner,
        inverse_reach,
    })
}

/// Mutual information in bits between `region` and its complement in the
/// classical Gibbs distribution of the potential:
/// `log2 det(V|_I (V^{-1})|_I) / 2`. Temperature drops out exactly.
pub fn classical_mutual_information(v: &PotentialMatrix, region: &Region) -> Result<f64> {
    check_same_lattice(v, region)?;
    if region.is_full() {
        return Err(Error::InvalidParameter(
            "mutual information needs a proper subregion".into(),
        ));
    }
    let idx = region.indices();
    let inv = submatrix(v.inverse(), &idx, &idx);
    let sub = submatrix(v.matrix(), &idx, &idx);
    let eigenvalues = product_eigenvalues(&inv, &sub)?;
    Ok(0.5 * eigenvalues.iter().map(|&l| l.log2()).sum::<f64>())
}

/// Differential entropy in nats of the classical Gibbs distribution of the
/// potential, marginalized to `region` (which may be the whole lattice):
/// `ln det((V^{-1})|_A) / 2 + v(A) (ln(2 pi T) + 1)`. The reduced system is
/// governed by the Schur complement of the exterior, whose determinant is the
/// reciprocal of `det((V^{-1})|_A)`.
pub fn classical_entropy(v: &PotentialMatrix, region: &Region, temperature: f64) -> Result<f64> {
    check_same_lattice(v, region)?;
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "classical entropy needs a temperature > 0, got {temperature}"
        )));
    }
    let volume = region.volume() as f64;
    let half_log_det = if region.is_full() {
        -0.5 * v
            .decomposition()
            .eigenvalues()
            .iter()
            .map(|&l| l.ln())
            .sum::<f64>()
    } else {
        let idx = region.indices();
        let inv = submatrix(v.inverse(), &idx, &idx);
        let chol = nalgebra::linalg::Cholesky::new(inv).ok_or(Error::ReductionFactorization)?;
        chol.l_dirty().diagonal().iter().map(|&d| d.ln()).sum::<f64>()
    };
    Ok(half_log_det + volume * ((2.0 * std::f64::consts::PI * temperature).ln() + 1.0))
}
