//! Coupling (potential) matrix models for oscillators on cubic lattices.
//!
//! Every model yields a [`PotentialMatrix`]: a real symmetric positive
//! definite matrix over the lattice sites in canonical order, carrying its
//! declared band structure, the model tag it was built from, and its spectral
//! decomposition. Construction validates all three properties — symmetry to
//! 1e-12, positive definiteness (smallest eigenvalue above 1e-10) and the
//! band pattern — so code downstream can rely on them unconditionally.
//!
//! Periodic couplings are accumulated per offset: when two offsets reach the
//! same site (side 2, or an offset of exactly half the side) their
//! contributions add, which keeps the analytic circulant eigenvalue formulas
//! exact for every side length.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec, Site};
use crate::spectral::SpectralDecomposition;

/// Declared sparsity of a coupling matrix: entries vanish beyond lattice
/// distance `k/2`, or nowhere at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bandwidth {
    Banded(usize),
    Unbounded,
}

/// Which model produced a [`PotentialMatrix`].
#[derive(Debug, Clone)]
pub enum ModelKind {
    NearestNeighbor { c: f64 },
    FiniteRanged { k: usize },
    Disordered { k: usize, lo: f64, hi: f64, seed: u64 },
    LongRange { alpha: f64 },
    /// The square of a banded interaction matrix, kept so closed-form paths
    /// can reach the underlying matrix.
    Squared { inner: Box<PotentialMatrix> },
}

/// Extremal eigenvalues of a potential matrix.
#[derive(Debug, Clone, Copy)]
pub struct SpectralBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectralBounds {
    /// Condition number `lambda_max / lambda_min`.
    pub fn condition_number(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

/// A validated real symmetric positive definite coupling matrix.
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    lattice: LatticeSpec,
    matrix: DMatrix<f64>,
    bandwidth: Bandwidth,
    model: ModelKind,
    decomposition: SpectralDecomposition,
    half_powers: OnceLock<HalfPowers>,
    inverse: OnceLock<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct HalfPowers {
    pub(crate) plus: DMatrix<f64>,
    pub(crate) minus: DMatrix<f64>,
}

impl PotentialMatrix {
    /// Uniform nearest-neighbour coupling `-c` on a periodic lattice, unit
    /// on-site terms. Positivity restricts `c` to `[0, 1/(2D))`; `c = 0`
    /// gives the identity.
    pub fn nearest_neighbor(lattice: LatticeSpec, c: f64) -> Result<Self> {
        if lattice.boundary() != Boundary::Periodic {
            return Err(Error::InvalidParameter(
                "nearest-neighbour model requires a periodic lattice".into(),
            ));
        }
        let limit = 1.0 / (2.0 * lattice.dim() as f64);
        if !c.is_finite() || c < 0.0 || c >= limit {
            return Err(Error::InvalidParameter(format!(
                "nearest-neighbour coupling c = {c} outside [0, {limit})"
            )));
        }
        let mut coupling = BTreeMap::new();
        for axis in 0..lattice.dim() {
            let mut plus = vec![0i64; lattice.dim()];
            plus[axis] = 1;
            let mut minus = vec![0i64; lattice.dim()];
            minus[axis] = -1;
            coupling.insert(plus, -c);
            coupling.insert(minus, -c);
        }
        let matrix = accumulate_offsets(lattice, &coupling)?;
        Self::validated(lattice, matrix, Bandwidth::Banded(2), ModelKind::NearestNeighbor { c })
    }

    /// Translation-invariant couplings given per offset, all within lattice
    /// distance `k/2`. The map must be inversion-symmetric: every offset
    /// needs its negation with the same value. An empty map gives the
    /// identity.
    pub fn finite_ranged(
        lattice: LatticeSpec,
        k: usize,
        coupling: &BTreeMap<Vec<i64>, f64>,
    ) -> Result<Self> {
        check_band_parameter(k)?;
        for (offset, &value) in coupling {
            if offset.len() != lattice.dim() {
                return Err(Error::InvalidParameter(format!(
                    "offset {offset:?} has {} components, lattice has dimension {}",
                    offset.len(),
                    lattice.dim()
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coupling for offset {offset:?} is not finite"
                )));
            }
            let norm: u64 = offset.iter().map(|o| o.unsigned_abs()).sum();
            if norm > (k / 2) as u64 {
                return Err(Error::InvalidParameter(format!(
                    "offset {offset:?} has 1-norm {norm}, beyond the band half-width {}",
                    k / 2
                )));
            }
            let negated: Vec<i64> = offset.iter().map(|o| -o).collect();
            if coupling.get(&negated) != Some(&value) {
                return Err(Error::InvalidParameter(format!(
                    "coupling map is not inversion-symmetric at offset {offset:?}"
                )));
            }
        }
        let matrix = accumulate_offsets(lattice, coupling)?;
        Self::validated(lattice, matrix, Bandwidth::Banded(k), ModelKind::FiniteRanged { k })
    }

    /// Independent uniform couplings on `[lo, hi)` for every site pair within
    /// lattice distance `k/2`, drawn from a ChaCha8 stream seeded with
    /// `seed`. Pairs are visited row-major in canonical site order (`i < j`),
    /// one draw per pair, so a given seed reproduces the matrix bit for bit.
    ///
    /// The diagonal defaults to `1 + sum_j |V_ij|` per row, which keeps the
    /// matrix strictly diagonally dominant and hence positive definite for
    /// any carrier; `diagonal` overrides it when supplied.
    pub fn disordered(
        lattice: LatticeSpec,
        k: usize,
        carrier: (f64, f64),
        seed: u64,
        diagonal: Option<&[f64]>,
    ) -> Result<Self> {
        check_band_parameter(k)?;
        let (lo, hi) = carrier;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "carrier [{lo}, {hi}] must be finite with lo <= hi"
            )));
        }
        let count = lattice.site_count()?;
        if let Some(d) = diagonal {
            if d.len() != count {
                return Err(Error::InvalidParameter(format!(
                    "diagonal override has {} entries, lattice has {count} sites",
                    d.len()
                )));
            }
        }
        let sites = lattice.sites();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrix = DMatrix::zeros(count, count);
        for i in 0..count {
            for j in (i + 1)..count {
                if lattice.distance(&sites[i], &sites[j])? <= k / 2 {
                    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                    let value = lo + (hi - lo) * unit;
                    matrix[(i, j)] = value;
                    matrix[(j, i)] = value;
                }
            }
        }
        for i in 0..count {
            matrix[(i, i)] = match diagonal {
                Some(d) => d[i],
                None => 1.0 + matrix.row(i).iter().map(|v| v.abs()).sum::<f64>(),
            };
        }
        Self::validated(
            lattice,
            matrix,
            Bandwidth::Banded(k),
            ModelKind::Disordered { k, lo, hi, seed },
        )
    }

    /// Algebraically decaying model: the inverse square of the matrix `M`
    /// with `M_ij = 1/d(i,j)^alpha` off the diagonal and
    /// `M_ii = 1 + sum_j M_ij`. Gershgorin puts every eigenvalue of `M` at or
    /// above 1, so the result has spectrum in `(0, 1]`.
    pub fn long_range(lattice: LatticeSpec, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "long-range exponent alpha = {alpha} must be positive"
            )));
        }
        let m = long_range_base(lattice, alpha)?;
        let base = SpectralDecomposition::compute(&m);
        let matrix = base.apply(|l| 1.0 / (l * l));
        Self::validated(lattice, matrix, Bandwidth::Unbounded, ModelKind::LongRange { alpha })
    }

    /// The square `M * M` of a banded interaction matrix, with the doubled
    /// bandwidth that entails. Keeps `M` in the model tag.
    pub fn squared(inner: &PotentialMatrix) -> Result<Self> {
        let k = match inner.bandwidth {
            Bandwidth::Banded(k) => k,
            Bandwidth::Unbounded => {
                return Err(Error::InvalidParameter(
                    "squared model requires a banded interaction matrix".into(),
                ))
            }
        };
        let product = &inner.matrix * &inner.matrix;
        let matrix = symmetrize(product);
        Self::validated(
            inner.lattice,
            matrix,
            Bandwidth::Banded(2 * k),
            ModelKind::Squared { inner: Box::new(inner.clone()) },
        )
    }

    fn validated(
        lattice: LatticeSpec,
        matrix: DMatrix<f64>,
        bandwidth: Bandwidth,
        model: ModelKind,
    ) -> Result<Self> {
        let count = lattice.site_count()?;
        assert_eq!(matrix.nrows(), count);
        assert_eq!(matrix.ncols(), count);
        let mut residual = 0.0f64;
        for i in 0..count {
            for j in 0..count {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "matrix entry ({i}, {j}) is not finite"
                    )));
                }
                residual = residual.max((v - matrix[(j, i)]).abs());
            }
        }
        if residual > 1e-12 {
            return Err(Error::NotSymmetric { residual });
        }
        if let Bandwidth::Banded(k) = bandwidth {
            let sites = lattice.sites();
            for i in 0..count {
                for j in 0..count {
                    let d = lattice.distance(&sites[i], &sites[j])?;
                    if d > k / 2 && matrix[(i, j)] != 0.0 {
                        return Err(Error::BandViolation {
                            distance: d,
                            half_width: k / 2,
                            value: matrix[(i, j)],
                        });
                    }
                }
            }
        }
        let decomposition = SpectralDecomposition::compute(&matrix);
        let lambda_min = decomposition.lambda_min();
        if lambda_min <= 1e-10 {
            return Err(Error::NotPositiveDefinite { lambda_min });
        }
        Ok(PotentialMatrix {
            lattice,
            matrix,
            bandwidth,
            model,
            decomposition,
            half_powers: OnceLock::new(),
            inverse: OnceLock::new(),
        })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    pub fn model(&self) -> &ModelKind {
        &self.model
    }

    /// The cached spectral decomposition computed at construction.
    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    /// Extremal eigenvalues.
    pub fn spectral_bounds(&self) -> SpectralBounds {
        SpectralBounds {
            lambda_min: self.decomposition.lambda_min(),
            lambda_max: self.decomposition.lambda_max(),
        }
    }

    pub(crate) fn cached_half_powers(&self) -> &HalfPowers {
        self.half_powers.get_or_init(|| HalfPowers {
            plus: self.decomposition.apply(f64::sqrt),
            minus: self.decomposition.apply(|l| 1.0 / l.sqrt()),
        })
    }

    /// The inverse matrix, computed spectrally and cached.
    pub fn inverse(&self) -> &DMatrix<f64> {
        self.inverse
            .get_or_init(|| self.decomposition.apply(|l| 1.0 / l))
    }
}

fn check_band_parameter(k: usize) -> Result<()> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth k = {k} must be a positive even integer"
        )));
    }
    Ok(())
}

/// Builds `identity + sum over offsets` of shifted couplings. On periodic
/// lattices offsets wrap; contributions landing on the same entry add. On
/// open lattices shifts leaving the cube are dropped.
fn accumulate_offsets(
    lattice: LatticeSpec,
    coupling: &BTreeMap<Vec<i64>, f64>,
) -> Result<DMatrix<f64>> {
    let count = lattice.site_count()?;
    let side = lattice.side() as i64;
    let mut matrix = DMatrix::identity(count, count);
    let sites = lattice.sites();
    for (i, site) in sites.iter().enumerate() {
        'offsets: for (offset, &value) in coupling {
            let mut coords = Vec::with_capacity(lattice.dim());
            for (&c, &o) in site.coords().iter().zip(offset) {
                let raw = c as i64 + o;
                let wrapped = match lattice.boundary() {
                    Boundary::Periodic => (raw - 1).rem_euclid(side) + 1,
                    Boundary::Open => {
                        if raw < 1 || raw > side {
                            continue 'offsets;
                        }
                        raw
                    }
                };
                coords.push(wrapped as usize);
            }
            let j = lattice.index_of(&Site::new(coords))?;
            matrix[(i, j)] += value;
        }
    }
    Ok(matrix)
}

fn long_range_base(lattice: LatticeSpec, alpha: f64) -> Result<DMatrix<f64>> {
    let count = lattice.site_count()?;
    let sites = lattice.sites();
    let mut matrix = DMatrix::zeros(count, count);
    for i in 0..count {
        let mut row_sum = 0.0;
        for j in 0..count {
            if i == j {
                continue;
            }
            let d = lattice.distance(&sites[i], &sites[j])? as f64;
            let value = d.powf(-alpha);
            matrix[(i, j)] = value;
            row_sum += value;
        }
        matrix[(i, i)] = 1.0 + row_sum;
    }
    Ok(matrix)
}

fn symmetrize(mut matrix: DMatrix<f64>) -> DMatrix<f64> {
    for i in 0..matrix.nrows() {
        for j in (i + 1)..matrix.ncols() {
            let mean = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
            matrix[(i, j)] = mean;
            matrix[(j, i)] = mean;
        }
    }
    matrix
}

/// Parses a model description.
///
/// Grammar:
/// - `nn:c=<real>` — nearest-neighbour coupling;
/// - `fr:k=<even int>,off=<o1,..,oD>=<real>;...` — finite-ranged couplings
///   per offset;
/// - `dis:k=<even int>,lo=<real>,hi=<real>[,seed=<u64>]` — disordered band;
///   a missing seed falls back to `default_seed`;
/// - `lr:alpha=<real>` — long-ranged model;
/// - `sq:<inner>` — square of a banded inner model.
pub fn parse_model(
    text: &str,
    lattice: LatticeSpec,
    default_seed: Option<u64>,
) -> Result<PotentialMatrix> {
    if let Some(rest) = text.strip_prefix("nn:") {
        let c = parse_single_key(rest, "c")?;
        PotentialMatrix::nearest_neighbor(lattice, c)
    } else if let Some(rest) = text.strip_prefix("fr:") {
        parse_finite_ranged(rest, lattice)
    } else if let Some(rest) = text.strip_prefix("dis:") {
        parse_disordered(rest, lattice, default_seed)
    } else if let Some(rest) = text.strip_prefix("lr:") {
        let alpha = parse_single_key(rest, "alpha")?;
        PotentialMatrix::long_range(lattice, alpha)
    } else if let Some(rest) = text.strip_prefix("sq:") {
        let inner = parse_model(rest, lattice, default_seed)?;
        PotentialMatrix::squared(&inner)
    } else {
        Err(Error::Parse(format!(
            "model `{text}` must start with nn:, fr:, dis:, lr: or sq:"
        )))
    }
}

/// Canonical form of a model description: trimmed, with a `dis:` seed made
/// explicit (falling back to `default_seed`). Parsing the result builds the
/// same matrix as parsing the input.
pub fn canonical_model_text(text: &str, default_seed: Option<u64>) -> Result<String> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("sq:") {
        return Ok(format!("sq:{}", canonical_model_text(rest, default_seed)?));
    }
    if let Some(rest) = text.strip_prefix("dis:") {
        if !rest.split(',').any(|p| p.trim_start().starts_with("seed=")) {
            let seed = default_seed.ok_or_else(|| {
                Error::Parse("disordered model needs a seed (seed= key or --seed)".into())
            })?;
            return Ok(format!("dis:{rest},seed={seed}"));
        }
    }
    Ok(text.to_string())
}

fn parse_single_key(text: &str, key: &str) -> Result<f64> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected `{key}=<value>`, got `{text}`")))?;
    if k != key {
        return Err(Error::Parse(format!("expected key `{key}`, got `{k}`")));
    }
    parse_real(v)
}

fn parse_real(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{text}` is not a real number")))
}

fn parse_finite_ranged(text: &str, lattice: LatticeSpec) -> Result<PotentialMatrix> {
    let (k_part, off_part) = text
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected `k=<int>,off=...`, got `{text}`")))?;
    let k = parse_band_key(k_part)?;
    let rest = off_part
        .strip_prefix("off=")
        .ok_or_else(|| Error::Parse(format!("expected `off=...`, got `{off_part}`")))?;
    let mut coupling = BTreeMap::new();
    for entry in rest.split(';') {
        let (offset_text, value_text) = entry
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("offset entry `{entry}` needs `<offset>=<value>`")))?;
        let offset: Vec<i64> = offset_text
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("`{p}` is not an integer offset component")))
            })
            .collect::<Result<_>>()?;
        let value = parse_real(value_text)?;
        if coupling.insert(offset.clone(), value).is_some() {
            return Err(Error::Parse(format!("offset {offset_text} appears twice")));
        }
    }
    PotentialMatrix::finite_ranged(lattice, k, &coupling)
}

fn parse_disordered(
    text: &str,
    lattice: LatticeSpec,
    default_seed: Option<u64>,
) -> Result<PotentialMatrix> {
    let mut k = None;
    let mut lo = None;
    let mut hi = None;
    let mut seed = None;
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected `key=value`, got `{part}`")))?;
        match key.trim() {
            "k" => k = Some(parse_band_value(value)?),
            "lo" => lo = Some(parse_real(value)?),
            "hi" => hi = Some(parse_real(value)?),
            "seed" => {
                seed = Some(value.trim().parse::<u64>().map_err(|_| {
                    Error::Parse(format!("`{value}` is not an unsigned 64-bit seed"))
                })?)
            }
            other => return Err(Error::Parse(format!("unknown disordered key `{other}`"))),
        }
    }
    let k = k.ok_or_else(|| Error::Parse("disordered model needs k=".into()))?;
    let lo = lo.ok_or_else(|| Error::Parse("disordered model needs lo=".into()))?;
    let hi = hi.ok_or_else(|| Error::Parse("disordered model needs hi=".into()))?;
    let seed = seed.or(default_seed).ok_or_else(|| {
        Error::Parse("disordered model needs a seed (seed= key or --seed)".into())
    })?;
    PotentialMatrix::disordered(lattice, k, (lo, hi), seed, None)
}

fn parse_band_key(text: &str) -> Result<usize> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected `k=<int>`, got `{text}`")))?;
    if key.trim() != "k" {
        return Err(Error::Parse(format!("expected key `k`, got `{key}`")));
    }
    parse_band_value(value)
}

fn parse_band_value(text: &str) -> Result<usize> {
    text.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("`{text}` is not a bandwidth")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Region;

    fn periodic(dim: usize, side: usize) -> LatticeSpec {
        LatticeSpec::new(dim, side, Boundary::Periodic).unwrap()
    }

    #[test]
    fn nearest_neighbor_chain_matches_circulant_eigenvalues() {
        let v = PotentialMatrix::nearest_neighbor(periodic(1, 4), 0.2).unwrap();
        let m = v.matrix();
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(0, 1)], -0.2);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m[(0, 3)], -0.2);
        let mut expected: Vec<f64> = (1..=4)
            .map(|k| 1.0 - 0.4 * (2.0 * std::f64::consts::PI * k as f64 / 4.0).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in v.decomposition().eigenvalues().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let sb = v.spectral_bounds();
        assert!((sb.lambda_min - 0.6).abs() < 1e-12);
        assert!((sb.lambda_max - 1.4).abs() < 1e-12);
    }

    #[test]
    fn nearest_neighbor_couplings_add_on_side_two() {
        let v = PotentialMatrix::nearest_neighbor(periodic(1, 2), 0.1).unwrap();
        assert_eq!(v.matrix()[(0, 1)], -0.2);
        let sb = v.spectral_bounds();
        assert!((sb.lambda_min - 0.8).abs() < 1e-12);
        assert!((sb.lambda_max - 1.2).abs() < 1e-12);
    }

    #[test]
    fn nearest_neighbor_rejects_bad_parameters() {
        assert!(PotentialMatrix::nearest_neighbor(periodic(1, 8), 0.5).is_err());
        assert!(PotentialMatrix::nearest_neighbor(periodic(2, 4), 0.25).is_err());
        assert!(PotentialMatrix::nearest_neighbor(periodic(1, 8), -0.1).is_err());
        let open = LatticeSpec::new(1, 8, Boundary::Open).unwrap();
        assert!(PotentialMatrix::nearest_neighbor(open, 0.2).is_err());
    }

    #[test]
    fn zero_coupling_gives_the_identity() {
        let v = PotentialMatrix::nearest_neighbor(periodic(2, 3), 0.0).unwrap();
        assert_eq!(v.matrix(), &DMatrix::identity(9, 9));
    }

    #[test]
    fn finite_ranged_with_unit_offsets_equals_nearest_neighbor() {
        let lat = periodic(2, 4);
        let mut coupling = BTreeMap::new();
        for offset in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            coupling.insert(offset.to_vec(), -0.1);
        }
        let fr = PotentialMatrix::finite_ranged(lat, 2, &coupling).unwrap();
        let nn = PotentialMatrix::nearest_neighbor(lat, 0.1).unwrap();
        assert_eq!(fr.matrix(), nn.matrix());
    }

    #[test]
    fn finite_ranged_empty_map_is_identity() {
        let v = PotentialMatrix::finite_ranged(periodic(1, 5), 4, &BTreeMap::new()).unwrap();
        assert_eq!(v.matrix(), &DMatrix::identity(5, 5));
    }

    #[test]
    fn finite_ranged_eigenvalues_follow_the_circulant_formula() {
        let lat = periodic(1, 6);
        let mut coupling = BTreeMap::new();
        coupling.insert(vec![1], -0.2);
        coupling.insert(vec![-1], -0.2);
        coupling.insert(vec![2], -0.05);
        coupling.insert(vec![-2], -0.05);
        let v = PotentialMatrix::finite_ranged(lat, 4, &coupling).unwrap();
        let mut expected: Vec<f64> = (1..=6)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 6.0;
                1.0 - 0.4 * theta.cos() - 0.1 * (2.0 * theta).cos()
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in v.decomposition().eigenvalues().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_ranged_rejects_asymmetric_and_out_of_band_maps() {
        let lat = periodic(1, 6);
        let mut asymmetric = BTreeMap::new();
        asymmetric.insert(vec![1], -0.2);
        assert!(PotentialMatrix::finite_ranged(lat, 2, &asymmetric).is_err());
        let mut far = BTreeMap::new();
        far.insert(vec![2], -0.1);
        far.insert(vec![-2], -0.1);
        assert!(PotentialMatrix::finite_ranged(lat, 2, &far).is_err());
        assert!(PotentialMatrix::finite_ranged(lat, 3, &BTreeMap::new()).is_err());
    }

    #[test]
    fn finite_ranged_detects_indefinite_matrices() {
        let lat = periodic(1, 8);
        let mut coupling = BTreeMap::new();
        coupling.insert(vec![1], -0.6);
        coupling.insert(vec![-1], -0.6);
        let err = PotentialMatrix::finite_ranged(lat, 2, &coupling).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn disordered_matrices_are_reproducible_and_within_the_carrier() {
        let lat = periodic(1, 50);
        let a = PotentialMatrix::disordered(lat, 2, (-0.3, -0.1), 42, None).unwrap();
        let b = PotentialMatrix::disordered(lat, 2, (-0.3, -0.1), 42, None).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = PotentialMatrix::disordered(lat, 2, (-0.3, -0.1), 43, None).unwrap();
        assert_ne!(a.matrix(), c.matrix());
        for i in 0..50 {
            for j in 0..50 {
                if i == j {
                    continue;
                }
                let v = a.matrix()[(i, j)];
                if v != 0.0 {
                    assert!((-0.3..=-0.1).contains(&v), "coupling {v} escaped the carrier");
                }
            }
        }
        assert!(a.spectral_bounds().lambda_min > 1.0 - 1e-12, "diagonal dominance margin");
    }

    #[test]
    fn disordered_diagonal_override_is_applied_verbatim() {
        let lat = periodic(1, 2);
        let v =
            PotentialMatrix::disordered(lat, 2, (0.0, 0.0), 7, Some(&[2.0, 3.0])).unwrap();
        assert_eq!(v.matrix(), &DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        let bad = PotentialMatrix::disordered(lat, 2, (0.0, 0.0), 7, Some(&[1.0, -1.0]));
        assert!(matches!(bad.unwrap_err(), Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn long_range_two_sites_has_known_spectrum() {
        let lat = LatticeSpec::new(1, 2, Boundary::Open).unwrap();
        let v = PotentialMatrix::long_range(lat, 1.0).unwrap();
        let eigs = v.decomposition().eigenvalues();
        assert!((eigs[0] - 1.0 / 9.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
        assert!(v.spectral_bounds().lambda_max <= 1.0 + 1e-12);
    }

    #[test]
    fn long_range_spectrum_stays_at_or_below_one() {
        for boundary in [Boundary::Periodic, Boundary::Open] {
            let lat = LatticeSpec::new(2, 4, boundary).unwrap();
            let v = PotentialMatrix::long_range(lat, 3.0).unwrap();
            assert!(v.spectral_bounds().lambda_max <= 1.0 + 1e-10);
            assert!(v.spectral_bounds().lambda_min > 0.0);
        }
    }

    #[test]
    fn squared_model_squares_the_eigenvalues() {
        let m = PotentialMatrix::nearest_neighbor(periodic(1, 10), 0.3).unwrap();
        let v = PotentialMatrix::squared(&m).unwrap();
        assert_eq!(v.bandwidth(), Bandwidth::Banded(4));
        let mut expected: Vec<f64> =
            m.decomposition().eigenvalues().iter().map(|l| l * l).collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in v.decomposition().eigenvalues().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-10);
        }
        assert!((v.matrix()[(0, 0)] - 1.18).abs() < 1e-12, "diagonal 1 + 2c^2");
    }

    #[test]
    fn squared_model_of_diagonal_interaction() {
        let lat = periodic(1, 2);
        let m = PotentialMatrix::disordered(lat, 2, (0.0, 0.0), 1, Some(&[2.0, 3.0])).unwrap();
        let v = PotentialMatrix::squared(&m).unwrap();
        assert_eq!(v.matrix(), &DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]));
        let lr = PotentialMatrix::long_range(lat, 2.0).unwrap();
        assert!(PotentialMatrix::squared(&lr).is_err());
    }

    #[test]
    fn banded_matrices_vanish_beyond_their_half_width() {
        let lat = periodic(1, 12);
        let v = PotentialMatrix::disordered(lat, 4, (-0.2, -0.1), 5, None).unwrap();
        let sites = lat.sites();
        for i in 0..12 {
            for j in 0..12 {
                if lat.distance(&sites[i], &sites[j]).unwrap() > 2 {
                    assert_eq!(v.matrix()[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn parse_model_round_trips_each_grammar_arm() {
        let lat = periodic(1, 6);
        let nn = parse_model("nn:c=0.2", lat, None).unwrap();
        assert!(matches!(nn.model(), ModelKind::NearestNeighbor { c } if *c == 0.2));
        let fr = parse_model("fr:k=4,off=1=-0.2;-1=-0.2;2=-0.05;-2=-0.05", lat, None).unwrap();
        assert!(matches!(fr.model(), ModelKind::FiniteRanged { k: 4 }));
        let dis = parse_model("dis:k=2,lo=-0.3,hi=-0.1,seed=42", lat, None).unwrap();
        assert!(matches!(dis.model(), ModelKind::Disordered { seed: 42, .. }));
        let dis_default = parse_model("dis:k=2,lo=-0.3,hi=-0.1", lat, Some(9)).unwrap();
        assert!(matches!(dis_default.model(), ModelKind::Disordered { seed: 9, .. }));
        let lr = parse_model("lr:alpha=3", lat, None).unwrap();
        assert!(matches!(lr.model(), ModelKind::LongRange { alpha } if *alpha == 3.0));
        let sq = parse_model("sq:nn:c=0.3", lat, None).unwrap();
        assert!(matches!(sq.model(), ModelKind::Squared { .. }));
    }

    #[test]
    fn parse_model_rejects_malformed_text() {
        let lat = periodic(1, 6);
        for bad in [
            "nn:c=haha",
            "nn:k=0.2",
            "xy:c=0.2",
            "fr:k=3,off=1=-0.1;-1=-0.1",
            "fr:off=1=-0.1",
            "dis:k=2,lo=-0.3",
            "dis:k=2,lo=-0.3,hi=-0.1,spin=4",
            "dis:k=2,lo=-0.3,hi=-0.1",
            "sq:lr:alpha=2",
            "lr:alpha=-1",
        ] {
            assert!(parse_model(bad, lat, None).is_err(), "`{bad}` should fail");
        }
    }

    #[test]
    fn canonical_model_text_pins_the_seed() {
        assert_eq!(
            canonical_model_text("dis:k=2,lo=-0.3,hi=-0.1", Some(7)).unwrap(),
            "dis:k=2,lo=-0.3,hi=-0.1,seed=7"
        );
        assert_eq!(
            canonical_model_text("dis:k=2,lo=-0.3,hi=-0.1,seed=3", Some(7)).unwrap(),
            "dis:k=2,lo=-0.3,hi=-0.1,seed=3"
        );
        assert_eq!(
            canonical_model_text("sq:dis:k=2,lo=-0.1,hi=0.0", Some(1)).unwrap(),
            "sq:dis:k=2,lo=-0.1,hi=0.0,seed=1"
        );
        assert_eq!(canonical_model_text("nn:c=0.2", None).unwrap(), "nn:c=0.2");
        assert!(canonical_model_text("dis:k=2,lo=0.0,hi=0.1", None).is_err());
    }

    #[test]
    fn regions_and_potentials_share_site_order() {
        let lat = periodic(2, 3);
        let v = PotentialMatrix::nearest_neighbor(lat, 0.1).unwrap();
        let region = Region::parse("sites:1,2", lat).unwrap();
        let idx = region.indices()[0];
        assert_eq!(idx, 1);
        assert_eq!(v.matrix()[(idx, lat.index_of(&Site::new(vec![1, 1])).unwrap())], -0.1);
    }
}
