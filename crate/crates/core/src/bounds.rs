//! Analytic bounds on the entanglement measures, and the critical temperature
//! above which the two-sided bound forces the logarithmic negativity to zero.
//!
//! Everything here is a closed-form functional of a few scalars — the
//! spectral interval `[a, b]` of the potential, its bandwidth, the coupling
//! strength, and the surface area of the cut — so the bounds are cheap to
//! evaluate next to the exact diagonalization route and serve both as sanity
//! rails for it and as predictions of how the measures scale with region
//! geometry. All results are in bits.

use nalgebra::DMatrix;

use crate::entanglement::check_same_lattice;
use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::potential::{Bandwidth, ModelKind, PotentialMatrix};
use crate::spectral::{decay_constants, half_power, thermal_half_power, HalfPower};

const LN_2: f64 = std::f64::consts::LN_2;

/// Every analytic bound that applies to one `(potential, region, temperature)`
/// triple. Optional fields are populated only where the underlying inequality
/// is defined: the finite-temperature upper bound needs `T > 0`, the
/// surface-law coefficient a banded potential, the nearest-neighbor lower
/// coefficient a nearest-neighbor model, and the zeta coefficient a
/// long-range model whose couplings decay fast enough.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// General lower bound on the entropy of entanglement. May be negative
    /// (and then vacuous) for strongly coupled models; reported regardless.
    pub lower_general: f64,
    /// Zero-temperature upper bound on the entropy of entanglement.
    pub upper_zero_t: f64,
    /// Upper bound on the logarithmic negativity of the thermal state.
    pub upper_finite_t: Option<f64>,
    /// Surface-law coefficient: the bound per unit surface for banded models.
    pub area_coefficient: Option<f64>,
    /// Lower-bound coefficient per unit surface for nearest-neighbor models.
    pub nn_lower_coefficient: Option<f64>,
    /// Surface-law coefficient for long-range models, via the zeta function.
    pub zeta_coefficient: Option<f64>,
    /// Surface area of the region the bounds were evaluated for.
    pub surface: usize,
}

/// Sum of `|m_ij|` over pairs with `i` inside the region and `j` outside.
fn cross_abs_sum(m: &DMatrix<f64>, region: &Region) -> f64 {
    let inside = region.indices();
    let outside = region.exterior_indices();
    let mut acc = 0.0;
    for &i in &inside {
        for &j in &outside {
            acc += m[(i, j)].abs();
        }
    }
    acc
}

/// `log2(sqrt(kappa)) / (sqrt(kappa) - 1)`, the spectral coefficient shared
/// by the lower bounds. Near `kappa = 1` the quotient is 0/0, so it switches
/// to the series `(1 - t/2 + t^2/3 - t^3/4) / ln 2` in `t = sqrt(kappa) - 1`,
/// which is accurate to machine precision for `|kappa - 1| < 1e-6`.
fn log_sqrt_coefficient(kappa: f64) -> f64 {
    if (kappa - 1.0).abs() < 1e-6 {
        let t = kappa.sqrt() - 1.0;
        return (1.0 - t / 2.0 + t * t / 3.0 - t * t * t / 4.0) / LN_2;
    }
    let root = kappa.sqrt();
    root.log2() / (root - 1.0)
}

/// Zero-temperature upper bound on the entropy of entanglement across
/// `region`:
///
/// `E <= (4 sqrt(b) / ln 2) * sum |[V^{-1/2}]_{ij}|`
///
/// summed over pairs with one index inside and one outside, where `b` is the
/// largest eigenvalue of the potential.
pub fn upper_bound_zero_t(v: &PotentialMatrix, region: &Region) -> Result<f64> {
    check_same_lattice(v, region)?;
    let b = v.spectral_bounds().lambda_max;
    let sum = cross_abs_sum(half_power(v, HalfPower::Minus), region);
    Ok(4.0 * b.sqrt() * sum / LN_2)
}

/// Upper bound on the logarithmic negativity of the thermal state at
/// `temperature > 0`:
///
/// `E^N <= (4 sqrt(b) / (lambda_min(W) ln 2)) * sum |w^-_{ij}|`
///
/// over the same cross pairs, with `w^- = W^{-1} V^{-1/2}` the thermally
/// damped inverse half power and `lambda_min(W) = coth(sqrt(b)/(2T))`. As
/// `T -> 0` this reproduces [`upper_bound_zero_t`].
pub fn upper_bound_finite_t(
    v: &PotentialMatrix,
    region: &Region,
    temperature: f64,
) -> Result<f64> {
    check_same_lattice(v, region)?;
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "temperature {temperature} must be positive; the zero-temperature \
             bound covers T = 0"
        )));
    }
    let b = v.spectral_bounds().lambda_max;
    let damped = thermal_half_power(v, temperature, HalfPower::Minus)?;
    let w_min = 1.0 / (b.sqrt() / (2.0 * temperature)).tanh();
    Ok(4.0 * b.sqrt() * cross_abs_sum(&damped, region) / (w_min * LN_2))
}

/// General lower bound on the entropy of entanglement across `region`:
///
/// `E >= -(log2 sqrt(kappa) / (2 (sqrt(kappa) - 1))) * sum G_ij H_ji`
///
/// with `G = V^{-1/2}`, `H = V^{1/2}`, `kappa` the condition number, and the
/// sum again over cross pairs. For nearest-neighbor couplings every product
/// term is negative, so the bound is positive; for general potentials it can
/// be vacuous but is still reported.
pub fn lower_bound_general(v: &PotentialMatrix, region: &Region) -> Result<f64> {
    check_same_lattice(v, region)?;
    let coefficient = log_sqrt_coefficient(v.spectral_bounds().condition_number());
    let g = half_power(v, HalfPower::Minus);
    let h = half_power(v, HalfPower::Plus);
    let mut acc = 0.0;
    for &i in &region.indices() {
        for &j in &region.exterior_indices() {
            acc += g[(i, j)] * h[(j, i)];
        }
    }
    Ok(-(coefficient / 2.0) * acc)
}

/// `2^{2D} * sum_{l >= 1} q^l l^{2D-1}`, the geometric shell kernel that
/// converts the per-distance decay ratio `q` into a per-unit-surface count.
/// Summed until the remaining tail is below `1e-12` in absolute value; fails
/// if `q` is so close to 1 that this takes more than 10^6 terms.
fn region_kernel(q: f64, dim: usize) -> Result<f64> {
    const CAP: usize = 1_000_000;
    const TAIL: f64 = 1e-12;
    let power = (2 * dim - 1) as i32;
    let scale = 4f64.powi(dim as i32);
    let mut q_pow = 1.0;
    let mut acc = 0.0;
    for l in 1..=CAP {
        q_pow *= q;
        let term = q_pow * (l as f64).powi(power);
        acc += term;
        // Terms beyond l grow by at most q (1 + 1/l)^{2D-1} per step, so the
        // tail is bounded by a geometric series with that ratio.
        let growth = q * (1.0 + 1.0 / l as f64).powi(power);
        if growth < 1.0 && scale * term * growth / (1.0 - growth) < TAIL {
            return Ok(scale * acc);
        }
    }
    Err(Error::SeriesNotConverged { q, cap: CAP })
}

/// Surface-law upper bound for a `k`-banded potential with spectrum in
/// `[a, b]`: the bound is `4 sqrt(b) K_{a,b}(T) K_kernel / (lambda_min(W) ln 2)`
/// per unit surface, times `surface`. A flat spectrum (`a = b`) has no
/// off-diagonal decay to pay for and yields 0.
pub fn area_upper_bound(
    a: f64,
    b: f64,
    k: usize,
    dim: usize,
    surface: usize,
    temperature: f64,
) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let constants = decay_constants(a, b, k, temperature)?;
    if constants.ratio == 0.0 {
        return Ok(0.0);
    }
    let kernel = region_kernel(constants.ratio, dim)?;
    let w_min = if temperature == 0.0 {
        1.0
    } else {
        1.0 / (b.sqrt() / (2.0 * temperature)).tanh()
    };
    Ok(4.0 * b.sqrt() * constants.prefactor * kernel * surface as f64 / (w_min * LN_2))
}

/// Lower-bound coefficient for nearest-neighbor models, times `surface`:
///
/// `E >= (log2 sqrt(kappa) * c^2 / (8 (sqrt(kappa) - 1))) * s(I)`
///
/// with `kappa = (1 + 2cD)/(1 - 2cD)`. Derived in the large-lattice limit, so
/// finite lattices satisfy it only up to boundary corrections. The uncoupled
/// limit `c = 0` is accepted and yields 0.
pub fn nn_lower_bound(c: f64, dim: usize, surface: usize) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let cap = 1.0 / (2.0 * dim as f64);
    if !c.is_finite() || c < 0.0 || c >= cap {
        return Err(Error::InvalidParameter(format!(
            "nearest-neighbor coupling c = {c} must lie in [0, {cap})"
        )));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let kappa = (1.0 + 2.0 * c * dim as f64) / (1.0 - 2.0 * c * dim as f64);
    Ok(log_sqrt_coefficient(kappa) * c * c / 8.0 * surface as f64)
}

/// Left side of the implicit criticality equation, as a function of `T`.
/// Both summands fall monotonically to zero with temperature, so the
/// equation `left_side(T) = 1` has exactly one crossing.
struct CriticalityEquation {
    /// `sqrt(b)`, setting the scale of the thermal visibility factor.
    b_root: f64,
    /// Energy scale of the decay prefactor's own thermal factor.
    eta: f64,
    /// `4 sqrt(b) K_{a,b}(0) K_kernel s(I)` — the full zero-temperature
    /// amplitude of the surface term.
    amplitude: f64,
}

impl CriticalityEquation {
    fn left_side(&self, temperature: f64) -> f64 {
        let visibility = (self.b_root / (2.0 * temperature)).tanh();
        let thermal = (self.eta / (2.0 * temperature)).tanh();
        visibility * visibility + self.amplitude * thermal * visibility
    }
}

/// Temperature above which the surface-law bound forces the logarithmic
/// negativity across any cut of surface area `surface` to vanish, for a
/// `k`-banded potential with spectrum in `[a, b]`, `a < b`. Solves
/// `left_side(T) = 1` by bisection to relative width `1e-10` and returns the
/// upper end, so the left side is below 1 for every `T` above the result.
pub fn critical_temperature(
    a: f64,
    b: f64,
    k: usize,
    dim: usize,
    surface: usize,
) -> Result<f64> {
    if surface == 0 {
        return Err(Error::InvalidParameter(
            "criticality needs a cut with at least one contact pair".into(),
        ));
    }
    let constants = decay_constants(a, b, k, 0.0)?;
    if constants.ratio == 0.0 {
        return Err(Error::InvalidParameter(
            "a flat spectrum carries no entanglement at any temperature".into(),
        ));
    }
    let kernel = region_kernel(constants.ratio, dim.max(1))?;
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let equation = CriticalityEquation {
        b_root: b.sqrt(),
        eta: constants.eta,
        amplitude: 4.0 * b.sqrt() * constants.prefactor * kernel * surface as f64,
    };
    const T_MAX: f64 = 1e9;
    let mut hi = 1.0;
    while equation.left_side(hi) >= 1.0 {
        hi *= 2.0;
        if hi > T_MAX {
            return Err(Error::NoCrossing { t_max: T_MAX });
        }
    }
    let mut lo = 1e-6;
    if equation.left_side(lo) < 1.0 {
        return Ok(lo);
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if equation.left_side(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `zeta(s) = sum_{n >= 1} n^{-s}` for `s > 1`, by direct summation plus a
/// midpoint-integral tail, to absolute error below `1e-12`.
///
/// After summing `n` terms the remainder is `(n + 1/2)^{1-s} / (s - 1)` up to
/// a midpoint-rule error below `s/24 * (n - 1/2)^{-(s+1)}`; the cutoff is
/// chosen up front so that error target is met (at most ~2*10^5 terms, for
/// `s` near 1). Terms are added smallest-first to keep rounding below the
/// truncation error.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::ZetaDiverges { s });
    }
    const TARGET: f64 = 1e-12;
    let cutoff = ((s / 24.0 / TARGET).powf(1.0 / (s + 1.0)) + 0.5).ceil().max(2.0) as usize;
    let mut acc = 0.0;
    for n in (1..=cutoff).rev() {
        acc += (n as f64).powf(-s);
    }
    Ok(acc + (cutoff as f64 + 0.5).powf(1.0 - s) / (s - 1.0))
}

/// Surface-law upper bound for long-range couplings falling off as
/// `1/d^alpha`: `E <= (2^{2D+2} / ln 2) zeta(alpha - 2D + 1) s(I)`, finite
/// exactly when `alpha > 2D`.
pub fn long_range_area_bound(alpha: f64, dim: usize, surface: usize) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let s = alpha - 2.0 * dim as f64 + 1.0;
    let zeta = riemann_zeta(s)?;
    Ok(4f64.powi(dim as i32) * 4.0 / LN_2 * zeta * surface as f64)
}

/// Envelope for one off-diagonal entry of a half power of a
/// nearest-neighbor potential: `lower <= |entry| <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided envelope for the entry of `V^{1/2}` (`HalfPower::Plus`) or
/// `V^{-1/2}` (`HalfPower::Minus`) at lattice `offset` from the diagonal, for
/// the nearest-neighbor model with coupling `c` in dimension `dim`.
///
/// With `d` the 1-norm of the offset and `a_d^- = prod_{l=1..d} (2l-1)/(2l)`,
/// `a_d^+ = a_d^-/(2d-1)`:
///
/// - `lower = (c/2)^d d! / ((2d-1) prod |offset_delta|!)` (both signs),
/// - `upper = a_d^{sign} (2cD)^d / (1 - 2cD)`.
///
/// The envelope is for entries at wrapped per-axis offsets of at most half
/// the lattice side; callers reduce offsets to that window first. The
/// diagonal (`offset = 0`) is not covered.
pub fn nn_entry_bounds(
    c: f64,
    dim: usize,
    offset: &[i64],
    which: HalfPower,
) -> Result<EntryBounds> {
    if dim == 0 || offset.len() != dim {
        return Err(Error::InvalidParameter(format!(
            "offset has {} axes but the lattice has {dim}",
            offset.len()
        )));
    }
    let cap = 1.0 / (2.0 * dim as f64);
    if !c.is_finite() || c <= 0.0 || c >= cap {
        return Err(Error::InvalidParameter(format!(
            "nearest-neighbor coupling c = {c} must lie in (0, {cap})"
        )));
    }
    let d: u64 = offset.iter().map(|o| o.unsigned_abs()).sum();
    if d == 0 {
        return Err(Error::InvalidParameter(
            "diagonal entries are not covered by the entry envelope".into(),
        ));
    }
    let mut a_minus = 1.0;
    for l in 1..=d {
        a_minus *= (2 * l - 1) as f64 / (2 * l) as f64;
    }
    let a = match which {
        HalfPower::Minus => a_minus,
        HalfPower::Plus => a_minus / (2 * d - 1) as f64,
    };
    // d! / prod |offset_delta|! as a product of binomial coefficients, each
    // accumulated multiplicatively to stay well inside f64 range.
    let mut multinomial = 1.0;
    let mut chosen = 0u64;
    for &o in offset {
        for i in 1..=o.unsigned_abs() {
            chosen += 1;
            multinomial *= chosen as f64 / i as f64;
        }
    }
    let reach = 2.0 * c * dim as f64;
    Ok(EntryBounds {
        lower: (c / 2.0).powi(d as i32) * multinomial / (2 * d - 1) as f64,
        upper: a * reach.powi(d as i32) / (1.0 - reach),
    })
}

/// Every applicable bound for one `(potential, region, temperature)` triple.
/// See [`BoundReport`] for which fields are populated when.
pub fn bound_report(
    v: &PotentialMatrix,
    region: &Region,
    temperature: f64,
) -> Result<BoundReport> {
    check_same_lattice(v, region)?;
    if !temperature.is_finite() || temperature < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "temperature {temperature} must be finite and nonnegative"
        )));
    }
    let dim = v.lattice().dim();
    let spectrum = v.spectral_bounds();
    let surface = region.surface();
    let upper_finite_t = if temperature > 0.0 {
        Some(upper_bound_finite_t(v, region, temperature)?)
    } else {
        None
    };
    let area_coefficient = match v.bandwidth() {
        Bandwidth::Banded(k) => Some(area_upper_bound(
            spectrum.lambda_min,
            spectrum.lambda_max,
            k,
            dim,
            1,
            temperature,
        )?),
        Bandwidth::Unbounded => None,
    };
    let nn_lower_coefficient = match v.model() {
        ModelKind::NearestNeighbor { c } => Some(nn_lower_bound(*c, dim, 1)?),
        _ => None,
    };
    let zeta_coefficient = match v.model() {
        ModelKind::LongRange { alpha } if *alpha > 2.0 * dim as f64 => {
            Some(long_range_area_bound(*alpha, dim, 1)?)
        }
        _ => None,
    };
    Ok(BoundReport {
        lower_general: lower_bound_general(v, region)?,
        upper_zero_t: upper_bound_zero_t(v, region)?,
        upper_finite_t,
        area_coefficient,
        nn_lower_coefficient,
        zeta_coefficient,
        surface,
    })
}
