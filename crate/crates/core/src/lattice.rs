//! Cubic lattice geometry: sites, regions, distances and surface counts.
//!
//! The lattice is the D-dimensional cube `[1..n]^D` with 1-based integer
//! coordinates. Distance is the 1-norm taken per axis; on periodic lattices
//! each axis difference wraps, i.e. `min(|a - b|, n - |a - b|)`, so that the
//! metric counts hops on the torus and the surface of a region counts
//! physical contact pairs. On open lattices the plain 1-norm applies.
//!
//! A [`Region`] is a nonempty, duplicate-free set of sites held in canonical
//! (lexicographic) order, bound to the lattice it lives on. Canonical order
//! coincides with ascending flat index, with the first coordinate most
//! significant; matrices elsewhere in the crate index sites in exactly this
//! order.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Boundary condition of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "periodic"),
            Boundary::Open => write!(f, "open"),
        }
    }
}

/// Shape of a cubic lattice: dimension, side length and boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    dim: usize,
    side: usize,
    boundary: Boundary,
}

/// A single lattice site, with 1-based coordinates in `[1..n]^D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    coords: Vec<usize>,
}

impl Site {
    pub fn new(coords: Vec<usize>) -> Self {
        Site { coords }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.coords {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

impl LatticeSpec {
    pub fn new(dim: usize, side: usize, boundary: Boundary) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("lattice dimension must be >= 1".into()));
        }
        if side < 2 {
            return Err(Error::InvalidParameter("lattice side must be >= 2".into()));
        }
        let spec = LatticeSpec { dim, side, boundary };
        spec.site_count()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Total number of sites, `n^D`.
    pub fn site_count(&self) -> Result<usize> {
        self.side
            .checked_pow(self.dim as u32)
            .ok_or_else(|| Error::Overflow(format!("site count {}^{}", self.side, self.dim)))
    }

    fn check_site(&self, site: &Site) -> Result<()> {
        if site.coords.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "site {site} has {} coordinates, lattice has dimension {}",
                site.coords.len(),
                self.dim
            )));
        }
        for &c in &site.coords {
            if c < 1 || c > self.side {
                return Err(Error::InvalidParameter(format!(
                    "site {site}: coordinate {c} outside [1..{}]",
                    self.side
                )));
            }
        }
        Ok(())
    }

    /// 1-norm distance between two sites, wrapping per axis on periodic
    /// lattices.
    pub fn distance(&self, a: &Site, b: &Site) -> Result<usize> {
        self.check_site(a)?;
        self.check_site(b)?;
        let mut d = 0usize;
        for (&x, &y) in a.coords.iter().zip(&b.coords) {
            let diff = x.abs_diff(y);
            d += match self.boundary {
                Boundary::Open => diff,
                Boundary::Periodic => diff.min(self.side - diff),
            };
        }
        Ok(d)
    }

    /// Flat index of a site in canonical order (first coordinate most
    /// significant). This is the row/column index used by every matrix in the
    /// crate.
    pub fn index_of(&self, site: &Site) -> Result<usize> {
        self.check_site(site)?;
        let mut idx = 0usize;
        for &c in &site.coords {
            idx = idx * self.side + (c - 1);
        }
        Ok(idx)
    }

    /// Site with the given flat index.
    pub fn site_at(&self, mut index: usize) -> Result<Site> {
        if index >= self.site_count()? {
            return Err(Error::InvalidParameter(format!(
                "site index {index} outside lattice with {} sites",
                self.site_count()?
            )));
        }
        let mut coords = vec![0usize; self.dim];
        for c in coords.iter_mut().rev() {
            *c = index % self.side + 1;
            index /= self.side;
        }
        Ok(Site::new(coords))
    }

    /// All sites in canonical order.
    pub fn sites(&self) -> Vec<Site> {
        let count = self.site_count().expect("site count validated at construction");
        (0..count)
            .map(|i| self.site_at(i).expect("index in range"))
            .collect()
    }

    /// Distinct sites at distance 1 from `site`. On periodic lattices with
    /// side 2 the two directions along an axis meet the same neighbour, which
    /// is reported once.
    pub fn neighbors(&self, site: &Site) -> Result<Vec<Site>> {
        self.check_site(site)?;
        let mut out: Vec<Site> = Vec::with_capacity(2 * self.dim);
        for axis in 0..self.dim {
            for step in [-1isize, 1] {
                let c = site.coords[axis] as isize + step;
                let wrapped = match self.boundary {
                    Boundary::Periodic => {
                        if c < 1 {
                            self.side
                        } else if c > self.side as isize {
                            1
                        } else {
                            c as usize
                        }
                    }
                    Boundary::Open => {
                        if c < 1 || c > self.side as isize {
                            continue;
                        }
                        c as usize
                    }
                };
                let mut coords = site.coords.clone();
                coords[axis] = wrapped;
                let neighbor = Site::new(coords);
                if !out.contains(&neighbor) {
                    out.push(neighbor);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[1..{}]^{} ({})", self.side, self.dim, self.boundary)
    }
}

/// A nonempty set of lattice sites in canonical order, bound to its lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    lattice: LatticeSpec,
    sites: Vec<Site>,
}

impl Region {
    /// Builds a region from a list of sites. The list must be nonempty, free
    /// of duplicates and contained in the lattice; it is sorted into
    /// canonical order.
    pub fn new(lattice: LatticeSpec, mut sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidParameter("region must be nonempty".into()));
        }
        for s in &sites {
            lattice.check_site(s)?;
        }
        sites.sort();
        for pair in sites.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidParameter(format!(
                    "region contains site {} more than once",
                    pair[0]
                )));
            }
        }
        Ok(Region { lattice, sites })
    }

    /// The whole lattice as a region.
    pub fn full(lattice: LatticeSpec) -> Self {
        Region {
            sites: lattice.sites(),
            lattice,
        }
    }

    /// Axis-aligned box with inclusive corners `lo` and `hi`.
    pub fn cube(lattice: LatticeSpec, lo: &[usize], hi: &[usize]) -> Result<Self> {
        if lo.len() != lattice.dim || hi.len() != lattice.dim {
            return Err(Error::InvalidParameter(format!(
                "box corners must have {} coordinates",
                lattice.dim
            )));
        }
        for axis in 0..lattice.dim {
            if lo[axis] > hi[axis] {
                return Err(Error::InvalidParameter(format!(
                    "box corner order violated on axis {}: {} > {}",
                    axis + 1,
                    lo[axis],
                    hi[axis]
                )));
            }
        }
        let mut sites = Vec::new();
        let mut cursor = lo.to_vec();
        'fill: loop {
            sites.push(Site::new(cursor.clone()));
            let mut axis = lattice.dim;
            while axis > 0 {
                axis -= 1;
                if cursor[axis] < hi[axis] {
                    cursor[axis] += 1;
                    cursor[axis + 1..].copy_from_slice(&lo[axis + 1..]);
                    continue 'fill;
                }
            }
            break;
        }
        Region::new(lattice, sites)
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// Number of sites in the region.
    pub fn volume(&self) -> usize {
        self.sites.len()
    }

    /// True if the region covers the whole lattice.
    pub fn is_full(&self) -> bool {
        self.volume() == self.lattice.site_count().expect("validated")
    }

    /// Flat canonical indices of the region's sites, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.sites
            .iter()
            .map(|s| self.lattice.index_of(s).expect("validated at construction"))
            .collect()
    }

    /// Flat canonical indices of the exterior, ascending.
    pub fn exterior_indices(&self) -> Vec<usize> {
        let inside: HashSet<usize> = self.indices().into_iter().collect();
        (0..self.lattice.site_count().expect("validated"))
            .filter(|i| !inside.contains(i))
            .collect()
    }

    /// The complementary region. Errors if the region is the whole lattice.
    pub fn complement(&self) -> Result<Region> {
        if self.is_full() {
            return Err(Error::InvalidParameter(
                "the full lattice has an empty complement".into(),
            ));
        }
        let sites = self
            .exterior_indices()
            .into_iter()
            .map(|i| self.lattice.site_at(i).expect("index in range"))
            .collect();
        Region::new(self.lattice, sites)
    }

    /// Number of contact pairs `(i outside, j inside)` at distance 1: the
    /// surface area of the region.
    pub fn surface(&self) -> usize {
        let inside: HashSet<&Site> = self.sites.iter().collect();
        let mut count = 0usize;
        for site in &self.sites {
            for neighbor in self.lattice.neighbors(site).expect("validated") {
                if !inside.contains(&neighbor) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Number of pairs `(j inside, i outside)` at distance exactly `l`.
    /// `shell_count(1)` equals [`Region::surface`].
    pub fn shell_count(&self, l: usize) -> Result<usize> {
        if l < 1 {
            return Err(Error::InvalidParameter("shell distance must be >= 1".into()));
        }
        let outside: Vec<Site> = self
            .exterior_indices()
            .into_iter()
            .map(|i| self.lattice.site_at(i).expect("index in range"))
            .collect();
        let mut count = 0usize;
        for inside in &self.sites {
            for out in &outside {
                if self.lattice.distance(inside, out)? == l {
                    count += 1;
                }
            }
        }
        Ok(count)
    }

    /// Canonical text form, parseable by [`Region::parse`].
    pub fn to_spec_string(&self) -> String {
        let parts: Vec<String> = self.sites.iter().map(|s| s.to_string()).collect();
        format!("sites:{}", parts.join(";"))
    }

    /// Parses a region description.
    ///
    /// Grammar: `+`-joined terms, each either `box:<lo1>,..,<loD>:<hi1>,..,<hiD>`
    /// (inclusive corners) or `sites:<c1>,..,<cD>;<c1>,..,<cD>;...`.
    /// Overlapping terms are rejected rather than silently merged.
    pub fn parse(text: &str, lattice: LatticeSpec) -> Result<Region> {
        let mut sites = Vec::new();
        for term in text.split('+') {
            if let Some(rest) = term.strip_prefix("box:") {
                let corners: Vec<&str> = rest.split(':').collect();
                if corners.len() != 2 {
                    return Err(Error::Parse(format!(
                        "box term `{term}` must have exactly two `:`-separated corners"
                    )));
                }
                let lo = parse_coords(corners[0], lattice.dim)?;
                let hi = parse_coords(corners[1], lattice.dim)?;
                let boxed = Region::cube(lattice, &lo, &hi)?;
                sites.extend(boxed.sites);
            } else if let Some(rest) = term.strip_prefix("sites:") {
                for part in rest.split(';') {
                    sites.push(Site::new(parse_coords(part, lattice.dim)?));
                }
            } else {
                return Err(Error::Parse(format!(
                    "region term `{term}` must start with `box:` or `sites:`"
                )));
            }
        }
        Region::new(lattice, sites)
    }
}

fn parse_coords(text: &str, dim: usize) -> Result<Vec<usize>> {
    let coords: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("`{p}` is not a coordinate")))
        })
        .collect::<Result<_>>()?;
    if coords.len() != dim {
        return Err(Error::Parse(format!(
            "`{text}` has {} coordinates, expected {dim}",
            coords.len()
        )));
    }
    Ok(coords)
}

/// Geometric ceiling on shell populations: for any region of surface area
/// `s`, the number of inside/outside pairs at distance `l` is at most
/// `2 * (2l)^(2D-1) * s`. Errors on integer overflow instead of wrapping.
pub fn shell_count_bound(l: usize, dim: usize, surface: usize) -> Result<u64> {
    if l < 1 {
        return Err(Error::InvalidParameter("shell distance must be >= 1".into()));
    }
    if dim < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let base = (2 * l) as u64;
    let exponent = (2 * dim - 1) as u32;
    let power = base
        .checked_pow(exponent)
        .ok_or_else(|| Error::Overflow(format!("(2l)^(2D-1) with l={l}, D={dim}")))?;
    power
        .checked_mul(2)
        .and_then(|p| p.checked_mul(surface as u64))
        .ok_or_else(|| Error::Overflow(format!("shell bound with l={l}, D={dim}, s={surface}")))
}
