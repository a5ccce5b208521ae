//! Shared fixtures for the criterion benches: representative models and
//! regions, sized so a full bench run finishes in seconds.

use harmonica_core::{Boundary, LatticeSpec, PotentialMatrix, Region};

/// Uniform nearest-neighbour chain on a periodic lattice of `side` sites.
pub fn chain(side: usize, c: f64) -> PotentialMatrix {
    let lattice = LatticeSpec::new(1, side, Boundary::Periodic).expect("chain lattice builds");
    PotentialMatrix::nearest_neighbor(lattice, c).expect("chain model builds")
}

/// Uniform nearest-neighbour sheet on a periodic `side x side` lattice.
pub fn sheet(side: usize, c: f64) -> PotentialMatrix {
    let lattice = LatticeSpec::new(2, side, Boundary::Periodic).expect("sheet lattice builds");
    PotentialMatrix::nearest_neighbor(lattice, c).expect("sheet model builds")
}

/// Cubic block `[1..m]^D` on the lattice of `v`.
pub fn block(v: &PotentialMatrix, m: usize) -> Region {
    let lattice = *v.lattice();
    let lo = vec![1; lattice.dim()];
    let hi = vec![m; lattice.dim()];
    Region::cube(lattice, &lo, &hi).expect("block fits the lattice")
}
