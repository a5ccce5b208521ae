//! Cross-module invariants: facts that tie the lattice geometry, the matrix
//! models, the spectral machinery, and the measures together.

use std::collections::BTreeSet;

use harmonica_core::entanglement::squared_reduced_spectrum;
use harmonica_core::spectral::thermal_half_power;
use harmonica_core::{
    classical_mutual_information, decay_constants, entanglement_entropy, reduced_symplectic_spectrum,
    shell_count_bound, Bandwidth, Boundary, HalfPower, LatticeSpec, PotentialMatrix, Region, Site,
};
use proptest::prelude::*;

/// Every entry of the thermally damped inverse half power must sit inside
/// the analytic exponential envelope `K(T) q^{distance}`, whatever the model.
fn assert_entries_inside_envelope(v: &PotentialMatrix, temperature: f64) {
    let k = match v.bandwidth() {
        Bandwidth::Banded(k) => k,
        Bandwidth::Unbounded => panic!("envelope applies to banded models only"),
    };
    let spectrum = v.spectral_bounds();
    let constants =
        decay_constants(spectrum.lambda_min, spectrum.lambda_max, k, temperature).unwrap();
    let damped = thermal_half_power(v, temperature, HalfPower::Minus).unwrap();
    let sites = v.lattice().sites();
    for (i, a) in sites.iter().enumerate() {
        for (j, b) in sites.iter().enumerate() {
            let d = v.lattice().distance(a, b).unwrap();
            let envelope = if d == 0 {
                constants.prefactor
            } else {
                constants.prefactor * constants.ratio.powi(d as i32)
            };
            assert!(
                damped[(i, j)].abs() <= envelope + 1e-12,
                "entry ({i}, {j}) at distance {d} is {} > envelope {envelope} (T = {temperature})",
                damped[(i, j)].abs()
            );
        }
    }
}

#[test]
fn thermal_entries_decay_inside_the_analytic_envelope() {
    let chain = LatticeSpec::new(1, 50, Boundary::Periodic).unwrap();
    let nn = PotentialMatrix::nearest_neighbor(chain, 0.2).unwrap();

    let short = LatticeSpec::new(1, 30, Boundary::Periodic).unwrap();
    let mut coupling = std::collections::BTreeMap::new();
    coupling.insert(vec![1], -0.15);
    coupling.insert(vec![-1], -0.15);
    coupling.insert(vec![2], 0.05);
    coupling.insert(vec![-2], 0.05);
    let ranged = PotentialMatrix::finite_ranged(short, 4, &coupling).unwrap();

    let noisy = PotentialMatrix::disordered(short, 2, (-0.15, 0.15), 7, None).unwrap();

    let plane = LatticeSpec::new(2, 6, Boundary::Periodic).unwrap();
    let sheet = PotentialMatrix::nearest_neighbor(plane, 0.1).unwrap();

    for v in [&nn, &ranged, &noisy, &sheet] {
        for temperature in [0.0, 0.7] {
            assert_entries_inside_envelope(v, temperature);
        }
    }
}

#[test]
fn squared_route_matches_the_generic_route() {
    let chain = LatticeSpec::new(1, 24, Boundary::Periodic).unwrap();
    let mut coupling = std::collections::BTreeMap::new();
    coupling.insert(vec![1], -0.2);
    coupling.insert(vec![-1], -0.2);
    coupling.insert(vec![2], 0.08);
    coupling.insert(vec![-2], 0.08);
    let inners = [
        PotentialMatrix::nearest_neighbor(chain, 0.2).unwrap(),
        PotentialMatrix::finite_ranged(chain, 4, &coupling).unwrap(),
        PotentialMatrix::disordered(chain, 2, (-0.1, 0.1), 3, None).unwrap(),
    ];
    for inner in &inners {
        let squared = PotentialMatrix::squared(inner).unwrap();
        let region = Region::cube(chain, &[5], &[11]).unwrap();
        let generic = reduced_symplectic_spectrum(&squared, &region).unwrap();
        let fast = squared_reduced_spectrum(inner, &region).unwrap();
        assert_eq!(generic.len(), fast.len());
        for (a, b) in generic.values().iter().zip(fast.values()) {
            assert!((a - b).abs() < 1e-8, "symplectic mismatch: {a} vs {b}");
        }
        let gap =
            entanglement_entropy(&generic) - entanglement_entropy(&fast);
        assert!(gap.abs() < 1e-8);
    }
}

#[test]
fn classical_information_is_the_squared_route_spectrum_in_disguise() {
    // The classical mutual information of V equals sum log2 mu over the
    // squared-route spectrum of V taken as the interaction matrix: both
    // reduce to the eigenvalues of V|_I (V^{-1})|_I.
    let chain = LatticeSpec::new(1, 20, Boundary::Periodic).unwrap();
    let mut instances = vec![
        PotentialMatrix::nearest_neighbor(chain, 0.05).unwrap(),
        PotentialMatrix::nearest_neighbor(chain, 0.15).unwrap(),
        PotentialMatrix::nearest_neighbor(chain, 0.24).unwrap(),
    ];
    for seed in 0..5 {
        instances.push(PotentialMatrix::disordered(chain, 2, (-0.2, 0.2), seed, None).unwrap());
    }
    let plane = LatticeSpec::new(2, 4, Boundary::Periodic).unwrap();
    let sheet = PotentialMatrix::nearest_neighbor(plane, 0.12).unwrap();
    let sheet_region = Region::cube(plane, &[1, 1], &[2, 3]).unwrap();
    let classical = classical_mutual_information(&sheet, &sheet_region).unwrap();
    let relabeled: f64 = squared_reduced_spectrum(&sheet, &sheet_region)
        .unwrap()
        .values()
        .iter()
        .map(|mu| mu.log2())
        .sum();
    assert!((classical - relabeled).abs() < 1e-8);

    for (offset, v) in instances.iter().enumerate() {
        let lo = 1 + offset % 3;
        let region = Region::cube(chain, &[lo], &[lo + 5 + offset % 4]).unwrap();
        let classical = classical_mutual_information(v, &region).unwrap();
        let relabeled: f64 = squared_reduced_spectrum(v, &region)
            .unwrap()
            .values()
            .iter()
            .map(|mu| mu.log2())
            .sum();
        assert!(
            (classical - relabeled).abs() < 1e-8,
            "instance {offset}: {classical} vs {relabeled}"
        );
    }
}

fn arbitrary_lattice() -> impl Strategy<Value = LatticeSpec> {
    (1usize..=3, 2usize..=5, any::<bool>()).prop_map(|(dim, side, wrap)| {
        let boundary = if wrap { Boundary::Periodic } else { Boundary::Open };
        LatticeSpec::new(dim, side, boundary).unwrap()
    })
}

fn lattice_with_sites() -> impl Strategy<Value = (LatticeSpec, Vec<usize>)> {
    arbitrary_lattice().prop_flat_map(|lattice| {
        let total = lattice.site_count().unwrap();
        (
            Just(lattice),
            proptest::collection::btree_set(0..total, 1..=total.min(8)),
        )
            .prop_map(|(lattice, picks)| (lattice, picks.into_iter().collect()))
    })
}

fn region_from_indices(lattice: LatticeSpec, picks: &[usize]) -> Region {
    let sites: Vec<Site> = picks.iter().map(|&i| lattice.site_at(i).unwrap()).collect();
    Region::new(lattice, sites).unwrap()
}

proptest! {
    #[test]
    fn distance_is_a_metric((lattice, picks) in lattice_with_sites()) {
        let sites = lattice.sites();
        for &i in &picks {
            prop_assert_eq!(lattice.distance(&sites[i], &sites[i]).unwrap(), 0);
            for &j in &picks {
                let forward = lattice.distance(&sites[i], &sites[j]).unwrap();
                let backward = lattice.distance(&sites[j], &sites[i]).unwrap();
                prop_assert_eq!(forward, backward);
                if i != j {
                    prop_assert!(forward >= 1);
                }
                for &k in &picks {
                    let via = lattice.distance(&sites[i], &sites[k]).unwrap()
                        + lattice.distance(&sites[k], &sites[j]).unwrap();
                    prop_assert!(forward <= via);
                }
            }
        }
    }

    #[test]
    fn region_text_round_trips((lattice, picks) in lattice_with_sites()) {
        let region = region_from_indices(lattice, &picks);
        let parsed = Region::parse(&region.to_spec_string(), lattice).unwrap();
        prop_assert_eq!(parsed.sites(), region.sites());
    }

    #[test]
    fn complement_splits_the_lattice_cleanly((lattice, picks) in lattice_with_sites()) {
        let region = region_from_indices(lattice, &picks);
        prop_assume!(!region.is_full());
        let complement = region.complement().unwrap();
        prop_assert_eq!(
            region.volume() + complement.volume(),
            lattice.site_count().unwrap()
        );
        prop_assert_eq!(region.surface(), complement.surface());
        let mut union: BTreeSet<usize> = region.indices().into_iter().collect();
        union.extend(complement.indices());
        prop_assert_eq!(union.len(), lattice.site_count().unwrap());
    }

    #[test]
    fn shell_counts_respect_the_combinatorial_ceiling((lattice, picks) in lattice_with_sites()) {
        let region = region_from_indices(lattice, &picks);
        prop_assume!(!region.is_full());
        for l in 1..=3usize {
            let count = region.shell_count(l).unwrap() as u64;
            let ceiling = shell_count_bound(l, lattice.dim(), region.surface()).unwrap();
            prop_assert!(count <= ceiling, "shell {l}: {count} > {ceiling}");
        }
    }
}
