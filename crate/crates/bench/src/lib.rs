//! Fixtures shared by the benchmarks.

use steerkit::feasibility::{pentad_child, pentad_parent};
use steerkit::steering::sample_seed;
use steerkit::{build_system, sample_extremal_povm, ExtremalPovm, LinearSystem};

pub const SEED: u64 = 42;

/// `n` seeded random extremal POVMs with `outcomes` outcomes.
pub fn povms(outcomes: usize, n: usize) -> Vec<ExtremalPovm> {
    (0..n)
        .map(|i| sample_extremal_povm(outcomes, sample_seed(SEED, i)).expect("sampler"))
        .collect()
}

/// The five-effect parent against its three-outcome child at visibility `r`.
pub fn separation_system(r: f64) -> LinearSystem {
    build_system(&pentad_parent().effects, &pentad_child(r).effects).expect("complete POVMs")
}

/// A random four-outcome parent against a noisy three-outcome child.
pub fn random_system(i: usize) -> LinearSystem {
    let parent = sample_extremal_povm(4, sample_seed(SEED, i)).unwrap().to_povm();
    let child = sample_extremal_povm(3, sample_seed(SEED + 1, i)).unwrap().noisy(0.3);
    build_system(&parent.effects, &child.effects).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert_eq!(povms(4, 3).len(), 3);
        let sys = separation_system(0.33);
        assert_eq!((sys.rows(), sys.cols()), (17, 15));
        assert!(random_system(0).cols() > 0);
    }
}
