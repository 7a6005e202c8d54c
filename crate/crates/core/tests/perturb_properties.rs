use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmd_core::graph::random_graph;
use tmd_core::perturb::sample_edit;
use tmd_core::tree::{TmdConfig, WeightSchedule};
use tmd_core::Mode;

#[test]
fn single_edit_bounds_hold_for_both_schedules() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..300 {
        let depth = rng.gen_range(1..=3);
        let weights = if trial % 2 == 0 {
            WeightSchedule::constant(rng.gen_range(0.2..2.0)).unwrap()
        } else {
            WeightSchedule::pascal(depth, rng.gen_range(0.5..2.0)).unwrap()
        };
        let cfg = TmdConfig::new(depth, weights, Mode::Sum).unwrap();
        let g = random_graph(rng.gen_range(1..=9), rng.gen_range(0.1..0.7), 2, rng.gen()).unwrap();
        let edit = sample_edit(&g, &mut rng, 1.0).unwrap();
        let r = edit.bound(&g, &cfg).unwrap_or_else(|e| panic!("trial {trial}: {e} for {edit:?}"));
        assert!(r.exact_tmd <= r.bound + 1e-9 * r.bound.max(1.0));
    }
}
