//! Classic DE with fixed F and CR and one of the four textbook mutation
//! strategies.

use rand_chacha::ChaCha8Rng;

use super::{
    crossover_binomial, distinct_indices, init_evaluated, mutate, select, sorted_indices,
    EngineConfig, MutationStrategy, Objective, Tracker,
};

pub(super) fn run<O: Objective + ?Sized>(
    obj: &O,
    cfg: &EngineConfig,
    strategy: MutationStrategy,
    tracker: &mut Tracker<'_, O>,
    rng: &mut ChaCha8Rng,
) {
    let np = cfg.np_init;
    let (mut pop, mut vals) = init_evaluated(obj, tracker, np, rng);

    'outer: while !tracker.exhausted() {
        let prev = pop.clone();
        let prev_vals = vals.clone();
        let best = sorted_indices(&prev_vals)[0];
        for i in 0..np {
            if tracker.exhausted() {
                break 'outer;
            }
            let indices = distinct_indices(np, strategy.arity(), &[i], rng);
            let donor =
                mutate(strategy, &prev, best, &indices, cfg.f).expect("arity checked by validate");
            let mut trial = crossover_binomial(&prev[i], &donor, cfg.cr, rng);
            obj.repair(&mut trial);
            let tv = tracker.evaluate(&trial);
            if select(prev_vals[i], tv) {
                pop[i] = trial;
                vals[i] = tv;
            }
        }
    }
}
