//! JADE: current-to-pbest/1 mutation with an archive of replaced parents and
//! adaptive location parameters μ_F (weightless Lehmer mean) and μ_CR
//! (arithmetic mean), both blended at rate `c`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    crossover_binomial, lehmer_mean, mutate_current_to_pbest, pbest_count, sample_cr, sample_f,
    select, sorted_indices, init_evaluated, EngineConfig, Objective, ParamMemory, Tracker,
};

pub(super) fn run<O: Objective + ?Sized>(
    obj: &O,
    cfg: &EngineConfig,
    tracker: &mut Tracker<'_, O>,
    rng: &mut ChaCha8Rng,
) {
    let np = cfg.np_init;
    let archive_cap = ((cfg.params.archive_rate * np as f64).round() as usize).max(1);
    let (mut pop, mut vals) = init_evaluated(obj, tracker, np, rng);
    let mut mem = ParamMemory::new(1);

    'outer: while !tracker.exhausted() {
        let prev = pop.clone();
        let prev_vals = vals.clone();
        let order = sorted_indices(&prev_vals);
        let n_pbest = pbest_count(np, cfg.params.p_best_frac);
        let mut s_f = Vec::new();
        let mut s_cr = Vec::new();

        for i in 0..np {
            if tracker.exhausted() {
                break 'outer;
            }
            let f_i = sample_f(mem.mu_f, rng);
            let cr_i = sample_cr(mem.mu_cr, rng);
            let pbest = order[rng.random_range(0..n_pbest)];

            let r1 = loop {
                let r = rng.random_range(0..np);
                if r != i {
                    break r;
                }
            };
            let pool = np + mem.archive.len();
            let r2 = loop {
                let r = rng.random_range(0..pool);
                if r != i && r != r1 {
                    break r;
                }
            };
            let x_r2: &[f64] = if r2 < np {
                &prev[r2]
            } else {
                &mem.archive[r2 - np]
            };

            let donor = mutate_current_to_pbest(&prev[i], &prev[pbest], &prev[r1], x_r2, f_i);
            let mut trial = crossover_binomial(&prev[i], &donor, cr_i, rng);
            obj.repair(&mut trial);
            let tv = tracker.evaluate(&trial);
            if select(prev_vals[i], tv) {
                mem.push_archive(prev[i].clone(), archive_cap, rng);
                pop[i] = trial;
                vals[i] = tv;
                s_f.push(f_i);
                s_cr.push(cr_i);
            }
        }

        if !s_f.is_empty() {
            let units = vec![1.0; s_f.len()];
            let c = cfg.params.c;
            mem.mu_f = (1.0 - c) * mem.mu_f
                + c * lehmer_mean(&s_f, &units).expect("nonempty success set");
            mem.mu_cr =
                (1.0 - c) * mem.mu_cr + c * s_cr.iter().sum::<f64>() / s_cr.len() as f64;
            debug_assert!(mem.mu_f > 0.0 && mem.mu_f <= 1.0);
            debug_assert!((0.0..=1.0).contains(&mem.mu_cr));
        }
    }
}
