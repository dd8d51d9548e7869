//! SHADE and LSHADE: success-history parameter adaptation over `H` memory
//! slots, current-to-pbest/1 mutation with an archive, and (for LSHADE)
//! linear population-size reduction plus a terminal CR marker.
//!
//! Memory updates weight each surviving parameter by its fitness improvement
//! and write weighted means into slot `k`, cycling through the history:
//! a weighted Lehmer mean for F, and for CR a weighted arithmetic mean
//! (SHADE) or weighted Lehmer mean with the terminal marker (LSHADE).

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    crossover_binomial, init_evaluated, lehmer_mean, lshade_population_size,
    mutate_current_to_pbest, pbest_count, sample_cr, sample_f, select, sorted_indices,
    EngineConfig, Objective, ParamMemory, Tracker,
};

pub(super) fn run<O: Objective + ?Sized>(
    obj: &O,
    cfg: &EngineConfig,
    lshade: bool,
    tracker: &mut Tracker<'_, O>,
    rng: &mut ChaCha8Rng,
) {
    let mut np = cfg.np_init;
    let history = if cfg.params.history_size == 0 {
        np
    } else {
        cfg.params.history_size
    };
    let archive_cap = |np: usize| ((cfg.params.archive_rate * np as f64).round() as usize).max(1);

    let (mut pop, mut vals) = init_evaluated(obj, tracker, np, rng);
    let mut mem = ParamMemory::new(history);

    'outer: while !tracker.exhausted() {
        let prev = pop.clone();
        let prev_vals = vals.clone();
        let order = sorted_indices(&prev_vals);
        let n_pbest = pbest_count(np, cfg.params.p_best_frac);
        // Successful (F, CR, Δf) triples with strict improvement.
        let mut successes: Vec<(f64, f64, f64)> = Vec::new();

        for i in 0..np {
            if tracker.exhausted() {
                break 'outer;
            }
            let slot = rng.random_range(0..history);
            let f_i = sample_f(mem.m_f[slot], rng);
            let cr_i = match mem.m_cr[slot] {
                Some(mu) => sample_cr(mu, rng),
                None => 0.0,
            };
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
                if tv < prev_vals[i] {
                    mem.push_archive(prev[i].clone(), archive_cap(np), rng);
                    successes.push((f_i, cr_i, prev_vals[i] - tv));
                }
                pop[i] = trial;
                vals[i] = tv;
            }
        }

        if !successes.is_empty() {
            let total: f64 = successes.iter().map(|(_, _, d)| d).sum();
            debug_assert!(total > 0.0);
            let weights: Vec<f64> = successes.iter().map(|(_, _, d)| d / total).collect();
            let f_values: Vec<f64> = successes.iter().map(|(f, _, _)| *f).collect();
            let cr_values: Vec<f64> = successes.iter().map(|(_, cr, _)| *cr).collect();

            mem.m_f[mem.k] = lehmer_mean(&f_values, &weights).expect("nonempty success set");
            debug_assert!(mem.m_f[mem.k] > 0.0 && mem.m_f[mem.k] <= 1.0);
            mem.m_cr[mem.k] = if lshade {
                // Once a slot would update from an all-zero CR set it freezes
                // at the terminal marker; draws from it use CR = 0.
                let frozen = mem.m_cr[mem.k].is_none();
                let all_zero = cr_values.iter().all(|cr| *cr == 0.0);
                if frozen || all_zero {
                    None
                } else {
                    Some(lehmer_mean(&cr_values, &weights).expect("nonempty success set"))
                }
            } else {
                Some(
                    cr_values
                        .iter()
                        .zip(&weights)
                        .map(|(cr, w)| w * cr)
                        .sum::<f64>(),
                )
            };
            mem.k = (mem.k + 1) % history;
        }

        if lshade {
            let np_next = lshade_population_size(tracker.fes, cfg);
            if np_next < np {
                let keep = sorted_indices(&vals);
                let mut new_pop = Vec::with_capacity(np_next);
                let mut new_vals = Vec::with_capacity(np_next);
                for &idx in keep.iter().take(np_next) {
                    new_pop.push(pop[idx].clone());
                    new_vals.push(vals[idx]);
                }
                pop = new_pop;
                vals = new_vals;
                np = np_next;
                mem.trim_archive(archive_cap(np), rng);
            }
        }
    }
}
