use super::*;
use crate::pipeline::{random_pipeline, serialize};
use crate::rng::seeded_rng;

fn tiny_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = seeded_rng(seed);
    let cols: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let labels: Vec<usize> = cols[0].iter().map(|&x| usize::from(x > 0.0)).collect();
    let names = (0..4).map(|j| format!("f{j}")).collect();
    Dataset::new(names, cols, labels, None, 2).unwrap()
}

fn fake_individual(acc: f64, size: usize, discovered: u64) -> Individual {
    // build an arbitrary pipeline of the requested operator count
    let mut rng = seeded_rng(discovered);
    let pipeline = random_pipeline(&mut rng, 1, 20);
    Individual {
        pipeline,
        fitness: Some(FitnessRecord {
            balanced_accuracy: acc,
            size,
            eval_millis: 0,
            failed: false,
        }),
        discovered,
    }
}

fn failed_individual(size: usize, discovered: u64) -> Individual {
    let mut ind = fake_individual(0.0, size, discovered);
    ind.fitness.as_mut().unwrap().failed = true;
    ind
}

fn small_cfg(mode: SelectionMode, seed: u64) -> GpConfig {
    GpConfig {
        population_size: 10,
        generations: 2,
        selection_mode: mode,
        seed,
        eval_budget_millis: 5_000,
        ..GpConfig::default()
    }
}

#[test]
fn mutation_closure_holds_over_many_trees() {
    let mut rng = seeded_rng(7);
    for i in 0..10_000 {
        let base = random_pipeline(&mut rng, 5, 20);
        let mutated = mutate(&base, &mut rng, 10, 20);
        let violations = mutated.validate(10, 20);
        assert!(violations.is_empty(), "iteration {i}: {violations:?}\n{}", serialize(&mutated));
        assert!(mutated.size() >= 1);
    }
}

#[test]
fn shrink_on_minimal_tree_falls_through_to_point() {
    let mut rng = seeded_rng(3);
    for _ in 0..200 {
        let base = random_pipeline(&mut rng, 1, 20);
        assert_eq!(base.size(), 1);
        let mutated = mutate(&base, &mut rng, 10, 20);
        assert!(mutated.size() >= 1);
        assert!(mutated.validate(10, 20).is_empty());
        assert!(mutated.root.is_model(), "root category preserved");
    }
}

#[test]
fn point_mutation_keeps_model_category_at_root() {
    let mut rng = seeded_rng(11);
    for _ in 0..500 {
        let base = random_pipeline(&mut rng, 1, 20);
        let mutated = point_mutation(&base, &mut rng);
        assert!(mutated.root.is_model());
    }
}

#[test]
fn crossover_closure_and_self_cross() {
    let mut rng = seeded_rng(13);
    for _ in 0..10_000 {
        let a = random_pipeline(&mut rng, 5, 20);
        let b = random_pipeline(&mut rng, 5, 20);
        let child = crossover(&a, &b, &mut rng, 10, 20);
        assert!(child.validate(10, 20).is_empty());
    }
    for _ in 0..200 {
        let p = random_pipeline(&mut rng, 4, 20);
        let child = crossover(&p, &p, &mut rng, 10, 20);
        assert!(child.validate(10, 20).is_empty());
    }
}

#[test]
fn crossover_of_two_stumps_picks_one_root() {
    let mut rng = seeded_rng(17);
    let a = random_pipeline(&mut rng, 1, 20);
    let b = random_pipeline(&mut rng, 1, 20);
    for _ in 0..50 {
        let child = crossover(&a, &b, &mut rng, 10, 20);
        assert!(child == a || child == b, "child is one of the two stumps");
    }
}

#[test]
fn selection_of_identical_population_is_identity() {
    let base = fake_individual(0.7, 3, 0);
    let pop: Vec<Individual> = (0..10)
        .map(|i| Individual {
            pipeline: base.pipeline.clone(),
            fitness: base.fitness.clone(),
            discovered: i,
        })
        .collect();
    let cfg = small_cfg(SelectionMode::Standard, 0);
    let mut rng = seeded_rng(5);
    for ind in select_standard(&pop, &mut rng, &cfg) {
        assert_eq!(ind.pipeline, pop[0].pipeline);
        assert_eq!(accuracy_of(&ind), 0.7);
    }
    let mut rng = seeded_rng(6);
    for ind in select_pareto(&pop, &mut rng, &cfg) {
        assert_eq!(accuracy_of(&ind), 0.7);
    }
}

#[test]
fn elites_always_survive_selection() {
    let mut pop: Vec<Individual> = (0..20).map(|i| fake_individual(0.5, 2, i)).collect();
    pop[7] = fake_individual(0.99, 4, 7);
    let cfg = GpConfig { population_size: 20, ..GpConfig::default() };
    for seed in 0..20 {
        let mut rng = seeded_rng(seed);
        let selected = select_standard(&pop, &mut rng, &cfg);
        assert!(
            selected.iter().any(|i| accuracy_of(i) == 0.99),
            "best individual missing for seed {seed}"
        );
        // best-first elite block
        assert_eq!(accuracy_of(&selected[0]), 0.99);
    }
}

#[test]
fn parsimony_prefers_smaller_at_documented_rate() {
    // two equal-accuracy individuals, sizes 2 and 6: the smaller must win
    // 60-80% of tournaments under the 0.7 parsimony rule
    let pop = vec![fake_individual(0.8, 2, 0), fake_individual(0.8, 6, 1)];
    let cfg = GpConfig { population_size: 2, ..GpConfig::default() };
    let mut rng = seeded_rng(99);
    let trials = 10_000;
    let mut small_wins = 0usize;
    for _ in 0..trials {
        let selected = select_standard(&pop, &mut rng, &cfg);
        // slot 0 is the elite; slot 1 is the tournament winner
        if size_of(&selected[1]) == 2 {
            small_wins += 1;
        }
    }
    let rate = small_wins as f64 / trials as f64;
    assert!((0.60..=0.80).contains(&rate), "small-size win rate {rate}");
}

#[test]
fn failed_individuals_never_beat_succeeded_in_selection() {
    let pop = vec![
        failed_individual(1, 0),
        fake_individual(0.2, 9, 1),
        failed_individual(1, 2),
        fake_individual(0.1, 8, 3),
    ];
    let cfg = GpConfig { population_size: 4, ..GpConfig::default() };
    let mut rng = seeded_rng(1);
    for ind in select_standard(&pop, &mut rng, &cfg) {
        assert!(not_failed(&ind), "standard selection kept a failed individual");
    }
    // pareto: parents = ceil(0.2*4) = 1, so every slot is the best succeeded
    let mut rng = seeded_rng(2);
    for ind in select_pareto(&pop, &mut rng, &cfg) {
        assert!(not_failed(&ind));
    }
}

#[test]
fn pareto_selection_copies_top_fifth_five_times() {
    let pop: Vec<Individual> = (0..100)
        .map(|i| {
            // spread of accuracies and sizes; all mutually distinct
            fake_individual(0.3 + (i as f64) * 0.005, 1 + (i % 7), i as u64)
        })
        .collect();
    let cfg = GpConfig { population_size: 100, ..GpConfig::default() };
    let mut rng = seeded_rng(0);
    let selected = select_pareto(&pop, &mut rng, &cfg);
    assert_eq!(selected.len(), 100);
    let mut counts: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    for ind in &selected {
        *counts.entry(ind.discovered).or_default() += 1;
    }
    assert_eq!(counts.len(), 20, "exactly 20 distinct parents");
    assert!(counts.values().all(|&c| c == 5), "each parent appears 5 times: {counts:?}");
}

#[test]
fn best_ever_tiebreak_is_total() {
    let a = fake_individual(0.9, 3, 5);
    let b = fake_individual(0.9, 2, 9);
    let c = fake_individual(0.9, 2, 1);
    assert!(ranks_better(&b, &a)); // smaller size
    assert!(ranks_better(&c, &b)); // earlier discovery
    assert!(!ranks_better(&a, &a));
}

#[test]
fn evolve_run_is_deterministic() {
    let data = tiny_dataset(40, 1);
    let cfg = small_cfg(SelectionMode::Standard, 42);
    let r1 = evolve_run(&cfg, &data).unwrap();
    let r2 = evolve_run(&cfg, &data).unwrap();
    assert_eq!(r1.best.pipeline, r2.best.pipeline);
    assert_eq!(r1.total_evaluations, r2.total_evaluations);
    assert_eq!(
        r1.best.fitness.as_ref().unwrap().balanced_accuracy,
        r2.best.fitness.as_ref().unwrap().balanced_accuracy
    );
    let h1: Vec<f64> = r1.history.iter().map(|h| h.best_accuracy).collect();
    let h2: Vec<f64> = r2.history.iter().map(|h| h.best_accuracy).collect();
    assert_eq!(h1, h2);
}

#[test]
fn zero_generations_is_pure_initialization() {
    let data = tiny_dataset(40, 2);
    let mut cfg = small_cfg(SelectionMode::Standard, 7);
    cfg.generations = 0;
    let r = evolve_run(&cfg, &data).unwrap();
    assert_eq!(r.total_evaluations, cfg.population_size);
    assert_eq!(r.history.len(), 1);
}

#[test]
fn evaluation_budget_accounting() {
    let data = tiny_dataset(40, 3);
    let cfg = small_cfg(SelectionMode::Standard, 11);
    let r = evolve_run(&cfg, &data).unwrap();
    assert!(
        r.total_evaluations <= cfg.population_size * (cfg.generations + 1),
        "evolve evaluations {} exceed cap",
        r.total_evaluations
    );
    let rs = random_search_run(&cfg, &data).unwrap();
    assert_eq!(rs.total_evaluations, cfg.population_size * cfg.generations);
}

#[test]
fn random_search_is_deterministic() {
    let data = tiny_dataset(40, 4);
    let cfg = small_cfg(SelectionMode::RandomSearch, 5);
    let a = evolve_run(&cfg, &data).unwrap();
    let b = evolve_run(&cfg, &data).unwrap();
    assert_eq!(a.best.pipeline, b.best.pipeline);
    assert_eq!(a.total_evaluations, b.total_evaluations);
}

#[test]
fn standard_mode_best_accuracy_is_monotone() {
    let data = tiny_dataset(60, 5);
    let mut cfg = small_cfg(SelectionMode::Standard, 13);
    cfg.generations = 4;
    let r = evolve_run(&cfg, &data).unwrap();
    for w in r.history.windows(2) {
        assert!(
            w[1].best_accuracy >= w[0].best_accuracy - 1e-12,
            "elitism broken: {} -> {}",
            w[0].best_accuracy,
            w[1].best_accuracy
        );
    }
}

#[test]
fn pareto_mode_produces_a_front() {
    let data = tiny_dataset(60, 6);
    let cfg = small_cfg(SelectionMode::Pareto, 21);
    let r = evolve_run(&cfg, &data).unwrap();
    assert!(!r.pareto_front.is_empty());
    // front members are mutually non-dominated
    for a in &r.pareto_front {
        for b in &r.pareto_front {
            let pa = (accuracy_of(a), size_of(a));
            let pb = (accuracy_of(b), size_of(b));
            assert!(!dominates(pa, pb) || pa == pb);
        }
    }
}

#[test]
fn infeasible_dataset_is_a_setup_error() {
    // one class has a single row: internal split infeasible
    let ds = Dataset::new(
        vec!["x".into()],
        vec![vec![1.0, 2.0, 3.0]],
        vec![0, 0, 1],
        None,
        2,
    )
    .unwrap();
    let cfg = small_cfg(SelectionMode::Standard, 1);
    match evolve_run(&cfg, &ds) {
        Err(EvolveError::Setup(_)) => {}
        other => panic!("expected setup error, got {other:?}"),
    }
}

#[test]
fn invalid_config_is_rejected() {
    let data = tiny_dataset(40, 8);
    let mut cfg = small_cfg(SelectionMode::Standard, 1);
    cfg.mutation_rate = 0.9;
    cfg.crossover_rate = 0.2;
    assert!(matches!(evolve_run(&cfg, &data), Err(EvolveError::Config(_))));
    let mut cfg2 = small_cfg(SelectionMode::Standard, 1);
    cfg2.elitism_fraction = 1.0;
    assert!(matches!(evolve_run(&cfg2, &data), Err(EvolveError::Config(_))));
}

#[test]
fn selection_never_mutates_inputs() {
    let pop: Vec<Individual> = (0..12).map(|i| fake_individual(0.1 * (i as f64 % 5.0), 1 + (i as usize % 4), i)).collect();
    let before: Vec<String> = pop.iter().map(|i| serialize(&i.pipeline)).collect();
    let cfg = GpConfig { population_size: 12, ..GpConfig::default() };
    let mut rng = seeded_rng(3);
    let _ = select_standard(&pop, &mut rng, &cfg);
    let _ = select_pareto(&pop, &mut rng, &cfg);
    let after: Vec<String> = pop.iter().map(|i| serialize(&i.pipeline)).collect();
    assert_eq!(before, after);
}
