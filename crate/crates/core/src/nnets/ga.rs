//! Genetic search over (learning rate, momentum) for FitNet.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::{derive, rng_from_seed};

use super::train::{fraction_correct, train_plain};
use super::{GaConfig, NetworkKind, TrainConfig};

/// Seed stream tags for the GA's two random sources.
const SPLIT_STREAM: u64 = 1;
const EVOLVE_STREAM: u64 = 2;

/// One individual's hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Genes {
    pub learning_rate: f64,
    pub momentum: f64,
}

/// Search result: winning genes and the per-generation best fitness.
#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Genes,
    pub best_fitness_per_generation: Vec<f64>,
}

fn sample_genes(rng: &mut ChaCha8Rng, ga: &GaConfig) -> Genes {
    let (llo, lhi) = (ga.lr_bounds.0.ln(), ga.lr_bounds.1.ln());
    let learning_rate = if llo == lhi { llo.exp() } else { rng.random_range(llo..lhi).exp() };
    let (mlo, mhi) = ga.momentum_bounds;
    let momentum = if mlo == mhi { mlo } else { rng.random_range(mlo..mhi) };
    Genes { learning_rate, momentum }
}

/// Ranking used everywhere: higher fitness first, ties by smaller
/// learning rate, then by individual index.
fn better(a: (f64, &Genes, usize), b: (f64, &Genes, usize)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.1.learning_rate != b.1.learning_rate {
        return a.1.learning_rate < b.1.learning_rate;
    }
    a.2 < b.2
}

fn tournament(
    rng: &mut ChaCha8Rng,
    pop: &[Genes],
    fits: &[f64],
    size: usize,
) -> usize {
    let mut winner = rng.random_range(0..pop.len());
    for _ in 1..size {
        let i = rng.random_range(0..pop.len());
        if better((fits[i], &pop[i], i), (fits[winner], &pop[winner], winner)) {
            winner = i;
        }
    }
    winner
}

fn crossover_mutate(rng: &mut ChaCha8Rng, p1: &Genes, p2: &Genes, ga: &GaConfig) -> Genes {
    let alpha: f64 = rng.random();
    let lr = (alpha * p1.learning_rate.ln() + (1.0 - alpha) * p2.learning_rate.ln()).exp();
    let beta: f64 = rng.random();
    let momentum = beta * p1.momentum + (1.0 - beta) * p2.momentum;
    let mut child = Genes { learning_rate: lr, momentum };
    if rng.random::<f64>() < ga.mutation_rate {
        child.learning_rate = sample_genes(rng, ga).learning_rate;
    }
    if rng.random::<f64>() < ga.mutation_rate {
        child.momentum = sample_genes(rng, ga).momentum;
    }
    child
}

/// Stratified inner split of the training rows: (fit indices, val indices).
fn inner_split(
    labels: &[usize],
    validation_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = rng_from_seed(seed);
    let mut fit = Vec::new();
    let mut val = Vec::new();
    for label in 0..2usize {
        let mut idx: Vec<usize> =
            labels.iter().enumerate().filter(|(_, &l)| l == label).map(|(i, _)| i).collect();
        if idx.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "inner validation split needs at least 2 rows per class, class {label} has {}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n_fit = (((1.0 - validation_fraction) * idx.len() as f64).round() as usize)
            .clamp(1, idx.len() - 1);
        fit.extend_from_slice(&idx[..n_fit]);
        val.extend_from_slice(&idx[n_fit..]);
    }
    Ok((fit, val))
}

/// Run the GA: fitness is accuracy on an inner validation split, training
/// each individual with its genes from the same seeded initialization.
/// Individuals whose training diverges score negative infinity.
pub fn run_ga<S: Scalar>(
    x: &[Vec<S>],
    y: &[[S; 2]],
    cfg: &TrainConfig,
    ga: &GaConfig,
) -> Result<GaOutcome> {
    cfg.validate()?;
    ga.validate()?;
    let labels: Vec<usize> = y.iter().map(|t| usize::from(t[1] > t[0])).collect();
    let (fit_idx, val_idx) =
        inner_split(&labels, ga.validation_fraction, derive(cfg.seed, &[SPLIT_STREAM]))?;
    let fit_x: Vec<Vec<S>> = fit_idx.iter().map(|&i| x[i].clone()).collect();
    let fit_y: Vec<[S; 2]> = fit_idx.iter().map(|&i| y[i]).collect();
    let val_x: Vec<Vec<S>> = val_idx.iter().map(|&i| x[i].clone()).collect();
    let val_labels: Vec<usize> = val_idx.iter().map(|&i| labels[i]).collect();
    let evaluate = |genes: &Genes| -> Result<f64> {
        let tuned = TrainConfig {
            learning_rate: genes.learning_rate,
            momentum: genes.momentum,
            epochs: cfg.epochs,
            seed: cfg.seed,
        };
        match train_plain(NetworkKind::FitNet, &fit_x, &fit_y, &tuned) {
            Ok(model) => fraction_correct(&model, &val_x, &val_labels),
            Err(Error::NonFiniteLoss { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    let mut rng = rng_from_seed(derive(cfg.seed, &[EVOLVE_STREAM]));
    let mut pop: Vec<Genes> = (0..ga.population).map(|_| sample_genes(&mut rng, ga)).collect();
    let mut fits: Vec<Option<f64>> = vec![None; pop.len()];
    let mut history = Vec::with_capacity(ga.generations);
    let mut overall: Option<(f64, Genes)> = None;
    for gen in 0..ga.generations {
        for i in 0..pop.len() {
            if fits[i].is_none() {
                fits[i] = Some(evaluate(&pop[i])?);
            }
        }
        let scored: Vec<f64> = fits.iter().map(|f| f.expect("filled above")).collect();
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| {
            if better((scored[a], &pop[a], a), (scored[b], &pop[b], b)) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        });
        let best_i = order[0];
        history.push(scored[best_i]);
        let replace = match &overall {
            None => true,
            Some((f, g)) => {
                scored[best_i] > *f
                    || (scored[best_i] == *f && pop[best_i].learning_rate < g.learning_rate)
            }
        };
        if replace {
            overall = Some((scored[best_i], pop[best_i]));
        }
        if gen + 1 == ga.generations {
            break;
        }
        let mut next = Vec::with_capacity(pop.len());
        let mut next_fits = Vec::with_capacity(pop.len());
        for &e in order.iter().take(ga.elitism) {
            next.push(pop[e]);
            next_fits.push(fits[e]);
        }
        while next.len() < pop.len() {
            let p1 = tournament(&mut rng, &pop, &scored, ga.tournament);
            let p2 = tournament(&mut rng, &pop, &scored, ga.tournament);
            next.push(crossover_mutate(&mut rng, &pop[p1], &pop[p2], ga));
            next_fits.push(None);
        }
        pop = next;
        fits = next_fits;
    }
    let (_, best) = overall.expect("at least one generation ran");
    Ok(GaOutcome { best, best_fitness_per_generation: history })
}
