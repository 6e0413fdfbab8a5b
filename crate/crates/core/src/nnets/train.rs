//! Loss, exact gradients and full-batch momentum training.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::ga::run_ga;
use super::model::{Activation, NetworkModel};
use super::{GaConfig, NetworkKind, TrainConfig};

/// One-hot targets for binary labels.
pub fn one_hot<S: Scalar>(labels: &[usize]) -> Vec<[S; 2]> {
    labels
        .iter()
        .map(|&l| {
            let mut row = [S::zero(); 2];
            row[l.min(1)] = S::one();
            row
        })
        .collect()
}

fn target_label<S: Scalar>(y: &[S; 2]) -> usize {
    usize::from(y[1] > y[0])
}

/// Parameter offset of each layer within the flat vector.
fn layer_offsets<S: Scalar>(model: &NetworkModel<S>) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(model.layers.len());
    let mut acc = 0;
    for layer in &model.layers {
        offsets.push(acc);
        let (out_w, in_w) = (layer.biases.len(), layer.weights[0].len());
        acc += out_w * in_w + out_w;
    }
    offsets
}

/// Mean loss over the batch and the exact gradient in flat-parameter
/// layout. Cross-entropy for softmax kinds, mean squared error for
/// sigmoid kinds; cascade skip connections are fully accounted for.
pub fn compute_loss_and_gradients<S: Scalar>(
    model: &NetworkModel<S>,
    x: &[Vec<S>],
    y: &[[S; 2]],
) -> Result<(S, Vec<S>)> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} input rows vs {} target rows",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::ShapeMismatch("empty batch".into()));
    }
    let offsets = layer_offsets(model);
    let mut grads = vec![S::zero(); model.param_count()];
    let mut loss = S::zero();
    let cascade = model.kind.is_cascade();
    let k_last = model.layers.len() - 1;
    let out_act = model.layers[k_last].activation;
    let n_out = S::from_usize(model.output_width());
    for (row, target) in x.iter().zip(y) {
        let acts = model.forward_cached(row)?;
        let out = &acts[k_last + 1];
        match out_act {
            Activation::Softmax => {
                for (&p, &t) in out.iter().zip(target) {
                    if t > S::zero() {
                        loss -= t * p.ln();
                    }
                }
            }
            Activation::Sigmoid => {
                loss += out
                    .iter()
                    .zip(target)
                    .map(|(&a, &t)| (a - t) * (a - t))
                    .sum::<S>()
                    / n_out;
            }
            Activation::Tanh => unreachable!("output layers are softmax or sigmoid"),
        }
        let mut d_acts: Vec<Vec<S>> = acts.iter().map(|a| vec![S::zero(); a.len()]).collect();
        let mut delta: Vec<S> = match out_act {
            Activation::Softmax => out.iter().zip(target).map(|(&p, &t)| p - t).collect(),
            Activation::Sigmoid => out
                .iter()
                .zip(target)
                .map(|(&a, &t)| (a - t) * a * (S::one() - a) * (S::one() + S::one()) / n_out)
                .collect(),
            Activation::Tanh => unreachable!(),
        };
        for k in (0..=k_last).rev() {
            if k != k_last {
                delta = d_acts[k + 1]
                    .iter()
                    .zip(&acts[k + 1])
                    .map(|(&d, &a)| d * (S::one() - a * a))
                    .collect();
            }
            let layer = &model.layers[k];
            let input: Vec<S> = if cascade {
                acts[..=k].iter().flatten().copied().collect()
            } else {
                acts[k].clone()
            };
            let (out_w, in_w) = (delta.len(), input.len());
            let off = offsets[k];
            for (i, &d) in delta.iter().enumerate() {
                let base = off + i * in_w;
                for (j, &v) in input.iter().enumerate() {
                    grads[base + j] += d * v;
                }
                grads[off + out_w * in_w + i] += d;
            }
            // fan the input gradient back onto every feeding stage
            let stages: std::ops::RangeInclusive<usize> = if cascade { 0..=k } else { k..=k };
            let mut start = 0;
            for t in stages {
                let w_t = acts[t].len();
                for (j, dst) in d_acts[t].iter_mut().enumerate() {
                    let mut s = S::zero();
                    for (i, &d) in delta.iter().enumerate() {
                        s += d * layer.weights[i][start + j];
                    }
                    *dst += s;
                }
                start += w_t;
            }
        }
    }
    let n = S::from_usize(x.len());
    loss /= n;
    for g in &mut grads {
        *g /= n;
    }
    Ok((loss, grads))
}

/// Fraction of rows whose predicted label matches.
pub fn fraction_correct<S: Scalar>(
    model: &NetworkModel<S>,
    x: &[Vec<S>],
    labels: &[usize],
) -> Result<f64> {
    let mut correct = 0usize;
    for (row, &label) in x.iter().zip(labels) {
        if model.predict(row)?.0 == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / x.len().max(1) as f64)
}

pub(super) fn train_plain<S: Scalar>(
    kind: NetworkKind,
    x: &[Vec<S>],
    y: &[[S; 2]],
    cfg: &TrainConfig,
) -> Result<NetworkModel<S>> {
    let mut model = NetworkModel::new(kind, x[0].len(), cfg.seed);
    let mut params = model.flat_params();
    let mut velocity = vec![S::zero(); params.len()];
    let lr = S::from_f64(cfg.learning_rate);
    let mu = S::from_f64(cfg.momentum);
    for epoch in 0..cfg.epochs {
        let (loss, grads) = compute_loss_and_gradients(&model, x, y)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        for ((p, v), &g) in params.iter_mut().zip(&mut velocity).zip(&grads) {
            *v = mu * *v - lr * g;
            *p += *v;
        }
        model.set_flat_params(&params)?;
    }
    Ok(model)
}

/// Train a classifier of the given kind on standardized rows with one-hot
/// targets. FitNet requires a GA config; other kinds ignore it.
pub fn train<S: Scalar>(
    kind: NetworkKind,
    x: &[Vec<S>],
    y: &[[S; 2]],
    cfg: &TrainConfig,
    ga: Option<&GaConfig>,
) -> Result<NetworkModel<S>> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} input rows vs {} target rows",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::ShapeMismatch("empty training set".into()));
    }
    let labels: Vec<usize> = y.iter().map(target_label).collect();
    if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
        return Err(Error::SingleClassTraining);
    }
    match kind {
        NetworkKind::FitNet => {
            let ga = ga.ok_or(Error::MissingGaConfig)?;
            ga.validate()?;
            let outcome = run_ga(x, y, cfg, ga)?;
            let tuned = TrainConfig {
                learning_rate: outcome.best.learning_rate,
                momentum: outcome.best.momentum,
                epochs: cfg.epochs,
                seed: cfg.seed,
            };
            train_plain(kind, x, y, &tuned)
        }
        _ => train_plain(kind, x, y, cfg),
    }
}
