//! Network structure, forward pass, prediction and text serialization.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::featuredb::{fmt_sig17, StandardizationParams};
use crate::scalar::Scalar;
use crate::seed::rng_from_seed;

use super::NetworkKind;

/// Per-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Sigmoid,
    Softmax,
}

impl Activation {
    fn apply<S: Scalar>(self, z: &mut [S]) {
        match self {
            Activation::Tanh => {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
            }
            Activation::Sigmoid => {
                for v in z.iter_mut() {
                    *v = S::one() / (S::one() + (-*v).exp());
                }
            }
            Activation::Softmax => {
                let max = z.iter().copied().fold(S::neg_infinity(), S::max);
                let mut sum = S::zero();
                for v in z.iter_mut() {
                    *v = (*v - max).exp();
                    sum += *v;
                }
                for v in z.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }
}

/// Dense layer: `weights[i][j]` connects input j to neuron i.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<S: Scalar> {
    pub weights: Vec<Vec<S>>,
    pub biases: Vec<S>,
    pub activation: Activation,
}

impl<S: Scalar> Layer<S> {
    fn output_width(&self) -> usize {
        self.biases.len()
    }

    fn input_width(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn forward_into(&self, input: &[S], out: &mut Vec<S>) {
        out.clear();
        for (ws, &b) in self.weights.iter().zip(&self.biases) {
            let z = ws.iter().zip(input).map(|(&w, &x)| w * x).sum::<S>() + b;
            out.push(z);
        }
        self.activation.apply(out);
    }
}

/// One of the four classifiers: layer stack, wiring mode and the
/// standardization applied at predict time.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel<S: Scalar> {
    pub kind: NetworkKind,
    /// Full widths including input and the 2-wide output: [in, hidden.., 2].
    pub widths: Vec<usize>,
    pub layers: Vec<Layer<S>>,
    pub standardization: StandardizationParams<S>,
}

impl<S: Scalar> NetworkModel<S> {
    /// Fresh model with uniform +-1/sqrt(fan_in) weights and zero biases.
    pub fn new(kind: NetworkKind, input_width: usize, seed: u64) -> Self {
        let mut widths = vec![input_width];
        widths.extend_from_slice(kind.hidden_widths());
        widths.push(2);
        let mut rng = rng_from_seed(seed);
        let n_layers = widths.len() - 1;
        let layers = (0..n_layers)
            .map(|l| {
                let in_w = Self::input_width_for(kind, &widths, l);
                let out_w = widths[l + 1];
                let scale = 1.0 / (in_w as f64).sqrt();
                let weights = (0..out_w)
                    .map(|_| {
                        (0..in_w)
                            .map(|_| S::from_f64(rng.random_range(-scale..scale)))
                            .collect()
                    })
                    .collect();
                let activation = if l == n_layers - 1 {
                    if kind.uses_softmax() {
                        Activation::Softmax
                    } else {
                        Activation::Sigmoid
                    }
                } else {
                    Activation::Tanh
                };
                Layer { weights, biases: vec![S::zero(); out_w], activation }
            })
            .collect();
        NetworkModel {
            kind,
            widths,
            layers,
            standardization: StandardizationParams::identity(input_width),
        }
    }

    /// Input width of layer `l`: for cascade wiring the raw input plus all
    /// earlier layer outputs, otherwise just the predecessor's width.
    fn input_width_for(kind: NetworkKind, widths: &[usize], l: usize) -> usize {
        if kind.is_cascade() {
            widths[..=l].iter().sum()
        } else {
            widths[l]
        }
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("non-empty widths")
    }

    /// Activations of every stage: acts[0] is the input, acts[k+1] the
    /// output of layer k.
    pub(super) fn forward_cached(&self, x: &[S]) -> Result<Vec<Vec<S>>> {
        if x.len() != self.input_width() {
            return Err(Error::ShapeMismatch(format!(
                "input has {} values, network takes {}",
                x.len(),
                self.input_width()
            )));
        }
        let mut acts: Vec<Vec<S>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        let mut scratch = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let out = if self.kind.is_cascade() {
                scratch.clear();
                for a in &acts[..=k] {
                    scratch.extend_from_slice(a);
                }
                let mut out = Vec::with_capacity(layer.output_width());
                layer.forward_into(&scratch, &mut out);
                out
            } else {
                let mut out = Vec::with_capacity(layer.output_width());
                layer.forward_into(&acts[k], &mut out);
                out
            };
            acts.push(out);
        }
        Ok(acts)
    }

    /// Output activations for a standardized input.
    pub fn forward(&self, x: &[S]) -> Result<Vec<S>> {
        Ok(self.forward_cached(x)?.pop().expect("output stage"))
    }

    /// Standardize a raw vector, run the forward pass and pick the label.
    /// An exact tie resolves to label 0.
    pub fn predict(&self, raw: &[S]) -> Result<(usize, Vec<S>)> {
        let x = self.standardization.apply(raw)?;
        let out = self.forward(&x)?;
        let label = if out[1] > out[0] { 1 } else { 0 };
        Ok((label, out))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.output_width() * l.input_width() + l.output_width())
            .sum()
    }

    /// All parameters as one vector: per layer, weights row-major then
    /// biases. The layout is the contract for gradients and updates.
    pub fn flat_params(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for row in &layer.weights {
                out.extend_from_slice(row);
            }
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[S]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "got {} parameters, model has {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut it = params.iter();
        for layer in &mut self.layers {
            for row in &mut layer.weights {
                for w in row.iter_mut() {
                    *w = *it.next().expect("length checked");
                }
            }
            for b in &mut layer.biases {
                *b = *it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Zero every cascade skip weight, keeping only each layer's direct
    /// predecessor connections. No-op for plain models.
    pub fn zero_skip_weights(&mut self) {
        if !self.kind.is_cascade() {
            return;
        }
        for (k, layer) in self.layers.iter_mut().enumerate() {
            let direct = self.widths[k];
            let total = self.widths[..=k].iter().sum::<usize>();
            let direct_start = total - direct;
            for row in &mut layer.weights {
                for w in &mut row[..direct_start] {
                    *w = S::zero();
                }
            }
        }
    }

    /// Self-describing text form; 17 significant digits per value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "slipdet-model v1");
        let _ = writeln!(out, "kind {}", self.kind);
        let _ = write!(out, "widths");
        for w in &self.widths {
            let _ = write!(out, " {w}");
        }
        out.push('\n');
        for (label, vals) in [
            ("std_mean", &self.standardization.mean),
            ("std_std", &self.standardization.std),
        ] {
            let _ = write!(out, "{label}");
            for &v in vals {
                let _ = write!(out, " {}", fmt_sig17(v));
            }
            out.push('\n');
        }
        let _ = write!(out, "std_const");
        for &c in &self.standardization.constant_columns {
            let _ = write!(out, " {}", u8::from(c));
        }
        out.push('\n');
        for (k, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "layer {k} in {} out {}", layer.input_width(), layer.output_width());
            for row in &layer.weights {
                let _ = write!(out, "w");
                for &v in row {
                    let _ = write!(out, " {}", fmt_sig17(v));
                }
                out.push('\n');
            }
            let _ = write!(out, "b");
            for &v in &layer.biases {
                let _ = write!(out, " {}", fmt_sig17(v));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the text form produced by [`to_text`].
    pub fn from_text(source: &str) -> Result<Self> {
        let mut lines = source.lines().enumerate();
        let mismatch = |line: usize, detail: String| Error::SchemaMismatch {
            detail,
            row: Some(line + 1),
        };
        let (i, magic) = lines
            .next()
            .ok_or(Error::SchemaMismatch { detail: "empty model file".into(), row: None })?;
        if magic.trim() != "slipdet-model v1" {
            return Err(mismatch(i, format!("bad magic line {magic:?}")));
        }
        let (i, kind_line) = lines
            .next()
            .ok_or(Error::SchemaMismatch { detail: "missing kind".into(), row: None })?;
        let kind: NetworkKind = kind_line
            .strip_prefix("kind ")
            .ok_or_else(|| mismatch(i, "expected kind line".into()))?
            .trim()
            .parse()
            .map_err(|e| mismatch(i, format!("{e}")))?;
        let (i, widths_line) = lines
            .next()
            .ok_or(Error::SchemaMismatch { detail: "missing widths".into(), row: None })?;
        let widths: Vec<usize> = widths_line
            .strip_prefix("widths")
            .ok_or_else(|| mismatch(i, "expected widths line".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| mismatch(i, format!("bad width {t:?}"))))
            .collect::<Result<_>>()?;
        if widths.len() < 2 || *widths.last().unwrap() != 2 {
            return Err(mismatch(i, format!("unusable widths {widths:?}")));
        }
        let input_width = widths[0];
        let parse_floats = |i: usize, line: &str, label: &str, n: usize| -> Result<Vec<S>> {
            let rest = line
                .strip_prefix(label)
                .ok_or_else(|| mismatch(i, format!("expected {label} line, got {line:?}")))?;
            let vals: Vec<S> = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map(S::from_f64)
                        .map_err(|_| mismatch(i, format!("bad value {t:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != n {
                return Err(mismatch(i, format!("{label}: expected {n} values, got {}", vals.len())));
            }
            Ok(vals)
        };
        let (i, line) = lines
            .next()
            .ok_or(Error::SchemaMismatch { detail: "missing std_mean".into(), row: None })?;
        let mean = parse_floats(i, line, "std_mean", input_width)?;
        let (i, line) = lines
            .next()
            .ok_or(Error::SchemaMismatch { detail: "missing std_std".into(), row: None })?;
        let std = parse_floats(i, line, "std_std", input_width)?;
        let (i, line) = lines
            .next()
            .ok_or(Error::SchemaMismatch { detail: "missing std_const".into(), row: None })?;
        let constant_columns: Vec<bool> = line
            .strip_prefix("std_const")
            .ok_or_else(|| mismatch(i, "expected std_const line".into()))?
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(mismatch(i, format!("bad flag {other:?}"))),
            })
            .collect::<Result<_>>()?;
        if constant_columns.len() != input_width {
            return Err(mismatch(i, "std_const length mismatch".into()));
        }
        let n_layers = widths.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for k in 0..n_layers {
            let (i, header) = lines
                .next()
                .ok_or(Error::SchemaMismatch { detail: format!("missing layer {k}"), row: None })?;
            let toks: Vec<&str> = header.split_whitespace().collect();
            let expected_in = Self::input_width_for(kind, &widths, k);
            let expected_out = widths[k + 1];
            let ok = toks.len() == 6
                && toks[0] == "layer"
                && toks[1] == k.to_string()
                && toks[2] == "in"
                && toks[3] == expected_in.to_string()
                && toks[4] == "out"
                && toks[5] == expected_out.to_string();
            if !ok {
                return Err(mismatch(i, format!("bad layer header {header:?}")));
            }
            let mut weights = Vec::with_capacity(expected_out);
            for _ in 0..expected_out {
                let (i, line) = lines.next().ok_or(Error::SchemaMismatch {
                    detail: format!("layer {k}: missing weight row"),
                    row: None,
                })?;
                weights.push(parse_floats(i, line, "w", expected_in)?);
            }
            let (i, line) = lines.next().ok_or(Error::SchemaMismatch {
                detail: format!("layer {k}: missing biases"),
                row: None,
            })?;
            let biases = parse_floats(i, line, "b", expected_out)?;
            let activation = if k == n_layers - 1 {
                if kind.uses_softmax() {
                    Activation::Softmax
                } else {
                    Activation::Sigmoid
                }
            } else {
                Activation::Tanh
            };
            layers.push(Layer { weights, biases, activation });
        }
        Ok(NetworkModel {
            kind,
            widths,
            layers,
            standardization: StandardizationParams { mean, std, constant_columns },
        })
    }

    pub fn save(&self, destination: &Path) -> Result<()> {
        std::fs::write(destination, self.to_text())?;
        Ok(())
    }

    pub fn load(source: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(source)?)
    }
}
