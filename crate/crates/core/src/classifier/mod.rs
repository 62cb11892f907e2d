//! Three-layer sigmoid MLP trained by per-sample backpropagation with momentum.

mod io;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use io::{load_model, save_model, ModelDocument};

use crate::error::{Error, Result};
use crate::exact_float;

/// Half-width of the uniform initialization interval.
const INIT_RANGE: f64 = 0.5;
/// Mixed into the seed so the shuffle stream differs from the init stream.
const SHUFFLE_SALT: u64 = 0x5eed_5eed_5eed_5eed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_size: usize,
    pub hidden_size: usize,
    pub output_size: usize,
    #[serde(with = "exact_float::scalar")]
    pub learning_rate: f64,
    #[serde(with = "exact_float::scalar")]
    pub momentum: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Training stops once an epoch's summed squared error is at or below this.
    #[serde(with = "exact_float::scalar")]
    pub target_sse: f64,
}

impl MlpConfig {
    pub const DEFAULT_LEARNING_RATE: f64 = 0.8;
    pub const DEFAULT_MOMENTUM: f64 = 0.7;

    pub fn new(input_size: usize, hidden_size: usize, output_size: usize) -> Self {
        MlpConfig {
            input_size,
            hidden_size,
            output_size,
            learning_rate: Self::DEFAULT_LEARNING_RATE,
            momentum: Self::DEFAULT_MOMENTUM,
            max_epochs: 500,
            seed: 0,
            target_sse: 0.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epochs(mut self, max_epochs: usize) -> Self {
        self.max_epochs = max_epochs;
        self
    }

    pub fn with_target_sse(mut self, target_sse: f64) -> Self {
        self.target_sse = target_sse;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.input_size == 0 || self.hidden_size == 0 || self.output_size == 0 {
            return bad(format!(
                "layer sizes must be positive, got {}-{}-{}",
                self.input_size, self.hidden_size, self.output_size
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            ));
        }
        if !self.target_sse.is_finite() || self.target_sse < 0.0 {
            return bad(format!(
                "target SSE must be finite and >= 0, got {}",
                self.target_sse
            ));
        }
        Ok(())
    }
}

/// A dense layer: `weights` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    #[serde(with = "exact_float::vec")]
    pub weights: Vec<f64>,
    #[serde(with = "exact_float::vec")]
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn random(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n)
                .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
                .collect()
        };
        let weights = draw(inputs * outputs);
        let biases = draw(outputs);
        Layer {
            inputs,
            outputs,
            weights,
            biases,
        }
    }

    /// `σ(W·x + b)` into `out`.
    fn activate(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.inputs)
                .zip(&self.biases)
                .map(|(row, b)| {
                    let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
                    sigmoid(z)
                }),
        );
    }

    fn len(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn is_valid(&self) -> bool {
        self.weights.len() == self.inputs * self.outputs
            && self.biases.len() == self.outputs
            && self
                .weights
                .iter()
                .chain(&self.biases)
                .all(|v| v.is_finite())
    }
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Parameter-shaped container for gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub hidden: Layer,
    pub output: Layer,
}

impl Gradients {
    /// Flattened in the order of [`MlpModel::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.hidden, &self.output)
    }
}

fn flatten_layers(hidden: &Layer, output: &Layer) -> Vec<f64> {
    let mut v = Vec::with_capacity(hidden.len() + output.len());
    v.extend_from_slice(&hidden.weights);
    v.extend_from_slice(&hidden.biases);
    v.extend_from_slice(&output.weights);
    v.extend_from_slice(&output.biases);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    config: MlpConfig,
    hidden: Layer,
    output: Layer,
    /// Previous updates, for the momentum term. Not persisted.
    #[serde(skip)]
    velocity: Option<Gradients>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_sse: f64,
    pub sse_trace: Vec<f64>,
}

/// Seeded uniform `[-0.5, 0.5]` initialization.
pub fn init_mlp(config: MlpConfig) -> Result<MlpModel> {
    MlpModel::new(config)
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

struct Activations {
    hidden: Vec<f64>,
    output: Vec<f64>,
}

impl MlpModel {
    pub fn new(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let hidden = Layer::random(config.input_size, config.hidden_size, &mut rng);
        let output = Layer::random(config.hidden_size, config.output_size, &mut rng);
        Ok(MlpModel {
            config,
            hidden,
            output,
            velocity: None,
        })
    }

    /// Assembles a model from explicit layers.
    pub fn from_layers(config: MlpConfig, hidden: Layer, output: Layer) -> Result<Self> {
        config.validate()?;
        let shapes_ok = hidden.inputs == config.input_size
            && hidden.outputs == config.hidden_size
            && output.inputs == config.hidden_size
            && output.outputs == config.output_size;
        if !shapes_ok || !hidden.is_valid() || !output.is_valid() {
            return Err(Error::InvalidConfig(
                "layer shapes or values do not match the configuration".into(),
            ));
        }
        Ok(MlpModel {
            config,
            hidden,
            output,
            velocity: None,
        })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn hidden_layer(&self) -> &Layer {
        &self.hidden
    }

    pub fn output_layer(&self) -> &Layer {
        &self.output
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden.len() + self.output.len()
    }

    /// Hidden weights, hidden biases, output weights, output biases.
    pub fn parameters(&self) -> Vec<f64> {
        flatten_layers(&self.hidden, &self.output)
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.parameter_count(),
                actual: params.len(),
            });
        }
        let mut rest = params;
        for layer in [&mut self.hidden, &mut self.output] {
            let (w, tail) = rest.split_at(layer.weights.len());
            layer.weights.copy_from_slice(w);
            let (b, tail) = tail.split_at(layer.biases.len());
            layer.biases.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.config.input_size {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_size,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn check_target(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.config.output_size {
            return Err(Error::DimensionMismatch {
                expected: self.config.output_size,
                actual: t.len(),
            });
        }
        Ok(())
    }

    fn activations(&self, x: &[f64], act: &mut Activations) {
        self.hidden.activate(x, &mut act.hidden);
        self.output.activate(&act.hidden, &mut act.output);
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut act = Activations {
            hidden: Vec::new(),
            output: Vec::new(),
        };
        self.activations(x, &mut act);
        Ok(act.output)
    }

    /// Raw sigmoid outputs, one per class.
    pub fn predict_confidences(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward(x)
    }

    /// Maximum-response class.
    pub fn predict_class(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }

    /// `E = ½ Σ_samples Σ_j (out_j − target_j)²`.
    pub fn loss<X: AsRef<[f64]>, T: AsRef<[f64]>>(&self, samples: &[(X, T)]) -> Result<f64> {
        let mut total = 0.0;
        for (x, t) in samples {
            let (x, t) = (x.as_ref(), t.as_ref());
            self.check_target(t)?;
            let out = self.forward(x)?;
            total += out.iter().zip(t).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
        }
        Ok(0.5 * total)
    }

    /// Analytic `∂E/∂θ` summed over `samples`.
    pub fn gradients<X: AsRef<[f64]>, T: AsRef<[f64]>>(
        &self,
        samples: &[(X, T)],
    ) -> Result<Gradients> {
        let mut grads = Gradients {
            hidden: Layer::zeros(self.hidden.inputs, self.hidden.outputs),
            output: Layer::zeros(self.output.inputs, self.output.outputs),
        };
        let mut act = Activations {
            hidden: Vec::new(),
            output: Vec::new(),
        };
        let mut delta_out = Vec::new();
        let mut delta_hidden = Vec::new();
        for (x, t) in samples {
            let (x, t) = (x.as_ref(), t.as_ref());
            self.check_input(x)?;
            self.check_target(t)?;
            self.activations(x, &mut act);
            self.backprop(t, &act, &mut delta_out, &mut delta_hidden);
            accumulate(&mut grads.output, &act.hidden, &delta_out);
            accumulate(&mut grads.hidden, x, &delta_hidden);
        }
        Ok(grads)
    }

    /// Output and hidden deltas (`∂E/∂z`) for one sample.
    fn backprop(
        &self,
        target: &[f64],
        act: &Activations,
        delta_out: &mut Vec<f64>,
        delta_hidden: &mut Vec<f64>,
    ) {
        delta_out.clear();
        delta_out.extend(
            act.output
                .iter()
                .zip(target)
                .map(|(&o, &t)| (o - t) * o * (1.0 - o)),
        );
        delta_hidden.clear();
        delta_hidden.resize(self.hidden.outputs, 0.0);
        for (row, &d) in self
            .output
            .weights
            .chunks_exact(self.output.inputs)
            .zip(delta_out.iter())
        {
            for (acc, &w) in delta_hidden.iter_mut().zip(row) {
                *acc += d * w;
            }
        }
        for (d, &h) in delta_hidden.iter_mut().zip(&act.hidden) {
            *d *= h * (1.0 - h);
        }
    }

    /// Stochastic backpropagation with momentum:
    /// `Δw = −lr·∂E/∂w + momentum·Δw_prev`, applied after every sample. The
    /// visiting order is reshuffled each epoch from the configured seed.
    pub fn train<X: AsRef<[f64]>, T: AsRef<[f64]>>(
        &mut self,
        samples: &[(X, T)],
    ) -> Result<TrainReport> {
        for (x, t) in samples {
            self.check_input(x.as_ref())?;
            self.check_target(t.as_ref())?;
        }
        let lr = self.config.learning_rate;
        let momentum = self.config.momentum;
        let mut velocity = self.velocity.take().unwrap_or_else(|| Gradients {
            hidden: Layer::zeros(self.hidden.inputs, self.hidden.outputs),
            output: Layer::zeros(self.output.inputs, self.output.outputs),
        });
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ SHUFFLE_SALT);
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut act = Activations {
            hidden: Vec::new(),
            output: Vec::new(),
        };
        let (mut delta_out, mut delta_hidden) = (Vec::new(), Vec::new());
        let mut trace = Vec::new();

        for epoch in 0..self.config.max_epochs {
            order.shuffle(&mut rng);
            let mut sse = 0.0;
            for &i in &order {
                let (x, t) = (samples[i].0.as_ref(), samples[i].1.as_ref());
                self.activations(x, &mut act);
                sse += act
                    .output
                    .iter()
                    .zip(t)
                    .map(|(o, t)| (o - t).powi(2))
                    .sum::<f64>();
                self.backprop(t, &act, &mut delta_out, &mut delta_hidden);
                step(
                    &mut self.output,
                    &mut velocity.output,
                    &act.hidden,
                    &delta_out,
                    lr,
                    momentum,
                );
                step(
                    &mut self.hidden,
                    &mut velocity.hidden,
                    x,
                    &delta_hidden,
                    lr,
                    momentum,
                );
            }
            if !sse.is_finite() {
                self.velocity = Some(velocity);
                return Err(Error::NonFiniteLoss { epoch });
            }
            trace.push(sse);
            if sse <= self.config.target_sse {
                break;
            }
        }
        self.velocity = Some(velocity);
        Ok(TrainReport {
            epochs_run: trace.len(),
            final_sse: trace.last().copied().unwrap_or(f64::NAN),
            sse_trace: trace,
        })
    }
}

/// `grad += delta ⊗ input`, `grad_b += delta`.
fn accumulate(grad: &mut Layer, input: &[f64], delta: &[f64]) {
    for ((row, b), &d) in grad
        .weights
        .chunks_exact_mut(grad.inputs)
        .zip(grad.biases.iter_mut())
        .zip(delta)
    {
        for (g, &v) in row.iter_mut().zip(input) {
            *g += d * v;
        }
        *b += d;
    }
}

fn step(
    layer: &mut Layer,
    velocity: &mut Layer,
    input: &[f64],
    delta: &[f64],
    lr: f64,
    momentum: f64,
) {
    let n = layer.inputs;
    for (j, &d) in delta.iter().enumerate() {
        let row = j * n..(j + 1) * n;
        for ((w, v), &x) in layer.weights[row.clone()]
            .iter_mut()
            .zip(&mut velocity.weights[row])
            .zip(input)
        {
            *v = -lr * d * x + momentum * *v;
            *w += *v;
        }
        let vb = &mut velocity.biases[j];
        *vb = -lr * d + momentum * *vb;
        layer.biases[j] += *vb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_model(i: usize, h: usize, o: usize) -> MlpModel {
        let mut m = MlpModel::new(MlpConfig::new(i, h, o)).unwrap();
        let n = m.parameter_count();
        m.set_parameters(&vec![0.0; n]).unwrap();
        m
    }

    #[test]
    fn same_seed_same_model() {
        let c = MlpConfig::new(5, 4, 3).with_seed(42);
        let a = init_mlp(c.clone()).unwrap();
        let b = init_mlp(c).unwrap();
        let bits = |m: &MlpModel| {
            m.parameters()
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        let other = init_mlp(MlpConfig::new(5, 4, 3).with_seed(43)).unwrap();
        assert_ne!(bits(&a), bits(&other));
    }

    #[test]
    fn parameter_count_2_2_1() {
        assert_eq!(
            init_mlp(MlpConfig::new(2, 2, 1)).unwrap().parameter_count(),
            9
        );
    }

    #[test]
    fn init_range() {
        let m = init_mlp(MlpConfig::new(30, 20, 10).with_seed(7)).unwrap();
        assert!(m.parameters().iter().all(|v| (-0.5..=0.5).contains(v)));
    }

    #[test]
    fn zero_weights_give_half() {
        let m = zero_model(4, 3, 5);
        assert_eq!(m.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.5; 5]);
        assert_eq!(m.predict_class(&[0.0; 4]).unwrap(), 0);
    }

    #[test]
    fn unit_chain_gives_sigmoid_of_half() {
        let mut m = zero_model(1, 1, 1);
        m.set_parameters(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        let out = m.forward(&[0.0]).unwrap()[0];
        assert!((out - 0.622_459_331_201_854_6).abs() < 1e-15);
    }

    #[test]
    fn wrong_input_length() {
        let m = zero_model(3, 2, 2);
        assert!(matches!(
            m.forward(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 2
            })
        ));
        let mut m = m;
        let bad: Vec<(Vec<f64>, Vec<f64>)> = vec![(vec![0.0; 3], vec![0.0; 3])];
        assert!(matches!(
            m.train(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.1, 0.9, 0.3]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.7, 0.7]), 1);
    }

    #[test]
    fn zero_error_sample_leaves_weights_alone() {
        let mut m = init_mlp(MlpConfig::new(3, 4, 2).with_seed(3).with_epochs(1)).unwrap();
        let x = vec![0.2, 0.4, 0.9];
        let t = m.forward(&x).unwrap();
        let before = m.parameters();
        m.train(&[(x, t)]).unwrap();
        assert_eq!(m.parameters(), before);
    }

    #[test]
    fn invalid_configs() {
        let mut c = MlpConfig::new(1, 1, 1);
        c.momentum = 1.0;
        assert!(init_mlp(c).is_err());
        let mut c = MlpConfig::new(1, 1, 1);
        c.learning_rate = 0.0;
        assert!(init_mlp(c).is_err());
        assert!(init_mlp(MlpConfig::new(0, 1, 1)).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut m = init_mlp(MlpConfig::new(1, 1, 1).with_epochs(3)).unwrap();
        let samples = vec![(vec![f64::NAN], vec![1.0])];
        assert!(matches!(
            m.train(&samples),
            Err(Error::NonFiniteLoss { epoch: 0 })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..12)
            .map(|i| {
                let x = vec![(i % 3) as f64 / 2.0, (i % 4) as f64 / 3.0];
                let t = if i % 2 == 0 {
                    vec![1.0, 0.0]
                } else {
                    vec![0.0, 1.0]
                };
                (x, t)
            })
            .collect();
        let run = || {
            let mut m = init_mlp(MlpConfig::new(2, 5, 2).with_seed(9).with_epochs(40)).unwrap();
            let r = m.train(&samples).unwrap();
            (r, m.parameters())
        };
        let (r1, p1) = run();
        let (r2, p2) = run();
        assert_eq!(r1, r2);
        assert_eq!(p1, p2);
        assert_eq!(r1.sse_trace.len(), r1.epochs_run);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..7)
            .map(|i| {
                let x = vec![
                    (i as f64 * 0.37).sin(),
                    (i as f64 * 1.3).cos(),
                    i as f64 / 7.0,
                ];
                let mut t = vec![0.0; 4];
                t[i % 4] = 1.0;
                (x, t)
            })
            .collect();
        let m = init_mlp(MlpConfig::new(3, 5, 4).with_seed(5)).unwrap();
        let analytic = m.gradients(&samples).unwrap().flatten();
        let base = m.parameters();
        let h = 1e-4;
        for (j, &g) in analytic.iter().enumerate() {
            let mut probe = m.clone();
            let mut p = base.clone();
            p[j] = base[j] + h;
            probe.set_parameters(&p).unwrap();
            let up = probe.loss(&samples).unwrap();
            p[j] = base[j] - h;
            probe.set_parameters(&p).unwrap();
            let down = probe.loss(&samples).unwrap();
            let numeric = (up - down) / (2.0 * h);
            let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-6);
            assert!(rel < 1e-4, "parameter {j}: analytic {g} numeric {numeric}");
        }
    }

    fn xor() -> Vec<(Vec<f64>, Vec<f64>)> {
        [
            (0.0, 0.0, 0.0),
            (0.0, 1.0, 1.0),
            (1.0, 0.0, 1.0),
            (1.0, 1.0, 0.0),
        ]
        .iter()
        .map(|&(a, b, t)| (vec![a, b], vec![t]))
        .collect()
    }

    #[test]
    fn learns_xor_for_most_seeds() {
        let ok = (0..10)
            .filter(|&seed| {
                let mut m =
                    init_mlp(MlpConfig::new(2, 4, 1).with_seed(seed).with_epochs(5000)).unwrap();
                m.train(&xor()).unwrap().final_sse < 0.05
            })
            .count();
        assert!(ok >= 8, "XOR converged for {ok}/10 seeds");
    }

    #[test]
    fn separable_toy_problem() {
        let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..40)
            .map(|i| {
                let x = (i % 8) as f64 / 7.0;
                let y = (i / 8) as f64 / 4.0;
                let t = if x + y > 1.0 {
                    vec![1.0, 0.0]
                } else {
                    vec![0.0, 1.0]
                };
                (vec![x, y], t)
            })
            .collect();
        let ok = (0..10)
            .filter(|&seed| {
                let mut m =
                    init_mlp(MlpConfig::new(2, 4, 2).with_seed(seed).with_epochs(2000)).unwrap();
                let r = m.train(&samples).unwrap();
                let all_right = samples
                    .iter()
                    .all(|(x, t)| m.predict_class(x).unwrap() == argmax(t));
                r.final_sse < 0.1 && all_right
            })
            .count();
        assert!(ok >= 8, "toy problem converged for {ok}/10 seeds");
    }
}
