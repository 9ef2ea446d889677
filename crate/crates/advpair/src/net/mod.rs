//! Dense feed-forward classifier with exact input gradients.
//!
//! The attack engine only ever needs three things from a model: a forward
//! pass over the unit box, the predicted class, and the gradient of a
//! scalar disagreement loss with respect to an input. Everything here is
//! written for that contract: plain `f64` math, no autodiff framework,
//! gradients derived by hand and checked against finite differences.
//!
//! The pair loss between two inputs is the cross-entropy of the first
//! input's softmax against the *hard* predicted label of the second.
//! Probabilities are clamped below at [`PROB_FLOOR`] inside the log, so
//! the loss is capped at `-ln(PROB_FLOOR)` (about 27.63).

mod io;
mod train;

pub use io::{load_model, save_model};
pub use train::{accuracy, train, AdversarialCfg, TrainConfig};

use crate::error::{Error, Result};
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Lower clamp applied to probabilities inside logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// NaN must propagate to the loss; `f64::max` would swallow it here.
fn floor_prob(p: f64) -> f64 {
    if p < PROB_FLOOR {
        PROB_FLOOR
    } else {
        p
    }
}

/// Element-wise activation applied after the affine transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Identity => v,
        }
    }

    /// Derivative as a function of the pre-activation value.
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// One dense layer: `y = activation(W x + b)`, weights row-major `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::Shape(format!(
                "layer weights: expected {}x{} = {} entries, got {}",
                out_dim,
                in_dim,
                in_dim * out_dim,
                weights.len()
            )));
        }
        if bias.len() != out_dim {
            return Err(Error::Shape(format!(
                "layer bias: expected {} entries, got {}",
                out_dim,
                bias.len()
            )));
        }
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                "layer parameter is NaN or infinite".into(),
            ));
        }
        Ok(DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn forward_into(&self, input: &[f64], pre: &mut Vec<f64>, post: &mut Vec<f64>) {
        pre.clear();
        post.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let z = self.bias[o] + vecmath::dot(row, input);
            pre.push(z);
            post.push(self.activation.apply(z));
        }
    }
}

/// Layered dense classifier over the unit box `Ω = [0,1]^D`.
///
/// Immutable after construction or training; all evaluation methods take
/// `&self` and are safe to call concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<DenseLayer>,
    input_dim: usize,
    class_names: Vec<String>,
}

/// Everything produced by one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Pre-activation vector per layer.
    pub pre_activations: Vec<Vec<f64>>,
    /// Post-activation vector per layer; the last entry equals `logits`.
    pub post_activations: Vec<Vec<f64>>,
    /// Raw output of the final layer.
    pub logits: Vec<f64>,
    /// Softmax of the logits; sums to 1 within 1e-9.
    pub probabilities: Vec<f64>,
}

/// Selects which element of an example pair a gradient is taken with
/// respect to. The selected element is treated as the attacked input: the
/// differentiated loss is the cross-entropy of *its* prediction against
/// the partner's hard label, matching the two gradient expressions of the
/// alternating attack (the partner's label is constant, nothing flows
/// through the argmax).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSide {
    First,
    Second,
}

impl Network {
    /// Builds a network from explicit layers, validating the shape chain.
    pub fn new(
        input_dim: usize,
        class_names: Vec<String>,
        layers: Vec<DenseLayer>,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Shape("input_dim must be positive".into()));
        }
        if class_names.len() < 2 {
            return Err(Error::Shape(format!(
                "need at least 2 classes, got {}",
                class_names.len()
            )));
        }
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.in_dim != width {
                return Err(Error::Shape(format!(
                    "layer {}: expects input width {}, previous width is {}",
                    i, layer.in_dim, width
                )));
            }
            width = layer.out_dim;
        }
        if width != class_names.len() {
            return Err(Error::Shape(format!(
                "final layer width {} does not match {} classes",
                width,
                class_names.len()
            )));
        }
        Ok(Network {
            layers,
            input_dim,
            class_names,
        })
    }

    /// Random initialization: relu hidden layers (He-uniform) followed by
    /// an identity output layer (Xavier-uniform), biases zero.
    pub fn random(
        input_dim: usize,
        hidden: &[usize],
        class_names: Vec<String>,
        rng_seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden);
        dims.push(class_names.len());

        let mut layers = Vec::with_capacity(dims.len() - 1);
        for i in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[i], dims[i + 1]);
            let last = i == dims.len() - 2;
            let limit = if last {
                (6.0 / (fan_in + fan_out) as f64).sqrt()
            } else {
                (6.0 / fan_in as f64).sqrt()
            };
            let weights: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            let activation = if last {
                Activation::Identity
            } else {
                Activation::Relu
            };
            layers.push(DenseLayer::new(
                fan_in,
                fan_out,
                weights,
                vec![0.0; fan_out],
                activation,
            )?);
        }
        Network::new(input_dim, class_names, layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Shape(format!(
                "input length {} does not match input_dim {}",
                x.len(),
                self.input_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input contains NaN or infinity".into()));
        }
        Ok(())
    }

    /// Full forward pass. Deterministic; probabilities sum to 1 within 1e-9.
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        self.check_input(x)?;
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        let mut post_activations = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        for layer in &self.layers {
            let mut pre = Vec::new();
            let mut post = Vec::new();
            layer.forward_into(&current, &mut pre, &mut post);
            current = post.clone();
            pre_activations.push(pre);
            post_activations.push(post);
        }
        let logits = current;
        let probabilities = softmax(&logits);
        Ok(ForwardTrace {
            pre_activations,
            post_activations,
            logits,
            probabilities,
        })
    }

    /// Argmax of the logits; ties broken by the lowest class index.
    pub fn predict_class(&self, x: &[f64]) -> Result<usize> {
        let trace = self.forward(x)?;
        Ok(argmax(&trace.logits))
    }

    /// Cross-entropy of the prediction at `x` against a fixed class label.
    pub fn ce_loss(&self, x: &[f64], label: usize) -> Result<f64> {
        let trace = self.forward(x)?;
        if label >= self.num_classes() {
            return Err(Error::Shape(format!(
                "label {} out of range for {} classes",
                label,
                self.num_classes()
            )));
        }
        Ok(-floor_prob(trace.probabilities[label]).ln())
    }

    /// Gradient of [`Network::ce_loss`] with respect to `x`.
    ///
    /// When the clamped label probability sits on the floor the loss is
    /// locally constant and the gradient is exactly zero.
    pub fn ce_input_grad(&self, x: &[f64], label: usize) -> Result<Vec<f64>> {
        let back = self.backprop(x, label, false)?;
        Ok(back.input_grad)
    }

    /// The pair loss `ℒ_f(x1, x2)`: cross-entropy of the softmax at `x1`
    /// against the hard predicted label at `x2`. Nonnegative, and finite
    /// thanks to the probability floor.
    pub fn pair_loss(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        let label = self.predict_class(x2)?;
        self.ce_loss(x1, label)
    }

    /// Exact gradient of the pair loss with respect to the selected side.
    ///
    /// `PairSide::First` differentiates `pair_loss(x1, x2)` in `x1`;
    /// `PairSide::Second` differentiates the mirrored `pair_loss(x2, x1)`
    /// in `x2`. In both cases the partner's hard label is a constant.
    pub fn pair_loss_grad(&self, x1: &[f64], x2: &[f64], side: PairSide) -> Result<Vec<f64>> {
        match side {
            PairSide::First => {
                let label = self.predict_class(x2)?;
                self.ce_input_grad(x1, label)
            }
            PairSide::Second => {
                let label = self.predict_class(x1)?;
                self.ce_input_grad(x2, label)
            }
        }
    }

    /// Central-difference gradient of the same directed loss that
    /// [`Network::pair_loss_grad`] differentiates. Test oracle: slow,
    /// independent of the backprop path.
    pub fn finite_diff_grad(
        &self,
        x1: &[f64],
        x2: &[f64],
        side: PairSide,
        h: f64,
    ) -> Result<Vec<f64>> {
        if h <= 0.0 {
            return Err(Error::InvalidConfig(format!("step h must be > 0, got {h}")));
        }
        let (moving, fixed) = match side {
            PairSide::First => (x1, x2),
            PairSide::Second => (x2, x1),
        };
        let mut grad = Vec::with_capacity(moving.len());
        let mut probe = moving.to_vec();
        for i in 0..moving.len() {
            probe[i] = moving[i] + h;
            let plus = self.pair_loss(&probe, fixed)?;
            probe[i] = moving[i] - h;
            let minus = self.pair_loss(&probe, fixed)?;
            probe[i] = moving[i];
            grad.push((plus - minus) / (2.0 * h));
        }
        Ok(grad)
    }

    /// Shared backward pass for input and parameter gradients of `ce_loss`.
    pub(crate) fn backprop(&self, x: &[f64], label: usize, want_params: bool) -> Result<Backprop> {
        let trace = self.forward(x)?;
        if label >= self.num_classes() {
            return Err(Error::Shape(format!(
                "label {} out of range for {} classes",
                label,
                self.num_classes()
            )));
        }
        let p_label = trace.probabilities[label];
        let loss = -floor_prob(p_label).ln();

        let mut weight_grads = Vec::new();
        let mut bias_grads = Vec::new();
        if want_params {
            for layer in &self.layers {
                weight_grads.push(vec![0.0; layer.weights.len()]);
                bias_grads.push(vec![0.0; layer.out_dim]);
            }
        }

        // On the probability floor the clamped loss is locally constant.
        if p_label <= PROB_FLOOR {
            return Ok(Backprop {
                loss,
                input_grad: vec![0.0; self.input_dim],
                weight_grads,
                bias_grads,
            });
        }

        // d loss / d logits for softmax cross-entropy.
        let mut d_post = trace.probabilities.clone();
        d_post[label] -= 1.0;

        for (li, layer) in self.layers.iter().enumerate().rev() {
            let pre = &trace.pre_activations[li];
            let d_pre: Vec<f64> = d_post
                .iter()
                .zip(pre)
                .map(|(&d, &z)| d * layer.activation.derivative(z))
                .collect();

            let layer_input: &[f64] = if li == 0 {
                x
            } else {
                &trace.post_activations[li - 1]
            };

            if want_params {
                for o in 0..layer.out_dim {
                    bias_grads[li][o] += d_pre[o];
                    let row = o * layer.in_dim;
                    for (i, &inp) in layer_input.iter().enumerate() {
                        weight_grads[li][row + i] += d_pre[o] * inp;
                    }
                }
            }

            let mut d_input = vec![0.0; layer.in_dim];
            for (row, &dp) in layer.weights.chunks_exact(layer.in_dim).zip(&d_pre) {
                for (i, &w) in row.iter().enumerate() {
                    d_input[i] += w * dp;
                }
            }
            d_post = d_input;
        }

        Ok(Backprop {
            loss,
            input_grad: d_post,
            weight_grads,
            bias_grads,
        })
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }
}

pub(crate) struct Backprop {
    pub loss: f64,
    pub input_grad: Vec<f64>,
    pub weight_grads: Vec<Vec<f64>>,
    pub bias_grads: Vec<Vec<f64>>,
}

impl DenseLayer {
    pub(crate) fn sgd_step(&mut self, d_weights: &[f64], d_bias: &[f64], lr: f64) {
        for (w, &dw) in self.weights.iter_mut().zip(d_weights) {
            *w -= lr * dw;
        }
        for (b, &db) in self.bias.iter_mut().zip(d_bias) {
            *b -= lr * db;
        }
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &val) in v.iter().enumerate().skip(1) {
        if val > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    fn single_layer(weights: Vec<f64>, bias: Vec<f64>, in_dim: usize, out_dim: usize) -> Network {
        let layer = DenseLayer::new(in_dim, out_dim, weights, bias, Activation::Identity).unwrap();
        Network::new(in_dim, names(out_dim), vec![layer]).unwrap()
    }

    fn zero_net(dim: usize, classes: usize) -> Network {
        single_layer(vec![0.0; dim * classes], vec![0.0; classes], dim, classes)
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn identity_layer_passes_logits_through() {
        let net = single_layer(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2);
        let trace = net.forward(&[0.3, 0.7]).unwrap();
        assert_eq!(trace.logits, vec![0.3, 0.7]);
    }

    #[test]
    fn zero_weights_give_uniform_probabilities() {
        let net = zero_net(2, 5);
        let trace = net.forward(&[0.9, 0.1]).unwrap();
        for p in &trace.probabilities {
            assert_close(*p, 0.2, 1e-15);
        }
        assert_eq!(net.predict_class(&[0.5, 0.5]).unwrap(), 0);
    }

    #[test]
    fn two_layer_relu_hand_evaluation() {
        // W1 = [[1,-1],[0.5,2]], b1 = (0,-0.25), relu
        // W2 = [[1,0.5],[-1,1]], b2 = (0.1,-0.1), identity
        // x = (1,0): pre1 = (1, 0.25), post1 = (1, 0.25)
        //            logits = (1 + 0.125 + 0.1, -1 + 0.25 - 0.1) = (1.225, -0.85)
        let l1 = DenseLayer::new(
            2,
            2,
            vec![1.0, -1.0, 0.5, 2.0],
            vec![0.0, -0.25],
            Activation::Relu,
        )
        .unwrap();
        let l2 = DenseLayer::new(
            2,
            2,
            vec![1.0, 0.5, -1.0, 1.0],
            vec![0.1, -0.1],
            Activation::Identity,
        )
        .unwrap();
        let net = Network::new(2, names(2), vec![l1, l2]).unwrap();
        let trace = net.forward(&[1.0, 0.0]).unwrap();
        assert_close(trace.logits[0], 1.225, 1e-15);
        assert_close(trace.logits[1], -0.85, 1e-15);
    }

    #[test]
    fn forward_rejects_bad_inputs() {
        let net = zero_net(2, 2);
        assert!(matches!(net.forward(&[0.1]), Err(Error::Shape(_))));
        assert!(matches!(
            net.forward(&[0.1, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn predict_class_prefers_larger_logit() {
        let net = single_layer(vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 2, 2);
        assert_eq!(net.predict_class(&[0.1, 0.9]).unwrap(), 1);
    }

    #[test]
    fn pair_loss_of_zero_net_is_ln_c() {
        let net = zero_net(2, 11);
        let loss = net.pair_loss(&[0.2, 0.8], &[0.6, 0.1]).unwrap();
        assert_close(loss, (11.0f64).ln(), 1e-12);
        assert_close(loss, 2.3978952727983707, 1e-12);
    }

    #[test]
    fn pair_loss_vanishes_when_saturated_and_agreeing() {
        // logits (40, 0) at x = (1, 0): probability of class 0 is 1 - ~4e-18.
        let net = single_layer(vec![40.0, 0.0, 0.0, 0.0], vec![0.0, 0.0], 2, 2);
        let x = [1.0, 0.0];
        let loss = net.pair_loss(&x, &x).unwrap();
        assert!(loss <= 1e-8, "loss = {loss}");
    }

    #[test]
    fn pair_loss_hand_value_two_class_linear() {
        // logits(x1) = (2, 0), partner predicted class 1:
        // loss = -ln(e^0 / (e^2 + e^0)) = ln(1 + e^2)
        let net = single_layer(vec![2.0, 0.0, 0.0, 3.0], vec![0.0, 0.0], 2, 2);
        let x1 = [1.0, 0.0];
        let x2 = [0.0, 1.0];
        assert_eq!(net.predict_class(&x2).unwrap(), 1);
        let loss = net.pair_loss(&x1, &x2).unwrap();
        assert_close(loss, (1.0 + 2.0f64.exp()).ln(), 1e-12);
        assert_close(loss, 2.126928011042972, 1e-12);
    }

    #[test]
    fn zero_net_has_zero_gradient() {
        let net = zero_net(3, 4);
        let g = net
            .pair_loss_grad(&[0.1, 0.2, 0.3], &[0.4, 0.5, 0.6], PairSide::First)
            .unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_net_gradient_matches_closed_form() {
        // One identity layer: grad_x = W^T (softmax(Wx + b) - onehot(label)).
        let w = vec![0.7, -0.3, 0.2, 0.9, -0.5, 0.4];
        let b = vec![0.05, -0.02];
        let net = single_layer(w.clone(), b, 3, 2);
        let x1 = [0.3, 0.6, 0.1];
        let x2 = [0.9, 0.2, 0.8];
        let label = net.predict_class(&x2).unwrap();
        let trace = net.forward(&x1).unwrap();
        let mut delta = trace.probabilities.clone();
        delta[label] -= 1.0;
        let mut expected = vec![0.0; 3];
        for o in 0..2 {
            for i in 0..3 {
                expected[i] += w[o * 3 + i] * delta[o];
            }
        }
        let got = net.pair_loss_grad(&x1, &x2, PairSide::First).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert_close(*g, *e, 1e-12);
        }
        let fd = net
            .finite_diff_grad(&x1, &x2, PairSide::First, 1e-4)
            .unwrap();
        for (g, e) in got.iter().zip(&fd) {
            assert_close(*g, *e, 1e-6);
        }
    }

    fn random_net(rng: &mut ChaCha8Rng) -> Network {
        let dim = rng.random_range(2..=8);
        let depth = rng.random_range(1..=3);
        let classes = rng.random_range(2..=6);
        let mut hidden = Vec::new();
        for _ in 0..depth - 1 {
            hidden.push(rng.random_range(2..=16));
        }
        Network::random(dim, &hidden, names(classes), rng.random::<u64>()).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences_both_sides() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let net = random_net(&mut rng);
            let dim = net.input_dim();
            let x1: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let x2: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            for side in [PairSide::First, PairSide::Second] {
                let grad = net.pair_loss_grad(&x1, &x2, side).unwrap();
                let fd = net.finite_diff_grad(&x1, &x2, side, 1e-4).unwrap();
                let scale = grad
                    .iter()
                    .chain(fd.iter())
                    .fold(1e-8f64, |m, &v| m.max(v.abs()));
                for (g, f) in grad.iter().zip(&fd) {
                    assert!(
                        (g - f).abs() / scale < 1e-4,
                        "grad {g} vs fd {f} (scale {scale})"
                    );
                }
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let net = random_net(&mut rng);
            let x: Vec<f64> = (0..net.input_dim()).map(|_| rng.random::<f64>()).collect();
            let trace = net.forward(&x).unwrap();
            let sum: f64 = trace.probabilities.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(trace.probabilities.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn network_shape_validation() {
        let l1 = DenseLayer::new(2, 3, vec![0.0; 6], vec![0.0; 3], Activation::Relu).unwrap();
        let l2 = DenseLayer::new(4, 2, vec![0.0; 8], vec![0.0; 2], Activation::Identity).unwrap();
        let err = Network::new(2, names(2), vec![l1, l2]).unwrap_err();
        assert!(err.to_string().contains("layer 1"));
    }
}
