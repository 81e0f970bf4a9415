//! Feed-forward approximators, backpropagation and ADAM.

mod adam;
mod cylinder;
mod io;
mod mlp;

pub use adam::AdamState;
pub use cylinder::CylinderNet;
pub use mlp::{Activation, Mlp, Trace};

use crate::error::{Error, Result};

/// Either a dense network on feature vectors or the cylinder network on raw samples.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Mlp(Mlp),
    Cylinder(CylinderNet),
}

impl Model {
    pub fn num_params(&self) -> usize {
        match self {
            Model::Mlp(m) => m.num_params(),
            Model::Cylinder(c) => c.num_params(),
        }
    }

    pub fn output_size(&self) -> usize {
        match self {
            Model::Mlp(m) => m.output_size(),
            Model::Cylinder(c) => c.outer.output_size(),
        }
    }

    /// All parameters, in gradient order.
    pub fn param_vec(&self) -> Vec<f64> {
        match self {
            Model::Mlp(m) => m.params().to_vec(),
            Model::Cylinder(c) => [c.inner.params(), c.outer.params()].concat(),
        }
    }

    fn param_mut(&mut self, i: usize) -> &mut f64 {
        match self {
            Model::Mlp(m) => &mut m.params_mut()[i],
            Model::Cylinder(c) => {
                let n = c.inner.num_params();
                if i < n {
                    &mut c.inner.params_mut()[i]
                } else {
                    &mut c.outer.params_mut()[i - n]
                }
            }
        }
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Mlp(m) => m.forward(input),
            Model::Cylinder(c) => c.forward(input),
        }
    }

    /// One ADAM update with gradient `grads` (laid out as [`Model::param_vec`]).
    pub fn adam_step(&mut self, adam: &mut AdamState, grads: &[f64]) {
        match self {
            Model::Mlp(m) => adam.step(m.params_mut(), grads),
            Model::Cylinder(c) => adam.step_chunks([c.inner.params_mut(), c.outer.params_mut()], grads),
        }
    }

    /// Mean squared error `(1/M) Σ_m |y_m - Φ(x_m)|²` over `M` inputs and its
    /// gradient. `labels` holds `M` rows of the output size, flattened.
    /// Per-example terms are summed in input order.
    pub fn loss_and_grad<I: AsRef<[f64]>>(&self, inputs: &[I], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
        let p = self.output_size();
        let m = inputs.len();
        if m == 0 || labels.len() != m * p {
            return Err(Error::Shape(format!(
                "{m} inputs with {} label values for output size {p}",
                labels.len()
            )));
        }
        let scale = 2.0 / m as f64;
        let mut grad = vec![0.0; self.num_params()];
        let mut loss = 0.0;
        let mut trace = Trace::default();
        for (x, y) in inputs.iter().zip(labels.chunks_exact(p)) {
            let x = x.as_ref();
            let mut sq = 0.0;
            let mut d_loss = |out: &[f64]| -> Vec<f64> {
                out.iter()
                    .zip(y)
                    .map(|(o, t)| {
                        sq += (o - t) * (o - t);
                        scale * (o - t)
                    })
                    .collect()
            };
            match self {
                Model::Mlp(net) => {
                    if x.len() != net.input_size() {
                        return Err(Error::Shape(format!(
                            "input has length {}, network expects {}",
                            x.len(),
                            net.input_size()
                        )));
                    }
                    let out = net.forward_traced(x, &mut trace).to_vec();
                    let d_out = d_loss(&out);
                    net.backward(&mut trace, &d_out, &mut grad, None);
                }
                Model::Cylinder(net) => {
                    net.accumulate_grad(x, d_loss, &mut grad)?;
                }
            }
            loss += sq;
        }
        Ok((loss / m as f64, grad))
    }

    pub fn loss<I: AsRef<[f64]>>(&self, inputs: &[I], labels: &[f64]) -> Result<f64> {
        let p = self.output_size();
        if inputs.is_empty() || labels.len() != inputs.len() * p {
            return Err(Error::Shape("inputs and labels disagree".into()));
        }
        let mut total = 0.0;
        for (x, y) in inputs.iter().zip(labels.chunks_exact(p)) {
            let out = self.predict(x.as_ref())?;
            total += out.iter().zip(y).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
        }
        Ok(total / inputs.len() as f64)
    }
}

/// Worst relative error between `analytic` and central differences of the
/// loss on one example, with denominator `max(|a|, |b|, 1e-8)`.
pub fn grad_check_against(model: &Model, input: &[f64], label: &[f64], eps: f64, analytic: &[f64]) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("step {eps} must be positive")));
    }
    if analytic.len() != model.num_params() {
        return Err(Error::Shape("analytic gradient has the wrong length".into()));
    }
    let inputs = [input];
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let orig = *probe.param_mut(i);
        *probe.param_mut(i) = orig + eps;
        let up = probe.loss(&inputs, label)?;
        *probe.param_mut(i) = orig - eps;
        let down = probe.loss(&inputs, label)?;
        *probe.param_mut(i) = orig;
        let fd = (up - down) / (2.0 * eps);
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

pub fn grad_check(model: &Model, input: &[f64], label: &[f64], eps: f64) -> Result<f64> {
    let (_, grad) = model.loss_and_grad(&[input], label)?;
    grad_check_against(model, input, label, eps, &grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use rand::Rng;

    fn random_input(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = StreamKey::new(seed).rng();
        (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()
    }

    #[test]
    fn perfect_fit_has_zero_loss_and_gradient() {
        let m = Model::Mlp(Mlp::init(vec![3, 5, 1], Activation::Tanh, &mut StreamKey::new(1).rng()).unwrap());
        let xs = [random_input(3, 2), random_input(3, 3)];
        let ys: Vec<f64> = xs.iter().map(|x| m.predict(x).unwrap()[0]).collect();
        let (loss, grad) = m.loss_and_grad(&xs, &ys).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_model_loss_is_label_squared() {
        let m = Model::Mlp(Mlp::zeros(vec![2, 3, 1], Activation::Relu).unwrap());
        let (loss, _) = m.loss_and_grad(&[[0.4, 0.1]], &[-1.5]).unwrap();
        assert_eq!(loss, 2.25);
    }

    #[test]
    fn shape_mismatch() {
        let m = Model::Mlp(Mlp::zeros(vec![2, 3, 1], Activation::Relu).unwrap());
        assert!(m.loss_and_grad(&[[0.4, 0.1]], &[1.0, 2.0]).is_err());
        assert!(m.loss_and_grad(&[[0.4]], &[1.0]).is_err());
        let empty: [[f64; 2]; 0] = [];
        assert!(m.loss_and_grad(&empty, &[]).is_err());
    }

    #[test]
    fn finite_differences_relu() {
        let mut rng = StreamKey::new(4).rng();
        let mlp = Mlp::init(vec![4, 8, 8, 1], Activation::Relu, &mut rng).unwrap();
        let mut seed = 10;
        let x = loop {
            let x = random_input(4, seed);
            if mlp.min_abs_preactivation(&x) > 1e-3 {
                break x;
            }
            seed += 1;
        };
        let err = grad_check(&Model::Mlp(mlp), &x, &[0.7], 1e-5).unwrap();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn finite_differences_tanh() {
        let mlp = Mlp::init(vec![3, 6, 6, 2], Activation::Tanh, &mut StreamKey::new(5).rng()).unwrap();
        let err = grad_check(&Model::Mlp(mlp), &random_input(3, 6), &[0.3, -0.2], 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn finite_differences_linear_path() {
        // all hidden units active: the loss is quadratic in the output layer
        let mut mlp = Mlp::init(vec![2, 3, 1], Activation::Relu, &mut StreamKey::new(7).rng()).unwrap();
        for w in mlp.layer_mut(0).0.iter_mut() {
            *w = w.abs();
        }
        for b in mlp.layer_mut(0).1.iter_mut() {
            *b = 1.0;
        }
        let err = grad_check(&Model::Mlp(mlp), &[0.5, 0.25], &[1.0], 1e-4).unwrap();
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn finite_differences_cylinder() {
        let net = CylinderNet::init(2, &[5, 5, 5], 4, &[5, 5], 1, Activation::Tanh, &mut StreamKey::new(8).rng()).unwrap();
        let samples = random_input(2 * 7, 9);
        let err = grad_check(&Model::Cylinder(net), &samples, &[0.4], 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let m = Model::Mlp(Mlp::init(vec![3, 6, 1], Activation::Tanh, &mut StreamKey::new(10).rng()).unwrap());
        let x = random_input(3, 11);
        let (_, mut g) = m.loss_and_grad(&[&x], &[0.5]).unwrap();
        g[2] *= 1.5;
        assert!(grad_check_against(&m, &x, &[0.5], 1e-5, &g).unwrap() > 0.1);
        assert!(grad_check_against(&m, &x, &[0.5], 0.0, &g).is_err());
    }

    #[test]
    fn training_reduces_loss() {
        let mut rng = StreamKey::new(12).rng();
        let mut m = Model::Mlp(Mlp::init(vec![1, 10, 1], Activation::Tanh, &mut rng).unwrap());
        let xs: Vec<[f64; 1]> = (0..16).map(|i| [i as f64 / 8.0 - 1.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * x[0]).collect();
        let mut adam = AdamState::new(m.num_params(), 1e-2);
        let first = m.loss(&xs, &ys).unwrap();
        for _ in 0..300 {
            let (_, g) = m.loss_and_grad(&xs, &ys).unwrap();
            m.adam_step(&mut adam, &g);
        }
        assert!(m.loss(&xs, &ys).unwrap() < 0.1 * first);
    }
}
