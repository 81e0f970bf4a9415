use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            // subgradient at 0 is 0
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(format!("unknown activation `{other}`")),
        }
    }
}

/// Dense feed-forward network. Hidden layers use `activation`, the output
/// layer is affine.
///
/// Parameters live in one flat vector; layer `l` stores its weight matrix
/// `(sizes[l+1] x sizes[l])` row-major, followed by its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Per-layer activations kept from a forward pass, plus scratch for backprop.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    prev: Vec<f64>,
}

fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut off = 0;
    offsets.push(0);
    for w in sizes.windows(2) {
        off += w[0] * w[1] + w[1];
        offsets.push(off);
    }
    offsets
}

impl Mlp {
    /// Network with all parameters set to zero.
    pub fn zeros(sizes: Vec<usize>, activation: Activation) -> Result<Self> {
        if sizes.len() < 3 {
            return Err(Error::Shape(format!(
                "need input, at least one hidden layer and output, got sizes {sizes:?}"
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Shape(format!("zero-width layer in {sizes:?}")));
        }
        let offsets = layer_offsets(&sizes);
        let n = *offsets.last().unwrap();
        Ok(Mlp {
            sizes,
            activation,
            params: vec![0.0; n],
            offsets,
        })
    }

    /// Glorot-uniform weights `U(-sqrt(6/(fan_in+fan_out)), +...)`, zero biases.
    pub fn init<R: Rng + ?Sized>(sizes: Vec<usize>, activation: Activation, rng: &mut R) -> Result<Self> {
        let mut mlp = Mlp::zeros(sizes, activation)?;
        for l in 0..mlp.layers() {
            let (fan_in, fan_out) = (mlp.sizes[l], mlp.sizes[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let start = mlp.offsets[l];
            for w in &mut mlp.params[start..start + fan_in * fan_out] {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(mlp)
    }

    pub fn from_params(sizes: Vec<usize>, activation: Activation, params: Vec<f64>) -> Result<Self> {
        let mut mlp = Mlp::zeros(sizes, activation)?;
        if params.len() != mlp.params.len() {
            return Err(Error::Shape(format!(
                "{} parameters given, {} expected",
                params.len(),
                mlp.params.len()
            )));
        }
        mlp.params = params;
        Ok(mlp)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    /// Number of affine layers.
    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// `(weights, bias)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        self.params[start..start + o * i + o].split_at(o * i)
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (i, o) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offsets[l];
        self.params[start..start + o * i + o].split_at_mut(o * i)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_size() {
            return Err(Error::Shape(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.input_size()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut trace = Trace::default();
        Ok(self.forward_traced(x, &mut trace).to_vec())
    }

    /// Forward pass that keeps every layer's output in `trace`. Panics on a
    /// wrong input length.
    pub fn forward_traced<'t>(&self, x: &[f64], trace: &'t mut Trace) -> &'t [f64] {
        assert_eq!(x.len(), self.input_size());
        let layers = self.layers();
        trace.acts.resize_with(layers + 1, Vec::new);
        trace.acts[0].clear();
        trace.acts[0].extend_from_slice(x);
        for l in 0..layers {
            let (w, b) = self.layer(l);
            let n_in = self.sizes[l];
            let (before, after) = trace.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.clear();
            for (row, &bias) in w.chunks_exact(n_in).zip(b) {
                let z = bias + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                out.push(z);
            }
            if l + 1 < layers {
                for z in out.iter_mut() {
                    *z = self.activation.apply(*z);
                }
            }
        }
        &trace.acts[layers]
    }

    /// Accumulates `d loss / d params` into `grad` given `d loss / d output`
    /// for the pass recorded in `trace`. When `d_input` is given it receives
    /// `d loss / d input`.
    pub fn backward(&self, trace: &mut Trace, d_out: &[f64], grad: &mut [f64], mut d_input: Option<&mut [f64]>) {
        debug_assert_eq!(grad.len(), self.params.len());
        let layers = self.layers();
        let Trace { acts, delta, prev } = trace;
        delta.clear();
        delta.extend_from_slice(d_out);
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &acts[l];
            let start = self.offsets[l];
            let (gw, gb) = grad[start..start + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for ((g_row, g_b), &d) in gw.chunks_exact_mut(n_in).zip(gb.iter_mut()).zip(delta.iter()) {
                *g_b += d;
                if d != 0.0 {
                    for (g, &a) in g_row.iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
            }
            let need_prev = l > 0 || d_input.is_some();
            if !need_prev {
                break;
            }
            let (w, _) = self.layer(l);
            prev.clear();
            prev.resize(n_in, 0.0);
            for (row, &d) in w.chunks_exact(n_in).zip(delta.iter()) {
                if d != 0.0 {
                    for (p, &wi) in prev.iter_mut().zip(row) {
                        *p += wi * d;
                    }
                }
            }
            if l > 0 {
                for (p, &a) in prev.iter_mut().zip(input) {
                    *p *= self.activation.derivative_from_output(a);
                }
            } else if let Some(di) = d_input.as_deref_mut() {
                di.copy_from_slice(prev);
            }
            std::mem::swap(delta, prev);
        }
    }

    /// Smallest `|z|` over hidden pre-activations for input `x`; small values
    /// mean the input sits near a ReLU kink.
    pub fn min_abs_preactivation(&self, x: &[f64]) -> f64 {
        let mut input = x.to_vec();
        let mut smallest = f64::INFINITY;
        for l in 0..self.layers() - 1 {
            let (w, b) = self.layer(l);
            let z: Vec<f64> = w
                .chunks_exact(self.sizes[l])
                .zip(b)
                .map(|(row, &bias)| bias + row.iter().zip(&input).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            smallest = z.iter().fold(smallest, |m, v| m.min(v.abs()));
            input = z.into_iter().map(|v| self.activation.apply(v)).collect();
        }
        smallest
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn zero_network_outputs_zero() {
        let m = Mlp::zeros(vec![3, 4, 2], Activation::Relu).unwrap();
        assert_eq!(m.forward(&[1.0, -5.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn relu_kills_negative() {
        let m = Mlp::from_params(vec![1, 1, 1], Activation::Relu, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(m.forward(&[-3.0]).unwrap(), vec![0.0]);
        assert_eq!(m.forward(&[2.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn hand_evaluated_unit() {
        let m = Mlp::from_params(vec![1, 1, 1], Activation::Relu, vec![2.0, -1.0, 3.0, 0.5]).unwrap();
        assert_eq!(m.forward(&[1.0]).unwrap(), vec![3.5]);
    }

    #[test]
    fn shape_errors() {
        assert!(Mlp::zeros(vec![3, 1], Activation::Relu).is_err());
        assert!(Mlp::zeros(vec![3, 0, 1], Activation::Relu).is_err());
        let m = Mlp::zeros(vec![3, 4, 1], Activation::Tanh).unwrap();
        assert!(m.forward(&[1.0]).is_err());
        assert!(Mlp::from_params(vec![1, 1, 1], Activation::Relu, vec![0.0; 3]).is_err());
    }

    #[test]
    fn glorot_init() {
        let m = Mlp::init(vec![20, 20, 20, 1], Activation::Relu, &mut StreamKey::new(1).rng()).unwrap();
        let bound = (6.0f64 / 40.0).sqrt();
        assert!((bound - 0.387).abs() < 1e-3);
        let (w, b) = m.layer(1);
        assert!(w.iter().all(|x| x.abs() <= bound));
        assert!(w.iter().any(|x| x.abs() > 0.5 * bound));
        for l in 0..m.layers() {
            assert!(m.layer(l).1.iter().all(|&x| x == 0.0));
        }
        assert!(b.iter().all(|&x| x == 0.0));
        let again = Mlp::init(vec![20, 20, 20, 1], Activation::Relu, &mut StreamKey::new(1).rng()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn layout_sizes() {
        let m = Mlp::zeros(vec![5, 3, 2], Activation::Relu).unwrap();
        assert_eq!(m.num_params(), 5 * 3 + 3 + 3 * 2 + 2);
        assert_eq!(m.layer(1).0.len(), 6);
    }
}
