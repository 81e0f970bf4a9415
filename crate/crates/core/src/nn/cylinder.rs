use rand::Rng;

use super::mlp::{Activation, Mlp, Trace};
use crate::error::{Error, Result};

/// Two-network baseline: `outer(mean_n inner(x_n))`.
///
/// Inputs are raw samples flattened row-major, `inner.input_size()` values
/// per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderNet {
    pub inner: Mlp,
    pub outer: Mlp,
}

impl CylinderNet {
    pub fn new(inner: Mlp, outer: Mlp) -> Result<Self> {
        if inner.output_size() != outer.input_size() {
            return Err(Error::Shape(format!(
                "inner network emits {} values, outer network takes {}",
                inner.output_size(),
                outer.input_size()
            )));
        }
        Ok(CylinderNet { inner, outer })
    }

    /// Inner `dim -> hidden... -> latent`, outer `latent -> hidden... -> output`.
    pub fn init<R: Rng + ?Sized>(
        dim: usize,
        inner_hidden: &[usize],
        latent: usize,
        outer_hidden: &[usize],
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let inner_sizes = [&[dim][..], inner_hidden, &[latent]].concat();
        let outer_sizes = [&[latent][..], outer_hidden, &[output]].concat();
        let inner = Mlp::init(inner_sizes, activation, rng)?;
        let outer = Mlp::init(outer_sizes, activation, rng)?;
        CylinderNet::new(inner, outer)
    }

    pub fn dim(&self) -> usize {
        self.inner.input_size()
    }

    pub fn num_params(&self) -> usize {
        self.inner.num_params() + self.outer.num_params()
    }

    fn rows<'a>(&self, samples: &'a [f64]) -> Result<std::slice::ChunksExact<'a, f64>> {
        let d = self.dim();
        if samples.is_empty() || !samples.len().is_multiple_of(d) {
            return Err(Error::Shape(format!(
                "{} values do not form a nonempty batch of {d}-dimensional samples",
                samples.len()
            )));
        }
        Ok(samples.chunks_exact(d))
    }

    /// Mean of the inner network over the samples, summed in sample order.
    pub fn pooled(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let rows = self.rows(samples)?;
        let n = rows.len() as f64;
        let mut trace = Trace::default();
        let mut sum = vec![0.0; self.inner.output_size()];
        for row in rows {
            for (s, v) in sum.iter_mut().zip(self.inner.forward_traced(row, &mut trace)) {
                *s += v;
            }
        }
        Ok(sum.into_iter().map(|s| s / n).collect())
    }

    pub fn forward(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.outer.forward(&self.pooled(samples)?)
    }

    /// Forward and backward for one batch. `d_loss` maps the network output to
    /// `d loss / d output`; gradients are accumulated into `grad` laid out as
    /// inner parameters followed by outer parameters. Returns the output.
    pub(crate) fn accumulate_grad(
        &self,
        samples: &[f64],
        d_loss: impl FnOnce(&[f64]) -> Vec<f64>,
        grad: &mut [f64],
    ) -> Result<Vec<f64>> {
        let pooled = self.pooled(samples)?;
        let (g_inner, g_outer) = grad.split_at_mut(self.inner.num_params());
        let mut trace = Trace::default();
        let out = self.outer.forward_traced(&pooled, &mut trace).to_vec();
        let d_out = d_loss(&out);
        let mut d_pooled = vec![0.0; pooled.len()];
        self.outer.backward(&mut trace, &d_out, g_outer, Some(&mut d_pooled));
        let rows = self.rows(samples)?;
        let n = rows.len() as f64;
        // every sample contributes 1/N of the pooled vector
        let d_each: Vec<f64> = d_pooled.iter().map(|g| g / n).collect();
        for row in rows {
            self.inner.forward_traced(row, &mut trace);
            self.inner.backward(&mut trace, &d_each, g_inner, None);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    #[test]
    fn single_sample_is_composition() {
        let net = CylinderNet::init(2, &[5, 5], 4, &[3], 1, Activation::Tanh, &mut StreamKey::new(1).rng()).unwrap();
        let x = [0.3, -1.2];
        let direct = net.outer.forward(&net.inner.forward(&x).unwrap()).unwrap();
        assert_eq!(net.forward(&x).unwrap(), direct);
    }

    #[test]
    fn permutation_invariant() {
        let net = CylinderNet::init(1, &[6, 6, 6], 5, &[6, 6], 1, Activation::Relu, &mut StreamKey::new(2).rng()).unwrap();
        let xs = [0.5, -1.0, 1.5, 0.25, -0.75, 2.0, 0.0, 1.0];
        let mut ys = xs;
        ys.reverse();
        ys.swap(1, 5);
        // sums of the same terms in a different order may differ in the last bit
        let (a, b) = (net.forward(&xs).unwrap()[0], net.forward(&ys).unwrap()[0]);
        assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        let mut sorted_x = xs;
        sorted_x.sort_by(f64::total_cmp);
        let mut sorted_y = ys;
        sorted_y.sort_by(f64::total_cmp);
        assert_eq!(net.forward(&sorted_x).unwrap(), net.forward(&sorted_y).unwrap());
    }

    #[test]
    fn identity_inner_gives_sample_mean() {
        // inner: x -> relu(x) - relu(-x) = x, written as a 1-2-1 network
        let inner = Mlp::from_params(vec![1, 2, 1], Activation::Relu, vec![1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 0.0]).unwrap();
        // outer: relu(p), the identity for the positive mean used here
        let outer = Mlp::from_params(vec![1, 1, 1], Activation::Relu, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let net = CylinderNet::new(inner, outer).unwrap();
        let xs = [0.5, 1.5, -0.25, 2.25];
        let mean = xs.iter().sum::<f64>() / 4.0;
        assert!((net.forward(&xs).unwrap()[0] - mean).abs() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        let net = CylinderNet::init(2, &[3], 3, &[3], 1, Activation::Relu, &mut StreamKey::new(3).rng()).unwrap();
        assert!(net.forward(&[1.0, 2.0, 3.0]).is_err());
        assert!(net.forward(&[]).is_err());
        let a = Mlp::zeros(vec![1, 2, 3], Activation::Relu).unwrap();
        let b = Mlp::zeros(vec![2, 2, 1], Activation::Relu).unwrap();
        assert!(CylinderNet::new(a, b).is_err());
    }
}
