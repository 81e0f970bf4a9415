/// ADAM optimizer state with bias-corrected moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(num_params: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn num_params(&self) -> usize {
        self.m.len()
    }

    /// One update of the parameters, split into consecutive chunks whose
    /// total length equals `grads.len()`.
    pub fn step_chunks<'a>(&mut self, chunks: impl IntoIterator<Item = &'a mut [f64]>, grads: &[f64]) {
        assert_eq!(grads.len(), self.m.len(), "gradient length must match the optimizer");
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let mut i = 0;
        for chunk in chunks {
            for p in chunk.iter_mut() {
                let g = grads[i];
                let m = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
                let v = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
                self.m[i] = m;
                self.v[i] = v;
                *p -= self.lr * (m / c1) / ((v / c2).sqrt() + self.eps);
                i += 1;
            }
        }
        assert_eq!(i, grads.len(), "parameter chunks do not cover the gradient");
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.step_chunks(std::iter::once(params), grads);
    }
}
