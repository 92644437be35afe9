use super::network::{Gradients, QNetwork};

/// Adam optimizer state for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(net: &QNetwork, learning_rate: f64) -> Self {
        let n = net.param_count();
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let mut k = 0;
        for (layer, (gw, gb)) in net.layers_mut().iter_mut().zip(&grads.layers) {
            for (p, &g) in layer
                .weights
                .iter_mut()
                .chain(layer.bias.iter_mut())
                .zip(gw.iter().chain(gb))
            {
                self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
                self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
                let m_hat = self.m[k] / c1;
                let v_hat = self.v[k] / c2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                k += 1;
            }
        }
    }
}
