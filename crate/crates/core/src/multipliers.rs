use crate::instance::Instance;

/// Lagrangian prices: `epsilon[d]` per demand link (indexed like
/// `Instance::demands`) and `theta[k]` per candidate station.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub epsilon: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(inst: &Instance) -> Self {
        Self {
            epsilon: vec![0.0; inst.demands.len()],
            theta: vec![0.0; inst.stations.len()],
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.epsilon.iter().chain(&self.theta).all(|&x| x >= 0.0)
    }
}
