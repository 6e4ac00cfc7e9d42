//! Full description of one network realisation law: geometry, propagation,
//! link budget, association and antennas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::PropagationParams;
use crate::tradeoff::LinkBudget;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    pub propagation: PropagationParams,
    pub budget: LinkBudget,
    pub hit_probability: f64,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
}

impl Default for NetworkScenario {
    fn default() -> Self {
        Self {
            propagation: PropagationParams::default(),
            budget: LinkBudget::default(),
            hit_probability: 0.7,
            tx_antennas: 4,
            rx_antennas: 2,
        }
    }
}

impl NetworkScenario {
    pub fn with_hit_probability(mut self, q_hit: f64) -> Self {
        self.hit_probability = q_hit;
        self
    }

    pub fn with_ph_spacing(mut self, spacing: f64) -> Self {
        self.propagation.ph_density = crate::propagation::density_from_spacing(spacing);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.propagation.validate()?;
        self.budget.validate()?;
        if !(0.0..=1.0).contains(&self.hit_probability) {
            return Err(Error::Domain(format!(
                "hit probability must lie in [0, 1], got {}",
                self.hit_probability
            )));
        }
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::Domain("antenna counts must be positive".into()));
        }
        Ok(())
    }
}
