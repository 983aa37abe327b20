//! Single-quantum relaxation channels of a fermionic bath.
//!
//! Each spin relaxes on the two transitions in which it flips while its partner stays
//! fixed, giving four links and eight jump operators. Zero- and double-quantum channels
//! are not modelled.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::system::{BasisOrdering, Level, Operator, Species, SpinSystemConfig, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Towards higher energy (absorbing from the bath).
    Up,
    Down,
}

/// Jump operator `√(g·p) |to⟩⟨from|`, entries in √(rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub matrix: Operator,
    pub from: Level,
    pub to: Level,
    pub direction: Direction,
    pub species: Species,
    pub rate: f64,
    pub probability: f64,
}

impl JumpOperator {
    pub fn weight(&self) -> f64 {
        (self.rate * self.probability).sqrt()
    }
}

/// Fermionic-bath transition probabilities `(p_up, p_down)` with
/// `p_up = 1/(e^{4ε} + 1)`.
pub fn fermionic_probabilities(epsilon: f64) -> (f64, f64) {
    let p_up = 1.0 / ((4.0 * epsilon).exp() + 1.0);
    (p_up, 1.0 - p_up)
}

/// `g = 2π/T₁` in rad/s.
pub fn transition_rate(t1: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::InvalidConfig(format!("T1 must be > 0, got {t1}")));
    }
    Ok(2.0 * PI / t1)
}

fn single_entry(to: Level, from: Level, value: f64) -> Operator {
    let mut m = Operator::zeros();
    m[(to.index(), from.index())] = C64::new(value, 0.0);
    m
}

/// The eight single-quantum jump operators, ordered P links before F links with the
/// upward operator of each link followed by its downward partner.
pub fn build_jump_operators(
    config: &SpinSystemConfig,
    ordering: &BasisOrdering,
) -> Result<Vec<JumpOperator>> {
    config.validate()?;
    let mut ops = Vec::with_capacity(8);
    for (species, t1, eps) in [
        (Species::P, config.t1_p, config.epsilon_p),
        (Species::F, config.t1_f, config.epsilon_f),
    ] {
        let g = transition_rate(t1)?;
        let (p_up, p_down) = fermionic_probabilities(eps);
        for partner in [-0.5, 0.5] {
            // m = +1/2 is the low-energy orientation, flipping to -1/2 goes up
            let (lower, upper) = match species {
                Species::P => (ordering.level_of(0.5, partner), ordering.level_of(-0.5, partner)),
                Species::F => (ordering.level_of(partner, 0.5), ordering.level_of(partner, -0.5)),
            };
            for (direction, from, to, p) in [
                (Direction::Up, lower, upper, p_up),
                (Direction::Down, upper, lower, p_down),
            ] {
                ops.push(JumpOperator {
                    matrix: single_entry(to, from, (g * p).sqrt()),
                    from,
                    to,
                    direction,
                    species,
                    rate: g,
                    probability: p,
                });
            }
        }
    }
    Ok(ops)
}
