//! Transition costs `c(p)`, the entropy weight and the state coupling `F(i, θ)`.

use std::fmt;
use std::sync::Arc;

use crate::error::KernelError;
use crate::simplex::SimplexVector;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type CouplingFn = Arc<dyn Fn(usize, &SimplexVector) -> f64 + Send + Sync>;

/// Grid used to check convexity of `p c(p)` for custom costs.
const CONVEXITY_GRID: usize = 1000;

#[derive(Clone)]
pub enum TransitionCost {
    /// `c(p) = -(1 - p) / 2`.
    DefaultLinear,
    /// User supplied `c`, `c'` and optionally `(p c(p))''`.
    ///
    /// Without the curvature the row solver falls back to plain bisection.
    Custom {
        value: ScalarFn,
        derivative: ScalarFn,
        curvature: Option<ScalarFn>,
    },
}

impl TransitionCost {
    /// Builds a custom cost after checking that `p c(p)` is convex on `[0, 1]`.
    pub fn custom(
        value: ScalarFn,
        derivative: ScalarFn,
        curvature: Option<ScalarFn>,
    ) -> Result<Self, KernelError> {
        let h = 1.0 / CONVEXITY_GRID as f64;
        let pc = |p: f64| p * value(p);
        for step in 1..CONVEXITY_GRID {
            let p = step as f64 * h;
            let second = pc(p - h) - 2.0 * pc(p) + pc(p + h);
            if !second.is_finite() || second < -1e-9 {
                return Err(KernelError::InvalidCost(format!(
                    "p c(p) is not convex near p = {p}"
                )));
            }
            if !derivative(p).is_finite() {
                return Err(KernelError::InvalidCost(format!(
                    "c'(p) is not finite at p = {p}"
                )));
            }
        }
        Ok(TransitionCost::Custom {
            value,
            derivative,
            curvature,
        })
    }

    pub fn is_default(&self) -> bool {
        matches!(self, TransitionCost::DefaultLinear)
    }

    pub fn value(&self, p: f64) -> f64 {
        match self {
            TransitionCost::DefaultLinear => -(1.0 - p) / 2.0,
            TransitionCost::Custom { value, .. } => value(p),
        }
    }

    pub fn derivative(&self, p: f64) -> f64 {
        match self {
            TransitionCost::DefaultLinear => 0.5,
            TransitionCost::Custom { derivative, .. } => derivative(p),
        }
    }

    /// `d/dp [p c(p)] = c(p) + p c'(p)`.
    pub fn marginal(&self, p: f64) -> f64 {
        match self {
            TransitionCost::DefaultLinear => p - 0.5,
            _ => self.value(p) + p * self.derivative(p),
        }
    }

    /// `d²/dp² [p c(p)]` when known.
    pub fn marginal_slope(&self, p: f64) -> Option<f64> {
        match self {
            TransitionCost::DefaultLinear => Some(1.0),
            TransitionCost::Custom { curvature, .. } => curvature.as_ref().map(|f| f(p)),
        }
    }
}

impl fmt::Debug for TransitionCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionCost::DefaultLinear => f.write_str("DefaultLinear"),
            TransitionCost::Custom { curvature, .. } => f
                .debug_struct("Custom")
                .field("has_curvature", &curvature.is_some())
                .finish(),
        }
    }
}

#[derive(Clone)]
pub enum Coupling {
    /// `F(i, θ) = scale · |θ - T_i|²` with `T_i` the `i`-th simplex vertex.
    SquaredDistance { scale: f64 },
    Custom(CouplingFn),
}

impl Coupling {
    /// Default coupling: half the squared distance to the vertex.
    pub const fn half_squared_distance() -> Self {
        Coupling::SquaredDistance { scale: 0.5 }
    }

    pub fn evaluate(&self, state: usize, theta: &SimplexVector) -> f64 {
        match self {
            Coupling::SquaredDistance { scale } => {
                let dist: f64 = theta
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| {
                        let target = if j == state { 1.0 } else { 0.0 };
                        (t - target) * (t - target)
                    })
                    .sum();
                scale * dist
            }
            Coupling::Custom(f) => f(state, theta),
        }
    }
}

impl fmt::Debug for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::SquaredDistance { scale } => f
                .debug_struct("SquaredDistance")
                .field("scale", scale)
                .finish(),
            Coupling::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    DefaultLinear,
    Custom,
}

/// Everything that enters the running cost `c(P_ij) + ε log P_ij + F(i, θ)`.
#[derive(Debug, Clone)]
pub struct CostSpec {
    pub epsilon: f64,
    pub transition: TransitionCost,
    pub coupling: Coupling,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self::with_epsilon(0.05)
    }
}

impl CostSpec {
    /// Default linear cost and half squared-distance coupling.
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            transition: TransitionCost::DefaultLinear,
            coupling: Coupling::half_squared_distance(),
        }
    }

    pub fn cost_kind(&self) -> CostKind {
        if self.transition.is_default() {
            CostKind::DefaultLinear
        } else {
            CostKind::Custom
        }
    }

    /// `c(p) + ε log p`, with the `0 · log 0` convention left to the caller.
    pub fn entry_cost(&self, p: f64) -> f64 {
        let mut v = self.transition.value(p);
        if self.epsilon > 0.0 {
            v += self.epsilon * p.ln();
        }
        v
    }

    /// `∂/∂p [p (c(p) + ε log p)] = c(p) + p c'(p) + ε (log p + 1)`.
    pub fn entry_marginal(&self, p: f64) -> f64 {
        let mut v = self.transition.marginal(p);
        if self.epsilon > 0.0 {
            v += self.epsilon * (p.ln() + 1.0);
        }
        v
    }

    /// `F(i, θ)` for every state.
    pub fn coupling_vector(&self, theta: &SimplexVector) -> Vec<f64> {
        (0..theta.len())
            .map(|i| self.coupling.evaluate(i, theta))
            .collect()
    }

    /// Checks ε and spot-checks the coupling on a few simplex points of size `states`.
    pub fn validate(&self, states: usize) -> Result<(), KernelError> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(KernelError::InvalidCost(format!(
                "entropy weight must be a finite non-negative number, got {}",
                self.epsilon
            )));
        }
        if self.epsilon == 0.0 && !self.transition.is_default() {
            return Err(KernelError::UnsupportedCost);
        }
        let mut probes = vec![SimplexVector::uniform(states)];
        probes.extend((0..states).map(|i| SimplexVector::vertex(states, i)));
        for theta in &probes {
            for i in 0..states {
                if !self.coupling.evaluate(i, theta).is_finite() {
                    return Err(KernelError::InvalidCost(format!(
                        "coupling F({i}, θ) is not finite"
                    )));
                }
            }
        }
        Ok(())
    }
}
