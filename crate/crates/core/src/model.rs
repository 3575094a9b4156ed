//! Conservation-law models: flux, wave speeds, entropies, phase-space box.

use crate::scalar::Real;
use crate::state::StateVec;

#[derive(Clone, Debug)]
enum ModelKind<S> {
    Burgers,
    IsentropicEuler { gamma: S, kappa: S },
    DiscontinuousFlux,
}

/// One conservation law: flux `f(u; x)`, spectral radius of `Df`, and the
/// phase-space box the closure discretizes.
#[derive(Clone, Debug)]
pub struct ModelSpec<S> {
    kind: ModelKind<S>,
    name: &'static str,
    dim: usize,
    phase_lo: StateVec<S>,
    phase_hi: StateVec<S>,
}

impl<S: Real> ModelSpec<S> {
    /// Burgers equation, `f(u) = u^2 / 2`.
    pub fn burgers() -> Self {
        Self {
            kind: ModelKind::Burgers,
            name: "burgers",
            dim: 1,
            phase_lo: StateVec::scalar(S::lit(-5.0)),
            phase_hi: StateVec::scalar(S::lit(5.0)),
        }
    }

    /// Isentropic Euler system in `(rho, q)` with pressure `p = kappa rho^gamma`.
    pub fn isentropic_euler(gamma: S, kappa: S) -> Self {
        assert!(gamma > S::one(), "need gamma > 1");
        assert!(kappa > S::zero(), "need kappa > 0");
        Self {
            kind: ModelKind::IsentropicEuler { gamma, kappa },
            name: "euler",
            dim: 2,
            phase_lo: StateVec::pair(S::lit(0.05), S::lit(-1.0)),
            phase_hi: StateVec::pair(S::lit(2.5), S::lit(1.5)),
        }
    }

    /// Scalar law with a flux that jumps across x = 0:
    /// `F(u; x) = u(1-u)` for x < 0 and `1.1 u(1-u)` for x >= 0 (H(0) = 1).
    pub fn discontinuous_flux() -> Self {
        Self {
            kind: ModelKind::DiscontinuousFlux,
            name: "dflux",
            dim: 1,
            phase_lo: StateVec::scalar(S::lit(-1.0)),
            phase_hi: StateVec::scalar(S::lit(1.0)),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phase_lo(&self) -> StateVec<S> {
        self.phase_lo
    }

    pub fn phase_hi(&self) -> StateVec<S> {
        self.phase_hi
    }

    pub fn with_phase_box(mut self, lo: StateVec<S>, hi: StateVec<S>) -> Self {
        assert_eq!(lo.dim(), self.dim);
        assert_eq!(hi.dim(), self.dim);
        if let ModelKind::IsentropicEuler { .. } = self.kind {
            assert!(lo[0] > S::zero(), "Euler phase box must exclude vacuum");
        }
        self.phase_lo = lo;
        self.phase_hi = hi;
        self
    }

    pub fn flux(&self, u: StateVec<S>, x: S) -> StateVec<S> {
        match &self.kind {
            ModelKind::Burgers => StateVec::scalar(S::half() * u.value() * u.value()),
            ModelKind::IsentropicEuler { gamma, kappa } => {
                let (rho, q) = (u[0], u[1]);
                debug_assert!(rho > S::zero(), "Euler flux needs rho > 0");
                StateVec::pair(q, q * q / rho + *kappa * rho.powf(*gamma))
            }
            ModelKind::DiscontinuousFlux => {
                let v = u.value();
                let g = v * (S::one() - v);
                StateVec::scalar(if x < S::zero() { g } else { S::lit(1.1) * g })
            }
        }
    }

    /// Largest |eigenvalue| of `Df(u)`; for the discontinuous-flux model the
    /// max over both branches.
    pub fn spectral_radius(&self, u: StateVec<S>) -> S {
        match &self.kind {
            ModelKind::Burgers => u.value().abs(),
            ModelKind::IsentropicEuler { gamma, kappa } => {
                let (rho, q) = (u[0], u[1]);
                debug_assert!(rho > S::zero(), "Euler wave speeds need rho > 0");
                let c = (*kappa * *gamma * rho.powf(*gamma - S::one())).sqrt();
                let v = q / rho;
                (v + c).abs().max((v - c).abs())
            }
            ModelKind::DiscontinuousFlux => {
                let s = (S::one() - S::two() * u.value()).abs();
                S::lit(1.1) * s
            }
        }
    }

    /// Number of distinct flux branches in x (1 unless the flux jumps).
    pub fn flux_branches(&self) -> usize {
        match self.kind {
            ModelKind::DiscontinuousFlux => 2,
            _ => 1,
        }
    }

    pub fn flux_branch_of(&self, x: S) -> usize {
        match self.kind {
            ModelKind::DiscontinuousFlux => usize::from(x >= S::zero()),
            _ => 0,
        }
    }

    /// Representative position inside branch `b`.
    pub fn branch_position(&self, b: usize) -> S {
        match self.kind {
            ModelKind::DiscontinuousFlux => {
                if b == 0 {
                    -S::one()
                } else {
                    S::one()
                }
            }
            _ => S::zero(),
        }
    }

    /// Entropy matching this model in the paper's experiments.
    pub fn default_entropy(&self) -> EntropyChoice<S> {
        match &self.kind {
            ModelKind::IsentropicEuler { gamma, kappa } => {
                EntropyChoice::KineticEuler { gamma: *gamma, kappa: *kappa }
            }
            _ => EntropyChoice::Quadratic,
        }
    }
}

/// Objective of the closure LP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyChoice<S> {
    /// `u^2 / 2` (scalar laws).
    Quadratic,
    /// `q^2 / (2 rho) + kappa rho^gamma / (gamma - 1)`.
    KineticEuler { gamma: S, kappa: S },
    /// `|u - c|` (scalar laws; convex, not strictly).
    ShiftedAbs { c: S },
    /// Constant 1: feasibility only, no entropy selection.
    Unit,
}

impl<S: Real> EntropyChoice<S> {
    pub fn eval(&self, u: StateVec<S>) -> S {
        match self {
            EntropyChoice::Quadratic => S::half() * u.value() * u.value(),
            EntropyChoice::KineticEuler { gamma, kappa } => {
                let (rho, q) = (u[0], u[1]);
                S::half() * q * q / rho + *kappa * rho.powf(*gamma) / (*gamma - S::one())
            }
            EntropyChoice::ShiftedAbs { c } => (u.value() - *c).abs(),
            EntropyChoice::Unit => S::one(),
        }
    }

    /// Checks the entropy is usable with the model (dimension, shift inside
    /// the phase box).
    pub fn validate(&self, model: &ModelSpec<S>) -> Result<(), String> {
        match self {
            EntropyChoice::Quadratic | EntropyChoice::ShiftedAbs { .. } if model.dim() != 1 => {
                Err(format!("entropy {self:?} is for scalar laws, model has n = {}", model.dim()))
            }
            EntropyChoice::KineticEuler { .. } if model.dim() != 2 => {
                Err("kinetic Euler entropy needs a 2-component model".into())
            }
            EntropyChoice::ShiftedAbs { c } => {
                let lo = model.phase_lo().value();
                let hi = model.phase_hi().value();
                if *c < lo || *c > hi {
                    Err(format!("shift c = {c} lies outside the phase box [{lo}, {hi}]"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}
