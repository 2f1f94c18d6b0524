//! Simulation of multi-point wireless energy transmission with carrier
//! shift diversity feeding battery-less, duty-cycled sensor nodes.
//!
//! The models are generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`). The aliases at the crate root fix the scalar to `f64`,
//! which is what the tooling built on top of this crate uses.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod error;
pub mod node;
pub mod presets;
pub mod propagation;
pub mod rectifier;
pub mod scalar;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use coverage::{Scheme, SpacingScheme};
pub use node::{ConsumptionCase, Mode};
pub use propagation::GainConvention;

pub type Transmitter = propagation::Transmitter<f64>;
pub type LinkBudget = propagation::LinkBudget<f64>;
pub type ComplexGain = propagation::ComplexGain<f64>;
pub type RectifierModel = rectifier::RectifierModel<f64>;
pub type EfficiencyTrace = rectifier::EfficiencyTrace<f64>;
pub type NodeConfig = node::NodeConfig<f64>;
pub type NodeState = node::NodeState<f64>;
pub type ActivationVerdict = node::ActivationVerdict<f64>;
pub type Geometry = coverage::Geometry<f64>;
pub type Scenario = coverage::Scenario<f64>;
pub type CoverageReport = coverage::CoverageReport<f64>;

pub type Transmitter32 = propagation::Transmitter<f32>;
pub type Scenario32 = coverage::Scenario<f32>;
