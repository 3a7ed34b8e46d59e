//! Differential forms with symbolic coefficients, interior products,
//! pullbacks and the canonical forms of the bundles in play.

mod canonical;
mod form;

pub use canonical::{
    contact_form, hamilton_cartan_omega_expanded, hamilton_cartan_theta, jet_tensor, jet_tensor_apply,
    liouville_omega_expanded, liouville_theta, momentum_velocity_pairing, poincare_cartan_omega,
    poincare_cartan_omega_expanded, poincare_cartan_theta, poincare_cartan_theta_expanded, unified_omega,
    unified_omega_expanded, unified_theta, VerticalEndomorphism,
};
pub use form::{contract, contract_multi, pullback_section, Form, MultiVector, NumForm, VectorField};
