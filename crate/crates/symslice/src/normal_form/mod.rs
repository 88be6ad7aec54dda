//! Truncated Birkhoff normal forms near equilibria of the reduced system,
//! with the quadratic-part machinery, FD Taylor extraction, and the
//! jet-based construction of the tube for general Lie algebras.

pub mod birkhoff;
pub mod homological;
pub mod jets;
pub mod poly;
pub mod systems;
pub mod taylor;
pub mod via_jets;

pub use birkhoff::{birkhoff_normal_form, lie_transform, BirkhoffResult, NormalFormReport, Resonance};
pub use homological::{homological_solve, HomologicalSolution};
pub use jets::{tube_jet_solve, JetClosure, LieAlgebraSpec, TubeJets};
pub use poly::{poisson_bracket, GradedPolynomial, Monomial, SymplecticStructure};
pub use taylor::{taylor_coefficients, taylor_expand};
pub use systems::{mech_normal_form, rigid_body_normal_form, rigid_body_slice_polynomial, MechNormalForm};
pub use via_jets::{normal_form_explicit_so3, normal_form_via_jets, normal_form_via_jets_so3, slice_structure, ViaJets};
