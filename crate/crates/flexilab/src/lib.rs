//! Flexible polyhedra laboratory.
//!
//! Builds the classical flexible polyhedra — rational and elliptic flexible
//! cross-polytopes and the three Bricard octahedra — tracks their flexions
//! numerically on configuration-space varieties in Euclidean, spherical, and
//! hyperbolic geometry, and verifies (or refutes) volume constancy with
//! several independent volume computations.
//!
//! Module map:
//! * [`complexes`] — combinatorial layer: oriented pseudo-manifolds and
//!   cross-polytope boundary complexes.
//! * [`geomkit`] — metric layer: model spaces, simplex realization,
//!   Cayley–Menger determinants, normal-fan frames, dihedral angles.
//! * [`elliptica`] — real Jacobi elliptic functions and the biquadratic
//!   addition identity.
//! * [`families`] — closed-form flexible families and Bricard octahedra.
//! * [`confspace`] — constraint systems, rigidity tests, symmetry reduction,
//!   predictor–corrector flexion tracking.
//! * [`volumetrics`] — oriented volumes, winding numbers, Schläfli variation,
//!   and bellows verification reports.

pub mod complexes;
pub mod confspace;
pub mod elliptica;
pub mod families;
pub mod geomkit;
pub mod shapes;
pub mod volumetrics;
