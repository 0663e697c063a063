//! Polynomial and rational spectral filters.

pub mod poly;
pub mod quad;
pub mod rational;

pub use poly::{
    apply_pol, apply_pol_dual, apply_pol_generalized, balance_center, chebyshev_coeffs, damping_multipliers,
    find_pol, BoundarySide, Damping, PolyOptions, PolynomialFilter, SpectralMap,
};
pub use quad::gauss_legendre;
pub use rational::{
    apply_rat, apply_rat_generalized, apply_rat_generalized_with_bv, cauchy_poles, factor_poles, find_ratf,
    ls_coeffs, ls_objective, QuadRule, RatKind, RatOptions, RatWeight, RationalFilter,
};
