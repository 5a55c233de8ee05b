//! Pricing of European basket/spread call options under multivariate KoBoL
//! (tempered-stable) Levy factor models.
//!
//! The engine represents the risk-neutral density through its characteristic
//! function, periodizes via Poisson summation on a lattice of period P, and
//! truncates the frequency sum to an anisotropic l^nu ball. Every
//! approximation step carries a certified error term (aliasing, frequency
//! truncation, payoff periodization tail), and independent adaptive
//! quadrature oracles reproduce the exact damped Fourier integrals for
//! validation.

pub mod bounds;
pub mod config;
pub mod error;
pub mod gamma;
pub mod kobol;
pub mod lattice;
pub mod oracle;
pub mod payoff;
pub mod pricer;
pub mod quad;
pub mod sparse;
pub mod sum;

pub use error::{PricerError, Result};
pub use kobol::{AnalyticTube, FactorModel, KobolParams};
pub use lattice::{
    alias_budget, build_density_approximant, density_error_bound, majorant_mt, select_period,
    AliasBudget, DensityApproximant,
};
pub use oracle::{
    density_quadrature, payoff_transform_quadrature, price_quadrature_1d, price_quadrature_nd,
    QuadCtrl,
};
pub use payoff::{find_damping, log_gamma, payoff_l1_constant, payoff_transform, DampingVector};
pub use pricer::{
    convergence_study, error_budget, log_moneyness, price_basket_call, ErrorBudget, MarketSpec,
    PriceCtrl, PriceQuote, TermBudget,
};
pub use sparse::{
    build_ball, cardinality_estimate, enumerate, kappa_n, radius_for_budget,
    threshold_index_set, truncation_error_bound, volume_aniso_unit_ball, AnisoBall, IndexSet,
};
