#![allow(dead_code)]

use kobol_pricer::pricer::MarketSpec;
use kobol_pricer::{FactorModel, KobolParams};

/// Pinned reference marginal: nu = 0.5, c_+ = c_- = 1, lambda_+ = 8,
/// lambda_- = -4, zero drift.
pub fn pinned_params() -> KobolParams {
    KobolParams::new(0.5, 1.0, 1.0, 8.0, -4.0, 0.0).unwrap()
}

pub fn pinned_model() -> FactorModel {
    FactorModel::single(pinned_params(), 0.9).unwrap()
}

pub fn pinned_model_2d() -> FactorModel {
    FactorModel::independent(vec![pinned_params(), pinned_params()], 0.9).unwrap()
}

pub fn market_1d(strike: f64) -> MarketSpec {
    MarketSpec::new(vec![100.0], strike, 0.03, 0.5).unwrap()
}

pub fn market_spread() -> MarketSpec {
    MarketSpec::new(vec![100.0, 40.0], 50.0, 0.03, 0.5).unwrap()
}

/// Deterministic parameter draws for property tests.
pub struct ParamSampler {
    rng: rand_chacha::ChaCha8Rng,
}

impl ParamSampler {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        ParamSampler {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        use rand::Rng;
        self.rng.gen_range(lo..hi)
    }

    /// Generic draw over both power regimes, tempering away from the
    /// payoff-feasibility boundary.
    pub fn draw(&mut self) -> KobolParams {
        let nu = if self.uniform(0.0, 1.0) < 0.5 {
            self.uniform(0.2, 0.95)
        } else {
            self.uniform(1.05, 1.8)
        };
        KobolParams::new(
            nu,
            self.uniform(0.1, 2.0),
            self.uniform(0.1, 2.0),
            self.uniform(2.0, 10.0),
            self.uniform(-10.0, -2.0),
            self.uniform(-0.5, 0.5),
        )
        .unwrap()
    }

    /// Draw restricted to nu in (0,1), as needed by the anisotropic ball.
    pub fn draw_sub_linear(&mut self) -> KobolParams {
        let nu = self.uniform(0.25, 0.95);
        KobolParams::new(
            nu,
            self.uniform(0.1, 2.0),
            self.uniform(0.1, 2.0),
            self.uniform(2.0, 10.0),
            self.uniform(-10.0, -2.0),
            self.uniform(-0.5, 0.5),
        )
        .unwrap()
    }
}
