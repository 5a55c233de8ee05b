//! File-based configuration (TOML model/market documents with keys that
//! mirror the domain-type field names) and the three output renderings:
//! human table, delimited text, and a structured record that round-trips.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PricerError, Result};
use crate::kobol::{FactorModel, KobolParams};
use crate::pricer::{MarketSpec, PriceQuote};

/// Per-asset (or per-factor) parameter block; `mu` defaults to 0 and is
/// overwritten by drift calibration anyway.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamBlock {
    pub nu: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    #[serde(default)]
    pub mu: f64,
}

impl ParamBlock {
    fn to_params(&self) -> Result<KobolParams> {
        KobolParams::new(
            self.nu,
            self.c_plus,
            self.c_minus,
            self.lambda_plus,
            self.lambda_minus,
            self.mu,
        )
    }
}

fn default_strip_shrink() -> f64 {
    0.9
}

/// Model document: `[[asset]]` blocks, optional `[[factor]]` blocks with a
/// row-major `loadings` matrix (omitted together for independent assets),
/// and the tube shrink factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub asset: Vec<ParamBlock>,
    #[serde(default)]
    pub factor: Vec<ParamBlock>,
    #[serde(default)]
    pub loadings: Vec<Vec<f64>>,
    #[serde(default = "default_strip_shrink")]
    pub strip_shrink: f64,
}

impl ModelFile {
    pub fn to_model(&self) -> Result<FactorModel> {
        let idio: Vec<KobolParams> = self
            .asset
            .iter()
            .map(|b| b.to_params())
            .collect::<Result<_>>()?;
        if self.factor.is_empty() && self.loadings.is_empty() {
            return FactorModel::independent(idio, self.strip_shrink);
        }
        let common: Vec<KobolParams> = self
            .factor
            .iter()
            .map(|b| b.to_params())
            .collect::<Result<_>>()?;
        FactorModel::new(idio, common, self.loadings.clone(), self.strip_shrink)
    }
}

pub fn parse_model(text: &str) -> Result<FactorModel> {
    let file: ModelFile =
        toml::from_str(text).map_err(|e| PricerError::Parse(format!("model file: {e}")))?;
    file.to_model()
}

pub fn load_model(path: &Path) -> Result<FactorModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PricerError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MarketFile {
    spot: Vec<f64>,
    strike: f64,
    rate: f64,
    maturity: f64,
}

pub fn parse_market(text: &str) -> Result<MarketSpec> {
    let file: MarketFile =
        toml::from_str(text).map_err(|e| PricerError::Parse(format!("market file: {e}")))?;
    MarketSpec::new(file.spot, file.strike, file.rate, file.maturity)
}

pub fn load_market(path: &Path) -> Result<MarketSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PricerError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_market(&text)
}

/// Output rendering: human-readable table, delimited text ('.' decimal,
/// ',' separator, mandatory header row), or a structured record that
/// re-parses to equal values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Delimited,
    Record,
}

impl FromStr for OutputFormat {
    type Err = PricerError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "human" | "table" => Ok(OutputFormat::Human),
            "csv" | "delimited" => Ok(OutputFormat::Delimited),
            "toml" | "record" => Ok(OutputFormat::Record),
            other => Err(PricerError::Parse(format!(
                "unknown format '{other}' (expected human | delimited | record)"
            ))),
        }
    }
}

/// 12-significant-digit numeric formatting used by all CLI output.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000".into();
    }
    format!("{x:.11e}")
}

pub fn render_quote(quote: &PriceQuote, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Record => toml::to_string(quote)
            .map_err(|e| PricerError::Parse(format!("serialization failed: {e}"))),
        OutputFormat::Delimited => {
            let header = "value,raw_complex_residual,alias,truncation,tail,l_eps,total,p,r,m_terms,runtime_ms,nonneg";
            let b = &quote.budget;
            let d = &quote.diagnostics;
            Ok(format!(
                "{header}\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_sig(quote.value),
                fmt_sig(quote.raw_complex_residual),
                fmt_sig(b.alias),
                fmt_sig(b.truncation),
                fmt_sig(b.tail),
                fmt_sig(b.l_eps),
                fmt_sig(b.total),
                d.p,
                fmt_sig(d.r),
                d.m_terms,
                fmt_sig(d.runtime_ms),
                d.nonneg
            ))
        }
        OutputFormat::Human => {
            let b = &quote.budget;
            let d = &quote.diagnostics;
            let eps: Vec<String> = d.eps.iter().map(|&e| fmt_sig(e)).collect();
            Ok(format!(
                "price              {}\n\
                 imag residual      {}\n\
                 budget: alias      {}\n\
                 budget: truncation {}\n\
                 budget: tail       {}\n\
                 budget: L_eps      {}\n\
                 budget: total      {}\n\
                 period P           {}\n\
                 radius R           {}\n\
                 terms M            {}\n\
                 damping eps        [{}]\n\
                 runtime (ms)       {}\n\
                 nonnegative        {}\n",
                fmt_sig(quote.value),
                fmt_sig(quote.raw_complex_residual),
                fmt_sig(b.alias),
                fmt_sig(b.truncation),
                fmt_sig(b.tail),
                fmt_sig(b.l_eps),
                fmt_sig(b.total),
                d.p,
                fmt_sig(d.r),
                d.m_terms,
                eps.join(", "),
                fmt_sig(d.runtime_ms),
                d.nonneg
            ))
        }
    }
}

/// Re-parse a structured record emitted by [`render_quote`].
pub fn quote_from_record(text: &str) -> Result<PriceQuote> {
    toml::from_str(text).map_err(|e| PricerError::Parse(format!("quote record: {e}")))
}
