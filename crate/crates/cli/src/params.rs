use fdlab::{classify, tail_exponent, ParamSet, Regime};
use serde::Serialize;

use crate::config::ParamsInput;
use crate::fail::CliResult;

#[derive(Debug, Serialize)]
pub struct ParamsReport {
    pub params: ParamSet,
    pub regime: Regime,
    pub tail_exponent: Option<f64>,
}

pub fn run(input: &ParamsInput) -> CliResult<ParamsReport> {
    let params = input.derive()?;
    let regime = classify(&params);
    let tail_exponent = tail_exponent(&params).ok();
    Ok(ParamsReport { params, regime, tail_exponent })
}
