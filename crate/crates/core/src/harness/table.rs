use std::fmt::Write;

use crate::error::Result;
use crate::sampling::{expected_resample_interval, resample_probability, theory_constants, SamplingParams, Scheme};

/// CSV of `r, uniform_prob, sticky_prob` for `r = 1..=r_max`, then an
/// `expected_interval` row. The sticky column is blank for uniform params.
pub fn probability_table(params: &SamplingParams, r_max: u32) -> Result<String> {
    params.validate()?;
    let sticky = !params.is_uniform();
    let mut out = String::from("r,uniform_prob,sticky_prob\n");
    for r in 1..=r_max {
        let u = resample_probability(Scheme::Uniform, params, r)?;
        let s = if sticky { resample_probability(Scheme::Sticky, params, r)?.to_string() } else { String::new() };
        writeln!(out, "{r},{u},{s}").expect("string write");
    }
    let u = expected_resample_interval(Scheme::Uniform, params)?;
    let s = if sticky { expected_resample_interval(Scheme::Sticky, params)?.to_string() } else { String::new() };
    writeln!(out, "expected_interval,{u},{s}").expect("string write");
    Ok(out)
}

/// Variance factor and learning rate with equal client weights, for the
/// uniform limit and the given sticky parameters.
pub fn theory_table(params: &SamplingParams, local_steps: u32, sigma: f64, rounds: u32) -> Result<String> {
    let p = vec![1.0 / params.n as f64; params.n];
    let uniform = theory_constants(&SamplingParams::uniform(params.n, params.k)?, &p, local_steps, sigma, rounds)?;
    let mut out = String::from("quantity,uniform,sticky\n");
    let sticky =
        if params.is_uniform() { None } else { Some(theory_constants(params, &p, local_steps, sigma, rounds)?) };
    let col = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    writeln!(out, "A,{},{}", uniform.a, col(sticky.map(|t| t.a))).expect("string write");
    writeln!(out, "gamma,{},{}", uniform.gamma, col(sticky.map(|t| t.gamma))).expect("string write");
    Ok(out)
}
