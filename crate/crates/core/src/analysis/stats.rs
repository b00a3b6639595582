use std::io::Write;

use serde::Serialize;

use super::special::student_t_two_tailed;
use super::AnalysisError;
use crate::corpus::{PsychTrait, TraitProfile};

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|v| *v == x[0])
}

/// Pearson's ρ, or `None` when the lengths differ, `n < 2`, or either input is constant.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || is_constant(x) || is_constant(y) {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    let rho = sxy / (sxx.sqrt() * syy.sqrt());
    // exact linear relations land a few ulps short of ±1
    Some(if 1.0 - rho.abs() < 1e-13 { rho.signum() } else { rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pearson {
    pub rho: f64,
    /// Two-tailed p-value.
    pub p: f64,
    pub n: usize,
    /// Set when an input was constant; then `rho = 0` and `p = 1`.
    pub degenerate: bool,
}

/// ρ with a two-tailed p-value from `t = ρ √((n−2)/(1−ρ²))`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Pearson, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(AnalysisError::TooFewSamples { needed: 3, got: n });
    }
    let Some(rho) = pearson_r(x, y) else {
        return Ok(Pearson { rho: 0.0, p: 1.0, n, degenerate: true });
    };
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        student_t_two_tailed(rho * (df / (1.0 - rho * rho)).sqrt(), df)
    };
    Ok(Pearson { rho, p, n, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraitStats {
    #[serde(rename = "trait")]
    pub psych_trait: PsychTrait,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single profile.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn describe(values: &[f64]) -> Option<(f64, f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let m = mean(values);
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((m, std, min, max))
}

/// Mean, sample std, min and max of every trait.
pub fn trait_stats(profiles: &[TraitProfile]) -> Result<Vec<TraitStats>, AnalysisError> {
    if profiles.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if profiles.len() == 1 {
        log::warn!("trait statistics over a single profile: std reported as 0");
    }
    Ok(PsychTrait::ALL
        .iter()
        .map(|&t| {
            let v: Vec<f64> = profiles.iter().map(|p| p.get(t)).collect();
            let (mean, std, min, max) = describe(&v).expect("non-empty");
            TraitStats { psych_trait: t, mean, std, min, max }
        })
        .collect())
}

pub fn write_trait_stats<W: Write>(writer: W, stats: &[TraitStats]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for s in stats {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
