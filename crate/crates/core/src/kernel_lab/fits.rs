//! Least-squares fits of asymptotic models.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitModel {
    /// `log y = a + p log x`; parameters `[a, p]`.
    PowerLaw,
    /// `y = a + b log(1/x)`; parameters `[a, b]`.
    LogSingularity,
    /// `log |y| = a - c x`; parameters `[a, c]`.
    ExpDecay,
    /// `log y = a + p log(1/x)`; parameters `[a, p]`.
    TauBlowup,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EstimateFit {
    pub model: FitModel,
    pub parameters: Vec<f64>,
    pub r_squared: f64,
    pub data_range: String,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (a, b, r2)
}

pub fn fit(model: FitModel, x: &[f64], y: &[f64]) -> EstimateFit {
    let (tx, ty): (Vec<f64>, Vec<f64>) = match model {
        FitModel::PowerLaw => (x.iter().map(|v| v.ln()).collect(), y.iter().map(|v| v.abs().ln()).collect()),
        FitModel::LogSingularity => (x.iter().map(|v| (1.0 / v).ln()).collect(), y.to_vec()),
        FitModel::ExpDecay => (x.to_vec(), y.iter().map(|v| v.abs().ln()).collect()),
        FitModel::TauBlowup => (x.iter().map(|v| (1.0 / v).ln()).collect(), y.iter().map(|v| v.abs().ln()).collect()),
    };
    let (a, b, r2) = linear_fit(&tx, &ty);
    let b = if model == FitModel::ExpDecay { -b } else { b };
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    EstimateFit { model, parameters: vec![a, b], r_squared: r2, data_range: format!("[{lo}, {hi}] ({} points)", x.len()) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_models() {
        let x: Vec<f64> = (1..10).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        let f = fit(FitModel::PowerLaw, &x, &y);
        assert!((f.parameters[1] + 1.5).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * (-0.7 * v).exp()).collect();
        let f = fit(FitModel::ExpDecay, &x, &y);
        assert!((f.parameters[1] - 0.7).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 0.25 * (1.0 / v).ln()).collect();
        let f = fit(FitModel::LogSingularity, &x, &y);
        assert!((f.parameters[1] - 0.25).abs() < 1e-12);
    }
}
