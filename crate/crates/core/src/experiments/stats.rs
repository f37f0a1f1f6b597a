use serde::Serialize;

use crate::graphs::GraphWindow;
use crate::matching::StageReport;
use crate::radii::{components_above, RadiusField};

/// Least-squares `(slope, intercept)`; `None` with fewer than two distinct `x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnRow {
    pub stage: usize,
    pub p_n: f64,
    /// `p_n / p_{n-1}`, absent for the first stage or after `p_{n-1} = 0`.
    pub ratio: Option<f64>,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnDecay {
    pub rows: Vec<PnRow>,
    pub monotone: bool,
    /// `exp` of the slope of `log p_n` against `n` over the positive entries.
    pub fitted_ratio: Option<f64>,
}

/// Unmatched left density per stage, successive ratios and a geometric fit.
/// `reference` is `2^{-n}`.
pub fn pn_decay(reports: &[StageReport]) -> PnDecay {
    let mut rows = Vec::with_capacity(reports.len());
    let mut prev: Option<f64> = None;
    for r in reports {
        rows.push(PnRow {
            stage: r.stage,
            p_n: r.p_n_left,
            ratio: prev.filter(|&p| p > 0.0).map(|p| r.p_n_left / p),
            reference: 0.5f64.powi(r.stage as i32),
        });
        prev = Some(r.p_n_left);
    }
    let monotone = rows.windows(2).all(|w| w[1].p_n <= w[0].p_n);
    let positive: Vec<&PnRow> = rows.iter().filter(|r| r.p_n > 0.0).collect();
    let xs: Vec<f64> = positive.iter().map(|r| r.stage as f64).collect();
    let ys: Vec<f64> = positive.iter().map(|r| r.p_n.ln()).collect();
    PnDecay {
        monotone,
        fitted_ratio: fit_line(&xs, &ys).map(|(s, _)| s.exp()),
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentScan {
    pub depth: usize,
    pub r: usize,
    pub components: usize,
    pub max_size: usize,
    pub max_diameter: usize,
    pub censored: usize,
    pub core_size: usize,
}

/// Summary of `components_above(field, r)`.
pub fn component_scan(window: &GraphWindow, field: &RadiusField, r: usize) -> ComponentScan {
    let comps = components_above(window, field, r);
    ComponentScan {
        depth: window.depth(),
        r,
        components: comps.len(),
        max_size: comps.iter().map(|c| c.vertices.len()).max().unwrap_or(0),
        max_diameter: comps.iter().map(|c| c.diameter).max().unwrap_or(0),
        censored: comps.iter().map(|c| c.censored).sum(),
        core_size: window.core_len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(stage: usize, p: f64) -> StageReport {
        StageReport {
            stage,
            sweeps: 0,
            flips: 0,
            unmatched_left: 0,
            unmatched_right: 0,
            p_n_left: p,
            p_n_right: p,
            largest_sweep_chains: 0,
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn exact_line_is_recovered() {
        let (s, c) = fit_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
        assert!(fit_line(&[1.0], &[1.0]).is_none());
        assert!(fit_line(&[1.0, 1.0], &[0.0, 2.0]).is_none());
    }

    #[test]
    fn geometric_sequence_has_its_ratio() {
        let reports: Vec<StageReport> = (1..=5).map(|n| report(n, 0.3f64.powi(n as i32))).collect();
        let d = pn_decay(&reports);
        assert!(d.monotone);
        assert!((d.fitted_ratio.unwrap() - 0.3).abs() < 1e-9);
        assert!((d.rows[2].ratio.unwrap() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn zero_density_has_no_fit() {
        let d = pn_decay(&[report(1, 0.0), report(2, 0.0), report(3, 0.0)]);
        assert!(d.monotone);
        assert_eq!(d.fitted_ratio, None);
        assert_eq!(d.rows[1].ratio, None);
    }
}
