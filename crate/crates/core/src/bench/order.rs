//! Empirical convergence order of an error sequence.

use crate::error::{Error, Result};

/// Fewest points for which an order estimate is reported.
pub const MIN_ORDER_POINTS: usize = 6;

/// `q`: least-squares slope of `log e_{k+1}` against `log e_k`.
/// `rho`: geometric mean of the ratios `e_{k+1} / e_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub q: f64,
    pub rho: f64,
    pub points: usize,
}

pub fn estimate_order(errors: &[f64]) -> Result<OrderEstimate> {
    if errors.len() < MIN_ORDER_POINTS {
        return Err(Error::InsufficientData(format!(
            "order estimate needs at least {MIN_ORDER_POINTS} points, got {}",
            errors.len()
        )));
    }
    if let Some(bad) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::InsufficientData(format!("errors must be positive and finite, found {bad}")));
    }
    let logs: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let xs = &logs[..logs.len() - 1];
    let ys = &logs[1..];
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("errors are constant, slope undefined".into()));
    }
    let mean_log_ratio = ys.iter().zip(xs).map(|(y, x)| y - x).sum::<f64>() / m;
    Ok(OrderEstimate {
        q: sxy / sxx,
        rho: mean_log_ratio.exp(),
        points: errors.len(),
    })
}

/// Tail of `errors` used for the order estimate: values at or below `floor`
/// are cut off, then the longest strictly decreasing run ending at the last
/// remaining point is kept.
pub fn decreasing_tail(errors: &[f64], floor: f64) -> &[f64] {
    let end = errors.iter().position(|e| !(*e > floor)).unwrap_or(errors.len());
    let head = &errors[..end];
    if head.is_empty() {
        return head;
    }
    let mut start = head.len() - 1;
    while start > 0 && head[start - 1] > head[start] {
        start -= 1;
    }
    &head[start..]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn exact_linear_sequence() {
        let e: Vec<f64> = (0..12).map(|k| 0.5f64.powi(k)).collect();
        let est = estimate_order(&e).unwrap();
        assert!((est.q - 1.0).abs() <= 0.01);
        assert!((est.rho - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn exact_quadratic_sequence() {
        let e: Vec<f64> = (0..6).map(|k| 0.1f64.powi(1 << k)).collect();
        let est = estimate_order(&e).unwrap();
        assert!((est.q - 2.0).abs() <= 0.05, "q = {}", est.q);
    }

    #[test]
    fn noisy_linear_sequence() {
        let mut rng = crate::rng::aux_rng(9, 0);
        for _ in 0..200 {
            let e: Vec<f64> = (0..20)
                .map(|k| 0.5f64.powi(k) * (1.0 + 0.01 * rng.random_range(-1.0..1.0)))
                .collect();
            let q = estimate_order(&e).unwrap().q;
            assert!((0.9..=1.1).contains(&q), "q = {q}");
        }
    }

    #[test]
    fn too_few_or_invalid_points() {
        assert!(matches!(estimate_order(&[1.0, 0.5, 0.25]), Err(Error::InsufficientData(_))));
        assert!(estimate_order(&[1.0, 0.5, 0.0, 0.1, 0.1, 0.1]).is_err());
        assert!(estimate_order(&[1.0; 8]).is_err());
    }

    #[test]
    fn tail_selection() {
        let e = [1.0, 2.0, 0.5, 0.1, 0.01, 1e-17, 1e-18];
        assert_eq!(decreasing_tail(&e, 1e-15), &[2.0, 0.5, 0.1, 0.01]);
        assert!(decreasing_tail(&[], 0.0).is_empty());
        assert_eq!(decreasing_tail(&[3.0, 3.0, 1.0], 0.0), &[3.0, 1.0]);
    }
}
