//! Least-squares trend slopes used by the verdict and summary logic.

/// Ordinary least-squares slope of `ys` against `xs`; `None` with fewer than
/// two distinct abscissae or any non-finite value.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Slope of ln y against ln x over positive pairs.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    ls_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_exponent() {
        let xs: Vec<f64> = (1..20).map(|k| k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-0.75)).collect();
        let s = log_log_slope(&xs, &ys).unwrap();
        assert!((s + 0.75).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ls_slope(&[1.0], &[2.0]).is_none());
        assert!(ls_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
        assert!(ls_slope(&[1.0, 2.0], &[f64::INFINITY, 3.0]).is_none());
    }
}
