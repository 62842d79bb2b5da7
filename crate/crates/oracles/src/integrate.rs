//! Quadrature for the clipped-normal crosswalk width prior.

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Composite Simpson's rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// E[clamp(W, lo, hi)] for W ~ N(mu, sigma^2).
///
/// The tails carry their clamp values as point masses; both tail masses are
/// integrated numerically out to 12 sigma.
pub fn clipped_normal_mean(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
    const PANELS: usize = 200_000;
    let pdf = |x: f64| normal_pdf(x, mu, sigma);
    let below = simpson(pdf, mu - 12.0 * sigma, lo, PANELS);
    let above = simpson(pdf, hi, mu + 12.0 * sigma, PANELS);
    let body = simpson(|x| x * pdf(x), lo, hi, PANELS);
    lo * below + hi * above + body
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unclipped_limit_is_the_mean() {
        assert!((clipped_normal_mean(3.5, 1.0, -20.0, 30.0) - 3.5).abs() < 1e-9);
    }

    #[test]
    fn crosswalk_prior() {
        // Closed form via Phi/phi gives 3.331510236...
        let m = clipped_normal_mean(3.5, 1.0, 2.0, 4.0);
        assert!((m - 3.331_510_236_361).abs() < 1e-9, "{m}");
    }
}
