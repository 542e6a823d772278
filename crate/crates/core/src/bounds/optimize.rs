/// Minimizes `f` over the open ray `(lower, ∞)`.
///
/// Works in the coordinate `x = lower + e^θ`: a scan over θ ∈ [-7, 7] picks
/// the best bracket, golden-section search refines it. Failed or non-finite
/// evaluations count as +∞. Returns `None` when every sample fails.
pub fn minimize_on_ray<F>(lower: f64, mut f: F) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> Option<f64>,
{
    let mut eval = |theta: f64| -> f64 {
        let x = lower + theta.exp();
        match f(x) {
            Some(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };
    const STEPS: usize = 57;
    let (lo, hi) = (-7.0, 7.0);
    let h = (hi - lo) / (STEPS - 1) as f64;
    let samples: Vec<f64> = (0..STEPS).map(|i| eval(lo + h * i as f64)).collect();
    let (best_i, best_v) = samples
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if !best_v.is_finite() {
        return None;
    }
    let mut a = lo + h * best_i.saturating_sub(1) as f64;
    let mut b = lo + h * (best_i + 1).min(STEPS - 1) as f64;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..80 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d);
        }
    }
    let (theta, value) = [(lo + h * best_i as f64, best_v), (c, fc), (d, fd)]
        .into_iter()
        .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    Some((lower + theta.exp(), value))
}
