use crate::ext::ExtReal;

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: ExtReal,
    pub evaluations: usize,
}

/// Compass (pattern) search for a maximum.
///
/// Polls `x +- step * e_k` along each coordinate, moves on the first strict
/// improvement, and halves the step when no poll improves. Stops once the step
/// drops below `min_step` or after `max_evals` objective calls.
pub fn compass_search(
    mut objective: impl FnMut(&[f64]) -> ExtReal,
    start: &[f64],
    initial_step: f64,
    min_step: f64,
    max_evals: usize,
) -> SearchResult {
    let mut x = start.to_vec();
    let mut fx = objective(&x);
    let mut evals = 1;
    let mut step = initial_step;
    while step >= min_step && evals < max_evals {
        let mut improved = false;
        'poll: for k in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += dir * step;
                let fy = objective(&y);
                evals += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    SearchResult { point: x, value: fx, evaluations: evals }
}
