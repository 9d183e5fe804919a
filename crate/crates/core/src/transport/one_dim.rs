//! `W1` on the real line as the `L1` distance between distribution functions.

/// `W1` between two discrete laws on `R`. Inputs need not be sorted.
pub fn w1_line(x: &[f64], a: &[f64], y: &[f64], b: &[f64]) -> f64 {
    let mut events: Vec<(f64, f64)> = Vec::with_capacity(x.len() + y.len());
    events.extend(x.iter().zip(a).map(|(&p, &w)| (p, w)));
    events.extend(y.iter().zip(b).map(|(&p, &w)| (p, -w)));
    events.sort_by(|l, r| l.0.total_cmp(&r.0));
    w1_line_events(&events)
}

/// Same as [`w1_line`] for inputs already sorted by position.
pub fn w1_line_sorted(x: &[f64], a: &[f64], y: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut diff: f64 = 0.0;
    let mut total = 0.0;
    let mut last = f64::NAN;
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i] <= y[j]);
        let (pos, delta) = if take_x {
            i += 1;
            (x[i - 1], a[i - 1])
        } else {
            j += 1;
            (y[j - 1], -b[j - 1])
        };
        if !last.is_nan() {
            total += diff.abs() * (pos - last);
        }
        diff += delta;
        last = pos;
    }
    total
}

fn w1_line_events(events: &[(f64, f64)]) -> f64 {
    let mut diff = 0.0;
    let mut total = 0.0;
    for k in 0..events.len() {
        diff += events[k].1;
        if let Some(next) = events.get(k + 1) {
            total += f64::abs(diff) * (next.0 - events[k].0);
        }
    }
    total
}
