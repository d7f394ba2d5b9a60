//! Small descriptive-statistics helpers and the display rounding used by every report.
//!
//! All reductions run left to right over the input slice, so results are bit-identical for
//! identical inputs.

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n - 1 denominator. Callers guarantee `xs.len() >= 2`.
pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Pearson correlation; `None` when either side has zero variance.
pub(crate) fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Formats `value` with `digits` decimals, rounding half to even on the shortest decimal
/// representation of the float (so `0.125` at 2 dp is `"0.12"` and `0.135` is `"0.14"`).
///
/// The output never uses exponent notation, never prints `-0`, and always uses `.` as the
/// decimal separator.
pub fn format_half_even(value: f64, digits: usize) -> String {
    if value.is_nan() {
        return "NaN".to_string();
    }
    if value.is_infinite() {
        return if value > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    // Rust's Display for f64 prints the shortest round-trip digits without an exponent.
    let repr = format!("{}", value.abs());
    let (int_part, frac_part) = match repr.split_once('.') {
        Some((i, f)) => (i.to_string(), f.to_string()),
        None => (repr.clone(), String::new()),
    };

    let mut kept: Vec<u8> = int_part
        .bytes()
        .chain(
            frac_part
                .bytes()
                .chain(std::iter::repeat(b'0'))
                .take(digits),
        )
        .map(|b| b - b'0')
        .collect();
    let rest: Vec<u8> = frac_part.bytes().skip(digits).map(|b| b - b'0').collect();

    let round_up = match rest.first() {
        None => false,
        Some(&d) if d > 5 => true,
        Some(&d) if d < 5 => false,
        Some(_) => {
            let beyond_half = rest[1..].iter().any(|&d| d != 0);
            let last_odd = kept.last().is_some_and(|d| d % 2 == 1);
            beyond_half || last_odd
        }
    };

    if round_up {
        let mut i = kept.len();
        loop {
            if i == 0 {
                kept.insert(0, 1);
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }

    let split = kept.len() - digits;
    let int_digits: String = kept[..split].iter().map(|d| (d + b'0') as char).collect();
    let frac_digits: String = kept[split..].iter().map(|d| (d + b'0') as char).collect();
    let is_zero = kept.iter().all(|&d| d == 0);
    let sign = if value < 0.0 && !is_zero { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int_digits}")
    } else {
        format!("{sign}{int_digits}.{frac_digits}")
    }
}
