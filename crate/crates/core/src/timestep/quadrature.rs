//! Cumulative time quadrature on a uniform sample grid.

/// `Σ wᵢ·vᵢ` elementwise.
pub(crate) fn lincomb(terms: &[(f64, &[f64])]) -> Vec<f64> {
    let len = terms[0].1.len();
    let mut out = vec![0.0; len];
    for (w, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += w * x;
        }
    }
    out
}

/// Running integrals `I_k ≈ ∫_{t_0}^{t_k} f dt` from samples `f_0..f_K` at spacing `h`.
///
/// Even `k`: composite Simpson. Odd `k >= 3`: Simpson up to `k − 3`, then
/// the 3/8 rule. `I_1` uses the four-point rule `(9, 19, −5, 1)/24`, or the
/// three-point rule `(5, 8, −1)/12` when only three samples exist. `K = 1`
/// falls back to the trapezoid rule.
pub(crate) fn cumulative_integral(samples: &[&[f64]], h: f64) -> Vec<Vec<f64>> {
    let k_max = samples.len() - 1;
    let len = samples[0].len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(samples.len());
    out.push(vec![0.0; len]);
    if k_max == 0 {
        return out;
    }
    let f = samples;
    let first = match k_max {
        1 => lincomb(&[(h / 2.0, f[0]), (h / 2.0, f[1])]),
        2 => lincomb(&[(5.0 * h / 12.0, f[0]), (8.0 * h / 12.0, f[1]), (-h / 12.0, f[2])]),
        _ => lincomb(&[
            (9.0 * h / 24.0, f[0]),
            (19.0 * h / 24.0, f[1]),
            (-5.0 * h / 24.0, f[2]),
            (h / 24.0, f[3]),
        ]),
    };
    out.push(first);
    for k in 2..=k_max {
        let next = if k % 2 == 0 {
            lincomb(&[
                (1.0, &out[k - 2]),
                (h / 3.0, f[k - 2]),
                (4.0 * h / 3.0, f[k - 1]),
                (h / 3.0, f[k]),
            ])
        } else {
            lincomb(&[
                (1.0, &out[k - 3]),
                (3.0 * h / 8.0, f[k - 3]),
                (9.0 * h / 8.0, f[k - 2]),
                (9.0 * h / 8.0, f[k - 1]),
                (3.0 * h / 8.0, f[k]),
            ])
        };
        out.push(next);
    }
    out
}

/// Scalar convenience wrapper around [`cumulative_integral`].
pub(crate) fn cumulative_integral_scalar(samples: &[f64], h: f64) -> Vec<f64> {
    let wrapped: Vec<[f64; 1]> = samples.iter().map(|&v| [v]).collect();
    let refs: Vec<&[f64]> = wrapped.iter().map(|v| v.as_slice()).collect();
    cumulative_integral(&refs, h).into_iter().map(|v| v[0]).collect()
}
