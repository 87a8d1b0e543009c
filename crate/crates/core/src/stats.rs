//! Small descriptive statistics used across the crate.

/// Kendall's τ-b in `O(n log n)` (Knight's merge-sort algorithm).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "kendall_tau_b: length mismatch");
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));

    let tie_pairs = |keys: &dyn Fn(usize) -> bool| -> u64 {
        let mut total = 0u64;
        let mut run = 1u64;
        for k in 1..n {
            if keys(k) {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let n1 = tie_pairs(&|k| x[idx[k]] == x[idx[k - 1]]);
    let n3 = tie_pairs(&|k| x[idx[k]] == x[idx[k - 1]] && y[idx[k]] == y[idx[k - 1]]);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let n2 = {
        let mut total = 0u64;
        let mut run = 1u64;
        for k in 1..n {
            if ys[k] == ys[k - 1] {
                run += 1;
            } else {
                total += run * (run - 1) / 2;
                run = 1;
            }
        }
        total + run * (run - 1) / 2
    };
    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let s = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        s / denom
    }
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    while i < mid {
        buf[k] = v[i];
        i += 1;
        k += 1;
    }
    while j < n {
        buf[k] = v[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    count
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (denominator `n - 1`).
pub fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolation percentile of already sorted data (Hyndman–Fan type 7).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty sample");
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    percentile_sorted(&v, q)
}

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Upper bound on the KS statistic using the CDF only at every `stride`-th
/// order statistic; monotonicity brackets the CDF between evaluated points.
pub fn ks_statistic_bounded<F: FnMut(f64) -> f64>(xs: &[f64], stride: usize, mut cdf: F) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let nf = n as f64;
    let stride = stride.max(1);
    let mut knots: Vec<usize> = (0..n).step_by(stride).collect();
    if *knots.last().unwrap() != n - 1 {
        knots.push(n - 1);
    }
    let values: Vec<f64> = knots.iter().map(|&k| cdf(v[k])).collect();
    let mut d: f64 = 0.0;
    for w in 0..knots.len() {
        let k = knots[w];
        d = d
            .max((values[w] - k as f64 / nf).abs())
            .max(((k + 1) as f64 / nf - values[w]).abs());
        if w + 1 < knots.len() {
            let k2 = knots[w + 1];
            // F(x_i) ∈ [values[w], values[w+1]] for k < i < k2
            let lo = values[w];
            let hi = values[w + 1];
            for i in (k + 1)..k2 {
                let e_lo = i as f64 / nf;
                let e_hi = (i + 1) as f64 / nf;
                d = d.max(hi - e_lo).max(e_hi - lo);
            }
        }
    }
    d
}
