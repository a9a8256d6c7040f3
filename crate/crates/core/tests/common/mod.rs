//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's objective code.
#![allow(dead_code)]

use hetdp::RandomSource;

pub const INF: f64 = f64::INFINITY;

pub fn max_ratio(w: &[f64], eps: &[f64]) -> f64 {
    w.iter()
        .zip(eps)
        .filter(|(_, e)| e.is_finite())
        .map(|(w, e)| w / e)
        .fold(0.0, f64::max)
}

pub fn l1_from_uniform(w: &[f64]) -> f64 {
    let u = 1.0 / w.len() as f64;
    w.iter().map(|x| (x - u).abs()).sum()
}

pub fn l2_sq(w: &[f64]) -> f64 {
    w.iter().map(|x| x * x).sum()
}

/// Squared correlated bound `||w - u||_1^2 + L^2 t^2`.
pub fn deviation_branch(w: &[f64], eps: &[f64], l: f64) -> f64 {
    l1_from_uniform(w).powi(2) + (l * max_ratio(w, eps)).powi(2)
}

/// Squared norm branch `L ||w||^2 + L^2 t^2` of the uncorrelated bound.
pub fn norm_branch(w: &[f64], eps: &[f64], l: f64) -> f64 {
    l * l2_sq(w) + (l * max_ratio(w, eps)).powi(2)
}

pub fn rc(w: &[f64], eps: &[f64], l: f64) -> f64 {
    deviation_branch(w, eps, l).sqrt()
}

pub fn ru(w: &[f64], eps: &[f64], l: f64) -> f64 {
    let t = l * max_ratio(w, eps);
    (l1_from_uniform(w).powi(2).min(l * l2_sq(w)) + t * t).sqrt()
}

/// Minimum of `f` over simplex points whose coordinates are multiples of
/// `1 / units`. With `around = Some((c, r))` only points within `r` grid
/// steps of `c` in the first `n - 1` coordinates are visited.
pub fn grid_min(
    n: usize,
    units: i64,
    around: Option<(&[f64], i64)>,
    f: &dyn Fn(&[f64]) -> f64,
) -> (f64, Vec<f64>) {
    let ranges: Vec<(i64, i64)> = (0..n.saturating_sub(1))
        .map(|i| match around {
            None => (0, units),
            Some((c, r)) => {
                let mid = (c[i] * units as f64).round() as i64;
                ((mid - r).max(0), (mid + r).min(units))
            }
        })
        .collect();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let mut ints = vec![0i64; n];
    let mut w = vec![0.0; n];
    #[allow(clippy::too_many_arguments)]
    fn walk(
        i: usize,
        left: i64,
        units: i64,
        ranges: &[(i64, i64)],
        ints: &mut [i64],
        w: &mut [f64],
        f: &dyn Fn(&[f64]) -> f64,
        best: &mut (f64, Vec<f64>),
    ) {
        let n = ints.len();
        if i == n - 1 {
            ints[i] = left;
            for (wj, &a) in w.iter_mut().zip(ints.iter()) {
                *wj = a as f64 / units as f64;
            }
            let v = f(w);
            if v < best.0 {
                best.0 = v;
                best.1.copy_from_slice(w);
            }
            return;
        }
        let (lo, hi) = ranges[i];
        for a in lo..=hi.min(left) {
            ints[i] = a;
            walk(i + 1, left - a, units, ranges, ints, w, f, best);
        }
    }
    walk(0, units, units, &ranges, &mut ints, &mut w, f, &mut best);
    best
}

/// Coarse full grid, then successively finer grids around the incumbent.
/// Each level re-centers until the incumbent stops improving, so a box that
/// is too small only costs extra passes. Every point visited is feasible:
/// the result is an upper bound on the true minimum that tightens with the
/// final resolution.
pub fn zoom_min(
    n: usize,
    start_units: i64,
    factor: i64,
    levels: usize,
    radius: i64,
    f: &dyn Fn(&[f64]) -> f64,
) -> f64 {
    let (mut best, mut at) = grid_min(n, start_units, None, f);
    let mut units = start_units;
    for _ in 0..levels {
        units *= factor;
        for _ in 0..100 {
            let (v, w) = grid_min(n, units, Some((&at, radius)), f);
            if v >= best {
                break;
            }
            best = v;
            at = w;
        }
    }
    best
}

/// `exp(Uniform[lo, hi])`, or `+inf` with probability `p_public`.
pub fn random_eps(rng: &mut RandomSource, n: usize, lo: f64, hi: f64, p_public: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.bernoulli(p_public) {
                INF
            } else {
                rng.uniform_range(lo, hi).exp()
            }
        })
        .collect()
}

pub fn random_simplex(rng: &mut RandomSource, n: usize) -> Vec<f64> {
    // exponential spacings give a uniform point; occasionally zero a coordinate
    let mut raw: Vec<f64> = (0..n)
        .map(|_| if rng.bernoulli(0.1) { 0.0 } else { -rng.uniform_open().ln() })
        .collect();
    if raw.iter().all(|&x| x == 0.0) {
        raw[0] = 1.0;
    }
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// For a fixed noise level `t`, the minimum-norm simplex point with
/// `w_i <= t eps_i` is `w_i = min(lambda, t eps_i)`; `lambda` by bisection.
/// Requires `t * sum(eps) >= 1`.
pub fn water_fill(t: f64, eps: &[f64]) -> Vec<f64> {
    let fill = |lambda: f64| -> f64 { eps.iter().map(|&e| lambda.min(t * e)).sum() };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fill(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w: Vec<f64> = eps.iter().map(|&e| hi.min(t * e)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// `min ||w||^2 + c ||w / eps||_inf^2` by gridding the noise level `t` and
/// water-filling the weights at each grid point, zooming in on the best.
pub fn norm_ratio_oracle(c: f64, eps: &[f64]) -> f64 {
    let n = eps.len();
    let g = |w: &[f64]| l2_sq(w) + c * max_ratio(w, eps).powi(2);
    let uniform = vec![1.0 / n as f64; n];
    if eps.iter().all(|e| e.is_infinite()) {
        return g(&uniform);
    }
    // past the uniform point's level nothing improves
    let t_hi = max_ratio(&uniform, eps);
    let t_lo = if eps.iter().any(|e| e.is_infinite()) {
        0.0
    } else {
        1.0 / eps.iter().sum::<f64>()
    };
    let value = |t: f64| g(&water_fill(t, eps));
    let (mut lo, mut hi) = (t_lo, t_hi);
    let mut best = value(t_hi);
    for _ in 0..60 {
        let points = 64;
        let step = (hi - lo) / points as f64;
        let mut arg = lo;
        for i in 0..=points {
            let t = lo + step * i as f64;
            let v = value(t);
            if v < best {
                best = v;
                arg = t;
            }
        }
        lo = (arg - step).max(t_lo);
        hi = (arg + step).min(t_hi);
        if hi - lo < 1e-15 {
            break;
        }
    }
    best
}
