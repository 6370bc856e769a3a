//! Parks-McClellan exchange for odd-length, even-symmetric lowpass filters.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const GRID_DENSITY: usize = 16;
const MAX_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub desired: f64,
    pub weight: f64,
}

pub struct RemezResult {
    pub taps: Vec<f64>,
    pub delta: f64,
    pub iterations: usize,
}

/// Equiripple design of `len` taps (odd) over the given bands in cycles/sample.
pub fn remez_type1(len: usize, bands: &[Band]) -> Result<RemezResult> {
    if len < 3 || len.is_multiple_of(2) {
        return Err(Error::Domain(format!("exchange design needs an odd length >= 3, got {len}")));
    }
    for b in bands {
        if !(0.0..=0.5).contains(&b.lo) || !(b.lo..=0.5).contains(&b.hi) || b.weight <= 0.0 {
            return Err(Error::Domain(format!("invalid band {b:?}")));
        }
    }
    let m = (len - 1) / 2;
    let r = m + 1;

    // Dense grid with band edges included.
    let total: f64 = bands.iter().map(|b| b.hi - b.lo).sum();
    let mut grid = Vec::new();
    let mut des = Vec::new();
    let mut wt = Vec::new();
    for b in bands {
        let pts = (((b.hi - b.lo) / total * (GRID_DENSITY * r) as f64).ceil() as usize).max(2);
        for i in 0..pts {
            grid.push(b.lo + (b.hi - b.lo) * i as f64 / (pts - 1) as f64);
            des.push(b.desired);
            wt.push(b.weight);
        }
    }
    let ng = grid.len();
    let xs: Vec<f64> = grid.iter().map(|f| (2.0 * PI * f).cos()).collect();

    let mut ext: Vec<usize> = (0..=r).map(|i| i * (ng - 1) / r).collect();
    let mut delta = 0.0;
    let mut err = vec![0.0; ng];
    let mut bary = vec![0.0; r + 1];
    let mut vals = vec![0.0; r + 1];

    for iter in 1..=MAX_ITERATIONS {
        let x: Vec<f64> = ext.iter().map(|&i| xs[i]).collect();
        for k in 0..=r {
            let mut prod = 1.0;
            for j in 0..=r {
                if j != k {
                    // Scaling by 2 keeps the product away from underflow.
                    prod *= 2.0 * (x[k] - x[j]);
                }
            }
            bary[k] = 1.0 / prod;
        }
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..=r {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            num += bary[k] * des[ext[k]];
            den += s * bary[k] / wt[ext[k]];
        }
        delta = num / den;
        for k in 0..=r {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            vals[k] = des[ext[k]] - s * delta / wt[ext[k]];
        }
        // Interpolate through the first r points; the last one is implied.
        let bw: Vec<f64> = (0..r).map(|k| bary_r(&x, k, r)).collect();
        let interp = |xv: f64| -> f64 {
            let (mut n, mut d) = (0.0, 0.0);
            for k in 0..r {
                let diff = xv - x[k];
                if diff.abs() < 1e-15 {
                    return vals[k];
                }
                let c = bw[k] / diff;
                n += c * vals[k];
                d += c;
            }
            n / d
        };
        for i in 0..ng {
            err[i] = wt[i] * (des[i] - interp(xs[i]));
        }

        let new_ext = find_extrema(&err, &grid, bands, r + 1);
        let Some(new_ext) = new_ext else {
            return Err(Error::Design {
                iterations: iter,
                reason: "fewer alternation points than required".into(),
            });
        };
        let max_err = new_ext.iter().map(|&i| err[i].abs()).fold(0.0, f64::max);
        let min_err = new_ext.iter().map(|&i| err[i].abs()).fold(f64::INFINITY, f64::min);
        let done = new_ext == ext || (max_err - min_err) <= 1e-9 * max_err;
        ext = new_ext;
        if done {
            let taps = impulse_response(len, |f| {
                let xv = (2.0 * PI * f).cos();
                interp(xv)
            });
            return Ok(RemezResult {
                taps,
                delta: delta.abs(),
                iterations: iter,
            });
        }
    }
    Err(Error::Design {
        iterations: MAX_ITERATIONS,
        reason: format!("extremal set did not settle (|delta| = {:.3e})", delta.abs()),
    })
}

/// Barycentric weight of node `k` among the first `r` nodes.
fn bary_r(x: &[f64], k: usize, r: usize) -> f64 {
    let mut prod = 1.0;
    for j in 0..r {
        if j != k {
            prod *= 2.0 * (x[k] - x[j]);
        }
    }
    1.0 / prod
}

/// Picks `count` alternating extrema of the weighted error.
fn find_extrema(err: &[f64], grid: &[f64], bands: &[Band], count: usize) -> Option<Vec<usize>> {
    let ng = err.len();
    let in_same_band = |a: usize, b: usize| {
        bands
            .iter()
            .any(|bd| grid[a] >= bd.lo && grid[a] <= bd.hi && grid[b] >= bd.lo && grid[b] <= bd.hi)
    };
    let mut cand = Vec::new();
    for i in 0..ng {
        let e = err[i];
        if e == 0.0 {
            continue;
        }
        let left = (i > 0 && in_same_band(i - 1, i)).then(|| err[i - 1]);
        let right = (i + 1 < ng && in_same_band(i, i + 1)).then(|| err[i + 1]);
        let is_peak = if e > 0.0 {
            left.is_none_or(|l| e >= l) && right.is_none_or(|r| e > r)
        } else {
            left.is_none_or(|l| e <= l) && right.is_none_or(|r| e < r)
        };
        if is_peak {
            cand.push(i);
        }
    }
    // Merge neighbours with equal sign, keeping the larger error.
    let mut alt: Vec<usize> = Vec::new();
    for i in cand {
        match alt.last() {
            Some(&j) if err[j].signum() == err[i].signum() => {
                if err[i].abs() > err[j].abs() {
                    *alt.last_mut().unwrap() = i;
                }
            }
            _ => alt.push(i),
        }
    }
    if alt.len() < count {
        return None;
    }
    // Drop the weaker end until the set has the required size.
    while alt.len() > count {
        if err[alt[0]].abs() < err[*alt.last().unwrap()].abs() {
            alt.remove(0);
        } else {
            alt.pop();
        }
    }
    Some(alt)
}

/// Taps of a type-I filter whose amplitude response is `amp`.
fn impulse_response(len: usize, amp: impl Fn(f64) -> f64) -> Vec<f64> {
    let m = (len - 1) / 2;
    let samples: Vec<f64> = (0..len).map(|k| amp(k as f64 / len as f64)).collect();
    let mut taps = vec![0.0; len];
    for n in 0..=m {
        let mut acc = 0.0;
        for (k, a) in samples.iter().enumerate() {
            acc += a * (2.0 * PI * (k * n) as f64 / len as f64).cos();
        }
        let h = acc / len as f64;
        taps[m + n] = h;
        taps[m - n] = h;
    }
    taps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amplitude(taps: &[f64], f: f64) -> f64 {
        let m = (taps.len() - 1) / 2;
        taps.iter()
            .enumerate()
            .map(|(n, h)| h * (2.0 * PI * f * (n as f64 - m as f64)).cos())
            .sum()
    }

    #[test]
    fn textbook_lowpass_is_equiripple() {
        let bands = [
            Band { lo: 0.0, hi: 0.1, desired: 1.0, weight: 1.0 },
            Band { lo: 0.2, hi: 0.5, desired: 0.0, weight: 1.0 },
        ];
        let res = remez_type1(25, &bands).unwrap();
        let mut pass_err: f64 = 0.0;
        let mut stop_err: f64 = 0.0;
        for i in 0..=1000 {
            let f = 0.5 * i as f64 / 1000.0;
            let a = amplitude(&res.taps, f);
            if f <= 0.1 {
                pass_err = pass_err.max((a - 1.0).abs());
            } else if f >= 0.2 {
                stop_err = stop_err.max(a.abs());
            }
        }
        // Both bands touch the same ripple level within grid resolution.
        assert!((pass_err - res.delta).abs() < 0.05 * res.delta, "{pass_err} {}", res.delta);
        assert!((stop_err - res.delta).abs() < 0.05 * res.delta, "{stop_err} {}", res.delta);
        assert!(res.delta < 1e-2);
    }

    #[test]
    fn even_length_rejected() {
        let bands = [Band { lo: 0.0, hi: 0.5, desired: 1.0, weight: 1.0 }];
        assert!(remez_type1(10, &bands).is_err());
    }
}
