//! Bessel functions of the first kind for integer order, and their zeros.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 200;
pub const MAX_ARGUMENT: f64 = 1e4;

/// Below this argument the power series is used directly.
const SERIES_LIMIT: f64 = 1.0;
const RESCALE_ABOVE: f64 = 1e250;

fn check_domain(n: i64, x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > MAX_ARGUMENT {
        return Err(Error::Domain(format!("Bessel argument {x} outside |x| <= {MAX_ARGUMENT}")));
    }
    if n.unsigned_abs() > MAX_ORDER as u64 {
        return Err(Error::Domain(format!("Bessel order {n} outside |n| <= {MAX_ORDER}")));
    }
    Ok(())
}

/// `J_n(x)` for integer `n`, using `J_{-n} = (-1)^n J_n` and
/// `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    check_domain(n as i64, x)?;
    let order = n.unsigned_abs() as usize;
    let value = orders_nonnegative(order, x.abs())[order];
    let flips = (n < 0) as u32 + (x < 0.0) as u32;
    Ok(if flips % 2 == 1 && order % 2 == 1 { -value } else { value })
}

/// `[J_0(x), J_1(x), ..., J_{n_max}(x)]` from a single evaluation pass.
pub fn bessel_j_orders(n_max: u32, x: f64) -> Result<Vec<f64>> {
    check_domain(n_max as i64, x)?;
    let mut values = orders_nonnegative(n_max as usize, x.abs());
    if x < 0.0 {
        values.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
    }
    Ok(values)
}

fn orders_nonnegative(n_max: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        return v;
    }
    if x <= SERIES_LIMIT {
        return (0..=n_max).map(|n| series(n, x)).collect();
    }
    miller(n_max, x)
}

/// `Σ_k (-1)^k (x/2)^{2k+n} / (k! (n+k)!)`; no cancellation for `x <= 1`.
fn series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= half / i as f64;
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Backward recurrence `J_{k-1} = (2k/x) J_k − J_{k+1}` from far above both
/// `n_max` and `x`, normalized with `J_0 + 2 Σ J_{2k} = 1`.
fn miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = (n_max as f64).max(x.ceil());
    let mut start = (top + 20.0 + (40.0 * top).sqrt().ceil()) as usize;
    start += start % 2;

    let mut out = vec![0.0; n_max + 1];
    let mut above = 0.0; // J_{k+1}
    let mut current = 1e-300; // J_k
    let mut even_sum = 0.0; // J_0 + 2 Σ J_{2k}, unnormalized
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * current - above;
        above = current;
        current = below;
        let idx = k - 1;
        if idx <= n_max {
            out[idx] = current;
        }
        if idx % 2 == 0 {
            even_sum += if idx == 0 { current } else { 2.0 * current };
        }
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            current *= s;
            above *= s;
            even_sum *= s;
            out.iter_mut().for_each(|v| *v *= s);
        }
    }
    let norm = 1.0 / even_sum;
    out.iter_mut().for_each(|v| *v *= norm);
    out
}

const SCAN_STEP: f64 = 0.1;

/// The first `k` positive zeros `j_{n,1} < ... < j_{n,k}` of `J_n`.
///
/// Zeros are bracketed by a sign-change scan and refined by bisection to
/// full double precision. The scan starts at `n` (there are no positive zeros
/// of `J_n` below it), and after each zero it resumes one unit higher:
/// consecutive zeros of any integer order are more than 2.9 apart.
pub fn bessel_zeros(n: i32, k: usize) -> Result<Vec<f64>> {
    let order = n.unsigned_abs() as i32;
    check_domain(order as i64, 0.0)?;
    let f = |x: f64| bessel_j(order, x);
    let mut zeros = Vec::with_capacity(k);
    let mut lo = if order == 0 { SCAN_STEP } else { order as f64 };
    let mut f_lo = f(lo)?;
    while zeros.len() < k {
        let hi = lo + SCAN_STEP;
        if hi > MAX_ARGUMENT {
            return Err(Error::Domain(format!(
                "only {} zeros of J_{order} lie below {MAX_ARGUMENT}, {k} requested",
                zeros.len()
            )));
        }
        let f_hi = f(hi)?;
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            let z = if f_lo == 0.0 { lo } else { bisect(&f, lo, hi, f_lo)? };
            zeros.push(z);
            lo = z + 1.0;
            f_lo = f(lo)?;
        } else {
            lo = hi;
            f_lo = f_hi;
        }
    }
    Ok(zeros)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
