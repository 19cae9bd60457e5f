//! Elementary functions of the central ratio and their orbits.
//!
//! Everything is expressed through `e = ω − 1 = √(8x+1) − 1`, which can be
//! evaluated without cancellation for small `x` and without overflow for
//! large `x`. The quantities `c − 1`, `d − 1` and `s` are then polynomial or
//! rational in `e` with no subtraction of nearly equal terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The closed-form values attached to a single positive argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elementary {
    pub omega: f64,
    pub c: f64,
    pub d: f64,
    pub s: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

/// `ω(x) − 1`, accurate across the whole positive axis.
///
/// Accepts `0` and `+∞` so that orbit code can pass through saturated
/// values; callers that need a domain check do it themselves.
pub fn omega_minus_one(x: f64) -> f64 {
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x < 1.0 {
        8.0 * x / ((8.0 * x + 1.0).sqrt() + 1.0)
    } else {
        8f64.sqrt() * (x + 0.125).sqrt() - 1.0
    }
}

/// `c(x) − 1 = e(e+8)/16`.
pub fn c_minus_one(x: f64) -> f64 {
    let e = omega_minus_one(x);
    if e.is_infinite() {
        return f64::INFINITY;
    }
    e * (e + 8.0) / 16.0
}

/// `d(x) − 1 = e²/(8(e+2))`.
pub fn d_minus_one(x: f64) -> f64 {
    let e = omega_minus_one(x);
    if e.is_infinite() {
        return f64::INFINITY;
    }
    e * (e / (8.0 * (e + 2.0)))
}

/// `s(x) = (ω−1)²/(4(ω+7))`, extended by `s(0) = 0` and `s(∞) = ∞`.
pub fn s(x: f64) -> f64 {
    let e = omega_minus_one(x);
    if e.is_infinite() {
        return f64::INFINITY;
    }
    e * (e / (4.0 * (e + 8.0)))
}

/// `s₋₁(y) = 1/s(1/y)`, extended by `s₋₁(0) = 0` and `s₋₁(∞) = ∞`.
pub fn s_inverse_raw(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    1.0 / s(1.0 / y)
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be a positive finite real, got {x}")))
    }
}

/// All closed-form quantities at `x`.
pub fn elementary(x: f64) -> Result<Elementary> {
    check_positive(x, "x")?;
    let e = omega_minus_one(x);
    let c = 1.0 + c_minus_one(x);
    let d = 1.0 + d_minus_one(x);
    Ok(Elementary {
        omega: 1.0 + e,
        c,
        d,
        s: s(x),
        beta: e / 4.0,
        gamma: 1.0 / c,
        delta: 1.0 / d,
    })
}

/// Checked inverse of `s`.
pub fn s_inverse(y: f64) -> Result<f64> {
    check_positive(y, "y")?;
    let v = s_inverse_raw(y);
    if !v.is_finite() {
        return Err(Error::Range(format!("s_inverse({y}) overflows")));
    }
    Ok(v)
}

/// `s_k(x)`: `k` forward applications of `s` for `k ≥ 0`, `|k|` applications
/// of `s₋₁` for `k < 0`.
pub fn s_orbit(x: f64, k: i64) -> Result<f64> {
    check_positive(x, "x")?;
    let mut v = x;
    if k >= 0 {
        for _ in 0..k {
            v = s(v);
        }
    } else {
        for _ in 0..(-k) {
            v = s_inverse_raw(v);
        }
    }
    if !v.is_finite() {
        return Err(Error::Range(format!("s_{k}({x}) overflows")));
    }
    if v < f64::MIN_POSITIVE {
        return Err(Error::Range(format!("s_{k}({x}) underflows")));
    }
    Ok(v)
}

/// The orbit `{s_i(x) : lo ≤ i ≤ hi}` with saturation to `0` and `∞`
/// instead of errors.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    lo: i64,
    values: Vec<f64>,
}

impl Orbit {
    pub fn new(x: f64, lo: i64, hi: i64) -> Self {
        assert!(lo <= 0 && hi >= 0, "orbit range must contain 0");
        let mut values = vec![0.0; (hi - lo + 1) as usize];
        let zero = (-lo) as usize;
        values[zero] = x;
        for i in 1..=(hi as usize) {
            values[zero + i] = s(values[zero + i - 1]);
        }
        for i in 1..=((-lo) as usize) {
            values[zero - i] = s_inverse_raw(values[zero - i + 1]);
        }
        Orbit { lo, values }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, i: i64) -> f64 {
        self.values[(i - self.lo) as usize]
    }
}
