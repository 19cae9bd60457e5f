//! Windowed ABMN solutions: explicit default and standard constructions,
//! the normalising sum `Z`, solution transforms, the φ-sequence and
//! residuals.
//!
//! A [`Quadruple`] keeps the first differences of `m` and `n` as primary
//! data. Stakes and φ are ratios of these differences, so keeping them
//! separately avoids losing the doubly exponentially small increments to
//! cancellation against payoffs of order one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::elementary::{c_minus_one, d_minus_one, s, s_inverse_raw, Orbit};
use crate::error::{Error, Result};

/// Default absolute tolerance for residuals and anchors.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Values below this are reported as saturated rather than trusted.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

const MAX_TAIL_TERMS: usize = 256;

/// An integer interval `⟦lo, hi⟧`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    /// A window with at least three points.
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi - lo + 1 < 3 {
            return Err(Error::Window(format!("⟦{lo}, {hi}⟧ has fewer than three points")));
        }
        Ok(Window { lo, hi })
    }

    /// `⟦-r, r⟧`.
    pub fn symmetric(r: i64) -> Result<Self> {
        Self::new(-r, r)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Parses `lo:hi`, e.g. `-8:8`. The three-point minimum is not enforced
/// here so that trails such as `-1:1` can be parsed too.
impl FromStr for Window {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (lo, hi) = text
            .split_once(':')
            .ok_or_else(|| Error::Window(format!("expected lo:hi, got {text:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Window(format!("bad integer {t:?} in {text:?}")))
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if hi < lo {
            return Err(Error::Window(format!("empty interval {text:?}")));
        }
        Ok(Window { lo, hi })
    }
}

/// Terminal receipts of the game. For a finite trail the limits are the
/// endpoint values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub m_minus_inf: f64,
    pub m_plus_inf: f64,
    pub n_minus_inf: f64,
    pub n_plus_inf: f64,
    /// Maxine's receipt when the counter never escapes.
    pub m_star: f64,
    /// Mina's receipt when the counter never escapes.
    pub n_star: f64,
}

impl BoundaryData {
    /// Boundary data with the non-escape receipts at their caps.
    pub fn new(m_minus_inf: f64, m_plus_inf: f64, n_minus_inf: f64, n_plus_inf: f64) -> Result<Self> {
        Self::with_stars(m_minus_inf, m_plus_inf, n_minus_inf, n_plus_inf, m_minus_inf, n_plus_inf)
    }

    pub fn with_stars(
        m_minus_inf: f64,
        m_plus_inf: f64,
        n_minus_inf: f64,
        n_plus_inf: f64,
        m_star: f64,
        n_star: f64,
    ) -> Result<Self> {
        let b = BoundaryData { m_minus_inf, m_plus_inf, n_minus_inf, n_plus_inf, m_star, n_star };
        b.validate()?;
        Ok(b)
    }

    /// `(m₋∞, m∞, n₋∞, n∞) = (0, 1, 1, 0)`.
    pub fn symmetric_standard() -> Self {
        BoundaryData {
            m_minus_inf: 0.0,
            m_plus_inf: 1.0,
            n_minus_inf: 1.0,
            n_plus_inf: 0.0,
            m_star: 0.0,
            n_star: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.m_minus_inf,
            self.m_plus_inf,
            self.n_minus_inf,
            self.n_plus_inf,
            self.m_star,
            self.n_star,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Boundary("all boundary values must be finite".into()));
        }
        if self.m_minus_inf >= self.m_plus_inf {
            return Err(Error::Boundary("need m₋∞ < m∞".into()));
        }
        if self.n_plus_inf >= self.n_minus_inf {
            return Err(Error::Boundary("need n∞ < n₋∞".into()));
        }
        if self.m_star > self.m_minus_inf {
            return Err(Error::Boundary("need m* ≤ m₋∞".into()));
        }
        if self.n_star > self.n_plus_inf {
            return Err(Error::Boundary("need n* ≤ n∞".into()));
        }
        Ok(())
    }

    /// `(n₋∞ − n∞)/(m∞ − m₋∞)`.
    pub fn mina_margin(&self) -> f64 {
        (self.n_minus_inf - self.n_plus_inf) / (self.m_plus_inf - self.m_minus_inf)
    }
}

/// Which normalisation produced a quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Default,
    Standard,
    /// Restricted to a finite trail and normalised so that Maxine's
    /// endpoint receipts are `0` and `1` and Mina's right receipt is `0`.
    FiniteStandard,
    Transformed,
}

/// A windowed solution `(a, b, m, n)`.
///
/// `a`, `b` live on the open-play window `⟦lo, hi⟧`; `m`, `n` on
/// `⟦lo−1, hi+1⟧`. `m_inc[j]` is `m_{i+1} − m_i` and `n_dec[j]` is
/// `n_i − n_{i+1}` for `i = lo − 1 + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub window: Window,
    pub form: Form,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    pub m_inc: Vec<f64>,
    pub n_dec: Vec<f64>,
    pub boundary: BoundaryData,
    pub cen_ratio: Option<f64>,
}

/// Stakes of the one-turn game with prize gaps `big_m` and `big_n`.
pub(crate) fn forfeit_stakes(big_m: f64, big_n: f64) -> (f64, f64) {
    let total = big_m + big_n;
    if total <= 0.0 {
        return (0.0, 0.0);
    }
    let p = big_m / total;
    let q = big_n / total;
    let pq = p * q;
    (big_m * pq, big_n * pq)
}

impl Quadruple {
    /// Builds a quadruple from anchors and differences; stakes follow from
    /// the differences.
    pub fn from_increments(
        window: Window,
        form: Form,
        m_left: f64,
        n_right: f64,
        m_inc: Vec<f64>,
        n_dec: Vec<f64>,
        boundary: BoundaryData,
    ) -> Self {
        let len = window.len();
        assert_eq!(m_inc.len(), len + 1);
        assert_eq!(n_dec.len(), len + 1);
        let mut m = vec![0.0; len + 2];
        m[0] = m_left;
        for j in 0..=len {
            m[j + 1] = m[j] + m_inc[j];
        }
        let mut n = vec![0.0; len + 2];
        n[len + 1] = n_right;
        for j in (0..=len).rev() {
            n[j] = n[j + 1] + n_dec[j];
        }
        let mut a = vec![0.0; len];
        let mut b = vec![0.0; len];
        for j in 0..len {
            let (aj, bj) = forfeit_stakes(m_inc[j] + m_inc[j + 1], n_dec[j] + n_dec[j + 1]);
            a[j] = aj;
            b[j] = bj;
        }
        let mut q = Quadruple { window, form, a, b, m, n, m_inc, n_dec, boundary, cen_ratio: None };
        q.cen_ratio = q.ratio_at(0);
        q
    }

    fn slot(&self, i: i64) -> usize {
        assert!(self.window.contains(i), "index {i} outside window {}", self.window);
        (i - self.window.lo) as usize
    }

    fn payoff_slot(&self, i: i64) -> usize {
        assert!(
            self.window.lo - 1 <= i && i <= self.window.hi + 1,
            "payoff index {i} outside ⟦{}, {}⟧",
            self.window.lo - 1,
            self.window.hi + 1
        );
        (i - self.window.lo + 1) as usize
    }

    pub fn a_at(&self, i: i64) -> f64 {
        self.a[self.slot(i)]
    }

    pub fn b_at(&self, i: i64) -> f64 {
        self.b[self.slot(i)]
    }

    pub fn m_at(&self, i: i64) -> f64 {
        self.m[self.payoff_slot(i)]
    }

    pub fn n_at(&self, i: i64) -> f64 {
        self.n[self.payoff_slot(i)]
    }

    /// `m_{i+1} − m_i` for `lo−1 ≤ i ≤ hi`.
    pub fn m_step(&self, i: i64) -> f64 {
        self.m_inc[self.payoff_slot(i)]
    }

    /// `n_i − n_{i+1}` for `lo−1 ≤ i ≤ hi`.
    pub fn n_step(&self, i: i64) -> f64 {
        self.n_dec[self.payoff_slot(i)]
    }

    /// `φ_i = (n_{i−1} − n_i)/(m_i − m_{i−1})` when `i` lies in the window.
    pub fn ratio_at(&self, i: i64) -> Option<f64> {
        if !self.window.contains(i) {
            return None;
        }
        Some(self.n_step(i - 1) / self.m_step(i - 1))
    }

    pub fn mina_margin(&self) -> f64 {
        self.boundary.mina_margin()
    }

    /// Indices where a stake fell below [`UNDERFLOW_FLOOR`].
    pub fn saturated_indices(&self) -> Vec<i64> {
        self.window
            .indices()
            .filter(|&i| !(self.a_at(i) >= UNDERFLOW_FLOOR && self.b_at(i) >= UNDERFLOW_FLOOR))
            .collect()
    }

    /// Stakes positive, `m` increasing, `n` decreasing, checked on the
    /// differences and skipping saturated entries.
    pub fn check_strict(&self) -> Result<()> {
        for j in 0..self.m_inc.len() {
            let (mi, nd) = (self.m_inc[j], self.n_dec[j]);
            if !(mi >= 0.0 && nd >= 0.0) {
                return Err(Error::NotStrict { vertex: self.window.lo - 1 + j as i64 });
            }
        }
        Ok(())
    }

    /// Per-index maximum absolute residual of the four ABMN equations,
    /// evaluated in difference form.
    pub fn residuals(&self) -> Vec<f64> {
        self.window
            .indices()
            .map(|i| {
                let (a, b) = (self.a_at(i), self.b_at(i));
                let (m_down, m_up) = (self.m_step(i - 1), self.m_step(i));
                let (n_down, n_up) = (self.n_step(i - 1), self.n_step(i));
                let t = a + b;
                let r1 = t * a - (a * m_up - b * m_down);
                let r2 = t * b - (b * n_down - a * n_up);
                let r3 = t * t - b * (m_up + m_down);
                let r4 = t * t - a * (n_down + n_up);
                r1.abs().max(r2.abs()).max(r3.abs()).max(r4.abs())
            })
            .collect()
    }

    /// Residuals evaluated on the absolute payoffs as written in the system.
    pub fn residuals_absolute(&self) -> Vec<f64> {
        self.window
            .indices()
            .map(|i| {
                let (a, b) = (self.a_at(i), self.b_at(i));
                let (ml, mc, mr) = (self.m_at(i - 1), self.m_at(i), self.m_at(i + 1));
                let (nl, nc, nr) = (self.n_at(i - 1), self.n_at(i), self.n_at(i + 1));
                let t = a + b;
                let r1 = t * (mc + a) - (a * mr + b * ml);
                let r2 = t * (nc + b) - (a * nr + b * nl);
                let r3 = t * t - b * (mr - ml);
                let r4 = t * t - a * (nl - nr);
                r1.abs().max(r2.abs()).max(r3.abs()).max(r4.abs())
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }

    /// φ-sequence and battlefield index.
    pub fn phi_view(&self) -> Result<PhiView> {
        let phi: Vec<f64> = self.window.indices().map(|i| self.ratio_at(i).unwrap()).collect();
        let battlefield = self
            .window
            .indices()
            .zip(&phi)
            .find(|(_, &p)| p > 1.0 / 3.0 && p <= 3.0)
            .map(|(i, _)| i)
            .ok_or(Error::BattlefieldOutsideWindow { lo: self.window.lo, hi: self.window.hi })?;
        let saturated = self
            .window
            .indices()
            .zip(&phi)
            .filter(|(_, &p)| !(p.is_finite() && p >= UNDERFLOW_FLOOR))
            .map(|(i, _)| i)
            .collect();
        Ok(PhiView { lo: self.window.lo, phi, battlefield, saturated })
    }

    /// Applies a symmetry of the system.
    pub fn transform(&self, kind: Transform) -> Result<Quadruple> {
        let mut out = match kind {
            Transform::Dilate(u) => {
                if !(u > 0.0 && u.is_finite()) {
                    return Err(Error::Domain(format!("dilation factor must be positive, got {u}")));
                }
                let scale = |v: &Vec<f64>| v.iter().map(|x| x * u).collect::<Vec<_>>();
                let bd = &self.boundary;
                Quadruple {
                    window: self.window,
                    form: Form::Transformed,
                    a: scale(&self.a),
                    b: scale(&self.b),
                    m: scale(&self.m),
                    n: scale(&self.n),
                    m_inc: scale(&self.m_inc),
                    n_dec: scale(&self.n_dec),
                    boundary: BoundaryData {
                        m_minus_inf: bd.m_minus_inf * u,
                        m_plus_inf: bd.m_plus_inf * u,
                        n_minus_inf: bd.n_minus_inf * u,
                        n_plus_inf: bd.n_plus_inf * u,
                        m_star: bd.m_star * u,
                        n_star: bd.n_star * u,
                    },
                    cen_ratio: None,
                }
            }
            Transform::Translate(dm, dn) => {
                let bd = &self.boundary;
                Quadruple {
                    form: Form::Transformed,
                    m: self.m.iter().map(|x| x + dm).collect(),
                    n: self.n.iter().map(|x| x + dn).collect(),
                    boundary: BoundaryData {
                        m_minus_inf: bd.m_minus_inf + dm,
                        m_plus_inf: bd.m_plus_inf + dm,
                        n_minus_inf: bd.n_minus_inf + dn,
                        n_plus_inf: bd.n_plus_inf + dn,
                        m_star: bd.m_star + dm,
                        n_star: bd.n_star + dn,
                    },
                    ..self.clone()
                }
            }
            Transform::Shift(k) => Quadruple {
                window: Window { lo: self.window.lo - k, hi: self.window.hi - k },
                form: Form::Transformed,
                ..self.clone()
            },
            Transform::RoleReverse => {
                let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
                let bd = &self.boundary;
                Quadruple {
                    window: Window { lo: -self.window.hi, hi: -self.window.lo },
                    form: Form::Transformed,
                    a: rev(&self.b),
                    b: rev(&self.a),
                    m: rev(&self.n),
                    n: rev(&self.m),
                    m_inc: rev(&self.n_dec),
                    n_dec: rev(&self.m_inc),
                    boundary: BoundaryData {
                        m_minus_inf: bd.n_plus_inf,
                        m_plus_inf: bd.n_minus_inf,
                        n_minus_inf: bd.m_plus_inf,
                        n_plus_inf: bd.m_minus_inf,
                        m_star: bd.n_star,
                        n_star: bd.m_star,
                    },
                    cen_ratio: None,
                }
            }
        };
        out.cen_ratio = out.ratio_at(0);
        Ok(out)
    }
}

/// Symmetries acting on solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Multiply every entry by `u > 0`.
    Dilate(f64),
    /// Add constants to `m` and `n`.
    Translate(f64, f64),
    /// Left shift by `k` places: entry `i` of the result is entry `i + k`.
    Shift(i64),
    /// Swap the players and reflect the trail.
    RoleReverse,
}

/// φ-sequence over a window. Entries listed in `saturated` under- or
/// overflowed and carry no information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiView {
    pub lo: i64,
    pub phi: Vec<f64>,
    pub battlefield: i64,
    pub saturated: Vec<i64>,
}

impl PhiView {
    pub fn get(&self, i: i64) -> f64 {
        self.phi[(i - self.lo) as usize]
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.phi.len() as i64 - 1
    }
}

/// Running sum of a series whose successive ratios are non-increasing;
/// stops once the geometric bound on the remainder is below the tolerance.
struct TailSum {
    sum: f64,
    term: f64,
}

impl TailSum {
    fn done(&self, ratio: f64, tol: f64) -> bool {
        if self.term == 0.0 {
            return true;
        }
        ratio < 1.0 && self.term * ratio / (1.0 - ratio) <= tol.min(f64::EPSILON * 0.25 * self.sum)
    }
}

/// Sums the `m` and `n` differences strictly to the right of index `k`,
/// given the orbit value `s_k(x)` and the differences at `k`.
fn right_tail(mut v: f64, m_k: f64, n_k: f64, tol: f64) -> Result<(f64, f64)> {
    let mut tm = TailSum { sum: 0.0, term: m_k };
    let mut tn = TailSum { sum: 0.0, term: n_k };
    for _ in 0..MAX_TAIL_TERMS {
        v = s(v);
        let (rm, rn) = (c_minus_one(v), d_minus_one(v));
        tm.term = if tm.term == 0.0 { 0.0 } else { tm.term * rm };
        tn.term = if tn.term == 0.0 { 0.0 } else { tn.term * rn };
        if !(tm.term.is_finite() && tn.term.is_finite()) {
            return Err(Error::Range("right tail overflows".into()));
        }
        tm.sum += tm.term;
        tn.sum += tn.term;
        if tm.done(rm, tol) && tn.done(rn, tol) {
            return Ok((tm.sum, tn.sum));
        }
    }
    Err(Error::Convergence("right tail needs more terms than allowed".into()))
}

/// Sums the differences strictly to the left of index `k`, given the
/// orbit value `s_k(x)` and the differences at `k`. Passing to the left
/// divides by `c − 1` (resp. `d − 1`) evaluated at `s_k`.
fn left_tail(mut v: f64, m_k: f64, n_k: f64, tol: f64) -> Result<(f64, f64)> {
    let mut tm = TailSum { sum: 0.0, term: m_k };
    let mut tn = TailSum { sum: 0.0, term: n_k };
    for _ in 0..MAX_TAIL_TERMS {
        let (rm, rn) = (1.0 / c_minus_one(v), 1.0 / d_minus_one(v));
        tm.term = if tm.term == 0.0 { 0.0 } else { tm.term * rm };
        tn.term = if tn.term == 0.0 { 0.0 } else { tn.term * rn };
        if !(tm.term.is_finite() && tn.term.is_finite()) {
            return Err(Error::Range("left tail overflows".into()));
        }
        tm.sum += tm.term;
        tn.sum += tn.term;
        v = s_inverse_raw(v);
        let (next_m, next_n) = (1.0 / c_minus_one(v), 1.0 / d_minus_one(v));
        if tm.done(next_m, tol) && tn.done(next_n, tol) {
            return Ok((tm.sum, tn.sum));
        }
    }
    Err(Error::Convergence("left tail needs more terms than allowed".into()))
}

/// Differences `m_{k+1} − m_k` and `n_k − n_{k+1}` of the default solution
/// for `k ∈ ⟦lo, hi⟧` (with `lo ≤ −1 ≤ hi`), together with the orbit used.
fn default_differences(x: f64, lo: i64, hi: i64) -> (Vec<f64>, Vec<f64>, Orbit) {
    let orbit = Orbit::new(x, lo.min(0), hi.max(0));
    let len = (hi - lo + 1) as usize;
    let mut mi = vec![0.0; len];
    let mut nd = vec![0.0; len];
    let at = |k: i64| (k - lo) as usize;
    let (mut pm, mut pn) = (1.0, x);
    if lo <= -1 && -1 <= hi {
        mi[at(-1)] = pm;
        nd[at(-1)] = pn;
    }
    for k in 0..=hi {
        let v = orbit.get(k);
        pm *= c_minus_one(v);
        pn *= d_minus_one(v);
        if k >= lo {
            mi[at(k)] = pm;
            nd[at(k)] = pn;
        }
    }
    let (mut pm, mut pn) = (1.0, x);
    for k in (lo..=-2).rev() {
        let v = orbit.get(k + 1);
        pm /= c_minus_one(v);
        pn /= d_minus_one(v);
        if k <= hi {
            mi[at(k)] = pm;
            nd[at(k)] = pn;
        }
    }
    (mi, nd, orbit)
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("central ratio must be positive and finite, got {x}")))
    }
}

/// `Z(x) = Σ_k Π_{i=0}^{k} (c_i(x) − 1)`, with the remainder of both tails
/// bounded below `tol`.
pub fn z_sum(x: f64, tol: f64) -> Result<f64> {
    check_x(x)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let (mi, _, orbit) = default_differences(x, -1, 0);
    let (right, _) = right_tail(orbit.get(0), mi[1], 0.0, tol)?;
    let (left, _) = left_tail(orbit.get(-1), mi[0], 0.0, tol)?;
    let z = mi[0] + mi[1] + right + left;
    if !z.is_finite() {
        return Err(Error::Range(format!("Z({x}) overflows")));
    }
    Ok(z)
}

/// `Z` with saturation: `∞` where the orbit leaves floating range.
pub(crate) fn z_saturating(x: f64) -> f64 {
    if !(x > 0.0) || x.is_infinite() {
        return f64::INFINITY;
    }
    z_sum(x, f64::MIN_POSITIVE).unwrap_or(f64::INFINITY)
}

/// The default solution with central ratio `x`: `m_0 − m_{−1} = 1`,
/// `m₋∞ = 0`, `n∞ = 0`.
pub fn default_solution(x: f64, window: Window) -> Result<Quadruple> {
    check_x(x)?;
    let window = Window::new(window.lo, window.hi)?;
    if !window.contains(0) {
        return Err(Error::Window(format!("window {window} must contain 0")));
    }
    let (mi, nd, orbit) = default_differences(x, window.lo - 1, window.hi);
    if mi.iter().chain(&nd).any(|v| !v.is_finite()) {
        return Err(Error::Range(format!("differences overflow for x = {x}")));
    }
    let tol = f64::MIN_POSITIVE;
    let last = mi.len() - 1;
    let (m_left, n_left_tail) = left_tail(orbit.get(window.lo - 1), mi[0], nd[0], tol)?;
    let (m_right_tail, n_right) = right_tail(orbit.get(window.hi), mi[last], nd[last], tol)?;
    let m_total = m_left + mi.iter().sum::<f64>() + m_right_tail;
    let n_total = n_left_tail + nd.iter().sum::<f64>() + n_right;
    let boundary = BoundaryData {
        m_minus_inf: 0.0,
        m_plus_inf: m_total,
        n_minus_inf: n_total,
        n_plus_inf: 0.0,
        m_star: 0.0,
        n_star: 0.0,
    };
    let mut q = Quadruple::from_increments(window, Form::Default, m_left, n_right, mi, nd, boundary);
    q.cen_ratio = Some(x);
    Ok(q)
}

/// The default solution divided by `Z(x)`, so that `m∞ − m₋∞ = 1`.
pub fn standard_solution(x: f64, window: Window) -> Result<Quadruple> {
    let d = default_solution(x, window)?;
    let z = d.boundary.m_plus_inf;
    let mut q = d.transform(Transform::Dilate(1.0 / z))?;
    q.form = Form::Standard;
    q.boundary.m_plus_inf = 1.0;
    q.cen_ratio = Some(x);
    Ok(q)
}

/// The default solution restricted to the finite trail `⟦lo, hi⟧` and
/// rescaled so that `m_lo = 0`, `m_hi = 1` and `n_hi = 0`. The boundary
/// record then holds the endpoint values and `n_lo` is the finite-trail
/// Mina margin.
pub fn finite_standard_solution(x: f64, trail: Window) -> Result<Quadruple> {
    check_x(x)?;
    let window = Window::new(trail.lo + 1, trail.hi - 1)?;
    if !window.contains(0) {
        return Err(Error::Window(format!("open play ⟦{}, {}⟧ must contain 0", window.lo, window.hi)));
    }
    let (mi, nd, _) = default_differences(x, trail.lo, trail.hi - 1);
    let m_span: f64 = mi.iter().sum();
    let n_span: f64 = nd.iter().sum();
    if !(m_span.is_finite() && n_span.is_finite()) {
        return Err(Error::Range(format!("differences overflow for x = {x}")));
    }
    let mi: Vec<f64> = mi.iter().map(|v| v / m_span).collect();
    let nd: Vec<f64> = nd.iter().map(|v| v / m_span).collect();
    let margin = n_span / m_span;
    let boundary = BoundaryData {
        m_minus_inf: 0.0,
        m_plus_inf: 1.0,
        n_minus_inf: margin,
        n_plus_inf: 0.0,
        m_star: 0.0,
        n_star: 0.0,
    };
    Ok(Quadruple::from_increments(window, Form::FiniteStandard, 0.0, 0.0, mi, nd, boundary))
}

/// The standard solution assembled from the alternative closed forms:
/// `a_k = g(s_k)`, `b_k = h(s_k)`, `m_k − m_{k−1} = 1/Z(s_k)` and
/// `n_{k−1} − n_k = s_k/Z(s_k)`.
pub fn standard_solution_closed_form(x: f64, window: Window) -> Result<Quadruple> {
    check_x(x)?;
    let window = Window::new(window.lo, window.hi)?;
    let reach = 64;
    let orbit = Orbit::new(x, (window.lo - reach).min(0), (window.hi + reach).max(0));
    let weight = |k: i64| {
        let y = orbit.get(k);
        let z = z_saturating(y);
        if z.is_infinite() {
            (0.0, 0.0)
        } else {
            (1.0 / z, y / z)
        }
    };
    let mut m_left = 0.0;
    for k in (window.lo - reach)..window.lo {
        m_left += weight(k).0;
    }
    let mut n_right = 0.0;
    for k in (window.hi + 2)..=(window.hi + reach) {
        n_right += weight(k).1;
    }
    let (mut mi, mut nd) = (Vec::new(), Vec::new());
    for k in window.lo..=(window.hi + 1) {
        let (wm, wn) = weight(k);
        mi.push(wm);
        nd.push(wn);
    }
    let n_total = n_right + nd.iter().sum::<f64>() + {
        let mut t = 0.0;
        for k in (window.lo - reach)..window.lo {
            t += weight(k).1;
        }
        t
    };
    let boundary = BoundaryData {
        m_minus_inf: 0.0,
        m_plus_inf: 1.0,
        n_minus_inf: n_total,
        n_plus_inf: 0.0,
        m_star: 0.0,
        n_star: 0.0,
    };
    let mut q = Quadruple::from_increments(window, Form::Standard, m_left, n_right, mi, nd, boundary);
    for i in window.indices() {
        let (a, b) = closed_form_stakes(orbit.get(i));
        let j = (i - window.lo) as usize;
        q.a[j] = a;
        q.b[j] = b;
    }
    q.cen_ratio = Some(x);
    Ok(q)
}

/// `(g(y), h(y))` with `f(y) = y c d/(c + y d)²`, `g = c f/Z`, `h = y d f/Z`.
pub fn closed_form_stakes(y: f64) -> (f64, f64) {
    let z = z_saturating(y);
    if z.is_infinite() {
        return (0.0, 0.0);
    }
    let c = 1.0 + c_minus_one(y);
    let yd = y * (1.0 + d_minus_one(y));
    let total = c + yd;
    if !total.is_finite() {
        return (0.0, 0.0);
    }
    let f = (c / total) * (yd / total);
    ((c / z) * f, (yd / z) * f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elementary::s_orbit;

    fn w(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi).unwrap()
    }

    #[test]
    fn window_parsing() {
        assert_eq!("-8:8".parse::<Window>().unwrap(), Window { lo: -8, hi: 8 });
        assert!("8:-8".parse::<Window>().is_err());
        assert!("x".parse::<Window>().is_err());
        assert!(Window::new(0, 1).is_err());
    }

    #[test]
    fn boundary_invariants() {
        assert!(BoundaryData::new(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(BoundaryData::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(BoundaryData::with_stars(0.0, 1.0, 1.0, 0.0, 0.5, 0.0).is_err());
        assert!(BoundaryData::new(0.0, 1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn default_normalisation() {
        for &x in &[0.05, 0.58, 1.0, 3.0, 20.0] {
            let q = default_solution(x, w(-6, 5)).unwrap();
            assert!((q.m_at(0) - q.m_at(-1) - 1.0).abs() < 1e-12);
            assert!((q.n_at(-1) - q.n_at(0) - x).abs() < 1e-12 * x.max(1.0));
            assert_eq!(q.cen_ratio, Some(x));
        }
    }

    #[test]
    fn default_ratio_at_three() {
        let q = default_solution(3.0, w(-4, 4)).unwrap();
        let ratio = (q.m_at(1) - q.m_at(0)) / (q.m_at(0) - q.m_at(-1));
        assert!((ratio - 3.0).abs() < 1e-12);
    }

    #[test]
    fn battlefield_examples() {
        assert_eq!(default_solution(0.58, w(-6, 5)).unwrap().phi_view().unwrap().battlefield, 0);
        assert_eq!(default_solution(5.64, w(-6, 5)).unwrap().phi_view().unwrap().battlefield, 1);
    }

    #[test]
    fn battlefield_outside_window() {
        let q = default_solution(1e6, w(-1, 1)).unwrap();
        assert!(matches!(q.phi_view(), Err(Error::BattlefieldOutsideWindow { .. })));
    }

    #[test]
    fn residuals_of_constructions() {
        for &x in &[0.01, 0.58, 3.0, 100.0] {
            let q = default_solution(x, w(-20, 20)).unwrap();
            assert!(q.max_residual() <= 1e-10, "x={x} r={}", q.max_residual());
            let q = standard_solution(x, w(-20, 20)).unwrap();
            assert!(q.max_residual() <= 1e-10);
        }
    }

    #[test]
    fn absolute_residuals_are_small_too() {
        let q = standard_solution(0.58, w(-8, 8)).unwrap();
        let r = q.residuals_absolute().into_iter().fold(0.0, f64::max);
        assert!(r <= 1e-10, "{r}");
    }

    #[test]
    fn perturbation_is_detected() {
        let mut q = standard_solution(0.58, w(-5, 5)).unwrap();
        let j = q.slot(0);
        q.a[j] += 1e-3;
        assert!(q.residuals()[j] >= 1e-4);
    }

    #[test]
    fn standard_normalisation_and_margin_at_three() {
        let q = standard_solution(3.0, w(-20, 20)).unwrap();
        assert!((q.boundary.m_plus_inf - q.boundary.m_minus_inf - 1.0).abs() < 1e-15);
        assert!((q.m_at(21) - 1.0).abs() < 1e-14);
        assert!((q.mina_margin() - 1.0).abs() < 1e-12);
        let z = z_sum(3.0, 1e-15).unwrap();
        assert!((q.m_at(0) - q.m_at(-1) - 1.0 / z).abs() < 1e-15);
    }

    #[test]
    fn z_is_above_one_and_rejects_bad_tolerance() {
        for &x in &[1e-3, 0.4, 2.0, 500.0] {
            assert!(z_sum(x, 1e-12).unwrap() > 1.0);
        }
        assert!(z_sum(1.0, 0.0).is_err());
    }

    #[test]
    fn closed_forms_agree() {
        for &x in &[0.2, 0.58, 1.0, 3.0, 9.0] {
            let p = standard_solution(x, w(-12, 12)).unwrap();
            let c = standard_solution_closed_form(x, w(-12, 12)).unwrap();
            for j in 0..p.a.len() {
                assert!((p.a[j] - c.a[j]).abs() < 1e-12, "x={x} j={j} {} {}", p.a[j], c.a[j]);
                assert!((p.b[j] - c.b[j]).abs() < 1e-12);
            }
            for j in 0..p.m.len() {
                assert!((p.m[j] - c.m[j]).abs() < 1e-12);
                assert!((p.n[j] - c.n[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn role_reverse_is_an_involution_and_preserves_residuals() {
        let q = standard_solution(0.58, w(-6, 5)).unwrap();
        let r = q.transform(Transform::RoleReverse).unwrap();
        assert_eq!(r.window, Window { lo: -5, hi: 6 });
        assert!((r.max_residual() - q.max_residual()).abs() < 1e-12);
        let back = r.transform(Transform::RoleReverse).unwrap();
        assert_eq!(back.a, q.a);
        assert_eq!(back.m, q.m);
        assert_eq!(back.boundary, q.boundary);
        assert!((r.cen_ratio.unwrap() - 1.0 / s(0.58)).abs() < 1e-12);
    }

    #[test]
    fn shift_moves_the_central_ratio_along_the_orbit() {
        let q = standard_solution(0.58, w(-8, 8)).unwrap();
        for k in -3..=3 {
            let sh = q.transform(Transform::Shift(k)).unwrap();
            let expected = s_orbit(0.58, k).unwrap();
            assert!((sh.cen_ratio.unwrap() / expected - 1.0).abs() < 1e-12);
            assert_eq!(sh.a_at(0), q.a_at(k));
        }
    }

    #[test]
    fn dilate_and_translate() {
        let q = standard_solution(1.7, w(-5, 5)).unwrap();
        let d = q.transform(Transform::Dilate(2.5)).unwrap();
        assert!((d.a_at(1) - 2.5 * q.a_at(1)).abs() < 1e-15);
        assert!((d.ratio_at(2).unwrap() - q.ratio_at(2).unwrap()).abs() < 1e-14);
        assert!(d.max_residual() < 1e-12);
        let t = q.transform(Transform::Translate(3.0, -1.0)).unwrap();
        assert!((t.m_at(0) - q.m_at(0) - 3.0).abs() < 1e-15);
        assert!(t.residuals_absolute().into_iter().fold(0.0, f64::max) < 1e-12);
        assert!(q.transform(Transform::Dilate(0.0)).is_err());
    }

    #[test]
    fn finite_standard_solution_of_the_worked_example() {
        let q = finite_standard_solution(4.04493, Window { lo: -6, hi: 6 }).unwrap();
        assert_eq!(q.window, Window { lo: -5, hi: 5 });
        assert!((q.m_at(-6)).abs() < 1e-15 && (q.m_at(6) - 1.0).abs() < 1e-14);
        assert!(q.n_at(6).abs() < 1e-15);
        assert!(q.max_residual() < 1e-12);
    }

    #[test]
    fn worked_example_in_theta_coordinates() {
        let x = crate::margin::big_theta(4.04493).unwrap();
        assert!((x / 46538.0 - 1.0).abs() < 1e-4, "{x}");
        let q = finite_standard_solution(x, Window { lo: -6, hi: 6 }).unwrap();
        let view = q.phi_view().unwrap();
        assert!((view.get(0) / x - 1.0).abs() < 1e-12);
        assert_eq!(view.battlefield, 3);
        assert!((view.get(3) - 0.7192).abs() < 1e-4);
    }
}
