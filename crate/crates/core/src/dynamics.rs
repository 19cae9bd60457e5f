//! Backward induction for the time-dependent ABMN system on a finite
//! trail, and the symmetric A-system on `ℤ` and `ℤ + ½`.
//!
//! The backward step works on first differences: `u_e = m_{i+1} − m_i` and
//! `v_e = n_i − n_{i+1}` for the edge `e = (i, i+1)`. Stakes, win
//! probabilities and the new differences are all formed from these
//! without subtracting payoffs of order one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solution::{finite_standard_solution, standard_solution, BoundaryData, Window};

/// One time slice of a dynamic solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicRow {
    /// Time index `j`; the terminal row has `j = T`.
    pub time: u64,
    /// Stakes on the open-play vertices.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Payoffs on the whole trail.
    pub m: Vec<f64>,
    pub n: Vec<f64>,
}

/// The differences of a row: `m_inc[e] = m_{i+1} − m_i`,
/// `n_dec[e] = n_i − n_{i+1}` for the edge from `lo + e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Increments {
    pub m_inc: Vec<f64>,
    pub n_dec: Vec<f64>,
}

impl Increments {
    fn edges(&self) -> usize {
        self.m_inc.len()
    }

    fn payoffs(&self, boundary: &BoundaryData) -> (Vec<f64>, Vec<f64>) {
        let e = self.edges();
        let mut m = vec![boundary.m_minus_inf; e + 1];
        for k in 0..e {
            m[k + 1] = m[k] + self.m_inc[k];
        }
        let mut n = vec![boundary.n_plus_inf; e + 1];
        for k in (0..e).rev() {
            n[k] = n[k + 1] + self.n_dec[k];
        }
        (m, n)
    }
}

/// `p_{t+1} − p_t`, formed from whichever of `p` or `q = 1 − p` is the
/// smaller pair, so that the difference keeps relative accuracy.
fn prob_step(p: &[f64], q: &[f64], t: usize) -> f64 {
    if p[t + 1] > 0.5 && p[t] > 0.5 {
        q[t] - q[t + 1]
    } else {
        p[t + 1] - p[t]
    }
}

/// New `m`-differences from `(u, v)`. The `n`-differences are the same
/// map applied to the reflected rows with the roles swapped.
fn advance_m(u: &[f64], v: &[f64]) -> Vec<f64> {
    let e = u.len();
    let open = e - 1;
    let big_m: Vec<f64> = (0..open).map(|t| u[t] + u[t + 1]).collect();
    let big_n: Vec<f64> = (0..open).map(|t| v[t] + v[t + 1]).collect();
    let p: Vec<f64> = (0..open).map(|t| big_m[t] / (big_m[t] + big_n[t])).collect();
    let q: Vec<f64> = (0..open).map(|t| big_n[t] / (big_m[t] + big_n[t])).collect();
    let last = open - 1;
    let mut un = vec![0.0; e];
    un[0] = p[0] * p[0] * big_m[0];
    un[e - 1] = q[last] * (1.0 + p[last]) * big_m[last];
    for k in 1..e - 1 {
        // Edge k joins open vertices k − 1 and k.
        let (l, r) = (k - 1, k);
        let dp = prob_step(&p, &q, l);
        un[k] = p[r] * p[r] * u[k + 1] + dp * (p[r] + p[l]) * u[k] + q[l] * (1.0 + p[l]) * u[k - 1];
    }
    un
}

fn reversed(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

/// One backward step in difference form. Returns the stakes and the
/// differences at the earlier time.
pub fn dabmn_step_increments(lo: i64, next: &Increments) -> Result<(Vec<f64>, Vec<f64>, Increments)> {
    let (u, v) = (&next.m_inc, &next.n_dec);
    let e = u.len();
    if e < 2 || v.len() != e {
        return Err(Error::Window("need at least one open-play vertex and matching rows".into()));
    }
    let (mut a, mut b) = (Vec::with_capacity(e - 1), Vec::with_capacity(e - 1));
    for t in 0..e - 1 {
        let (mm, nn) = (u[t] + u[t + 1], v[t] + v[t + 1]);
        if !(mm > 0.0 && nn > 0.0) {
            return Err(Error::NotStrict { vertex: lo + 1 + t as i64 });
        }
        let (at, bt) = crate::solution::forfeit_stakes(mm, nn);
        a.push(at);
        b.push(bt);
    }
    let m_inc = advance_m(u, v);
    let n_dec = reversed(&advance_m(&reversed(v), &reversed(u)));
    Ok((a, b, Increments { m_inc, n_dec }))
}

/// One backward step from payoff vectors on the trail `⟦lo, lo + len − 1⟧`.
/// Boundary values stay fixed.
pub fn dabmn_step(lo: i64, m_next: &[f64], n_next: &[f64], boundary: &BoundaryData) -> Result<DynamicRow> {
    if m_next.len() != n_next.len() || m_next.len() < 3 {
        return Err(Error::Window("payoff rows must match and span at least three vertices".into()));
    }
    let inc = Increments {
        m_inc: m_next.windows(2).map(|w| w[1] - w[0]).collect(),
        n_dec: n_next.windows(2).map(|w| w[0] - w[1]).collect(),
    };
    for (k, (du, dv)) in inc.m_inc.iter().zip(&inc.n_dec).enumerate() {
        if !(*du > 0.0 && *dv > 0.0) {
            return Err(Error::NotStrict { vertex: lo + k as i64 + 1 });
        }
    }
    let (a, b, out) = dabmn_step_increments(lo, &inc)?;
    let (m, n) = out.payoffs(boundary);
    Ok(DynamicRow { time: 0, a, b, m, n })
}

/// Strict local maxima of a row, endpoints included.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| (i == 0 || values[i] > values[i - 1]) && (i + 1 == n || values[i] > values[i + 1]))
        .collect()
}

/// Terminal conditions shipped with the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminalPreset {
    /// Sharp rises at both ends around a flat plateau of height one half;
    /// the middle edges share `delta` of the unit rise.
    Plateau { delta: f64 },
    /// The finite-trail standard solution with central ratio `x`.
    Static { x: f64 },
    /// A linear ramp from `0` to `1`.
    Penny,
}

/// A terminal condition and the boundary it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalCondition {
    pub trail: Window,
    pub boundary: BoundaryData,
    pub increments: Increments,
}

impl TerminalCondition {
    /// `n_ter(i) = m_ter(−i)` for each preset; boundary `(0, 1, 1, 0)`
    /// except for `Static`, whose left `n` value is the finite margin.
    pub fn preset(preset: TerminalPreset, half_width: i64) -> Result<Self> {
        let trail = Window::symmetric(half_width)?;
        let edges = (2 * half_width) as usize;
        let reflect = |u: &Vec<f64>| u.iter().rev().copied().collect::<Vec<f64>>();
        let (boundary, m_inc, n_dec) = match preset {
            TerminalPreset::Plateau { delta } => {
                if !(delta > 0.0 && delta < 1.0) || edges < 3 {
                    return Err(Error::Config("plateau needs 0 < delta < 1 and a trail of half-width ≥ 2".into()));
                }
                let mut u = vec![delta / (edges - 2) as f64; edges];
                u[0] = 0.5 - delta / 2.0;
                u[edges - 1] = 0.5 - delta / 2.0;
                let v = reflect(&u);
                (BoundaryData::symmetric_standard(), u, v)
            }
            TerminalPreset::Penny => {
                let u = vec![1.0 / edges as f64; edges];
                (BoundaryData::symmetric_standard(), u.clone(), u)
            }
            TerminalPreset::Static { x } => {
                let q = finite_standard_solution(x, trail)?;
                (q.boundary, q.m_inc.clone(), q.n_dec.clone())
            }
        };
        Ok(TerminalCondition { trail, boundary, increments: Increments { m_inc, n_dec } })
    }
}

/// Result of a backward evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicSheet {
    pub trail: Window,
    pub horizon: u64,
    pub stride: u64,
    pub boundary: BoundaryData,
    /// Rows at times `T, T − stride, …, 0`, newest time first. The
    /// terminal row carries no stakes.
    pub rows: Vec<DynamicRow>,
    /// Number of local maxima of the `a`-row at every time `j < T`,
    /// indexed by `T − 1 − j`.
    pub maxima_counts: Vec<usize>,
    /// Sup-norm change of `(m, n)` between times `j + 1` and `j`, same
    /// indexing.
    pub convergence: Vec<f64>,
}

impl DynamicSheet {
    pub fn maxima_at(&self, time: u64) -> usize {
        self.maxima_counts[(self.horizon - 1 - time) as usize]
    }

    /// Runs of equal maxima counts as `(count, earliest step, latest step)`
    /// in backward order, so `[(2, …), (1, …)]` is a two-to-one collapse.
    pub fn maxima_phases(&self) -> Vec<(usize, u64, u64)> {
        let mut out: Vec<(usize, u64, u64)> = Vec::new();
        for (k, &c) in self.maxima_counts.iter().enumerate() {
            let step = k as u64 + 1;
            match out.last_mut() {
                Some(last) if last.0 == c => last.2 = step,
                _ => out.push((c, step, step)),
            }
        }
        out
    }

    /// The row at `time`, if it was stored.
    pub fn row(&self, time: u64) -> Option<&DynamicRow> {
        self.rows.iter().find(|r| r.time == time)
    }

    /// CSV with columns `time,vertex,a,b,m,n`; stakes are empty at the
    /// trail ends and in the terminal row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,vertex,a,b,m,n\n");
        for row in &self.rows {
            for (k, i) in self.trail.indices().enumerate() {
                let stake = |v: &Vec<f64>| {
                    if k == 0 || k + 1 == self.trail.len() || v.is_empty() {
                        String::new()
                    } else {
                        format!("{:?}", v[k - 1])
                    }
                };
                out.push_str(&format!(
                    "{},{},{},{},{:?},{:?}\n",
                    row.time,
                    i,
                    stake(&row.a),
                    stake(&row.b),
                    row.m[k],
                    row.n[k]
                ));
            }
        }
        out
    }
}

/// `T` backward steps from the terminal condition. Rows are stored every
/// `stride` steps and at time `0`.
pub fn dabmn_evolve(terminal: &TerminalCondition, horizon: u64, stride: u64) -> Result<DynamicSheet> {
    if stride == 0 {
        return Err(Error::Config("stride must be positive".into()));
    }
    let lo = terminal.trail.lo;
    let bd = terminal.boundary;
    let mut inc = terminal.increments.clone();
    let (m, n) = inc.payoffs(&bd);
    let mut rows = vec![DynamicRow { time: horizon, a: Vec::new(), b: Vec::new(), m: m.clone(), n: n.clone() }];
    let (mut prev_m, mut prev_n) = (m, n);
    let mut maxima_counts = Vec::with_capacity(horizon as usize);
    let mut convergence = Vec::with_capacity(horizon as usize);
    for step in 1..=horizon {
        let time = horizon - step;
        let (a, b, next) = dabmn_step_increments(lo, &inc)?;
        let (m, n) = next.payoffs(&bd);
        let dist = m
            .iter()
            .zip(&prev_m)
            .chain(n.iter().zip(&prev_n))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        convergence.push(dist);
        maxima_counts.push(local_maxima(&a).len());
        if time % stride == 0 {
            rows.push(DynamicRow { time, a, b, m: m.clone(), n: n.clone() });
        }
        prev_m = m;
        prev_n = n;
        inc = next;
    }
    Ok(DynamicSheet { trail: terminal.trail, horizon, stride, boundary: bd, rows, maxima_counts, convergence })
}

/// The lattice of an A-system solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lattice {
    Integers,
    HalfIntegers,
}

impl Lattice {
    fn offset(self) -> f64 {
        match self {
            Lattice::Integers => 0.0,
            Lattice::HalfIntegers => 0.5,
        }
    }
}

/// A positive solution of `A_{−i−1}(2A_i + A_{−i}) = A_{i+1}²`.
///
/// Entries decay doubly exponentially away from the centre and leave
/// floating range within ten steps, so they are carried as natural
/// logarithms; `values` holds their exponentials, which may underflow
/// to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ASystemSolution {
    pub lattice: Lattice,
    pub scale: f64,
    /// Lowest index (an integer or half-integer).
    pub lo: f64,
    pub log_values: Vec<f64>,
    pub values: Vec<f64>,
}

fn ln_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl ASystemSolution {
    pub fn from_values(lattice: Lattice, scale: f64, lo: f64, values: Vec<f64>) -> Self {
        let log_values = values.iter().map(|v| v.ln()).collect();
        ASystemSolution { lattice, scale, lo, log_values, values }
    }

    fn from_logs(lattice: Lattice, scale: f64, lo: f64, log_values: Vec<f64>) -> Self {
        let values = log_values.iter().map(|v| v.exp()).collect();
        ASystemSolution { lattice, scale, lo, log_values, values }
    }

    pub fn hi(&self) -> f64 {
        self.lo + (self.values.len() - 1) as f64
    }

    fn slot(&self, index: f64) -> Option<usize> {
        let k = index - self.lo;
        if k < 0.0 || k.fract() != 0.0 || k as usize >= self.values.len() {
            return None;
        }
        Some(k as usize)
    }

    pub fn get(&self, index: f64) -> Option<f64> {
        self.slot(index).map(|k| self.values[k])
    }

    pub fn get_ln(&self, index: f64) -> Option<f64> {
        self.slot(index).map(|k| self.log_values[k])
    }

    /// Indices `i` for which all four entries of the equation exist.
    pub fn equation_indices(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = self.lo;
        while i <= self.hi() {
            if [-i - 1.0, i, -i, i + 1.0].iter().all(|&j| self.get(j).is_some()) {
                out.push(i);
            }
            i += 1.0;
        }
        out
    }

    /// Absolute residual at each equation index.
    pub fn residuals(&self) -> Vec<(f64, f64)> {
        self.equation_indices()
            .into_iter()
            .map(|i| {
                let g = |j: f64| self.get(j).unwrap();
                (i, (g(-i - 1.0) * (2.0 * g(i) + g(-i)) - g(i + 1.0) * g(i + 1.0)).abs())
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().map(|(_, r)| r).fold(0.0, f64::max)
    }

    /// `|ln(A_{−i−1}(2A_i + A_{−i})) − 2 ln A_{i+1}|`, the relative residual,
    /// at indices where every entry has a finite logarithm.
    pub fn max_log_residual(&self) -> f64 {
        self.equation_indices()
            .into_iter()
            .filter_map(|i| {
                let g = |j: f64| self.get_ln(j).unwrap();
                let (l1, l2, l3, l4) = (g(-i - 1.0), g(i), g(-i), g(i + 1.0));
                if ![l1, l2, l3, l4].iter().all(|v| v.is_finite()) {
                    return None;
                }
                Some((l1 + ln_add(std::f64::consts::LN_2 + l2, l3) - 2.0 * l4).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Outputs `(O₋, O₊)` from inputs `(I₋, I₊)`: the positive solution of
/// `O₋(2I₊ + I₋) = O₊²` and `I₊(2O₋ + O₊) = I₋²`. Eliminating `O₋` leaves
/// `O₊² + K O₊ − K R = 0` with `K = (2I₊ + I₋)/2` and `R = I₋²/I₊`.
pub fn a_system_pair(i_minus: f64, i_plus: f64) -> Result<(f64, f64)> {
    if !(i_minus > 0.0 && i_plus > 0.0) {
        return Err(Error::Domain(format!("inputs must be positive, got ({i_minus}, {i_plus})")));
    }
    let (lm, lp) = a_system_pair_ln(i_minus.ln(), i_plus.ln())?;
    Ok((lm.exp(), lp.exp()))
}

/// [`a_system_pair`] on logarithms. With `ρ = R/K`,
/// `O₊ = 2R/(1 + √(1 + 4ρ))` and `O₋ = O₊²/(2K)`.
pub fn a_system_pair_ln(ln_minus: f64, ln_plus: f64) -> Result<(f64, f64)> {
    if !(ln_minus.is_finite() && ln_plus.is_finite()) {
        return Err(Error::Domain(format!("log inputs must be finite, got ({ln_minus}, {ln_plus})")));
    }
    let ln_k = ln_add(ln_plus, ln_minus - std::f64::consts::LN_2);
    let ln_r = 2.0 * ln_minus - ln_plus;
    let rho = (ln_r - ln_k).exp();
    let ln_plus_out = std::f64::consts::LN_2 + ln_r - (1.0 + (1.0 + 4.0 * rho).sqrt()).ln();
    let ln_minus_out = 2.0 * ln_plus_out - std::f64::consts::LN_2 - ln_k;
    if !(ln_plus_out.is_finite() && ln_minus_out.is_finite()) {
        return Err(Error::Convergence(format!("no positive output for log inputs ({ln_minus}, {ln_plus})")));
    }
    Ok((ln_minus_out, ln_plus_out))
}

/// Seeds the system at `scale` and iterates the pair step outwards to
/// `|i| ≤ half_width` (`|j| ≤ half_width + ½` on the half-integers).
pub fn a_system_solve(lattice: Lattice, scale: f64, half_width: usize) -> Result<ASystemSolution> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    let h = half_width.max(1);
    let ls = scale.ln();
    let (mut left, mut right) = match lattice {
        Lattice::Integers => {
            let a1 = ((33f64).sqrt() - 3.0) / 4.0;
            (vec![ls, ls + ((1.0 - a1) / 2.0).ln()], vec![ls, ls + a1.ln()])
        }
        Lattice::HalfIntegers => (vec![ls], vec![ls + std::f64::consts::LN_2]),
    };
    // left[k] holds index −k (−k − ½), right[k] holds k (k + ½).
    let steps = match lattice {
        Lattice::Integers => h - 1,
        Lattice::HalfIntegers => h,
    };
    for _ in 0..steps {
        let (o_minus, o_plus) = a_system_pair_ln(*left.last().unwrap(), *right.last().unwrap())?;
        left.push(o_minus);
        right.push(o_plus);
    }
    let (lo, logs) = match lattice {
        Lattice::Integers => {
            let mut v: Vec<f64> = left[1..=h].iter().rev().copied().collect();
            v.extend(&right[..=h]);
            (-(h as f64), v)
        }
        Lattice::HalfIntegers => {
            let mut v: Vec<f64> = left.iter().rev().copied().collect();
            v.extend(&right);
            (-(h as f64) - lattice.offset(), v)
        }
    };
    Ok(ASystemSolution::from_logs(lattice, scale, lo, logs))
}

/// Discrepancies between the explicit standard solutions at `x = 3` and
/// `x = 1` and the symmetric relations and A-system they should satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricReport {
    pub half_width: i64,
    /// `max |a_i − b_{−i}|` at `x = 3`.
    pub reflection_integer: f64,
    /// `max |a_i − b_{−1−i}|` at `x = 1`.
    pub reflection_half: f64,
    /// A-system residual of `A_i = a_i` at `x = 3`.
    pub residual_integer: f64,
    /// A-system residual of `A_j = a_{j−½}` at `x = 1`.
    pub residual_half: f64,
    /// `max |a_i − solve(ℤ, a_0)_i|` at `x = 3`.
    pub solver_integer: f64,
    /// `max |a_{j−½} − solve(ℤ+½, a_{−1})_j|` at `x = 1`.
    pub solver_half: f64,
    /// `max |(m_i − m_{i−1}) − a_i²/a_{−i}|` at `x = 3`.
    pub increment_identity_integer: f64,
    /// `max |(m_i − m_{i−1}) − a_i²/a_{−1−i}|` at `x = 1`.
    pub increment_identity_half: f64,
}

impl SymmetricReport {
    pub fn max_discrepancy(&self) -> f64 {
        [
            self.reflection_integer,
            self.reflection_half,
            self.residual_integer,
            self.residual_half,
            self.solver_integer,
            self.solver_half,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn symmetric_crosscheck(half_width: i64) -> Result<SymmetricReport> {
    let r = half_width;
    let w = Window::symmetric(r + 2)?;
    let q3 = standard_solution(3.0, w)?;
    let q1 = standard_solution(1.0, w)?;
    let maxabs = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, |m: f64, v| m.max(v.abs()));

    let reflection_integer = maxabs(&mut (-r..=r).map(|i| q3.a_at(i) - q3.b_at(-i)));
    let reflection_half = maxabs(&mut (-r..=r).map(|i| q1.a_at(i) - q1.b_at(-1 - i)));

    let lattice_from = |q: &crate::solution::Quadruple, lattice: Lattice| {
        let shift = if lattice == Lattice::HalfIntegers { 1 } else { 0 };
        let lo = -r;
        ASystemSolution::from_values(
            lattice,
            f64::NAN,
            lo as f64 - lattice.offset(),
            (lo..=r + shift).map(|i| q.a_at(i - shift)).collect(),
        )
    };
    let from3 = lattice_from(&q3, Lattice::Integers);
    let from1 = lattice_from(&q1, Lattice::HalfIntegers);

    let solved3 = a_system_solve(Lattice::Integers, q3.a_at(0), r as usize)?;
    let solved1 = a_system_solve(Lattice::HalfIntegers, q1.a_at(-1), r as usize)?;
    let compare = |from: &ASystemSolution, solved: &ASystemSolution| {
        let mut worst: f64 = 0.0;
        let mut j = solved.lo;
        while j <= solved.hi() {
            if let (Some(x), Some(y)) = (from.get(j), solved.get(j)) {
                worst = worst.max((x - y).abs());
            }
            j += 1.0;
        }
        worst
    };

    let identity = |q: &crate::solution::Quadruple, mirror: i64| {
        maxabs(&mut (-r..=r).filter_map(|i| {
            let (a, am) = (q.a_at(i), q.a_at(mirror - i));
            let step = q.m_step(i - 1);
            (a > 0.0 && am > 0.0 && step.is_finite()).then(|| step - a * (a / am))
        }))
    };

    Ok(SymmetricReport {
        half_width: r,
        reflection_integer,
        reflection_half,
        residual_integer: from3.max_residual(),
        residual_half: from1.max_residual(),
        solver_integer: compare(&from3, &solved3),
        solver_half: compare(&from1, &solved1),
        increment_identity_integer: identity(&q3, 0),
        increment_identity_half: identity(&q1, -1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_solution_is_a_fixed_point() {
        let t = TerminalCondition::preset(TerminalPreset::Static { x: 0.58 }, 5).unwrap();
        let (a, b, next) = dabmn_step_increments(t.trail.lo, &t.increments).unwrap();
        let q = finite_standard_solution(0.58, t.trail).unwrap();
        for k in 0..next.m_inc.len() {
            assert!((next.m_inc[k] - t.increments.m_inc[k]).abs() <= 1e-12 * t.increments.m_inc[k].max(1e-300) + 1e-300);
            assert!((next.n_dec[k] - t.increments.n_dec[k]).abs() <= 1e-12 * t.increments.n_dec[k].max(1e-300) + 1e-300);
        }
        for (k, i) in q.window.indices().enumerate() {
            assert!((a[k] - q.a_at(i)).abs() < 1e-12 && (b[k] - q.b_at(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn payoff_form_matches_one_step_expectation() {
        let m_next = [0.0, 0.1, 0.35, 0.8, 1.0];
        let n_next = [1.3, 0.9, 0.4, 0.05, 0.0];
        let bd = BoundaryData::new(0.0, 1.0, 1.3, 0.0).unwrap();
        let row = dabmn_step(-2, &m_next, &n_next, &bd).unwrap();
        for t in 0..3 {
            let (a, b) = (row.a[t], row.b[t]);
            let p = a / (a + b);
            let m = p * m_next[t + 2] + (1.0 - p) * m_next[t] - a;
            let n = p * n_next[t + 2] + (1.0 - p) * n_next[t] - b;
            assert!((row.m[t + 1] - m).abs() < 1e-14);
            assert!((row.n[t + 1] - n).abs() < 1e-14);
            let (big_m, big_n) = (m_next[t + 2] - m_next[t], n_next[t] - n_next[t + 2]);
            let (fa, fb) = crate::engine::penny_forfeit(big_m, big_n).unwrap();
            assert!((a - fa).abs() < 1e-15 && (b - fb).abs() < 1e-15);
        }
        assert_eq!(row.m[0], 0.0);
        assert_eq!(row.n[4], 0.0);
        assert!(row.m.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_open_vertex() {
        let bd = BoundaryData::new(0.0, 2.0, 1.0, 0.0).unwrap();
        let row = dabmn_step(-1, &[0.0, 0.7, 2.0], &[1.0, 0.4, 0.0], &bd).unwrap();
        let (a, b) = crate::engine::penny_forfeit(2.0, 1.0).unwrap();
        assert!((row.a[0] - a).abs() < 1e-15 && (row.b[0] - b).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_violation_names_vertex() {
        let bd = BoundaryData::symmetric_standard();
        let err = dabmn_step(-2, &[0.0, 0.5, 0.4, 0.8, 1.0], &[1.0, 0.8, 0.5, 0.2, 0.0], &bd).unwrap_err();
        assert!(matches!(err, Error::NotStrict { vertex: 0 }));
    }

    #[test]
    fn reflection_symmetry() {
        let t = TerminalCondition::preset(TerminalPreset::Penny, 4).unwrap();
        let sheet = dabmn_evolve(&t, 200, 1).unwrap();
        for row in sheet.rows.iter().skip(1) {
            let k = row.a.len();
            for i in 0..k {
                assert_eq!(row.b[i], row.a[k - 1 - i], "time {} vertex {i}", row.time);
            }
        }
    }

    #[test]
    fn static_terminal_rows_are_constant() {
        let t = TerminalCondition::preset(TerminalPreset::Static { x: 3.0 }, 4).unwrap();
        let sheet = dabmn_evolve(&t, 100, 10).unwrap();
        let first = &sheet.rows[0];
        for row in &sheet.rows {
            for k in 0..first.m.len() {
                assert!((row.m[k] - first.m[k]).abs() < 1e-10 && (row.n[k] - first.n[k]).abs() < 1e-10);
            }
        }
        assert!(sheet.convergence.iter().all(|d| *d < 1e-12));
    }

    #[test]
    fn csv_layout() {
        let t = TerminalCondition::preset(TerminalPreset::Penny, 2).unwrap();
        let sheet = dabmn_evolve(&t, 4, 2).unwrap();
        let csv = sheet.to_csv();
        assert_eq!(csv.lines().count(), 1 + 3 * 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("4,-2,,,"));
    }

    #[test]
    fn a_system_seeds() {
        let z = a_system_solve(Lattice::Integers, 1.0, 10).unwrap();
        let a1 = (33f64.sqrt() - 3.0) / 4.0;
        assert!((z.get(1.0).unwrap() - a1).abs() < 1e-15);
        assert!((z.get(-1.0).unwrap() - (1.0 - a1) / 2.0).abs() < 1e-15);
        assert_eq!(z.lo, -10.0);
        assert_eq!(z.hi(), 10.0);
        assert!(z.max_residual() <= 1e-12);
        assert!(z.max_log_residual() <= 1e-12, "{}", z.max_log_residual());
        let h = a_system_solve(Lattice::HalfIntegers, 1.0, 10).unwrap();
        assert_eq!(h.get(0.5), Some(2.0));
        assert_eq!(h.get(-0.5), Some(1.0));
        assert_eq!(h.lo, -10.5);
        assert!(h.max_residual() <= 1e-12);
        assert!(h.max_log_residual() <= 1e-12, "{}", h.max_log_residual());
    }

    #[test]
    fn a_system_scaling() {
        for lattice in [Lattice::Integers, Lattice::HalfIntegers] {
            let one = a_system_solve(lattice, 1.0, 10).unwrap();
            for lam in [0.3, 2.0, 17.0] {
                let s = a_system_solve(lattice, lam, 10).unwrap();
                for (x, y) in s.values.iter().zip(&one.values) {
                    assert!((x - lam * y).abs() <= 1e-12 * (lam * y));
                }
                for (x, y) in s.log_values.iter().zip(&one.log_values) {
                    assert!((x - lam.ln() - y).abs() <= 1e-12 * y.abs().max(1.0));
                }
            }
        }
        assert!(a_system_solve(Lattice::Integers, 0.0, 3).is_err());
    }

    #[test]
    fn standard_solutions_are_symmetric() {
        let r = symmetric_crosscheck(10).unwrap();
        assert!(r.max_discrepancy() <= 1e-8, "{r:?}");
        assert!(r.increment_identity_integer <= 1e-10, "{r:?}");
        assert!(r.increment_identity_half <= 1e-10, "{r:?}");
    }
}
