//! Mina margin maps: the finite-trail maps built from the product series
//! `P, Q, S, T`, the infinite map with an explicit truncation bound, the
//! coordinate changes `θ`, `Θ`, `ψ`, and level-set root finding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::elementary::{c_minus_one, d_minus_one, s, s_inverse_raw, Orbit};
use crate::error::{Error, Result};
use crate::solution::{standard_solution, z_saturating, Quadruple, Window};

/// Default mesh for scans on the fundamental domain.
pub const DEFAULT_MESH: f64 = 1e-4;

/// The partial sums `P_k, Q_ℓ, S_k, T_ℓ` at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPqst {
    pub k: u32,
    pub ell: u32,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub t: f64,
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be positive and finite, got {x}")))
    }
}

/// `P_k = 1 + Σ_{j<k} Π_{i≤j}(c_i − 1)`, `Q_ℓ = Σ_{1≤j<ℓ} Π_{1≤i≤j}(c_{−i} − 1)⁻¹`,
/// and `S_k`, `T_ℓ` likewise with `d`.
pub fn series(x: f64, ell: u32, k: u32) -> Result<SeriesPqst> {
    check_x(x)?;
    if ell < 1 {
        return Err(Error::Domain("the backward order must be at least 1".into()));
    }
    let orbit = Orbit::new(x, -(ell as i64), k as i64);
    let (mut p, mut sd) = (1.0, 1.0);
    let (mut pm, mut pd) = (1.0, 1.0);
    for j in 0..k as i64 {
        let v = orbit.get(j);
        pm *= c_minus_one(v);
        pd *= d_minus_one(v);
        p += pm;
        sd += pd;
    }
    let (mut q, mut t) = (0.0, 0.0);
    let (mut qm, mut qd) = (1.0, 1.0);
    for j in 1..ell as i64 {
        let v = orbit.get(-j);
        qm /= c_minus_one(v);
        qd /= d_minus_one(v);
        q += qm;
        t += qd;
    }
    if ![p, q, sd, t].iter().all(|v| v.is_finite()) {
        return Err(Error::Range(format!("series overflow at x = {x}")));
    }
    Ok(SeriesPqst { k, ell, p, q, s: sd, t })
}

/// `M_{ℓ,k}(x) = x(S_k + T_ℓ)/(P_k + Q_ℓ)`: the Mina margin of the finite
/// trail `⟦−ℓ, k⟧` under the default solution with central ratio `x`.
pub fn margin_finite(x: f64, ell: u32, k: u32) -> Result<f64> {
    let sr = series(x, ell, k)?;
    Ok(x * (sr.s + sr.t) / (sr.p + sr.q))
}

fn pow_rational(base: i64, e: i64) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(base));
    if e >= 0 {
        num_traits::pow(b, e as usize)
    } else {
        num_traits::pow(b, (-e) as usize).recip()
    }
}

/// `3⁵·2^{2k−2}·6^{1−2^k}`, the forward half of the truncation bound.
pub fn forward_bound(k: u32) -> BigRational {
    assert!(k <= 24, "forward order too large");
    let k = k as i64;
    pow_rational(3, 5) * pow_rational(2, 2 * k - 2) * pow_rational(6, 1 - (1i64 << k))
}

/// `3³·2^{ℓ−2}·6^{ℓ−2^{ℓ−1}}`, the backward half of the truncation bound.
pub fn backward_bound(ell: u32) -> BigRational {
    assert!((2..=24).contains(&ell), "backward order out of range");
    let ell = ell as i64;
    pow_rational(3, 3) * pow_rational(2, ell - 2) * pow_rational(6, ell - (1i64 << (ell - 1)))
}

/// The bound on `|M_{i,j} − M_{ℓ,k}|` over `[1/3, 3]` for `i > k`, `j > ℓ`,
/// as an exact rational.
pub fn truncation_bound_exact(k: u32, ell: u32) -> Result<BigRational> {
    if ell < 2 || ell > 24 || k > 24 {
        return Err(Error::Domain(format!("unsupported truncation orders k = {k}, ℓ = {ell}")));
    }
    Ok(forward_bound(k) + backward_bound(ell))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// A value of the infinite map together with the truncation used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub k: u32,
    pub ell: u32,
    /// `s_j(x)` with `j` chosen so that it lies in `(1/3, 3]`.
    pub reduced: f64,
    pub shift: i64,
}

/// Moves `x` along its orbit into `(1/3, 3]`, returning the point and the
/// number of forward steps taken (negative for backward steps).
pub fn reduce_to_fundamental(x: f64) -> Result<(f64, i64)> {
    check_x(x)?;
    let (mut v, mut j) = (x, 0i64);
    while v > 3.0 {
        v = s(v);
        j += 1;
    }
    while v <= 1.0 / 3.0 {
        v = s_inverse_raw(v);
        j -= 1;
        if !v.is_finite() {
            return Err(Error::Range(format!("orbit of {x} leaves floating range")));
        }
    }
    Ok((v, j))
}

/// Truncation orders for the infinite map at a given tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub k: u32,
    pub ell: u32,
    pub error_bound: f64,
}

impl Truncation {
    /// The smallest orders whose bound halves are each at most `tol/2`,
    /// compared exactly.
    pub fn for_tolerance(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let half = BigRational::from_float(tol / 2.0)
            .ok_or_else(|| Error::Domain(format!("bad tolerance {tol}")))?;
        let mut k = 0;
        while forward_bound(k) > half {
            k += 1;
            if k > 8 {
                return Err(Error::Range(format!("tolerance {tol} not reachable")));
            }
        }
        let mut ell = 2;
        while backward_bound(ell) > half {
            ell += 1;
            if ell > 9 {
                return Err(Error::Range(format!("tolerance {tol} not reachable")));
            }
        }
        let bound = truncation_bound_exact(k, ell)?;
        Ok(Truncation { k, ell, error_bound: rational_to_f64(&bound) })
    }

    pub fn eval(&self, x: f64) -> Result<MarginEstimate> {
        let (reduced, shift) = reduce_to_fundamental(x)?;
        Ok(MarginEstimate {
            value: margin_finite(reduced, self.ell, self.k)?,
            error_bound: self.error_bound,
            k: self.k,
            ell: self.ell,
            reduced,
            shift,
        })
    }
}

/// `M(x)` within `tol`, by reduction to `(1/3, 3]` and truncation of the
/// product series.
pub fn margin_infinite(x: f64, tol: f64) -> Result<MarginEstimate> {
    Truncation::for_tolerance(tol)?.eval(x)
}

/// `M(x) = Σ_i s_i(x)/Z(s_i(x))`, summed over the orbit until the terms
/// vanish in floating point.
pub fn margin_infinite_series(x: f64) -> Result<f64> {
    check_x(x)?;
    let reach = 64;
    let orbit = Orbit::new(x, -reach, reach);
    let mut total = 0.0;
    for i in -reach..=reach {
        let y = orbit.get(i);
        let z = z_saturating(y);
        if z.is_finite() {
            total += y / z;
        }
    }
    Ok(total)
}

/// `q(y) = 3(y − 1/3)/8`, mapping `[1/3, 3)` onto `[0, 1)`.
fn q_map(y: f64) -> f64 {
    3.0 * (y - 1.0 / 3.0) / 8.0
}

/// `θ(x) = k + q(s_k(x))` with `k` the index for which `s_k(x) ∈ [1/3, 3)`.
pub fn theta(x: f64) -> Result<f64> {
    check_x(x)?;
    let (mut v, mut k) = (x, 0i64);
    while v >= 3.0 {
        v = s(v);
        k += 1;
    }
    while v < 1.0 / 3.0 {
        v = s_inverse_raw(v);
        k -= 1;
        if !v.is_finite() {
            return Err(Error::Range(format!("orbit of {x} leaves floating range")));
        }
    }
    Ok(k as f64 + q_map(v))
}

/// Inverse of [`theta`]: `s_{−k}(1/3 + 8r/3)` where `z = k + r`, `r ∈ [0, 1)`.
pub fn theta_inverse(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("θ⁻¹ needs a finite argument, got {z}")));
    }
    let k = z.floor();
    let r = z - k;
    let mut v = 1.0 / 3.0 + 8.0 * r / 3.0;
    let k = k as i64;
    if k >= 0 {
        for _ in 0..k {
            v = s_inverse_raw(v);
        }
    } else {
        for _ in 0..(-k) {
            v = s(v);
        }
    }
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Range(format!("θ⁻¹({z}) leaves floating range")));
    }
    Ok(v)
}

/// `Θ(z) = 2^{sign(z)(2^{|z|} − 1)}` with `sign(0) = 1`.
pub fn big_theta(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("Θ needs a finite argument, got {z}")));
    }
    let sign = if z >= 0.0 { 1.0 } else { -1.0 };
    let v = (sign * (z.abs().exp2() - 1.0)).exp2();
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Range(format!("Θ({z}) leaves floating range")));
    }
    Ok(v)
}

/// `Ψ = Θ⁻¹`: `sign(log₂ x)·log₂(|log₂ x| + 1)`.
pub fn big_psi(x: f64) -> Result<f64> {
    check_x(x)?;
    let l = x.log2();
    Ok(l.signum() * (l.abs() + 1.0).log2())
}

/// `ψ(z) = M(θ⁻¹(z))`.
pub fn psi(z: f64, tol: f64) -> Result<f64> {
    Ok(margin_infinite(theta_inverse(z)?, tol)?.value)
}

/// Which margin map to scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSelector {
    /// `M_{ℓ,k}` evaluated at the raw argument.
    Finite { ell: u32, k: u32 },
    /// `M_{ℓ,k} ∘ Θ`.
    FiniteTheta { ell: u32, k: u32 },
    /// The infinite map, truncated within `tol`.
    Infinite { tol: f64 },
    /// `ψ = M ∘ θ⁻¹`.
    Psi { tol: f64 },
}

impl MapSelector {
    /// A reusable evaluator; truncation orders are fixed once here.
    pub fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> Result<f64> + Send + Sync>> {
        Ok(match *self {
            MapSelector::Finite { ell, k } => Box::new(move |x| margin_finite(x, ell, k)),
            MapSelector::FiniteTheta { ell, k } => {
                Box::new(move |x| margin_finite(big_theta(x)?, ell, k))
            }
            MapSelector::Infinite { tol } => {
                let tr = Truncation::for_tolerance(tol)?;
                Box::new(move |x| Ok(tr.eval(x)?.value))
            }
            MapSelector::Psi { tol } => {
                let tr = Truncation::for_tolerance(tol)?;
                Box::new(move |z| Ok(tr.eval(theta_inverse(z)?)?.value))
            }
        })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.evaluator()?(x)
    }
}

/// One located solution of `map(x) = target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    /// Set for a near-touch without a sign change.
    pub suspected: bool,
}

/// Solutions of `map(x) = target` on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub target: f64,
    pub interval: (f64, f64),
    pub mesh: f64,
    pub roots: Vec<Root>,
}

impl RootSet {
    /// Roots with a confirmed sign change.
    pub fn confirmed(&self) -> Vec<f64> {
        self.roots.iter().filter(|r| !r.suspected).map(|r| r.x).collect()
    }
}

fn bisect<F: Fn(f64) -> Result<f64>>(g: &F, mut lo: f64, mut hi: f64, glo: f64) -> Result<f64> {
    let mut glo = glo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scan-and-bisect for `f(x) = target` on `[lo, hi]` with the given mesh.
/// Local minima of `|f − target|` below `mesh²` without a sign change are
/// kept as suspected tangential roots.
pub fn scan_level_set<F: Fn(f64) -> Result<f64>>(
    f: F,
    target: f64,
    lo: f64,
    hi: f64,
    mesh: f64,
) -> Result<RootSet> {
    if !(mesh > 0.0) || !(hi > lo) {
        return Err(Error::Domain(format!("need mesh > 0 and lo < hi, got mesh {mesh} on [{lo}, {hi}]")));
    }
    let g = |x: f64| f(x).map(|v| v - target);
    let steps = ((hi - lo) / mesh).ceil() as usize;
    let xs: Vec<f64> = (0..=steps).map(|i| (lo + i as f64 * mesh).min(hi)).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect::<Result<_>>()?;
    let mut roots: Vec<Root> = Vec::new();
    let mut push = |x: f64, residual: f64, suspected: bool| {
        if let Some(last) = roots.last() {
            if (x - last.x).abs() <= mesh {
                return;
            }
        }
        roots.push(Root { x, residual, suspected });
    };
    for i in 0..xs.len() {
        if gs[i] == 0.0 {
            push(xs[i], 0.0, false);
            continue;
        }
        if i + 1 < xs.len() && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0) {
            let r = bisect(&g, xs[i], xs[i + 1], gs[i])?;
            push(r, g(r)?.abs(), false);
            continue;
        }
        let interior = i > 0 && i + 1 < xs.len();
        if interior
            && gs[i].abs() < mesh * mesh
            && gs[i].abs() <= gs[i - 1].abs()
            && gs[i].abs() <= gs[i + 1].abs()
            && (gs[i - 1] < 0.0) == (gs[i] < 0.0)
            && (gs[i + 1] < 0.0) == (gs[i] < 0.0)
        {
            push(xs[i], gs[i].abs(), true);
        }
    }
    Ok(RootSet { target, interval: (lo, hi), mesh, roots })
}

/// Level set of a selected map. For the infinite map the scan covers one
/// period `(1/3, 3]` and roots are then propagated along orbits into the
/// requested interval.
pub fn find_level_set(map: MapSelector, target: f64, lo: f64, hi: f64, mesh: f64) -> Result<RootSet> {
    match map {
        MapSelector::Infinite { .. } => {
            let base = fundamental_roots(map, target, mesh)?;
            let mut roots = Vec::new();
            for r in base {
                let mut v = r.x;
                while v > lo && v.is_finite() && v > 0.0 {
                    v = s(v);
                }
                v = s_inverse_raw(v);
                while v.is_finite() && v <= hi {
                    if v >= lo {
                        roots.push(Root { x: v, ..r });
                    }
                    v = s_inverse_raw(v);
                }
            }
            roots.sort_by(|a, b| a.x.total_cmp(&b.x));
            Ok(RootSet { target, interval: (lo, hi), mesh, roots })
        }
        _ => scan_level_set(map.evaluator()?, target, lo, hi, mesh),
    }
}

/// Roots of `map = target` in `(1/3, 3]`. The scan is widened by one mesh
/// step on each side so that a root at the period boundary is bracketed.
fn fundamental_roots(map: MapSelector, target: f64, mesh: f64) -> Result<Vec<Root>> {
    let set = scan_level_set(map.evaluator()?, target, 1.0 / 3.0 - mesh, 3.0 + mesh, mesh)?;
    let mut out: Vec<(f64, Root)> = Vec::new();
    for r in set.roots {
        let (x, _) = reduce_to_fundamental(r.x)?;
        let phase = theta(x)?.rem_euclid(1.0);
        let same = |p: f64| {
            let d = (p - phase).abs();
            d.min(1.0 - d) <= mesh
        };
        match out.iter_mut().find(|(p, _)| same(*p)) {
            Some((_, kept)) if kept.residual > r.residual => *kept = Root { x, ..r },
            Some(_) => {}
            None => out.push((phase, Root { x, ..r })),
        }
    }
    let mut out: Vec<Root> = out.into_iter().map(|(_, r)| r).collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(out)
}

/// Equilibria for a given Mina margin: one standard solution per central
/// ratio in `(1/3, 3]`. Every shift of each is again an equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibria {
    pub mina_margin: f64,
    pub central_ratios: Vec<f64>,
    pub solutions: Vec<Quadruple>,
    /// The shift family: equilibria are `S_k` of the listed solutions for
    /// every integer `k`.
    pub shift_family: bool,
}

pub fn enumerate_equilibria(mina_margin: f64, window: Window, tol: f64) -> Result<Equilibria> {
    check_x(mina_margin)?;
    let map = MapSelector::Infinite { tol };
    let roots = fundamental_roots(map, mina_margin, DEFAULT_MESH)?;
    let central_ratios: Vec<f64> = roots.iter().filter(|r| !r.suspected).map(|r| r.x).collect();
    let solutions = central_ratios
        .iter()
        .map(|&z| standard_solution(z, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(Equilibria { mina_margin, central_ratios, solutions, shift_family: true })
}

/// Samples `(x, map(x))` on a mesh.
pub fn curve(map: MapSelector, lo: f64, hi: f64, mesh: f64) -> Result<Vec<(f64, f64)>> {
    if !(mesh > 0.0) || !(hi >= lo) {
        return Err(Error::Domain("need mesh > 0 and lo ≤ hi".into()));
    }
    let eval = map.evaluator()?;
    let steps = ((hi - lo) / mesh).round() as usize;
    (0..=steps)
        .map(|i| {
            let x = (lo + i as f64 * mesh).min(hi);
            eval(x).map(|v| (x, v))
        })
        .collect()
}

/// Exact rational check that `a + b ≤ c` for finite floats.
pub fn exact_sum_le(a: f64, b: &BigRational, c: f64) -> bool {
    let a = BigRational::from_float(a).unwrap_or_else(BigRational::zero);
    let c = BigRational::from_float(c).unwrap_or_else(BigRational::one);
    a + b <= c
}
