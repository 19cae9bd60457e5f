//! One pass/fail line per primary acceptance criterion. Exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pennies_core::certified::{
    build_tables, lambda_upper_certificate, margin54_interval, verify_golden, Rounding, GOLDEN_INTERVAL, Z058,
};
use pennies_core::dynamics::{
    a_system_solve, dabmn_evolve, symmetric_crosscheck, Lattice, TerminalCondition, TerminalPreset,
};
use pennies_core::elementary::s;
use pennies_core::engine::{
    deviation_check, exact_payoffs, penny_forfeit_grid, restrict, simulate_batch, GameConfig, Player, Policy,
};
use pennies_core::margin::{enumerate_equilibria, find_level_set, margin_finite, MapSelector};
use pennies_core::solution::{default_solution, standard_solution, standard_solution_closed_form, z_sum};
use pennies_core::{Result, Window};

const CERTIFY_BUDGET: Duration = Duration::from_secs(1);
const SYMMETRY_BUDGET: Duration = Duration::from_secs(10);
const DABMN_BUDGET: Duration = Duration::from_secs(30);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp()).collect()
}

fn certified_tables() -> Result<Outcome> {
    let start = Instant::now();
    let tables = build_tables(Z058, Rounding::Nearest)?;
    let golden = verify_golden(&tables);
    let interval = margin54_interval(&tables)?;
    let elapsed = start.elapsed();
    let pass = golden.is_ok() && interval == GOLDEN_INTERVAL && elapsed < CERTIFY_BUDGET;
    let cells = match golden {
        Ok(()) => "48/48 cells equal".to_string(),
        Err(m) => format!("mismatch {m:?}"),
    };
    outcome(pass, format!("{cells}; interval [{}, {}]; {:.0?}", interval.lo, interval.hi, elapsed))
}

fn lambda_bound() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for rounding in [Rounding::Nearest, Rounding::Directed] {
        let cert = lambda_upper_certificate(&build_tables(Z058, rounding)?)?;
        pass &= cert.holds();
        parts.push(format!(
            "{rounding:?}: M ≤ {} ({}), λ ≤ 0.999904 ({})",
            cert.margin_upper, cert.margin_bound_holds, cert.lambda_bound_holds
        ));
    }
    outcome(pass, parts.join("; "))
}

fn symmetry_identities() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = [0.0f64; 4];
    for k in 1..=5u32 {
        worst[0] = worst[0].max((margin_finite(3.0, k, k)? - 1.0).abs());
        worst[1] = worst[1].max((margin_finite(1.0, k + 1, k)? - 1.0).abs());
        let steps = ((3.0f64 - 1.0 / 3.0) / 1e-3).round() as usize;
        for j in 0..=steps {
            let x = (1.0 / 3.0 + j as f64 * 1e-3).min(3.0);
            let reflected = margin_finite(x, k, k)? * margin_finite(1.0 / s(x), k, k)?;
            worst[2] = worst[2].max((reflected - 1.0).abs());
            let inverted = margin_finite(x, k + 1, k)? * margin_finite(1.0 / x, k + 1, k)?;
            worst[3] = worst[3].max((inverted - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst[0] <= 1e-10 && worst[1] <= 1e-10 && worst[2] <= 1e-9 && worst[3] <= 1e-9 && elapsed < SYMMETRY_BUDGET;
    outcome(
        pass,
        format!(
            "max |M_kk(3)−1| {:.1e}, |M_k+1,k(1)−1| {:.1e}, reflection {:.1e}, inversion {:.1e}; {:.0?}",
            worst[0], worst[1], worst[2], worst[3], elapsed
        ),
    )
}

fn roots() -> Result<Outcome> {
    let three = find_level_set(MapSelector::Finite { ell: 3, k: 3 }, 1.0, 0.5, 10.0, 1e-3)?.confirmed();
    let three_ok = three.len() == 3
        && (three[1] - 3.0).abs() <= 1e-9
        && (three[0] - 1.63).abs() <= 0.01
        && (three[2] - 5.64).abs() <= 0.01;
    let six = find_level_set(MapSelector::Finite { ell: 6, k: 6 }, 1.0 + 1e-4, 0.5, 10.0, 1e-3)?.confirmed();
    let six_ok = six.len() == 1 && (six[0] - 4.04493).abs() <= 1e-4;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.7}")).collect::<Vec<_>>().join(", ");
    outcome(
        three_ok && six_ok,
        format!("M_3,3 = 1 at [{}]; M_6,6 = 1+1e-4 at [{}]", fmt(&three), fmt(&six)),
    )
}

fn solution_residuals() -> Result<Outcome> {
    let window = Window::symmetric(20)?;
    let (mut residual, mut closed, mut z_err) = (0.0f64, 0.0f64, 0.0f64);
    for x in log_spaced(0.01, 100.0, 50) {
        for q in [default_solution(x, window)?, standard_solution(x, window)?] {
            residual = residual.max(q.max_residual());
        }
        let product = standard_solution(x, window)?;
        let closed_form = standard_solution_closed_form(x, window)?;
        let pairs = [(&product.a, &closed_form.a), (&product.b, &closed_form.b), (&product.m, &closed_form.m), (&product.n, &closed_form.n)];
        for (u, v) in pairs {
            for (p, c) in u.iter().zip(v) {
                closed = closed.max((p - c).abs());
            }
        }
        // Σ_i 1/Z(s_i(x)) over the orbit, summed until terms vanish.
        let mut sum = 0.0;
        let (mut up, mut down) = (x, pennies_core::elementary::s_inverse_raw(x));
        for _ in 0..64 {
            for y in [up, down] {
                if let Ok(z) = z_sum(y, 1e-300) {
                    sum += 1.0 / z;
                }
            }
            up = s(up);
            down = pennies_core::elementary::s_inverse_raw(down);
        }
        z_err = z_err.max((sum - 1.0).abs());
    }
    outcome(
        residual <= 1e-9 && closed <= 1e-9 && z_err <= 1e-8,
        format!("max residual {residual:.1e}; closed-form gap {closed:.1e}; |Σ1/Z − 1| {z_err:.1e}"),
    )
}

fn decay_and_battlefield() -> Result<Outcome> {
    let window = Window::symmetric(20)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in log_spaced(0.01, 100.0, 50) {
        let view = standard_solution(x, window)?.phi_view()?;
        let k = view.battlefield;
        let level = |i: i64| (-(view.get(k + i) / 2.0).ln()).log2();
        for i in 2..6 {
            let inc = level(i + 1) - level(i);
            lo = lo.min(inc);
            hi = hi.max(inc);
        }
    }
    let decay_ok = (0.9..=1.1).contains(&lo) && (0.9..=1.1).contains(&hi);
    let eq = enumerate_equilibria(1.0, window, 1e-12)?;
    let mut stakes = Vec::new();
    for q in &eq.solutions {
        let k = q.phi_view()?.battlefield;
        stakes.push((q.a_at(k), q.b_at(k)));
    }
    let stakes_ok = !stakes.is_empty()
        && stakes.iter().all(|&(a, b)| (0.12..=0.20).contains(&a) && (0.025..=0.18).contains(&b));
    let listed = stakes.iter().map(|(a, b)| format!("({a:.4}, {b:.4})")).collect::<Vec<_>>().join(" ");
    outcome(
        decay_ok && stakes_ok,
        format!("log2(−ln(φ/2)) increments in [{lo:.4}, {hi:.4}]; battlefield (a, b) at M = 1: {listed}"),
    )
}

fn oracle_equivalence() -> Result<Outcome> {
    let q = standard_solution(0.58, Window::symmetric(8)?)?;
    let trail = Window::new(-5, 4)?;
    let (boundary, a, b) = restrict(&q, trail)?;
    let at = |v: &Vec<f64>, i: i64| v[(i - trail.lo - 1) as usize];
    let exact = exact_payoffs(trail, &|i| at(&a, i), &|i| at(&b, i), &boundary)?;
    let solve_gap = trail
        .indices()
        .map(|i| (exact.m_at(i) - q.m_at(i)).abs().max((exact.n_at(i) - q.n_at(i)).abs()))
        .fold(0.0, f64::max);

    let config = GameConfig::finite(trail.lo, trail.hi, boundary, 0, 20_240_601)?;
    let maxine = Policy::Table { lo: trail.lo + 1, stakes: a.clone() };
    let mina = Policy::Table { lo: trail.lo + 1, stakes: b.clone() };
    let games = 100_000;
    let records = simulate_batch(&config, &mina, &maxine, games)?;
    let mut z_scores = Vec::new();
    for (pick, target) in [(0usize, exact.m_at(0)), (1, exact.n_at(0))] {
        let values: Vec<f64> = records.iter().map(|r| if pick == 0 { r.payoffs.0 } else { r.payoffs.1 }).collect();
        let mean = values.iter().sum::<f64>() / games as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (games - 1) as f64;
        z_scores.push((mean - target).abs() / (var / games as f64).sqrt());
    }
    let mc_ok = z_scores.iter().all(|z| *z <= 3.0);

    let mut grid_ok = true;
    for (big_m, big_n) in [(1.0, 1.0), (1.0, 0.58), (2.0, 0.3), (0.7, 5.0)] {
        grid_ok &= penny_forfeit_grid(big_m, big_n, 200)?.agrees();
    }
    outcome(
        solve_gap <= 1e-9 && mc_ok && grid_ok,
        format!(
            "solve vs closed form {solve_gap:.1e}; Monte Carlo |z| = {:.2} (m), {:.2} (n) over {games} games; penny forfeit grid {}",
            z_scores[0],
            z_scores[1],
            if grid_ok { "agrees" } else { "disagrees" }
        ),
    )
}

fn nash_deviation() -> Result<Outcome> {
    let factors = [0.5, 0.9, 1.1, 2.0];
    let mut worst = f64::INFINITY;
    let mut trails = 0;
    for x in [0.58, 3.0] {
        let q = standard_solution(x, Window::symmetric(14)?)?;
        let k = q.phi_view()?.battlefield;
        for len in 3..=13i64 {
            for left in 1..=(len - 2) {
                let trail = Window::new(k - left, k - left + len - 1)?;
                trails += 1;
                for player in [Player::Mina, Player::Maxine] {
                    for row in deviation_check(trail, &q, k, player, &factors)? {
                        worst = worst.min(-row[(k - trail.lo) as usize]);
                    }
                }
            }
        }
    }
    outcome(worst >= 1e-10, format!("smallest loss at the battlefield vertex {worst:.2e} over {trails} trails"))
}

fn a_system() -> Result<Outcome> {
    let mut residual = 0.0f64;
    let mut scaling = 0.0f64;
    for lattice in [Lattice::Integers, Lattice::HalfIntegers] {
        let unit = a_system_solve(lattice, 1.0, 10)?;
        residual = residual.max(unit.max_residual());
        for scale in [0.25, 3.0, 40.0] {
            let scaled = a_system_solve(lattice, scale, 10)?;
            residual = residual.max(scaled.max_residual() / (scale * scale));
            for (v, u) in scaled.values.iter().zip(&unit.values) {
                if *u > 0.0 {
                    scaling = scaling.max((v / (scale * u) - 1.0).abs());
                }
            }
        }
    }
    let report = symmetric_crosscheck(10)?;
    let agreement = report.max_discrepancy();
    outcome(
        residual <= 1e-12 && scaling <= 1e-12 && agreement <= 1e-8,
        format!("max residual / scale² {residual:.1e}; scaling {scaling:.1e}; reflections {agreement:.1e}"),
    )
}

fn dabmn() -> Result<Outcome> {
    let fixed = TerminalCondition::preset(TerminalPreset::Static { x: 0.58 }, 5)?;
    let sheet = dabmn_evolve(&fixed, 50, 10)?;
    let drift = sheet.convergence.iter().copied().fold(0.0, f64::max);

    let start = Instant::now();
    let plateau = TerminalCondition::preset(TerminalPreset::Plateau { delta: 1e-9 }, 8)?;
    let run = dabmn_evolve(&plateau, 4200, 140)?;
    let elapsed = start.elapsed();
    let phases: Vec<usize> = run.maxima_phases().iter().map(|p| p.0).collect();
    let collapse = phases.windows(2).any(|w| w == [2, 1]) && phases.last() == Some(&1);
    let phase_text = run
        .maxima_phases()
        .iter()
        .map(|(c, a, b)| format!("{c} maxima for backward steps {a}–{b}"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        drift <= 1e-12 && collapse && elapsed < DABMN_BUDGET,
        format!("static drift {drift:.1e}; {phase_text}; {:.1?}", elapsed),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("certified tables", certified_tables),
        ("lambda bound", lambda_bound),
        ("symmetry identities", symmetry_identities),
        ("roots", roots),
        ("solution residuals", solution_residuals),
        ("decay and battlefield", decay_and_battlefield),
        ("oracle equivalence", oracle_equivalence),
        ("nash deviation", nash_deviation),
        ("a-system", a_system),
        ("dabmn", dabmn),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
