//! Gameplay: strategies, seeded turn resolution, simulation with cost
//! accounting, exact mean payoffs of time-invariant play, deviation checks
//! and Monte-Carlo statistics.
//!
//! Maxine stakes `a` and moves the counter right; Mina stakes `b` and moves
//! it left. `m` is Maxine's payoff and `n` is Mina's.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margin::{enumerate_equilibria, scan_level_set, MapSelector};
use crate::solution::{finite_standard_solution, standard_solution, BoundaryData, Quadruple, Transform, Window};

/// A player of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Mina,
    Maxine,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Mina => Player::Maxine,
            Player::Maxine => Player::Mina,
        }
    }
}

impl FromStr for Player {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mina" => Ok(Player::Mina),
            "maxine" => Ok(Player::Maxine),
            _ => Err(Error::Config(format!("unknown player {s:?}"))),
        }
    }
}

/// A stake policy, before it is bound to a trail and a side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Fixed stakes on `⟦lo, lo + stakes.len() − 1⟧`, zero elsewhere.
    Table { lo: i64, stakes: Vec<f64> },
    /// Equilibrium stakes of the solution with the given central ratio,
    /// centred at `shift`. Without a ratio, one is chosen to match the
    /// boundary's Mina margin.
    Nash {
        #[serde(default)]
        cen_ratio: Option<f64>,
        #[serde(default)]
        shift: i64,
    },
    Zero,
    /// Zero stakes until the opponent's total stake in the previous game of
    /// a series exceeds `threshold`; then equilibrium stakes for one game.
    TitForTat {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
    /// Stake `epsilon`, answering an opponent stake `a > epsilon` with
    /// `multiplier · a` on the next turn.
    Bully {
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_multiplier")]
        multiplier: f64,
    },
}

fn default_threshold() -> f64 {
    0.0
}

fn default_epsilon() -> f64 {
    1e-3
}

fn default_multiplier() -> f64 {
    2.0
}

impl Strategy {
    pub fn nash() -> Self {
        Strategy::Nash { cen_ratio: None, shift: 0 }
    }

    /// The side's stakes from a solution, restricted to its window.
    pub fn from_quadruple(q: &Quadruple, side: Player) -> Self {
        let stakes = match side {
            Player::Maxine => q.a.clone(),
            Player::Mina => q.b.clone(),
        };
        Strategy::Table { lo: q.window.lo, stakes }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Table { .. } => "table",
            Strategy::Nash { .. } => "nash",
            Strategy::Zero => "zero",
            Strategy::TitForTat { .. } => "tit_for_tat",
            Strategy::Bully { .. } => "bully",
        }
    }

    pub fn is_time_invariant(&self) -> bool {
        !matches!(self, Strategy::Bully { .. })
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            Strategy::Table { stakes, .. } if stakes.iter().any(|v| !(v.is_finite() && *v >= 0.0)) => {
                bad("table stakes must be finite and non-negative".into())
            }
            Strategy::Nash { cen_ratio: Some(x), .. } if !(x.is_finite() && *x > 0.0) => {
                bad(format!("central ratio must be positive, got {x}"))
            }
            Strategy::TitForTat { threshold } if !(threshold.is_finite() && *threshold >= 0.0) => {
                bad(format!("threshold must be non-negative, got {threshold}"))
            }
            Strategy::Bully { epsilon, multiplier }
                if !(epsilon.is_finite() && *epsilon >= 0.0 && multiplier.is_finite() && *multiplier >= 0.0) =>
            {
                bad("bully parameters must be non-negative".into())
            }
            _ => Ok(()),
        }
    }
}

/// Parses `name` or `name(key=value,...)`, e.g. `nash(cen_ratio=3,shift=1)`
/// or `bully(epsilon=0.001)`.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Config(format!("unbalanced parentheses in {text:?}")))?;
                (n.trim(), inner)
            }
            None => (text, ""),
        };
        let mut params = Vec::new();
        for pair in args.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {pair:?}")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let float = |key: &str, default: f64| -> Result<f64> {
            get(key).map_or(Ok(default), |v| {
                v.parse().map_err(|_| Error::Config(format!("bad number for {key}: {v:?}")))
            })
        };
        let known = |allowed: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
                Some((k, _)) => Err(Error::Config(format!("unknown parameter {k:?} for {name}"))),
                None => Ok(()),
            }
        };
        let s = match name {
            "zero" => {
                known(&[])?;
                Strategy::Zero
            }
            "nash" => {
                known(&["cen_ratio", "x", "shift"])?;
                let x = get("cen_ratio").or(get("x"));
                Strategy::Nash {
                    cen_ratio: x
                        .map(|v| v.parse().map_err(|_| Error::Config(format!("bad central ratio {v:?}"))))
                        .transpose()?,
                    shift: get("shift")
                        .map_or(Ok(0), |v| v.parse().map_err(|_| Error::Config(format!("bad shift {v:?}"))))?,
                }
            }
            "tit_for_tat" | "tft" => {
                known(&["threshold"])?;
                Strategy::TitForTat { threshold: float("threshold", default_threshold())? }
            }
            "bully" => {
                known(&["epsilon", "eps", "multiplier", "mult"])?;
                Strategy::Bully {
                    epsilon: float("epsilon", float("eps", default_epsilon())?)?,
                    multiplier: float("multiplier", float("mult", default_multiplier())?)?,
                }
            }
            _ => return Err(Error::Config(format!("unknown strategy {name:?}"))),
        };
        s.validate()?;
        Ok(s)
    }
}

/// The field of play.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trail {
    /// Terminal vertices `lo` and `hi`; open play strictly between.
    Finite { lo: i64, hi: i64 },
    /// The whole line, played until escape or cutoff.
    Infinite,
}

impl Trail {
    pub fn finite(lo: i64, hi: i64) -> Result<Self> {
        if hi - lo < 2 {
            return Err(Error::Config(format!("trail ⟦{lo}, {hi}⟧ has no interior vertex")));
        }
        Ok(Trail::Finite { lo, hi })
    }
}

/// Everything needed to play one game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub trail: Trail,
    pub boundary: BoundaryData,
    pub start: i64,
    pub seed: u64,
    /// Independent random stream; batches use one per game.
    #[serde(default)]
    pub stream: u64,
    pub max_turns: u64,
    /// Half-width `W` of the escape window on an infinite trail.
    #[serde(default = "default_escape")]
    pub escape_margin: i64,
    /// Centre of the escape window, normally the battlefield.
    #[serde(default)]
    pub centre: i64,
}

fn default_escape() -> i64 {
    12
}

impl GameConfig {
    pub fn finite(lo: i64, hi: i64, boundary: BoundaryData, start: i64, seed: u64) -> Result<Self> {
        let c = GameConfig {
            trail: Trail::finite(lo, hi)?,
            boundary,
            start,
            seed,
            stream: 0,
            max_turns: 1_000_000,
            escape_margin: default_escape(),
            centre: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.boundary.validate()?;
        if self.max_turns == 0 {
            return Err(Error::Config("max_turns must be positive".into()));
        }
        let (lo, hi) = self.ends();
        if !(lo < self.start && self.start < hi) {
            return Err(Error::Config(format!("start {} is not strictly inside ⟦{lo}, {hi}⟧", self.start)));
        }
        if self.escape_margin < 1 {
            return Err(Error::Config("escape margin must be at least 1".into()));
        }
        Ok(())
    }

    /// Vertices at which the game ends, including the escape classifier.
    pub fn ends(&self) -> (i64, i64) {
        match self.trail {
            Trail::Finite { lo, hi } => (lo, hi),
            Trail::Infinite => (self.centre - self.escape_margin - 1, self.centre + self.escape_margin + 1),
        }
    }

    fn receipts(&self, terminal: Terminal) -> (f64, f64) {
        let b = &self.boundary;
        match terminal {
            Terminal::MinaWin => (b.m_minus_inf, b.n_minus_inf),
            Terminal::MaxineWin => (b.m_plus_inf, b.n_plus_inf),
            Terminal::Cutoff => (b.m_star, b.n_star),
        }
    }
}

/// How a game ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    MinaWin,
    MaxineWin,
    Cutoff,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::MinaWin => "mina_win",
            Terminal::MaxineWin => "maxine_win",
            Terminal::Cutoff => "cutoff",
        })
    }
}

/// A played game. Pairs are ordered `(Maxine, Mina)`, i.e. `(a, b)`,
/// `(C₊, C₋)`, `(P₊, P₋)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub path: Vec<i64>,
    pub stakes: Vec<(f64, f64)>,
    pub costs: (f64, f64),
    pub terminal: Terminal,
    pub receipts: (f64, f64),
    pub payoffs: (f64, f64),
}

impl GameRecord {
    pub fn turns(&self) -> usize {
        self.stakes.len()
    }

    /// `P = receipt − cost` for both players, as stored.
    pub fn accounting_holds(&self) -> bool {
        self.payoffs.0 == self.receipts.0 - self.costs.0 && self.payoffs.1 == self.receipts.1 - self.costs.1
    }

    pub const CSV_HEADER: &'static str = "game,turns,terminal,cost_maxine,cost_mina,payoff_maxine,payoff_mina,final_vertex";

    pub fn csv_row(&self, game: usize) -> String {
        format!(
            "{game},{},{},{:?},{:?},{:?},{:?},{}",
            self.turns(),
            self.terminal,
            self.costs.0,
            self.costs.1,
            self.payoffs.0,
            self.payoffs.1,
            self.path.last().copied().unwrap_or_default()
        )
    }
}

/// Uniform draw for a turn: stream `stream`, word position fixed by the
/// turn, 53 random bits.
pub fn turn_uniform(seed: u64, stream: u64, turn: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(turn) * 2);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The winner of a turn with stakes `a` (Maxine) and `b` (Mina); `0/0`
/// counts as `1/2`. Consumes one draw.
pub fn resolve_turn<R: RngCore>(a: f64, b: f64, rng: &mut R) -> Result<Player> {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    winner_for(a, b, u)
}

/// The probability that Maxine wins the turn.
pub fn maxine_probability(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("stakes must be finite and non-negative, got ({a}, {b})")));
    }
    Ok(if a + b == 0.0 { 0.5 } else { a / (a + b) })
}

fn winner_for(a: f64, b: f64, u: f64) -> Result<Player> {
    Ok(if u < maxine_probability(a, b)? { Player::Maxine } else { Player::Mina })
}

/// Stakes of the one-turn game with prize gaps `M = m₁ − m₋₁` and
/// `N = n₋₁ − n₁`: `(M²N, MN²)/(M+N)²`.
pub fn penny_forfeit(big_m: f64, big_n: f64) -> Result<(f64, f64)> {
    if !(big_m > 0.0 && big_n > 0.0 && big_m.is_finite() && big_n.is_finite()) {
        return Err(Error::Domain(format!("prize gaps must be positive, got ({big_m}, {big_n})")));
    }
    Ok(crate::solution::forfeit_stakes(big_m, big_n))
}

/// Best responses on a uniform grid of `points` stakes over `[0, M+N]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub spacing: f64,
    pub maxine_best: f64,
    pub mina_best: f64,
    pub closed_form: (f64, f64),
}

impl GridCheck {
    pub fn agrees(&self) -> bool {
        (self.maxine_best - self.closed_form.0).abs() <= self.spacing
            && (self.mina_best - self.closed_form.1).abs() <= self.spacing
    }
}

/// Each player's one-step objective maximised on a grid against the
/// other's closed-form stake.
pub fn penny_forfeit_grid(big_m: f64, big_n: f64, points: usize) -> Result<GridCheck> {
    let (a_star, b_star) = penny_forfeit(big_m, big_n)?;
    if points < 2 {
        return Err(Error::Domain("grid needs at least two points".into()));
    }
    let spacing = (big_m + big_n) / (points - 1) as f64;
    let argmax = |f: &dyn Fn(f64) -> f64| {
        (0..points)
            .map(|k| k as f64 * spacing)
            .map(|v| (v, f(v)))
            .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    };
    let maxine = |a: f64| maxine_probability(a, b_star).unwrap_or(0.5) * big_m - a;
    let mina = |b: f64| (1.0 - maxine_probability(a_star, b).unwrap_or(0.5)) * big_n - b;
    Ok(GridCheck { spacing, maxine_best: argmax(&maxine), mina_best: argmax(&mina), closed_form: (a_star, b_star) })
}

/// A strategy bound to a side and a trail.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Table { lo: i64, stakes: Vec<f64> },
    Bully { epsilon: f64, multiplier: f64 },
}

impl Policy {
    /// The stake at `vertex`, given the opponent's stake on the previous
    /// turn.
    pub fn stake(&self, vertex: i64, opponent_last: Option<f64>) -> f64 {
        match self {
            Policy::Table { lo, stakes } => {
                let j = vertex - lo;
                if j < 0 {
                    return 0.0;
                }
                stakes.get(j as usize).copied().unwrap_or(0.0)
            }
            Policy::Bully { epsilon, multiplier } => match opponent_last {
                Some(a) if a > *epsilon => multiplier * a,
                _ => *epsilon,
            },
        }
    }

    pub fn is_time_invariant(&self) -> bool {
        matches!(self, Policy::Table { .. })
    }
}

/// Chooses the central ratio of a finite-trail equilibrium whose Mina
/// margin equals `margin`, with battlefield at `0` of the shifted trail
/// `⟦−ℓ, k⟧`. Among several, the one closest to `1` on a log scale.
pub fn finite_equilibrium_ratio(margin: f64, ell: u32, k: u32) -> Result<f64> {
    let map = MapSelector::Finite { ell, k };
    let eval = map.evaluator()?;
    let set = scan_level_set(eval, margin, 1.0 / 3.0 + 1e-12, 3.0 + 1e-3, 1e-3)?;
    set.confirmed()
        .into_iter()
        .min_by(|x, y| x.ln().abs().total_cmp(&y.ln().abs()))
        .ok_or_else(|| Error::Convergence(format!("no equilibrium on ⟦−{ell}, {k}⟧ for Mina margin {margin}")))
}

impl Strategy {
    /// Binds the strategy to a side and a game. `provoked` is the series
    /// memory of tit-for-tat.
    pub fn bind(&self, side: Player, config: &GameConfig, provoked: bool) -> Result<Policy> {
        self.validate()?;
        Ok(match self {
            Strategy::Table { lo, stakes } => Policy::Table { lo: *lo, stakes: stakes.clone() },
            Strategy::Zero => Policy::Table { lo: 0, stakes: Vec::new() },
            Strategy::Bully { epsilon, multiplier } => Policy::Bully { epsilon: *epsilon, multiplier: *multiplier },
            Strategy::TitForTat { .. } if !provoked => Policy::Table { lo: 0, stakes: Vec::new() },
            Strategy::TitForTat { .. } => Strategy::nash().bind(side, config, false)?,
            Strategy::Nash { cen_ratio, shift } => {
                let q = equilibrium_for(config, *cen_ratio, *shift)?;
                match Strategy::from_quadruple(&q, side) {
                    Strategy::Table { lo, stakes } => Policy::Table { lo, stakes },
                    _ => unreachable!(),
                }
            }
        })
    }
}

/// The equilibrium solution used by `nash`, scaled to the config's
/// boundary gap and centred at `shift`.
pub fn equilibrium_for(config: &GameConfig, cen_ratio: Option<f64>, shift: i64) -> Result<Quadruple> {
    let bd = &config.boundary;
    let gap = bd.m_plus_inf - bd.m_minus_inf;
    let margin = bd.mina_margin();
    let q = match config.trail {
        Trail::Finite { lo, hi } => {
            let (ell, k) = (shift - lo, hi - shift);
            if ell < 1 || k < 1 {
                return Err(Error::Config(format!("shift {shift} is not inside the trail ⟦{lo}, {hi}⟧")));
            }
            let x = match cen_ratio {
                Some(x) => x,
                None => finite_equilibrium_ratio(margin, ell as u32, k as u32)?,
            };
            finite_standard_solution(x, Window::new(-ell, k)?)?
        }
        Trail::Infinite => {
            let x = match cen_ratio {
                Some(x) => x,
                None => *enumerate_equilibria(margin, Window::symmetric(2)?, 1e-12)?
                    .central_ratios
                    .first()
                    .ok_or_else(|| Error::Convergence(format!("no equilibrium for Mina margin {margin}")))?,
            };
            let reach = config.escape_margin + 2;
            let off = config.centre - shift;
            standard_solution(x, Window::new(off - reach, off + reach)?)?
        }
    };
    q.transform(Transform::Shift(-shift))?
        .transform(Transform::Dilate(gap))?
        .transform(Transform::Translate(bd.m_minus_inf, bd.n_plus_inf))
}

/// Plays one game. Deterministic given the config.
pub fn simulate(config: &GameConfig, mina: &Policy, maxine: &Policy) -> Result<GameRecord> {
    config.validate()?;
    let (lo, hi) = config.ends();
    let mut vertex = config.start;
    let mut path = vec![vertex];
    let mut stakes = Vec::new();
    let (mut cost_a, mut cost_b) = (0.0, 0.0);
    let mut last: Option<(f64, f64)> = None;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(config.stream);
    let terminal = loop {
        let turn = stakes.len() as u64;
        if turn >= config.max_turns {
            break Terminal::Cutoff;
        }
        let a = maxine.stake(vertex, last.map(|s| s.1));
        let b = mina.stake(vertex, last.map(|s| s.0));
        rng.set_word_pos(u128::from(turn) * 2);
        let winner = resolve_turn(a, b, &mut rng)?;
        cost_a += a;
        cost_b += b;
        stakes.push((a, b));
        last = Some((a, b));
        vertex += if winner == Player::Maxine { 1 } else { -1 };
        path.push(vertex);
        if vertex <= lo {
            break Terminal::MinaWin;
        }
        if vertex >= hi {
            break Terminal::MaxineWin;
        }
    };
    let receipts = config.receipts(terminal);
    Ok(GameRecord {
        path,
        stakes,
        costs: (cost_a, cost_b),
        terminal,
        receipts,
        payoffs: (receipts.0 - cost_a, receipts.1 - cost_b),
    })
}

/// Plays a series of games in order, carrying tit-for-tat memory from
/// each game to the next. Game `g` uses stream `g`.
pub fn simulate_series(
    config: &GameConfig,
    mina: &Strategy,
    maxine: &Strategy,
    games: usize,
) -> Result<Vec<GameRecord>> {
    let mut out = Vec::with_capacity(games);
    let (mut mina_provoked, mut maxine_provoked) = (false, false);
    for g in 0..games {
        let cfg = GameConfig { stream: g as u64, ..*config };
        let pm = mina.bind(Player::Mina, &cfg, mina_provoked)?;
        let px = maxine.bind(Player::Maxine, &cfg, maxine_provoked)?;
        let rec = simulate(&cfg, &pm, &px)?;
        if let Strategy::TitForTat { threshold } = mina {
            mina_provoked = rec.costs.0 > *threshold;
        }
        if let Strategy::TitForTat { threshold } = maxine {
            maxine_provoked = rec.costs.1 > *threshold;
        }
        out.push(rec);
    }
    Ok(out)
}

/// Independent games in parallel, game `g` on stream `g`.
pub fn simulate_batch(config: &GameConfig, mina: &Policy, maxine: &Policy, games: usize) -> Result<Vec<GameRecord>> {
    (0..games)
        .into_par_iter()
        .map(|g| simulate(&GameConfig { stream: g as u64, ..*config }, mina, maxine))
        .collect()
}

/// Mean payoffs `m`, `n` at every vertex of `⟦lo, hi⟧`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffVectors {
    pub lo: i64,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
}

impl PayoffVectors {
    pub fn m_at(&self, i: i64) -> f64 {
        self.m[(i - self.lo) as usize]
    }

    pub fn n_at(&self, i: i64) -> f64 {
        self.n[(i - self.lo) as usize]
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.m.len() as i64 - 1
    }
}

/// Solves `v_i = p_i v_{i+1} + (1 − p_i) v_{i−1} − cost_i` with given end
/// values, where `p_i` is Maxine's turn-win probability. Elimination runs
/// left to right carrying `v_{i−1} = e·v_i + f` and `1 − e`, so no step
/// subtracts.
fn hitting_values(probs: &[f64], costs: &[f64], left: f64, right: f64) -> Vec<f64> {
    let len = probs.len();
    let (mut one_minus_e, mut f) = (1.0, left);
    let mut es = Vec::with_capacity(len);
    let mut fs = Vec::with_capacity(len);
    for (&pa, &cost) in probs.iter().zip(costs) {
        let pb = 1.0 - pa;
        let den = pa + pb * one_minus_e;
        es.push(pa / den);
        one_minus_e = pb * one_minus_e / den;
        f = (pb * f - cost) / den;
        fs.push(f);
    }
    let mut out = vec![0.0; len + 2];
    out[0] = left;
    out[len + 1] = right;
    let mut v = right;
    for t in (0..len).rev() {
        v = es[t] * v + fs[t];
        out[t + 1] = v;
    }
    out
}

/// Exact mean payoffs of time-invariant play on the finite trail with
/// terminal vertices `trail.lo`, `trail.hi`, by tridiagonal elimination.
pub fn exact_payoffs(
    trail: Window,
    a: &dyn Fn(i64) -> f64,
    b: &dyn Fn(i64) -> f64,
    boundary: &BoundaryData,
) -> Result<PayoffVectors> {
    let inner: Vec<i64> = ((trail.lo + 1)..trail.hi).collect();
    if inner.is_empty() {
        return Err(Error::Window(format!("trail {trail} has no open-play vertex")));
    }
    let mut probs = Vec::with_capacity(inner.len());
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    for &i in &inner {
        let (ai, bi) = (a(i), b(i));
        probs.push(maxine_probability(ai, bi)?);
        ca.push(ai);
        cb.push(bi);
    }
    let m = hitting_values(&probs, &ca, boundary.m_minus_inf, boundary.m_plus_inf);
    let n = hitting_values(&probs, &cb, boundary.n_minus_inf, boundary.n_plus_inf);
    if m.iter().chain(&n).any(|v| !v.is_finite()) {
        return Err(Error::Singular(format!("payoff system on {trail} is singular")));
    }
    Ok(PayoffVectors { lo: trail.lo, m, n })
}

/// Exact payoffs of two bound policies.
pub fn exact_payoffs_for(trail: Window, mina: &Policy, maxine: &Policy, boundary: &BoundaryData) -> Result<PayoffVectors> {
    if !(mina.is_time_invariant() && maxine.is_time_invariant()) {
        return Err(Error::Config("exact payoffs need time-invariant strategies".into()));
    }
    exact_payoffs(trail, &|i| maxine.stake(i, None), &|i| mina.stake(i, None), boundary)
}

/// The restriction of a solution to the finite trail `trail`: its stakes
/// inside and its payoffs at the two ends.
pub fn restrict(q: &Quadruple, trail: Window) -> Result<(BoundaryData, Vec<f64>, Vec<f64>)> {
    if !(q.window.lo <= trail.lo + 1 && trail.hi - 1 <= q.window.hi) {
        return Err(Error::Window(format!("trail {trail} does not fit window {}", q.window)));
    }
    let boundary = BoundaryData {
        m_minus_inf: q.m_at(trail.lo),
        m_plus_inf: q.m_at(trail.hi),
        n_minus_inf: q.n_at(trail.lo),
        n_plus_inf: q.n_at(trail.hi),
        m_star: q.m_at(trail.lo),
        n_star: q.n_at(trail.hi),
    };
    let a = ((trail.lo + 1)..trail.hi).map(|i| q.a_at(i)).collect();
    let b = ((trail.lo + 1)..trail.hi).map(|i| q.b_at(i)).collect();
    Ok((boundary, a, b))
}

/// The deviator's payoff change at every vertex of the trail, one row per
/// factor, when its stake at `vertex` is multiplied by the factor.
pub fn deviation_check(
    trail: Window,
    base: &Quadruple,
    vertex: i64,
    player: Player,
    factors: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if !(trail.lo < vertex && vertex < trail.hi) {
        return Err(Error::Domain(format!("vertex {vertex} is not in open play on {trail}")));
    }
    if let Some(f) = factors.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(Error::Domain(format!("deviation factor must be positive, got {f}")));
    }
    let (boundary, a, b) = restrict(base, trail)?;
    let at = |v: &Vec<f64>, i: i64| v[(i - trail.lo - 1) as usize];
    let before = exact_payoffs(trail, &|i| at(&a, i), &|i| at(&b, i), &boundary)?;
    let own = |p: &PayoffVectors| match player {
        Player::Maxine => p.m.clone(),
        Player::Mina => p.n.clone(),
    };
    let base_own = own(&before);
    factors
        .iter()
        .map(|&f| {
            let scale = |i: i64| if i == vertex { f } else { 1.0 };
            let after = match player {
                Player::Maxine => exact_payoffs(trail, &|i| at(&a, i) * scale(i), &|i| at(&b, i), &boundary)?,
                Player::Mina => exact_payoffs(trail, &|i| at(&a, i), &|i| at(&b, i) * scale(i), &boundary)?,
            };
            Ok(own(&after).iter().zip(&base_own).map(|(x, y)| x - y).collect())
        })
        .collect()
}

/// A proportion with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Proportion {
    pub fn wilson(successes: u64, trials: u64) -> Self {
        let z = 1.959_963_984_540_054;
        let n = trials.max(1) as f64;
        let p = successes as f64 / n;
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * ((p * (1.0 - p) + z * z / (4.0 * n)) / n).sqrt() / denom;
        Proportion { successes, trials, estimate: p, lower: (centre - half).max(0.0), upper: (centre + half).min(1.0) }
    }
}

/// Monte-Carlo statistics about where games end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnanimityStats {
    pub runs: u64,
    pub battlefield: i64,
    /// The last `max_turns/2` increments (or all of them in a shorter
    /// game) point the same way.
    pub p_unanimous: Proportion,
    /// The game ends on the opposite side of the battlefield from the
    /// start. Zero trials when starting on the battlefield.
    pub p_wrong_side: Proportion,
    pub p_maxine_win: Proportion,
    pub p_cutoff: Proportion,
    pub mean_returns_to_battlefield: f64,
}

pub fn unanimity_stats(
    config: &GameConfig,
    mina: &Policy,
    maxine: &Policy,
    battlefield: i64,
    runs: usize,
) -> Result<UnanimityStats> {
    if runs == 0 {
        return Err(Error::Domain("runs must be positive".into()));
    }
    let records = simulate_batch(config, mina, maxine, runs)?;
    let tail = (config.max_turns / 2).max(1) as usize;
    let (mut unanimous, mut wrong, mut maxine_wins, mut cutoffs, mut returns) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for r in &records {
        let steps: Vec<i64> = r.path.windows(2).map(|w| w[1] - w[0]).collect();
        let last = &steps[steps.len().saturating_sub(tail)..];
        if !last.is_empty() && last.iter().all(|&d| d == last[0]) {
            unanimous += 1;
        }
        let wrong_side = match (config.start.cmp(&battlefield), r.terminal) {
            (std::cmp::Ordering::Greater, Terminal::MinaWin) => true,
            (std::cmp::Ordering::Less, Terminal::MaxineWin) => true,
            _ => false,
        };
        wrong += u64::from(wrong_side);
        maxine_wins += u64::from(r.terminal == Terminal::MaxineWin);
        cutoffs += u64::from(r.terminal == Terminal::Cutoff);
        returns += r.path.iter().skip(1).filter(|&&v| v == battlefield).count() as u64;
    }
    let n = runs as u64;
    let sided = if config.start == battlefield { 0 } else { n };
    Ok(UnanimityStats {
        runs: n,
        battlefield,
        p_unanimous: Proportion::wilson(unanimous, n),
        p_wrong_side: Proportion::wilson(wrong, sided),
        p_maxine_win: Proportion::wilson(maxine_wins, n),
        p_cutoff: Proportion::wilson(cutoffs, n),
        mean_returns_to_battlefield: returns as f64 / n as f64,
    })
}

/// Soft plays the equilibrium shifted one way, tough the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posture {
    Soft,
    Tough,
}

/// Exact payoffs `(Mina, Maxine)` at vertex `0` for every posture pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChickenTable {
    pub half_width: i64,
    pub shift: i64,
    pub cen_ratio: f64,
    /// `(mina posture, maxine posture, mina payoff, maxine payoff)`.
    pub cells: Vec<(Posture, Posture, f64, f64)>,
}

impl ChickenTable {
    pub fn get(&self, mina: Posture, maxine: Posture) -> (f64, f64) {
        self.cells
            .iter()
            .find(|c| c.0 == mina && c.1 == maxine)
            .map(|c| (c.2, c.3))
            .expect("all four cells present")
    }

    /// Good > Medium > Bad for each player, and tough against tough is
    /// the worst cell for both.
    pub fn is_chicken(&self) -> bool {
        use Posture::*;
        let (ss, st, ts, tt) = (self.get(Soft, Soft), self.get(Soft, Tough), self.get(Tough, Soft), self.get(Tough, Tough));
        let mina_ok = ts.0 > ss.0 && ss.0 > st.0 && st.0 > tt.0;
        let maxine_ok = st.1 > ss.1 && ss.1 > ts.1 && ts.1 > tt.1;
        mina_ok && maxine_ok
    }
}

/// Two-by-two game on `⟦−L, L⟧` with symmetric standard boundary, built
/// from the standard solution at `cen_ratio`. A soft player concedes
/// ground by playing the equilibrium `shift` places towards its own end;
/// a tough one claims ground by shifting towards the opponent's end.
pub fn chicken(half_width: i64, shift: i64, cen_ratio: f64) -> Result<ChickenTable> {
    if half_width < 2 || shift < 1 {
        return Err(Error::Domain("need half-width ≥ 2 and shift ≥ 1".into()));
    }
    let reach = half_width + shift + 1;
    let q = standard_solution(cen_ratio, Window::symmetric(reach)?)?;
    let trail = Window::symmetric(half_width)?;
    let boundary = BoundaryData::symmetric_standard();
    let mut cells = Vec::new();
    for mina in [Posture::Soft, Posture::Tough] {
        for maxine in [Posture::Soft, Posture::Tough] {
            let sb = if mina == Posture::Soft { -shift } else { shift };
            let sa = if maxine == Posture::Soft { shift } else { -shift };
            let p = exact_payoffs(trail, &|i| q.a_at(i - sa), &|i| q.b_at(i - sb), &boundary)?;
            cells.push((mina, maxine, p.n_at(0), p.m_at(0)));
        }
    }
    Ok(ChickenTable { half_width, shift, cen_ratio, cells })
}
