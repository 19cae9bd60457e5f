//! Play sessions as a pure state machine, independent of HTTP.
//!
//! The bot's stake for a turn is committed from the seed and the history
//! so far before the human's stake is read.

use pennies_core::engine::{maxine_probability, turn_uniform, GameConfig, Player, Policy, Strategy, Terminal, Trail};
use pennies_core::BoundaryData;
use serde::{Deserialize, Serialize};

/// Default ceiling on a single stake.
pub const DEFAULT_STAKE_CAP: f64 = 1e6;

/// Why a session operation was refused.
#[derive(Debug, Clone, PartialEq)]
pub enum SessionError {
    /// Malformed request value (HTTP 400).
    BadRequest(String),
    /// Well-formed but unplayable setup (HTTP 422).
    Unprocessable(String),
    /// The session has already finished (HTTP 409).
    Finished,
}

impl std::fmt::Display for SessionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SessionError::BadRequest(m) | SessionError::Unprocessable(m) => f.write_str(m),
            SessionError::Finished => f.write_str("session has finished"),
        }
    }
}

/// An opponent given either as a descriptor string such as
/// `bully(epsilon=0.001)` or as a tagged JSON object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpponentSpec {
    Text(String),
    Spec(Strategy),
}

impl OpponentSpec {
    pub fn resolve(&self) -> Result<Strategy, SessionError> {
        match self {
            OpponentSpec::Text(t) => t.parse().map_err(|e| SessionError::Unprocessable(format!("{e}"))),
            OpponentSpec::Spec(s) => Ok(s.clone()),
        }
    }
}

fn default_start() -> i64 {
    0
}

fn default_max_turns() -> u64 {
    10_000
}

/// Body of `POST /sessions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub trail: Trail,
    #[serde(default = "BoundaryData::symmetric_standard")]
    pub boundary: BoundaryData,
    #[serde(default = "default_start")]
    pub start: i64,
    pub human_side: Player,
    pub opponent: OpponentSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_turns")]
    pub max_turns: u64,
    /// Groups sessions into an iterated series for tit-for-tat memory.
    #[serde(default)]
    pub series: Option<String>,
}

/// One resolved turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnEntry {
    pub turn: u64,
    pub human_stake: f64,
    pub bot_stake: f64,
    pub winner: Player,
    /// Counter position after the turn.
    pub vertex: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    AwaitingStake,
    Finished {
        terminal: Terminal,
        /// `(Maxine, Mina)` terminal receipts.
        receipts: (f64, f64),
        /// `(Maxine, Mina)` payoffs, receipt less total stake.
        payoffs: (f64, f64),
    },
}

/// Cumulative stakes so far.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Costs {
    pub maxine: f64,
    pub mina: f64,
}

/// A game between a human and an engine strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub config: GameConfig,
    pub human_side: Player,
    pub opponent: Strategy,
    pub series: Option<String>,
    pub provoked: bool,
    pub vertex: i64,
    /// Number of resolved turns.
    pub turn: u64,
    pub costs: Costs,
    pub history: Vec<TurnEntry>,
    pub status: Status,
    #[serde(skip)]
    policy: Option<Policy>,
}

/// What clients may see of a session. The committed bot stake is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub trail: (i64, i64),
    pub boundary: BoundaryData,
    pub start: i64,
    pub seed: u64,
    pub human_side: Player,
    pub opponent: Strategy,
    pub opponent_name: String,
    pub series: Option<String>,
    pub vertex: i64,
    pub turn: u64,
    pub costs: Costs,
    pub history: Vec<TurnEntry>,
    pub status: Status,
}

impl Session {
    /// Validates the request and binds the opponent. `provoked` is the
    /// series memory for tit-for-tat.
    pub fn create(id: String, request: &CreateSession, provoked: bool) -> Result<Session, SessionError> {
        let (lo, hi) = match request.trail {
            Trail::Finite { lo, hi } => (lo, hi),
            Trail::Infinite => {
                return Err(SessionError::Unprocessable(
                    "interactive play needs a finite trail ⟦lo, hi⟧".into(),
                ))
            }
        };
        let unprocessable = |e: pennies_core::Error| SessionError::Unprocessable(e.to_string());
        let mut config = GameConfig::finite(lo, hi, request.boundary, request.start, request.seed).map_err(unprocessable)?;
        if request.max_turns == 0 {
            return Err(SessionError::Unprocessable("max_turns must be positive".into()));
        }
        config.max_turns = request.max_turns;
        let opponent = request.opponent.resolve()?;
        let mut session = Session {
            id,
            config,
            human_side: request.human_side,
            opponent,
            series: request.series.clone(),
            provoked,
            vertex: request.start,
            turn: 0,
            costs: Costs::default(),
            history: Vec::new(),
            status: Status::AwaitingStake,
            policy: None,
        };
        session.bind().map_err(unprocessable)?;
        Ok(session)
    }

    fn bind(&mut self) -> pennies_core::Result<&Policy> {
        if self.policy.is_none() {
            let bot = self.human_side.opponent();
            self.policy = Some(self.opponent.bind(bot, &self.config, self.provoked)?);
        }
        Ok(self.policy.as_ref().unwrap())
    }

    /// Rebinds the opponent after deserialization.
    pub fn restore(mut self) -> pennies_core::Result<Session> {
        self.policy = None;
        self.bind()?;
        Ok(self)
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.status, Status::Finished { .. })
    }

    /// The bot's stake for the next turn, fixed by the history alone.
    pub fn committed_bot_stake(&self) -> f64 {
        let last_human = self.history.last().map(|t| t.human_stake);
        self.policy.as_ref().expect("session is bound").stake(self.vertex, last_human)
    }

    /// Resolves one turn with the human's stake.
    pub fn submit_stake(&mut self, amount: f64, cap: f64) -> Result<&TurnEntry, SessionError> {
        if self.is_finished() {
            return Err(SessionError::Finished);
        }
        if !(amount.is_finite() && amount >= 0.0) {
            return Err(SessionError::BadRequest(format!("stake must be a non-negative number, got {amount}")));
        }
        if amount > cap {
            return Err(SessionError::BadRequest(format!("stake {amount} exceeds the cap {cap}")));
        }
        let bot_stake = self.committed_bot_stake();
        let (a, b) = match self.human_side {
            Player::Maxine => (amount, bot_stake),
            Player::Mina => (bot_stake, amount),
        };
        let p = maxine_probability(a, b).map_err(|e| SessionError::BadRequest(e.to_string()))?;
        let u = turn_uniform(self.config.seed, self.config.stream, self.turn);
        let winner = if u < p { Player::Maxine } else { Player::Mina };
        self.costs.maxine += a;
        self.costs.mina += b;
        self.turn += 1;
        self.vertex += if winner == Player::Maxine { 1 } else { -1 };
        self.history.push(TurnEntry { turn: self.turn, human_stake: amount, bot_stake, winner, vertex: self.vertex });

        let (lo, hi) = self.config.ends();
        let terminal = if self.vertex <= lo {
            Some(Terminal::MinaWin)
        } else if self.vertex >= hi {
            Some(Terminal::MaxineWin)
        } else if self.turn >= self.config.max_turns {
            Some(Terminal::Cutoff)
        } else {
            None
        };
        if let Some(terminal) = terminal {
            let bd = &self.config.boundary;
            let receipts = match terminal {
                Terminal::MinaWin => (bd.m_minus_inf, bd.n_minus_inf),
                Terminal::MaxineWin => (bd.m_plus_inf, bd.n_plus_inf),
                Terminal::Cutoff => (bd.m_star, bd.n_star),
            };
            let payoffs = (receipts.0 - self.costs.maxine, receipts.1 - self.costs.mina);
            self.status = Status::Finished { terminal, receipts, payoffs };
        }
        Ok(self.history.last().unwrap())
    }

    /// The human's total stake, used as series memory.
    pub fn human_cost(&self) -> f64 {
        match self.human_side {
            Player::Maxine => self.costs.maxine,
            Player::Mina => self.costs.mina,
        }
    }

    pub fn view(&self) -> SessionView {
        let (lo, hi) = self.config.ends();
        SessionView {
            id: self.id.clone(),
            trail: (lo, hi),
            boundary: self.config.boundary,
            start: self.config.start,
            seed: self.config.seed,
            human_side: self.human_side,
            opponent: self.opponent.clone(),
            opponent_name: self.opponent.name().to_string(),
            series: self.series.clone(),
            vertex: self.vertex,
            turn: self.turn,
            costs: self.costs,
            history: self.history.clone(),
            status: self.status.clone(),
        }
    }
}

/// One entry of the opponent catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentInfo {
    pub name: String,
    pub descriptor: String,
    pub default: Strategy,
    pub description: String,
}

pub fn opponent_catalogue() -> Vec<OpponentInfo> {
    let entry = |descriptor: &str, description: &str| {
        let default: Strategy = descriptor.parse().expect("catalogue descriptors parse");
        OpponentInfo {
            name: default.name().to_string(),
            descriptor: descriptor.to_string(),
            default,
            description: description.to_string(),
        }
    };
    vec![
        entry("nash", "Equilibrium stakes for this trail and boundary, battlefield at the start."),
        entry("zero", "Never stakes."),
        entry(
            "tit_for_tat(threshold=0)",
            "Stakes nothing unless your total stake in the previous game of the series exceeded the threshold; then plays equilibrium stakes for one game.",
        ),
        entry(
            "bully(epsilon=0.001,multiplier=2)",
            "Stakes epsilon, answering any larger stake of yours with multiplier times it on the next turn.",
        ),
    ]
}
