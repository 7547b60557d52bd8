//! Lerpa: a four-player trick-taking card game, neural agents trained by
//! TD(λ) that play it, and a seeded experiment harness around them.
//!
//! The numeric core ([`neuro`], [`agent`], [`arena`]) is generic over the
//! scalar type; the aliases below fix it to `f64` or `f32`.

pub mod agent;
pub mod arena;
pub mod cards;
pub mod encoder;
pub mod experiments;
pub mod neuro;
pub mod oracle;
pub mod rules;
pub mod scalar;

pub use agent::{Action, AgentParams, Decision, RandomAgent, Stage, TdAgent};
pub use arena::{HandRecord, PredealtSpec, SessionLog, Table, TableConfig};
pub use cards::{build_deck, Card, Hand, Rank, Suit};
pub use encoder::{encode_observation, AgentView, Observation, OBS_LEN};
pub use neuro::{scalar_prediction, Mlp, OutcomeDistribution};
pub use rules::{legal_moves, resolve_trick, settle_hand, Outcome, Seat, Settlement, TrickState};
pub use scalar::Scalar;

pub type Mlp64 = neuro::Mlp<f64>;
pub type Mlp32 = neuro::Mlp<f32>;
pub type TdAgent64 = agent::TdAgent<f64>;
pub type TdAgent32 = agent::TdAgent<f32>;
pub type AgentParams64 = agent::AgentParams<f64>;
pub type Table64 = arena::Table<f64>;
pub type Table32 = arena::Table<f32>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
