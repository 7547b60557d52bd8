//! The table: four seated agents playing hand after hand, with a complete
//! audit record of every hand.

mod detect;
mod predealt;
mod record;

pub use detect::{detect_bluffs, detect_equilibrium, BluffEvent, DEFAULT_BLUFF_WINDOW, DEFAULT_EQUILIBRIUM_WINDOW};
pub use predealt::PredealtSpec;
pub use record::{replay, CardPlay, HandRecord, SessionLog, Stage1Record};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{Action, AgentParams, Decision, RandomAgent, Stage, TdAgent};
use crate::cards::{Card, Hand};
use crate::encoder::{encode_observation, AgentView, Observation, Status};
use crate::rules::{self, legal_moves, resolve_trick, settle_hand, Outcome, Seat, TrickState, SEATS};
use crate::scalar::Scalar;
use crate::Error;

/// What sits in a seat.
#[derive(Clone, Debug)]
pub enum Player<S> {
    Td(TdAgent<S>),
    Random(RandomAgent),
}

#[derive(Clone, Debug)]
pub struct SeatedAgent<S> {
    pub id: String,
    pub player: Player<S>,
}

impl<S: Scalar> SeatedAgent<S> {
    pub fn td(&self) -> Option<&TdAgent<S>> {
        match &self.player {
            Player::Td(a) => Some(a),
            Player::Random(_) => None,
        }
    }

    pub fn td_mut(&mut self) -> Option<&mut TdAgent<S>> {
        match &mut self.player {
            Player::Td(a) => Some(a),
            Player::Random(_) => None,
        }
    }
}

/// How to build a seat's agent.
#[derive(Clone, Debug, PartialEq)]
pub enum SeatKind<S> {
    Td(AgentParams<S>),
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeatBinding<S> {
    pub id: String,
    pub kind: SeatKind<S>,
}

impl<S> SeatBinding<S> {
    pub fn td(id: impl Into<String>, params: AgentParams<S>) -> Self {
        SeatBinding {
            id: id.into(),
            kind: SeatKind::Td(params),
        }
    }

    pub fn random(id: impl Into<String>) -> Self {
        SeatBinding {
            id: id.into(),
            kind: SeatKind::Random,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableConfig<S> {
    /// Exactly four seats, clockwise.
    pub seats: Vec<SeatBinding<S>>,
    pub seed: u64,
    pub dealer_start: Seat,
}

/// Random stream for seat `i` (dealing uses stream 0).
pub fn seat_rng(seed: u64, seat: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + seat as u64);
    rng
}

pub struct Table<S> {
    agents: Vec<SeatedAgent<S>>,
    dealer: Seat,
    rng: ChaCha8Rng,
    next_index: usize,
}

impl<S: Scalar> Table<S> {
    pub fn new(config: &TableConfig<S>) -> Result<Self, Error> {
        if config.seats.len() != SEATS {
            return Err(Error::Input(format!(
                "a table needs exactly {SEATS} seats, got {}",
                config.seats.len()
            )));
        }
        let mut agents = Vec::with_capacity(SEATS);
        for (i, binding) in config.seats.iter().enumerate() {
            let mut rng = seat_rng(config.seed, i);
            let player = match &binding.kind {
                SeatKind::Td(params) => {
                    params.validate()?;
                    let mlp = crate::neuro::Mlp::standard(&mut rng);
                    Player::Td(TdAgent::new(params.clone(), mlp, rng))
                }
                SeatKind::Random => Player::Random(RandomAgent::new(rng)),
            };
            agents.push(SeatedAgent {
                id: binding.id.clone(),
                player,
            });
        }
        Self::with_agents(agents, config.seed, config.dealer_start)
    }

    /// Seat existing agents (for example ones trained at another table).
    pub fn with_agents(agents: Vec<SeatedAgent<S>>, seed: u64, dealer: Seat) -> Result<Self, Error> {
        if agents.len() != SEATS {
            return Err(Error::Input(format!(
                "a table needs exactly {SEATS} seats, got {}",
                agents.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        Ok(Table {
            agents,
            dealer,
            rng,
            next_index: 0,
        })
    }

    pub fn agents(&self) -> &[SeatedAgent<S>] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [SeatedAgent<S>] {
        &mut self.agents
    }

    pub fn into_agents(self) -> Vec<SeatedAgent<S>> {
        self.agents
    }

    pub fn dealer(&self) -> Seat {
        self.dealer
    }

    pub fn ids(&self) -> [String; SEATS] {
        std::array::from_fn(|i| self.agents[i].id.clone())
    }

    /// Deal and play one hand. A void hand (everyone folded) is returned as
    /// such and the dealer does not move; otherwise the deal passes left.
    pub fn play_hand(&mut self) -> HandRecord {
        let deal = rules::deal(&mut self.rng);
        let record = self.play_dealt(deal.hands, deal.trump_card);
        if !record.is_void() {
            self.dealer = self.dealer.left();
        }
        record
    }

    /// Play `n_hands` non-void hands with learning on.
    pub fn run_session(&mut self, n_hands: usize) -> SessionLog {
        let mut log = SessionLog::new(self.ids(), false);
        let mut played = 0;
        while played < n_hands {
            let rec = self.play_hand();
            if !rec.is_void() {
                played += 1;
            }
            log.push(rec);
        }
        log
    }

    /// Replay one fixed deal `repeats` times with the dealer held fixed.
    /// Void repeats count towards `repeats`.
    pub fn run_predealt(&mut self, spec: &PredealtSpec, repeats: usize) -> Result<SessionLog, Error> {
        spec.validate()?;
        let mut log = SessionLog::new(self.ids(), true);
        for _ in 0..repeats {
            let rec = self.play_dealt(spec.hands, spec.trump_card);
            log.push(rec);
        }
        Ok(log)
    }

    /// Play a hand from the given deal; `hands[i]` goes to the seat `i + 1`
    /// places left of the dealer, so the dealer receives `hands[3]`.
    pub fn play_dealt(&mut self, hands: [Hand; SEATS], trump_card: Card) -> HandRecord {
        let dealer = self.dealer;
        let trump = trump_card.suit;
        let mut seat_hands = hands;
        for (i, h) in hands.iter().enumerate() {
            seat_hands[dealer.offset(1 + i).index()] = *h;
        }
        let mut holdings: [Vec<Card>; SEATS] = std::array::from_fn(|i| seat_hands[i].cards().to_vec());
        let mut predictions: [Vec<f64>; SEATS] = Default::default();
        let mut statuses = [Status::Undecided; SEATS];
        let mut stage1 = [Stage1Record::default(); SEATS];

        for a in &mut self.agents {
            if let Player::Td(td) = &mut a.player {
                td.begin_hand();
            }
        }

        let opponents = |statuses: &[Status; SEATS], seat: Seat| -> [Status; 3] {
            std::array::from_fn(|r| statuses[seat.offset(r + 1).index()])
        };

        // stage one, clockwise from the dealer's left
        let order: Vec<Seat> = (1..=SEATS).map(|i| dealer.offset(i)).collect();
        for &seat in &order {
            let decision: Decision<S> = match &mut self.agents[seat.index()].player {
                Player::Td(td) => {
                    let view = AgentView {
                        hand: holdings[seat.index()].clone(),
                        trump,
                        played: vec![],
                        opponents: opponents(&statuses, seat),
                        trick_winners: vec![],
                    };
                    td.decide_knock(&encode_observation(&view))
                }
                Player::Random(r) => r.decide_knock(),
            };
            if let Some(y) = &decision.prediction {
                predictions[seat.index()].push(y.scalar_prediction().as_f64());
            }
            let knock = match decision.action {
                Action::Knock => true,
                Action::Fold => false,
                Action::Play(_) => unreachable!("card played at stage one"),
            };
            statuses[seat.index()] = if knock { Status::Knocked } else { Status::Folded };
            stage1[seat.index()] = Stage1Record {
                knock,
                forced: decision.forced,
                exploratory: decision.exploratory,
            };
        }

        let stayers: Vec<Seat> = order
            .iter()
            .copied()
            .filter(|s| stage1[s.index()].knock)
            .collect();
        let mut tricks_won = [0u8; SEATS];
        let mut plays = Vec::new();
        let mut winners = Vec::new();

        match stayers.len() {
            0 => {}
            1 => tricks_won[stayers[0].index()] = 3,
            _ => {
                let mut played: Vec<Card> = Vec::with_capacity(12);
                let mut leader = stayers[0];
                for trick_no in 0..3 {
                    let lead_pos = stayers.iter().position(|&s| s == leader).expect("leader stays");
                    let mut trick = TrickState::new(stayers.len());
                    for k in 0..stayers.len() {
                        let seat = stayers[(lead_pos + k) % stayers.len()];
                        let legal = legal_moves(&holdings[seat.index()], &trick, trump);
                        let (card, exploratory, forced) = if trick_no == 2 {
                            (legal[0], false, true)
                        } else {
                            let stage = if trick_no == 0 { Stage::FirstCard } else { Stage::SecondCard };
                            let decision = self.choose(
                                seat, stage, &legal, &holdings[seat.index()], trump,
                                &played, &winners, &trick, &statuses,
                            );
                            if let Some(y) = &decision.prediction {
                                predictions[seat.index()].push(y.scalar_prediction().as_f64());
                            }
                            match decision.action {
                                Action::Play(c) => (c, decision.exploratory, decision.forced),
                                _ => unreachable!("agent must play a card"),
                            }
                        };
                        debug_assert!(legal.contains(&card));
                        holdings[seat.index()].retain(|&c| c != card);
                        trick.play(seat, card);
                        played.push(card);
                        plays.push(CardPlay { seat, card, exploratory, forced });
                    }
                    let w = resolve_trick(&trick, trump);
                    tricks_won[w.index()] += 1;
                    winners.push(w);
                    leader = w;
                }
            }
        }

        let stays: [bool; SEATS] = std::array::from_fn(|i| stage1[i].knock);
        let settlement = settle_hand(stays, tricks_won, dealer);
        for (i, a) in self.agents.iter_mut().enumerate() {
            if let Player::Td(td) = &mut a.player {
                td.td_terminal(Outcome::from_play(stays[i], tricks_won[i]));
            }
        }

        let hand_index = self.next_index;
        self.next_index += 1;
        HandRecord {
            hand_index,
            dealer,
            hands: seat_hands,
            trump_card,
            stage1,
            plays,
            trick_winners: winners,
            tricks_won,
            settlement,
            predictions,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn choose(
        &mut self,
        seat: Seat,
        stage: Stage,
        legal: &[Card],
        hand: &[Card],
        trump: crate::cards::Suit,
        played: &[Card],
        winners: &[Seat],
        trick: &TrickState,
        statuses: &[Status; SEATS],
    ) -> Decision<S> {
        match &mut self.agents[seat.index()].player {
            Player::Random(r) => r.choose_card(stage, legal),
            Player::Td(td) => {
                let opponents: [Status; 3] = std::array::from_fn(|r| statuses[seat.offset(r + 1).index()]);
                let candidates: Vec<(Card, Observation)> = legal
                    .iter()
                    .map(|&card| {
                        let mut after_hand = hand.to_vec();
                        after_hand.retain(|&c| c != card);
                        let mut after_played = played.to_vec();
                        after_played.push(card);
                        let mut after_winners: Vec<usize> =
                            winners.iter().map(|&w| seat.relative(w)).collect();
                        let mut t = trick.clone();
                        t.play(seat, card);
                        if t.is_complete() {
                            after_winners.push(seat.relative(resolve_trick(&t, trump)));
                        }
                        let view = AgentView {
                            hand: after_hand,
                            trump,
                            played: after_played,
                            opponents,
                            trick_winners: after_winners,
                        };
                        (card, encode_observation(&view))
                    })
                    .collect();
                td.choose_card(&candidates)
            }
        }
    }
}
