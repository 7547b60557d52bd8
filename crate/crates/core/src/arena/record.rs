use crate::cards::{Card, Hand};
use crate::rules::{legal_moves, resolve_trick, settle_hand, Seat, Settlement, TrickState, SEATS};
use crate::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Stage1Record {
    pub knock: bool,
    pub forced: bool,
    pub exploratory: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CardPlay {
    pub seat: Seat,
    pub card: Card,
    pub exploratory: bool,
    pub forced: bool,
}

/// Full audit of one hand. All per-seat arrays are indexed by absolute seat.
#[derive(Clone, Debug, PartialEq)]
pub struct HandRecord {
    pub hand_index: usize,
    pub dealer: Seat,
    pub hands: [Hand; SEATS],
    pub trump_card: Card,
    pub stage1: [Stage1Record; SEATS],
    pub plays: Vec<CardPlay>,
    pub trick_winners: Vec<Seat>,
    pub tricks_won: [u8; SEATS],
    pub settlement: Settlement,
    /// Expected-chip prediction of each TD seat at every evaluated decision.
    pub predictions: [Vec<f64>; SEATS],
}

impl HandRecord {
    pub fn is_void(&self) -> bool {
        self.settlement.void
    }

    pub fn knocks(&self) -> [bool; SEATS] {
        std::array::from_fn(|i| self.stage1[i].knock)
    }

    /// Seat and card of every play, without decision flags.
    pub fn card_sequence(&self) -> Vec<(Seat, Card)> {
        self.plays.iter().map(|p| (p.seat, p.card)).collect()
    }

    /// Same decisions, same cards, same chips.
    pub fn same_outcome(&self, other: &HandRecord) -> bool {
        self.knocks() == other.knocks()
            && self.card_sequence() == other.card_sequence()
            && self.settlement.deltas == other.settlement.deltas
    }
}

/// Re-run the card play of a record under the rules and recompute the trick
/// winners, trick counts and settlement. Any illegal play or out-of-turn
/// card is an error.
pub fn replay(record: &HandRecord) -> Result<(Vec<Seat>, [u8; SEATS], Settlement), Error> {
    let trump = record.trump_card.suit;
    let stays = record.knocks();
    let stayers: Vec<Seat> = (1..=SEATS)
        .map(|i| record.dealer.offset(i))
        .filter(|s| stays[s.index()])
        .collect();
    let mut holdings: [Vec<Card>; SEATS] =
        std::array::from_fn(|i| record.hands[i].cards().to_vec());
    let mut tricks = [0u8; SEATS];
    let mut winners = Vec::new();
    match stayers.len() {
        0 | 1 => {
            if !record.plays.is_empty() {
                return Err(Error::Input("cards played in an uncontested hand".into()));
            }
            if let Some(&s) = stayers.first() {
                tricks[s.index()] = 3;
            }
        }
        n => {
            if record.plays.len() != 3 * n {
                return Err(Error::Input(format!(
                    "expected {} plays, found {}",
                    3 * n,
                    record.plays.len()
                )));
            }
            let mut leader = stayers[0];
            for chunk in record.plays.chunks(n) {
                let lead_pos = stayers.iter().position(|&s| s == leader).expect("leader stays");
                let mut trick = TrickState::new(n);
                for (k, play) in chunk.iter().enumerate() {
                    let expected = stayers[(lead_pos + k) % n];
                    if play.seat != expected {
                        return Err(Error::Input(format!(
                            "seat {} played out of turn (expected {expected})",
                            play.seat
                        )));
                    }
                    let hand = &mut holdings[play.seat.index()];
                    if !legal_moves(hand, &trick, trump).contains(&play.card) {
                        return Err(Error::Input(format!(
                            "illegal play {} by seat {}",
                            play.card, play.seat
                        )));
                    }
                    hand.retain(|&c| c != play.card);
                    trick.play(play.seat, play.card);
                }
                let w = resolve_trick(&trick, trump);
                tricks[w.index()] += 1;
                winners.push(w);
                leader = w;
            }
        }
    }
    Ok((winners, tricks, settle_hand(stays, tricks, record.dealer)))
}

/// Ordered hand records of one session plus the running chip ledger.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionLog {
    pub ids: [String; SEATS],
    pub records: Vec<HandRecord>,
    /// Cumulative chips per seat after each record.
    pub cumulative: Vec<[i64; SEATS]>,
    pub predealt: bool,
}

impl SessionLog {
    pub fn new(ids: [String; SEATS], predealt: bool) -> Self {
        SessionLog {
            ids,
            records: Vec::new(),
            cumulative: Vec::new(),
            predealt,
        }
    }

    pub fn push(&mut self, record: HandRecord) {
        let mut totals = self.cumulative.last().copied().unwrap_or([0; SEATS]);
        for (t, d) in totals.iter_mut().zip(record.settlement.deltas) {
            *t += d as i64;
        }
        self.cumulative.push(totals);
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn void_count(&self) -> usize {
        self.records.iter().filter(|r| r.is_void()).count()
    }

    pub fn non_void(&self) -> impl Iterator<Item = &HandRecord> {
        self.records.iter().filter(|r| !r.is_void())
    }

    /// Chip deltas of one seat over the non-void hands, in order.
    pub fn seat_deltas(&self, seat: Seat) -> Vec<f64> {
        self.non_void()
            .map(|r| r.settlement.deltas[seat.index()] as f64)
            .collect()
    }

    pub fn totals(&self) -> [i64; SEATS] {
        self.cumulative.last().copied().unwrap_or([0; SEATS])
    }

    /// One row per (hand, seat):
    /// `hand_index,seat,agent_id,dealer,stage1,forced,explore,tricks_won,delta,cumulative,void`.
    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "hand_index", "seat", "agent_id", "dealer", "stage1", "forced", "explore",
            "tricks_won", "delta", "cumulative", "void",
        ])?;
        let flag = |b: bool| if b { "1" } else { "0" };
        for (r, cum) in self.records.iter().zip(&self.cumulative) {
            for s in 0..SEATS {
                let st = r.stage1[s];
                w.write_record([
                    r.hand_index.to_string().as_str(),
                    &s.to_string(),
                    &self.ids[s],
                    flag(r.dealer.index() == s),
                    if st.knock { "K" } else { "F" },
                    flag(st.forced),
                    flag(st.exploratory),
                    &r.tricks_won[s].to_string(),
                    &r.settlement.deltas[s].to_string(),
                    &cum[s].to_string(),
                    flag(r.is_void()),
                ])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
