//! Lerpa rules: dealing, move legality, trick resolution and settlement.
//!
//! Contract violations (an empty hand asked for a move, an incomplete trick
//! resolved, inconsistent trick counts) are engine bugs and panic.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cards::{build_deck, Card, Hand, Suit};

/// Number of seats at the table.
pub const SEATS: usize = 4;
/// Chips the dealer pays into the pot, and the penalty for being Lerpa'd.
pub const POT: i32 = 3;

/// An absolute seat index, 0..4, numbered clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seat(u8);

impl Seat {
    pub fn new(i: usize) -> Seat {
        assert!(i < SEATS, "seat out of range: {i}");
        Seat(i as u8)
    }

    pub fn all() -> impl Iterator<Item = Seat> {
        (0..SEATS).map(Seat::new)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The seat `n` places clockwise from this one.
    #[inline]
    pub fn offset(self, n: usize) -> Seat {
        Seat(((self.0 as usize + n) % SEATS) as u8)
    }

    #[inline]
    pub fn left(self) -> Seat {
        self.offset(1)
    }

    /// How many places clockwise `other` sits from `self` (0 for itself).
    #[inline]
    pub fn relative(self, other: Seat) -> usize {
        (other.index() + SEATS - self.index()) % SEATS
    }
}

impl fmt::Display for Seat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The result of dealing: four hands in dealing order (the first hand goes
/// to the dealer's left, the last to the dealer), the flipped trump card,
/// and the undealt rest of the deck.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deal {
    pub hands: [Hand; 4],
    pub trump_card: Card,
    pub remaining: Vec<Card>,
}

impl Deal {
    pub fn trump(&self) -> Suit {
        self.trump_card.suit
    }
}

/// Shuffle a fresh deck, deal three cards to each of four players and flip
/// the next card for trumps.
pub fn deal<R: Rng + ?Sized>(rng: &mut R) -> Deal {
    let mut deck = build_deck();
    deck.shuffle(rng);
    let hand = |i: usize| {
        Hand::new([deck[i], deck[i + 4], deck[i + 8]]).expect("shuffled deck has no duplicates")
    };
    let hands = [hand(0), hand(1), hand(2), hand(3)];
    let trump_card = deck[12];
    Deal {
        hands,
        trump_card,
        remaining: deck[13..].to_vec(),
    }
}

/// Cards played so far in the current trick.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrickState {
    plays: Vec<(Seat, Card)>,
    players: usize,
}

impl TrickState {
    /// An empty trick that will be complete after `players` plays.
    pub fn new(players: usize) -> TrickState {
        assert!((1..=SEATS).contains(&players), "bad player count {players}");
        TrickState {
            plays: Vec::with_capacity(players),
            players,
        }
    }

    pub fn led_suit(&self) -> Option<Suit> {
        self.plays.first().map(|&(_, c)| c.suit)
    }

    pub fn plays(&self) -> &[(Seat, Card)] {
        &self.plays
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn is_leading(&self) -> bool {
        self.plays.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.plays.len() == self.players
    }

    pub fn play(&mut self, seat: Seat, card: Card) {
        assert!(!self.is_complete(), "trick already complete");
        assert!(
            self.plays.iter().all(|&(s, _)| s != seat),
            "seat {seat} already played to this trick"
        );
        self.plays.push((seat, card));
    }
}

/// Cards the holder may legally play.
///
/// Following suit is compulsory when possible; a player void in the led suit
/// may play anything. If the ace of trumps is among the otherwise legal
/// cards it must be played, including when leading.
pub fn legal_moves(hand: &[Card], trick: &TrickState, trump: Suit) -> Vec<Card> {
    assert!(!hand.is_empty(), "legal_moves called with an empty hand");
    let mut legal: Vec<Card> = match trick.led_suit() {
        Some(led) if hand.iter().any(|c| c.suit == led) => {
            hand.iter().copied().filter(|c| c.suit == led).collect()
        }
        _ => hand.to_vec(),
    };
    if let Some(&ace) = legal.iter().find(|c| c.is_ace_of(trump)) {
        legal = vec![ace];
    }
    legal.sort();
    legal
}

/// Playing strength of `card` in a trick led with `led`; `None` for cards
/// that cannot win (off-suit, non-trump).
fn strength(card: Card, led: Suit, trump: Suit) -> Option<u8> {
    if card.suit == trump {
        Some(10 + card.ordinal())
    } else if card.suit == led {
        Some(card.ordinal())
    } else {
        None
    }
}

/// The seat that wins a completed trick: highest trump if any, else highest
/// card of the led suit.
pub fn resolve_trick(trick: &TrickState, trump: Suit) -> Seat {
    assert!(trick.is_complete(), "resolve_trick on an incomplete trick");
    let led = trick.led_suit().expect("complete trick has a lead");
    trick
        .plays
        .iter()
        .filter_map(|&(seat, card)| strength(card, led, trump).map(|s| (s, seat)))
        .max_by_key(|&(s, _)| s)
        .map(|(_, seat)| seat)
        .expect("the led card always has a strength")
}

/// Chip movements for one hand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settlement {
    pub deltas: [i32; SEATS],
    pub lerpad: [bool; SEATS],
    /// Every seat folded: nothing moves and the hand is redealt.
    pub void: bool,
}

impl Settlement {
    pub fn total(&self) -> i32 {
        self.deltas.iter().sum()
    }

    pub fn lerpad_count(&self) -> usize {
        self.lerpad.iter().filter(|&&l| l).count()
    }
}

/// Settle a hand. The dealer's ante of three chips is split by tricks won;
/// a seat that stayed in and won nothing pays the pot (three chips) and the
/// surplus is not carried forward. If every seat folded the hand is void.
pub fn settle_hand(stays: [bool; SEATS], tricks_won: [u8; SEATS], dealer: Seat) -> Settlement {
    for i in 0..SEATS {
        assert!(
            stays[i] || tricks_won[i] == 0,
            "folded seat {i} credited with tricks"
        );
    }
    let total: u8 = tricks_won.iter().sum();
    if !stays.iter().any(|&s| s) {
        assert_eq!(total, 0, "tricks credited in an all-fold hand");
        return Settlement {
            deltas: [0; SEATS],
            lerpad: [false; SEATS],
            void: true,
        };
    }
    assert_eq!(total, 3, "tricks of staying seats must sum to 3");
    let mut deltas = [0; SEATS];
    let mut lerpad = [false; SEATS];
    for i in 0..SEATS {
        if stays[i] {
            if tricks_won[i] == 0 {
                lerpad[i] = true;
                deltas[i] = -POT;
            } else {
                deltas[i] = tricks_won[i] as i32;
            }
        }
    }
    deltas[dealer.index()] -= POT;
    Settlement {
        deltas,
        lerpad,
        void: false,
    }
}

/// How a hand ended for one seat, as seen by a learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Stayed in and won 1, 2 or 3 tricks.
    Won(u8),
    /// Stayed in and won nothing.
    Lerpad,
    Folded,
}

impl Outcome {
    pub fn from_play(stayed: bool, tricks: u8) -> Outcome {
        match (stayed, tricks) {
            (false, _) => Outcome::Folded,
            (true, 0) => Outcome::Lerpad,
            (true, t) => {
                assert!(t <= 3, "at most three tricks per hand");
                Outcome::Won(t)
            }
        }
    }

    /// Chips this outcome is worth, excluding the dealer's ante.
    pub fn chips(self) -> i32 {
        match self {
            Outcome::Won(t) => t as i32,
            Outcome::Lerpad => -POT,
            Outcome::Folded => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cards(s: &str) -> Vec<Card> {
        parse_cards(s).unwrap()
    }

    fn trick(led: &[&str]) -> TrickState {
        let mut t = TrickState::new(4);
        for (i, c) in led.iter().enumerate() {
            t.play(Seat::new(i), c.parse().unwrap());
        }
        t
    }

    fn sorted(mut v: Vec<Card>) -> Vec<Card> {
        v.sort();
        v
    }

    #[test]
    fn forced_ace_of_trumps_when_leading() {
        let legal = legal_moves(&cards("AD KH 2C"), &trick(&[]), Suit::Diamonds);
        assert_eq!(legal, cards("AD"));
    }

    #[test]
    fn must_follow_suit() {
        let legal = legal_moves(&cards("KH 2H 3C"), &trick(&["5H"]), Suit::Diamonds);
        assert_eq!(legal, sorted(cards("KH 2H")));
    }

    #[test]
    fn void_in_led_suit_may_play_anything() {
        let legal = legal_moves(&cards("3C 4S 2D"), &trick(&["5H"]), Suit::Diamonds);
        assert_eq!(legal, sorted(cards("3C 4S 2D")));
    }

    #[test]
    fn ace_of_trumps_not_forced_when_following_another_suit() {
        let legal = legal_moves(&cards("AD 3H 4S"), &trick(&["5H"]), Suit::Diamonds);
        assert_eq!(legal, cards("3H"));
        let legal = legal_moves(&cards("AD 3C 4S"), &trick(&["5H"]), Suit::Diamonds);
        assert_eq!(legal, cards("AD"));
    }

    #[test]
    #[should_panic(expected = "empty hand")]
    fn empty_hand_is_a_contract_violation() {
        legal_moves(&[], &trick(&[]), Suit::Clubs);
    }

    fn resolve(plays: &[&str], trump: Suit) -> Seat {
        let mut t = TrickState::new(plays.len());
        for (i, c) in plays.iter().enumerate() {
            t.play(Seat::new(i), c.parse().unwrap());
        }
        resolve_trick(&t, trump)
    }

    #[test]
    fn trick_resolution() {
        assert_eq!(resolve(&["KH", "AH", "2H"], Suit::Diamonds), Seat::new(1));
        assert_eq!(resolve(&["AH", "2D", "3H"], Suit::Diamonds), Seat::new(1));
        assert_eq!(resolve(&["2D", "7D", "AD"], Suit::Diamonds), Seat::new(2));
        // off-suit high card never wins
        assert_eq!(resolve(&["2H", "AS", "3H", "AC"], Suit::Diamonds), Seat::new(2));
        // seven beats king
        assert_eq!(resolve(&["KS", "7S"], Suit::Hearts), Seat::new(1));
    }

    #[test]
    #[should_panic(expected = "incomplete")]
    fn incomplete_trick_is_a_contract_violation() {
        let mut t = TrickState::new(3);
        t.play(Seat::new(0), "2C".parse().unwrap());
        resolve_trick(&t, Suit::Hearts);
    }

    #[test]
    fn settlement_examples() {
        // dealer (seat 3) stays with 0 tricks, seats 0 and 1 stay with 2 and 1
        let s = settle_hand([true, true, false, true], [2, 1, 0, 0], Seat::new(3));
        assert_eq!(s.deltas, [2, 1, 0, -6]);
        assert_eq!(s.total(), -3);
        assert_eq!(s.lerpad, [false, false, false, true]);

        let s = settle_hand([false, true, false, false], [0, 3, 0, 0], Seat::new(3));
        assert_eq!(s.deltas, [0, 3, 0, -3]);
        assert_eq!(s.total(), 0);

        let s = settle_hand([false, false, false, true], [0, 0, 0, 3], Seat::new(3));
        assert_eq!(s.deltas, [0, 0, 0, 0]);
    }

    #[test]
    fn all_fold_is_void() {
        let s = settle_hand([false; 4], [0; 4], Seat::new(1));
        assert!(s.void);
        assert_eq!(s.deltas, [0; 4]);
    }

    #[test]
    #[should_panic]
    fn inconsistent_tricks_are_a_contract_violation() {
        settle_hand([true, true, false, false], [1, 1, 1, 0], Seat::new(0));
    }

    #[test]
    fn deal_is_deterministic_and_disjoint() {
        let a = deal(&mut ChaCha8Rng::seed_from_u64(7));
        let b = deal(&mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
        let mut all: Vec<Card> = a.hands.iter().flat_map(|h| *h.cards()).collect();
        all.push(a.trump_card);
        all.extend(&a.remaining);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 40);
        assert_eq!(a.remaining.len(), 27);
    }

    #[test]
    fn seat_arithmetic() {
        let s = Seat::new(3);
        assert_eq!(s.left(), Seat::new(0));
        assert_eq!(s.relative(Seat::new(1)), 2);
        assert_eq!(Seat::new(1).relative(Seat::new(3)), 2);
        assert_eq!(s.relative(s), 0);
    }

    #[test]
    fn outcome_chips() {
        assert_eq!(Outcome::from_play(true, 0), Outcome::Lerpad);
        assert_eq!(Outcome::from_play(false, 0).chips(), 0);
        assert_eq!(Outcome::from_play(true, 2).chips(), 2);
        assert_eq!(Outcome::Lerpad.chips(), -3);
    }
}
