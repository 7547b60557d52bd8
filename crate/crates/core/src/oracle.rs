//! Slow reference implementations used by the self-test and the test
//! suites. Each one is written from the rule or formula directly and shares
//! no code with the routine it checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cards::{build_deck, Card, Suit};
use crate::encoder::{AgentView, Status};
use crate::neuro::{Mlp, Weights, OUTPUTS};
use crate::rules::{legal_moves, Seat, TrickState, SEATS};
use crate::scalar::Scalar;

/// Legality as a per-card rule table: a card may be played if it follows
/// the led suit or its holder cannot follow; among the cards allowed by
/// that, the ace of trumps must be played if present.
pub fn legal_by_rule_table(hand: &[Card], led: Option<Suit>, trump: Suit) -> Vec<Card> {
    let can_follow = |suit: Suit| hand.iter().any(|c| c.suit == suit);
    let follows = |c: &Card| match led {
        None => true,
        Some(s) => c.suit == s || !can_follow(s),
    };
    let ace_forced = hand.iter().any(|c| c.is_ace_of(trump) && follows(c));
    let mut out: Vec<Card> = build_deck()
        .into_iter()
        .filter(|c| hand.contains(c))
        .filter(|c| follows(c) && (!ace_forced || c.is_ace_of(trump)))
        .collect();
    out.sort();
    out
}

/// A random mid-trick position: the player's hand, the cards already in the
/// trick, and the trump suit.
#[derive(Clone, Debug)]
pub struct Position {
    pub hand: Vec<Card>,
    pub trick: Vec<Card>,
    pub trump: Suit,
}

impl Position {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Position {
        let mut deck = build_deck();
        deck.shuffle(rng);
        let hand_len = rng.gen_range(1..=3);
        let trick_len = rng.gen_range(0..SEATS);
        let hand = deck[..hand_len].to_vec();
        let trick = deck[hand_len..hand_len + trick_len].to_vec();
        let trump = Suit::from_index(rng.gen_range(0..4));
        Position { hand, trick, trump }
    }

    pub fn led(&self) -> Option<Suit> {
        self.trick.first().map(|c| c.suit)
    }

    /// `legal_moves` under test for this position.
    pub fn legal_moves(&self) -> Vec<Card> {
        let mut t = TrickState::new(SEATS);
        for (i, &c) in self.trick.iter().enumerate() {
            t.play(Seat::new(i), c);
        }
        legal_moves(&self.hand, &t, self.trump)
    }
}

/// Central finite differences of every output with respect to every
/// parameter.
pub fn finite_difference_gradients<S: Scalar>(mlp: &Mlp<S>, input: &[u8], h: S) -> [Weights<S>; OUTPUTS] {
    let mut out: [Weights<S>; OUTPUTS] =
        std::array::from_fn(|_| Weights::zeros(mlp.input_dim(), mlp.hidden_dim()));
    let mut probe = mlp.clone();
    let n = mlp.weights.len();
    for p in 0..n {
        let base = mlp.weights.param(p);
        let mut eval = |v: S| {
            *probe.weights.param_mut(p) = v;
            probe.forward_bits(input).output.0
        };
        let plus = eval(base + h);
        let minus = eval(base - h);
        eval(base);
        for k in 0..OUTPUTS {
            *out[k].param_mut(p) = (plus[k] - minus[k]) / (h + h);
        }
    }
    out
}

/// Finite difference of every output with respect to one parameter.
pub fn finite_difference_at<S: Scalar>(mlp: &Mlp<S>, input: &[u8], param: usize, h: S) -> [S; OUTPUTS] {
    let mut probe = mlp.clone();
    let base = mlp.weights.param(param);
    let mut eval = |v: S| {
        *probe.weights.param_mut(param) = v;
        probe.forward_bits(input).output.0
    };
    let plus = eval(base + h);
    let minus = eval(base - h);
    std::array::from_fn(|k| (plus[k] - minus[k]) / (h + h))
}

/// `|a - n| / max(|a| + |n|, floor)`
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(floor)
}

/// A random but reachable decision point: a legal deal, stage-one statuses
/// with at least two stayers, and some legal card play already made.
pub fn random_view<R: Rng + ?Sized>(rng: &mut R) -> AgentView {
    let mut deck = build_deck();
    deck.shuffle(rng);
    let trump = deck[12].suit;
    let mut hands: Vec<Vec<Card>> = (0..SEATS).map(|s| deck[3 * s..3 * s + 3].to_vec()).collect();
    let mut stays = [false; SEATS];
    while stays.iter().filter(|&&s| s).count() < 2 {
        stays = std::array::from_fn(|_| rng.gen_bool(0.6));
    }
    let stayers: Vec<usize> = (0..SEATS).filter(|&s| stays[s]).collect();
    let me = stayers[rng.gen_range(0..stayers.len())];
    // play a random number of cards, stopping before the agent's third card
    let n = stayers.len();
    let target = rng.gen_range(0..(2 * n + 1).min(8));
    let mut played = Vec::new();
    let mut winners = Vec::new();
    let mut leader_pos = 0;
    'tricks: for _ in 0..2 {
        let mut trick = TrickState::new(n);
        for j in 0..n {
            if played.len() == target {
                break 'tricks;
            }
            let seat = stayers[(leader_pos + j) % n];
            let options = legal_moves(&hands[seat], &trick, trump);
            let card = options[rng.gen_range(0..options.len())];
            hands[seat].retain(|&c| c != card);
            trick.play(Seat::new(seat), card);
            played.push(card);
        }
        let w = crate::rules::resolve_trick(&trick, trump).index();
        winners.push((w + SEATS - me) % SEATS);
        leader_pos = stayers.iter().position(|&s| s == w).expect("winner stayed");
    }
    let opponents = std::array::from_fn(|i| {
        if stays[(me + 1 + i) % SEATS] {
            Status::Knocked
        } else {
            Status::Folded
        }
    });
    AgentView {
        hand: hands[me].clone(),
        trump,
        played,
        opponents,
        trick_winners: winners,
    }
}

/// Apply a suit permutation to a view (`perm[s]` is the new suit of `s`).
pub fn relabel_view(view: &AgentView, perm: [Suit; 4]) -> AgentView {
    let map = |c: &Card| Card::new(c.rank, perm[c.suit.index()]);
    AgentView {
        hand: view.hand.iter().map(map).collect(),
        trump: perm[view.trump.index()],
        played: view.played.iter().map(map).collect(),
        opponents: view.opponents,
        trick_winners: view.trick_winners.clone(),
    }
}

/// All 24 permutations of the four suits.
pub fn suit_permutations() -> Vec<[Suit; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&i| seen[i] = true);
                    if seen.iter().all(|&s| s) {
                        out.push(p.map(Suit::from_index));
                    }
                }
            }
        }
    }
    out
}

/// All orderings of up to three cards.
pub fn orderings(cards: &[Card]) -> Vec<Vec<Card>> {
    if cards.len() <= 1 {
        return vec![cards.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..cards.len() {
        let mut rest = cards.to_vec();
        let first = rest.remove(i);
        for mut tail in orderings(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}
