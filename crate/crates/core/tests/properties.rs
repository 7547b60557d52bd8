//! Invariants over generated inputs.

use lerpa::arena::{replay, SeatBinding};
use lerpa::cards::{build_deck, Card, Suit};
use lerpa::encoder::{
    classify_played_card, encode_hand, encode_observation, PlayedSuitClass, PlayedValueClass, OBS_LEN,
};
use lerpa::experiments::{moving_average, sliding_average};
use lerpa::oracle;
use lerpa::rules::SEATS;
use lerpa::{AgentParams, Mlp, PredealtSpec, Seat, SessionLog, Table, TableConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn suit() -> impl Strategy<Value = Suit> {
    (0..4usize).prop_map(Suit::from_index)
}

/// `n` distinct cards.
fn distinct_cards(n: usize) -> impl Strategy<Value = Vec<Card>> {
    Just(build_deck()).prop_shuffle().prop_map(move |d| d[..n].to_vec())
}

fn session(seed: u64, hands: usize, td_seats: usize) -> SessionLog {
    let seats = (0..SEATS)
        .map(|i| {
            if i < td_seats {
                let p = AgentParams::<f64> {
                    courage_hands: 5,
                    ..Default::default()
                };
                SeatBinding::td(format!("AI{}", i + 1), p)
            } else {
                SeatBinding::random(format!("R{i}"))
            }
        })
        .collect();
    let cfg = TableConfig {
        seats,
        seed,
        dealer_start: Seat::new(3),
    };
    Table::new(&cfg).unwrap().run_session(hands)
}

/// Brute-force value class: where the card would slot into the held
/// ordinals of its suit, highest first.
fn value_class_by_rank(card: Card, hand: &[Card], trump: Suit) -> PlayedValueClass {
    if card.is_ace_of(trump) {
        return PlayedValueClass::AceOfTrumps;
    }
    let mut held: Vec<u8> = hand.iter().filter(|c| c.suit == card.suit).map(|c| c.ordinal()).collect();
    if held.is_empty() {
        return PlayedValueClass::VoidMember;
    }
    held.sort_unstable_by(|a, b| b.cmp(a));
    let slot = held.iter().take_while(|&&h| h > card.ordinal()).count();
    match (slot, slot == held.len()) {
        (_, true) => PlayedValueClass::LowerThanAny,
        (0, _) => PlayedValueClass::HigherThanAll,
        (1, _) => PlayedValueClass::HigherThanSecond,
        _ => PlayedValueClass::HigherThanThird,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hand_encoding_ignores_card_order(cards in distinct_cards(3), n in 1..=3usize, trump in suit()) {
        let hand = &cards[..n];
        let bits = encode_hand(hand, trump);
        for order in oracle::orderings(hand) {
            prop_assert_eq!(encode_hand(&order, trump), bits);
        }
    }

    #[test]
    fn hand_encoding_ignores_suit_names(cards in distinct_cards(3), n in 0..=3usize, trump in suit()) {
        let hand = &cards[..n];
        let bits = encode_hand(hand, trump);
        for perm in oracle::suit_permutations() {
            let relabel = |c: &Card| Card::new(c.rank, perm[c.suit.index()]);
            let h: Vec<Card> = hand.iter().map(relabel).collect();
            prop_assert_eq!(encode_hand(&h, perm[trump.index()]), bits);
        }
    }

    #[test]
    fn full_observation_ignores_suit_names_without_singleton_ties(seed in any::<u64>()) {
        let view = oracle::random_view(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut singleton_tops: Vec<u8> = Suit::ALL
            .iter()
            .filter(|&&s| s != view.trump)
            .filter_map(|&s| {
                let held: Vec<&Card> = view.hand.iter().filter(|c| c.suit == s).collect();
                (held.len() == 1).then(|| held[0].ordinal())
            })
            .collect();
        let n = singleton_tops.len();
        singleton_tops.sort_unstable();
        singleton_tops.dedup();
        prop_assume!(singleton_tops.len() == n);
        let obs = encode_observation(&view);
        for perm in oracle::suit_permutations() {
            prop_assert_eq!(encode_observation(&oracle::relabel_view(&view, perm)), obs);
        }
    }

    #[test]
    fn observation_is_81_binary_bits(seed in any::<u64>()) {
        let obs = encode_observation(&oracle::random_view(&mut ChaCha8Rng::seed_from_u64(seed)));
        prop_assert_eq!(obs.len(), OBS_LEN);
        prop_assert!(obs.bits().iter().all(|&b| b <= 1));
    }

    #[test]
    fn played_value_class_matches_brute_force(cards in distinct_cards(4), n in 0..=3usize, trump in suit()) {
        let (card, hand) = (cards[3], &cards[..n]);
        let (suit_class, value) = classify_played_card(card, hand, trump);
        prop_assert_eq!(value, value_class_by_rank(card, hand, trump));
        prop_assert_eq!(suit_class == PlayedSuitClass::Void, !hand.iter().any(|c| c.suit == card.suit));
    }

    #[test]
    fn legal_moves_match_rule_table(seed in any::<u64>()) {
        let p = oracle::Position::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let legal = p.legal_moves();
        prop_assert!(!legal.is_empty());
        prop_assert!(legal.iter().all(|c| p.hand.contains(c)));
        prop_assert_eq!(legal, oracle::legal_by_rule_table(&p.hand, p.led(), p.trump));
    }

    #[test]
    fn predealt_text_round_trips(seed in any::<u64>()) {
        let spec = PredealtSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(spec.validate().is_ok());
        prop_assert_eq!(spec.to_text().parse::<PredealtSpec>().unwrap(), spec);
    }

    #[test]
    fn smoothed_x_strictly_increases(values in prop::collection::vec(-3.0..3.0f64, 1..200), w in 1..50usize) {
        prop_assume!(w <= values.len());
        for s in [moving_average(&values, w).unwrap(), sliding_average(&values, w).unwrap()] {
            prop_assert!(!s.points.is_empty());
            prop_assert!(s.points.windows(2).all(|p| p[0].0 < p[1].0));
            prop_assert!(s.points.iter().all(|p| p.1.abs() <= 3.0));
        }
    }

    #[test]
    fn network_text_round_trips(seed in any::<u64>()) {
        let mlp: Mlp<f64> = Mlp::standard(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut buf = Vec::new();
        mlp.save(&mut buf).unwrap();
        let back: Mlp<f64> = Mlp::load(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(back, mlp);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ledger_balances_up_to_lerpa_penalties(seed in any::<u64>(), td in 0..=4usize) {
        let log = session(seed, 60, td);
        let mut running = [0i64; SEATS];
        for (r, cum) in log.records.iter().zip(&log.cumulative) {
            let s = &r.settlement;
            let expect = if s.void { 0 } else { -3 * s.lerpad_count() as i32 };
            prop_assert_eq!(s.total(), expect);
            for (t, d) in running.iter_mut().zip(s.deltas) {
                *t += d as i64;
            }
            prop_assert_eq!(&running, cum);
        }
    }

    #[test]
    fn every_hand_replays(seed in any::<u64>(), td in 0..=4usize) {
        for r in session(seed, 60, td).records {
            let (winners, tricks, settlement) = replay(&r).unwrap();
            prop_assert_eq!(winners, r.trick_winners.clone());
            prop_assert_eq!(tricks, r.tricks_won);
            prop_assert_eq!(settlement, r.settlement);
        }
    }

    #[test]
    fn play_goes_clockwise_from_the_dealers_left(seed in any::<u64>(), td in 0..=4usize) {
        let log = session(seed, 60, td);
        for pair in log.records.windows(2) {
            prop_assert_eq!(pair[1].dealer, pair[0].dealer.left());
        }
        for r in &log.records {
            let stays = r.knocks();
            let next_stayer = |s: Seat| (1..=SEATS).map(|i| s.offset(i)).find(|t| stays[t.index()]).unwrap();
            let n = stays.iter().filter(|&&s| s).count();
            if n < 2 {
                prop_assert!(r.plays.is_empty());
                continue;
            }
            let mut leader = next_stayer(r.dealer);
            for (t, trick) in r.plays.chunks(n).enumerate() {
                prop_assert_eq!(trick[0].seat, leader);
                for w in trick.windows(2) {
                    prop_assert_eq!(w[1].seat, next_stayer(w[0].seat));
                }
                leader = r.trick_winners[t];
            }
        }
    }

    #[test]
    fn same_seed_same_session(seed in any::<u64>()) {
        let a = session(seed, 40, 2);
        let b = session(seed, 40, 2);
        prop_assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        prop_assert_eq!(a, b);
    }
}
