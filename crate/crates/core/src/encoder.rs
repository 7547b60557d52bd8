//! Binary observation encoding.
//!
//! Suits are described by the role they play in the agent's hand rather than
//! by name, and played cards are described by their value relative to the
//! agent's remaining cards of the same suit. The result is a fixed 81-bit
//! vector; see [`LAYOUT`] for the field offsets. Multi-bit fields are written
//! most significant bit first.

use std::fmt;

use crate::cards::{Card, Suit};

pub const HAND_SLOTS: usize = 3;
pub const HAND_SLOT_BITS: usize = 7;
pub const PLAYED_SLOTS: usize = 8;
pub const PLAYED_SLOT_BITS: usize = 6;
pub const OPPONENTS: usize = 3;
pub const STATUS_BITS: usize = 2;
pub const WINNER_FIELDS: usize = 2;
pub const WINNER_BITS: usize = 3;

pub const HAND_OFFSET: usize = 0;
pub const PLAYED_OFFSET: usize = HAND_OFFSET + HAND_SLOTS * HAND_SLOT_BITS;
pub const STATUS_OFFSET: usize = PLAYED_OFFSET + PLAYED_SLOTS * PLAYED_SLOT_BITS;
pub const WINNER_OFFSET: usize = STATUS_OFFSET + OPPONENTS * STATUS_BITS;
/// Total observation length.
pub const OBS_LEN: usize = WINNER_OFFSET + WINNER_FIELDS * WINNER_BITS;

/// Suit-class code written into an empty hand slot. Codes 0..=4 are real
/// classes, so an exhausted slot cannot be mistaken for a card.
pub const EMPTY_HAND_SLOT_CODE: u8 = 0b111;

/// Role of a suit within the agent's own hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HandSuitClass {
    Trump = 0,
    MultipleNonTrump = 1,
    HighestSingleton = 2,
    SecondSingleton = 3,
    ThirdSingleton = 4,
}

impl HandSuitClass {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Suit class of a played card: the hand classes plus `Void`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlayedSuitClass {
    Held(HandSuitClass),
    Void,
}

impl PlayedSuitClass {
    pub fn code(self) -> u8 {
        match self {
            PlayedSuitClass::Held(c) => c.code(),
            PlayedSuitClass::Void => 5,
        }
    }
}

/// Value of a played card relative to the agent's cards of that suit.
///
/// Codes start at 1 so that an all-zero played slot always means "no card".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlayedValueClass {
    HigherThanAll = 1,
    /// Between the agent's highest and second-highest card.
    HigherThanSecond = 2,
    /// Between the agent's second- and third-highest card.
    HigherThanThird = 3,
    LowerThanAny = 4,
    VoidMember = 5,
    AceOfTrumps = 6,
}

impl PlayedValueClass {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Stage-one status of an opponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Status {
    #[default]
    Undecided = 0b00,
    Knocked = 0b01,
    Folded = 0b10,
}

/// Everything an agent may see at a decision point, seat-relative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentView {
    /// Cards still held.
    pub hand: Vec<Card>,
    pub trump: Suit,
    /// Every card played this hand, in play order.
    pub played: Vec<Card>,
    /// Opponents clockwise from the agent (1, 2, 3 places to its left).
    pub opponents: [Status; OPPONENTS],
    /// Winners of completed tricks as relative seats (0 is the agent).
    pub trick_winners: Vec<usize>,
}

/// Fixed-length binary input vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Observation([u8; OBS_LEN]);

impl Observation {
    pub fn zeros() -> Observation {
        Observation([0; OBS_LEN])
    }

    pub fn bits(&self) -> &[u8; OBS_LEN] {
        &self.0
    }

    pub fn len(&self) -> usize {
        OBS_LEN
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Build from raw bits. Panics on a non-binary entry.
    pub fn from_bits(bits: [u8; OBS_LEN]) -> Observation {
        assert!(bits.iter().all(|&b| b <= 1), "observation bits must be 0 or 1");
        Observation(bits)
    }

    fn write(&mut self, offset: usize, width: usize, value: u8) {
        debug_assert!((value as u16) < (1 << width));
        for i in 0..width {
            self.0[offset + i] = (value >> (width - 1 - i)) & 1;
        }
    }

    /// Read back a multi-bit field.
    pub fn field(&self, offset: usize, width: usize) -> u8 {
        self.0[offset..offset + width]
            .iter()
            .fold(0, |acc, &b| (acc << 1) | b)
    }
}

impl fmt::Debug for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        write!(f, "Observation({s})")
    }
}

/// Assign each held suit its role. Unheld suits map to `None`.
///
/// The trump suit, if held, is `Trump`. A non-trump suit with two or more
/// cards is `MultipleNonTrump`. Remaining suits are singletons ranked by
/// their card's ordinal, ties broken spades > hearts > diamonds > clubs.
pub fn classify_hand_suits(hand: &[Card], trump: Suit) -> [Option<HandSuitClass>; 4] {
    let mut counts = [0usize; 4];
    let mut top = [0u8; 4];
    for c in hand {
        counts[c.suit.index()] += 1;
        top[c.suit.index()] = top[c.suit.index()].max(c.ordinal());
    }
    let mut classes = [None; 4];
    let mut singletons = Vec::with_capacity(3);
    for suit in Suit::ALL {
        let i = suit.index();
        if counts[i] == 0 {
            continue;
        }
        if suit == trump {
            classes[i] = Some(HandSuitClass::Trump);
        } else if counts[i] >= 2 {
            classes[i] = Some(HandSuitClass::MultipleNonTrump);
        } else {
            singletons.push(suit);
        }
    }
    singletons.sort_by(|a, b| {
        (top[b.index()], b.tie_break_priority()).cmp(&(top[a.index()], a.tie_break_priority()))
    });
    const RANKED: [HandSuitClass; 3] = [
        HandSuitClass::HighestSingleton,
        HandSuitClass::SecondSingleton,
        HandSuitClass::ThirdSingleton,
    ];
    for (suit, class) in singletons.into_iter().zip(RANKED) {
        classes[suit.index()] = Some(class);
    }
    classes
}

/// Hand cards in canonical encoding order: suit class ascending, then
/// ordinal descending. Independent of the order the cards are given in.
pub fn canonical_hand_order(hand: &[Card], trump: Suit) -> Vec<(HandSuitClass, Card)> {
    let classes = classify_hand_suits(hand, trump);
    let mut out: Vec<(HandSuitClass, Card)> = hand
        .iter()
        .map(|&c| (classes[c.suit.index()].expect("held suit is classified"), c))
        .collect();
    out.sort_by(|(ca, a), (cb, b)| ca.cmp(cb).then(b.ordinal().cmp(&a.ordinal())));
    out
}

/// The 21 hand bits: per slot, 3 suit-class bits then 4 rank-ordinal bits.
pub fn encode_hand(hand: &[Card], trump: Suit) -> [u8; HAND_SLOTS * HAND_SLOT_BITS] {
    assert!(hand.len() <= HAND_SLOTS, "hand too large");
    let mut obs = Observation::zeros();
    write_hand(&mut obs, hand, trump);
    let mut out = [0; HAND_SLOTS * HAND_SLOT_BITS];
    out.copy_from_slice(&obs.0[HAND_OFFSET..HAND_OFFSET + HAND_SLOTS * HAND_SLOT_BITS]);
    out
}

fn write_hand(obs: &mut Observation, hand: &[Card], trump: Suit) {
    let ordered = canonical_hand_order(hand, trump);
    for slot in 0..HAND_SLOTS {
        let base = HAND_OFFSET + slot * HAND_SLOT_BITS;
        match ordered.get(slot) {
            Some(&(class, card)) => {
                obs.write(base, 3, class.code());
                obs.write(base + 3, 4, card.ordinal());
            }
            None => {
                obs.write(base, 3, EMPTY_HAND_SLOT_CODE);
                obs.write(base + 3, 4, 0);
            }
        }
    }
}

/// Classify a played card against the agent's current holdings.
pub fn classify_played_card(
    card: Card,
    my_hand: &[Card],
    trump: Suit,
) -> (PlayedSuitClass, PlayedValueClass) {
    let suit_class = match classify_hand_suits(my_hand, trump)[card.suit.index()] {
        Some(c) => PlayedSuitClass::Held(c),
        None => PlayedSuitClass::Void,
    };
    let value_class = if card.is_ace_of(trump) {
        PlayedValueClass::AceOfTrumps
    } else if suit_class == PlayedSuitClass::Void {
        PlayedValueClass::VoidMember
    } else {
        let same: Vec<u8> = my_hand
            .iter()
            .filter(|c| c.suit == card.suit)
            .map(|c| c.ordinal())
            .collect();
        let above = same.iter().filter(|&&o| o > card.ordinal()).count();
        if above == same.len() {
            PlayedValueClass::LowerThanAny
        } else {
            match above {
                0 => PlayedValueClass::HigherThanAll,
                1 => PlayedValueClass::HigherThanSecond,
                _ => PlayedValueClass::HigherThanThird,
            }
        }
    };
    (suit_class, value_class)
}

/// The six bits of one played-card slot.
pub fn encode_played_card(card: Card, my_hand: &[Card], trump: Suit) -> [u8; PLAYED_SLOT_BITS] {
    let (s, v) = classify_played_card(card, my_hand, trump);
    let mut obs = Observation::zeros();
    obs.write(0, 3, s.code());
    obs.write(3, 3, v.code());
    let mut out = [0; PLAYED_SLOT_BITS];
    out.copy_from_slice(&obs.0[..PLAYED_SLOT_BITS]);
    out
}

/// Encode a full view. Panics if the view is inconsistent (more than eight
/// played cards or two completed tricks).
pub fn encode_observation(view: &AgentView) -> Observation {
    assert!(
        view.played.len() <= PLAYED_SLOTS,
        "view has {} played cards, at most {PLAYED_SLOTS} can be encoded",
        view.played.len()
    );
    assert!(
        view.trick_winners.len() <= WINNER_FIELDS,
        "view has {} completed tricks, at most {WINNER_FIELDS} can be encoded",
        view.trick_winners.len()
    );
    let mut obs = Observation::zeros();
    write_hand(&mut obs, &view.hand, view.trump);
    for (slot, &card) in view.played.iter().enumerate() {
        let (s, v) = classify_played_card(card, &view.hand, view.trump);
        let base = PLAYED_OFFSET + slot * PLAYED_SLOT_BITS;
        obs.write(base, 3, s.code());
        obs.write(base + 3, 3, v.code());
    }
    for (i, status) in view.opponents.iter().enumerate() {
        obs.write(STATUS_OFFSET + i * STATUS_BITS, STATUS_BITS, *status as u8);
    }
    for (t, &rel) in view.trick_winners.iter().enumerate() {
        assert!(rel < 4, "relative seat out of range");
        obs.write(WINNER_OFFSET + t * WINNER_BITS, WINNER_BITS, 1 + rel as u8);
    }
    obs
}

/// One named field of the observation layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutField {
    pub name: String,
    pub offset: usize,
    pub width: usize,
}

/// Every field of the observation, in offset order.
pub fn layout() -> Vec<LayoutField> {
    let mut fields = Vec::new();
    let mut push = |name: String, offset: usize, width: usize| {
        fields.push(LayoutField {
            name,
            offset,
            width,
        })
    };
    for s in 0..HAND_SLOTS {
        let base = HAND_OFFSET + s * HAND_SLOT_BITS;
        push(format!("hand{}_suit_class", s + 1), base, 3);
        push(format!("hand{}_rank", s + 1), base + 3, 4);
    }
    for s in 0..PLAYED_SLOTS {
        let base = PLAYED_OFFSET + s * PLAYED_SLOT_BITS;
        push(format!("played{}_suit_class", s + 1), base, 3);
        push(format!("played{}_value_class", s + 1), base + 3, 3);
    }
    for o in 0..OPPONENTS {
        push(
            format!("opponent{}_status", o + 1),
            STATUS_OFFSET + o * STATUS_BITS,
            STATUS_BITS,
        );
    }
    for t in 0..WINNER_FIELDS {
        push(
            format!("trick{}_winner", t + 1),
            WINNER_OFFSET + t * WINNER_BITS,
            WINNER_BITS,
        );
    }
    fields
}

/// The layout as a plain text table.
pub fn layout_table() -> String {
    let mut out = format!("{:<22} {:>6} {:>5}\n", "field", "offset", "width");
    for f in layout() {
        out.push_str(&format!("{:<22} {:>6} {:>5}\n", f.name, f.offset, f.width));
    }
    out.push_str(&format!("{:<22} {:>6} {:>5}\n", "total", 0, OBS_LEN));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;

    fn cards(s: &str) -> Vec<Card> {
        parse_cards(s).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = classify_hand_suits(&cards("AD 5D KH"), Suit::Hearts);
        assert_eq!(c[Suit::Diamonds.index()], Some(HandSuitClass::MultipleNonTrump));
        assert_eq!(c[Suit::Hearts.index()], Some(HandSuitClass::Trump));
        assert_eq!(c[Suit::Clubs.index()], None);

        let c = classify_hand_suits(&cards("AC KS 2H"), Suit::Diamonds);
        assert_eq!(c[Suit::Clubs.index()], Some(HandSuitClass::HighestSingleton));
        assert_eq!(c[Suit::Spades.index()], Some(HandSuitClass::SecondSingleton));
        assert_eq!(c[Suit::Hearts.index()], Some(HandSuitClass::ThirdSingleton));

        let c = classify_hand_suits(&cards("KS KC 2H"), Suit::Diamonds);
        assert_eq!(c[Suit::Spades.index()], Some(HandSuitClass::HighestSingleton));
        assert_eq!(c[Suit::Clubs.index()], Some(HandSuitClass::SecondSingleton));
        assert_eq!(c[Suit::Hearts.index()], Some(HandSuitClass::ThirdSingleton));
    }

    #[test]
    fn hand_encoding_example() {
        let bits = encode_hand(&cards("AD 5D KH"), Suit::Hearts);
        assert_eq!(bits.len(), 21);
        // K of trumps leads: class 000, ordinal 7 = 0111
        assert_eq!(&bits[..7], &[0, 0, 0, 0, 1, 1, 1]);
        // then the diamonds pair, highest first: class 001, A = 1001, 5 = 0011
        assert_eq!(&bits[7..14], &[0, 0, 1, 1, 0, 0, 1]);
        assert_eq!(&bits[14..21], &[0, 0, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn hand_encoding_ignores_card_order() {
        let h = cards("QS 7C 2S");
        let base = encode_hand(&h, Suit::Hearts);
        for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            let perm: Vec<Card> = p.iter().map(|&i| h[i]).collect();
            assert_eq!(encode_hand(&perm, Suit::Hearts), base);
        }
    }

    #[test]
    fn short_hand_marks_empty_slots() {
        let bits = encode_hand(&cards("3C"), Suit::Hearts);
        assert_eq!(&bits[7..14], &[1, 1, 1, 0, 0, 0, 0]);
        assert_eq!(&bits[14..21], &[1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn played_card_classes() {
        let hand = cards("KH 3C 4D");
        let (s, v) = classify_played_card("QS".parse().unwrap(), &hand, Suit::Diamonds);
        assert_eq!((s, v), (PlayedSuitClass::Void, PlayedValueClass::VoidMember));

        let (_, v) = classify_played_card("AD".parse().unwrap(), &hand, Suit::Diamonds);
        assert_eq!(v, PlayedValueClass::AceOfTrumps);

        let hand = cards("KH 3C 4S");
        let (s, v) = classify_played_card("2H".parse().unwrap(), &hand, Suit::Diamonds);
        assert_eq!(s, PlayedSuitClass::Held(HandSuitClass::HighestSingleton));
        assert_eq!(v, PlayedValueClass::LowerThanAny);

        let hand = cards("KH 5H 2H");
        let class = |c: &str| classify_played_card(c.parse().unwrap(), &hand, Suit::Diamonds).1;
        assert_eq!(class("AH"), PlayedValueClass::HigherThanAll);
        assert_eq!(class("QH"), PlayedValueClass::HigherThanSecond);
        assert_eq!(class("3H"), PlayedValueClass::HigherThanThird);
    }

    #[test]
    fn ace_of_trumps_while_void_in_trumps() {
        let hand = cards("KH 3C 4S");
        let (s, v) = classify_played_card("AD".parse().unwrap(), &hand, Suit::Diamonds);
        assert_eq!(s, PlayedSuitClass::Void);
        assert_eq!(v, PlayedValueClass::AceOfTrumps);
    }

    fn first_view() -> AgentView {
        AgentView {
            hand: cards("KH 3C 4S"),
            trump: Suit::Diamonds,
            played: vec![],
            opponents: [Status::Undecided; 3],
            trick_winners: vec![],
        }
    }

    #[test]
    fn first_caller_view_is_quiet() {
        let obs = encode_observation(&first_view());
        assert_eq!(obs.len(), 81);
        assert!(obs.bits()[PLAYED_OFFSET..OBS_LEN].iter().all(|&b| b == 0));
    }

    #[test]
    fn trick_winner_field() {
        let mut v = first_view();
        v.hand.pop();
        v.played = cards("2H 5H 6H 7H");
        v.opponents = [Status::Knocked; 3];
        v.trick_winners = vec![1];
        let obs = encode_observation(&v);
        assert_eq!(&obs.bits()[WINNER_OFFSET..WINNER_OFFSET + 3], &[0, 1, 0]);
        assert_eq!(obs.field(WINNER_OFFSET + 3, 3), 0);
        assert_eq!(obs.field(STATUS_OFFSET, 2), Status::Knocked as u8);
    }

    #[test]
    #[should_panic(expected = "played cards")]
    fn too_many_played_cards() {
        let mut v = first_view();
        v.played = build_played(9);
        encode_observation(&v);
    }

    fn build_played(n: usize) -> Vec<Card> {
        (0..n).map(|i| Card::from_index(i + 10)).collect()
    }

    #[test]
    fn layout_is_disjoint_and_exhaustive() {
        let mut covered = [0u8; OBS_LEN];
        for f in layout() {
            for b in &mut covered[f.offset..f.offset + f.width] {
                *b += 1;
            }
        }
        assert!(covered.iter().all(|&c| c == 1));
        assert_eq!(OBS_LEN, 81);
        assert!(layout_table().contains("trick2_winner"));
    }
}
