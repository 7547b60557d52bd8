//! The 40-card Lerpa deck: four suits, ten ranks (no 8, 9 or 10).

use std::fmt;
use std::str::FromStr;

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Clubs = 0,
    Diamonds = 1,
    Hearts = 2,
    Spades = 3,
}

impl Suit {
    pub const ALL: [Suit; 4] = [Suit::Clubs, Suit::Diamonds, Suit::Hearts, Suit::Spades];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Suit {
        Suit::ALL[i]
    }

    pub fn letter(self) -> char {
        match self {
            Suit::Clubs => 'C',
            Suit::Diamonds => 'D',
            Suit::Hearts => 'H',
            Suit::Spades => 'S',
        }
    }

    /// Priority used to break ties between equal-ranked singletons:
    /// spades > hearts > diamonds > clubs.
    #[inline]
    pub fn tie_break_priority(self) -> u8 {
        match self {
            Suit::Spades => 3,
            Suit::Hearts => 2,
            Suit::Diamonds => 1,
            Suit::Clubs => 0,
        }
    }
}

/// Card ranks, declared in playing-strength order. The discriminant is the
/// rank ordinal: 2 is lowest (0), the 7 sits between king and ace (8).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Two = 0,
    Three = 1,
    Four = 2,
    Five = 3,
    Six = 4,
    Jack = 5,
    Queen = 6,
    King = 7,
    Seven = 8,
    Ace = 9,
}

impl Rank {
    pub const ALL: [Rank; 10] = [
        Rank::Two,
        Rank::Three,
        Rank::Four,
        Rank::Five,
        Rank::Six,
        Rank::Jack,
        Rank::Queen,
        Rank::King,
        Rank::Seven,
        Rank::Ace,
    ];

    #[inline]
    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(o: u8) -> Rank {
        Rank::ALL[o as usize]
    }

    pub fn symbol(self) -> char {
        match self {
            Rank::Two => '2',
            Rank::Three => '3',
            Rank::Four => '4',
            Rank::Five => '5',
            Rank::Six => '6',
            Rank::Jack => 'J',
            Rank::Queen => 'Q',
            Rank::King => 'K',
            Rank::Seven => '7',
            Rank::Ace => 'A',
        }
    }
}

/// A playing card. Ordering is the canonical deck order: suit first
/// (clubs, diamonds, hearts, spades), then rank ordinal ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub suit: Suit,
    pub rank: Rank,
}

impl Card {
    pub const fn new(rank: Rank, suit: Suit) -> Card {
        Card { suit, rank }
    }

    /// Position in the canonical deck, 0..40.
    #[inline]
    pub fn index(self) -> usize {
        self.suit.index() * 10 + self.rank as usize
    }

    pub fn from_index(i: usize) -> Card {
        assert!(i < 40, "card index out of range: {i}");
        Card::new(Rank::ALL[i % 10], Suit::ALL[i / 10])
    }

    #[inline]
    pub fn ordinal(self) -> u8 {
        self.rank.ordinal()
    }

    #[inline]
    pub fn is_ace_of(self, trump: Suit) -> bool {
        self.suit == trump && self.rank == Rank::Ace
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rank.symbol(), self.suit.letter())
    }
}

impl FromStr for Card {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("invalid card token {s:?}"));
        let mut chars = s.chars();
        let (r, su) = match (chars.next(), chars.next(), chars.next()) {
            (Some(r), Some(su), None) => (r, su),
            _ => return Err(bad()),
        };
        let rank = match r.to_ascii_uppercase() {
            '2' => Rank::Two,
            '3' => Rank::Three,
            '4' => Rank::Four,
            '5' => Rank::Five,
            '6' => Rank::Six,
            '7' => Rank::Seven,
            'J' => Rank::Jack,
            'Q' => Rank::Queen,
            'K' => Rank::King,
            'A' => Rank::Ace,
            _ => return Err(bad()),
        };
        let suit = match su.to_ascii_uppercase() {
            'C' => Suit::Clubs,
            'D' => Suit::Diamonds,
            'H' => Suit::Hearts,
            'S' => Suit::Spades,
            _ => return Err(bad()),
        };
        Ok(Card::new(rank, suit))
    }
}

/// Parse a whitespace separated list of card tokens.
pub fn parse_cards(s: &str) -> Result<Vec<Card>, Error> {
    s.split_whitespace().map(str::parse).collect()
}

/// Exactly three distinct cards, as dealt to one seat.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Hand([Card; 3]);

impl Hand {
    pub fn new(cards: [Card; 3]) -> Result<Hand, Error> {
        if cards[0] == cards[1] || cards[0] == cards[2] || cards[1] == cards[2] {
            return Err(Error::Input(format!(
                "hand has duplicate cards: {} {} {}",
                cards[0], cards[1], cards[2]
            )));
        }
        Ok(Hand(cards))
    }

    pub fn cards(&self) -> &[Card; 3] {
        &self.0
    }

    pub fn contains(&self, card: Card) -> bool {
        self.0.contains(&card)
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.0[0], self.0[1], self.0[2])
    }
}

/// The 40 legal cards in canonical order (suit-major, rank ordinal ascending).
pub fn build_deck() -> Vec<Card> {
    (0..40).map(Card::from_index).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deck_has_forty_cards_ten_per_suit() {
        let deck = build_deck();
        assert_eq!(deck.len(), 40);
        for suit in Suit::ALL {
            assert_eq!(deck.iter().filter(|c| c.suit == suit).count(), 10);
        }
        let mut sorted = deck.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 40);
        assert_eq!(sorted, deck);
    }

    #[test]
    fn deck_membership() {
        let deck = build_deck();
        assert!(deck.contains(&"AD".parse().unwrap()));
        assert!(deck.contains(&"7C".parse().unwrap()));
        // no 8, 9 or 10 can even be named
        assert!("9H".parse::<Card>().is_err());
        assert!("8S".parse::<Card>().is_err());
        assert!("TD".parse::<Card>().is_err());
    }

    #[test]
    fn rank_order() {
        let order = "2 3 4 5 6 J Q K 7 A";
        let ords: Vec<u8> = order
            .split(' ')
            .map(|r| format!("{r}C").parse::<Card>().unwrap().ordinal())
            .collect();
        assert_eq!(ords, (0..10).collect::<Vec<u8>>());
        assert!(Rank::Seven > Rank::King && Rank::Seven < Rank::Ace);
    }

    #[test]
    fn text_roundtrip() {
        for c in build_deck() {
            assert_eq!(c.to_string().parse::<Card>().unwrap(), c);
            assert_eq!(Card::from_index(c.index()), c);
        }
        assert_eq!("7h".parse::<Card>().unwrap().to_string(), "7H");
        assert!("AD ".parse::<Card>().is_err());
        assert!("A".parse::<Card>().is_err());
    }

    #[test]
    fn hand_rejects_duplicates() {
        let c: Card = "QS".parse().unwrap();
        let d: Card = "2C".parse().unwrap();
        assert!(Hand::new([c, d, c]).is_err());
        assert!(Hand::new([c, d, "AH".parse().unwrap()]).is_ok());
    }
}
