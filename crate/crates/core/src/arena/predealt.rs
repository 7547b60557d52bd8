use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::cards::{parse_cards, Card, Hand};
use crate::rules::{deal, SEATS};
use crate::Error;

/// A fixed deal: four hands (clockwise from the dealer's left, dealer
/// last) and the trump card.
///
/// Text form is five lines: four lines of three card tokens, then the trump
/// card. Blank lines and lines starting with `#` are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredealtSpec {
    pub hands: [Hand; SEATS],
    pub trump_card: Card,
}

impl PredealtSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let mut cards: Vec<Card> = self.hands.iter().flat_map(|h| *h.cards()).collect();
        cards.push(self.trump_card);
        cards.sort();
        cards.dedup();
        if cards.len() != 13 {
            return Err(Error::Input("predealt hands and trump must be 13 distinct cards".into()));
        }
        Ok(())
    }

    /// A uniformly random deal.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let d = deal(rng);
        PredealtSpec {
            hands: d.hands,
            trump_card: d.trump_card,
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Input(format!("cannot read predealt file {}: {e}", path.display()))
        })?;
        text.parse()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for h in &self.hands {
            out.push_str(&format!("{h}\n"));
        }
        out.push_str(&format!("{}\n", self.trump_card));
        out
    }
}

impl FromStr for PredealtSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lines: Vec<&str> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if lines.len() != 5 {
            return Err(Error::Parse(format!(
                "predealt file needs 5 lines (4 hands + trump), found {}",
                lines.len()
            )));
        }
        let mut hands = Vec::with_capacity(SEATS);
        for line in &lines[..4] {
            let cards = parse_cards(line)?;
            let arr: [Card; 3] = cards
                .try_into()
                .map_err(|_| Error::Parse(format!("hand line needs 3 cards: {line:?}")))?;
            hands.push(Hand::new(arr)?);
        }
        let trump = parse_cards(lines[4])?;
        let trump_card = match trump[..] {
            [c] => c,
            _ => return Err(Error::Parse(format!("trump line needs 1 card: {:?}", lines[4]))),
        };
        let spec = PredealtSpec {
            hands: hands.try_into().expect("four hands"),
            trump_card,
        };
        spec.validate()?;
        Ok(spec)
    }
}
