//! Detectors run over session logs: settled play on a fixed deal, and
//! bluffs that keep another seat out of the hand.

use super::record::SessionLog;
use crate::rules::{Seat, SEATS};
use crate::Error;

pub const DEFAULT_EQUILIBRIUM_WINDOW: usize = 30;
pub const DEFAULT_BLUFF_WINDOW: usize = 5;

/// First record index `i` such that every record in `[i, i + window)` has
/// the same knock decisions, card plays and chip deltas.
pub fn detect_equilibrium(log: &SessionLog, window: usize) -> Result<Option<usize>, Error> {
    if window < 2 {
        return Err(Error::Input(format!("equilibrium window must be at least 2, got {window}")));
    }
    if window > log.len() {
        return Err(Error::Input(format!(
            "equilibrium window {window} exceeds log length {}",
            log.len()
        )));
    }
    let mut start = 0;
    for i in 1..log.len() {
        if !log.records[i].same_outcome(&log.records[start]) {
            start = i;
        }
        if i + 1 - start >= window {
            return Ok(Some(start));
        }
    }
    Ok(None)
}

/// One seat's knocking kept another seat folded until the first seat quit,
/// after which the second seat came in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BluffEvent {
    pub bluffer: Seat,
    pub victim: Seat,
    /// First record of the stretch in which the bluffer knocked while the
    /// victim folded.
    pub epoch_start: usize,
    /// Record at which the bluffer switched to folding.
    pub switch_index: usize,
    /// Record at which the victim first knocked again.
    pub reentry_index: usize,
}

/// Find bluff events in a log of repeated play of one fixed deal.
///
/// A pair (bluffer, victim) qualifies at record `i` when the bluffer's
/// standing decision switches from knock to fold at `i`, the victim's
/// standing decision just before `i` was fold, and the victim knocks at some
/// record in `[i, i + k]`. Standing decisions ignore exploratory and forced
/// choices, so those never start or end a stretch.
pub fn detect_bluffs(log: &SessionLog, k: usize) -> Result<Vec<BluffEvent>, Error> {
    if !log.predealt {
        return Err(Error::Input("bluff detection needs a predealt session log".into()));
    }
    let n = log.len();
    // deliberate[s][i]: the seat's own choice at record i, if it made one
    let deliberate: Vec<Vec<Option<bool>>> = (0..SEATS)
        .map(|s| {
            log.records
                .iter()
                .map(|r| {
                    let st = r.stage1[s];
                    (!st.exploratory && !st.forced).then_some(st.knock)
                })
                .collect()
        })
        .collect();
    // standing[s][i]: latest deliberate choice at or before i
    let standing: Vec<Vec<Option<bool>>> = deliberate
        .iter()
        .map(|d| {
            let mut cur = None;
            d.iter()
                .map(|&x| {
                    if x.is_some() {
                        cur = x;
                    }
                    cur
                })
                .collect()
        })
        .collect();

    let mut events = Vec::new();
    for i in 1..n {
        for b in 0..SEATS {
            if deliberate[b][i] != Some(false) || standing[b][i - 1] != Some(true) {
                continue;
            }
            for v in (0..SEATS).filter(|&v| v != b) {
                if standing[v][i - 1] != Some(false) {
                    continue;
                }
                let last = (i + k).min(n - 1);
                let Some(reentry) = (i..=last).find(|&r| deliberate[v][r] == Some(true)) else {
                    continue;
                };
                let mut epoch_start = i - 1;
                while epoch_start > 0
                    && standing[b][epoch_start - 1] == Some(true)
                    && standing[v][epoch_start - 1] == Some(false)
                {
                    epoch_start -= 1;
                }
                events.push(BluffEvent {
                    bluffer: Seat::new(b),
                    victim: Seat::new(v),
                    epoch_start,
                    switch_index: i,
                    reentry_index: reentry,
                });
            }
        }
    }
    Ok(events)
}
