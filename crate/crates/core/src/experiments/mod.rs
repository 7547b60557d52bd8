//! Seeded experiments over the table, with CSV output.
//!
//! Every runner is a pure function of its [`ExperimentConfig`]: the same
//! config gives byte-identical CSV.

pub mod config;
pub mod selftest;
pub mod series;

pub use config::{Experiment, ExperimentConfig, Overrides, Rates, DEFAULT_GRID, DEFAULT_WARMUP};
pub use series::{moving_average, series_csv, sliding_average, smooth, Series, Smoothing};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::arena::{
    detect_bluffs, detect_equilibrium, BluffEvent, PredealtSpec, SeatBinding, SeatedAgent, SessionLog,
    Table, TableConfig,
};
use crate::rules::{Seat, SEATS};
use crate::scalar::Scalar;
use crate::Error;

/// Dealer of every table the experiments build.
pub const DEALER_START: usize = 3;

/// First random stream used for predealt exploration; streams below it
/// belong to the deal and the seats' initial draws.
const PREDEALT_STREAM: u64 = 8;

/// One named CSV document produced by an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub csv: String,
}

/// Everything an experiment emits: the first artifact is the primary
/// output, `summary` is human-readable.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn one_td_table<S: Scalar>(cfg: &ExperimentConfig) -> Result<Table<S>, Error> {
    let mut seats = vec![SeatBinding::td("AI1", cfg.params())];
    seats.extend((1..SEATS).map(|i| SeatBinding::random(format!("R{i}"))));
    Table::new(&TableConfig {
        seats,
        seed: cfg.seed,
        dealer_start: Seat::new(DEALER_START),
    })
}

/// Per-seat chips over the non-void hands, smoothed.
fn chip_series(log: &SessionLog, cfg: &ExperimentConfig) -> Result<Vec<Series>, Error> {
    (0..SEATS)
        .map(|s| smooth(&log.seat_deltas(Seat::new(s)), cfg.window, cfg.smoothing, &log.ids[s]))
        .collect()
}

pub struct LearnOutcome {
    pub log: SessionLog,
    pub series: Vec<Series>,
}

impl LearnOutcome {
    /// Mean chips per non-void hand of each seat over the final `n` hands.
    pub fn final_means(&self, n: usize) -> [f64; SEATS] {
        std::array::from_fn(|s| {
            let d = self.log.seat_deltas(Seat::new(s));
            mean(&d[d.len().saturating_sub(n)..])
        })
    }
}

/// One TD agent against three random agents.
pub fn run_learn<S: Scalar>(cfg: &ExperimentConfig) -> Result<LearnOutcome, Error> {
    let mut table = one_td_table::<S>(cfg)?;
    let log = table.run_session(cfg.n_hands);
    let series = chip_series(&log, cfg)?;
    Ok(LearnOutcome { log, series })
}

pub struct CowardOutcome {
    pub log: SessionLog,
    /// 1 when the TD seat folded, per hand.
    pub folds: Vec<f64>,
    pub series: Series,
}

impl CowardOutcome {
    /// Fold rate over hands `[from, to)`.
    pub fn fold_rate(&self, from: usize, to: usize) -> f64 {
        mean(&self.folds[from..to.min(self.folds.len())])
    }
}

/// One TD agent without forced early play against three random agents;
/// reports how often it folds.
pub fn run_coward<S: Scalar>(cfg: &ExperimentConfig) -> Result<CowardOutcome, Error> {
    let mut table = one_td_table::<S>(cfg)?;
    let log = table.run_session(cfg.n_hands);
    let folds: Vec<f64> = log
        .non_void()
        .map(|r| if r.stage1[0].knock { 0.0 } else { 1.0 })
        .collect();
    let series = smooth(&folds, cfg.window, cfg.smoothing, "fold_rate")?;
    Ok(CowardOutcome { log, folds, series })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankRow {
    pub rank: usize,
    pub seat: usize,
    pub id: String,
    pub rates: Rates,
    pub chips: i64,
}

pub struct TuneOutcome {
    pub log: SessionLog,
    pub series: Vec<Series>,
    pub ranking: Vec<RankRow>,
    pub duplicate_rates: bool,
}

/// Four TD agents with different rates compete; ranked by final chips
/// (ties to the lower seat).
pub fn run_tune<S: Scalar>(cfg: &ExperimentConfig) -> Result<TuneOutcome, Error> {
    let mut duplicate_rates = false;
    for (i, a) in cfg.grid.iter().enumerate() {
        if cfg.grid[..i].contains(a) {
            duplicate_rates = true;
            log::warn!(
                "tune grid repeats alpha={} lambda={} epsilon={}",
                a.alpha,
                a.lambda,
                a.epsilon
            );
        }
    }
    let seats = cfg
        .grid
        .iter()
        .enumerate()
        .map(|(i, r)| SeatBinding::td(format!("AI{}", i + 1), cfg.params_for(*r)))
        .collect();
    let mut table = Table::<S>::new(&TableConfig {
        seats,
        seed: cfg.seed,
        dealer_start: Seat::new(DEALER_START),
    })?;
    let log = table.run_session(cfg.n_hands);
    let series = chip_series(&log, cfg)?;
    let totals = log.totals();
    let mut order: Vec<usize> = (0..SEATS).collect();
    order.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then(a.cmp(&b)));
    let ranking = order
        .into_iter()
        .enumerate()
        .map(|(rank, seat)| RankRow {
            rank: rank + 1,
            seat,
            id: log.ids[seat].clone(),
            rates: cfg.grid[seat],
            chips: totals[seat],
        })
        .collect();
    Ok(TuneOutcome {
        log,
        series,
        ranking,
        duplicate_rates,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasRow {
    /// `random` for the table with three random agents, `mutual` for four
    /// TD agents.
    pub setting: &'static str,
    pub agent: String,
    pub td: bool,
    /// Total chips over the final `window` non-void hands.
    pub final_return: f64,
}

pub struct MasOutcome {
    pub rows: Vec<MasRow>,
}

impl MasOutcome {
    pub fn against_random(&self) -> f64 {
        self.rows
            .iter()
            .find(|r| r.setting == "random" && r.td)
            .expect("TD row present")
            .final_return
    }

    pub fn mutual_mean(&self) -> f64 {
        mean(
            &self
                .rows
                .iter()
                .filter(|r| r.setting == "mutual")
                .map(|r| r.final_return)
                .collect::<Vec<_>>(),
        )
    }

    pub fn random_returns(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| !r.td).map(|r| r.final_return).collect()
    }
}

/// The same number of hands with one TD agent among random agents and with
/// four TD agents; returns over the final hands of each.
pub fn run_mas<S: Scalar>(cfg: &ExperimentConfig) -> Result<MasOutcome, Error> {
    let mutual_cfg = TableConfig {
        seats: (2..=5).map(|i| SeatBinding::td(format!("AI{i}"), cfg.params())).collect(),
        seed: cfg.seed,
        dealer_start: Seat::new(DEALER_START),
    };
    let (vs_random, mutual) = rayon::join(
        || one_td_table::<S>(cfg).map(|mut t| t.run_session(cfg.n_hands)),
        || Table::<S>::new(&mutual_cfg).map(|mut t| t.run_session(cfg.n_hands)),
    );
    let (vs_random, mutual) = (vs_random?, mutual?);
    let final_return = |log: &SessionLog, s: usize| {
        let d = log.seat_deltas(Seat::new(s));
        d[d.len().saturating_sub(cfg.window)..].iter().sum::<f64>()
    };
    let mut rows = Vec::with_capacity(8);
    // random agents first, then the lone TD agent, then the four TD agents
    for s in (1..SEATS).chain([0]) {
        rows.push(MasRow {
            setting: "random",
            agent: vs_random.ids[s].clone(),
            td: s == 0,
            final_return: final_return(&vs_random, s),
        });
    }
    for s in 0..SEATS {
        rows.push(MasRow {
            setting: "mutual",
            agent: mutual.ids[s].clone(),
            td: true,
            final_return: final_return(&mutual, s),
        });
    }
    Ok(MasOutcome { rows })
}

/// Four TD agents after `cfg.warmup` hands of free self-play (fresh agents
/// when it is zero).
pub fn warmed_agents<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<SeatedAgent<S>>, Error> {
    let mut table = Table::<S>::new(&TableConfig {
        seats: (1..=SEATS).map(|i| SeatBinding::td(format!("AI{i}"), cfg.params())).collect(),
        seed: cfg.seed,
        dealer_start: Seat::new(DEALER_START),
    })?;
    if cfg.warmup > 0 {
        table.run_session(cfg.warmup);
    }
    Ok(table.into_agents())
}

/// Replay one deal `repeats` times with copies of `agents`. Each TD copy
/// gets its own exploration stream derived from `seed`.
pub fn play_predealt<S: Scalar>(
    agents: &[SeatedAgent<S>],
    spec: &PredealtSpec,
    repeats: usize,
    seed: u64,
) -> Result<SessionLog, Error> {
    let mut agents = agents.to_vec();
    for (i, a) in agents.iter_mut().enumerate() {
        if let Some(td) = a.td_mut() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(PREDEALT_STREAM + i as u64);
            td.reseed(rng);
        }
    }
    let mut table = Table::with_agents(agents, seed, Seat::new(DEALER_START))?;
    table.run_predealt(spec, repeats)
}

pub struct SolveOutcome {
    pub log: SessionLog,
    pub equilibrium: Option<usize>,
}

pub fn solve_deal<S: Scalar>(
    agents: &[SeatedAgent<S>],
    spec: &PredealtSpec,
    repeats: usize,
    window: usize,
    seed: u64,
) -> Result<SolveOutcome, Error> {
    let log = play_predealt(agents, spec, repeats, seed)?;
    let equilibrium = detect_equilibrium(&log, window)?;
    Ok(SolveOutcome { log, equilibrium })
}

pub struct BluffOutcome {
    pub log: SessionLog,
    pub events: Vec<BluffEvent>,
}

pub fn bluff_deal<S: Scalar>(
    agents: &[SeatedAgent<S>],
    spec: &PredealtSpec,
    repeats: usize,
    k: usize,
    seed: u64,
) -> Result<BluffOutcome, Error> {
    let log = play_predealt(agents, spec, repeats, seed)?;
    let events = detect_bluffs(&log, k)?;
    Ok(BluffOutcome { log, events })
}

fn load_spec(cfg: &ExperimentConfig) -> Result<PredealtSpec, Error> {
    let path = cfg
        .predealt
        .as_ref()
        .ok_or_else(|| Error::Input(format!("{} needs a predealt file", cfg.experiment.name())))?;
    PredealtSpec::from_path(path)
}

/// Stage-one decision of every seat at every repeat of the deal.
pub fn run_adapt<S: Scalar>(cfg: &ExperimentConfig) -> Result<SessionLog, Error> {
    let spec = load_spec(cfg)?;
    let agents = warmed_agents::<S>(cfg)?;
    play_predealt(&agents, &spec, cfg.n_hands, cfg.seed)
}

pub fn run_solve<S: Scalar>(cfg: &ExperimentConfig) -> Result<SolveOutcome, Error> {
    let spec = load_spec(cfg)?;
    let agents = warmed_agents::<S>(cfg)?;
    solve_deal(&agents, &spec, cfg.n_hands, cfg.window, cfg.seed)
}

pub fn run_bluff<S: Scalar>(cfg: &ExperimentConfig) -> Result<BluffOutcome, Error> {
    let spec = load_spec(cfg)?;
    let agents = warmed_agents::<S>(cfg)?;
    bluff_deal(&agents, &spec, cfg.n_hands, cfg.k, cfg.seed)
}

fn ranking_csv(rows: &[RankRow]) -> Result<String, Error> {
    let mut out = vec![["rank", "seat", "agent_id", "alpha", "lambda", "epsilon", "chips"]
        .map(String::from)
        .to_vec()];
    for r in rows {
        out.push(vec![
            r.rank.to_string(),
            r.seat.to_string(),
            r.id.clone(),
            r.rates.alpha.to_string(),
            r.rates.lambda.to_string(),
            r.rates.epsilon.to_string(),
            r.chips.to_string(),
        ]);
    }
    csv_string(out)
}

fn mas_csv(rows: &[MasRow]) -> Result<String, Error> {
    let mut out = vec![["setting", "agent", "kind", "final_return"].map(String::from).to_vec()];
    for r in rows {
        out.push(vec![
            r.setting.to_string(),
            r.agent.clone(),
            if r.td { "td" } else { "random" }.to_string(),
            r.final_return.to_string(),
        ]);
    }
    csv_string(out)
}

/// `repeat,seat,agent_id,decision,exploratory,forced,delta,cumulative`
pub fn timeline_csv(log: &SessionLog) -> Result<String, Error> {
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    let mut out = vec![[
        "repeat", "seat", "agent_id", "decision", "exploratory", "forced", "delta", "cumulative",
    ]
    .map(String::from)
    .to_vec()];
    for (i, (r, cum)) in log.records.iter().zip(&log.cumulative).enumerate() {
        for s in 0..SEATS {
            let st = r.stage1[s];
            out.push(vec![
                i.to_string(),
                s.to_string(),
                log.ids[s].clone(),
                if st.knock { "K" } else { "F" }.to_string(),
                flag(st.exploratory),
                flag(st.forced),
                r.settlement.deltas[s].to_string(),
                cum[s].to_string(),
            ]);
        }
    }
    csv_string(out)
}

fn bluff_csv(log: &SessionLog, events: &[BluffEvent]) -> Result<String, Error> {
    let mut out = vec![[
        "bluffer", "bluffer_id", "victim", "victim_id", "epoch_start", "switch_index", "reentry_index",
    ]
    .map(String::from)
    .to_vec()];
    for e in events {
        out.push(vec![
            e.bluffer.index().to_string(),
            log.ids[e.bluffer.index()].clone(),
            e.victim.index().to_string(),
            log.ids[e.victim.index()].clone(),
            e.epoch_start.to_string(),
            e.switch_index.to_string(),
            e.reentry_index.to_string(),
        ]);
    }
    csv_string(out)
}

fn equilibrium_csv(window: usize, repeats: usize, at: Option<usize>) -> Result<String, Error> {
    csv_string(vec![
        ["window", "repeats", "equilibrium_index"].map(String::from).to_vec(),
        vec![
            window.to_string(),
            repeats.to_string(),
            at.map(|i| i.to_string()).unwrap_or_default(),
        ],
    ])
}

/// Run an experiment and render its CSV artifacts.
pub fn run<S: Scalar>(cfg: &ExperimentConfig) -> Result<Report, Error> {
    cfg.validate()?;
    let mut summary = Vec::new();
    let artifacts = match cfg.experiment {
        Experiment::Learn => {
            let o = run_learn::<S>(cfg)?;
            let quarter = o.log.seat_deltas(Seat::new(0)).len() / 4;
            for (s, m) in o.final_means(quarter).iter().enumerate() {
                summary.push(format!("{}: {m:.4} chips/hand over the final {quarter} hands", o.log.ids[s]));
            }
            vec![
                Artifact { name: "series", csv: series_csv(&o.series)? },
                Artifact { name: "log", csv: o.log.to_csv()? },
            ]
        }
        Experiment::Coward => {
            let o = run_coward::<S>(cfg)?;
            let half = o.folds.len() / 2;
            summary.push(format!(
                "fold rate {:.3} over the first half, {:.3} over the second",
                o.fold_rate(0, half),
                o.fold_rate(half, o.folds.len())
            ));
            vec![
                Artifact { name: "series", csv: series_csv(&[o.series])? },
                Artifact { name: "log", csv: o.log.to_csv()? },
            ]
        }
        Experiment::Tune => {
            let o = run_tune::<S>(cfg)?;
            if o.duplicate_rates {
                summary.push("warning: the grid repeats a rate combination".into());
            }
            for r in &o.ranking {
                summary.push(format!(
                    "#{} {} alpha={} lambda={} epsilon={}: {} chips",
                    r.rank, r.id, r.rates.alpha, r.rates.lambda, r.rates.epsilon, r.chips
                ));
            }
            vec![
                Artifact { name: "ranking", csv: ranking_csv(&o.ranking)? },
                Artifact { name: "series", csv: series_csv(&o.series)? },
            ]
        }
        Experiment::Mas => {
            let o = run_mas::<S>(cfg)?;
            summary.push(format!(
                "TD among random agents: {}; mean of mutually trained agents: {}",
                o.against_random(),
                o.mutual_mean()
            ));
            vec![Artifact { name: "returns", csv: mas_csv(&o.rows)? }]
        }
        Experiment::Adapt => {
            let log = run_adapt::<S>(cfg)?;
            summary.push(format!("{} repeats, {} void", log.len(), log.void_count()));
            vec![Artifact { name: "timeline", csv: timeline_csv(&log)? }]
        }
        Experiment::Solve => {
            let o = run_solve::<S>(cfg)?;
            summary.push(match o.equilibrium {
                Some(i) => format!("equilibrium from repeat {i} (window {})", cfg.window),
                None => format!("no equilibrium within {} repeats (window {})", cfg.n_hands, cfg.window),
            });
            vec![
                Artifact {
                    name: "equilibrium",
                    csv: equilibrium_csv(cfg.window, cfg.n_hands, o.equilibrium)?,
                },
                Artifact { name: "log", csv: o.log.to_csv()? },
            ]
        }
        Experiment::Bluff => {
            let o = run_bluff::<S>(cfg)?;
            summary.push(format!("{} bluff events in {} repeats", o.events.len(), cfg.n_hands));
            vec![
                Artifact { name: "events", csv: bluff_csv(&o.log, &o.events)? },
                Artifact { name: "log", csv: o.log.to_csv()? },
            ]
        }
    };
    Ok(Report { artifacts, summary })
}
