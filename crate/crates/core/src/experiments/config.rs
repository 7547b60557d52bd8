use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::series::Smoothing;
use crate::agent::AgentParams;
use crate::scalar::Scalar;
use crate::Error;

/// The seeded experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Learn,
    Coward,
    Tune,
    Mas,
    Adapt,
    Solve,
    Bluff,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Learn,
        Experiment::Coward,
        Experiment::Tune,
        Experiment::Mas,
        Experiment::Adapt,
        Experiment::Solve,
        Experiment::Bluff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Learn => "learn",
            Experiment::Coward => "coward",
            Experiment::Tune => "tune",
            Experiment::Mas => "mas",
            Experiment::Adapt => "adapt",
            Experiment::Solve => "solve",
            Experiment::Bluff => "bluff",
        }
    }

    /// Hands per session, or repeats of the fixed deal.
    pub fn default_hands(self) -> usize {
        match self {
            Experiment::Learn => 20_000,
            Experiment::Coward => 2_000,
            Experiment::Tune => 40_000,
            Experiment::Mas => 10_000,
            Experiment::Adapt | Experiment::Solve | Experiment::Bluff => 200,
        }
    }

    /// Smoothing block for learn/coward/tune, the final-hands window for
    /// mas, the equilibrium window for solve.
    pub fn default_window(self) -> usize {
        match self {
            Experiment::Learn => 40,
            Experiment::Coward => 5,
            Experiment::Tune => 30,
            Experiment::Mas => 200,
            Experiment::Adapt => 1,
            Experiment::Solve => crate::arena::DEFAULT_EQUILIBRIUM_WINDOW,
            Experiment::Bluff => 1,
        }
    }

    pub fn default_courage(self) -> u64 {
        match self {
            Experiment::Coward => 0,
            _ => 200,
        }
    }

    pub fn uses_predealt(self) -> bool {
        matches!(self, Experiment::Adapt | Experiment::Solve | Experiment::Bluff)
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown experiment {s:?}")))
    }
}

/// Learning rates of one TD seat.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub alpha: f64,
    pub lambda: f64,
    pub epsilon: f64,
}

impl Rates {
    pub const fn new(alpha: f64, lambda: f64, epsilon: f64) -> Rates {
        Rates { alpha, lambda, epsilon }
    }
}

/// Four combinations played against each other by `tune`.
pub const DEFAULT_GRID: [Rates; 4] = [
    Rates::new(0.1, 0.1, 0.01),
    Rates::new(0.5, 0.1, 0.01),
    Rates::new(0.1, 0.7, 0.01),
    Rates::new(0.1, 0.1, 0.1),
];

/// Self-play hands given to the four agents before a predealt experiment.
pub const DEFAULT_WARMUP: usize = 20_000;

/// Settings that may come from a config file or the command line. Unset
/// fields fall back to the experiment defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub hands: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub courage: Option<u64>,
    pub window: Option<usize>,
    pub predealt: Option<PathBuf>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
    pub fold_update: Option<bool>,
    pub smoothing: Option<Smoothing>,
    pub warmup: Option<usize>,
    pub grid: Option<Vec<Rates>>,
}

pub fn parse_switch(s: &str) -> Result<bool, Error> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(Error::Input(format!("expected on|off, got {s:?}"))),
    }
}

/// `alpha:lambda:epsilon` combinations separated by commas.
pub fn parse_grid(s: &str) -> Result<Vec<Rates>, Error> {
    s.split(',')
        .map(|item| {
            let parts: Vec<f64> = item
                .trim()
                .split(':')
                .map(|v| v.trim().parse().map_err(|_| Error::Input(format!("bad grid value {v:?}"))))
                .collect::<Result<_, _>>()?;
            match parts[..] {
                [a, l, e] => Ok(Rates::new(a, l, e)),
                _ => Err(Error::Input(format!("grid entry needs alpha:lambda:epsilon, got {item:?}"))),
            }
        })
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, Error> {
    v.parse()
        .map_err(|_| Error::Input(format!("bad value for {key}: {v:?}")))
}

impl Overrides {
    /// Set one key. Keys are the long CLI flag names without dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let v = value.trim();
        match key {
            "hands" => self.hands = Some(parse_num(key, v)?),
            "seed" => self.seed = Some(parse_num(key, v)?),
            "alpha" => self.alpha = Some(parse_num(key, v)?),
            "lambda" => self.lambda = Some(parse_num(key, v)?),
            "epsilon" => self.epsilon = Some(parse_num(key, v)?),
            "courage" => self.courage = Some(parse_num(key, v)?),
            "window" => self.window = Some(parse_num(key, v)?),
            "predealt" => self.predealt = Some(PathBuf::from(v)),
            "k" => self.k = Some(parse_num(key, v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "fold-update" | "fold_update" => self.fold_update = Some(parse_switch(v)?),
            "smoothing" => self.smoothing = Some(v.parse()?),
            "warmup" => self.warmup = Some(parse_num(key, v)?),
            "grid" => self.grid = Some(parse_grid(v)?),
            _ => return Err(Error::Input(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// `key = value` lines; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Overrides, Error> {
        let mut o = Overrides::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("config line {}: expected key=value", n + 1)))?;
            o.set(key.trim(), value)?;
        }
        Ok(o)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Overrides, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file(&text)
    }

    /// Fields set in `top` win.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            hands: top.hands.or(self.hands),
            seed: top.seed.or(self.seed),
            alpha: top.alpha.or(self.alpha),
            lambda: top.lambda.or(self.lambda),
            epsilon: top.epsilon.or(self.epsilon),
            courage: top.courage.or(self.courage),
            window: top.window.or(self.window),
            predealt: top.predealt.or(self.predealt),
            k: top.k.or(self.k),
            out: top.out.or(self.out),
            fold_update: top.fold_update.or(self.fold_update),
            smoothing: top.smoothing.or(self.smoothing),
            warmup: top.warmup.or(self.warmup),
            grid: top.grid.or(self.grid),
        }
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_hands: usize,
    pub seed: u64,
    /// Rates of every TD seat except in `tune`, which uses `grid`.
    pub rates: Rates,
    pub grid: Vec<Rates>,
    pub courage: u64,
    pub fold_update: bool,
    pub window: usize,
    pub smoothing: Smoothing,
    pub out: Option<PathBuf>,
    pub predealt: Option<PathBuf>,
    pub k: usize,
    pub warmup: usize,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            experiment,
            n_hands: experiment.default_hands(),
            seed: 0,
            rates: Rates::new(0.1, 0.1, 0.01),
            grid: DEFAULT_GRID.to_vec(),
            courage: experiment.default_courage(),
            fold_update: true,
            window: experiment.default_window(),
            smoothing: Smoothing::Block,
            out: None,
            predealt: None,
            k: crate::arena::DEFAULT_BLUFF_WINDOW,
            warmup: DEFAULT_WARMUP,
        }
    }

    pub fn resolve(experiment: Experiment, o: Overrides) -> Result<ExperimentConfig, Error> {
        let mut c = Self::defaults(experiment);
        if o.predealt.is_some() && !experiment.uses_predealt() {
            return Err(Error::Input(format!(
                "{} does not take a predealt file",
                experiment.name()
            )));
        }
        if o.grid.is_some() && experiment != Experiment::Tune {
            return Err(Error::Input(format!("{} does not take a grid", experiment.name())));
        }
        if experiment == Experiment::Tune && (o.alpha.is_some() || o.lambda.is_some() || o.epsilon.is_some()) {
            return Err(Error::Input("tune takes its rates from the grid".into()));
        }
        c.n_hands = o.hands.unwrap_or(c.n_hands);
        c.seed = o.seed.unwrap_or(c.seed);
        c.rates = Rates::new(
            o.alpha.unwrap_or(c.rates.alpha),
            o.lambda.unwrap_or(c.rates.lambda),
            o.epsilon.unwrap_or(c.rates.epsilon),
        );
        c.grid = o.grid.unwrap_or(c.grid);
        c.courage = o.courage.unwrap_or(c.courage);
        c.fold_update = o.fold_update.unwrap_or(c.fold_update);
        c.window = o.window.unwrap_or(c.window);
        c.smoothing = o.smoothing.unwrap_or(c.smoothing);
        c.out = o.out;
        c.predealt = o.predealt;
        c.k = o.k.unwrap_or(c.k);
        c.warmup = o.warmup.unwrap_or(c.warmup);
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.window == 0 {
            return Err(Error::Input("window must be at least 1".into()));
        }
        if self.n_hands < self.window {
            return Err(Error::Input(format!(
                "hands ({}) must be at least the window ({})",
                self.n_hands, self.window
            )));
        }
        if self.experiment == Experiment::Solve && self.window < 2 {
            return Err(Error::Input("equilibrium window must be at least 2".into()));
        }
        if self.experiment == Experiment::Tune && self.grid.len() != 4 {
            return Err(Error::Input(format!(
                "tune needs exactly 4 grid entries, got {}",
                self.grid.len()
            )));
        }
        if self.experiment.uses_predealt() && self.predealt.is_none() {
            return Err(Error::Input(format!(
                "{} needs a predealt file (--predealt PATH)",
                self.experiment.name()
            )));
        }
        for r in std::iter::once(&self.rates).chain(&self.grid) {
            self.params_for::<f64>(*r).validate()?;
        }
        Ok(())
    }

    /// TD parameters for a seat with the given rates.
    pub fn params_for<S: Scalar>(&self, r: Rates) -> AgentParams<S> {
        AgentParams {
            courage_hands: self.courage,
            fold_update: self.fold_update,
            ..AgentParams::with_rates(r.alpha, r.lambda, r.epsilon)
        }
    }

    pub fn params<S: Scalar>(&self) -> AgentParams<S> {
        self.params_for(self.rates)
    }

    /// The config as a key=value file that [`Overrides::parse_file`]
    /// reads back to the same settings.
    pub fn to_config_text(&self) -> String {
        let on = |b: bool| if b { "on" } else { "off" };
        let mut lines = vec![
            format!("# {}", self.experiment.name()),
            format!("hands = {}", self.n_hands),
            format!("seed = {}", self.seed),
        ];
        if self.experiment == Experiment::Tune {
            let grid: Vec<String> = self
                .grid
                .iter()
                .map(|r| format!("{}:{}:{}", r.alpha, r.lambda, r.epsilon))
                .collect();
            lines.push(format!("grid = {}", grid.join(",")));
        } else {
            lines.push(format!("alpha = {}", self.rates.alpha));
            lines.push(format!("lambda = {}", self.rates.lambda));
            lines.push(format!("epsilon = {}", self.rates.epsilon));
        }
        lines.push(format!("courage = {}", self.courage));
        lines.push(format!("fold-update = {}", on(self.fold_update)));
        lines.push(format!("window = {}", self.window));
        lines.push(format!(
            "smoothing = {}",
            match self.smoothing {
                Smoothing::Block => "block",
                Smoothing::Sliding => "sliding",
            }
        ));
        lines.push(format!("k = {}", self.k));
        lines.push(format!("warmup = {}", self.warmup));
        if let Some(p) = &self.predealt {
            lines.push(format!("predealt = {}", p.display()));
        }
        if let Some(p) = &self.out {
            lines.push(format!("out = {}", p.display()));
        }
        lines.join("\n") + "\n"
    }
}
