//! Learning and baseline agents.
//!
//! A [`TdAgent`] scores each option by the network's expected-chip
//! prediction for the situation the option leads to, acts ε-greedily, and
//! trains online with TD(λ): each evaluated decision in a hand is the target
//! for the previous one, and the real outcome is the target for the last.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cards::Card;
use crate::encoder::Observation;
use crate::neuro::{ForwardTrace, Mlp, OutcomeDistribution, Weights, OUTPUTS};
use crate::rules::Outcome;
use crate::scalar::Scalar;
use crate::Error;

/// Learning parameters of a TD agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentParams<S> {
    /// Learning rate.
    pub alpha: S,
    /// Trace decay.
    pub lambda: S,
    /// Exploration probability.
    pub epsilon: S,
    /// Number of initial hands in which the agent must knock.
    pub courage_hands: u64,
    /// Train towards the all-zero target after folding.
    pub fold_update: bool,
    /// Apply ε-exploration to the knock/fold decision as well as card play.
    pub explore_knock: bool,
    /// Clamp each output into [0, 1] before computing expected chips when
    /// acting. Learning always uses the raw outputs.
    pub clamp_outputs: bool,
    /// When false the weights are frozen.
    pub learning: bool,
}

impl<S: Scalar> Default for AgentParams<S> {
    fn default() -> Self {
        AgentParams {
            alpha: S::lit(0.1),
            lambda: S::lit(0.1),
            epsilon: S::lit(0.01),
            courage_hands: 200,
            fold_update: true,
            explore_knock: true,
            clamp_outputs: false,
            learning: true,
        }
    }
}

impl<S: Scalar> AgentParams<S> {
    pub fn with_rates(alpha: f64, lambda: f64, epsilon: f64) -> Self {
        AgentParams {
            alpha: S::lit(alpha),
            lambda: S::lit(lambda),
            epsilon: S::lit(epsilon),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let unit = |v: S| v >= S::zero() && v <= S::one();
        if !(self.alpha > S::zero() && self.alpha.is_finite()) {
            return Err(Error::Input(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !unit(self.lambda) {
            return Err(Error::Input(format!("lambda must lie in [0,1], got {}", self.lambda)));
        }
        if !unit(self.epsilon) {
            return Err(Error::Input(format!("epsilon must lie in [0,1], got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// One evaluated decision's contribution to the input-layer traces: for
/// output `k` it is `coef[k][j]` on every weight from an active input into
/// hidden unit `j`, and zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
struct InputTerm<S> {
    active: Vec<usize>,
    coef: [Vec<S>; OUTPUTS],
}

/// Per-output eligibility traces `e_k`, each shaped like the network
/// parameters.
///
/// Inputs are binary, so the input-layer gradient of a single evaluation is
/// a hidden-sized vector spread over the active inputs. That block is held
/// as a short list of such terms (one per decision in the hand); the
/// remaining blocks are stored densely. [`EligibilityTraces::output`]
/// expands one trace to full shape.
#[derive(Clone, Debug, PartialEq)]
pub struct EligibilityTraces<S> {
    input_dim: usize,
    hidden_dim: usize,
    terms: Vec<InputTerm<S>>,
    b1: [Vec<S>; OUTPUTS],
    /// Only row `k` of `w2` is non-zero in `e_k`.
    w2_row: [Vec<S>; OUTPUTS],
    /// Only entry `k` of `b2` is non-zero in `e_k`.
    b2_entry: [S; OUTPUTS],
}

impl<S: Scalar> EligibilityTraces<S> {
    pub fn zeros(mlp: &Mlp<S>) -> Self {
        let h = mlp.hidden_dim();
        EligibilityTraces {
            input_dim: mlp.input_dim(),
            hidden_dim: h,
            terms: Vec::new(),
            b1: std::array::from_fn(|_| vec![S::zero(); h]),
            w2_row: std::array::from_fn(|_| vec![S::zero(); h]),
            b2_entry: [S::zero(); OUTPUTS],
        }
    }

    pub fn reset(&mut self) {
        self.terms.clear();
        for k in 0..OUTPUTS {
            self.b1[k].iter_mut().for_each(|v| *v = S::zero());
            self.w2_row[k].iter_mut().for_each(|v| *v = S::zero());
        }
        self.b2_entry = [S::zero(); OUTPUTS];
    }

    /// `e_k <- lambda * e_k + d y_k / d w`, for the gradient at the
    /// activations in `trace` with hidden sensitivities `sens` (see
    /// [`Mlp::hidden_sensitivities`]).
    pub fn accumulate(&mut self, lambda: S, trace: &ForwardTrace<S>, sens: [Vec<S>; OUTPUTS]) {
        for term in &mut self.terms {
            for c in term.coef.iter_mut().flatten() {
                *c *= lambda;
            }
        }
        for k in 0..OUTPUTS {
            for (e, &g) in self.b1[k].iter_mut().zip(&sens[k]) {
                *e = lambda * *e + g;
            }
            for (e, &h) in self.w2_row[k].iter_mut().zip(&trace.hidden) {
                *e = lambda * *e + h;
            }
            self.b2_entry[k] = lambda * self.b2_entry[k] + S::one();
        }
        self.terms.push(InputTerm {
            active: trace.active_inputs(),
            coef: sens,
        });
    }

    /// `w += sum_k scale[k] * e_k`
    pub fn apply(&self, weights: &mut Weights<S>, scale: [S; OUTPUTS]) {
        let h = self.hidden_dim;
        for k in (0..OUTPUTS).filter(|&k| scale[k] != S::zero()) {
            let a = scale[k];
            for (w, &e) in weights.b1.iter_mut().zip(&self.b1[k]) {
                *w += a * e;
            }
            for (w, &e) in weights.w2[k * h..(k + 1) * h].iter_mut().zip(&self.w2_row[k]) {
                *w += a * e;
            }
            weights.b2[k] += a * self.b2_entry[k];
        }
        for term in &self.terms {
            for j in 0..h {
                let c = (0..OUTPUTS).fold(S::zero(), |acc, k| acc + scale[k] * term.coef[k][j]);
                if c == S::zero() {
                    continue;
                }
                let row = &mut weights.w1[j * self.input_dim..(j + 1) * self.input_dim];
                for &i in &term.active {
                    row[i] += c;
                }
            }
        }
    }

    /// The full trace of output `k`.
    pub fn output(&self, k: usize) -> Weights<S> {
        let (n_in, h) = (self.input_dim, self.hidden_dim);
        let mut e = Weights::zeros(n_in, h);
        e.b1.copy_from_slice(&self.b1[k]);
        e.w2[k * h..(k + 1) * h].copy_from_slice(&self.w2_row[k]);
        e.b2[k] = self.b2_entry[k];
        for term in &self.terms {
            for j in 0..h {
                for &i in &term.active {
                    e.w1[j * n_in + i] += term.coef[k][j];
                }
            }
        }
        e
    }

    pub fn per_output(&self) -> [Weights<S>; OUTPUTS] {
        std::array::from_fn(|k| self.output(k))
    }

    /// Number of decisions folded into the input-layer block.
    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.per_output()
            .iter()
            .all(|e| e.iter().all(|v| *v == S::zero()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Knock,
    Fold,
    Play(Card),
}

/// The decision points of a hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    KnockOrFold,
    FirstCard,
    SecondCard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision<S> {
    pub action: Action,
    /// The observation that was scored for the chosen action.
    pub chosen_afterstate: Option<Observation>,
    /// Network outputs for the chosen afterstate, when one was evaluated.
    pub prediction: Option<OutcomeDistribution<S>>,
    pub exploratory: bool,
    /// Courage-forced knock or a single legal card.
    pub forced: bool,
}

impl<S> Decision<S> {
    fn simple(action: Action, forced: bool) -> Self {
        Decision {
            action,
            chosen_afterstate: None,
            prediction: None,
            exploratory: false,
            forced,
        }
    }
}

/// Target vector for a terminal outcome over (P(+3), P(+2), P(+1), P(-3)).
pub fn outcome_target<S: Scalar>(outcome: Outcome) -> OutcomeDistribution<S> {
    let mut z = [S::zero(); OUTPUTS];
    match outcome {
        Outcome::Won(3) => z[0] = S::one(),
        Outcome::Won(2) => z[1] = S::one(),
        Outcome::Won(1) => z[2] = S::one(),
        Outcome::Won(t) => panic!("impossible trick count {t}"),
        Outcome::Lerpad => z[3] = S::one(),
        Outcome::Folded => {}
    }
    OutcomeDistribution(z)
}

/// A TD(λ) learner over the outcome network.
#[derive(Clone, Debug)]
pub struct TdAgent<S> {
    pub params: AgentParams<S>,
    pub mlp: Mlp<S>,
    traces: EligibilityTraces<S>,
    y_prev: Option<OutcomeDistribution<S>>,
    hands_played: u64,
    in_hand: bool,
    rng: ChaCha8Rng,
}

impl<S: Scalar> TdAgent<S> {
    pub fn new(params: AgentParams<S>, mlp: Mlp<S>, rng: ChaCha8Rng) -> Self {
        TdAgent {
            traces: EligibilityTraces::zeros(&mlp),
            params,
            mlp,
            y_prev: None,
            hands_played: 0,
            in_hand: false,
            rng,
        }
    }

    /// A fresh agent with the standard network, everything seeded from `seed`.
    pub fn fresh(params: AgentParams<S>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mlp = Mlp::standard(&mut rng);
        Self::new(params, mlp, rng)
    }

    /// Replace the exploration stream.
    pub fn reseed(&mut self, rng: ChaCha8Rng) {
        self.rng = rng;
    }

    pub fn hands_played(&self) -> u64 {
        self.hands_played
    }

    pub fn traces(&self) -> &EligibilityTraces<S> {
        &self.traces
    }

    pub fn previous_prediction(&self) -> Option<&OutcomeDistribution<S>> {
        self.y_prev.as_ref()
    }

    pub fn in_hand(&self) -> bool {
        self.in_hand
    }

    /// Expected chips the agent acts on for a set of outputs.
    pub fn value_of(&self, y: &OutcomeDistribution<S>) -> S {
        if self.params.clamp_outputs {
            y.clamped().scalar_prediction()
        } else {
            y.scalar_prediction()
        }
    }

    pub fn evaluate(&self, obs: &Observation) -> ForwardTrace<S> {
        self.mlp.forward(obs)
    }

    /// Start a hand: traces and the previous prediction are cleared.
    pub fn begin_hand(&mut self) {
        assert!(!self.in_hand, "begin_hand called during a hand");
        self.traces.reset();
        self.y_prev = None;
        self.in_hand = true;
    }

    fn explore(&mut self) -> bool {
        self.rng.gen::<f64>() < self.params.epsilon.as_f64()
    }

    /// Stage one. Folding is worth exactly zero chips; knocking is worth the
    /// prediction for `obs_stay`. Knock only on a strictly positive value.
    pub fn decide_knock(&mut self, obs_stay: &Observation) -> Decision<S> {
        assert!(self.in_hand, "decide_knock outside a hand");
        let trace = self.evaluate(obs_stay);
        let (action, forced, exploratory) = if self.hands_played < self.params.courage_hands {
            (Action::Knock, true, false)
        } else if self.params.explore_knock && self.explore() {
            let a = if self.rng.gen_bool(0.5) {
                Action::Knock
            } else {
                Action::Fold
            };
            (a, false, true)
        } else if self.value_of(&trace.output) > S::zero() {
            (Action::Knock, false, false)
        } else {
            (Action::Fold, false, false)
        };
        let prediction = trace.output;
        self.observe(&trace);
        Decision {
            action,
            chosen_afterstate: Some(*obs_stay),
            prediction: Some(prediction),
            exploratory,
            forced,
        }
    }

    /// Pick a card from `(card, afterstate)` candidates, all legal.
    /// Greedy ties go to the lowest card in canonical order.
    pub fn choose_card(&mut self, candidates: &[(Card, Observation)]) -> Decision<S> {
        assert!(self.in_hand, "choose_card outside a hand");
        assert!(!candidates.is_empty(), "choose_card needs at least one candidate");
        let traces: Vec<ForwardTrace<S>> =
            candidates.iter().map(|(_, o)| self.evaluate(o)).collect();
        let (idx, forced, exploratory) = if candidates.len() == 1 {
            (0, true, false)
        } else if self.explore() {
            (self.rng.gen_range(0..candidates.len()), false, true)
        } else {
            let mut best = 0;
            for i in 1..candidates.len() {
                let (vi, vb) = (self.value_of(&traces[i].output), self.value_of(&traces[best].output));
                if vi > vb || (vi == vb && candidates[i].0 < candidates[best].0) {
                    best = i;
                }
            }
            (best, false, false)
        };
        let trace = &traces[idx];
        self.observe(trace);
        Decision {
            action: Action::Play(candidates[idx].0),
            chosen_afterstate: Some(candidates[idx].1),
            prediction: Some(trace.output),
            exploratory,
            forced,
        }
    }

    /// Record an evaluated decision: the first of a hand seeds the traces,
    /// later ones perform a TD step.
    fn observe(&mut self, trace: &ForwardTrace<S>) {
        if !self.params.learning {
            self.y_prev = Some(trace.output);
            return;
        }
        if self.y_prev.is_none() {
            self.traces.reset();
            let sens = self.mlp.hidden_sensitivities(trace);
            self.traces.accumulate(S::zero(), trace, sens);
            self.y_prev = Some(trace.output);
        } else {
            self.td_step(trace);
        }
    }

    /// One TD step towards the new prediction in `trace`:
    /// `w += alpha * sum_k (y_new_k - y_prev_k) * e_k`, then
    /// `e_k <- lambda * e_k + d y_new_k / d w`.
    ///
    /// `trace` must come from the current weights.
    pub fn td_step(&mut self, trace: &ForwardTrace<S>) {
        let y_prev = self.y_prev.expect("td_step needs a previous prediction");
        let sens = self.mlp.hidden_sensitivities(trace);
        self.apply_error(&y_prev, &trace.output);
        self.traces.accumulate(self.params.lambda, trace, sens);
        self.y_prev = Some(trace.output);
    }

    fn apply_error(&mut self, y_prev: &OutcomeDistribution<S>, target: &OutcomeDistribution<S>) {
        let alpha = self.params.alpha;
        let scale = std::array::from_fn(|k| alpha * (target.0[k] - y_prev.0[k]));
        self.traces.apply(&mut self.mlp.weights, scale);
    }

    /// End of hand for this agent: train towards the real outcome, then
    /// clear the traces.
    pub fn td_terminal(&mut self, outcome: Outcome) {
        assert!(self.in_hand, "td_terminal called twice for one hand");
        self.in_hand = false;
        self.hands_played += 1;
        let skip = outcome == Outcome::Folded && !self.params.fold_update;
        if let (true, false, Some(y_prev)) = (self.params.learning, skip, self.y_prev) {
            self.apply_error(&y_prev, &outcome_target(outcome));
        }
        self.traces.reset();
        self.y_prev = None;
    }

    /// Checkpoint: a header with parameters and hand count followed by the
    /// network block. The exploration stream is not saved.
    pub fn save<W: Write>(&self, mut out: W) -> Result<(), Error> {
        let p = &self.params;
        let on = |b: bool| if b { "on" } else { "off" };
        writeln!(out, "LERPA-AGENT 1")?;
        writeln!(out, "alpha {:e}", p.alpha)?;
        writeln!(out, "lambda {:e}", p.lambda)?;
        writeln!(out, "epsilon {:e}", p.epsilon)?;
        writeln!(out, "courage_hands {}", p.courage_hands)?;
        writeln!(out, "fold_update {}", on(p.fold_update))?;
        writeln!(out, "explore_knock {}", on(p.explore_knock))?;
        writeln!(out, "clamp_outputs {}", on(p.clamp_outputs))?;
        writeln!(out, "learning {}", on(p.learning))?;
        writeln!(out, "hands_played {}", self.hands_played)?;
        self.mlp.save(out)
    }

    pub fn load<R: BufRead>(input: &mut R, seed: u64) -> Result<Self, Error> {
        let mut line = String::new();
        let mut next = |input: &mut R| -> Result<String, Error> {
            line.clear();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::Parse("unexpected end of agent checkpoint".into()));
            }
            Ok(line.trim_end().to_string())
        };
        if next(input)? != "LERPA-AGENT 1" {
            return Err(Error::Parse("missing agent checkpoint header".into()));
        }
        let mut field = |input: &mut R, key: &str| -> Result<String, Error> {
            let l = next(input)?;
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("expected {key}, found {l:?}")))
        };
        let num = |s: String| -> Result<S, Error> {
            s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
        };
        let flag = |s: String| match s.as_str() {
            "on" => Ok(true),
            "off" => Ok(false),
            _ => Err(Error::Parse(format!("bad flag {s:?}"))),
        };
        let params = AgentParams {
            alpha: num(field(input, "alpha")?)?,
            lambda: num(field(input, "lambda")?)?,
            epsilon: num(field(input, "epsilon")?)?,
            courage_hands: field(input, "courage_hands")?
                .parse()
                .map_err(|_| Error::Parse("bad courage_hands".into()))?,
            fold_update: flag(field(input, "fold_update")?)?,
            explore_knock: flag(field(input, "explore_knock")?)?,
            clamp_outputs: flag(field(input, "clamp_outputs")?)?,
            learning: flag(field(input, "learning")?)?,
        };
        params.validate()?;
        let hands_played = field(input, "hands_played")?
            .parse()
            .map_err(|_| Error::Parse("bad hands_played".into()))?;
        let mlp = Mlp::load(input)?;
        let mut agent = TdAgent::new(params, mlp, ChaCha8Rng::seed_from_u64(seed));
        agent.hands_played = hands_played;
        Ok(agent)
    }
}

/// Baseline decision rule: always knock, otherwise a uniformly random
/// legal card.
pub fn random_agent_decide<R: Rng + ?Sized>(rng: &mut R, stage: Stage, options: &[Card]) -> Action {
    match stage {
        Stage::KnockOrFold => Action::Knock,
        Stage::FirstCard | Stage::SecondCard => {
            assert!(!options.is_empty(), "random agent needs at least one option");
            if options.len() == 1 {
                Action::Play(options[0])
            } else {
                Action::Play(options[rng.gen_range(0..options.len())])
            }
        }
    }
}

/// The baseline agent: always stays in and plays random legal cards.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new(rng: ChaCha8Rng) -> Self {
        RandomAgent { rng }
    }

    pub fn decide_knock<S>(&mut self) -> Decision<S> {
        Decision::simple(random_agent_decide(&mut self.rng, Stage::KnockOrFold, &[]), false)
    }

    pub fn choose_card<S>(&mut self, stage: Stage, options: &[Card]) -> Decision<S> {
        Decision::simple(
            random_agent_decide(&mut self.rng, stage, options),
            options.len() == 1,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::OBS_LEN;

    fn obs(seed: u64) -> Observation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bits = [0u8; OBS_LEN];
        for b in &mut bits {
            *b = rng.gen_range(0..=1);
        }
        Observation::from_bits(bits)
    }

    fn veteran(epsilon: f64) -> TdAgent<f64> {
        let mut p = AgentParams::with_rates(0.1, 0.1, epsilon);
        p.courage_hands = 0;
        TdAgent::fresh(p, 42)
    }

    /// Agent whose output biases make the stay prediction exactly `p`.
    fn biased(p: f64) -> TdAgent<f64> {
        let mut a = veteran(0.0);
        a.mlp.weights.w2.iter_mut().for_each(|w| *w = 0.0);
        a.mlp.weights.b2 = vec![p / 3.0, 0.0, 0.0, 0.0];
        a
    }

    #[test]
    fn courage_forces_knock() {
        let mut p = AgentParams::<f64>::default();
        p.epsilon = 1.0;
        let mut a = TdAgent::fresh(p, 3);
        for i in 0..200 {
            a.begin_hand();
            let d = a.decide_knock(&obs(i));
            assert_eq!(d.action, Action::Knock);
            assert!(d.forced);
            a.td_terminal(Outcome::Lerpad);
        }
        assert_eq!(a.hands_played(), 200);
    }

    #[test]
    fn knock_threshold() {
        let mut a = biased(1.2);
        a.begin_hand();
        assert_eq!(a.decide_knock(&obs(0)).action, Action::Knock);
        let mut a = biased(-0.5);
        a.begin_hand();
        assert_eq!(a.decide_knock(&obs(0)).action, Action::Fold);
        let mut a = biased(0.0);
        a.begin_hand();
        assert_eq!(a.decide_knock(&obs(0)).action, Action::Fold);
    }

    #[test]
    fn greedy_card_choice_is_argmax() {
        // score candidates through a network that reads one input bit per card
        let mut a = veteran(0.0);
        a.mlp.weights.fill_zero();
        let values = [0.4, 1.7, -2.0];
        let mut cands = Vec::new();
        for (i, v) in values.iter().enumerate() {
            let mut bits = [0u8; OBS_LEN];
            bits[i] = 1;
            // hidden unit i saturates on input i; output A carries v/3
            a.mlp.weights.w1[i * OBS_LEN + i] = 50.0;
            a.mlp.weights.b1[i] = -25.0;
            a.mlp.weights.w2[i] = v / 3.0;
            cands.push((Card::from_index(i), Observation::from_bits(bits)));
        }
        a.begin_hand();
        let d = a.choose_card(&cands);
        assert_eq!(d.action, Action::Play(Card::from_index(1)));
        assert!(!d.exploratory && !d.forced);
    }

    #[test]
    fn greedy_ties_go_to_lowest_card() {
        let mut a = biased(0.3);
        a.begin_hand();
        let cands = vec![
            (Card::from_index(7), obs(1)),
            (Card::from_index(2), obs(2)),
            (Card::from_index(30), obs(3)),
        ];
        assert_eq!(a.choose_card(&cands).action, Action::Play(Card::from_index(2)));
    }

    #[test]
    fn singleton_candidate_is_forced() {
        let mut a = veteran(1.0);
        a.begin_hand();
        let d = a.choose_card(&[(Card::from_index(5), obs(1))]);
        assert_eq!(d.action, Action::Play(Card::from_index(5)));
        assert!(d.forced);
    }

    #[test]
    #[should_panic(expected = "at least one candidate")]
    fn empty_candidates_panic() {
        let mut a = veteran(0.0);
        a.begin_hand();
        a.choose_card(&[]);
    }

    #[test]
    #[should_panic(expected = "twice")]
    fn terminal_twice_panics() {
        let mut a = veteran(0.0);
        a.begin_hand();
        a.decide_knock(&obs(0));
        a.td_terminal(Outcome::Won(1));
        a.td_terminal(Outcome::Won(1));
    }

    #[test]
    fn targets() {
        assert_eq!(outcome_target::<f64>(Outcome::Won(3)).0, [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(outcome_target::<f64>(Outcome::Won(1)).0, [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(outcome_target::<f64>(Outcome::Lerpad).0, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(outcome_target::<f64>(Outcome::Folded).0, [0.0; 4]);
    }

    #[test]
    fn zero_error_step_leaves_weights_but_moves_traces() {
        let mut a = veteran(0.0);
        a.begin_hand();
        let o = obs(9);
        a.decide_knock(&o);
        let before = a.mlp.clone();
        let traces_before = a.traces().clone();
        let trace = a.evaluate(&o);
        a.td_step(&trace);
        assert_eq!(a.mlp, before);
        assert_ne!(a.traces(), &traces_before);
        // e = lambda * g + g for a repeated identical evaluation
        let g = a.mlp.grad_outputs(&trace);
        let expect = g.per_output[0].b1[0] * 1.1;
        assert!((a.traces().output(0).b1[0] - expect).abs() < 1e-15);
    }

    #[test]
    fn traces_cleared_between_hands() {
        let mut a = veteran(0.0);
        a.begin_hand();
        a.decide_knock(&obs(1));
        assert!(!a.traces().is_zero());
        a.td_terminal(Outcome::Won(2));
        assert!(a.traces().is_zero());
        assert!(a.previous_prediction().is_none());
    }

    #[test]
    fn fold_update_flag() {
        let mut on = biased(-0.5);
        on.begin_hand();
        on.decide_knock(&obs(1));
        let before = on.mlp.clone();
        on.td_terminal(Outcome::Folded);
        assert_ne!(on.mlp, before);

        let mut off = biased(-0.5);
        off.params.fold_update = false;
        off.begin_hand();
        off.decide_knock(&obs(1));
        let before = off.mlp.clone();
        off.td_terminal(Outcome::Folded);
        assert_eq!(off.mlp, before);
    }

    #[test]
    fn frozen_agent_never_changes() {
        let mut a = veteran(0.0);
        a.params.learning = false;
        let before = a.mlp.clone();
        for i in 0..5 {
            a.begin_hand();
            a.decide_knock(&obs(i));
            a.td_terminal(Outcome::Lerpad);
        }
        assert_eq!(a.mlp, before);
    }

    #[test]
    fn random_agent_always_knocks() {
        let mut r = RandomAgent::new(ChaCha8Rng::seed_from_u64(1));
        for _ in 0..100 {
            assert_eq!(r.decide_knock::<f64>().action, Action::Knock);
        }
        let c = Card::from_index(3);
        let d = r.choose_card::<f64>(Stage::FirstCard, &[c]);
        assert_eq!(d.action, Action::Play(c));
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut a = veteran(0.05);
        a.params.fold_update = false;
        a.begin_hand();
        a.decide_knock(&obs(3));
        a.td_terminal(Outcome::Won(3));
        let mut buf = Vec::new();
        a.save(&mut buf).unwrap();
        let b: TdAgent<f64> = TdAgent::load(&mut buf.as_slice(), 1).unwrap();
        assert_eq!(b.params, a.params);
        assert_eq!(b.mlp, a.mlp);
        assert_eq!(b.hands_played(), 1);
    }

    #[test]
    fn param_validation() {
        assert!(AgentParams::<f64>::default().validate().is_ok());
        assert!(AgentParams::<f64>::with_rates(0.0, 0.1, 0.1).validate().is_err());
        assert!(AgentParams::<f64>::with_rates(0.1, 1.5, 0.1).validate().is_err());
        assert!(AgentParams::<f64>::with_rates(0.1, 0.1, -0.1).validate().is_err());
    }
}
