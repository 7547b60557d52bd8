//! Built-in consistency checks, each against an independent oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{AgentParams, TdAgent};
use crate::arena::{replay, SeatBinding, Table, TableConfig};
use crate::cards::Card;
use crate::encoder::{encode_hand, encode_observation, Observation, OBS_LEN};
use crate::neuro::{Mlp, Weights, OUTPUTS};
use crate::oracle;
use crate::rules::Seat;

pub const GRADIENT_STEP: f64 = 1e-5;
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
/// Denominator floor of the relative gradient error.
pub const GRADIENT_ERROR_FLOOR: f64 = 1e-6;
pub const TRACE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    /// Largest error, or number of violations for counting checks.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn error(name: &'static str, cases: usize, max_error: f64, tolerance: f64) -> Self {
        CheckResult {
            name,
            cases,
            max_error,
            tolerance,
            passed: max_error < tolerance,
        }
    }

    fn count(name: &'static str, cases: usize, violations: usize) -> Self {
        CheckResult {
            name,
            cases,
            max_error: violations as f64,
            tolerance: 0.0,
            passed: violations == 0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Perturb the analytic gradient so the gradient check must fail.
    pub corrupt_gradient: bool,
    pub gradient_pairs: usize,
    pub trace_episodes: usize,
    pub legality_positions: usize,
    pub ledger_hands: usize,
    pub encoding_states: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 0,
            corrupt_gradient: false,
            gradient_pairs: 100,
            trace_episodes: 50,
            legality_positions: 10_000,
            ledger_hands: 10_000,
            encoding_states: 1_000,
        }
    }
}

fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..=1)).collect()
}

/// Analytic output gradients against central differences on random
/// (network, input) pairs. Every output-layer parameter is checked, plus a
/// sample of hidden-layer ones.
pub fn gradient_check(pairs: usize, seed: u64, corrupt: bool) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for pair in 0..pairs {
        let mut mlp: Mlp<f64> = Mlp::standard(&mut rng);
        // odd pairs spread the weights so hidden units leave the linear region
        if pair % 2 == 1 {
            for w in mlp.weights.iter_mut() {
                *w = rng.gen_range(-0.5..0.5);
            }
        }
        let x = random_bits(&mut rng, OBS_LEN);
        let trace = mlp.forward_bits(&x);
        let mut grads = mlp.grad_outputs(&trace);
        if corrupt && pair == 0 {
            let p = grads.per_output[0].len() - 1;
            *grads.per_output[0].param_mut(p) += 1e-2;
        }
        let n = mlp.weights.len();
        let first_out = mlp.weights.w1.len();
        let mut params: Vec<usize> = (0..40).map(|_| rng.gen_range(0..first_out)).collect();
        params.extend(first_out..n);
        for p in params {
            let numeric = oracle::finite_difference_at(&mlp, &x, p, GRADIENT_STEP);
            for k in 0..OUTPUTS {
                let a = grads.per_output[k].param(p);
                worst = worst.max(oracle::relative_error(a, numeric[k], GRADIENT_ERROR_FLOOR));
            }
        }
    }
    CheckResult::error("gradient", pairs, worst, GRADIENT_TOLERANCE)
}

fn max_abs_diff(a: &Weights<f64>, b: &Weights<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Three-decision episodes: the agent's traces after each decision against
/// the λ-discounted sum of gradients taken at the weights of the moment,
/// and with λ = 0 the weight change against a hand-computed one-step TD
/// update.
pub fn trace_identity_check(episodes: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for ep in 0..episodes {
        let lambda = if ep % 5 == 0 { 0.0 } else { rng.gen_range(0.0..1.0) };
        let mut params = AgentParams::<f64>::with_rates(rng.gen_range(0.01..0.5), lambda, 0.0);
        params.courage_hands = 0;
        let mut agent = TdAgent::fresh(params, rng.gen());
        agent.begin_hand();
        let mut expected: Vec<Weights<f64>> = Vec::new();
        let mut prev: Option<([Weights<f64>; OUTPUTS], [f64; OUTPUTS])> = None;
        for stage in 0..3 {
            let obs = Observation::from_bits(
                random_bits(&mut rng, OBS_LEN).try_into().expect("observation length"),
            );
            let before = agent.mlp.clone();
            let trace = before.forward(&obs);
            let g = before.grad_outputs(&trace);
            agent.choose_card(&[(Card::from_index(stage), obs)]);
            // one-step TD with lambda = 0: w' = w + alpha * sum_k delta_k * g_prev_k
            if lambda == 0.0 {
                if let Some((g_prev, y_prev)) = &prev {
                    let mut w = before.weights.clone();
                    for k in 0..OUTPUTS {
                        w.axpy(agent.params.alpha * (trace.output.0[k] - y_prev[k]), &g_prev[k]);
                    }
                    worst = worst.max(max_abs_diff(&w, &agent.mlp.weights));
                }
            }
            expected = if expected.is_empty() {
                g.per_output.to_vec()
            } else {
                expected
                    .into_iter()
                    .zip(g.per_output.iter())
                    .map(|(mut e, gk)| {
                        e.decay_add(lambda, gk);
                        e
                    })
                    .collect()
            };
            let traces = agent.traces();
            for (k, e) in expected.iter().enumerate() {
                worst = worst.max(max_abs_diff(e, &traces.output(k)));
            }
            prev = Some((g.per_output, trace.output.0));
        }
        agent.td_terminal(crate::rules::Outcome::Won(1));
    }
    CheckResult::error("trace-identity", episodes, worst, TRACE_TOLERANCE)
}

pub fn legality_check(positions: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mismatches = (0..positions)
        .filter(|_| {
            let p = oracle::Position::random(&mut rng);
            p.legal_moves() != oracle::legal_by_rule_table(&p.hand, p.led(), p.trump)
        })
        .count();
    CheckResult::count("legality", positions, mismatches)
}

/// Random-agent hands: chips conserved up to the Lerpa penalties, every
/// record replays to the same result, and the cumulative ledger matches
/// the prefix sums.
pub fn ledger_check(hands: usize, seed: u64) -> CheckResult {
    let config = TableConfig::<f64> {
        seats: (1..=4).map(|i| SeatBinding::random(format!("R{i}"))).collect(),
        seed,
        dealer_start: Seat::new(3),
    };
    let mut table = Table::new(&config).expect("four seats");
    let log = table.run_session(hands);
    let mut violations = 0;
    let mut running = [0i64; 4];
    for (rec, cum) in log.records.iter().zip(&log.cumulative) {
        let s = &rec.settlement;
        let expect = if s.void { 0 } else { -3 * s.lerpad_count() as i32 };
        if s.total() != expect {
            violations += 1;
        }
        match replay(rec) {
            Ok((winners, tricks, settlement)) => {
                if winners != rec.trick_winners || tricks != rec.tricks_won || &settlement != s {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
        for (r, d) in running.iter_mut().zip(s.deltas) {
            *r += d as i64;
        }
        if &running != cum {
            violations += 1;
        }
    }
    CheckResult::count("ledger", log.len(), violations)
}

/// Observation length and binarity, hand-order invariance and suit
/// relabelling invariance of the hand block.
pub fn encoding_check(states: usize, seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms = oracle::suit_permutations();
    let mut violations = 0;
    for _ in 0..states {
        let view = oracle::random_view(&mut rng);
        let obs = encode_observation(&view);
        if obs.len() != OBS_LEN || obs.bits().iter().any(|&b| b > 1) {
            violations += 1;
        }
        for order in oracle::orderings(&view.hand) {
            let mut v = view.clone();
            v.hand = order;
            if encode_observation(&v) != obs {
                violations += 1;
            }
        }
        let hand_bits = encode_hand(&view.hand, view.trump);
        for &perm in &perms {
            let r = oracle::relabel_view(&view, perm);
            if encode_hand(&r.hand, r.trump) != hand_bits {
                violations += 1;
            }
        }
    }
    CheckResult::count("encoding", states, violations)
}

pub fn run_selftest(opts: &SelftestOptions) -> Vec<CheckResult> {
    vec![
        gradient_check(opts.gradient_pairs, opts.seed, opts.corrupt_gradient),
        trace_identity_check(opts.trace_episodes, opts.seed),
        legality_check(opts.legality_positions, opts.seed),
        ledger_check(opts.ledger_hands, opts.seed),
        encoding_check(opts.encoding_states, opts.seed),
    ]
}

/// `check,cases,max_error,tolerance,status`
pub fn selftest_csv(results: &[CheckResult]) -> Result<String, crate::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "cases", "max_error", "tolerance", "status"])?;
    for r in results {
        w.write_record([
            r.name.to_string(),
            r.cases.to_string(),
            format!("{:e}", r.max_error),
            format!("{:e}", r.tolerance),
            if r.passed { "pass" } else { "FAIL" }.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
