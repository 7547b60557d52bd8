//! Checks against independent reference computations.

use lerpa::agent::{random_agent_decide, AgentParams, Stage, TdAgent};
use lerpa::cards::{build_deck, Card};
use lerpa::encoder::{encode_hand, encode_observation, AgentView, Observation, Status, OBS_LEN};
use lerpa::experiments::selftest::{gradient_check, trace_identity_check, GRADIENT_TOLERANCE};
use lerpa::neuro::{sigmoid, Mlp, Weights, OUTPUTS};
use lerpa::oracle::{self, finite_difference_gradients, relative_error, Position};
use lerpa::rules::{deal, Outcome};
use lerpa::cards::parse_cards;
use lerpa::Action;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cards(s: &str) -> Vec<Card> {
    parse_cards(s).unwrap()
}

fn bits(rng: &mut ChaCha8Rng) -> [u8; OBS_LEN] {
    std::array::from_fn(|_| rng.gen_range(0..=1))
}

#[test]
fn deal_frequencies_are_binomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000;
    let mut counts = [0usize; 40];
    for _ in 0..n {
        let d = deal(&mut rng);
        for h in &d.hands {
            for c in h.cards() {
                counts[c.index()] += 1;
            }
        }
    }
    let p = 12.0 / 40.0;
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - mean).abs() <= 3.0 * sd,
            "card {} dealt {c} times, expected {mean} +- {}",
            Card::from_index(i),
            3.0 * sd
        );
    }
}

#[test]
fn legal_moves_match_rule_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let p = Position::random(&mut rng);
        assert_eq!(
            p.legal_moves(),
            oracle::legal_by_rule_table(&p.hand, p.led(), p.trump),
            "{p:?}"
        );
    }
}

/// Straight nested-loop forward pass.
fn reference_forward(w: &Weights<f64>, n_in: usize, n_hid: usize, x: &[u8]) -> [f64; OUTPUTS] {
    let mut h = vec![0.0; n_hid];
    for j in 0..n_hid {
        let mut z = w.b1[j];
        for i in 0..n_in {
            z += w.w1[j * n_in + i] * x[i] as f64;
        }
        h[j] = 1.0 / (1.0 + (-z).exp());
    }
    let mut y = [0.0; OUTPUTS];
    for k in 0..OUTPUTS {
        y[k] = w.b2[k];
        for j in 0..n_hid {
            y[k] += w.w2[k * n_hid + j] * h[j];
        }
    }
    y
}

#[test]
fn forward_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let mlp: Mlp<f64> = Mlp::standard(&mut rng);
        let x = bits(&mut rng);
        let y = mlp.forward_bits(&x).output.0;
        let r = reference_forward(&mlp.weights, 81, 50, &x);
        for k in 0..OUTPUTS {
            assert!((y[k] - r[k]).abs() < 1e-12);
        }
    }
    assert_eq!(sigmoid(0.0f64), 0.5);
}

#[test]
fn gradients_match_finite_differences_everywhere_on_small_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (n_in, n_hid) = (rng.gen_range(2..12), rng.gen_range(1..8));
        let mut mlp: Mlp<f64> = Mlp::init(&mut rng, n_in, n_hid);
        for w in mlp.weights.iter_mut() {
            *w = rng.gen_range(-0.5..0.5);
        }
        let x: Vec<u8> = (0..n_in).map(|_| rng.gen_range(0..=1)).collect();
        let g = mlp.grad_outputs(&mlp.forward_bits(&x));
        let numeric = finite_difference_gradients(&mlp, &x, 1e-5);
        for k in 0..OUTPUTS {
            for (a, n) in g.per_output[k].iter().zip(numeric[k].iter()) {
                worst = worst.max(relative_error(*a, *n, 1e-6));
            }
        }
    }
    assert!(worst < GRADIENT_TOLERANCE, "max relative error {worst:e}");
}

#[test]
fn gradients_match_finite_differences_on_full_networks() {
    let r = gradient_check(100, 17, false);
    assert!(r.passed, "{r:?}");
}

/// e_k after each of three stages against a direct discounted sum of the
/// gradients, each taken at the weights in force when that stage was
/// evaluated.
#[test]
fn traces_equal_discounted_gradient_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for lambda in [0.0, 0.1, 0.5, 0.9, 1.0] {
        let mut p = AgentParams::<f64>::with_rates(0.2, lambda, 0.0);
        p.courage_hands = 0;
        let mut agent = TdAgent::fresh(p, rng.gen());
        agent.begin_hand();
        let mut grads: Vec<[Weights<f64>; OUTPUTS]> = Vec::new();
        for stage in 0..3 {
            let obs = Observation::from_bits(bits(&mut rng));
            let g = agent.mlp.grad_outputs(&agent.mlp.forward(&obs));
            grads.push(g.per_output);
            agent.choose_card(&[(Card::from_index(stage), obs)]);
            let n = grads.len();
            for k in 0..OUTPUTS {
                let mut direct = Weights::zeros(81, 50);
                for (t, g) in grads.iter().enumerate() {
                    direct.axpy(lambda.powi((n - 1 - t) as i32), &g[k]);
                }
                let e = agent.traces().output(k);
                let diff = direct.iter().zip(e.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-12, "lambda {lambda} stage {stage} output {k}: {diff:e}");
            }
        }
        agent.td_terminal(Outcome::Lerpad);
    }
}

#[test]
fn zero_lambda_is_one_step_td() {
    // includes the one-step identity for lambda = 0 episodes
    let r = trace_identity_check(40, 8);
    assert!(r.passed, "{r:?}");
}

#[test]
fn full_exploration_is_uniform_over_candidates() {
    let mut p = AgentParams::<f64>::with_rates(0.1, 0.1, 1.0);
    p.courage_hands = 0;
    p.learning = false;
    let mut agent = TdAgent::fresh(p, 99);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cands: Vec<(Card, Observation)> = (0..3)
        .map(|i| (Card::from_index(i * 7), Observation::from_bits(bits(&mut rng))))
        .collect();
    let n = 30_000;
    let mut counts = [0usize; 3];
    for _ in 0..n {
        agent.begin_hand();
        let d = agent.choose_card(&cands);
        let Action::Play(c) = d.action else { panic!("card expected") };
        counts[cands.iter().position(|x| x.0 == c).unwrap()] += 1;
        agent.td_terminal(Outcome::Won(1));
    }
    let (mean, sd) = (n as f64 / 3.0, (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt());
    for c in counts {
        assert!((c as f64 - mean).abs() <= 3.0 * sd, "{counts:?}");
    }
}

#[test]
fn random_agent_splits_two_options_evenly() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = cards("3H 7C");
    let n = 20_000;
    let first = (0..n)
        .filter(|_| random_agent_decide(&mut rng, Stage::FirstCard, &opts) == Action::Play(opts[0]))
        .count();
    let sd = (n as f64 * 0.25).sqrt();
    assert!((first as f64 - n as f64 / 2.0).abs() <= 3.0 * sd, "{first}");
    assert_eq!(random_agent_decide(&mut rng, Stage::KnockOrFold, &[]), Action::Knock);
}

#[test]
fn repeated_win_of_one_trick_converges() {
    let mut p = AgentParams::<f64>::default();
    p.courage_hands = u64::MAX;
    let mut agent = TdAgent::fresh(p, 12);
    let obs = Observation::from_bits(bits(&mut ChaCha8Rng::seed_from_u64(6)));
    let target = [0.0, 0.0, 1.0, 0.0];
    let err = |a: &TdAgent<f64>| {
        let y = a.evaluate(&obs).output.0;
        y.iter().zip(target).map(|(y, z)| (y - z).powi(2)).sum::<f64>().sqrt()
    };
    let mut last = err(&agent);
    for i in 0..1000 {
        agent.begin_hand();
        agent.decide_knock(&obs);
        agent.td_terminal(Outcome::Won(1));
        let e = err(&agent);
        assert!(e <= last + 1e-12, "error rose at update {i}: {last} -> {e}");
        last = e;
    }
    let p = agent.evaluate(&obs).output.scalar_prediction();
    assert!((p - 1.0).abs() < 0.05, "P = {p}");
}

#[test]
fn hand_slot_worked_example() {
    // A,5 of diamonds and K of hearts with hearts trumps: the king leads as trump
    let bits = encode_hand(&cards("AD 5D KH"), lerpa::Suit::Hearts);
    assert_eq!(&bits[..7], &[0, 0, 0, 0, 1, 1, 1]);
    // then the multiple diamonds: class 1, ace ordinal 9, five ordinal 3
    assert_eq!(&bits[7..14], &[0, 0, 1, 1, 0, 0, 1]);
    assert_eq!(&bits[14..21], &[0, 0, 1, 0, 0, 1, 1]);
}

#[test]
fn first_trick_winner_field() {
    let view = AgentView {
        hand: cards("AD 5D"),
        trump: lerpa::Suit::Hearts,
        played: cards("2C 3C 4C 5C"),
        opponents: [Status::Knocked; 3],
        trick_winners: vec![1],
    };
    let obs = encode_observation(&view);
    assert_eq!(obs.field(lerpa::encoder::WINNER_OFFSET, 3), 0b010);
    assert_eq!(obs.field(lerpa::encoder::WINNER_OFFSET + 3, 3), 0);
}

#[test]
fn every_card_in_the_deck_once() {
    let d = build_deck();
    assert_eq!(d.len(), 40);
    let mut idx: Vec<usize> = d.iter().map(|c| c.index()).collect();
    idx.sort_unstable();
    idx.dedup();
    assert_eq!(idx.len(), 40);
}
