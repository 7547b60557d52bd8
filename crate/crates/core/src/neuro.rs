//! A single-hidden-layer perceptron: sigmoid hidden units, four linear
//! outputs, and exact per-output parameter gradients.
//!
//! The outputs are read as the probabilities of winning three, two or one
//! tricks and of being Lerpa'd. They are not clamped or normalised.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::encoder::{Observation, OBS_LEN};
use crate::scalar::Scalar;
use crate::Error;

/// Number of network outputs.
pub const OUTPUTS: usize = 4;
pub const DEFAULT_HIDDEN: usize = 50;
/// Half-width of the uniform initialisation interval.
pub const INIT_RANGE: f64 = 0.1;

const MAGIC: &str = "LERPA-MLP 1";

/// All trainable parameters, laid out like the network.
///
/// `w1` is row-major `hidden x input` (row `j` feeds hidden unit `j`), `w2`
/// is row-major `OUTPUTS x hidden`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights<S> {
    pub w1: Vec<S>,
    pub b1: Vec<S>,
    pub w2: Vec<S>,
    pub b2: Vec<S>,
}

impl<S: Scalar> Weights<S> {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Weights<S> {
        Weights {
            w1: vec![S::zero(); input_dim * hidden_dim],
            b1: vec![S::zero(); hidden_dim],
            w2: vec![S::zero(); OUTPUTS * hidden_dim],
            b2: vec![S::zero(); OUTPUTS],
        }
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &S> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut S> {
        self.w1
            .iter_mut()
            .chain(&mut self.b1)
            .chain(&mut self.w2)
            .chain(&mut self.b2)
    }

    /// Block holding flat parameter `p`, and `p`'s index inside it.
    fn split(&self, p: usize) -> (usize, usize) {
        let sizes = [self.w1.len(), self.b1.len(), self.w2.len(), self.b2.len()];
        let mut rest = p;
        for (b, n) in sizes.into_iter().enumerate() {
            if rest < n {
                return (b, rest);
            }
            rest -= n;
        }
        panic!("parameter index {p} out of range");
    }

    /// Parameter `p` in the flat order of [`Weights::iter`].
    pub fn param(&self, p: usize) -> S {
        match self.split(p) {
            (0, i) => self.w1[i],
            (1, i) => self.b1[i],
            (2, i) => self.w2[i],
            (_, i) => self.b2[i],
        }
    }

    pub fn param_mut(&mut self, p: usize) -> &mut S {
        match self.split(p) {
            (0, i) => &mut self.w1[i],
            (1, i) => &mut self.b1[i],
            (2, i) => &mut self.w2[i],
            (_, i) => &mut self.b2[i],
        }
    }

    /// Same shape as `other`.
    pub fn same_shape(&self, other: &Weights<S>) -> bool {
        self.w1.len() == other.w1.len()
            && self.b1.len() == other.b1.len()
            && self.w2.len() == other.w2.len()
            && self.b2.len() == other.b2.len()
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: S, other: &Weights<S>) {
        assert!(self.same_shape(other), "weight shape mismatch");
        for (x, &y) in self.iter_mut().zip(other.iter()) {
            *x += a * y;
        }
    }

    /// `self = decay * self + other`
    pub fn decay_add(&mut self, decay: S, other: &Weights<S>) {
        assert!(self.same_shape(other), "weight shape mismatch");
        for (x, &y) in self.iter_mut().zip(other.iter()) {
            *x = decay * *x + y;
        }
    }

    pub fn fill_zero(&mut self) {
        for x in self.iter_mut() {
            *x = S::zero();
        }
    }

    pub fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

/// Network outputs `(A, B, C, D)`: P(+3), P(+2), P(+1), P(-3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeDistribution<S>(pub [S; OUTPUTS]);

impl<S: Scalar> OutcomeDistribution<S> {
    pub fn zeros() -> Self {
        OutcomeDistribution([S::zero(); OUTPUTS])
    }

    /// Expected chips, `3A + 2B + C - 3D`.
    pub fn scalar_prediction(&self) -> S {
        scalar_prediction(self)
    }

    /// Each output clamped into `[0, 1]`.
    pub fn clamped(&self) -> Self {
        OutcomeDistribution(self.0.map(|v| v.max(S::zero()).min(S::one())))
    }
}

/// Expected chips for an outcome distribution: `3A + 2B + C - 3D`.
pub fn scalar_prediction<S: Scalar>(y: &OutcomeDistribution<S>) -> S {
    let [a, b, c, d] = y.0;
    let three = S::lit(3.0);
    three * a + S::lit(2.0) * b + c - three * d
}

/// Activations of one forward pass, kept for gradient computation.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace<S> {
    pub input: Vec<u8>,
    pub hidden: Vec<S>,
    pub output: OutcomeDistribution<S>,
}

impl<S> ForwardTrace<S> {
    /// Indices of the inputs that were 1.
    pub fn active_inputs(&self) -> Vec<usize> {
        self.input
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b != 0).then_some(i))
            .collect()
    }
}

/// `d y_k / d w` for each output `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet<S> {
    pub per_output: [Weights<S>; OUTPUTS],
}

#[inline]
pub fn sigmoid<S: Scalar>(z: S) -> S {
    S::one() / (S::one() + (-z).exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<S> {
    input_dim: usize,
    hidden_dim: usize,
    pub weights: Weights<S>,
}

impl<S: Scalar> Mlp<S> {
    /// Weights uniform on `[-0.1, 0.1]`, biases zero.
    pub fn init<R: Rng + ?Sized>(rng: &mut R, input_dim: usize, hidden_dim: usize) -> Mlp<S> {
        assert!(input_dim > 0 && hidden_dim > 0, "dimensions must be positive");
        let mut weights = Weights::zeros(input_dim, hidden_dim);
        for w in weights.w1.iter_mut().chain(weights.w2.iter_mut()) {
            *w = S::lit(rng.gen_range(-INIT_RANGE..=INIT_RANGE));
        }
        Mlp {
            input_dim,
            hidden_dim,
            weights,
        }
    }

    /// The standard 81-input, 50-hidden network.
    pub fn standard<R: Rng + ?Sized>(rng: &mut R) -> Mlp<S> {
        Self::init(rng, OBS_LEN, DEFAULT_HIDDEN)
    }

    pub fn from_weights(input_dim: usize, hidden_dim: usize, weights: Weights<S>) -> Mlp<S> {
        assert!(
            weights.same_shape(&Weights::zeros(input_dim, hidden_dim)),
            "weights do not match dimensions {input_dim}x{hidden_dim}"
        );
        Mlp {
            input_dim,
            hidden_dim,
            weights,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn forward(&self, x: &Observation) -> ForwardTrace<S> {
        self.forward_bits(x.bits())
    }

    /// Forward pass over a binary input of length `input_dim`.
    pub fn forward_bits(&self, x: &[u8]) -> ForwardTrace<S> {
        assert_eq!(
            x.len(),
            self.input_dim,
            "input length {} does not match network input {}",
            x.len(),
            self.input_dim
        );
        let active: Vec<usize> = x
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| match b {
                0 => None,
                1 => Some(i),
                _ => panic!("network inputs must be binary"),
            })
            .collect();
        let w = &self.weights;
        let hidden: Vec<S> = (0..self.hidden_dim)
            .map(|j| {
                let row = &w.w1[j * self.input_dim..(j + 1) * self.input_dim];
                let z = active.iter().fold(w.b1[j], |acc, &i| acc + row[i]);
                sigmoid(z)
            })
            .collect();
        let mut y = [S::zero(); OUTPUTS];
        for (k, yk) in y.iter_mut().enumerate() {
            let row = &w.w2[k * self.hidden_dim..(k + 1) * self.hidden_dim];
            *yk = row
                .iter()
                .zip(&hidden)
                .fold(w.b2[k], |acc, (&wkj, &hj)| acc + wkj * hj);
        }
        ForwardTrace {
            input: x.to_vec(),
            hidden,
            output: OutcomeDistribution(y),
        }
    }

    /// `d y_k / d z_j` for every output `k` and hidden pre-activation `z_j`.
    pub fn hidden_sensitivities(&self, trace: &ForwardTrace<S>) -> [Vec<S>; OUTPUTS] {
        assert_eq!(trace.hidden.len(), self.hidden_dim, "trace from another network");
        let n_hid = self.hidden_dim;
        std::array::from_fn(|k| {
            trace
                .hidden
                .iter()
                .zip(&self.weights.w2[k * n_hid..(k + 1) * n_hid])
                .map(|(&h, &w)| w * h * (S::one() - h))
                .collect()
        })
    }

    /// Exact gradients of every output with respect to every parameter,
    /// evaluated at the activations in `trace`.
    pub fn grad_outputs(&self, trace: &ForwardTrace<S>) -> GradientSet<S> {
        assert_eq!(trace.input.len(), self.input_dim, "trace from another network");
        assert_eq!(trace.hidden.len(), self.hidden_dim, "trace from another network");
        let (n_in, n_hid) = (self.input_dim, self.hidden_dim);
        let sens = self.hidden_sensitivities(trace);
        let per_output = std::array::from_fn(|k| {
            let mut g = Weights::zeros(n_in, n_hid);
            g.b2[k] = S::one();
            g.w2[k * n_hid..(k + 1) * n_hid].copy_from_slice(&trace.hidden);
            for j in 0..n_hid {
                let dz = sens[k][j];
                g.b1[j] = dz;
                let row = &mut g.w1[j * n_in..(j + 1) * n_in];
                for (gi, &xi) in row.iter_mut().zip(&trace.input) {
                    if xi != 0 {
                        *gi = dz;
                    }
                }
            }
            g
        });
        GradientSet { per_output }
    }

    /// Write the network in the versioned text format:
    ///
    /// ```text
    /// LERPA-MLP 1
    /// scalar f64
    /// dims <input> <hidden> 4
    /// w1            (then `hidden` lines of `input` values)
    /// b1            (then one line of `hidden` values)
    /// w2            (then 4 lines of `hidden` values)
    /// b2            (then one line of 4 values)
    /// ```
    ///
    /// Values use Rust's shortest round-trip exponent notation.
    pub fn save<W: Write>(&self, mut out: W) -> Result<(), Error> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "scalar {}", S::TAG)?;
        writeln!(out, "dims {} {} {}", self.input_dim, self.hidden_dim, OUTPUTS)?;
        let w = &self.weights;
        let mut rows = |name: &str, data: &[S], width: usize| -> std::io::Result<()> {
            writeln!(out, "{name}")?;
            for row in data.chunks(width) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
            Ok(())
        };
        rows("w1", &w.w1, self.input_dim)?;
        rows("b1", &w.b1, self.hidden_dim)?;
        rows("w2", &w.w2, self.hidden_dim)?;
        rows("b2", &w.b2, OUTPUTS)?;
        Ok(())
    }

    /// Read a network written by [`Mlp::save`]. Consumes exactly the lines
    /// of the network block.
    pub fn load<R: BufRead>(input: &mut R) -> Result<Mlp<S>, Error> {
        let mut next = || -> Result<String, Error> {
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                return Err(Error::Parse("unexpected end of weight file".into()));
            }
            Ok(line.trim_end().to_string())
        };
        if next()? != MAGIC {
            return Err(Error::Parse("missing weight file header".into()));
        }
        let scalar = next()?;
        if scalar.strip_prefix("scalar ").is_none() {
            return Err(Error::Parse(format!("bad scalar line {scalar:?}")));
        }
        let dims_line = next()?;
        let dims: Vec<usize> = dims_line
            .strip_prefix("dims ")
            .ok_or_else(|| Error::Parse(format!("bad dims line {dims_line:?}")))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad dimension {t:?}"))))
            .collect::<Result<_, _>>()?;
        let (input_dim, hidden_dim) = match dims[..] {
            [i, h, o] if o == OUTPUTS && i > 0 && h > 0 => (i, h),
            _ => return Err(Error::Parse(format!("bad dims line {dims_line:?}"))),
        };
        let mut block = |name: &str, rows: usize, width: usize| -> Result<Vec<S>, Error> {
            if next()? != name {
                return Err(Error::Parse(format!("expected section {name}")));
            }
            let mut data = Vec::with_capacity(rows * width);
            for _ in 0..rows {
                let line = next()?;
                let before = data.len();
                for tok in line.split_whitespace() {
                    let v: S = tok
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad weight value {tok:?}")))?;
                    if !v.is_finite() {
                        return Err(Error::Parse(format!("non-finite weight {tok:?}")));
                    }
                    data.push(v);
                }
                if data.len() - before != width {
                    return Err(Error::Parse(format!("wrong row width in section {name}")));
                }
            }
            Ok(data)
        };
        let w1 = block("w1", hidden_dim, input_dim)?;
        let b1 = block("b1", 1, hidden_dim)?;
        let w2 = block("w2", OUTPUTS, hidden_dim)?;
        let b2 = block("b2", 1, OUTPUTS)?;
        Ok(Mlp::from_weights(
            input_dim,
            hidden_dim,
            Weights { w1, b1, w2, b2 },
        ))
    }
}
