//! Scattering histories after `n` passes through the point.
//!
//! A history is the sequence of propagation directions `d₀ … dₙ`; each pass
//! contributes the line amplitude for going from `dⱼ` to `dⱼ₊₁`. Summing all
//! histories with fixed end directions reproduces `S⁽ⁿ⁾_{dₙ,d₀}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line_scattering::{coefficients, Coefficients};
use crate::mat2::{Mat2C, C64};
use crate::params::PointInteraction;

/// Enumeration is exponential in `n`; this keeps it below ~2 million paths.
pub const MAX_WORLDLINE_PASSES: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Moving towards increasing `x`.
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Direction {
    fn index(self) -> usize {
        match self {
            Direction::Plus => 0,
            Direction::Minus => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldlineEvent {
    /// `+ → +`, amplitude `T₊`.
    TransmitLr,
    /// `+ → −`, amplitude `R₊`.
    ReflectLeft,
    /// `− → +`, amplitude `R₋`.
    ReflectRight,
    /// `− → −`, amplitude `T₋`.
    TransmitRl,
}

impl WorldlineEvent {
    pub fn between(from: Direction, to: Direction) -> Self {
        match (from, to) {
            (Direction::Plus, Direction::Plus) => WorldlineEvent::TransmitLr,
            (Direction::Plus, Direction::Minus) => WorldlineEvent::ReflectLeft,
            (Direction::Minus, Direction::Plus) => WorldlineEvent::ReflectRight,
            (Direction::Minus, Direction::Minus) => WorldlineEvent::TransmitRl,
        }
    }

    pub fn amplitude(self, co: &Coefficients) -> C64 {
        match self {
            WorldlineEvent::TransmitLr => co.t_plus,
            WorldlineEvent::ReflectLeft => co.r_plus,
            WorldlineEvent::ReflectRight => co.r_minus,
            WorldlineEvent::TransmitRl => co.t_minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worldline {
    pub directions: Vec<Direction>,
    pub events: Vec<WorldlineEvent>,
    pub weight: C64,
}

impl Worldline {
    pub fn incoming(&self) -> Direction {
        self.directions[0]
    }

    pub fn outgoing(&self) -> Direction {
        *self.directions.last().expect("a worldline has at least one direction")
    }
}

/// All `2^{n+1}` histories with `n` passes at momentum `k`, ordered by the
/// binary pattern of directions (`+` first).
pub fn worldline_weights(pi: &PointInteraction, k: f64, n: u32) -> Result<Vec<Worldline>> {
    if n > MAX_WORLDLINE_PASSES {
        return Err(Error::InvalidParameter(format!(
            "worldline enumeration limited to n <= {MAX_WORLDLINE_PASSES}, got {n}"
        )));
    }
    let co = coefficients(pi, k);
    let count = 1usize << (n + 1);
    Ok((0..count)
        .map(|code| {
            let directions: Vec<Direction> = (0..=n)
                .map(|j| if code >> (n - j) & 1 == 0 { Direction::Plus } else { Direction::Minus })
                .collect();
            let events: Vec<WorldlineEvent> =
                directions.windows(2).map(|w| WorldlineEvent::between(w[0], w[1])).collect();
            let weight = events.iter().map(|e| e.amplitude(&co)).product();
            Worldline { directions, events, weight }
        })
        .collect())
}

/// Sum of weights grouped by end directions, as a matrix indexed
/// `[outgoing, incoming]`.
pub fn grouped_weights(lines: &[Worldline]) -> Mat2C {
    let mut m = [[C64::new(0.0, 0.0); 2]; 2];
    for w in lines {
        m[w.outgoing().index()][w.incoming().index()] += w.weight;
    }
    Mat2C::new(m[0][0], m[0][1], m[1][0], m[1][1])
}
