use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Categorical(Vec<String>),
    Integer { min: i64, max: i64, log: bool },
    Continuous { min: f64, max: f64, log: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub domain: Domain,
}

impl Dimension {
    pub fn categorical(name: &str, levels: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            domain: Domain::Categorical(levels.iter().map(|l| l.to_string()).collect()),
        }
    }

    pub fn integer(name: &str, min: i64, max: i64, log: bool) -> Self {
        Self {
            name: name.to_string(),
            domain: Domain::Integer { min, max, log },
        }
    }

    pub fn continuous(name: &str, min: f64, max: f64, log: bool) -> Self {
        Self {
            name: name.to_string(),
            domain: Domain::Continuous { min, max, log },
        }
    }

    /// Width of this dimension's encoded block.
    pub fn encoded_width(&self) -> usize {
        match &self.domain {
            Domain::Categorical(levels) => levels.len(),
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |detail: String| Error::OutOfDomain {
            dimension: self.name.clone(),
            detail,
        };
        match &self.domain {
            Domain::Categorical(levels) if levels.len() < 2 => {
                Err(bad("categorical needs at least two levels".into()))
            }
            Domain::Integer { min, max, log } if min >= max || (*log && *min <= 0) => {
                Err(bad(format!("invalid integer range [{min}, {max}] (log={log})")))
            }
            Domain::Continuous { min, max, log }
                if min >= max || min.is_nan() || max.is_nan() || !min.is_finite() || !max.is_finite() || (*log && *min <= 0.0) =>
            {
                Err(bad(format!("invalid continuous range [{min}, {max}] (log={log})")))
            }
            _ => Ok(()),
        }
    }

    /// Maps a unit-interval coordinate onto the dimension's domain.
    fn at_unit(&self, u: f64) -> ParamValue {
        let u = u.clamp(0.0, 1.0);
        match &self.domain {
            Domain::Categorical(levels) => {
                ParamValue::Level(((u * levels.len() as f64) as usize).min(levels.len() - 1))
            }
            Domain::Integer { min, max, log } => {
                let v = inverse(*min as f64, *max as f64, *log, u);
                ParamValue::Int(((v + 0.5).floor() as i64).clamp(*min, *max))
            }
            Domain::Continuous { min, max, log } => {
                ParamValue::Real(inverse(*min, *max, *log, u).clamp(*min, *max))
            }
        }
    }
}

fn forward(min: f64, max: f64, log: bool, v: f64) -> f64 {
    if log {
        (v.ln() - min.ln()) / (max.ln() - min.ln())
    } else {
        (v - min) / (max - min)
    }
}

fn inverse(min: f64, max: f64, log: bool, u: f64) -> f64 {
    if log {
        (min.ln() + u * (max.ln() - min.ln())).exp()
    } else {
        min + u * (max - min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Level(usize),
    Int(i64),
    Real(f64),
}

/// One value per dimension of a [`SearchSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint(pub Vec<ParamValue>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    dimensions: Vec<Dimension>,
}

impl SearchSpace {
    pub fn new(dimensions: Vec<Dimension>) -> Result<Self> {
        if dimensions.is_empty() {
            return Err(Error::Empty("search space dimensions"));
        }
        for d in &dimensions {
            d.validate()?;
        }
        Ok(Self { dimensions })
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dimensions.iter().position(|d| d.name == name)
    }

    pub fn encoded_dim(&self) -> usize {
        self.dimensions.iter().map(Dimension::encoded_width).sum()
    }

    pub fn check(&self, p: &HyperPoint) -> Result<()> {
        if p.0.len() != self.dimensions.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dimensions.len(),
                actual: p.0.len(),
            });
        }
        for (d, v) in self.dimensions.iter().zip(&p.0) {
            let ok = match (&d.domain, v) {
                (Domain::Categorical(levels), ParamValue::Level(l)) => *l < levels.len(),
                (Domain::Integer { min, max, .. }, ParamValue::Int(x)) => min <= x && x <= max,
                (Domain::Continuous { min, max, .. }, ParamValue::Real(x)) => min <= x && x <= max,
                _ => false,
            };
            if !ok {
                return Err(Error::OutOfDomain {
                    dimension: d.name.clone(),
                    detail: format!("{v:?}"),
                });
            }
        }
        Ok(())
    }

    /// Uniform draw in the encoded coordinates (log-uniform on log ranges).
    pub fn sample_uniform(&self, rng: &mut Rng) -> HyperPoint {
        HyperPoint(
            self.dimensions
                .iter()
                .map(|d| d.at_unit(rng.random::<f64>()))
                .collect(),
        )
    }

    /// `n` points from a Halton sequence with a seeded random shift per
    /// coordinate (Cranley-Patterson rotation), one coordinate per dimension.
    pub fn quasi_random(&self, n: usize, rng: &mut Rng) -> Vec<HyperPoint> {
        let shifts: Vec<f64> = self.dimensions.iter().map(|_| rng.random()).collect();
        (1..=n)
            .map(|i| {
                HyperPoint(
                    self.dimensions
                        .iter()
                        .enumerate()
                        .map(|(j, d)| {
                            let u = (radical_inverse(i as u64, PRIMES[j % PRIMES.len()]) + shifts[j])
                                .fract();
                            d.at_unit(u)
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// One-hot blocks for categorical dimensions, unit-scaled (log first when
/// flagged) values for ranged ones.
pub fn encode_point(p: &HyperPoint, space: &SearchSpace) -> Result<Vec<f64>> {
    space.check(p)?;
    let mut out = Vec::with_capacity(space.encoded_dim());
    for (d, v) in space.dimensions.iter().zip(&p.0) {
        match (&d.domain, *v) {
            (Domain::Categorical(levels), ParamValue::Level(l)) => {
                out.extend((0..levels.len()).map(|k| if k == l { 1.0 } else { 0.0 }));
            }
            (Domain::Integer { min, max, log }, ParamValue::Int(x)) => {
                out.push(forward(*min as f64, *max as f64, *log, x as f64));
            }
            (Domain::Continuous { min, max, log }, ParamValue::Real(x)) => {
                out.push(forward(*min, *max, *log, x));
            }
            _ => unreachable!("checked above"),
        }
    }
    Ok(out)
}

/// Inverse of [`encode_point`]: argmax level per one-hot block (ties to the
/// lowest level), inverse transform with round-half-up for integers, and
/// clamping to the range.
pub fn decode_point(v: &[f64], space: &SearchSpace) -> Result<HyperPoint> {
    if v.len() != space.encoded_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.encoded_dim(),
            actual: v.len(),
        });
    }
    let mut values = Vec::with_capacity(space.dimensions.len());
    let mut at = 0;
    for d in &space.dimensions {
        let width = d.encoded_width();
        let block = &v[at..at + width];
        at += width;
        values.push(match &d.domain {
            Domain::Categorical(_) => {
                let mut best = 0;
                for (k, &x) in block.iter().enumerate() {
                    if x > block[best] {
                        best = k;
                    }
                }
                ParamValue::Level(best)
            }
            Domain::Integer { min, max, log } => {
                let x = inverse(*min as f64, *max as f64, *log, block[0]);
                ParamValue::Int(((x + 0.5).floor() as i64).clamp(*min, *max))
            }
            Domain::Continuous { min, max, log } => {
                ParamValue::Real(inverse(*min, *max, *log, block[0]).clamp(*min, *max))
            }
        });
    }
    Ok(HyperPoint(values))
}
