//! Neuroevolution control software: a single-layer network from the
//! reference-model inputs straight to the two wheel speeds.

use std::fmt::Write as _;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::reference::{ActuatorCommand, FloorColor, PlatformSpec, SensorSnapshot, RAY_COUNT};

pub const N_INPUTS: usize = 24;
pub const GENOME_LEN: usize = (N_INPUTS + 1) * 2;
pub const GENE_LIMIT: f64 = 5.0;
pub const DEFAULT_SIGMA: f64 = 0.5;
pub const ANN_HEADER: &str = "# ann-v1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuroError {
    #[error("genome has {0} weights, expected {GENOME_LEN}")]
    Length(usize),
    #[error("weight {index} = {value} is outside [-{GENE_LIMIT}, {GENE_LIMIT}]")]
    Range { index: usize, value: f64 },
    #[error("mutation sigma must be finite and non-negative, got {0}")]
    Sigma(f64),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

pub type AnnInputs = [f64; N_INPUTS];

/// Weights `0..25` drive the left wheel, `25..50` the right one; the last
/// weight of each half is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    weights: Vec<f64>,
}

impl Genome {
    pub fn new(weights: Vec<f64>) -> Result<Self, NeuroError> {
        if weights.len() != GENOME_LEN {
            return Err(NeuroError::Length(weights.len()));
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(-GENE_LIMIT..=GENE_LIMIT).contains(*w))
        {
            return Err(NeuroError::Range { index, value });
        }
        Ok(Self { weights })
    }

    pub fn zeros() -> Self {
        Self {
            weights: vec![0.0; GENOME_LEN],
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            weights: (0..GENOME_LEN).map(|_| rng.random_range(-GENE_LIMIT..=GENE_LIMIT)).collect(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_file_text(&self) -> String {
        let mut out = String::from(ANN_HEADER);
        out.push('\n');
        for w in &self.weights {
            let _ = writeln!(out, "{w:?}");
        }
        out
    }

    pub fn from_file_text(text: &str) -> Result<Self, NeuroError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == ANN_HEADER => {}
            Some((i, _)) => {
                return Err(NeuroError::Format {
                    line: i + 1,
                    message: format!("expected `{ANN_HEADER}` header"),
                })
            }
            None => {
                return Err(NeuroError::Format {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let weights = lines
            .map(|(i, l)| {
                l.trim().parse::<f64>().map_err(|_| NeuroError::Format {
                    line: i + 1,
                    message: format!("`{}` is not a number", l.trim()),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Genome::new(weights)
    }
}

pub fn ann_inputs(snap: &SensorSnapshot) -> AnnInputs {
    let mut x = [0.0; N_INPUTS];
    x[..RAY_COUNT].copy_from_slice(&snap.prox_rays);
    x[RAY_COUNT..2 * RAY_COUNT].copy_from_slice(&snap.light_rays);
    let ground = 2 * RAY_COUNT;
    x[ground + match snap.gnd {
        FloorColor::Black => 0,
        FloorColor::Gray => 1,
        FloorColor::White => 2,
    }] = 1.0;
    if snap.swarm_size > 1 {
        x[ground + 3] = (snap.neighbors as f64 / (snap.swarm_size - 1) as f64).min(1.0);
    }
    for k in 0..4 {
        let c = (snap.rab.angle - k as f64 * FRAC_PI_2).cos();
        x[ground + 4 + k] = (c.max(0.0) * snap.rab.magnitude).clamp(0.0, 1.0);
    }
    x
}

/// `v_k = v_max · tanh(w_k · [x; 1])`.
pub fn forward(g: &Genome, x: &AnnInputs, spec: &PlatformSpec) -> ActuatorCommand {
    let half = N_INPUTS + 1;
    let wheel = |w: &[f64]| {
        let z: f64 = w[..N_INPUTS].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[N_INPUTS];
        spec.v_max * z.tanh()
    };
    ActuatorCommand {
        left: wheel(&g.weights[..half]),
        right: wheel(&g.weights[half..]),
    }
}

pub fn mutate<R: Rng + ?Sized>(g: &Genome, sigma: f64, rng: &mut R) -> Result<Genome, NeuroError> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(NeuroError::Sigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(g.clone());
    }
    let noise = Normal::new(0.0, sigma).expect("sigma checked");
    Ok(Genome {
        weights: g
            .weights
            .iter()
            .map(|w| (w + noise.sample(rng)).clamp(-GENE_LIMIT, GENE_LIMIT))
            .collect(),
    })
}

/// Uniform crossover: each gene comes from `a` or `b` with equal odds.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Genome {
    Genome {
        weights: a
            .weights
            .iter()
            .zip(&b.weights)
            .map(|(x, y)| if rng.random_bool(0.5) { *x } else { *y })
            .collect(),
    }
}
