//! False-data-injection signals on weak-defense channels.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{GaussianSampler, Mat, Vector};
use crate::model::EnhancedSensor;

#[derive(Debug, Clone, PartialEq)]
pub enum AttackKind {
    /// White Gaussian noise with the given covariance.
    Gaussian { cov: Mat, sampler: GaussianSampler },
    /// `value` on steps `start <= k < end`, zero elsewhere.
    Pulse { start: usize, end: usize, value: Vector },
    Constant { value: Vector },
    /// Pre-recorded trace; line index is the step.
    File { path: PathBuf, trace: AttackTrace },
    None { dim: usize },
}

/// Attack signal definition for one weak sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    pub sensor_id: usize,
    pub kind: AttackKind,
}

impl AttackSpec {
    pub fn gaussian(sensor_id: usize, cov: Mat) -> Result<Self> {
        let sampler = GaussianSampler::new(&cov)
            .map_err(|e| Error::Config(format!("attack on sensor {sensor_id}: {e}")))?;
        Ok(Self { sensor_id, kind: AttackKind::Gaussian { cov, sampler } })
    }

    pub fn pulse(sensor_id: usize, start: usize, end: usize, value: Vector) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!(
                "attack on sensor {sensor_id}: pulse start {start} after end {end}"
            )));
        }
        Ok(Self { sensor_id, kind: AttackKind::Pulse { start, end, value } })
    }

    pub fn constant(sensor_id: usize, value: Vector) -> Self {
        Self { sensor_id, kind: AttackKind::Constant { value } }
    }

    pub fn none(sensor_id: usize, dim: usize) -> Self {
        Self { sensor_id, kind: AttackKind::None { dim } }
    }

    pub fn from_file(sensor_id: usize, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let trace = AttackTrace::read(&path)?;
        Ok(Self { sensor_id, kind: AttackKind::File { path, trace } })
    }

    /// Dimension of the attack vector, when the kind fixes it.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            AttackKind::Gaussian { cov, .. } => Some(cov.nrows()),
            AttackKind::Pulse { value, .. } | AttackKind::Constant { value } => Some(value.len()),
            AttackKind::File { trace, .. } => trace.steps.first().map(|v| v.len()),
            AttackKind::None { dim } => Some(*dim),
        }
    }

    /// Gaussian covariance, if this is a white-noise attack.
    pub fn gaussian_cov(&self) -> Option<&Mat> {
        match &self.kind {
            AttackKind::Gaussian { cov, .. } => Some(cov),
            _ => None,
        }
    }
}

/// `θ_i(k)` for `k = 0..=K`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttackTrace {
    pub steps: Vec<Vector>,
}

impl AttackTrace {
    /// Parses one whitespace-separated vector per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        let mut dim = None;
        for (line_no, line) in text.lines().enumerate() {
            let vals = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|e| Error::Input(format!("attack trace line {}: {e}", line_no + 1)))
                })
                .collect::<Result<Vec<f64>>>()?;
            match dim {
                None => dim = Some(vals.len()),
                Some(d) if d != vals.len() => {
                    return Err(Error::Input(format!(
                        "attack trace line {}: expected {d} values, found {}",
                        line_no + 1,
                        vals.len()
                    )))
                }
                _ => {}
            }
            if vals.is_empty() {
                return Err(Error::Input(format!("attack trace line {} is empty", line_no + 1)));
            }
            steps.push(Vector::from_vec(vals));
        }
        Ok(Self { steps })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("attack trace {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Draws a whole trace for steps `0..=horizon`.
    pub fn generate<R: Rng + ?Sized>(spec: &AttackSpec, horizon: usize, rng: &mut R) -> Result<Self> {
        let steps = (0..=horizon).map(|k| generate_attack(spec, k, rng)).collect::<Result<_>>()?;
        Ok(Self { steps })
    }

    pub fn at(&self, k: usize) -> &Vector {
        &self.steps[k]
    }
}

/// `θ_i(k)`. Every kind except a file trace is zero at `k = 0`.
pub fn generate_attack<R: Rng + ?Sized>(spec: &AttackSpec, k: usize, rng: &mut R) -> Result<Vector> {
    if let AttackKind::File { path, trace } = &spec.kind {
        return trace.steps.get(k).cloned().ok_or_else(|| {
            Error::Input(format!(
                "attack trace {} has {} steps, step {k} requested",
                path.display(),
                trace.steps.len()
            ))
        });
    }
    let dim = spec.dim().unwrap_or(0);
    if k == 0 {
        return Ok(Vector::zeros(dim));
    }
    Ok(match &spec.kind {
        AttackKind::Gaussian { sampler, .. } => sampler.sample(rng),
        AttackKind::Pulse { start, end, value } => {
            if (*start..*end).contains(&k) {
                value.clone()
            } else {
                Vector::zeros(dim)
            }
        }
        AttackKind::Constant { value } => value.clone(),
        AttackKind::None { dim } => Vector::zeros(*dim),
        AttackKind::File { .. } => unreachable!(),
    })
}

/// `y^a = y^o + θ`.
pub fn inject_attack(y_o: &Vector, theta: &Vector) -> Result<Vector> {
    if y_o.len() != theta.len() {
        return Err(Error::dim("attack injection", (y_o.len(), 1), (theta.len(), 1)));
    }
    Ok(y_o + theta)
}

/// Stacks the attacked weak measurement above the strong measurements.
pub fn assemble_measurement(enh: &EnhancedSensor, y_weak: &Vector, y_strongs: &[Vector]) -> Result<Vector> {
    if y_weak.len() != enh.p() {
        return Err(Error::dim("weak measurement", (enh.p(), 1), (y_weak.len(), 1)));
    }
    if y_strongs.len() != enh.strong_ids.len() {
        return Err(Error::dim("strong measurement count", (enh.strong_ids.len(), 1), (y_strongs.len(), 1)));
    }
    let m = y_weak.len() + y_strongs.iter().map(|v| v.len()).sum::<usize>();
    if m != enh.m() {
        return Err(Error::dim("enhanced measurement", (enh.m(), 1), (m, 1)));
    }
    let mut out = Vector::zeros(m);
    out.rows_mut(0, y_weak.len()).copy_from(y_weak);
    let mut r = y_weak.len();
    for y in y_strongs {
        out.rows_mut(r, y.len()).copy_from(y);
        r += y.len();
    }
    Ok(out)
}
