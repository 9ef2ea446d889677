//! Toy 2-D datasets over the unit box, plus the "meaningless" class.
//!
//! Every generator lays its shapes out in a canonical coordinate frame,
//! adds Gaussian noise there, then maps through a *fixed* affine transform
//! into `[0,1]^2` and clamps. Because the transform does not depend on the
//! sampled points, the zero-noise geometry is exactly recoverable, which
//! the tests exploit.
//!
//! The "meaningless" augmentation appends one extra class of uniform
//! random points. Classifiers trained with it can map junk inputs to a
//! junk class instead of being forced to pick a real one; attack starts
//! drawn uniformly at random are labeled with this class.

use crate::error::{Error, Result};
use crate::vecmath;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::path::Path;

/// Name given to the appended junk class.
pub const MEANINGLESS_CLASS: &str = "meaningless";

// Two-moons canonical frame is x in [-1, 2], y in [-0.5, 1]; the affine
// map below embeds it in the unit box with a 0.15 margin on each side.
const MOON_X_OFF: f64 = 1.15;
const MOON_X_SCALE: f64 = 3.3;
const MOON_Y_OFF: f64 = 0.65;
const MOON_Y_SCALE: f64 = 1.8;

/// Labeled points in `[0,1]^D`. Plain data: fields are public and the
/// invariants (equal lengths, labels within range) are enforced by the
/// constructors and the file reader.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Input dimensionality; 0 for an empty dataset.
    pub fn dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// Two interleaved half-circles.
    TwoMoons,
    /// Two Gaussian clusters on the unit-box diagonal.
    Blobs,
    /// Two concentric circles.
    Rings,
}

#[derive(Debug, Clone)]
pub struct DataConfig {
    pub kind: DataKind,
    pub n_per_class: usize,
    /// Standard deviation of the Gaussian jitter, in canonical coordinates.
    pub noise_scale: f64,
    /// Uniform junk points appended, as a fraction of the base rows
    /// (rounded up). Zero still appends the class name.
    pub meaningless_fraction: f64,
    pub rng_seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            kind: DataKind::TwoMoons,
            n_per_class: 200,
            noise_scale: 0.12,
            meaningless_fraction: 0.1,
            rng_seed: 0,
        }
    }
}

/// Generates a two-class dataset and appends the meaningless class.
///
/// Deterministic in `cfg.rng_seed`; the noise draws happen even when
/// `noise_scale` is zero, so datasets differing only in scale share the
/// same underlying sample.
pub fn generate(cfg: &DataConfig) -> Result<Dataset> {
    if cfg.n_per_class == 0 {
        return Err(Error::InvalidConfig(
            "n_per_class must be at least 1".into(),
        ));
    }
    if !(cfg.noise_scale >= 0.0 && cfg.noise_scale.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise_scale must be nonnegative and finite, got {}",
            cfg.noise_scale
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let n = cfg.n_per_class;
    let mut inputs = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);

    let mut push =
        |point: [f64; 2], label: usize, rng: &mut ChaCha8Rng, map: fn([f64; 2]) -> [f64; 2]| {
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            let jittered = [
                point[0] + cfg.noise_scale * nx,
                point[1] + cfg.noise_scale * ny,
            ];
            let mut mapped = map(jittered).to_vec();
            vecmath::clamp_unit(&mut mapped);
            inputs.push(mapped);
            labels.push(label);
        };

    let class_names: Vec<String> = match cfg.kind {
        DataKind::TwoMoons => {
            for i in 0..n {
                let t = if n == 1 {
                    0.0
                } else {
                    std::f64::consts::PI * i as f64 / (n - 1) as f64
                };
                push([t.cos(), t.sin()], 0, &mut rng, moon_to_unit);
                push([1.0 - t.cos(), 0.5 - t.sin()], 1, &mut rng, moon_to_unit);
            }
            vec!["moon0".into(), "moon1".into()]
        }
        DataKind::Blobs => {
            for _ in 0..n {
                push([0.3, 0.3], 0, &mut rng, identity_map);
                push([0.7, 0.7], 1, &mut rng, identity_map);
            }
            vec!["blob0".into(), "blob1".into()]
        }
        DataKind::Rings => {
            for i in 0..n {
                let theta = std::f64::consts::TAU * i as f64 / n as f64;
                let (s, c) = theta.sin_cos();
                push([0.5 + 0.15 * c, 0.5 + 0.15 * s], 0, &mut rng, identity_map);
                push([0.5 + 0.35 * c, 0.5 + 0.35 * s], 1, &mut rng, identity_map);
            }
            vec!["inner".into(), "outer".into()]
        }
    };

    let base = Dataset {
        inputs,
        labels,
        class_names,
    };
    let mut out = augment_meaningless_with_rng(&base, cfg.meaningless_fraction, &mut rng)?;
    // Keep generation order stable: base rows first, junk rows last.
    debug_assert_eq!(
        out.class_names.last().map(String::as_str),
        Some(MEANINGLESS_CLASS)
    );
    out.class_names.shrink_to_fit();
    Ok(out)
}

fn moon_to_unit(p: [f64; 2]) -> [f64; 2] {
    [
        (p[0] + MOON_X_OFF) / MOON_X_SCALE,
        (p[1] + MOON_Y_OFF) / MOON_Y_SCALE,
    ]
}

/// Inverse of the two-moons embedding; exposed for tests and plotting.
pub fn unit_to_moon(p: [f64; 2]) -> [f64; 2] {
    [
        p[0] * MOON_X_SCALE - MOON_X_OFF,
        p[1] * MOON_Y_SCALE - MOON_Y_OFF,
    ]
}

fn identity_map(p: [f64; 2]) -> [f64; 2] {
    p
}

/// Appends a `meaningless` class of `ceil(fraction * len)` uniform points.
pub fn augment_meaningless(data: &Dataset, fraction: f64, rng_seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    augment_meaningless_with_rng(data, fraction, &mut rng)
}

fn augment_meaningless_with_rng(
    data: &Dataset,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Dataset> {
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "meaningless fraction must be nonnegative and finite, got {fraction}"
        )));
    }
    if data.class_names.iter().any(|n| n == MEANINGLESS_CLASS) {
        return Err(Error::InvalidConfig(
            "dataset already has a meaningless class".into(),
        ));
    }
    if data.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot augment an empty dataset".into(),
        ));
    }
    let mut out = data.clone();
    let junk_label = out.class_names.len();
    out.class_names.push(MEANINGLESS_CLASS.to_string());
    let count = (fraction * data.len() as f64).ceil() as usize;
    let dim = data.dim();
    for _ in 0..count {
        let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        out.inputs.push(x);
        out.labels.push(junk_label);
    }
    Ok(out)
}

/// Seeded shuffle followed by a proportional split. The train part gets
/// `round(train_fraction * len)` rows, clamped so both parts are nonempty.
pub fn split(data: &Dataset, train_fraction: f64, rng_seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must lie strictly between 0 and 1, got {train_fraction}"
        )));
    }
    if data.len() < 2 {
        return Err(Error::InvalidConfig("need at least 2 rows to split".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let n_train = ((train_fraction * data.len() as f64).round() as usize).clamp(1, data.len() - 1);
    let pick = |idx: &[usize]| Dataset {
        inputs: idx.iter().map(|&i| data.inputs[i].clone()).collect(),
        labels: idx.iter().map(|&i| data.labels[i]).collect(),
        class_names: data.class_names.clone(),
    };
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

/// Writes the dataset as delimited text: a header of the dimension
/// followed by the class names, then one row per point (coordinates, then
/// the integer label). Floats carry 17 significant digits, so a round
/// trip is bit-exact.
pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    if let Some(bad) = data
        .class_names
        .iter()
        .find(|n| n.contains(',') || n.contains('\n') || n.is_empty())
    {
        return Err(Error::InvalidConfig(format!(
            "class name {bad:?} cannot be stored in a comma-delimited file"
        )));
    }
    let mut out = String::new();
    out.push_str(&data.dim().to_string());
    for name in &data.class_names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for (x, &label) in data.inputs.iter().zip(&data.labels) {
        for (i, v) in x.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        let _ = writeln!(out, ",{label}");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`save_dataset`], validating dimensions,
/// label range, finiteness, and the unit-box domain.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fail = |reason: String| Error::DatasetFormat {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fail("empty file".into()))?;
    let mut fields = header.split(',');
    let dim: usize = fields
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| fail("header must start with the input dimension".into()))?;
    if dim == 0 {
        return Err(fail("input dimension must be positive".into()));
    }
    let class_names: Vec<String> = fields.map(str::to_string).collect();
    if class_names.len() < 2 {
        return Err(fail(format!(
            "need at least 2 class names in the header, got {}",
            class_names.len()
        )));
    }

    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let human = lineno + 2; // 1-based, after the header
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != dim + 1 {
            return Err(fail(format!(
                "line {human}: expected {} fields, got {}",
                dim + 1,
                parts.len()
            )));
        }
        let mut x = Vec::with_capacity(dim);
        for part in &parts[..dim] {
            let v: f64 = part
                .trim()
                .parse()
                .map_err(|_| fail(format!("line {human}: bad float {part:?}")))?;
            if !v.is_finite() {
                return Err(fail(format!("line {human}: non-finite coordinate")));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(fail(format!("line {human}: coordinate {v} outside [0,1]")));
            }
            x.push(v);
        }
        let label: usize = parts[dim]
            .trim()
            .parse()
            .map_err(|_| fail(format!("line {human}: bad label {:?}", parts[dim])))?;
        if label >= class_names.len() {
            return Err(fail(format!(
                "line {human}: label {label} out of range for {} classes",
                class_names.len()
            )));
        }
        inputs.push(x);
        labels.push(label);
    }
    Ok(Dataset {
        inputs,
        labels,
        class_names,
    })
}
