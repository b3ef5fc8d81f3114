//! Synthetic data from the two-level Gaussian model, plus observation masks.
//!
//! A dataset is produced in two calls that share one stream:
//! [`sample_centers`] draws the `K x d` centers row by row, then
//! [`sample_dataset`] draws the labels (balanced shuffle, i.i.d. uniform, or
//! none for explicit labels) followed by the noise, row by row.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lloyd::Assignment;
use crate::params::ModelParams;
use crate::report::fmt_real;
use crate::rng::RngStream;

/// The `K x d` matrix of true cluster centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centers(pub Matrix);

impl Centers {
    pub fn k(&self) -> usize {
        self.0.rows()
    }

    pub fn d(&self) -> usize {
        self.0.cols()
    }

    pub fn center(&self, k: usize) -> &[f64] {
        self.0.row(k)
    }
}

/// How true labels are assigned to samples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Class sizes differ by at most one; lower class indices get the extras.
    Balanced,
    /// Each label uniform on `0..K`, independently.
    IidUniform,
    /// Caller-supplied labels (0-based). Empty classes are allowed.
    Explicit(Vec<usize>),
}

impl LabelMode {
    fn tag(&self) -> &'static str {
        match self {
            LabelMode::Balanced => "balanced",
            LabelMode::IidUniform => "iid_uniform",
            LabelMode::Explicit(_) => "explicit",
        }
    }
}

/// Where a dataset came from; written into dump headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Origin {
    pub base_seed: u64,
    pub stream_id: u64,
    pub mode: String,
}

/// Samples together with the ground truth that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    samples: Matrix,
    truth: Assignment,
    centers: Centers,
    params: ModelParams,
    origin: Option<Origin>,
}

impl Dataset {
    /// Assembles a dataset, checking shapes. `params.n`/`params.d` are
    /// overwritten with the sample matrix shape.
    pub fn new(
        samples: Matrix,
        truth: Assignment,
        centers: Centers,
        mut params: ModelParams,
    ) -> Result<Self> {
        if truth.len() != samples.rows() {
            return Err(Error::Dimension {
                expected: samples.rows(),
                actual: truth.len(),
                context: "true assignment length",
            });
        }
        if truth.k() != centers.k() {
            return Err(Error::Dimension {
                expected: centers.k(),
                actual: truth.k(),
                context: "true assignment cluster count",
            });
        }
        params.n = samples.rows();
        params.d = samples.cols();
        params.k = centers.k();
        Ok(Dataset {
            samples,
            truth,
            centers,
            params,
            origin: None,
        })
    }

    /// A dataset with no generative metadata: a single placeholder center of
    /// zeros and every sample labelled 0. Handy for hand-made inputs.
    pub fn from_samples(samples: Matrix) -> Result<Self> {
        let n = samples.rows();
        let d = samples.cols();
        if n == 0 || d == 0 {
            return Err(Error::EmptyRequest("dataset needs at least one sample and one column"));
        }
        let centers = Centers(Matrix::zeros(2, d));
        let truth = Assignment::new(vec![0; n], 2)?;
        let params = ModelParams {
            d,
            n,
            k: 2,
            tau: 1.0,
            sigma: 0.0,
        };
        Dataset::new(samples, truth, centers, params)
    }

    pub fn samples(&self) -> &Matrix {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.samples.row(i)
    }

    pub fn n(&self) -> usize {
        self.samples.rows()
    }

    pub fn d(&self) -> usize {
        self.samples.cols()
    }

    pub fn true_assignment(&self) -> &Assignment {
        &self.truth
    }

    pub fn centers(&self) -> &Centers {
        &self.centers
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn origin(&self) -> Option<&Origin> {
        self.origin.as_ref()
    }

    /// Same metadata, new sample matrix (same row count, any column count).
    pub fn with_samples(&self, samples: Matrix) -> Result<Self> {
        if samples.rows() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                actual: samples.rows(),
                context: "replacement sample count",
            });
        }
        let mut params = self.params;
        params.d = samples.cols();
        Ok(Dataset {
            samples,
            truth: self.truth.clone(),
            centers: self.centers.clone(),
            params,
            origin: self.origin.clone(),
        })
    }
}

/// Draws `K` i.i.d. centers from `N(0, tau^2 I_d)`.
pub fn sample_centers(stream: &mut RngStream, params: &ModelParams) -> Result<Centers> {
    params.validate()?;
    let mut m = Matrix::zeros(params.k, params.d);
    stream.fill_std_normal(m.as_mut_slice());
    m.as_mut_slice().iter_mut().for_each(|v| *v *= params.tau);
    Ok(Centers(m))
}

fn balanced_labels(stream: &mut RngStream, n: usize, k: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    stream.shuffle(&mut labels);
    labels
}

/// Draws `x_i = mu_{z_i} + xi_i` with `xi_i ~ N(0, sigma^2 I_d)`.
pub fn sample_dataset(
    stream: &mut RngStream,
    centers: &Centers,
    params: &ModelParams,
    mode: LabelMode,
) -> Result<Dataset> {
    params.validate()?;
    if centers.k() != params.k || centers.d() != params.d {
        return Err(Error::Dimension {
            expected: params.k * params.d,
            actual: centers.k() * centers.d(),
            context: "centers shape vs params",
        });
    }
    let (n, k, d) = (params.n, params.k, params.d);
    let labels = match &mode {
        LabelMode::Balanced => balanced_labels(stream, n, k),
        LabelMode::IidUniform => (0..n).map(|_| stream.index(k)).collect(),
        LabelMode::Explicit(l) => {
            if l.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: l.len(),
                    context: "explicit labels",
                });
            }
            l.clone()
        }
    };
    let truth = Assignment::new(labels, k)?;

    let mut samples = Matrix::zeros(n, d);
    let sigma = params.sigma;
    for i in 0..n {
        let mu = centers.center(truth.label(i));
        let row = samples.row_mut(i);
        stream.fill_std_normal(row);
        for (x, m) in row.iter_mut().zip(mu) {
            *x = m + sigma * *x;
        }
    }
    let mut ds = Dataset::new(samples, truth, centers.clone(), *params)?;
    ds.origin = Some(Origin {
        base_seed: stream.base_seed(),
        stream_id: stream.stream_id(),
        mode: mode.tag().to_string(),
    });
    Ok(ds)
}

/// Centers then samples from one stream.
pub fn sample_model(stream: &mut RngStream, params: &ModelParams, mode: LabelMode) -> Result<Dataset> {
    let centers = sample_centers(stream, params)?;
    sample_dataset(stream, &centers, params, mode)
}

/// One binary mask vector per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSet {
    masks: Vec<Vec<bool>>,
}

impl MaskSet {
    pub fn new(masks: Vec<Vec<bool>>) -> Self {
        MaskSet { masks }
    }

    /// Builds masks from 0/1 integers; anything else is a domain error.
    pub fn from_binary(rows: &[Vec<u8>]) -> Result<Self> {
        let masks = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| match v {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::Domain(format!("mask entry {other} is not binary"))),
                    })
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MaskSet { masks })
    }

    pub fn ones(n: usize, d: usize) -> Self {
        MaskSet {
            masks: vec![vec![true; d]; n],
        }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        MaskSet {
            masks: vec![vec![false; d]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

/// Element-wise product `y_i = A_i o x_i`; ground truth is carried through.
pub fn apply_mask(dataset: &Dataset, masks: &MaskSet) -> Result<Dataset> {
    if masks.len() != dataset.n() {
        return Err(Error::Dimension {
            expected: dataset.n(),
            actual: masks.len(),
            context: "mask count",
        });
    }
    let mut out = dataset.samples.clone();
    for (i, mask) in masks.masks.iter().enumerate() {
        if mask.len() != dataset.d() {
            return Err(Error::Dimension {
                expected: dataset.d(),
                actual: mask.len(),
                context: "mask length",
            });
        }
        for (x, &keep) in out.row_mut(i).iter_mut().zip(mask) {
            if !keep {
                *x = 0.0;
            }
        }
    }
    dataset.with_samples(out)
}

const DUMP_FORMAT: &str = "kmfix-dataset";
const DUMP_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct DumpHeader {
    format: String,
    version: u32,
    n: usize,
    d: usize,
    k: usize,
    params: ModelParams,
    origin: Option<Origin>,
}

/// Writes a dataset in the text dump format.
///
/// Line 1 is a JSON header (`format`, `version`, `n`, `d`, `k`, `params`,
/// `origin`). Then `k` lines `c <v_1> .. <v_d>` for the centers and `n` lines
/// `s <label> <v_1> .. <v_d>` for the samples, labels 0-based, reals in
/// 17-significant-digit scientific notation. Reading it back is bit-exact.
pub fn write_dataset<W: Write>(mut w: W, dataset: &Dataset) -> Result<()> {
    let header = DumpHeader {
        format: DUMP_FORMAT.into(),
        version: DUMP_VERSION,
        n: dataset.n(),
        d: dataset.d(),
        k: dataset.centers.k(),
        params: dataset.params,
        origin: dataset.origin.clone(),
    };
    let json = serde_json::to_string(&header).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w, "{json}")?;
    for row in dataset.centers.0.iter_rows() {
        write!(w, "c")?;
        for v in row {
            write!(w, " {}", fmt_real(*v))?;
        }
        writeln!(w)?;
    }
    for (i, row) in dataset.samples.iter_rows().enumerate() {
        write!(w, "s {}", dataset.truth.label(i))?;
        for v in row {
            write!(w, " {}", fmt_real(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn parse_reals<'a>(fields: impl Iterator<Item = &'a str>, d: usize, line: usize) -> Result<Vec<f64>> {
    let vals = fields
        .map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {line}: bad real {f:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != d {
        return Err(Error::Parse(format!(
            "line {line}: expected {d} values, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

/// Reads the format produced by [`write_dataset`].
pub fn read_dataset<R: BufRead>(r: R) -> Result<Dataset> {
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset file".into()))??;
    let header: DumpHeader =
        serde_json::from_str(&first).map_err(|e| Error::Parse(format!("header: {e}")))?;
    if header.format != DUMP_FORMAT || header.version != DUMP_VERSION {
        return Err(Error::Parse(format!(
            "unsupported dataset format {} v{}",
            header.format, header.version
        )));
    }
    let mut centers = Vec::with_capacity(header.k);
    let mut samples = Vec::with_capacity(header.n * header.d);
    let mut labels = Vec::with_capacity(header.n);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        let mut fields = line.split_ascii_whitespace();
        match fields.next() {
            Some("c") => centers.extend(parse_reals(fields, header.d, lineno)?),
            Some("s") => {
                let label = fields
                    .next()
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: missing label")))?
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {lineno}: bad label: {e}")))?;
                labels.push(label);
                samples.extend(parse_reals(fields, header.d, lineno)?);
            }
            None => continue,
            Some(tag) => return Err(Error::Parse(format!("line {lineno}: unknown record {tag:?}"))),
        }
    }
    if labels.len() != header.n || centers.len() != header.k * header.d {
        return Err(Error::Parse(format!(
            "record count mismatch: {} samples and {} center values",
            labels.len(),
            centers.len()
        )));
    }
    let mut ds = Dataset::new(
        Matrix::from_vec(header.n, header.d, samples)?,
        Assignment::new(labels, header.k)?,
        Centers(Matrix::from_vec(header.k, header.d, centers)?),
        header.params,
    )?;
    ds.origin = header.origin;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn center_norms_concentrate() {
        let p = ModelParams::new(100_000, 2, 2, 1.0, 1.0).unwrap();
        let c = sample_centers(&mut derive_stream(1, 1), &p).unwrap();
        for k in 0..2 {
            let sq: f64 = c.center(k).iter().map(|v| v * v).sum();
            assert!((sq / 1e5 - 1.0).abs() < 0.04);
        }
        assert_ne!(c.center(0), c.center(1));
    }

    #[test]
    fn tau_scales_centers() {
        let p1 = ModelParams::new(8, 2, 2, 1.0, 1.0).unwrap();
        let p2 = ModelParams { tau: 2.0, ..p1 };
        let a = sample_centers(&mut derive_stream(3, 0), &p1).unwrap();
        let b = sample_centers(&mut derive_stream(3, 0), &p2).unwrap();
        for (x, y) in a.0.as_slice().iter().zip(b.0.as_slice()) {
            assert_eq!(2.0 * x, *y);
        }
    }

    #[test]
    fn zero_noise_puts_samples_on_centers() {
        let p = ModelParams::new(5, 9, 3, 1.0, 0.0).unwrap();
        let ds = sample_model(&mut derive_stream(4, 4), &p, LabelMode::IidUniform).unwrap();
        for i in 0..ds.n() {
            assert_eq!(ds.sample(i), ds.centers().center(ds.true_assignment().label(i)));
        }
    }

    #[test]
    fn balanced_sizes() {
        let p = ModelParams::new(2, 40, 2, 1.0, 1.0).unwrap();
        let ds = sample_model(&mut derive_stream(5, 0), &p, LabelMode::Balanced).unwrap();
        assert_eq!(ds.true_assignment().sizes(), vec![20, 20]);
        let p = ModelParams { n: 41, ..p };
        let ds = sample_model(&mut derive_stream(5, 0), &p, LabelMode::Balanced).unwrap();
        assert_eq!(ds.true_assignment().sizes(), vec![21, 20]);
    }

    #[test]
    fn iid_uniform_class_size_mean() {
        let p = ModelParams::new(1, 40, 2, 1.0, 1.0).unwrap();
        let reps = 10_000;
        let total: usize = (0..reps)
            .map(|r| {
                let ds = sample_model(&mut derive_stream(6, r), &p, LabelMode::IidUniform).unwrap();
                ds.true_assignment().sizes()[0]
            })
            .sum();
        let mean = total as f64 / reps as f64;
        // sd of the mean is sqrt(10)/100 ~ 0.032; 0.2 is > 6 sd
        assert!((mean - 20.0).abs() < 0.2, "{mean}");
    }

    #[test]
    fn explicit_labels_kept_and_checked() {
        let p = ModelParams::new(3, 4, 2, 1.0, 0.5).unwrap();
        let c = sample_centers(&mut derive_stream(7, 0), &p).unwrap();
        let ds = sample_dataset(&mut derive_stream(7, 1), &c, &p, LabelMode::Explicit(vec![1, 1, 1, 1])).unwrap();
        assert_eq!(ds.true_assignment().labels(), &[1, 1, 1, 1]);
        assert!(sample_dataset(&mut derive_stream(7, 1), &c, &p, LabelMode::Explicit(vec![0; 3])).is_err());
        assert!(sample_dataset(&mut derive_stream(7, 1), &c, &p, LabelMode::Explicit(vec![0, 0, 0, 2])).is_err());
    }

    #[test]
    fn noise_variance_matches_sigma2() {
        let p = ModelParams::new(4, 20_000, 2, 1.0, 1.5).unwrap();
        let c = sample_centers(&mut derive_stream(8, 0), &p).unwrap();
        let ds = sample_dataset(&mut derive_stream(8, 1), &c, &p, LabelMode::Explicit(vec![0; 20_000])).unwrap();
        for j in 0..4 {
            let mu = c.center(0)[j];
            let var = (0..ds.n()).map(|i| (ds.sample(i)[j] - mu).powi(2)).sum::<f64>() / ds.n() as f64;
            // relative sd of the estimate is sqrt(2/n) = 0.01
            assert!((var / 2.25 - 1.0).abs() < 0.05, "coord {j}: {var}");
        }
    }

    fn small() -> Dataset {
        Dataset::from_samples(Matrix::from_rows(&[vec![3.0, 5.0], vec![-1.0, 2.0]]).unwrap()).unwrap()
    }

    #[test]
    fn masks() {
        let ds = small();
        assert_eq!(apply_mask(&ds, &MaskSet::ones(2, 2)).unwrap(), ds);
        let z = apply_mask(&ds, &MaskSet::zeros(2, 2)).unwrap();
        assert!(z.samples().as_slice().iter().all(|v| *v == 0.0));
        let m = MaskSet::from_binary(&[vec![1, 0], vec![0, 1]]).unwrap();
        let y = apply_mask(&ds, &m).unwrap();
        assert_eq!(y.sample(0), &[3.0, 0.0]);
        assert_eq!(y.sample(1), &[0.0, 2.0]);
        assert_eq!(apply_mask(&y, &m).unwrap(), y);
        assert_eq!(y.true_assignment(), ds.true_assignment());
    }

    #[test]
    fn mask_errors() {
        let ds = small();
        assert!(apply_mask(&ds, &MaskSet::ones(3, 2)).is_err());
        assert!(apply_mask(&ds, &MaskSet::ones(2, 3)).is_err());
        assert!(MaskSet::from_binary(&[vec![2]]).is_err());
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let p = ModelParams::new(7, 11, 3, 0.7, 1.3).unwrap();
        let ds = sample_model(&mut derive_stream(99, 5), &p, LabelMode::Balanced).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        let back = read_dataset(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, ds);
        let bits = |m: &Matrix| m.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.samples()), bits(ds.samples()));
        assert_eq!(back.origin().unwrap().mode, "balanced");
    }

    #[test]
    fn dump_rejects_garbage() {
        assert!(read_dataset(std::io::Cursor::new("")).is_err());
        assert!(read_dataset(std::io::Cursor::new("{\"format\":\"x\"}\n")).is_err());
    }
}
