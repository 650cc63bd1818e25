//! Dataset ingestion (CSV, MNIST IDX) and preprocessing.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use faer::Mat;

use crate::error::{Error, Result};
use crate::rng;

/// Missing-value sentinel used by the Higgs CSV.
pub const HIGGS_SENTINEL: f64 = -999.0;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMeta {
    pub source: String,
    pub feature_names: Vec<String>,
    /// Image height and width when rows are flattened images.
    pub image_shape: Option<(usize, usize)>,
    /// Preprocessing steps applied so far, in order.
    pub preprocessing: Vec<String>,
}

/// Inputs `x` (`N×d`) and labels `y`. Immutable once built; the input
/// matrix is shared between clones.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Arc<Mat<f64>>,
    pub y: Vec<f64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(x: Mat<f64>, y: Vec<f64>, meta: DatasetMeta) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::input(format!("{} rows but {} labels", x.nrows(), y.len())));
        }
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                if !x[(i, j)].is_finite() {
                    return Err(Error::input(format!("non-finite input at row {i}, column {j}")));
                }
            }
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite label at row {i}")));
        }
        Ok(Dataset {
            x: Arc::new(x),
            y,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `indices` of this dataset, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let x = Mat::from_fn(indices.len(), self.dim(), |i, j| self.x[(indices[i], j)]);
        Dataset {
            x: Arc::new(x),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            meta: self.meta.clone(),
        }
    }

    fn with_step(mut self, step: &str) -> Dataset {
        self.meta.preprocessing.push(step.to_string());
        self
    }
}

/// Column selection and label handling for [`load_csv`].
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub label_column: String,
    /// Feature columns by name; `None` takes every column except the label.
    pub feature_columns: Option<Vec<String>>,
    /// Category to label map, e.g. `s → 1, b → -1`. Without a map the label
    /// column is parsed as a number.
    pub label_map: Option<HashMap<String, f64>>,
    /// Drop rows where any selected feature equals [`HIGGS_SENTINEL`].
    pub higgs_filter: bool,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        CsvOptions {
            label_column: label_column.into(),
            ..Default::default()
        }
    }
}

/// Parses a `key:value,key:value` label map.
pub fn parse_label_map(text: &str) -> Result<HashMap<String, f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("label map entry '{pair}' is not key:value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("label map value '{v}' is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

/// Reads a comma-separated file with a mandatory header row. Row numbers in
/// errors are file line numbers (the header is line 1).
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let parse_err = |row: usize, column: &str, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column: column.to_string(),
        message,
    };
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Error::Format(format!("{}: file is empty", path.display())));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, "", e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, name, "column not found in header".into()))
    };
    let label_idx = find(&opts.label_column)?;
    let feature_idx: Vec<usize> = match &opts.feature_columns {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..headers.len()).filter(|&i| i != label_idx).collect(),
    };
    if feature_idx.is_empty() {
        return Err(Error::Format(format!("{}: no feature columns", path.display())));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 2;
        let record = record.map_err(|e| parse_err(row, "", e.to_string()))?;
        let cell = |i: usize| record.get(i).map(str::trim).ok_or_else(|| parse_err(row, &headers[i], "missing cell".into()));
        let mut features = Vec::with_capacity(feature_idx.len());
        for &i in &feature_idx {
            let text = cell(i)?;
            let v: f64 = text
                .parse()
                .map_err(|_| parse_err(row, &headers[i], format!("'{text}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(row, &headers[i], format!("'{text}' is not finite")));
            }
            features.push(v);
        }
        if opts.higgs_filter && features.contains(&HIGGS_SENTINEL) {
            continue;
        }
        let text = cell(label_idx)?;
        let label = match &opts.label_map {
            Some(map) => *map
                .get(text)
                .ok_or_else(|| parse_err(row, &headers[label_idx], format!("label '{text}' not in label map")))?,
            None => text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(row, &headers[label_idx], format!("'{text}' is not a number")))?,
        };
        values.extend(features);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Format(format!("{}: no data rows", path.display())));
    }
    let d = feature_idx.len();
    let x = Mat::from_fn(labels.len(), d, |i, j| values[i * d + j]);
    let mut meta = DatasetMeta {
        source: path.display().to_string(),
        feature_names: feature_idx.iter().map(|&i| headers[i].clone()).collect(),
        ..Default::default()
    };
    if opts.higgs_filter {
        meta.preprocessing.push("drop-sentinel-rows".into());
    }
    Dataset::new(x, labels, meta)
}

/// Writes features followed by a `label` column, with shortest round-trip
/// float formatting.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    let mut header: Vec<String> = if ds.meta.feature_names.len() == ds.dim() {
        ds.meta.feature_names.clone()
    } else {
        (0..ds.dim()).map(|j| format!("x{j}")).collect()
    };
    header.push("label".into());
    w.write_record(&header).map_err(io_err)?;
    for i in 0..ds.len() {
        let mut row: Vec<String> = (0..ds.dim()).map(|j| format!("{}", ds.x[(i, j)])).collect();
        row.push(format!("{}", ds.y[i]));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

/// Loads an MNIST image/label pair, keeping only `digits.0` and `digits.1`,
/// mapped to `labels.0` and `labels.1`.
pub fn load_mnist_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    digits: (u8, u8),
    labels: (f64, f64),
) -> Result<Dataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = fs::read(ip).map_err(|e| Error::io(ip, e))?;
    let label_bytes = fs::read(lp).map_err(|e| Error::io(lp, e))?;
    let iname = ip.display().to_string();
    let lname = lp.display().to_string();

    let magic = read_u32(&images, 0, &iname)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!("{iname}: bad image magic {magic:#010x}")));
    }
    let count = read_u32(&images, 4, &iname)? as usize;
    let rows = read_u32(&images, 8, &iname)? as usize;
    let cols = read_u32(&images, 12, &iname)? as usize;
    let pixels = rows * cols;
    if images.len() != 16 + count * pixels {
        return Err(Error::Format(format!(
            "{iname}: expected {} bytes for {count} images of {rows}x{cols}, found {}",
            16 + count * pixels,
            images.len()
        )));
    }

    let magic = read_u32(&label_bytes, 0, &lname)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format(format!("{lname}: bad label magic {magic:#010x}")));
    }
    let label_count = read_u32(&label_bytes, 4, &lname)? as usize;
    if label_bytes.len() != 8 + label_count {
        return Err(Error::Format(format!(
            "{lname}: expected {} bytes for {label_count} labels, found {}",
            8 + label_count,
            label_bytes.len()
        )));
    }
    if label_count != count {
        return Err(Error::Format(format!("{count} images but {label_count} labels")));
    }

    let keep: Vec<usize> = (0..count)
        .filter(|&i| label_bytes[8 + i] == digits.0 || label_bytes[8 + i] == digits.1)
        .collect();
    let x = Mat::from_fn(keep.len(), pixels, |r, p| images[16 + keep[r] * pixels + p] as f64);
    let y = keep
        .iter()
        .map(|&i| if label_bytes[8 + i] == digits.0 { labels.0 } else { labels.1 })
        .collect();
    let meta = DatasetMeta {
        source: iname,
        feature_names: (0..pixels).map(|p| format!("px{p}")).collect(),
        image_shape: Some((rows, cols)),
        preprocessing: vec![format!("digits {}/{}", digits.0, digits.1)],
    };
    Dataset::new(x, y, meta)
}

/// Crops a 2-pixel border from 28×28 images, rescales by 1/255 and subtracts
/// the global mean pixel value of the dataset.
pub fn preprocess_mnist(ds: &Dataset) -> Result<Dataset> {
    const SIDE: usize = 28;
    const BORDER: usize = 2;
    const OUT: usize = SIDE - 2 * BORDER;
    if ds.dim() != SIDE * SIDE || ds.meta.image_shape.is_some_and(|s| s != (SIDE, SIDE)) {
        return Err(Error::input(format!("expected 28x28 images, got {} features", ds.dim())));
    }
    if ds.is_empty() {
        return Err(Error::input("no images"));
    }
    let mut x = Mat::from_fn(ds.len(), OUT * OUT, |i, p| {
        let (r, c) = (p / OUT + BORDER, p % OUT + BORDER);
        ds.x[(i, r * SIDE + c)] / 255.0
    });
    let total = (ds.len() * OUT * OUT) as f64;
    let mut sum = 0.0;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            sum += x[(i, j)];
        }
    }
    let mean = sum / total;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            x[(i, j)] -= mean;
        }
    }
    let meta = DatasetMeta {
        feature_names: (0..OUT * OUT).map(|p| format!("px{p}")).collect(),
        image_shape: Some((OUT, OUT)),
        ..ds.meta.clone()
    };
    Ok(Dataset {
        x: Arc::new(x),
        y: ds.y.clone(),
        meta,
    }
    .with_step("crop24-scale-center"))
}

/// Divides each column by its largest absolute value; all-zero columns are
/// left as they are.
pub fn preprocess_maxabs(ds: &Dataset) -> Dataset {
    let scale: Vec<f64> = (0..ds.dim())
        .map(|j| {
            let m = (0..ds.len()).map(|i| ds.x[(i, j)].abs()).fold(0.0, f64::max);
            if m > 0.0 { m } else { 1.0 }
        })
        .collect();
    let x = Mat::from_fn(ds.len(), ds.dim(), |i, j| ds.x[(i, j)] / scale[j]);
    Dataset {
        x: Arc::new(x),
        y: ds.y.clone(),
        meta: ds.meta.clone(),
    }
    .with_step("maxabs")
}

fn permutation(len: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    rng::shuffle(&mut rng::stream(seed, stream), &mut idx);
    idx
}

/// `n` rows drawn uniformly without replacement.
pub fn subsample(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if n > ds.len() {
        return Err(Error::input(format!("cannot draw {n} samples from {}", ds.len())));
    }
    let idx = permutation(ds.len(), seed, rng::TRAIN_STREAM);
    Ok(ds.select(&idx[..n]).with_step(&format!("subsample {n} seed {seed}")))
}

/// Disjoint training and held-out subsamples. The training rows are the
/// first `n_train` of a permutation drawn from the training stream; the
/// held-out rows are the first `n_test` of the remaining pool, permuted
/// with the test stream.
pub fn train_test_split(ds: &Dataset, n_train: usize, n_test: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if n_train + n_test > ds.len() {
        return Err(Error::input(format!(
            "cannot draw {n_train} + {n_test} samples from {}",
            ds.len()
        )));
    }
    let idx = permutation(ds.len(), seed, rng::TRAIN_STREAM);
    let (train_idx, pool) = idx.split_at(n_train);
    let pool_order = permutation(pool.len(), seed, rng::TEST_STREAM);
    let test_idx: Vec<usize> = pool_order[..n_test].iter().map(|&p| pool[p]).collect();
    Ok((
        ds.select(train_idx).with_step(&format!("train {n_train} seed {seed}")),
        ds.select(&test_idx).with_step(&format!("test {n_test} seed {seed}")),
    ))
}

/// Isotropic Gaussian inputs with labels from an RBF teacher, for smoke tests
/// and sweeps without external data.
pub fn synthetic_regression(n: usize, dim: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || dim == 0 {
        return Err(Error::input("synthetic dataset needs n > 0 and dim > 0"));
    }
    let mut r = rng::stream(seed, 0);
    let mut x = Mat::zeros(n, dim);
    for i in 0..n {
        for j in 0..dim {
            x[(i, j)] = rng::standard_normal(&mut r);
        }
    }
    let centers: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..dim).map(|_| rng::standard_normal(&mut r)).collect())
        .collect();
    let weights = [1.0, -0.8, 0.6];
    let width = 2.0 * dim as f64;
    let y = (0..n)
        .map(|i| {
            let clean: f64 = centers
                .iter()
                .zip(weights)
                .map(|(c, w)| {
                    let d2: f64 = c.iter().enumerate().map(|(j, cj)| (x[(i, j)] - cj).powi(2)).sum();
                    w * (-d2 / width).exp()
                })
                .sum();
            clean + noise * rng::standard_normal(&mut r)
        })
        .collect();
    let meta = DatasetMeta {
        source: format!("synthetic n={n} dim={dim} noise={noise} seed={seed}"),
        feature_names: (0..dim).map(|j| format!("x{j}")).collect(),
        ..Default::default()
    };
    Dataset::new(x, y, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &[u8]) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::File::create(&p).unwrap().write_all(body).unwrap();
        p
    }

    fn sb_map() -> HashMap<String, f64> {
        parse_label_map("s:1,b:-1").unwrap()
    }

    #[test]
    fn csv_label_map() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", b"f1,f2,Label\n1,2,s\n3,4,b\n5,6,s\n");
        let opts = CsvOptions {
            label_map: Some(sb_map()),
            ..CsvOptions::new("Label")
        };
        let ds = load_csv(&p, &opts).unwrap();
        assert_eq!(ds.y, vec![1.0, -1.0, 1.0]);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.x[(2, 1)], 6.0);
        assert_eq!(ds.meta.feature_names, vec!["f1", "f2"]);
    }

    #[test]
    fn csv_higgs_filter() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "h.csv", b"a,b,Label\n1,-999.0,s\n2,3,b\n");
        let mut opts = CsvOptions {
            label_map: Some(sb_map()),
            ..CsvOptions::new("Label")
        };
        assert_eq!(load_csv(&p, &opts).unwrap().len(), 2);
        opts.higgs_filter = true;
        let ds = load_csv(&p, &opts).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.y, vec![-1.0]);
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = write(&dir, "e.csv", b"");
        assert!(matches!(load_csv(&empty, &CsvOptions::new("y")), Err(Error::Format(_))));
        let header_only = write(&dir, "h.csv", b"a,y\n");
        assert!(load_csv(&header_only, &CsvOptions::new("y")).is_err());

        let bad = write(&dir, "b.csv", b"a,y\n1,2\nfoo,3\n");
        match load_csv(&bad, &CsvOptions::new("y")) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
            }
            other => panic!("unexpected {other:?}"),
        }
        match load_csv(&bad, &CsvOptions::new("nope")) {
            Err(Error::Parse { column, .. }) => assert_eq!(column, "nope"),
            other => panic!("unexpected {other:?}"),
        }
        let missing = dir.path().join("missing.csv");
        let err = load_csv(&missing, &CsvOptions::new("y")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }) && err.is_data_error());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = synthetic_regression(17, 3, 0.1, 4).unwrap();
        let p = dir.path().join("rt.csv");
        write_csv(&ds, &p).unwrap();
        let back = load_csv(&p, &CsvOptions::new("label")).unwrap();
        assert_eq!(back.y, ds.y);
        assert_eq!(*back.x, *ds.x);
    }

    fn idx_images(count: u32, rows: u32, cols: u32, pixel: impl Fn(usize, usize) -> u8) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IDX_IMAGES_MAGIC, count, rows, cols] {
            b.extend(v.to_be_bytes());
        }
        for i in 0..count as usize {
            for p in 0..(rows * cols) as usize {
                b.push(pixel(i, p));
            }
        }
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend(IDX_LABELS_MAGIC.to_be_bytes());
        b.extend((labels.len() as u32).to_be_bytes());
        b.extend(labels);
        b
    }

    #[test]
    fn mnist_filter_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let imgs = write(&dir, "i", &idx_images(5, 28, 28, |i, p| ((i * 31 + p) % 256) as u8));
        let labs = write(&dir, "l", &idx_labels(&[7, 1, 9, 9, 3]));
        let ds = load_mnist_idx(&imgs, &labs, (7, 9), (1.0, -1.0)).unwrap();
        assert_eq!(ds.y, vec![1.0, -1.0, -1.0]);
        assert_eq!(ds.dim(), 784);
        assert_eq!(ds.x[(1, 10)], ((2 * 31 + 10) % 256) as f64);

        let mut bad = idx_images(5, 28, 28, |_, _| 0);
        bad[3] = 0x01;
        let bad = write(&dir, "bad", &bad);
        assert!(matches!(load_mnist_idx(&bad, &labs, (7, 9), (1.0, -1.0)), Err(Error::Format(_))));

        let short = write(&dir, "short", &idx_labels(&[7, 9]));
        assert!(matches!(load_mnist_idx(&imgs, &short, (7, 9), (1.0, -1.0)), Err(Error::Format(_))));

        let mut trunc = idx_images(5, 28, 28, |_, _| 0);
        trunc.truncate(100);
        let trunc = write(&dir, "trunc", &trunc);
        assert!(matches!(load_mnist_idx(&trunc, &labs, (7, 9), (1.0, -1.0)), Err(Error::Format(_))));
    }

    #[test]
    fn mnist_preprocessing() {
        let dir = tempfile::tempdir().unwrap();
        let imgs = write(&dir, "i", &idx_images(2, 28, 28, |i, _| if i == 0 { 0 } else { 255 }));
        let labs = write(&dir, "l", &idx_labels(&[7, 9]));
        let ds = load_mnist_idx(&imgs, &labs, (7, 9), (1.0, -1.0)).unwrap();
        let pre = preprocess_mnist(&ds).unwrap();
        assert_eq!(pre.dim(), 576);
        // images are all 0 and all 1 after scaling, so the mean is 0.5
        assert!((0..576).all(|p| pre.x[(0, p)] == -0.5 && pre.x[(1, p)] == 0.5));
        assert!(preprocess_mnist(&pre).is_err());
    }

    #[test]
    fn mnist_crop_takes_center() {
        let dir = tempfile::tempdir().unwrap();
        // border pixels 255, interior 0
        let imgs = write(&dir, "i", &idx_images(1, 28, 28, |_, p| {
            let (r, c) = (p / 28, p % 28);
            if !(2..26).contains(&r) || !(2..26).contains(&c) { 255 } else { 0 }
        }));
        let labs = write(&dir, "l", &idx_labels(&[7]));
        let ds = load_mnist_idx(&imgs, &labs, (7, 9), (1.0, -1.0)).unwrap();
        let pre = preprocess_mnist(&ds).unwrap();
        assert!((0..576).all(|p| pre.x[(0, p)] == 0.0));
    }

    #[test]
    fn maxabs_examples() {
        let x = Mat::from_fn(2, 2, |i, j| [[2.0, 0.0], [-4.0, 0.0]][i][j]);
        let ds = Dataset::new(x, vec![1.0, -1.0], DatasetMeta::default()).unwrap();
        let out = preprocess_maxabs(&ds);
        assert_eq!((out.x[(0, 0)], out.x[(1, 0)]), (0.5, -1.0));
        assert_eq!((out.x[(0, 1)], out.x[(1, 1)]), (0.0, 0.0));
        let twice = preprocess_maxabs(&out);
        assert_eq!(*twice.x, *out.x);
    }

    #[test]
    fn subsampling() {
        let ds = synthetic_regression(30, 2, 0.0, 1).unwrap();
        let all = subsample(&ds, 30, 5).unwrap();
        let mut ys = all.y.clone();
        let mut orig = ds.y.clone();
        ys.sort_by(f64::total_cmp);
        orig.sort_by(f64::total_cmp);
        assert_eq!(ys, orig);
        assert_eq!(subsample(&ds, 10, 5).unwrap().y, subsample(&ds, 10, 5).unwrap().y);
        assert!(matches!(subsample(&ds, 31, 5), Err(Error::Input(_))));
    }

    #[test]
    fn split_is_disjoint() {
        // labels are distinct, so they identify rows
        let x = Mat::from_fn(40, 1, |i, _| i as f64);
        let ds = Dataset::new(x, (0..40).map(|i| i as f64).collect(), DatasetMeta::default()).unwrap();
        let (tr, te) = train_test_split(&ds, 25, 15, 3).unwrap();
        let mut all: Vec<f64> = tr.y.iter().chain(&te.y).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, ds.y);
        assert!(train_test_split(&ds, 25, 16, 3).is_err());
    }
}
