//! Labelled tabular datasets for the classifier benchmark.

use std::path::Path;

use crate::error::{Error, Result};

use super::{forward, Topology};

const IRIS_CSV: &str = include_str!("../../data/iris.csv");
const CANCER_CSV: &str = include_str!("../../data/cancer.csv");

/// Min-max scaled features with one-hot targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    /// Distinct labels in sorted order; target `k` is hot for `classes[k]`.
    pub classes: Vec<String>,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    /// Scales every feature column to `[0, 1]` (constant columns become 0) and
    /// one-hot encodes the labels.
    pub fn from_raw(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if rows.is_empty() || rows.len() != labels.len() {
            return Err(Error::invalid("dataset needs at least one row and one label per row"));
        }
        let d = feature_names.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("every row must have one value per feature"));
        }
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for r in &rows {
            for (j, &v) in r.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let inputs = rows
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if hi[j] > lo[j] {
                            (v - lo[j]) / (hi[j] - lo[j])
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();

        let mut classes = labels.clone();
        classes.sort();
        classes.dedup();
        let targets = labels
            .iter()
            .map(|l| {
                let k = classes.binary_search(l).expect("label in class list");
                (0..classes.len()).map(|c| if c == k { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        Ok(Self {
            feature_names,
            classes,
            inputs,
            targets,
        })
    }

    /// Reads a CSV with a header row; the last column is the class label.
    pub fn load_csv(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingDataset {
                path: path.to_path_buf(),
            });
        }
        Self::parse_csv(std::fs::File::open(path)?, path)
    }

    /// Copy of the named dataset (`iris` or `cancer`) shipped with the crate.
    pub fn bundled(name: &str) -> Result<Self> {
        let text = match name {
            "iris" => IRIS_CSV,
            "cancer" => CANCER_CSV,
            _ => return Err(Error::invalid(format!("no bundled dataset named {name:?}"))),
        };
        Self::parse_csv(text.as_bytes(), Path::new(name))
    }

    /// Parses CSV text; `origin` names the source in error messages.
    pub fn parse_csv<R: std::io::Read>(source: R, origin: &Path) -> Result<Self> {
        let path = origin;
        let fail = |reason: String| Error::Dataset {
            path: path.to_path_buf(),
            reason,
        };
        let mut rdr = csv::Reader::from_reader(source);
        let header = rdr.headers()?.clone();
        if header.len() < 2 {
            return Err(fail("need at least one feature column and a class column".into()));
        }
        let d = header.len() - 1;
        let feature_names = header.iter().take(d).map(str::to_string).collect();
        let (mut rows, mut labels) = (Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .take(d)
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| fail(format!("row {}: {e}", line + 2)))?;
            rows.push(row);
            labels.push(rec[d].trim().to_string());
        }
        Self::from_raw(feature_names, rows, labels).map_err(|e| fail(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn topology(&self, hidden: usize) -> Topology {
        Topology::new(self.n_features(), hidden, self.n_classes())
    }

    /// Mean squared error over samples and output nodes.
    pub fn mse(&self, flat: &[f64], topology: &Topology) -> Result<f64> {
        let mut acc = 0.0;
        for (x, t) in self.inputs.iter().zip(&self.targets) {
            let y = forward(flat, topology, x)?;
            acc += y.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        Ok(acc / (self.len() * topology.outputs) as f64)
    }

    /// Fraction of samples whose largest output matches the hot target.
    pub fn accuracy(&self, flat: &[f64], topology: &Topology) -> Result<f64> {
        let argmax = |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i);
        let mut hits = 0;
        for (x, t) in self.inputs.iter().zip(&self.targets) {
            if argmax(&forward(flat, topology, x)?) == argmax(t) {
                hits += 1;
            }
        }
        Ok(hits as f64 / self.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    #[test]
    fn scaling_and_one_hot() {
        let d = Dataset::from_raw(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![2.0, 5.0]],
            vec!["y".into(), "x".into(), "y".into()],
        )
        .unwrap();
        assert_eq!(d.inputs, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.0]]);
        assert_eq!(d.classes, vec!["x", "y"]);
        assert_eq!(d.targets[0], vec![0.0, 1.0]);
        assert_eq!(d.targets[1], vec![1.0, 0.0]);
    }

    #[test]
    fn zero_network_mse_on_one_hot() {
        let d = Dataset::from_raw(
            vec!["a".into()],
            vec![vec![0.0], vec![1.0]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let t = d.topology(3);
        // every output 0 against one-hot targets: one error of 1 per sample over 2 outputs
        assert_eq!(d.mse(&vec![0.0; t.genome_length()], &t).unwrap(), 0.5);
    }

    #[test]
    fn bundled_iris_and_missing_file() {
        let iris = Dataset::load_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/iris.csv")).unwrap();
        assert_eq!((iris.len(), iris.n_features(), iris.n_classes()), (150, 4, 3));
        assert!(iris.inputs.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        let cancer = Dataset::load_csv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cancer.csv")).unwrap();
        assert_eq!((cancer.len(), cancer.n_features(), cancer.n_classes()), (569, 30, 2));
        assert_eq!(Dataset::bundled("iris").unwrap(), iris);
        assert_eq!(Dataset::bundled("cancer").unwrap(), cancer);

        let err = Dataset::load_csv(Path::new("/nonexistent/iris.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/iris.csv"), "{err}");
    }

    #[test]
    fn malformed_rows_are_reported() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "a,b,class\n1,2,x\n1,oops,y").unwrap();
        let err = Dataset::load_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
    }
}
