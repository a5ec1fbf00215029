use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Dataset, Example};
use crate::error::{Error, Result};

/// Reads a CSV with a header row; the last column is an integer label and
/// every other column a real feature.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let width = reader.headers()?.len();
    if width < 2 {
        return Err(Error::invalid("csv needs at least one feature column and a label column"));
    }
    let mut examples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("row {}: column {i} is not a number", row + 1)))
        };
        let features = (0..width - 1).map(parse).collect::<Result<Vec<f64>>>()?;
        if features.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid(format!("row {}: non-finite feature", row + 1)));
        }
        let label = record[width - 1]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::invalid(format!("row {}: label is not a non-negative integer", row + 1)))?;
        examples.push(Example { features, label });
    }
    if examples.is_empty() {
        return Err(Error::invalid("csv has no data rows"));
    }
    let classes = examples.iter().map(|e| e.label).max().unwrap_or(0) + 1;
    Ok(Dataset { dim: width - 1, classes: classes.max(2), examples })
}

/// Seeded shuffle, then the last `test_fraction` of rows become the test set.
pub fn split_train_test<R: Rng + ?Sized>(
    mut data: Dataset,
    test_fraction: f64,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::invalid("test_fraction must lie in [0, 1)"));
    }
    data.examples.shuffle(rng);
    let test_len = ((data.len() as f64) * test_fraction).round() as usize;
    if test_len == 0 || test_len == data.len() {
        return Err(Error::invalid("split leaves an empty train or test set"));
    }
    let test = data.examples.split_off(data.len() - test_len);
    let test = Dataset { dim: data.dim, classes: data.classes, examples: test };
    Ok((data, test))
}
