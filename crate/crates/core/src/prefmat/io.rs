use std::path::Path;

use super::PreferenceMatrix;
use crate::error::{Error, Result};
use crate::numfmt;
use crate::scalar::Scalar;

/// Significant digits used when writing matrix entries.
pub const MATRIX_DIGITS: usize = 17;

/// Parses a headerless CSV of `K` rows by `K` decimals and validates it (ties allowed).
pub fn parse_matrix_csv<T: Scalar>(text: &str) -> Result<PreferenceMatrix<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Csv(format!("line {}: {field:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    PreferenceMatrix::from_rows_validated(rows, false)
}

pub fn read_matrix_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<PreferenceMatrix<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_csv(&text)
}

pub fn matrix_to_csv<T: Scalar>(m: &PreferenceMatrix<T>) -> String {
    let mut out = String::new();
    for row in m.as_square().rows() {
        let fields: Vec<String> = row
            .iter()
            .map(|v| numfmt::significant(v.as_f64(), MATRIX_DIGITS))
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix_csv<T: Scalar>(m: &PreferenceMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, matrix_to_csv(m)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::super::{fixtures, random_matrix};
    use super::*;

    #[test]
    fn p4_round_trips() {
        let m = fixtures::p4::<f64>();
        let text = matrix_to_csv(&m);
        assert!(text.starts_with("0.50000000000000000,0.59999999999999998,"));
        assert_eq!(parse_matrix_csv::<f64>(&text).unwrap(), m);
    }

    #[test]
    fn loader_validates() {
        let err = parse_matrix_csv::<f64>("0.5,0.6\n0.6,0.5\n").unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
        assert!(parse_matrix_csv::<f64>("0.5,abc\n0.5,0.5\n").is_err());
        assert!(parse_matrix_csv::<f64>("0.5, 0.7\n 0.3 ,0.5\n\n").is_ok());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("copeland-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        write_matrix_csv(&fixtures::pcond5::<f64>(), &path).unwrap();
        assert_eq!(read_matrix_csv::<f64>(&path).unwrap(), fixtures::pcond5());
        assert!(read_matrix_csv::<f64>(dir.join("missing.csv")).is_err());
    }

    proptest! {
        #[test]
        fn random_matrices_round_trip(seed in any::<u64>(), k in 2usize..12) {
            let m = random_matrix(k, &mut ChaCha8Rng::seed_from_u64(seed), 1e-3f64).unwrap();
            prop_assert_eq!(parse_matrix_csv::<f64>(&matrix_to_csv(&m)).unwrap(), m);
        }
    }
}
