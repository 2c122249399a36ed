use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numfmt::significant;
use crate::oracle::{Checkpoint, RegretTrace};

pub const TRACE_HEADER: &str = "algorithm,replicate,step,cumulative_regret";
/// Significant digits of the regret column.
pub const TRACE_DIGITS: usize = 12;

/// Renders traces as CSV rows sorted by algorithm, replicate and step.
pub fn traces_to_csv(traces: &[RegretTrace]) -> String {
    let mut rows: Vec<(&str, u32, u64, f64)> = traces
        .iter()
        .flat_map(|t| {
            t.checkpoints.iter().map(move |c| {
                (
                    t.algorithm.as_str(),
                    t.replicate,
                    c.step,
                    c.cumulative_regret,
                )
            })
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (alg, rep, step, regret) in rows {
        writeln!(
            out,
            "{alg},{rep},{step},{}",
            significant(regret, TRACE_DIGITS)
        )
        .expect("string write");
    }
    out
}

pub fn write_traces(traces: &[RegretTrace], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, traces_to_csv(traces)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a trace CSV back into one trace per `(algorithm, replicate)`.
///
/// Seeds and matrix ids are not part of the schema and come back empty.
pub fn parse_traces(text: &str) -> Result<Vec<RegretTrace>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>().join(",") != TRACE_HEADER {
        return Err(Error::Csv(format!("expected header {TRACE_HEADER:?}")));
    }
    let mut traces: Vec<RegretTrace> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let row = line + 2;
        let field = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| Error::Csv(format!("line {row}: missing field")))
        };
        let parse_err = |what: &str| Error::Csv(format!("line {row}: bad {what}"));
        let algorithm = field(0)?;
        let replicate: u32 = field(1)?.parse().map_err(|_| parse_err("replicate"))?;
        let step: u64 = field(2)?.parse().map_err(|_| parse_err("step"))?;
        let cumulative_regret: f64 = field(3)?
            .parse()
            .map_err(|_| parse_err("cumulative_regret"))?;
        let checkpoint = Checkpoint {
            step,
            cumulative_regret,
        };
        match traces.last_mut() {
            Some(t) if t.algorithm == algorithm && t.replicate == replicate => {
                t.checkpoints.push(checkpoint)
            }
            _ => traces.push(RegretTrace {
                algorithm: algorithm.to_string(),
                replicate,
                seed: 0,
                matrix_id: String::new(),
                checkpoints: vec![checkpoint],
            }),
        }
    }
    Ok(traces)
}

pub fn read_traces(path: impl AsRef<Path>) -> Result<Vec<RegretTrace>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_traces(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(alg: &str, rep: u32, points: &[(u64, f64)]) -> RegretTrace {
        RegretTrace {
            algorithm: alg.into(),
            replicate: rep,
            seed: 0,
            matrix_id: String::new(),
            checkpoints: points
                .iter()
                .map(|&(step, cumulative_regret)| Checkpoint {
                    step,
                    cumulative_regret,
                })
                .collect(),
        }
    }

    #[test]
    fn sorted_with_exact_header() {
        let ts = vec![
            trace("rucb", 0, &[(1, 0.5), (2, 1.0)]),
            trace("ccb", 1, &[(1, 0.0)]),
            trace("ccb", 0, &[(1, 1.0 / 3.0)]),
        ];
        let csv = traces_to_csv(&ts);
        assert_eq!(
            csv,
            "algorithm,replicate,step,cumulative_regret\n\
             ccb,0,1,0.333333333333\nccb,1,1,0.00000000000\n\
             rucb,0,1,0.500000000000\nrucb,0,2,1.00000000000\n"
        );
    }

    #[test]
    fn round_trip() {
        let ts = vec![
            trace("ccb", 0, &[(1, 0.25), (5, 3.5), (100, 12.125)]),
            trace("scb", 2, &[(1, 0.0), (1000, 1234.5)]),
        ];
        assert_eq!(parse_traces(&traces_to_csv(&ts)).unwrap(), ts);
    }

    #[test]
    fn rejects_wrong_header_and_reports_line() {
        assert!(parse_traces("alg,rep,step,regret\n").is_err());
        let err =
            parse_traces("algorithm,replicate,step,cumulative_regret\nccb,0,1,0\nccb,x,2,0\n")
                .unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
