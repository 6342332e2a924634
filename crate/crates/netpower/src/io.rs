//! File formats: edge lists, label files, switching-probability CSVs,
//! surface and degree tables, and JSON configuration sidecars.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use netpower_core::{
    parse_edge_list_with, ClassLabels, DegreeDistribution, EdgeListOptions, Graph, Label,
    SurfaceRow, SwitchProbs,
};

use crate::format::fmt_sig;
use crate::Error;

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn read_graph(path: &Path, opts: EdgeListOptions) -> Result<Graph, Error> {
    let text = read_text(path)?;
    parse_edge_list_with(&text, opts).map_err(|source| Error::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn write_graph(path: &Path, g: &Graph) -> Result<(), Error> {
    write_text(path, &g.to_edge_list())
}

/// One `A` or `B` per line.
pub fn format_labels(c: &ClassLabels) -> String {
    let mut out = String::with_capacity(2 * c.len());
    for l in c.as_slice() {
        out.push(l.as_char());
        out.push('\n');
    }
    out
}

pub fn parse_labels_text(text: &str) -> Result<ClassLabels, (usize, String)> {
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut chars = line.chars();
        match (chars.next().and_then(Label::from_char), chars.next()) {
            (Some(l), None) => labels.push(l),
            _ => return Err((i + 1, format!("expected `A` or `B`, found `{line}`"))),
        }
    }
    Ok(labels.into())
}

pub fn read_labels(path: &Path) -> Result<ClassLabels, Error> {
    let text = read_text(path)?;
    parse_labels_text(&text).map_err(|(line, message)| Error::Format {
        path: path.to_owned(),
        message: format!("line {line}: {message}"),
    })
}

pub fn write_labels(path: &Path, c: &ClassLabels) -> Result<(), Error> {
    write_text(path, &format_labels(c))
}

/// Comma-separated labels, e.g. `A,B,B`.
pub fn parse_inline_labels(spec: &str) -> Result<ClassLabels, Error> {
    spec.split(',')
        .map(|t| {
            let t = t.trim();
            let mut chars = t.chars();
            match (chars.next().and_then(Label::from_char), chars.next()) {
                (Some(l), None) => Ok(l),
                _ => Err(Error::Usage(format!(
                    "invalid label `{t}` (expected A or B)"
                ))),
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map(ClassLabels::from)
}

fn csv_string(rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing memory writer")).expect("utf-8 csv")
}

/// CSV with columns `node_id,p`. Node ids are the identifiers from the
/// source edge list when a graph is given.
pub fn format_switch_probs(p: &SwitchProbs, g: Option<&Graph>) -> String {
    let header = vec!["node_id".to_string(), "p".to_string()];
    let rows = p.as_slice().iter().enumerate().map(|(i, &pi)| {
        let id = g.map_or(i as u64, |g| g.node_id(i));
        vec![id.to_string(), fmt_sig(pi)]
    });
    csv_string(std::iter::once(header).chain(rows))
}

pub fn write_switch_probs(path: &Path, p: &SwitchProbs, g: Option<&Graph>) -> Result<(), Error> {
    write_text(path, &format_switch_probs(p, g))
}

/// Reads a `node_id,p` CSV; probabilities are taken in row order.
pub fn read_switch_probs(path: &Path) -> Result<SwitchProbs, Error> {
    let format_err = |message: String| Error::Format {
        path: path.to_owned(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| format_err(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| format_err(e.to_string()))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "p")
        .ok_or_else(|| format_err("missing column `p`".into()))?;
    let mut p = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(e.to_string()))?;
        let value = record
            .get(col)
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| format_err(format!("row {}: invalid probability", i + 2)))?;
        p.push(value);
    }
    SwitchProbs::new(p).map_err(|source| Error::Parse {
        path: path.to_owned(),
        source,
    })
}

/// Grid columns, then `beta`, then `assumption_flags` (`;`-separated).
pub fn format_surface(axes: &[&str], rows: &[SurfaceRow]) -> String {
    let mut header: Vec<String> = axes.iter().map(|a| a.to_string()).collect();
    header.push("beta".into());
    header.push("assumption_flags".into());
    let body = rows.iter().map(|row| {
        let mut rec: Vec<String> = row.point.iter().map(|&(_, v)| fmt_sig(v)).collect();
        rec.push(fmt_sig(row.beta));
        rec.push(
            row.assumption_flags
                .iter()
                .map(|f| f.as_str())
                .collect::<Vec<_>>()
                .join(";"),
        );
        rec
    });
    csv_string(std::iter::once(header).chain(body))
}

/// `degree,probability,log_degree,log_probability` with natural logs; the
/// log of degree 0 is left empty.
pub fn format_degree_distribution(dist: &DegreeDistribution) -> String {
    let header = ["degree", "probability", "log_degree", "log_probability"]
        .map(String::from)
        .to_vec();
    let body = dist.entries.iter().map(|&(d, p)| {
        let log_d = if d > 0 {
            fmt_sig((d as f64).ln())
        } else {
            String::new()
        };
        let log_p = if p > 0.0 {
            fmt_sig(p.ln())
        } else {
            String::new()
        };
        vec![d.to_string(), fmt_sig(p), log_d, log_p]
    });
    csv_string(std::iter::once(header).chain(body))
}

/// `results.csv` -> `results.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    out.with_file_name(format!("{stem}.config.json"))
}

pub fn write_sidecar(out: &Path, json: &str) -> Result<PathBuf, Error> {
    let path = sidecar_path(out);
    write_text(&path, json)?;
    Ok(path)
}

/// Writes the primary output to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_text(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use netpower_core::{AssumptionFlag, Axis};

    #[test]
    fn labels_round_trip() {
        let c = parse_inline_labels("A,B, B").unwrap();
        assert_eq!(c.as_slice(), &[Label::A, Label::B, Label::B]);
        let text = format_labels(&c);
        assert_eq!(text, "A\nB\nB\n");
        assert_eq!(parse_labels_text(&text).unwrap(), c);
        assert!(parse_inline_labels("A,C").is_err());
        assert_eq!(parse_labels_text("A\nAB\n").unwrap_err().0, 2);
    }

    #[test]
    fn switch_probs_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let g = netpower_core::parse_edge_list("10 20\n20 30\n", false).unwrap();
        let p = SwitchProbs::new(vec![0.0, 1.0 / 3.0, 1.0]).unwrap();
        write_switch_probs(&path, &p, Some(&g)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "node_id,p\n10,0\n20,0.333333333333\n30,1\n");
        let back = read_switch_probs(&path).unwrap();
        assert_eq!(back.as_slice(), &[0.0, 0.333333333333, 1.0]);
    }

    #[test]
    fn surface_and_degree_tables() {
        let rows = vec![SurfaceRow {
            point: vec![(Axis::PA, 0.1), (Axis::Delta, 0.5)],
            beta: 0.123456789012345,
            assumption_flags: vec![AssumptionFlag::UnbalancedClasses],
        }];
        assert_eq!(
            format_surface(&["p_a", "delta"], &rows),
            "p_a,delta,beta,assumption_flags\n0.1,0.5,0.123456789012,unbalanced-classes\n"
        );
        let dist = DegreeDistribution::from_degrees(&[0, 2, 2, 2]);
        assert_eq!(
            format_degree_distribution(&dist),
            "degree,probability,log_degree,log_probability\n0,0.25,,-1.38629436112\n2,0.75,0.69314718056,-0.287682072452\n"
        );
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(
            sidecar_path(Path::new("out/s.csv")),
            PathBuf::from("out/s.config.json")
        );
        assert_eq!(
            sidecar_path(Path::new("beta")),
            PathBuf::from("beta.config.json")
        );
    }

    #[test]
    fn missing_file_is_io_error() {
        let err =
            read_graph(Path::new("/nonexistent/g.txt"), EdgeListOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 1);
    }
}
