//! The `table` subcommand: merge convergence CSVs (from `run` output
//! directories or `analyze` redirects) into a single table with a leading
//! `source` column naming the file each row came from.

use crate::CliError;
use std::path::{Path, PathBuf};

pub fn table_cmd(inputs: &[PathBuf], output: Option<&Path>) -> Result<(), CliError> {
    let mut named = Vec::with_capacity(inputs.len());
    for path in inputs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        named.push((stem, text));
    }
    let merged = merge_tables(&named)?;
    match output {
        Some(path) => std::fs::write(path, merged)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{merged}");
            Ok(())
        }
    }
}

const HEADER_PREFIX: &str = "# kfv-table v1";

/// Merges `(source name, CSV contents)` pairs. All inputs must carry the
/// versioned header and identical column lines; per-input metadata (the
/// variable/time comment) is preserved as comment lines.
fn merge_tables(inputs: &[(String, String)]) -> Result<String, CliError> {
    let mut columns: Option<(String, &str)> = None; // (first source, column line)
    let mut metas = Vec::with_capacity(inputs.len());
    let mut rows = Vec::new();
    for (source, text) in inputs {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if !header.starts_with(HEADER_PREFIX) {
            return Err(CliError::Usage(format!(
                "{source}: not a convergence table (missing `{HEADER_PREFIX}` header)"
            )));
        }
        let meta = header[HEADER_PREFIX.len()..].trim();
        let cols = lines.next().unwrap_or("");
        if !cols.starts_with("n,") {
            return Err(CliError::Usage(format!(
                "{source}: missing the column line (expected `n,...`, got `{cols}`)"
            )));
        }
        match &columns {
            None => columns = Some((source.clone(), cols)),
            Some((first, expected)) => {
                if cols != *expected {
                    return Err(CliError::Usage(format!(
                        "{source}: column mismatch: `{cols}` (but {first} has `{expected}`)"
                    )));
                }
            }
        }
        metas.push(format!("# {source}: {meta}"));
        for row in lines {
            if row.is_empty() {
                continue;
            }
            rows.push(format!("{source},{row}"));
        }
    }
    let (_, cols) = columns.expect("clap requires at least one input");
    let mut out = String::new();
    out.push_str(HEADER_PREFIX);
    out.push_str(" merged\n");
    for meta in metas {
        out.push_str(&meta);
        out.push('\n');
    }
    out.push_str("source,");
    out.push_str(cols);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(variable: &str, rows: &[&str]) -> String {
        let mut text = format!(
            "# kfv-table v1 variable={variable} time=2.000000e0\n\
             n,E1,order1,E2,order2,E3,order3,E4,order4\n"
        );
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        text
    }

    #[test]
    fn merged_layout_is_pinned() {
        let a = sample("density", &["16,1.0e0,-,1.0e0,-,1.0e0,-,1.0e0,-"]);
        let b = sample(
            "total_energy",
            &[
                "16,2.0e0,-,2.0e0,-,2.0e0,-,2.0e0,-",
                "32,1.0e0,1.000,1.0e0,1.000,1.0e0,1.000,1.0e0,1.000",
            ],
        );
        let merged = merge_tables(&[
            ("kh_density".to_string(), a),
            ("kh_energy".to_string(), b),
        ])
        .unwrap();
        let expect = "\
# kfv-table v1 merged
# kh_density: variable=density time=2.000000e0
# kh_energy: variable=total_energy time=2.000000e0
source,n,E1,order1,E2,order2,E3,order3,E4,order4
kh_density,16,1.0e0,-,1.0e0,-,1.0e0,-,1.0e0,-
kh_energy,16,2.0e0,-,2.0e0,-,2.0e0,-,2.0e0,-
kh_energy,32,1.0e0,1.000,1.0e0,1.000,1.0e0,1.000,1.0e0,1.000
";
        assert_eq!(merged, expect);
    }

    #[test]
    fn mismatched_inputs_are_rejected_by_name() {
        let with_e4 = sample("density", &[]);
        let without = "# kfv-table v1 variable=density time=1.000000e0\n\
                       n,E1,order1,E2,order2,E3,order3\n"
            .to_string();
        let err = merge_tables(&[("a".into(), with_e4), ("b".into(), without)]).unwrap_err();
        let CliError::Usage(msg) = err else {
            panic!("expected usage error")
        };
        assert!(msg.contains('b') && msg.contains("column mismatch"), "{msg}");

        let err = merge_tables(&[("c".into(), "plain,csv\n1,2\n".into())]).unwrap_err();
        let CliError::Usage(msg) = err else {
            panic!("expected usage error")
        };
        assert!(msg.contains('c'), "{msg}");
    }
}
