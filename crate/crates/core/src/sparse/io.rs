//! Matrix Market coordinate format for sparse matrices
//! (`%%MatrixMarket matrix coordinate real general`, 1-based indices).

use super::{SparseError, SparseMatrix};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn write_matrix_market(m: &SparseMatrix, path: &Path) -> Result<(), SparseError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(f, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(f, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix, SparseError> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut header_seen = false;
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    for (no, line) in f.lines().enumerate() {
        let lineno = no + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if !header_seen {
            if !t
                .to_lowercase()
                .starts_with("%%matrixmarket matrix coordinate real")
            {
                return Err(SparseError::Parse {
                    line: lineno,
                    message: format!("unexpected header: {t}"),
                });
            }
            header_seen = true;
            continue;
        }
        if t.starts_with('%') {
            continue;
        }
        if dims.is_none() {
            let mut it = t.split_whitespace();
            let r = parse_usize(it.next(), lineno, "rows")?;
            let c = parse_usize(it.next(), lineno, "cols")?;
            let nnz = parse_usize(it.next(), lineno, "nnz")?;
            dims = Some((r, c, nnz));
            triplets.reserve(nnz);
            continue;
        }
        let (rows, cols, _) = dims.unwrap();
        let mut it = t.split_whitespace();
        let i = parse_usize(it.next(), lineno, "row index")?;
        let j = parse_usize(it.next(), lineno, "col index")?;
        let v: f64 = it
            .next()
            .ok_or_else(|| SparseError::Parse {
                line: lineno,
                message: "missing value".into(),
            })?
            .parse()
            .map_err(|_| SparseError::Parse {
                line: lineno,
                message: "bad value".into(),
            })?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(SparseError::Parse {
                line: lineno,
                message: format!("index ({i}, {j}) out of range for {rows}x{cols}"),
            });
        }
        triplets.push((i - 1, j - 1, v));
    }

    let (rows, cols, nnz) = dims.ok_or(SparseError::Parse {
        line: 0,
        message: "missing dimension line".into(),
    })?;
    if triplets.len() != nnz {
        return Err(SparseError::Parse {
            line: 0,
            message: format!("expected {nnz} entries, found {}", triplets.len()),
        });
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize, SparseError> {
    tok.ok_or_else(|| SparseError::Parse {
        line,
        message: format!("missing {what}"),
    })?
    .parse()
    .map_err(|_| SparseError::Parse {
        line,
        message: format!("bad {what}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir() -> std::path::PathBuf {
        let d = std::env::temp_dir().join("sylkit_mm_test");
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn round_trip_preserves_structure_and_values() {
        let m = crate::sparse::tests::random_sparse(20, 0.15, 77);
        let path = tmpdir().join("rt.mtx");
        write_matrix_market(&m, &path).unwrap();
        let back = read_matrix_market(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn empty_matrix_is_valid() {
        let path = tmpdir().join("empty.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n3 4 0\n",
        )
        .unwrap();
        let m = read_matrix_market(&path).unwrap();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.n_cols(), 4);
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn out_of_range_index_names_line() {
        let path = tmpdir().join("bad.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n",
        )
        .unwrap();
        match read_matrix_market(&path) {
            Err(SparseError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_are_skipped() {
        let path = tmpdir().join("comments.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n% generated\n2 2 1\n% entry\n2 2 -1.5\n",
        )
        .unwrap();
        let m = read_matrix_market(&path).unwrap();
        assert_eq!(m.to_dense()[(1, 1)], -1.5);
    }
}
