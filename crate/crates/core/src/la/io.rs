//! Dense matrix file formats: Matrix Market array files and a simple CSV
//! layout (`rows,cols` header, then one matrix row per line).

use super::{LaError, RMat};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub fn write_dense_matrix_market(m: &RMat, path: &Path) -> Result<(), LaError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix array real general")?;
    writeln!(f, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(f, "{:.17e}", m[(i, j)])?;
        }
    }
    Ok(())
}

pub fn read_dense_matrix_market(path: &Path) -> Result<RMat, LaError> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines().enumerate();

    let (lineno, header) = next_content(&mut lines, true)?;
    if !header
        .to_lowercase()
        .starts_with("%%matrixmarket matrix array real")
    {
        return Err(LaError::Parse {
            line: lineno,
            message: format!("unexpected header: {header}"),
        });
    }
    let (lineno, dims) = next_content(&mut lines, false)?;
    let mut it = dims.split_whitespace();
    let rows: usize = parse_field(it.next(), lineno, "rows")?;
    let cols: usize = parse_field(it.next(), lineno, "cols")?;

    let mut m = RMat::zeros(rows, cols);
    let mut count = 0usize;
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if count >= rows * cols {
            return Err(LaError::Parse {
                line: no + 1,
                message: "too many entries".into(),
            });
        }
        let v: f64 = t.parse().map_err(|_| LaError::Parse {
            line: no + 1,
            message: format!("bad number: {t}"),
        })?;
        m.as_mut_slice()[count] = v; // column-major order matches the format
        count += 1;
    }
    if count != rows * cols {
        return Err(LaError::Parse {
            line: 0,
            message: format!("expected {} entries, found {count}", rows * cols),
        });
    }
    Ok(m)
}

pub fn write_dense_csv(m: &RMat, path: &Path) -> Result<(), LaError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{},{}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| format!("{:.17e}", m[(i, j)]))
            .collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_dense_csv(path: &Path) -> Result<RMat, LaError> {
    let f = BufReader::new(std::fs::File::open(path)?);
    let mut lines = f.lines().enumerate();
    let (lineno, header) = next_content(&mut lines, false)?;
    let mut it = header.split(',');
    let rows: usize = parse_field(it.next(), lineno, "rows")?;
    let cols: usize = parse_field(it.next(), lineno, "cols")?;
    let mut m = RMat::zeros(rows, cols);
    let mut i = 0usize;
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if i >= rows {
            return Err(LaError::Parse {
                line: no + 1,
                message: "too many rows".into(),
            });
        }
        for (j, tok) in line.trim().split(',').enumerate() {
            if j >= cols {
                return Err(LaError::Parse {
                    line: no + 1,
                    message: "too many columns".into(),
                });
            }
            m[(i, j)] = tok.trim().parse().map_err(|_| LaError::Parse {
                line: no + 1,
                message: format!("bad number: {tok}"),
            })?;
        }
        i += 1;
    }
    if i != rows {
        return Err(LaError::Parse {
            line: 0,
            message: format!("expected {rows} rows, found {i}"),
        });
    }
    Ok(m)
}

type NumberedLines<'a> = &'a mut dyn Iterator<Item = (usize, std::io::Result<String>)>;

fn next_content(lines: NumberedLines, allow_banner: bool) -> Result<(usize, String), LaError> {
    for (no, line) in lines {
        let line = line?;
        let t = line.trim().to_string();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('%') && !(allow_banner && t.starts_with("%%")) {
            continue;
        }
        return Ok((no + 1, t));
    }
    Err(LaError::Parse {
        line: 0,
        message: "unexpected end of file".into(),
    })
}

fn parse_field(tok: Option<&str>, line: usize, what: &str) -> Result<usize, LaError> {
    tok.ok_or_else(|| LaError::Parse {
        line,
        message: format!("missing {what}"),
    })?
    .trim()
    .parse()
    .map_err(|_| LaError::Parse {
        line,
        message: format!("bad {what}"),
    })
}
