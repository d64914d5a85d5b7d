//! Matrix Market and CSV I/O.
//!
//! Coordinate files load as CSR with duplicates summed; array files load as
//! dense. Under-determined matrices are transposed on load so every
//! downstream consumer sees `n >= d`. Values are written with 17 significant
//! digits, which round-trips `f64` exactly.

use crate::bench::{BenchRecord, ProfileCurve, Status};
use crate::mat::{DenseMat, Mat, SparseMat};
use crate::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MtxFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MtxField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MtxSymmetry {
    General,
    Symmetric,
}

/// Parsed Matrix Market header.
#[derive(Debug, Clone, Copy)]
pub struct MtxHeader {
    format: MtxFormat,
    field: MtxField,
    symmetry: MtxSymmetry,
}

fn parse_header(line: &str) -> Result<MtxHeader> {
    let err = |msg: String| Error::Parse { line: 1, msg };
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(err("expected '%%MatrixMarket matrix <format> <field> <symmetry>'".into()));
    }
    if tokens[1] != "matrix" {
        return Err(err(format!("unsupported object '{}'", tokens[1])));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MtxFormat::Coordinate,
        "array" => MtxFormat::Array,
        other => return Err(err(format!("unsupported format '{other}'"))),
    };
    let field = match tokens[3].as_str() {
        "real" => MtxField::Real,
        "integer" => MtxField::Integer,
        "pattern" => MtxField::Pattern,
        other => return Err(err(format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => MtxSymmetry::General,
        "symmetric" => MtxSymmetry::Symmetric,
        other => return Err(err(format!("unsupported symmetry '{other}'"))),
    };
    if field == MtxField::Pattern && format == MtxFormat::Array {
        return Err(err("pattern field is only valid for coordinate format".into()));
    }
    Ok(MtxHeader { format, field, symmetry })
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse {what} from '{tok}'") })
}

/// Read a Matrix Market file: coordinate files become sparse, array files
/// dense; symmetric storage is expanded; matrices with fewer rows than
/// columns are transposed on load.
pub fn read_matrix_market(path: &Path) -> Result<Mat> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (_, first) = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = parse_header(&first?)?;

    // size line: first non-comment, non-empty line
    let mut size_line = None;
    for (idx, line) in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some((idx + 1, trimmed.to_string()));
        break;
    }
    let (size_lineno, size_text) =
        size_line.ok_or(Error::Parse { line: 2, msg: "missing size line".into() })?;
    let sizes: Vec<&str> = size_text.split_whitespace().collect();

    match header.format {
        MtxFormat::Coordinate => {
            if sizes.len() != 3 {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: "coordinate size line needs 'rows cols nnz'".into(),
                });
            }
            let n: usize = parse_num(sizes[0], size_lineno, "row count")?;
            let d: usize = parse_num(sizes[1], size_lineno, "column count")?;
            let nnz: usize = parse_num(sizes[2], size_lineno, "nonzero count")?;
            let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(nnz);
            for (idx, line) in lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                let toks: Vec<&str> = trimmed.split_whitespace().collect();
                let want = if header.field == MtxField::Pattern { 2 } else { 3 };
                if toks.len() < want {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {want} fields, got {}", toks.len()),
                    });
                }
                let i: usize = parse_num(toks[0], lineno, "row index")?;
                let j: usize = parse_num(toks[1], lineno, "column index")?;
                if i < 1 || i > n || j < 1 || j > d {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("index ({i},{j}) out of range for {n}x{d}"),
                    });
                }
                let v: f64 = if header.field == MtxField::Pattern {
                    1.0
                } else {
                    parse_num(toks[2], lineno, "value")?
                };
                if !v.is_finite() {
                    return Err(Error::Parse { line: lineno, msg: "non-finite value".into() });
                }
                triplets.push((i - 1, j - 1, v));
                if header.symmetry == MtxSymmetry::Symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
            let sp = SparseMat::from_triplets(n, d, &triplets)?;
            Ok(if n < d { Mat::Sparse(sp.transpose()) } else { Mat::Sparse(sp) })
        }
        MtxFormat::Array => {
            if sizes.len() != 2 {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: "array size line needs 'rows cols'".into(),
                });
            }
            let n: usize = parse_num(sizes[0], size_lineno, "row count")?;
            let d: usize = parse_num(sizes[1], size_lineno, "column count")?;
            let mut values = Vec::with_capacity(n * d);
            for (idx, line) in lines {
                let lineno = idx + 1;
                let line = line?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('%') {
                    continue;
                }
                for tok in trimmed.split_whitespace() {
                    let v: f64 = parse_num(tok, lineno, "value")?;
                    if !v.is_finite() {
                        return Err(Error::Parse { line: lineno, msg: "non-finite value".into() });
                    }
                    values.push(v);
                }
            }
            let expected = match header.symmetry {
                MtxSymmetry::General => n * d,
                MtxSymmetry::Symmetric => n * (n + 1) / 2,
            };
            if values.len() != expected {
                return Err(Error::Parse {
                    line: size_lineno,
                    msg: format!("expected {expected} array entries, got {}", values.len()),
                });
            }
            let dense = match header.symmetry {
                MtxSymmetry::General => DenseMat::from_col_major(n, d, values)?,
                MtxSymmetry::Symmetric => {
                    // lower triangle stored column-wise
                    let mut a = DenseMat::zeros(n, n);
                    let mut it = values.into_iter();
                    for j in 0..n {
                        for i in j..n {
                            let v = it.next().unwrap();
                            a.set(i, j, v);
                            a.set(j, i, v);
                        }
                    }
                    a
                }
            };
            Ok(if dense.rows() < dense.cols() {
                Mat::Dense(dense.transpose())
            } else {
                Mat::Dense(dense)
            })
        }
    }
}

/// Write a matrix: sparse as coordinate, dense as array, 17 significant
/// digits so a read-back reproduces it exactly.
pub fn write_matrix_market(path: &Path, a: &Mat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match a {
        Mat::Sparse(sp) => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(w, "{} {} {}", sp.rows(), sp.cols(), sp.nnz())?;
            for (i, j, v) in sp.triplets() {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
        Mat::Dense(dm) => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{} {}", dm.rows(), dm.cols())?;
            for j in 0..dm.cols() {
                for i in 0..dm.rows() {
                    writeln!(w, "{:.16e}", dm.at(i, j))?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV header for benchmark records.
pub const RECORD_HEADER: &str = "problem,solver,n,d,nnz,time_s,residual,iters,rank,status";

pub fn write_records_csv<W: Write>(out: &mut W, records: &[BenchRecord]) -> Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.16e},{},{},{}",
            r.problem, r.solver, r.n, r.d, r.nnz, r.time_s, r.residual, r.iters, r.rank, r.status
        )?;
    }
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<BenchRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 1 && trimmed.starts_with("problem,")) {
            continue;
        }
        let tok: Vec<&str> = trimmed.split(',').collect();
        if tok.len() != 10 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 10 fields, got {}", tok.len()),
            });
        }
        records.push(BenchRecord {
            problem: tok[0].to_string(),
            solver: tok[1].to_string(),
            n: parse_num(tok[2], lineno, "n")?,
            d: parse_num(tok[3], lineno, "d")?,
            nnz: parse_num(tok[4], lineno, "nnz")?,
            time_s: parse_num(tok[5], lineno, "time_s")?,
            residual: parse_num(tok[6], lineno, "residual")?,
            iters: parse_num(tok[7], lineno, "iters")?,
            rank: parse_num(tok[8], lineno, "rank")?,
            status: tok[9].parse::<Status>().map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?,
        });
    }
    Ok(records)
}

/// CSV with one row per profile breakpoint: `solver,log2_ratio,fraction`.
pub fn write_profiles_csv<W: Write>(out: &mut W, curves: &[ProfileCurve]) -> Result<()> {
    writeln!(out, "solver,log2_ratio,fraction")?;
    for c in curves {
        for &(x, y) in &c.points {
            writeln!(out, "{},{:.16e},{:.16e}", c.solver, x, y)?;
        }
    }
    Ok(())
}
