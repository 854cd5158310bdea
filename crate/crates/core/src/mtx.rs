//! Matrix Market I/O for model directories (`A.mtx`, `B.mtx`, `C.mtx`, optional `X0.mtx`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{MorError, Result};
use crate::linalg::Mat;
use crate::model::{InitialConditionBasis, Realization, StateSpaceModel};

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Parses a real Matrix Market matrix; `path` only labels errors.
pub fn parse_matrix_market(text: &str, path: &str) -> Result<Mat> {
    let err = |line: usize, message: String| MorError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".into()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, format!("bad header '{header}'")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(err(hline, format!("unsupported format '{other}'"))),
    };
    if tokens[3] != "real" && tokens[3] != "integer" && tokens[3] != "double" {
        return Err(err(hline, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(err(hline, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (sline, size) = data
        .next()
        .ok_or_else(|| err(hline + 1, "missing size line".into()))?;
    let dims = parse_numbers::<usize>(size).map_err(|m| err(sline, m))?;
    let (rows, cols) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, [r, c, _]) | (Layout::Array, [r, c]) => (*r, *c),
        _ => return Err(err(sline, format!("bad size line '{size}'"))),
    };
    if symmetry != Symmetry::General && rows != cols {
        return Err(err(sline, "symmetric storage requires a square matrix".into()));
    }
    let mut m = Mat::zeros(rows, cols);
    let mirror = |m: &mut Mat, i: usize, j: usize, v: f64| match symmetry {
        Symmetry::General => {}
        Symmetry::Symmetric if i != j => m[(j, i)] = v,
        Symmetry::SkewSymmetric if i != j => m[(j, i)] = -v,
        _ => {}
    };

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut count = 0;
            for (ln, line) in data {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(err(ln, format!("expected 'row col value', got '{line}'")));
                }
                let i: usize = parts[0].parse().map_err(|_| err(ln, format!("bad row '{}'", parts[0])))?;
                let j: usize = parts[1].parse().map_err(|_| err(ln, format!("bad column '{}'", parts[1])))?;
                let v = parse_value(parts[2]).map_err(|m| err(ln, m))?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(err(ln, format!("entry ({i}, {j}) outside {rows}x{cols}")));
                }
                m[(i - 1, j - 1)] += v;
                mirror(&mut m, i - 1, j - 1, v);
                count += 1;
            }
            if count != nnz {
                return Err(err(sline, format!("declared {nnz} entries, found {count}")));
            }
        }
        Layout::Array => {
            // Column-major; symmetric storage lists the lower triangle only.
            let mut slots = Vec::with_capacity(rows * cols);
            for j in 0..cols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                slots.extend((start..rows).map(|i| (i, j)));
            }
            let mut values = Vec::with_capacity(slots.len());
            let mut last_line = sline;
            for (ln, line) in data {
                last_line = ln;
                for tok in line.split_whitespace() {
                    values.push((ln, parse_value(tok).map_err(|m| err(ln, m))?));
                }
            }
            if values.len() != slots.len() {
                return Err(err(
                    last_line,
                    format!("expected {} values, found {}", slots.len(), values.len()),
                ));
            }
            for (&(i, j), &(_, v)) in slots.iter().zip(&values) {
                m[(i, j)] = v;
                mirror(&mut m, i, j, v);
            }
        }
    }
    Ok(m)
}

fn parse_numbers<T: std::str::FromStr>(line: &str) -> std::result::Result<Vec<T>, String> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad integer '{t}'")))
        .collect()
}

fn parse_value(tok: &str) -> std::result::Result<f64, String> {
    let v: f64 = tok.parse().map_err(|_| format!("bad value '{tok}'"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value '{tok}'"));
    }
    Ok(v)
}

/// Dense `array real general` serialization; values round-trip exactly.
pub fn format_matrix_market(m: &Mat) -> String {
    let mut out = String::with_capacity(24 * m.len() + 64);
    out.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let _ = writeln!(out, "{:e}", m[(i, j)]);
        }
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, &path.display().to_string())
}

pub fn write_matrix(path: &Path, m: &Mat) -> Result<()> {
    fs::write(path, format_matrix_market(m))?;
    Ok(())
}

/// Loads and validates the model stored in `dir`.
pub fn load_model(dir: &Path) -> Result<(StateSpaceModel, Option<InitialConditionBasis>)> {
    let a = read_matrix(&dir.join("A.mtx"))?;
    let b = read_matrix(&dir.join("B.mtx"))?;
    let c = read_matrix(&dir.join("C.mtx"))?;
    let model = StateSpaceModel::new(a, b, c)?;
    let x0_path = dir.join("X0.mtx");
    let basis = if x0_path.exists() {
        let x0 = read_matrix(&x0_path)?;
        if x0.nrows() != model.order() {
            return Err(MorError::DimensionMismatch(format!(
                "X0 has {} rows, A has order {}",
                x0.nrows(),
                model.order()
            )));
        }
        Some(InitialConditionBasis::new(x0)?)
    } else {
        None
    };
    Ok((model, basis))
}

pub fn save_model(dir: &Path, model: &StateSpaceModel, basis: Option<&InitialConditionBasis>) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("A.mtx"), model.a())?;
    write_matrix(&dir.join("B.mtx"), model.b())?;
    write_matrix(&dir.join("C.mtx"), model.c())?;
    if let Some(basis) = basis {
        write_matrix(&dir.join("X0.mtx"), basis.matrix())?;
    }
    Ok(())
}
