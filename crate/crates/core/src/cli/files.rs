//! CSV and JSON artifacts. Numbers are written with 17 significant digits;
//! metadata lives in `#` comment lines.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Profile file: a `# l = …, N = …` comment (plus optional extra comments),
/// an `x,phi` header and one row per node.
pub fn profile_csv(field: &Field, extra_comments: &[String]) -> String {
    let grid = field.grid();
    let mut out = format!("# l = {}, N = {}\n", grid.half_length(), grid.size());
    for c in extra_comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("x,phi\n");
    for (x, v) in grid.nodes().iter().zip(field.values()) {
        let _ = writeln!(out, "{},{}", num(*x), num(*v));
    }
    out
}

pub fn write_profile(path: &Path, field: &Field, extra_comments: &[String]) -> Result<()> {
    std::fs::write(path, profile_csv(field, extra_comments))?;
    Ok(())
}

pub fn read_profile(path: &Path) -> Result<Field> {
    parse_profile(&std::fs::read_to_string(path)?)
}

/// Inverse of [`profile_csv`]. The grid is rebuilt from the header comment
/// and every `x` must sit on its node.
pub fn parse_profile(text: &str) -> Result<Field> {
    let mut shape: Option<(f64, usize)> = None;
    let mut header_seen = false;
    let mut values = Vec::new();
    let mut xs = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if shape.is_none() {
                shape = parse_grid_comment(comment);
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["x", "phi"] {
                return Err(parse_error(
                    line_no,
                    format!("expected header `x,phi`, got `{line}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let (x, v) = parse_pair(line, line_no)?;
        xs.push((x, line_no));
        values.push(v);
    }
    let (l, n) =
        shape.ok_or_else(|| parse_error(1, "missing `# l = …, N = …` header comment".into()))?;
    if !header_seen {
        return Err(parse_error(
            text.lines().count().max(1),
            "missing `x,phi` header".into(),
        ));
    }
    let grid = Grid::new(l, n).map_err(|e| parse_error(1, e.to_string()))?;
    if values.len() != n {
        return Err(parse_error(
            text.lines().count(),
            format!("expected {n} data rows, found {}", values.len()),
        ));
    }
    let slack = 1e-9 * l.max(1.0);
    for ((x, line_no), node) in xs.iter().zip(grid.nodes()) {
        if (x - node).abs() > slack {
            return Err(parse_error(
                *line_no,
                format!("x = {x} does not match grid node {node}"),
            ));
        }
    }
    Field::new(&grid, values)
}

fn parse_grid_comment(comment: &str) -> Option<(f64, usize)> {
    let mut l = None;
    let mut n = None;
    for part in comment.split(',') {
        let (key, value) = part.split_once('=')?;
        match key.trim() {
            "l" => l = value.trim().parse().ok(),
            "N" => n = value.trim().parse().ok(),
            _ => {}
        }
    }
    Some((l?, n?))
}

fn parse_error(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(f64, f64)> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.len() != 2 {
        return Err(parse_error(
            line_no,
            format!("expected 2 columns, found {}", cols.len()),
        ));
    }
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| parse_error(line_no, format!("`{s}` is not a number")))
    };
    Ok((parse(cols[0])?, parse(cols[1])?))
}

/// Two-column numeric CSV. `#` lines are skipped; a non-numeric first row
/// is taken as a header.
pub fn parse_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    let mut first = true;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed = parse_pair(line, index + 1);
        if first {
            first = false;
            if parsed.is_err() && line.split(',').count() == 2 {
                continue;
            }
        }
        points.push(parsed?);
    }
    Ok(points)
}

pub fn read_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    parse_points(&std::fs::read_to_string(path)?)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trips_bit_exactly() {
        let grid = Grid::new(8.0, 32).unwrap();
        let f = Field::from_fn(&grid, |x| (x / 3.0).sin() + 1.0 / 7.0).unwrap();
        let text = profile_csv(&f, &["t = 0.5".into()]);
        assert!(text.starts_with("# l = 8, N = 32\n# t = 0.5\nx,phi\n"));
        assert_eq!(parse_profile(&text).unwrap(), f);
    }

    #[test]
    fn malformed_profiles_report_lines() {
        let grid = Grid::new(1.0, 4).unwrap();
        let good = profile_csv(&Field::zeros(&grid), &[]);
        let bad = good.replacen("0.0000000000000000e0\n", "zero\n", 1);
        match parse_profile(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let short: String = good.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_profile(&short), Err(Error::Parse { .. })));
        let shifted = good.replacen("-1.0000000000000000e0", "-0.5", 1);
        match parse_profile(&shifted) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("grid node"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_profile("x,phi\n0,0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn points_with_and_without_header() {
        let pts = parse_points("# speeds\nc,amplitude\n1,3\n2,6\n").unwrap();
        assert_eq!(pts, vec![(1.0, 3.0), (2.0, 6.0)]);
        assert_eq!(parse_points("1,3\n2,6\n").unwrap().len(), 2);
        match parse_points("c,a\n1,3\n2;6\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
