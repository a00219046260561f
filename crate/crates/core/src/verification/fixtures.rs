//! Plain-text fixture files.
//!
//! ```text
//! # free-form comment lines
//! record <name> | <shape> | n=<n> | key=value key=value ...
//! ...
//! sha256 <hex digest of every preceding byte>
//! ```
//!
//! Shapes are written as `sphere R`, `ellipsoid A B`, `perturbed R m:eps,m:eps`
//! or `tabulated phi:rho,phi:rho,...`. Values use 17 significant digits so
//! they round-trip exactly. Files are append-only: [`append_records`] keeps
//! every existing line and reseals the checksum.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Shape;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRecord {
    pub name: String,
    pub shape: Shape,
    pub n: usize,
    pub values: Vec<(String, f64)>,
}

impl FixtureRecord {
    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

pub fn checksum(body: &str) -> String {
    let digest = Sha256::digest(body.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn format_shape(shape: &Shape) -> String {
    let pairs = |p: &[(f64, f64)]| p.iter().map(|(a, b)| format!("{a}:{b}")).collect::<Vec<_>>().join(",");
    match shape {
        Shape::Sphere { radius } => format!("sphere {radius}"),
        Shape::AxisymEllipsoid { a, b } => format!("ellipsoid {a} {b}"),
        Shape::PerturbedSphere { radius, modes } => {
            let m: Vec<(f64, f64)> = modes.iter().map(|&(m, e)| (m as f64, e)).collect();
            format!("perturbed {radius} {}", pairs(&m))
        }
        Shape::TabulatedProfile { points } => format!("tabulated {}", pairs(points)),
    }
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Fixture(format!("line {line}: {msg}"))
}

fn num(line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| bad(line, format!("not a number: {s:?}")))
}

fn parse_pairs(line: usize, s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| bad(line, format!("expected a:b, got {p:?}")))?;
            Ok((num(line, a)?, num(line, b)?))
        })
        .collect()
}

pub fn parse_shape(s: &str, line: usize) -> Result<Shape> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    match parts.as_slice() {
        ["sphere", r] => Ok(Shape::Sphere { radius: num(line, r)? }),
        ["ellipsoid", a, b] => Ok(Shape::AxisymEllipsoid { a: num(line, a)?, b: num(line, b)? }),
        ["perturbed", r, modes] => {
            let modes = parse_pairs(line, modes)?
                .into_iter()
                .map(|(m, e)| {
                    if m >= 0.0 && m.fract() == 0.0 {
                        Ok((m as u32, e))
                    } else {
                        Err(bad(line, format!("mode {m} is not a non-negative integer")))
                    }
                })
                .collect::<Result<_>>()?;
            Ok(Shape::PerturbedSphere { radius: num(line, r)?, modes })
        }
        ["tabulated", pts] => Ok(Shape::TabulatedProfile { points: parse_pairs(line, pts)? }),
        _ => Err(bad(line, format!("unknown shape {s:?}"))),
    }
}

fn format_record(r: &FixtureRecord) -> String {
    let vals: Vec<String> = r.values.iter().map(|(k, v)| format!("{k}={v:.16e}")).collect();
    format!("record {} | {} | n={} | {}\n", r.name, format_shape(&r.shape), r.n, vals.join(" "))
}

/// A complete file: `header` lines become comments, then the records and the checksum.
pub fn write_fixtures(header: &str, records: &[FixtureRecord]) -> String {
    let mut body = String::new();
    for line in header.lines() {
        body.push_str("# ");
        body.push_str(line);
        body.push('\n');
    }
    for r in records {
        body.push_str(&format_record(r));
    }
    let sum = checksum(&body);
    body + "sha256 " + &sum + "\n"
}

fn split_checksum(text: &str) -> Result<(&str, &str)> {
    let trimmed = text.trim_end_matches('\n');
    let cut = trimmed.rfind('\n').map(|i| i + 1).unwrap_or(0);
    let (body, last) = trimmed.split_at(cut);
    let sum = last.strip_prefix("sha256 ").ok_or_else(|| Error::Fixture("missing sha256 line".into()))?;
    Ok((body, sum.trim()))
}

/// Parses and verifies a fixture file.
pub fn parse_fixtures(text: &str) -> Result<Vec<FixtureRecord>> {
    let (body, sum) = split_checksum(text)?;
    let actual = checksum(body);
    if actual != sum {
        return Err(Error::Fixture(format!("checksum mismatch: file says {sum}, contents hash to {actual}")));
    }
    let mut out = Vec::new();
    for (i, line) in body.lines().enumerate() {
        let ln = i + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let rest = line.strip_prefix("record ").ok_or_else(|| bad(ln, "expected `record`"))?;
        let fields: Vec<&str> = rest.split('|').map(str::trim).collect();
        let [name, shape, n, values] = fields.as_slice() else {
            return Err(bad(ln, "expected four `|`-separated fields"));
        };
        let n = n
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(ln, format!("bad dimension field {n:?}")))?;
        let values = values
            .split_whitespace()
            .map(|kv| {
                let (k, v) = kv.split_once('=').ok_or_else(|| bad(ln, format!("expected key=value, got {kv:?}")))?;
                Ok((k.to_string(), num(ln, v)?))
            })
            .collect::<Result<_>>()?;
        out.push(FixtureRecord { name: name.to_string(), shape: parse_shape(shape, ln)?, n, values });
    }
    Ok(out)
}

/// Appends `records` to a verified file, keeping its existing lines.
pub fn append_records(text: &str, records: &[FixtureRecord]) -> Result<String> {
    parse_fixtures(text)?;
    let (body, _) = split_checksum(text)?;
    let mut body = body.to_string();
    for r in records {
        body.push_str(&format_record(r));
    }
    let sum = checksum(&body);
    Ok(body + "sha256 " + &sum + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<FixtureRecord> {
        vec![
            FixtureRecord {
                name: "a".into(),
                shape: Shape::AxisymEllipsoid { a: 1.0, b: 2.5 },
                n: 4,
                values: vec![("i_h0".into(), std::f64::consts::PI), ("q".into(), -1.0 / 3.0)],
            },
            FixtureRecord {
                name: "b".into(),
                shape: Shape::PerturbedSphere { radius: 1.0, modes: vec![(2, 0.1), (3, -0.02)] },
                n: 3,
                values: vec![("x".into(), 1e-300)],
            },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        let text = write_fixtures("test file\nsecond line", &sample());
        assert_eq!(parse_fixtures(&text).unwrap(), sample());
    }

    #[test]
    fn tampering_is_detected() {
        let text = write_fixtures("", &sample()).replace("n=4", "n=5");
        assert!(matches!(parse_fixtures(&text), Err(Error::Fixture(_))));
    }

    #[test]
    fn append_keeps_old_lines() {
        let recs = sample();
        let text = write_fixtures("h", &recs[..1]);
        let more = append_records(&text, &recs[1..]).unwrap();
        assert!(more.starts_with(&text[..text.rfind("sha256").unwrap()]));
        assert_eq!(parse_fixtures(&more).unwrap(), recs);
    }
}
