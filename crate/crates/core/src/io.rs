//! File formats: P-value lists, data matrices, support strings,
//! simulation configs and decimal formatting of reports.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};

use crate::exact::TestKind;
use crate::sim::ScenarioConfig;
use crate::support::{Rational, Support, SNAP_TOLERANCE};

/// `x` rounded to 10 significant digits, printed without exponent and with
/// a dot decimal separator.
pub fn fmt_decimal(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("scientific notation parses");
    format!("{rounded}")
}

pub fn fmt_fraction(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_fraction(s: &str) -> anyhow::Result<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n.parse().with_context(|| format!("bad numerator in '{s}'"))?;
    let d: i64 = d.parse().with_context(|| format!("bad denominator in '{s}'"))?;
    if d <= 0 {
        bail!("denominator must be positive in '{s}'");
    }
    Ok(Rational::new(n, d))
}

/// Parses a support given either as comma-separated fractions
/// (`1/35,8/35,27/35,1`) or as a test null `TEST:N1[:N2]` (`ks:4:4`).
pub fn parse_support(spec: &str) -> anyhow::Result<Support> {
    let spec = spec.trim();
    if let Some((test, sizes)) = spec.split_once(':') {
        let test: TestKind = test.parse()?;
        let sizes = sizes
            .split(':')
            .map(|v| v.trim().parse::<usize>().with_context(|| format!("bad sample size '{v}'")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let (n1, n2) = match (test.is_one_sample(), sizes.as_slice()) {
            (true, [n1]) => (*n1, 0),
            (false, [n1, n2]) => (*n1, *n2),
            _ => bail!("support '{spec}' needs {} sample size(s)", if test.is_one_sample() { 1 } else { 2 }),
        };
        return test
            .support(n1, n2)?
            .ok_or_else(|| anyhow!("test {test} has continuous P-values and no support"));
    }
    let points = spec.split(',').map(parse_fraction).collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Support::new(points)?)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

/// P-values read from a file, with the 1-based line of each value.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueFile {
    pub values: Vec<f64>,
    pub lines: Vec<u64>,
}

/// Reads one P-value per line, or a CSV file with a `pvalue` column.
/// Blank lines are skipped.
pub fn read_pvalues(path: &Path) -> anyhow::Result<PValueFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    let Some(first) = first else {
        bail!("{}: no P-values", path.display());
    };
    let mut out = PValueFile {
        values: Vec::new(),
        lines: Vec::new(),
    };
    if parse_number(first).is_some() {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = parse_number(line)
                .ok_or_else(|| anyhow!("{}:{}: cannot parse '{line}' as a P-value", path.display(), i + 1))?;
            out.values.push(v);
            out.lines.push(i as u64 + 1);
        }
    } else {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let col = rdr
            .headers()?
            .iter()
            .position(|h| h == "pvalue")
            .ok_or_else(|| anyhow!("{}: header has no 'pvalue' column", path.display()))?;
        for rec in rdr.records() {
            let rec = rec.with_context(|| format!("{}: malformed CSV", path.display()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let cell = rec.get(col).unwrap_or("");
            let v = parse_number(cell)
                .ok_or_else(|| anyhow!("{}:{line}: cannot parse '{cell}' as a P-value", path.display()))?;
            out.values.push(v);
            out.lines.push(line);
        }
    }
    if out.values.is_empty() {
        bail!("{}: no P-values", path.display());
    }
    if let Some(i) = out.values.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
        bail!("{}:{}: P-value {} outside (0, 1]", path.display(), out.lines[i], out.values[i]);
    }
    Ok(out)
}

/// Checks every value against `support` and lists all that do not snap.
pub fn check_on_support(file: &PValueFile, support: &Support) -> anyhow::Result<()> {
    let bad: Vec<String> = file
        .values
        .iter()
        .zip(&file.lines)
        .filter(|(v, _)| support.snap(**v, SNAP_TOLERANCE).is_none())
        .map(|(v, l)| format!("line {l} ({v})"))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        bail!("{} P-value(s) are not support points: {}", bad.len(), bad.join(", "))
    }
}

/// Rows of a data matrix: variables by samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads an `m x (n1 + n2)` CSV matrix. A first row whose last cell is not
/// numeric is a header; a first column that is not numeric holds labels.
pub fn read_matrix(path: &Path) -> anyhow::Result<Matrix> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let records = rdr
        .records()
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("{}: malformed CSV", path.display()))?;
    let mut records = records.into_iter().filter(|r| !(r.len() == 1 && r[0].is_empty())).peekable();
    if let Some(first) = records.peek() {
        if first.iter().next_back().and_then(parse_number).is_none() {
            records.next();
        }
    }
    let records: Vec<_> = records.collect();
    let Some(first) = records.first() else {
        bail!("{}: no data rows", path.display());
    };
    let labelled = parse_number(&first[0]).is_none();
    let width = first.len();
    let mut m = Matrix {
        labels: Vec::with_capacity(records.len()),
        rows: Vec::with_capacity(records.len()),
    };
    for (i, rec) in records.iter().enumerate() {
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            bail!("{}:{line}: expected {width} columns, found {}", path.display(), rec.len());
        }
        let skip = usize::from(labelled);
        let row = rec
            .iter()
            .enumerate()
            .skip(skip)
            .map(|(j, c)| {
                parse_number(c)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| anyhow!("{}:{line}: column {}: '{c}' is not a finite number", path.display(), j + 1))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        m.labels.push(if labelled { rec[0].to_string() } else { (i + 1).to_string() });
        m.rows.push(row);
    }
    Ok(m)
}

/// Reads a simulation config; schema errors name the offending field.
pub fn read_config(path: &Path) -> anyhow::Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse_config(text: &str) -> anyhow::Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("at '{path}': {}", e.into_inner())
    })?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn decimals() {
        assert_eq!(fmt_decimal(8.0 / 35.0), "0.2285714286");
        assert_eq!(fmt_decimal(1.0), "1");
        assert_eq!(fmt_decimal(0.05), "0.05");
        assert_eq!(fmt_decimal(1.0 / 3.0 * 1e-5), "0.000003333333333");
        assert_eq!(fmt_decimal(f64::NAN), "NaN");
        assert_eq!(fmt_fraction(&Rational::new(27, 35)), "27/35");
        assert_eq!(fmt_fraction(&Rational::new(35, 35)), "1");
    }

    #[test]
    fn supports() {
        let s = parse_support("1/35, 8/35,27/35,1").unwrap();
        assert_eq!(s, parse_support("ks:4:4").unwrap());
        assert_eq!(parse_support("signed_rank:3").unwrap().len(), 4);
        assert!(parse_support("t_welch:4:4").is_err());
        assert!(parse_support("1/2,1/3,1").is_err());
        assert!(parse_support("1/0,1").is_err());
    }

    #[test]
    fn pvalue_files() {
        let f = temp("0.5\n\n1\n0.25\n");
        let p = read_pvalues(f.path()).unwrap();
        assert_eq!(p.values, vec![0.5, 1.0, 0.25]);
        assert_eq!(p.lines, vec![1, 3, 4]);
        let f = temp("gene,pvalue\na,0.5\nb,0.125\n");
        assert_eq!(read_pvalues(f.path()).unwrap().values, vec![0.5, 0.125]);
        let f = temp("0.5\nabc\n");
        let e = read_pvalues(f.path()).unwrap_err().to_string();
        assert!(e.contains(":2:"), "{e}");
        let f = temp("0.5\n1.5\n");
        assert!(read_pvalues(f.path()).is_err());
    }

    #[test]
    fn snap_failures_are_listed() {
        let f = temp("0.3\n1\n0.4\n");
        let p = read_pvalues(f.path()).unwrap();
        let e = check_on_support(&p, &parse_support("1/2,1").unwrap()).unwrap_err().to_string();
        assert!(e.contains("line 1 (0.3)") && e.contains("line 3 (0.4)"), "{e}");
    }

    #[test]
    fn matrices() {
        let f = temp("gene,a1,a2,b1,b2\ng1,1,2,3,4\ng2,5,6,7,8.5\n");
        let m = read_matrix(f.path()).unwrap();
        assert_eq!(m.labels, vec!["g1", "g2"]);
        assert_eq!(m.rows[1], vec![5.0, 6.0, 7.0, 8.5]);
        let f = temp("1,2,3,4\n5,6,7,8\n");
        let m = read_matrix(f.path()).unwrap();
        assert_eq!(m.labels, vec!["1", "2"]);
        let f = temp("1,2,3,4\n5,6,7\n");
        assert!(read_matrix(f.path()).unwrap_err().to_string().contains(":2:"));
        let f = temp("1,2,3,4\n5,x,7,8\n");
        assert!(read_matrix(f.path()).unwrap_err().to_string().contains("column 2"));
    }

    #[test]
    fn config_errors_name_the_field() {
        let e = parse_config(r#"{"family": "location", "m": "ten"}"#).unwrap_err();
        assert!(format!("{e:#}").contains("'m'"), "{e:#}");
        let e = parse_config(r#"{"family": "location", "methods": ["SS", "XX"]}"#).unwrap_err();
        assert!(format!("{e:#}").contains("methods[1]"), "{e:#}");
    }
}
