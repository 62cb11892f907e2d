//! Feature dump: `sample_id,label,family,i0..i199`, one row per (sample,
//! family). Rows carry only their family's values, so shorter families end
//! early. Numbers are printed with 9 significant digits, `%.9g` style.

use std::io::{BufRead, Write};

use super::{Family, FeatureBundle, FeatureVector};
use crate::error::{Error, Result};

const MAX_LEN: usize = 200;

/// One dumped sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub sample_id: String,
    pub label: String,
    pub features: FeatureBundle,
}

/// Formats like C's `%.9g`: 9 significant digits, trailing zeros dropped,
/// exponent form outside `1e-4 ..< 1e9`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn check_field(s: &str) -> Result<()> {
    if s.contains([',', '\n', '\r', '"']) {
        return Err(Error::Format(format!(
            "field {s:?} cannot be written unquoted"
        )));
    }
    Ok(())
}

pub fn write_header(out: &mut impl Write) -> Result<()> {
    write!(out, "sample_id,label,family")?;
    for i in 0..MAX_LEN {
        write!(out, ",i{i}")?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn write_record(out: &mut impl Write, record: &FeatureRecord) -> Result<()> {
    check_field(&record.sample_id)?;
    check_field(&record.label)?;
    for v in record.features.iter() {
        write!(out, "{},{},{}", record.sample_id, record.label, v.family())?;
        for &x in v.values() {
            write!(out, ",{}", format_sig9(x))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_features(out: &mut impl Write, records: &[FeatureRecord]) -> Result<()> {
    write_header(out)?;
    for r in records {
        write_record(out, r)?;
    }
    Ok(())
}

/// Reads a dump back, regrouping the four family rows of each sample.
pub fn read_features(input: impl BufRead) -> Result<Vec<FeatureRecord>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty feature file".into()))??;
    if !header.starts_with("sample_id,label,family") {
        return Err(Error::Format("missing feature header".into()));
    }

    let mut records = Vec::new();
    let mut pending: Option<(String, String, [Option<FeatureVector>; 4])> = None;
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Format(format!("line {}: {what}", lineno + 2));
        let mut fields = line.split(',');
        let id = fields.next().ok_or_else(|| bad("missing sample_id"))?;
        let label = fields.next().ok_or_else(|| bad("missing label"))?;
        let family: Family = fields
            .next()
            .ok_or_else(|| bad("missing family"))?
            .parse()?;
        let values = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad("bad number")))
            .collect::<Result<Vec<f64>>>()?;
        let vector = FeatureVector::new(family, values)?;

        let same = matches!(&pending, Some((pid, _, _)) if pid == id);
        if !same {
            if let Some(done) = pending.take() {
                records.push(finish(done)?);
            }
            pending = Some((id.to_string(), label.to_string(), Default::default()));
        }
        let slot = &mut pending.as_mut().expect("pending record").2[family.index()];
        if slot.is_some() {
            return Err(bad("duplicate family row"));
        }
        *slot = Some(vector);
    }
    if let Some(done) = pending {
        records.push(finish(done)?);
    }
    Ok(records)
}

fn finish(
    (sample_id, label, parts): (String, String, [Option<FeatureVector>; 4]),
) -> Result<FeatureRecord> {
    let [chain_code, intersection, shadow, line_fit] = parts;
    let missing = || Error::Format(format!("sample {sample_id} is missing a family row"));
    Ok(FeatureRecord {
        features: FeatureBundle {
            chain_code: chain_code.ok_or_else(missing)?,
            intersection: intersection.ok_or_else(missing)?,
            shadow: shadow.ok_or_else(missing)?,
            line_fit: line_fit.ok_or_else(missing)?,
        },
        sample_id,
        label,
    })
}
