//! Flat-file formats: pair, records, summary, curve and periodogram CSVs.
//!
//! Numbers are written with 15 significant digits, which survives a
//! write/read cycle well inside the precision any estimate cares about.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::EstimatorId;
use crate::freq_domain::CrossPeriodogram;
use crate::montecarlo::{EstimateRecord, Outcome, SummaryRow, SummaryStats};
use crate::scalar::Real;
use crate::series_gen::{SeriesPair, SettingTag};
use crate::time_domain::FluctuationCurve;

pub const PAIR_HEADER: [&str; 3] = ["t", "x", "y"];
pub const RECORDS_HEADER: [&str; 7] = ["estimator", "setting", "alpha", "T", "rep", "h_hat", "status"];
pub const SUMMARY_HEADER: [&str; 11] = [
    "estimator", "setting", "alpha", "T", "n_ok", "mean", "bias", "sd", "q025", "q975", "mse",
];
pub const CURVE_HEADER: [&str; 2] = ["scale", "value"];
pub const PERIODOGRAM_HEADER: [&str; 4] = ["lambda", "re", "im", "modulus"];

const MISSING: &str = "NA";

/// Decimal rendering with 15 significant digits and no trailing zeros;
/// scientific notation outside `1e-6 ..= 1e21`.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if v < 0.0 { "-" } else { "" };
    let all: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = all.trim_end_matches('0');
    if !(-6..=20).contains(&exp) {
        let (lead, rest) = digits.split_at(1);
        return if rest.is_empty() {
            format!("{sign}{lead}e{exp}")
        } else {
            format!("{sign}{lead}.{rest}e{exp}")
        };
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        return format!("{sign}0.{zeros}{digits}");
    }
    let int_len = exp as usize + 1;
    if digits.len() <= int_len {
        format!("{sign}{digits}{}", "0".repeat(int_len - digits.len()))
    } else {
        format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Whole-file read with the path in the error message.
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn reader<R: Read>(source: R, expected: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != expected {
        return Err(Error::Parse {
            row: 1,
            msg: format!("expected header `{}`, found `{}`", expected.join(","), header.join(",")),
        });
    }
    Ok(rdr)
}

/// Parses field `idx` of a record; `row` is the one-based line number.
fn field<F: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<F> {
    let row = rec.position().map_or(0, |p| p.line() as usize);
    let raw = rec.get(idx).unwrap_or_default();
    raw.parse().map_err(|_| Error::Parse { row, msg: format!("bad {name} `{raw}`") })
}

fn finite(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let v: f64 = field(rec, idx, name)?;
    if !v.is_finite() {
        let row = rec.position().map_or(0, |p| p.line() as usize);
        return Err(Error::Parse { row, msg: format!("non-finite {name}") });
    }
    Ok(v)
}

pub fn write_pair<T: Real, W: Write>(pair: &SeriesPair<T>, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(PAIR_HEADER)?;
    for (t, (x, y)) in pair.x().iter().zip(pair.y()).enumerate() {
        w.write_record([t.to_string(), format_number(x.as_f64()), format_number(y.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,x,y` file. Rows must be complete; the `t` column is not
/// interpreted beyond being present.
pub fn read_pair<T: Real, R: Read>(source: R) -> Result<SeriesPair<T>> {
    let mut rdr = reader(source, &PAIR_HEADER)?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        x.push(T::lit(finite(&rec, 1, "x")?));
        y.push(T::lit(finite(&rec, 2, "y")?));
    }
    SeriesPair::new(x, y)
}

pub fn save_pair<T: Real>(pair: &SeriesPair<T>, path: &Path) -> Result<()> {
    write_pair(pair, create(path)?)
}

pub fn load_pair<T: Real>(path: &Path) -> Result<SeriesPair<T>> {
    read_pair(open(path)?)
}

pub fn write_records<W: Write>(records: &[EstimateRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RECORDS_HEADER)?;
    for r in records {
        let h = r.outcome.h_hat().map(format_number).unwrap_or_default();
        w.write_record([
            r.estimator.as_str(),
            r.setting.as_str(),
            &format_number(r.alpha),
            &r.len.to_string(),
            &r.rep.to_string(),
            &h,
            &r.outcome.status(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(source: R) -> Result<Vec<EstimateRecord>> {
    let mut rdr = reader(source, &RECORDS_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let status = rec.get(6).unwrap_or_default();
        let outcome = match status.strip_prefix("failed:") {
            Some(kind) => Outcome::Failed(kind.to_owned()),
            None if status == "ok" => Outcome::Ok(finite(&rec, 5, "h_hat")?),
            None => {
                let row = rec.position().map_or(0, |p| p.line() as usize);
                return Err(Error::Parse { row, msg: format!("bad status `{status}`") });
            }
        };
        out.push(EstimateRecord {
            estimator: field::<EstimatorId>(&rec, 0, "estimator")?,
            setting: field::<SettingTag>(&rec, 1, "setting")?,
            alpha: finite(&rec, 2, "alpha")?,
            len: field(&rec, 3, "T")?,
            rep: field(&rec, 4, "rep")?,
            outcome,
        });
    }
    Ok(out)
}

pub fn save_records(records: &[EstimateRecord], path: &Path) -> Result<()> {
    write_records(records, create(path)?)
}

pub fn load_records(path: &Path) -> Result<Vec<EstimateRecord>> {
    read_records(open(path)?)
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        let mut fields = vec![
            r.estimator.as_str().to_owned(),
            r.setting.as_str().to_owned(),
            format_number(r.alpha),
            r.len.to_string(),
            r.n_ok.to_string(),
        ];
        match r.stats {
            Some(s) => fields.extend([s.mean, s.bias, s.sd, s.q025, s.q975, s.mse].map(format_number)),
            None => fields.extend(std::iter::repeat_n(MISSING.to_owned(), 6)),
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<R: Read>(source: R) -> Result<Vec<SummaryRow>> {
    let mut rdr = reader(source, &SUMMARY_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let stats = if rec.get(5) == Some(MISSING) {
            None
        } else {
            Some(SummaryStats {
                mean: finite(&rec, 5, "mean")?,
                bias: finite(&rec, 6, "bias")?,
                sd: finite(&rec, 7, "sd")?,
                q025: finite(&rec, 8, "q025")?,
                q975: finite(&rec, 9, "q975")?,
                mse: finite(&rec, 10, "mse")?,
            })
        };
        out.push(SummaryRow {
            estimator: field(&rec, 0, "estimator")?,
            setting: field(&rec, 1, "setting")?,
            alpha: finite(&rec, 2, "alpha")?,
            len: field(&rec, 3, "T")?,
            n_ok: field(&rec, 4, "n_ok")?,
            stats,
        });
    }
    Ok(out)
}

pub fn save_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    write_summary(rows, create(path)?)
}

pub fn load_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_summary(open(path)?)
}

pub fn write_curve<T: Real, W: Write>(curve: &FluctuationCurve<T>, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CURVE_HEADER)?;
    for &(s, v) in curve.points() {
        w.write_record([s.to_string(), format_number(v.as_f64())])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_periodogram<T: Real, W: Write>(pg: &CrossPeriodogram<T>, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(PERIODOGRAM_HEADER)?;
    for (&lambda, v) in pg.frequencies().iter().zip(pg.values()) {
        w.write_record([lambda, v.re, v.im, v.norm()].map(|z| format_number(z.as_f64())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_curve<T: Real>(curve: &FluctuationCurve<T>, path: &Path) -> Result<()> {
    write_curve(curve, create(path)?)
}

pub fn save_periodogram<T: Real>(pg: &CrossPeriodogram<T>, path: &Path) -> Result<()> {
    write_periodogram(pg, create(path)?)
}
