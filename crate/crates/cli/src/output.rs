//! Report serialization: JSON with 17 significant digits, CSV tables.

use std::io;

use riemann_entropy::fd_oracle::FdSolution;
use riemann_entropy::profile::{SampleRow, Side};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty JSON whose floats carry 17 significant digits.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_float(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `d.dddddddddddddddde±x`; non-finite values print as `inf`, `-inf`, `NaN`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    let mut text = String::from_utf8(buf).expect("serde_json writes UTF-8");
    text.push('\n');
    text
}

fn write_table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("ASCII")
}

/// Columns `xi,u,side`, or `x,u,side` with `x = t·ξ` when a time is given.
pub fn sample_csv(rows: &[SampleRow], time: Option<f64>) -> String {
    let first = if time.is_some() { "x" } else { "xi" };
    let scale = time.unwrap_or(1.0);
    write_table(
        &[first, "u", "side"],
        rows.iter().map(|r| {
            vec![
                format_float(scale * r.xi),
                format_float(r.u),
                r.side.as_str().to_string(),
            ]
        }),
    )
}

pub fn read_sample_csv(text: &str) -> Result<Vec<SampleRow>, String> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .enumerate()
        .map(|(i, record)| {
            let record = record.map_err(|e| e.to_string())?;
            let line = i + 2;
            let float = |j: usize| -> Result<f64, String> {
                record
                    .get(j)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| format!("line {line}: bad number in column {}", j + 1))
            };
            let side = record
                .get(2)
                .and_then(Side::parse)
                .ok_or_else(|| format!("line {line}: bad side marker"))?;
            Ok(SampleRow {
                xi: float(0)?,
                u: float(1)?,
                side,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct GridRow {
    x: f64,
    u: f64,
}

pub fn fd_csv(fd: &FdSolution) -> String {
    write_table(
        &["x", "u"],
        fd.x_centers
            .iter()
            .zip(&fd.values)
            .map(|(x, u)| vec![format_float(*x), format_float(*u)]),
    )
}

pub fn fd_json(fd: &FdSolution) -> String {
    let rows: Vec<GridRow> = fd
        .x_centers
        .iter()
        .zip(&fd.values)
        .map(|(&x, &u)| GridRow { x, u })
        .collect();
    to_json(&rows)
}
