//! CSV serialization of traces, heatmaps and OTOC series.
//!
//! Every file may begin with `# key=value` comment lines; readers return
//! them alongside the numeric columns.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use crate::analysis::HeatmapData;
use crate::error::{Error, Result};
use crate::otoc::OtocTrace;
use crate::qlif::{QlifHeatmap, QlifTrace};

pub const TRACE_COLUMNS: [&str; 6] = ["time", "T_d", "S_full", "S_frozen", "integral", "below_floor"];

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn write_preamble<W: Write>(out: &mut W, preamble: &[(String, String)]) -> Result<()> {
    for (k, v) in preamble {
        writeln!(out, "# {k}={v}")?;
    }
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &QlifTrace, preamble: &[(String, String)]) -> Result<()> {
    write_preamble(&mut out, preamble)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
    for k in 0..trace.times.len() {
        w.write_record([
            num(trace.times[k]),
            num(trace.t_d[k]),
            num(trace.s_full[k]),
            num(trace.s_frozen[k]),
            num(trace.integral[k]),
            u8::from(trace.below_floor[k]).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `|T_d(t)|` with one row per distance; the header row holds the times.
pub fn write_heatmap_csv<W: Write>(mut out: W, heatmap: &QlifHeatmap, preamble: &[(String, String)]) -> Result<()> {
    write_preamble(&mut out, preamble)?;
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("d".to_string()).chain(heatmap.times.iter().map(|t| num(*t)));
    w.write_record(header).map_err(csv_err)?;
    for row in &heatmap.rows {
        let rec = std::iter::once(row.distance().to_string()).chain(row.t_d.iter().map(|v| num(v.abs())));
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_otoc_csv<W: Write>(mut out: W, trace: &OtocTrace, preamble: &[(String, String)]) -> Result<()> {
    write_preamble(&mut out, preamble)?;
    let mut w = csv::Writer::from_writer(out);
    let distances = trace.distances();
    let header = std::iter::once("time".to_string()).chain(distances.iter().map(|d| format!("C_d{d}")));
    w.write_record(header).map_err(csv_err)?;
    for (k, t) in trace.times.iter().enumerate() {
        let rec = std::iter::once(num(*t)).chain(trace.values.iter().map(|c| num(c[k])));
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Splits leading `# key=value` lines from the CSV body.
fn split_preamble<R: Read>(input: R) -> Result<(BTreeMap<String, String>, String)> {
    let mut meta = BTreeMap::new();
    let mut body = String::new();
    for line in BufReader::new(input).lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    Ok((meta, body))
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse {what} value {field:?}")))
}

/// Columns of a trace CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceTable {
    pub meta: BTreeMap<String, String>,
    pub times: Vec<f64>,
    pub t_d: Vec<f64>,
    pub integral: Vec<f64>,
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<TraceTable> {
    let (meta, body) = split_preamble(input)?;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().map_err(csv_err)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Parse(format!("trace CSV has no {name:?} column")))
    };
    let (ti, di) = (col("time")?, col("T_d")?);
    let ii = col("integral").ok();
    let mut table = TraceTable {
        meta,
        ..Default::default()
    };
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        table.times.push(parse_f64(&rec[ti], "time")?);
        table.t_d.push(parse_f64(&rec[di], "T_d")?);
        if let Some(ii) = ii {
            table.integral.push(parse_f64(&rec[ii], "integral")?);
        }
    }
    if ii.is_none() {
        table.integral = crate::qlif::trapezoid(&table.times, &table.t_d);
    }
    Ok(table)
}

pub fn read_heatmap_csv<R: Read>(input: R) -> Result<(BTreeMap<String, String>, HeatmapData)> {
    let (meta, body) = split_preamble(input)?;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().map_err(csv_err)?.clone();
    let times = headers
        .iter()
        .skip(1)
        .map(|h| parse_f64(h, "time"))
        .collect::<Result<Vec<f64>>>()?;
    let mut data = HeatmapData {
        times,
        distances: Vec::new(),
        rows: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let d = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse distance {:?}", &rec[0])))?;
        data.distances.push(d);
        data.rows.push(
            rec.iter()
                .skip(1)
                .map(|v| parse_f64(v, "|T_d|"))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((meta, data))
}
