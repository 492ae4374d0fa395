//! Output records and their JSON and CSV encodings.
//!
//! JSON is written compactly on one line. Every float is printed with 17
//! significant digits in exponent form, so a parse and re-serialize cycle
//! reproduces the exact bytes.

use std::io::{self, Write};

use bellcond_core::{CorrelationReport, EstimateReport, TallyTable};
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::config::ConfigEcho;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub tally: TallyTable,
    pub estimates: EstimateReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRecord {
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub analytic: CorrelationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
}

/// Compact JSON with fixed-precision floats.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value
        .serialize(&mut ser)
        .expect("output records contain only finite numbers");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

impl OutputRecord {
    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Long-form CSV: `quantity,i,j,value`, one row per table cell.
    pub fn to_csv(&self) -> String {
        let mut w = csv_writer();
        w.write_record(["quantity", "i", "j", "value"]).unwrap();
        let a = &self.analytic;
        table(&mut w, "C_ij", &a.pair.map(|r| r.map(Some)));
        table(&mut w, "g_ij", &a.weights.map(|r| r.map(Some)));
        table(&mut w, "c_ij", &a.complete.map(|r| r.map(Some)));
        table(&mut w, "conditional_ij", &a.conditional);
        scalar(&mut w, "C", Some(a.chsh_conditional));
        scalar(&mut w, "c", Some(a.chsh_complete));
        if let Some(sim) = &self.simulation {
            let e = &sim.estimates;
            let se = &e.standard_errors;
            table(
                &mut w,
                "N_ij",
                &e.setting_counts.map(|r| r.map(|n| Some(n as f64))),
            );
            table(&mut w, "C_hat_ij", &e.conditional);
            table(&mut w, "C_hat_se_ij", &se.conditional);
            table(&mut w, "c_hat_ij", &e.unconditional.map(|r| r.map(Some)));
            table(&mut w, "c_hat_se_ij", &se.unconditional);
            table(&mut w, "inflation_ij", &e.inflation);
            table(&mut w, "inflation_se_ij", &se.inflation);
            scalar(&mut w, "C_hat", e.chsh_conditional_hat);
            scalar(&mut w, "C_hat_se", se.chsh_conditional_hat);
            scalar(&mut w, "c_hat", Some(e.chsh_complete_hat));
            scalar(&mut w, "c_hat_se", se.chsh_complete_hat);
            scalar(&mut w, "total", Some(e.total as f64));
        }
        finish(w)
    }
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .delimiter(b',')
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ASCII output")
}

/// Shortest round-trip decimal, empty for absent values.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn table(w: &mut csv::Writer<Vec<u8>>, name: &str, t: &[[Option<f64>; 2]; 2]) {
    for (i, row) in t.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            w.write_record([name, &i.to_string(), &j.to_string(), &cell(*v)])
                .unwrap();
        }
    }
}

fn scalar(w: &mut csv::Writer<Vec<u8>>, name: &str, v: Option<f64>) {
    w.write_record([name, "", "", &cell(v)]).unwrap();
}
