//! CSV artifacts: comma separated, LF line endings, header row, floats with
//! 17 significant digits.

use std::path::Path;

use mpa_core::{EquilibriumReport, Error};

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub struct CsvFile {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvFile {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        CsvFile { writer }
    }

    pub fn record<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }

    pub fn write_to(self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.into_bytes())
            .map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display())))
    }
}

pub const EQUILIBRIUM_HEADER: [&str; 8] = [
    "x1_star",
    "x2_star",
    "E_star",
    "lambda_star",
    "J_star",
    "normal",
    "profitable",
    "feasible",
];

pub fn equilibrium_row(r: &EquilibriumReport) -> Vec<String> {
    vec![
        float(r.x1_star),
        float(r.x2_star),
        float(r.e_star),
        opt_float(r.lambda_star),
        float(r.j_star),
        r.normal.to_string(),
        r.profitable.to_string(),
        r.feasible.to_string(),
    ]
}
