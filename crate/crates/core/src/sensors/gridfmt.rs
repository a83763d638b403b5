//! Plain-text grid format shared by pressure grids and thermal frames.
//!
//! ```text
//! # timestamp 12.5
//! 15 14 0.02 N
//! 0 0 0.49 ...
//! ```
//!
//! Lines starting with `#` carry `key value` metadata. The first other line
//! is the header `rows cols pitch units`; `rows` lines of `cols`
//! whitespace-separated values follow, row-major. For thermal frames the
//! pitch field holds the horizontal field of view in radians.

use super::{PressureGrid, ThermalFrame};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridFormatError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("missing header line")]
    MissingHeader,
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("unit `{found}` does not match expected `{expected}`")]
    Units { expected: &'static str, found: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridText {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    pub units: String,
    pub meta: BTreeMap<String, String>,
    pub values: Vec<f64>,
}

impl GridText {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} {v}");
        }
        let _ = writeln!(out, "{} {} {} {}", self.rows, self.cols, self.pitch, self.units);
        for row in self.values.chunks(self.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, GridFormatError> {
        let mut meta = BTreeMap::new();
        let mut header: Option<(usize, usize, f64, String)> = None;
        let mut values = Vec::new();
        let mut rows_seen = 0;
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.trim().splitn(2, char::is_whitespace);
                if let (Some(k), Some(v)) = (it.next(), it.next()) {
                    meta.insert(k.to_string(), v.trim().to_string());
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match &header {
                None => {
                    if fields.len() != 4 {
                        return Err(GridFormatError::Syntax(lineno, "header needs `rows cols pitch units`".into()));
                    }
                    let num = |s: &str, what: &str| {
                        s.parse::<usize>().map_err(|_| GridFormatError::Syntax(lineno, format!("bad {what} `{s}`")))
                    };
                    let rows = num(fields[0], "rows")?;
                    let cols = num(fields[1], "cols")?;
                    let pitch = fields[2]
                        .parse::<f64>()
                        .map_err(|_| GridFormatError::Syntax(lineno, format!("bad pitch `{}`", fields[2])))?;
                    header = Some((rows, cols, pitch, fields[3].to_string()));
                }
                Some((rows, cols, ..)) => {
                    if rows_seen == *rows {
                        return Err(GridFormatError::RowCount { expected: *rows, found: rows_seen + 1 });
                    }
                    if fields.len() != *cols {
                        return Err(GridFormatError::Syntax(
                            lineno,
                            format!("expected {cols} values, found {}", fields.len()),
                        ));
                    }
                    for f in fields {
                        let v = f
                            .parse::<f64>()
                            .map_err(|_| GridFormatError::Syntax(lineno, format!("bad value `{f}`")))?;
                        values.push(v);
                    }
                    rows_seen += 1;
                }
            }
        }
        let (rows, cols, pitch, units) = header.ok_or(GridFormatError::MissingHeader)?;
        if rows_seen != rows {
            return Err(GridFormatError::RowCount { expected: rows, found: rows_seen });
        }
        Ok(Self { rows, cols, pitch, units, meta, values })
    }

    fn meta_f64(&self, key: &str) -> f64 {
        self.meta.get(key).and_then(|v| v.parse().ok()).unwrap_or(0.0)
    }

    fn expect_units(&self, expected: &'static str) -> Result<(), GridFormatError> {
        if self.units == expected {
            Ok(())
        } else {
            Err(GridFormatError::Units { expected, found: self.units.clone() })
        }
    }
}

impl PressureGrid {
    pub const UNITS: &'static str = "N";

    pub fn to_text(&self) -> String {
        GridText {
            rows: self.rows,
            cols: self.cols,
            pitch: self.pitch,
            units: Self::UNITS.into(),
            meta: BTreeMap::from([("timestamp".to_string(), self.timestamp.to_string())]),
            values: self.forces.clone(),
        }
        .render()
    }

    pub fn from_text(text: &str) -> Result<Self, GridFormatError> {
        let g = GridText::parse(text)?;
        g.expect_units(Self::UNITS)?;
        Ok(Self { rows: g.rows, cols: g.cols, pitch: g.pitch, timestamp: g.meta_f64("timestamp"), forces: g.values })
    }
}

impl ThermalFrame {
    pub const UNITS: &'static str = "degC";

    pub fn to_text(&self) -> String {
        GridText {
            rows: self.rows,
            cols: self.cols,
            pitch: self.hfov,
            units: Self::UNITS.into(),
            meta: BTreeMap::from([
                ("timestamp".to_string(), self.timestamp.to_string()),
                ("max_range".to_string(), self.max_range.to_string()),
                ("pan".to_string(), self.pan.to_string()),
            ]),
            values: self.pixels.clone(),
        }
        .render()
    }

    pub fn from_text(text: &str) -> Result<Self, GridFormatError> {
        let g = GridText::parse(text)?;
        g.expect_units(Self::UNITS)?;
        Ok(Self {
            rows: g.rows,
            cols: g.cols,
            hfov: g.pitch,
            max_range: g.meta_f64("max_range"),
            pan: g.meta_f64("pan"),
            timestamp: g.meta_f64("timestamp"),
            pixels: g.values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn pressure_grid_round_trips(forces in prop::collection::vec(0.0f64..50.0, 210), t in 0.0f64..1e4) {
            let g = PressureGrid { rows: 15, cols: 14, forces, pitch: 0.02, timestamp: t };
            prop_assert_eq!(PressureGrid::from_text(&g.to_text()).unwrap(), g);
        }

        #[test]
        fn thermal_frame_round_trips(pixels in prop::collection::vec(-40.0f64..200.0, 768), pan in -1.3f64..1.3) {
            let f = ThermalFrame { rows: 24, cols: 32, pixels, hfov: 0.995, max_range: 5.0, pan, timestamp: 3.5 };
            prop_assert_eq!(ThermalFrame::from_text(&f.to_text()).unwrap(), f);
        }
    }

    #[test]
    fn header_layout() {
        let g = PressureGrid::zeros(2, 3, 0.02);
        let text = g.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, ["# timestamp 0", "2 3 0.02 N", "0 0 0", "0 0 0"]);
    }

    #[test]
    fn malformed_inputs() {
        assert_eq!(GridText::parse("# only\n"), Err(GridFormatError::MissingHeader));
        assert!(matches!(GridText::parse("2 2 0.02\n"), Err(GridFormatError::Syntax(1, _))));
        assert!(matches!(GridText::parse("2 2 0.02 N\n1 2\n"), Err(GridFormatError::RowCount { .. })));
        assert!(matches!(GridText::parse("1 2 0.02 N\n1 x\n"), Err(GridFormatError::Syntax(2, _))));
        assert!(matches!(GridText::parse("1 2 0.02 N\n1 2 3\n"), Err(GridFormatError::Syntax(2, _))));
        assert!(matches!(PressureGrid::from_text("1 1 0.02 degC\n1\n"), Err(GridFormatError::Units { .. })));
    }
}
