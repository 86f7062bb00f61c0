//! Grid artifacts: CSV with `# key: value` headers and 16-bit PGM.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use spdc_core::{CoincidenceMap, ScanGrid};

/// Value matrix on a rectangular grid, with header metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub header: Vec<(String, String)>,
    pub grid: ScanGrid,
    /// Row-major, `values[j * nx + i]` at `(x_i, y_j)`.
    pub values: Vec<f64>,
}

impl GridFile {
    pub fn new(grid: ScanGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count must match the grid");
        Self { header: Vec::new(), grid, values }
    }

    pub fn from_map(map: &CoincidenceMap) -> Self {
        let mut g = Self::new(map.grid, map.values.clone());
        g.push("regime", map.regime);
        g.push("d2_x_mm", fmt_f64(map.fixed_detector.x * 1e3));
        g.push("d2_y_mm", fmt_f64(map.fixed_detector.y * 1e3));
        g.push("raw_max", fmt_f64(map.raw_max));
        g
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut out = String::new();
        for (k, v) in &self.header {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        writeln!(out, "# nx: {}", g.nx).unwrap();
        writeln!(out, "# ny: {}", g.ny).unwrap();
        writeln!(out, "x_mm,y_mm,value").unwrap();
        for j in 0..g.ny {
            let y = fmt_f64(g.y(j) * 1e3);
            for i in 0..g.nx {
                writeln!(out, "{},{},{}", fmt_f64(g.x(i) * 1e3), y, fmt_f64(self.values[j * g.nx + i])).unwrap();
            }
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, String> {
        let mut header = Vec::new();
        let mut nx = None;
        let mut ny = None;
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once(": ").ok_or_else(|| format!("line {}: malformed header", n + 1))?;
                match k {
                    "nx" => nx = Some(v.parse::<usize>().map_err(|e| format!("line {}: {e}", n + 1))?),
                    "ny" => ny = Some(v.parse::<usize>().map_err(|e| format!("line {}: {e}", n + 1))?),
                    _ => header.push((k.to_string(), v.to_string())),
                }
                continue;
            }
            if line == "x_mm,y_mm,value" || line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::parse::<f64>);
            let mut next = || {
                cols.next()
                    .ok_or_else(|| format!("line {}: expected 3 columns", n + 1))?
                    .map_err(|e| format!("line {}: {e}", n + 1))
            };
            rows.push((next()?, next()?, next()?));
        }
        let (nx, ny) = (nx.ok_or("missing nx header")?, ny.ok_or("missing ny header")?);
        if rows.len() != nx * ny || nx < 2 || ny < 2 {
            return Err(format!("expected {nx} × {ny} rows, found {}", rows.len()));
        }
        let first = rows[0];
        let last = rows[rows.len() - 1];
        let grid = ScanGrid::new(first.0 * 1e-3, last.0 * 1e-3, first.1 * 1e-3, last.1 * 1e-3, nx, ny)
            .map_err(|e| e.to_string())?;
        Ok(Self { header, grid, values: rows.into_iter().map(|r| r.2).collect() })
    }

    pub fn save_csv(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_csv())
    }

    pub fn load_csv(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse_csv(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))
    }

    /// Plain PGM, 16-bit, scaled from the value range to `0..=65535`; the top row is `y_max`.
    pub fn to_pgm(&self) -> String {
        let g = &self.grid;
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let mut out = String::new();
        writeln!(out, "P2").unwrap();
        for (k, v) in &self.header {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        writeln!(out, "{} {}", g.nx, g.ny).unwrap();
        writeln!(out, "65535").unwrap();
        for j in (0..g.ny).rev() {
            let row: Vec<String> = (0..g.nx)
                .map(|i| {
                    let v = self.values[j * g.nx + i];
                    let level = if span > 0.0 { ((v - lo) / span * 65535.0).round() } else { 0.0 };
                    (level.clamp(0.0, 65535.0) as u32).to_string()
                })
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }

    pub fn save_pgm(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.to_pgm())
    }
}

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
