//! Subcommand implementations. Each writes its artifacts into the output
//! directory and returns the paths written plus a short summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use spdc_core::biphoton::thin_crystal_error;
use spdc_core::decomposition::{classical_witness_with, default_delta_samples, selection_defect, spiral_spectrum, truncation_tail};
use spdc_core::hom::{coincidence_map, count_lobes, ApertureAveraging};
use spdc_core::modes::{BoundMode, ConverterOrientation, Pi2Converter};
use spdc_core::{BeamSpec, HGIndex, LGIndex, QuadratureSpec, Regime, ScanGrid, TransverseMode, TransversePoint};

use crate::config::{OutputFormat, RunConfig};
use crate::gridfile::{fmt_f64, GridFile};
use crate::CliError;

/// Aperture sampling cells per disc: rings × sectors.
pub const APERTURE_RINGS: usize = 4;
pub const APERTURE_SECTORS: usize = 8;

/// Everything a command needs besides its own arguments.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
}

/// Files written and a human-readable summary.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub summary: String,
}

impl Context {
    pub fn new(config: RunConfig, out_dir: Option<PathBuf>, seed: u64) -> Self {
        let out_dir = out_dir.unwrap_or_else(|| config.output.directory.clone());
        Self { config, out_dir, seed }
    }

    fn base_header(&self, command: &str) -> Vec<(String, String)> {
        vec![
            ("command".into(), command.into()),
            ("config_sha256".into(), self.config.hash()),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    fn ensure_dir(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir).map_err(|e| CliError::io(&self.out_dir, e))
    }

    fn write_text(&self, name: &str, text: &str, outcome: &mut Outcome) -> Result<(), CliError> {
        self.ensure_dir()?;
        let path = self.out_dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        outcome.written.push(path);
        Ok(())
    }

    fn write_grid(&self, stem: &str, mut file: GridFile, command: &str, outcome: &mut Outcome) -> Result<(), CliError> {
        let mut header = self.base_header(command);
        header.append(&mut file.header);
        file.header = header;
        let mut formats = self.config.output.formats.clone();
        formats.sort();
        formats.dedup();
        for f in formats {
            match f {
                OutputFormat::Csv => self.write_text(&format!("{stem}.csv"), &file.to_csv(), outcome)?,
                OutputFormat::Pgm => self.write_text(&format!("{stem}.pgm"), &file.to_pgm(), outcome)?,
            }
        }
        Ok(())
    }

    fn header_text(&self, command: &str, extra: &[(&str, String)]) -> String {
        let mut out = String::new();
        for (k, v) in self.base_header(command) {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        for (k, v) in extra {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        out
    }
}

/// Mode selected for `modes eval`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Lg(LGIndex),
    Hg(HGIndex),
    /// Diagonal HG mode after the π/2 converter.
    Converted(HGIndex),
}

enum FieldSource {
    Bound(BoundMode),
    Converter(Box<Pi2Converter>, BeamSpec),
}

impl FieldSource {
    fn field(&self, p: TransversePoint, z: f64) -> spdc_core::num_complex::Complex64 {
        match self {
            FieldSource::Bound(m) => m.field(p, z),
            FieldSource::Converter(c, beam) => c.output_field(beam, p, z),
        }
    }
}

/// `|field|` and `arg(field)` grids of a single mode bound to the pump beam.
pub fn modes_eval(ctx: &Context, choice: ModeChoice, z: f64) -> Result<Outcome, CliError> {
    if !z.is_finite() {
        return Err(CliError::Input(format!("z must be finite, got {z}")));
    }
    let beam = ctx.config.beam();
    let (source, order, label) = match choice {
        ModeChoice::Lg(i) => {
            let i = LGIndex::new(i.p, i.l)?;
            (FieldSource::Bound(TransverseMode::Lg(i).bind(beam)?), i.order(), i.to_string())
        }
        ModeChoice::Hg(i) => {
            let i = HGIndex::new(i.m, i.n)?;
            (FieldSource::Bound(TransverseMode::Hg(i).bind(beam)?), i.order(), i.to_string())
        }
        ModeChoice::Converted(i) => {
            let conv = Pi2Converter::new(i, ConverterOrientation::Plus45)?;
            let label = format!("pi/2-converted {i}");
            (FieldSource::Converter(Box::new(conv), beam), i.order(), label)
        }
    };
    let grid = match ctx.config.scan.x_min_mm {
        Some(_) => ctx.config.scan_grid(&ctx.config.model()?)?,
        None => {
            let half = beam.radius_at(z) * (3.0 + (order as f64).sqrt());
            ScanGrid::centered(TransversePoint::ORIGIN, half, ctx.config.scan.nx)?
        }
    };
    let fields: Vec<_> = (0..grid.ny)
        .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
        .map(|(i, j)| source.field(grid.point(i, j), z))
        .collect();

    let mut outcome = Outcome::default();
    for (stem, values, quantity) in [
        ("mode_magnitude", fields.iter().map(|f| f.norm()).collect::<Vec<_>>(), "abs(field) [1/m]"),
        ("mode_phase", fields.iter().map(|f| f.arg()).collect(), "arg(field) [rad]"),
    ] {
        let mut file = GridFile::new(grid, values);
        file.push("mode", &label);
        file.push("z_m", fmt_f64(z));
        file.push("quantity", quantity);
        ctx.write_grid(stem, file, "modes eval", &mut outcome)?;
    }
    outcome.summary = format!("{label} on {} × {} grid at z = {z} m", grid.nx, grid.ny);
    Ok(outcome)
}

fn map_command(ctx: &Context, regime: Regime, stem: &str, command: &str) -> Result<(Outcome, spdc_core::CoincidenceMap), CliError> {
    let cfg = &ctx.config;
    let model = cfg.model()?;
    let bs = cfg.beamsplitter_spec()?;
    let d2 = cfg.d2_point();
    let grid = cfg.scan_grid(&model)?;
    let aperture = if cfg.apertures.enabled {
        Some(ApertureAveraging::new(
            cfg.apertures.d1_radius_mm * 1e-3,
            cfg.apertures.d2_radius_mm * 1e-3,
            APERTURE_RINGS,
            APERTURE_SECTORS,
            ctx.seed,
        )?)
    } else {
        None
    };
    let map = coincidence_map(&model, &bs, &grid, d2, regime, aperture.as_ref())?;
    let mut file = GridFile::from_map(&map);
    file.push("pump", format!("LG(p={}, l={})", cfg.pump.p, cfg.pump.l));
    file.push("apertures", cfg.apertures.enabled);
    let mut outcome = Outcome::default();
    ctx.write_grid(stem, file, command, &mut outcome)?;
    Ok((outcome, map))
}

/// Unbalanced (non-interfering) coincidence map.
pub fn biphoton_map(ctx: &Context) -> Result<Outcome, CliError> {
    let (mut outcome, map) = map_command(ctx, Regime::Unbalanced, "biphoton_map", "biphoton map")?;
    outcome.summary = format!("unbalanced map, raw max {:.6e}", map.raw_max);
    Ok(outcome)
}

/// Coincidence map in the configured regime, plus a summary sidecar.
pub fn hom_scan(ctx: &Context) -> Result<Outcome, CliError> {
    let (mut outcome, map) = map_command(ctx, ctx.config.regime(), "hom_scan", "hom scan")?;
    let lobes = count_lobes(&map);
    let (mut best, mut at) = (f64::NEG_INFINITY, (0, 0));
    for j in 0..map.grid.ny {
        for i in 0..map.grid.nx {
            if map.value(i, j) > best {
                best = map.value(i, j);
                at = (i, j);
            }
        }
    }
    let mut text = ctx.header_text("hom scan", &[]);
    writeln!(text, "regime = \"{}\"", map.regime).unwrap();
    writeln!(text, "lobes = {lobes}").unwrap();
    writeln!(text, "max_x_mm = {}", fmt_f64(map.grid.x(at.0) * 1e3)).unwrap();
    writeln!(text, "max_y_mm = {}", fmt_f64(map.grid.y(at.1) * 1e3)).unwrap();
    writeln!(text, "raw_max = {}", fmt_f64(map.raw_max)).unwrap();
    ctx.write_text("hom_scan_summary.txt", &text, &mut outcome)?;
    outcome.summary = format!(
        "{} map: {lobes} lobes, maximum at ({:.4}, {:.4}) mm",
        map.regime,
        map.grid.x(at.0) * 1e3,
        map.grid.y(at.1) * 1e3
    );
    Ok(outcome)
}

/// Coefficient table, marginal spiral spectrum and selection-rule check.
pub fn decompose(ctx: &Context) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let pump = cfg.pump_spec();
    let n_max = cfg.decomposition.n_max;
    let table = spiral_spectrum(&pump, n_max)?;
    let defect = selection_defect(&pump, n_max)?;
    let tail = truncation_tail(&pump, n_max)?;
    let extra = [
        ("pump", format!("LG(p={}, l={})", cfg.pump.p, cfg.pump.l)),
        ("n_max", n_max.to_string()),
        ("raw_norm", fmt_f64(table.normalization)),
        ("selection_defect", fmt_f64(defect.ratio())),
        ("truncation_tail", fmt_f64(tail)),
    ];
    let mut coeffs = ctx.header_text("decompose", &extra);
    writeln!(coeffs, "ls,ps,li,pi,re,im,abs2").unwrap();
    for (k, c) in &table.entries {
        writeln!(coeffs, "{},{},{},{},{},{},{}", k.ls, k.ps, k.li, k.pi, fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm_sqr()))
            .unwrap();
    }
    let mut spectrum = ctx.header_text("decompose", &extra);
    writeln!(spectrum, "m,P").unwrap();
    let marginal = table.marginal();
    for (m, p) in &marginal {
        writeln!(spectrum, "{m},{}", fmt_f64(*p)).unwrap();
    }
    let mut outcome = Outcome::default();
    ctx.write_text("coefficients.csv", &coeffs, &mut outcome)?;
    ctx.write_text("spectrum.csv", &spectrum, &mut outcome)?;
    let top = marginal.iter().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0))).map(|(m, p)| (*m, *p));
    outcome.summary = format!(
        "{} coefficients; selection defect {:.3e}; truncation tail {:.4}; largest P(m) at m = {} ({:.5})",
        table.entries.len(),
        defect.ratio(),
        tail,
        top.map_or(0, |t| t.0),
        top.map_or(0.0, |t| t.1)
    );
    Ok(outcome)
}

/// Quantum vs classical coincidence probability along the translated null line.
pub fn witness(ctx: &Context, deltas_mm: &[(f64, f64)]) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let pump = cfg.pump_spec();
    let deltas: Vec<TransversePoint> = if deltas_mm.is_empty() {
        default_delta_samples(&pump)
    } else {
        deltas_mm.iter().map(|&(x, y)| TransversePoint::new(x * 1e-3, y * 1e-3)).collect()
    };
    let report = classical_witness_with(&pump, &deltas, cfg.decomposition.n_max)?;
    let (s0, i0) = report.zero_point;
    let extra = [
        ("pump", format!("LG(p={}, l={})", cfg.pump.p, cfg.pump.l)),
        ("rho_s0_mm", format!("{},{}", fmt_f64(s0.x * 1e3), fmt_f64(s0.y * 1e3))),
        ("rho_i0_mm", format!("{},{}", fmt_f64(i0.x * 1e3), fmt_f64(i0.y * 1e3))),
        ("quantum_scale", fmt_f64(report.quantum_scale)),
        ("classical_scale", fmt_f64(report.classical_scale)),
        ("verdict", report.verdict.to_string()),
    ];
    let mut text = ctx.header_text("witness", &extra);
    writeln!(text, "dx_mm,dy_mm,quantum_P,classical_Pcc").unwrap();
    for ((d, q), c) in report.translation_samples.iter().zip(&report.quantum_p_values).zip(&report.classical_pcc_values) {
        writeln!(text, "{},{},{},{}", fmt_f64(d.x * 1e3), fmt_f64(d.y * 1e3), fmt_f64(*q), fmt_f64(*c)).unwrap();
    }
    let mut outcome = Outcome::default();
    ctx.write_text("witness.csv", &text, &mut outcome)?;
    outcome.summary = format!("verdict: {}", report.verdict);
    Ok(outcome)
}

/// Orders used by `validate thin-crystal` when none are given.
pub const DEFAULT_ORDERS: [u32; 4] = [4, 16, 64, 100];

/// Worst-case thin-crystal error per mode order, on the configured plane or at
/// `rayleigh_multiple · z_R` when given.
pub fn validate_thin_crystal(ctx: &Context, orders: &[u32], rayleigh_multiple: Option<f64>) -> Result<Outcome, CliError> {
    let cfg = &ctx.config;
    let beam = cfg.beam();
    let crystal = cfg.crystal_params()?;
    let z = match rayleigh_multiple {
        Some(k) if k > 0.0 && k.is_finite() => k * beam.rayleigh_range(),
        Some(k) => return Err(CliError::Input(format!("Rayleigh multiple must be positive, got {k}"))),
        None => cfg.detection.z_m,
    };
    let spec = QuadratureSpec::default();
    let extra = [("Z_m", fmt_f64(z)), ("crystal_length_mm", fmt_f64(cfg.crystal.length_mm))];
    let mut text = ctx.header_text("validate thin-crystal", &extra);
    writeln!(text, "N,p,l,epsilon").unwrap();
    let mut worst = 0.0_f64;
    for &n in orders {
        let check = thin_crystal_error(&crystal, &beam, n, z, &spec)?;
        worst = worst.max(check.epsilon());
        writeln!(text, "{n},{},{},{}", check.worst.p, check.worst.abs_l, fmt_f64(check.epsilon())).unwrap();
    }
    let mut outcome = Outcome::default();
    ctx.write_text("thin_crystal.csv", &text, &mut outcome)?;
    outcome.summary = format!("{} orders at Z = {z:.4} m, largest epsilon {worst:.3e}", orders.len());
    Ok(outcome)
}

/// Data rows of a CSV written by this module, without `#` headers or the column line.
pub fn read_table(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}
