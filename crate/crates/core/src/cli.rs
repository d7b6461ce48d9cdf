//! `ris-sim` command implementations.
//!
//! Every command reads a [`RunConfig`](crate::config::RunConfig), writes its
//! artifacts under `--out`, and returns a short report for stdout. Exit codes:
//! 0 success, 2 input or validation error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codebook::{code_for, phase_compensation, BeamTarget, CodeMatrix};
use crate::config::{KeyValues, Overrides, RunConfig};
use crate::control::{compile, decompile, ControlFrame};
use crate::error::Error;
use crate::farfield::{metrics, radiate, radiate_fast, AngularGrid, FarFieldPattern, PatternMetrics, MAG_DB_FLOOR};
use crate::link::{calibrate, evaluate, read_observations, LinkScenario};

#[derive(Debug, Parser)]
#[command(name = "ris-sim", version, about = "1-bit transmissive RIS simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key=value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long = "freq-ghz", global = true)]
    pub freq_ghz: Option<f64>,
    /// Output directory (default `ris-out`)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelArg>,
    /// S21 table for the tabulated model
    #[arg(long, global = true, value_name = "PATH")]
    pub s21: Option<PathBuf>,
    /// Use the transform-accelerated pattern path (u-v cut grids)
    #[arg(long, global = true)]
    pub fast: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Ideal,
    Circuit,
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    /// Principal theta cuts through phi0 and phi0 + 90
    Polar,
    /// Two u-v cuts along the x and y axes
    Uv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase compensation and 1-bit code for one beam direction
    Codebook {
        #[arg(long, allow_negative_numbers = true)]
        theta0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi0: f64,
    },
    /// Radiation pattern and metrics of a code file
    Pattern {
        #[arg(long, value_name = "PATH")]
        code: PathBuf,
        /// Azimuth of the first principal cut
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
        /// Defaults to `uv` with --fast, `polar` otherwise
        #[arg(long, value_enum)]
        grid: Option<GridArg>,
        #[arg(long = "uv-points", default_value_t = 181)]
        uv_points: usize,
    },
    /// Codebook and pattern for a list of elevation angles
    Scan {
        /// Comma-separated elevation angles (deg)
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
    },
    /// Link budget for a scenario file, or calibration against observations
    Link {
        #[arg(long, value_name = "PATH", conflicts_with = "calibrate")]
        scenario: Option<PathBuf>,
        /// CSV `d1_m,p_without_dbm,p_with_dbm`
        #[arg(long, value_name = "PATH")]
        calibrate: Option<PathBuf>,
        /// Keep the system offset at its scenario value instead of fitting it
        #[arg(long = "fix-offset")]
        fix_offset: bool,
    },
    /// Compile a code file into a control frame (or back with --decompile)
    #[command(name = "compile-frame")]
    CompileFrame {
        input: PathBuf,
        #[arg(long)]
        decompile: bool,
    },
}

/// Failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroPattern | Error::MainLobeClipped | Error::BelowThreshold { .. } => 3,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the stdout report.
pub fn run<I, T>(args: I) -> CliResult<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        let code = match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    })?;
    execute(&cli)
}

pub fn execute(cli: &Cli) -> CliResult<String> {
    let overrides = Overrides {
        freq_ghz: cli.common.freq_ghz,
        out: cli.common.out.clone(),
        model: cli.common.model.map(|m| {
            match m {
                ModelArg::Ideal => "ideal",
                ModelArg::Circuit => "circuit",
                ModelArg::Tabulated => "tabulated",
            }
            .to_string()
        }),
        s21: cli.common.s21.clone(),
    };
    let cfg = RunConfig::load(cli.common.config.as_deref(), &overrides)?;
    match &cli.command {
        Command::Codebook { theta0, phi0 } => cmd_codebook(&cfg, *theta0, *phi0),
        Command::Pattern {
            code,
            phi0,
            grid,
            uv_points,
        } => {
            let grid = grid.unwrap_or(if cli.common.fast { GridArg::Uv } else { GridArg::Polar });
            cmd_pattern(&cfg, code, *phi0, grid, *uv_points, cli.common.fast)
        }
        Command::Scan { theta, phi0 } => cmd_scan(&cfg, theta, *phi0, cli.common.fast),
        Command::Link {
            scenario,
            calibrate,
            fix_offset,
        } => cmd_link(&cfg, scenario.as_deref(), calibrate.as_deref(), !fix_offset),
        Command::CompileFrame { input, decompile } => cmd_compile(&cfg, input, *decompile),
    }
}

/// Caps rayon's global pool from `RIS_SIM_THREADS` (unset or 0 = automatic).
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("RIS_SIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| CliError {
        code: 2,
        message: format!("invalid RIS_SIM_THREADS: `{raw}` is not a non-negative integer"),
    })?;
    if n > 0 {
        // A pool that already exists keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(path)
}

fn codebook_files(cfg: &RunConfig, dir: &Path, theta0: f64, phi0: f64) -> CliResult<CodeMatrix> {
    let target = BeamTarget::new(theta0, phi0, cfg.freq_hz)?;
    let phases = phase_compensation(&cfg.layout, &target);
    let code = code_for(&cfg.layout, &target);
    write(dir, "phase.csv", phases.to_csv())?;
    write(dir, "code.txt", code.to_string())?;
    Ok(code)
}

pub fn cmd_codebook(cfg: &RunConfig, theta0: f64, phi0: f64) -> CliResult<String> {
    let code = codebook_files(cfg, &cfg.out_dir, theta0, phi0)?;
    Ok(format!(
        "wrote {}/phase.csv and code.txt ({} of {} cells in state 1)\n",
        cfg.out_dir.display(),
        code.count_ones(),
        code.bits().len()
    ))
}

/// Pattern CSV over several patterns, with magnitudes relative to their common peak.
fn patterns_csv(patterns: &[FarFieldPattern]) -> String {
    let peak = patterns.iter().map(|p| p.peak_magnitude()).fold(0.0, f64::max);
    let mut out = String::from("theta_deg,phi_deg,mag_db,real,imag\n");
    for p in patterns {
        for (d, e) in p.directions().iter().zip(p.field()) {
            let db = if peak == 0.0 {
                MAG_DB_FLOOR
            } else {
                (20.0 * (e.norm() / peak).log10()).max(MAG_DB_FLOOR)
            };
            out.push_str(&format!(
                "{:.4},{:.4},{:.6},{:.12e},{:.12e}\n",
                d.theta_deg, d.phi_deg, db, e.re, e.im
            ));
        }
    }
    out
}

fn compute_pattern(
    cfg: &RunConfig,
    code: &CodeMatrix,
    phi0: f64,
    grid: GridArg,
    uv_points: usize,
    fast: bool,
) -> CliResult<(String, PatternMetrics)> {
    let grids = match grid {
        GridArg::Polar => {
            if fast {
                return Err(Error::NonUniformGrid.into());
            }
            vec![AngularGrid::principal_cuts(phi0, cfg.theta_step_deg)?]
        }
        GridArg::Uv => vec![AngularGrid::uv_cut_x(uv_points)?, AngularGrid::uv_cut_y(uv_points)?],
    };
    let patterns = grids
        .iter()
        .map(|g| {
            if fast {
                radiate_fast(&cfg.layout, &cfg.model, &cfg.illumination, code, cfg.freq_hz, g)
            } else {
                radiate(&cfg.layout, &cfg.model, &cfg.illumination, code, cfg.freq_hz, g)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let strongest = patterns
        .iter()
        .max_by(|a, b| a.peak_magnitude().total_cmp(&b.peak_magnitude()))
        .expect("at least one grid");
    let m = metrics(strongest)?;
    Ok((patterns_csv(&patterns), m))
}

pub fn cmd_pattern(
    cfg: &RunConfig,
    code_path: &Path,
    phi0: f64,
    grid: GridArg,
    uv_points: usize,
    fast: bool,
) -> CliResult<String> {
    let code = CodeMatrix::from_path(code_path)?;
    code.check_layout(&cfg.layout)?;
    let (csv, m) = compute_pattern(cfg, &code, phi0, grid, uv_points, fast)?;
    write(&cfg.out_dir, "pattern.csv", csv)?;
    write(&cfg.out_dir, "metrics.txt", m.to_key_value())?;
    Ok(m.to_key_value())
}

pub fn cmd_scan(cfg: &RunConfig, thetas: &[f64], phi0: f64, fast: bool) -> CliResult<String> {
    if thetas.is_empty() {
        return Err(Error::invalid("theta", "angle list is empty").into());
    }
    // Validate every target before writing anything.
    for &t in thetas {
        BeamTarget::new(t, phi0, cfg.freq_hz)?;
    }
    let grid = if fast { GridArg::Uv } else { GridArg::Polar };
    let mut summary = String::from(
        "theta0_deg,phi0_deg,peak_theta_deg,peak_phi_deg,directivity_dbi,hpbw_elevation_deg,hpbw_orthogonal_deg,sidelobe_db\n",
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.4}"));
    for &t in thetas {
        let dir = cfg.out_dir.join(format!("theta_{t:.2}"));
        let code = codebook_files(cfg, &dir, t, phi0)?;
        let (csv, m) = compute_pattern(cfg, &code, phi0, grid, 181, fast)?;
        write(&dir, "pattern.csv", csv)?;
        write(&dir, "metrics.txt", m.to_key_value())?;
        summary.push_str(&format!(
            "{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{}\n",
            t,
            phi0,
            m.peak_theta_deg,
            m.peak_phi_deg,
            m.directivity_dbi(),
            opt(m.hpbw_deg[0]),
            opt(m.hpbw_deg[1]),
            opt(m.sidelobe_db)
        ));
    }
    write(&cfg.out_dir, "summary.csv", &summary)?;
    Ok(summary)
}

/// Prototype scenario with the configured surface's broadside directivity and insertion loss.
pub fn default_scenario(cfg: &RunConfig) -> CliResult<LinkScenario> {
    let code = code_for(&cfg.layout, &BeamTarget::new(0.0, 0.0, cfg.freq_hz)?);
    let pattern = radiate(
        &cfg.layout,
        &cfg.model,
        &cfg.illumination,
        &code,
        cfg.freq_hz,
        &AngularGrid::principal_cuts(0.0, 1.0)?,
    )?;
    let directivity_dbi = 10.0 * pattern.directivity()?.log10();
    let mut s = LinkScenario::prototype(directivity_dbi, cfg.model.insertion_loss_db(cfg.freq_hz)?);
    s.freq_hz = cfg.freq_hz;
    s.ris_aperture_area_m2 = cfg.layout.aperture_area();
    Ok(s)
}

pub fn cmd_link(
    cfg: &RunConfig,
    scenario_path: Option<&Path>,
    observations: Option<&Path>,
    fit_offset: bool,
) -> CliResult<String> {
    let mut scenario = default_scenario(cfg)?;
    if let Some(p) = scenario_path {
        scenario = LinkScenario::from_key_values(&KeyValues::from_path(p)?, scenario)?;
    }
    let report = match observations {
        Some(p) => {
            let obs = read_observations(p)?;
            let cal = calibrate(&obs, &scenario, fit_offset)?;
            let mut out = cal.to_key_value();
            if let Some(w) = cal.scenario.near_field_warning() {
                out.push_str(&format!(
                    "near_field_warning=d2 {:.3} m inside far-field distance {:.3} m\n",
                    w.d2_m, w.far_field_m
                ));
            }
            out
        }
        None => evaluate(&scenario)?.to_key_value(),
    };
    let report = format!("{}{}", scenario_header(&scenario), report);
    write(&cfg.out_dir, "link.txt", &report)?;
    Ok(report)
}

fn scenario_header(s: &LinkScenario) -> String {
    s.to_key_value()
        .lines()
        .filter(|l| !l.starts_with("wall_loss_db") && !l.starts_with("system_offset_db"))
        .map(|l| format!("scenario_{l}\n"))
        .collect()
}

pub fn cmd_compile(cfg: &RunConfig, input: &Path, decompile_frame: bool) -> CliResult<String> {
    if decompile_frame {
        let frame = ControlFrame::from_path(input)?;
        let code = decompile(&frame)?;
        let path = write(&cfg.out_dir, "code.txt", code.to_string())?;
        Ok(format!("wrote {}\n", path.display()))
    } else {
        let code = CodeMatrix::from_path(input)?;
        let frame = compile(&code)?;
        write(&cfg.out_dir, "frame.txt", frame.to_string())?;
        write(&cfg.out_dir, "frame.bin", frame.to_bytes())?;
        Ok(frame.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::ZeroPattern).code, 3);
        assert_eq!(CliError::from(Error::MainLobeClipped).code, 3);
        assert_eq!(CliError::from(Error::invalid("rows", "must be at least 1")).code, 2);
        assert_eq!(CliError::from(Error::NonUniformGrid).code, 2);
    }
}
