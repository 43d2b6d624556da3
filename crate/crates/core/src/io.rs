//! Configuration files and CSV output.
//!
//! Configuration is a flat list of `key = value` lines; `#` starts a comment.
//! Every float is written as `{:.16e}`, 17 significant digits, which
//! round-trips binary64 exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagRecord;
use crate::model::{Grid, Params, State, ViscousScheme};
use crate::solver::{DensityKind, InitialProfile, RunSink, Table, VelocityKind, Violation};
use crate::trajectories::ParticleSet;
use crate::{Error, Result};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const VIOLATIONS_FILE: &str = "violations.csv";
pub const PARTICLES_FILE: &str = "particles.csv";
pub const PLOT_SCRIPT_FILE: &str = "plot.gp";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Floor of the velocity recovery relative to the density amplitude when
/// `rho_floor` is not given.
pub const RELATIVE_RHO_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: Params,
    pub profile: InitialProfile,
    pub outputs: PathBuf,
    pub emit_snapshots: bool,
    pub emit_plot_script: bool,
    pub seed: u64,
    /// Resolutions of the `convergence` subcommand, coarsest first.
    pub convergence_cells: Vec<usize>,
    pub convergence_min_order: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: Params::default(),
            profile: InitialProfile::default(),
            outputs: PathBuf::from("out"),
            emit_snapshots: true,
            emit_plot_script: false,
            seed: 0,
            convergence_cells: vec![256, 512, 1024],
            convergence_min_order: 0.8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Beta,
    Gamma,
    Alpha,
    NCells,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Beta => "beta",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Alpha => "alpha",
            SweepAxis::NCells => "n_cells",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepConfig {
    /// One configuration per sweep value, each writing to its own
    /// subdirectory of the base output directory.
    pub fn members(&self) -> Result<Vec<RunConfig>> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let mut c = self.base.clone();
                match self.axis {
                    SweepAxis::Beta => c.params.beta = v,
                    SweepAxis::Gamma => c.params.gamma = v,
                    SweepAxis::Alpha => c.params.alpha = v,
                    SweepAxis::NCells => {
                        if !(v >= 0.0 && v.fract() == 0.0) {
                            return Err(Error::Config(format!("n_cells value {v} is not a count")));
                        }
                        c.params.n_cells = v as usize
                    }
                }
                c.params.validate().map_err(|e| {
                    Error::Config(format!("sweep member {k} ({} = {v}): {e}", self.axis.name()))
                })?;
                c.outputs = self.base.outputs.join(format!("{:03}_{}_{v}", k, self.axis.name()));
                Ok(c)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Config {
    Run(RunConfig),
    Sweep(SweepConfig),
}

impl Config {
    pub fn base(&self) -> &RunConfig {
        match self {
            Config::Run(c) => c,
            Config::Sweep(s) => &s.base,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::ConfigLine {
        path: path.to_path_buf(),
        line: 0,
        msg: format!("cannot read file: {e}"),
    })?;
    parse_config_str(&text, path)
}

const PARAM_KEYS: [(&str, &str); 12] = [
    ("gamma", "gamma"),
    ("beta", "beta"),
    ("alpha", "alpha"),
    ("L", "L"),
    ("N", "N"),
    ("cfl_adv", "cfl_adv"),
    ("cfl_visc", "cfl_visc"),
    ("rho_floor", "rho_floor"),
    ("t_end", "t_end"),
    ("snapshot_every", "snapshot_every"),
    ("weighted", "alpha"),
    ("viscous", "viscous"),
];

fn canonical(key: &str) -> &str {
    match key {
        "half_width" => "L",
        "n_cells" => "N",
        "kind" => "profile",
        "velocity_kind" => "velocity",
        "emit_plots_script" => "emit_plot_script",
        k => k,
    }
}

/// Parses configuration text. Relative table paths are resolved against the
/// directory of `path`, which also names the file in error messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<Config> {
    let err = |line: usize, msg: String| Error::ConfigLine {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let key = canonical(key.trim()).to_string();
        let value = value.trim().to_string();
        if let Some((first, _)) = entries.get(&key) {
            return Err(err(line, format!("duplicate key `{key}` (first set on line {first})")));
        }
        entries.insert(key, (line, value));
    }

    let mut cfg = RunConfig::default();
    let mut rho_floor_set = false;
    let mut axis = None;
    let mut values = None;
    let mut density_table = None;
    let mut velocity_table = None;

    for (key, (line, value)) in &entries {
        let line = *line;
        let float = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| err(line, format!("`{key}` expects a number, got `{value}`")))
        };
        let count = || -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| err(line, format!("`{key}` expects a nonnegative integer, got `{value}`")))
        };
        let flag = || -> Result<bool> {
            match value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(err(line, format!("`{key}` expects true or false, got `{value}`"))),
            }
        };
        let p = &mut cfg.params;
        match key.as_str() {
            "gamma" => p.gamma = float()?,
            "beta" => p.beta = float()?,
            "alpha" => p.alpha = float()?,
            "L" => p.half_width = float()?,
            "N" => p.n_cells = count()?,
            "cfl_adv" => p.cfl_adv = float()?,
            "cfl_visc" => p.cfl_visc = float()?,
            "rho_floor" => {
                p.rho_floor = float()?;
                rho_floor_set = true;
            }
            "t_end" => p.t_end = float()?,
            "snapshot_every" => p.snapshot_every = count()?,
            "weighted" => p.weighted = flag()?,
            "viscous" => {
                p.viscous = match value.as_str() {
                    "implicit" => ViscousScheme::Implicit,
                    "explicit" => ViscousScheme::Explicit,
                    _ => return Err(err(line, format!("unknown viscous scheme `{value}`"))),
                }
            }
            "profile" => {
                cfg.profile.kind = match value.as_str() {
                    "compact_bump" => DensityKind::CompactBump,
                    "gaussian_times_cutoff" => DensityKind::GaussianTimesCutoff,
                    "gaussian" => DensityKind::Gaussian,
                    "custom_table" => DensityKind::Table(Table::new(vec![0.0, 1.0], vec![0.0, 0.0])?),
                    _ => return Err(err(line, format!("unknown profile kind `{value}`"))),
                }
            }
            "amplitude" => cfg.profile.amplitude = float()?,
            "support_radius" => cfg.profile.support_radius = float()?,
            "smoothness_order" => {
                cfg.profile.smoothness_order = value
                    .parse()
                    .map_err(|_| err(line, format!("`{key}` expects an integer, got `{value}`")))?
            }
            "velocity" => {
                cfg.profile.velocity = match value.as_str() {
                    "zero" => VelocityKind::Zero,
                    "sine_in_support" => VelocityKind::SineInSupport,
                    "custom_table" => VelocityKind::Table(Table::new(vec![0.0, 1.0], vec![0.0, 0.0])?),
                    _ => return Err(err(line, format!("unknown velocity kind `{value}`"))),
                }
            }
            "velocity_amplitude" => cfg.profile.velocity_amplitude = float()?,
            "density_table" => density_table = Some((line, base_dir.join(value))),
            "velocity_table" => velocity_table = Some((line, base_dir.join(value))),
            "outputs" => cfg.outputs = base_dir.join(value),
            "emit_snapshots" => cfg.emit_snapshots = flag()?,
            "emit_plot_script" => cfg.emit_plot_script = flag()?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|_| err(line, format!("`seed` expects an integer, got `{value}`")))?
            }
            "convergence_cells" => {
                let ns = parse_list(value)
                    .and_then(|v| {
                        v.iter()
                            .map(|x| if x.fract() == 0.0 && *x > 0.0 { Ok(*x as usize) } else { Err(()) })
                            .collect::<std::result::Result<Vec<_>, _>>()
                    })
                    .map_err(|_| err(line, format!("`{key}` expects a list of cell counts, got `{value}`")))?;
                if ns.len() < 3 || ns.windows(2).any(|w| w[1] != 2 * w[0]) {
                    return Err(err(
                        line,
                        "convergence_cells needs at least three successively doubled counts".into(),
                    ));
                }
                cfg.convergence_cells = ns;
            }
            "convergence_min_order" => cfg.convergence_min_order = float()?,
            "sweep_axis" => {
                axis = Some(match value.as_str() {
                    "beta" => SweepAxis::Beta,
                    "gamma" => SweepAxis::Gamma,
                    "alpha" => SweepAxis::Alpha,
                    "n_cells" | "N" => SweepAxis::NCells,
                    _ => return Err(err(line, format!("unknown sweep axis `{value}`"))),
                })
            }
            "sweep_values" => {
                values = Some((
                    line,
                    parse_list(value)
                        .map_err(|_| err(line, format!("`{key}` expects a comma separated list")))?,
                ))
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
    }

    if let Some((line, file)) = density_table {
        if !matches!(cfg.profile.kind, DensityKind::Table(_)) {
            return Err(err(line, "density_table requires profile = custom_table".into()));
        }
        cfg.profile.kind = DensityKind::Table(load_table(&file).map_err(|e| err(line, e.to_string()))?);
    } else if matches!(cfg.profile.kind, DensityKind::Table(_)) {
        let line = entries.get("profile").map_or(0, |e| e.0);
        return Err(err(line, "profile = custom_table needs density_table".into()));
    }
    if let Some((line, file)) = velocity_table {
        if !matches!(cfg.profile.velocity, VelocityKind::Table(_)) {
            return Err(err(line, "velocity_table requires velocity = custom_table".into()));
        }
        cfg.profile.velocity = VelocityKind::Table(load_table(&file).map_err(|e| err(line, e.to_string()))?);
    } else if matches!(cfg.profile.velocity, VelocityKind::Table(_)) {
        let line = entries.get("velocity").map_or(0, |e| e.0);
        return Err(err(line, "velocity = custom_table needs velocity_table".into()));
    }
    if !rho_floor_set && cfg.profile.amplitude > 0.0 && cfg.profile.amplitude.is_finite() {
        cfg.params.rho_floor = RELATIVE_RHO_FLOOR * cfg.profile.amplitude;
    }

    if let Err(e) = cfg.params.validate() {
        let msg = e.to_string();
        let line = PARAM_KEYS
            .iter()
            .find(|(_, word)| msg.contains(word))
            .and_then(|(key, _)| entries.get(*key))
            .map_or(0, |e| e.0);
        return Err(err(line, msg));
    }
    if let Err(e) = cfg.profile.validate() {
        let msg = e.to_string();
        let line = [
            "amplitude",
            "support_radius",
            "smoothness_order",
            "velocity_amplitude",
            "density_table",
        ]
        .iter()
        .find(|k| msg.contains(*k))
        .and_then(|k| entries.get(*k))
        .map_or(0, |e| e.0);
        return Err(err(line, msg));
    }
    if !(cfg.convergence_min_order.is_finite()) {
        let line = entries.get("convergence_min_order").map_or(0, |e| e.0);
        return Err(err(line, "convergence_min_order must be finite".into()));
    }

    match (axis, values) {
        (None, None) => Ok(Config::Run(cfg)),
        (Some(axis), Some((line, values))) => {
            if values.is_empty() {
                return Err(err(line, "sweep_values is empty".into()));
            }
            let sweep = SweepConfig { base: cfg, axis, values };
            sweep.members().map_err(|e| err(line, e.to_string()))?;
            Ok(Config::Sweep(sweep))
        }
        (Some(_), None) => Err(err(
            entries.get("sweep_axis").map_or(0, |e| e.0),
            "sweep_axis needs sweep_values".into(),
        )),
        (None, Some((line, _))) => Err(err(line, "sweep_values needs sweep_axis".into())),
    }
}

fn parse_list(value: &str) -> std::result::Result<Vec<f64>, ()> {
    value
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| ()))
        .collect()
}

/// Reads a two-column `x,value` table; a non-numeric first line is taken as a
/// header.
pub fn load_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut x = Vec::new();
    let mut v = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(p) if p.len() == 2 => {
                x.push(p[0]);
                v.push(p[1]);
            }
            None if k == 0 => continue,
            _ => {
                return Err(Error::Validation {
                    path: path.to_path_buf(),
                    row: k + 1,
                    msg: format!("expected two numbers, got `{line}`"),
                })
            }
        }
    }
    Table::new(x, v)
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn timeseries_header() -> String {
    DiagRecord::FIELDS.join(",")
}

pub fn timeseries_row(r: &DiagRecord) -> String {
    let mut s = String::new();
    for (k, v) in r.values().iter().enumerate() {
        if k > 0 {
            s.push(',');
        }
        if let Some(v) = v {
            s.push_str(&fmt_f64(*v));
        }
    }
    s
}

pub fn emit_timeseries(records: &[DiagRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Domain("no records to write".into()));
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", timeseries_header())?;
    for r in records {
        writeln!(w, "{}", timeseries_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a timeseries file back; empty cells become `None`.
pub fn load_timeseries(path: &Path) -> Result<Vec<DiagRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let bad = |row: usize, msg: String| Error::Validation {
        path: path.to_path_buf(),
        row,
        msg,
    };
    if header != timeseries_header() {
        return Err(bad(1, "header does not match the record schema".into()));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = k + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != DiagRecord::FIELDS.len() {
            return Err(bad(row, format!("expected {} cells, got {}", DiagRecord::FIELDS.len(), cells.len())));
        }
        let mut vals = [None; 29];
        for (j, c) in cells.iter().enumerate() {
            if !c.is_empty() {
                vals[j] = Some(
                    c.parse::<f64>()
                        .map_err(|_| bad(row, format!("cannot parse `{c}` in column {}", DiagRecord::FIELDS[j])))?,
                );
            }
        }
        out.push(DiagRecord::from_values(&vals).map_err(|m| bad(row, m))?);
    }
    Ok(out)
}

const SNAPSHOT_HEADER: &str = "x_center,rho,x_face,u,m";

pub fn emit_snapshot(state: &State, grid: &Grid, path: &Path) -> Result<()> {
    let n = state.n_cells();
    if grid.n_cells() != n {
        return Err(Error::Shape {
            expected: grid.n_cells(),
            got: n,
        });
    }
    let mut s = String::with_capacity(120 * (n + 2));
    s.push_str(SNAPSHOT_HEADER);
    s.push('\n');
    for i in 0..=n {
        if i < n {
            let _ = write!(s, "{},{},", fmt_f64(grid.centers[i]), fmt_f64(state.rho[i]));
        } else {
            s.push_str(",,");
        }
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_f64(grid.faces[i]),
            fmt_f64(state.u[i]),
            fmt_f64(state.m[i])
        );
    }
    fs::write(path, s)?;
    Ok(())
}

/// Reads a snapshot written by [`emit_snapshot`]. The file carries no time,
/// so the returned state has `t = 0`.
pub fn load_snapshot(path: &Path) -> Result<(Grid, State)> {
    let text = fs::read_to_string(path)?;
    let bad = |row: usize, msg: String| Error::Validation {
        path: path.to_path_buf(),
        row,
        msg,
    };
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(bad(1, format!("expected header `{SNAPSHOT_HEADER}`")));
    }
    let (mut xc, mut rho, mut xf, mut u, mut m) = (vec![], vec![], vec![], vec![], vec![]);
    let rows: Vec<&str> = lines.collect();
    for (k, line) in rows.iter().enumerate() {
        let row = k + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(bad(row, format!("expected 5 cells, got {}", cells.len())));
        }
        let num = |c: &str, name: &str| -> Result<f64> {
            let v: f64 = c
                .trim()
                .parse()
                .map_err(|_| bad(row, format!("cannot parse `{c}` in column {name}")))?;
            if !v.is_finite() {
                return Err(bad(row, format!("non-finite value in column {name}")));
            }
            Ok(v)
        };
        let last = k + 1 == rows.len();
        if last {
            if !(cells[0].is_empty() && cells[1].is_empty()) {
                return Err(bad(row, "final row must leave the center columns empty".into()));
            }
        } else {
            xc.push(num(cells[0], "x_center")?);
            let r = num(cells[1], "rho")?;
            if r < 0.0 {
                return Err(bad(row, format!("negative density {r}")));
            }
            rho.push(r);
        }
        xf.push(num(cells[2], "x_face")?);
        u.push(num(cells[3], "u")?);
        m.push(num(cells[4], "m")?);
    }
    let n = xc.len();
    if n == 0 {
        return Err(bad(2, "snapshot has no cells".into()));
    }
    let dx = (xf[n] - xf[0]) / n as f64;
    let grid = Grid {
        centers: xc,
        faces: xf,
        dx,
    };
    let state = State { t: 0.0, rho, u, m };
    Ok((grid, state))
}

pub fn emit_violations(violations: &[Violation], path: &Path) -> Result<()> {
    let mut s = String::from("t,kind,value,bound\n");
    for v in violations {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(v.t), v.kind, fmt_f64(v.value), fmt_f64(v.bound));
    }
    fs::write(path, s)?;
    Ok(())
}

/// gnuplot script drawing the main columns of a timeseries file.
pub fn plot_script(timeseries: &str) -> String {
    let col = |name: &str| DiagRecord::FIELDS.iter().position(|f| *f == name).unwrap() + 1;
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let plots: [(&str, &[&str]); 4] = [
        ("energy.png", &["energy", "dissipation_cum"]),
        ("density_bound.png", &["max_rho", "rho_cap"]),
        ("xi_eta.png", &["sup_xi_eta"]),
        ("derivatives.png", &["ux_l2", "rho_x_l2", "uxx_l2", "evf_linf"]),
    ];
    for (out, cols) in plots {
        let _ = writeln!(s, "set output '{out}'");
        let series: Vec<String> = cols
            .iter()
            .map(|c| format!("'{timeseries}' using {}:{} with lines", col("t"), col(c)))
            .collect();
        let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    }
    s
}

/// Writes records, periodic snapshots and particle positions below one
/// directory.
pub struct CsvSink {
    dir: PathBuf,
    timeseries: BufWriter<File>,
    particles: BufWriter<File>,
    emit_snapshots: bool,
    index: Vec<(usize, f64, String)>,
    last_t: f64,
}

impl CsvSink {
    pub fn create(dir: &Path, emit_snapshots: bool) -> Result<Self> {
        fs::create_dir_all(dir)?;
        if emit_snapshots {
            fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
        }
        let mut timeseries = BufWriter::new(File::create(dir.join(TIMESERIES_FILE))?);
        writeln!(timeseries, "{}", timeseries_header())?;
        let mut particles = BufWriter::new(File::create(dir.join(PARTICLES_FILE))?);
        writeln!(particles, "t,index,position,xi_eta,exited")?;
        Ok(Self {
            dir: dir.to_path_buf(),
            timeseries,
            particles,
            emit_snapshots,
            index: Vec::new(),
            last_t: 0.0,
        })
    }

    /// Flushes the streams and writes the snapshot index.
    pub fn finish(mut self) -> Result<()> {
        self.timeseries.flush()?;
        self.particles.flush()?;
        if self.emit_snapshots {
            let mut s = String::from("step,t,file\n");
            for (step, t, file) in &self.index {
                let _ = writeln!(s, "{step},{},{file}", fmt_f64(*t));
            }
            fs::write(self.dir.join(SNAPSHOT_DIR).join("index.csv"), s)?;
        }
        Ok(())
    }
}

impl RunSink for CsvSink {
    fn record(&mut self, record: &DiagRecord) -> Result<()> {
        self.last_t = record.t;
        writeln!(self.timeseries, "{}", timeseries_row(record))?;
        Ok(())
    }

    fn snapshot(&mut self, step: usize, state: &State, grid: &Grid) -> Result<()> {
        if !self.emit_snapshots {
            return Ok(());
        }
        let name = format!("snap_{step:07}.csv");
        emit_snapshot(state, grid, &self.dir.join(SNAPSHOT_DIR).join(&name))?;
        if let Some(last) = self.index.last() {
            if last.0 == step {
                self.index.pop();
            }
        }
        self.index.push((step, state.t, name));
        Ok(())
    }

    fn particles(&mut self, t: f64, ps: &ParticleSet) -> Result<()> {
        for k in 0..ps.len() {
            writeln!(
                self.particles,
                "{},{k},{},{},{}",
                fmt_f64(t),
                fmt_f64(ps.positions[k]),
                fmt_f64(ps.xi_eta[k]),
                u8::from(ps.exited[k])
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_grid;

    fn parse(text: &str) -> Result<Config> {
        parse_config_str(text, Path::new("test.cfg"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let Config::Run(c) = parse("").unwrap() else { panic!() };
        assert_eq!(c.params, Params::default());
        assert_eq!(c.params.n_cells, 1024);
        assert_eq!(c.params.t_end, 1.0);
    }

    #[test]
    fn alpha_two_is_rejected_on_its_line() {
        let e = parse("# header\ngamma = 2\nalpha = 2.0\n").unwrap_err();
        match e {
            Error::ConfigLine { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("2 < alpha"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn beta_zero_is_valid() {
        let Config::Run(c) = parse("beta = 0").unwrap() else { panic!() };
        assert_eq!(c.params.beta, 0.0);
    }

    #[test]
    fn unknown_key_names_line() {
        let e = parse("gamma = 2\n\nfoo = 1").unwrap_err();
        assert!(matches!(e, Error::ConfigLine { line: 3, .. }), "{e}");
    }

    #[test]
    fn rho_floor_follows_amplitude() {
        let Config::Run(c) = parse("amplitude = 5").unwrap() else { panic!() };
        assert_eq!(c.params.rho_floor, 5e-12);
        let Config::Run(c) = parse("amplitude = 5\nrho_floor = 1e-9").unwrap() else { panic!() };
        assert_eq!(c.params.rho_floor, 1e-9);
    }

    #[test]
    fn sweep_members() {
        let Config::Sweep(s) = parse("sweep_axis = beta\nsweep_values = 0, 0.5, 1").unwrap() else {
            panic!()
        };
        let m = s.members().unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[1].params.beta, 0.5);
        assert_ne!(m[0].outputs, m[1].outputs);
        let e = parse("sweep_axis = alpha\nsweep_values = 2.3, 2.0").unwrap_err();
        assert!(matches!(e, Error::ConfigLine { line: 2, .. }), "{e}");
    }

    #[test]
    fn vacuum_snapshot_has_ten_lines() {
        let dir = tempfile::tempdir().unwrap();
        let grid = make_grid(1.0, 8).unwrap();
        let p = dir.path().join("s.csv");
        emit_snapshot(&State::vacuum(8), &grid, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.lines().last().unwrap().starts_with(",,"));
    }

    #[test]
    fn snapshot_rejects_nan_row() {
        let dir = tempfile::tempdir().unwrap();
        let grid = make_grid(1.0, 8).unwrap();
        let p = dir.path().join("s.csv");
        emit_snapshot(&State::vacuum(8), &grid, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[4] = lines[4].replacen("0.0000000000000000e0", "NaN", 1);
        fs::write(&p, lines.join("\n") + "\n").unwrap();
        match load_snapshot(&p).unwrap_err() {
            Error::Validation { row, .. } => assert_eq!(row, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plot_script_references_columns() {
        let s = plot_script("timeseries.csv");
        assert!(s.contains("using 1:"));
        assert!(s.contains("timeseries.csv"));
    }
}
