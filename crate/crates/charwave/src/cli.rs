//! Batch driver: parse a run configuration, execute the pipeline stages
//! (initial data → boundary curve → characteristic solver → physical
//! coordinates → diagnostics), and write CSV/JSON artifacts for plotting and
//! regression.
//!
//! # Config grammar
//!
//! Line-oriented `key = value` text. Blank lines and lines starting with `#`
//! are skipped; everything else must be a `key = value` pair built from the
//! fixed key set below. Unknown keys, duplicate keys, and malformed values
//! are reported with their line number; missing required keys are reported
//! as line 0.
//!
//! | key                    | value                                                      |
//! |------------------------|------------------------------------------------------------|
//! | `speed.family`         | `constant` \| `affine-tanh` \| `exp-soft`                  |
//! | `speed.params`         | comma list: 1 value (constant) or 2 (the other families)   |
//! | `data.kind`            | `zero` \| `gaussian` \| `sine-packet` \| `square-pulse`    |
//! | `data.params`          | comma list, arity per kind (0 / 5 / 3 / 3)                 |
//! | `data.support`         | `lo, hi` — data clamped to zero outside (optional for zero)|
//! | `grid.dx`              | spacing of the data-sampling grid                          |
//! | `solver.M`             | domain bound: lattice covers X, Y ≤ M                      |
//! | `solver.h`             | lattice spacing; a comma list for `convergence`            |
//! | `solver.mode`          | `conservative` \| `sharp` \| `regularized`                 |
//! | `solver.epsilon`       | regularization strength(s); regularized mode only          |
//! | `solver.corrector_iters` | trapezoidal corrector sweeps (default 2)                 |
//! | `frames.taus`          | strictly increasing comma list of output times             |
//! | `frames.samples`       | uniform sample count per frame (≥ 2)                       |
//! | `output.dir`           | artifact directory, created if absent                      |
//!
//! `gaussian` params: `amp0, width0, amp1, width1, center`;
//! `sine-packet`: `amp, width, freq`; `square-pulse`: `amp, halfwidth,
//! center`.
//!
//! # Artifacts
//!
//! * `grid.csv` — `X,Y,u,w,z,p,q,x,t`, one row per non-outer lattice node,
//!   row-major in Y then X, 17 significant digits.
//! * `frames.csv` — `tau,x,u,R,S`; gradient blow-up is written as `inf`.
//! * `energy.csv` — `tau,energy_ac,energy_total,sing_w,sing_z`.
//! * `report.json` — flat object of scalar diagnostics; on a solver failure
//!   it instead holds `{"error": <name>}`.
//! * `convergence.csv`, `compare.csv` — per-command tables described on
//!   [`cmd_convergence`] and [`cmd_compare`].
//!
//! Identical config and build produce byte-identical CSV output: every
//! stage is deterministic and serial.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::charmap::build_boundary;
use crate::diagnostics::{
    energy_trace, l1_distance, lambda_residual, translation_modulus, EnergyReport,
};
use crate::error::{Error, Result};
use crate::goursat::{check_pq_closed, integrate, CharGrid, Mode, SolverConfig};
use crate::inverse_map::{
    commutator_residual, integrate_xt, monotonicity_violations, sample_frame, PhysicalFrame,
    XtFields,
};
use crate::numerics::interp_clamped;
use crate::oracle::{dalembert, upwind_rs, UpwindConfig};
use crate::speed::SpeedFamily;
use crate::wavefield::{riemann_invariants, Grid1d, InitialData};

/// Vacuum margin added around the data support when building the sampling
/// grid (the boundary curve continues exactly with slope −1 beyond it, so a
/// small margin suffices for any domain bound).
const GRID_PAD: f64 = 0.5;

/// Shape of the initial data, selected by `data.kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Zero,
    Gaussian,
    SinePacket,
    SquarePulse,
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub fam: SpeedFamily,
    pub data_kind: DataKind,
    pub data_params: Vec<f64>,
    pub support: (f64, f64),
    pub grid_dx: f64,
    pub m: f64,
    /// One entry for `run`/`compare`; the sweep list for `convergence`.
    pub hs: Vec<f64>,
    pub mode: Mode,
    /// Empty outside regularized mode; paired with `hs` in a sweep.
    pub epsilons: Vec<f64>,
    pub corrector_iters: usize,
    pub taus: Vec<f64>,
    pub samples: usize,
    pub out_dir: PathBuf,
    /// Source line of `solver.h` / `solver.epsilon`, kept so the commands
    /// can report list-arity problems at the right line.
    pub h_line: usize,
    pub eps_line: usize,
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

const KEYS: [&str; 14] = [
    "speed.family",
    "speed.params",
    "data.kind",
    "data.params",
    "data.support",
    "grid.dx",
    "solver.M",
    "solver.h",
    "solver.mode",
    "solver.epsilon",
    "solver.corrector_iters",
    "frames.taus",
    "frames.samples",
    "output.dir",
];

fn parse_floats(raw: &str, line: usize, key: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|_| cfg_err(line, format!("`{key}`: cannot parse `{}` as a number", piece.trim())))
        })
        .collect()
}

fn parse_float(raw: &str, line: usize, key: &str) -> Result<f64> {
    let vals = parse_floats(raw, line, key)?;
    if vals.len() != 1 {
        return Err(cfg_err(line, format!("`{key}` takes a single value")));
    }
    Ok(vals[0])
}

/// Parse and validate a configuration from its text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut seen: HashMap<&'static str, (String, usize)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let Some(eq) = s.find('=') else {
            return Err(cfg_err(line, "expected `key = value`"));
        };
        let key = s[..eq].trim();
        let val = s[eq + 1..].trim();
        let Some(&canon) = KEYS.iter().find(|&&k| k == key) else {
            return Err(cfg_err(line, format!("unknown key `{key}`")));
        };
        if seen.insert(canon, (val.to_string(), line)).is_some() {
            return Err(cfg_err(line, format!("duplicate key `{key}`")));
        }
    }

    fn req(
        seen: &mut HashMap<&'static str, (String, usize)>,
        key: &'static str,
    ) -> Result<(String, usize)> {
        seen.remove(key)
            .ok_or_else(|| cfg_err(0, format!("missing required key `{key}`")))
    }

    let (fam_raw, fam_line) = req(&mut seen, "speed.family")?;
    let (fpar_raw, fpar_line) = req(&mut seen, "speed.params")?;
    let fpar = parse_floats(&fpar_raw, fpar_line, "speed.params")?;
    let arity_err = |line: usize, key: &str, want: usize, got: usize| {
        cfg_err(line, format!("`{key}` needs {want} value(s), got {got}"))
    };
    let fam = match fam_raw.as_str() {
        "constant" => {
            if fpar.len() != 1 {
                return Err(arity_err(fpar_line, "speed.params", 1, fpar.len()));
            }
            SpeedFamily::constant(fpar[0])
        }
        "affine-tanh" => {
            if fpar.len() != 2 {
                return Err(arity_err(fpar_line, "speed.params", 2, fpar.len()));
            }
            SpeedFamily::affine_tanh(fpar[0], fpar[1])
        }
        "exp-soft" => {
            if fpar.len() != 2 {
                return Err(arity_err(fpar_line, "speed.params", 2, fpar.len()));
            }
            SpeedFamily::exp_soft(fpar[0], fpar[1])
        }
        other => {
            return Err(cfg_err(
                fam_line,
                format!("`speed.family`: unknown family `{other}` (use constant, affine-tanh, or exp-soft)"),
            ))
        }
    }
    .map_err(|e| cfg_err(fpar_line, format!("`speed.params`: {e}")))?;

    let (kind_raw, kind_line) = req(&mut seen, "data.kind")?;
    let data_kind = match kind_raw.as_str() {
        "zero" => DataKind::Zero,
        "gaussian" => DataKind::Gaussian,
        "sine-packet" => DataKind::SinePacket,
        "square-pulse" => DataKind::SquarePulse,
        other => {
            return Err(cfg_err(
                kind_line,
                format!("`data.kind`: unknown kind `{other}` (use zero, gaussian, sine-packet, or square-pulse)"),
            ))
        }
    };
    let want_params = match data_kind {
        DataKind::Zero => 0,
        DataKind::Gaussian => 5,
        DataKind::SinePacket | DataKind::SquarePulse => 3,
    };
    let (data_params, dpar_line) = match seen.remove("data.params") {
        Some((raw, line)) if raw.is_empty() => (Vec::new(), line),
        Some((raw, line)) => (parse_floats(&raw, line, "data.params")?, line),
        None if want_params == 0 => (Vec::new(), 0),
        None => return Err(cfg_err(0, "missing required key `data.params`")),
    };
    if data_params.len() != want_params {
        return Err(arity_err(
            dpar_line,
            "data.params",
            want_params,
            data_params.len(),
        ));
    }
    let support = match seen.remove("data.support") {
        Some((raw, line)) => {
            let v = parse_floats(&raw, line, "data.support")?;
            if v.len() != 2 {
                return Err(arity_err(line, "data.support", 2, v.len()));
            }
            if !(v[0] < v[1]) {
                return Err(cfg_err(line, "`data.support` needs lo < hi"));
            }
            (v[0], v[1])
        }
        None if data_kind == DataKind::Zero => (-1.0, 1.0),
        None => return Err(cfg_err(0, "missing required key `data.support`")),
    };

    let (dx_raw, dx_line) = req(&mut seen, "grid.dx")?;
    let grid_dx = parse_float(&dx_raw, dx_line, "grid.dx")?;
    if !(grid_dx.is_finite() && grid_dx > 0.0) {
        return Err(cfg_err(dx_line, "`grid.dx` must be positive"));
    }

    let (m_raw, m_line) = req(&mut seen, "solver.M")?;
    let m = parse_float(&m_raw, m_line, "solver.M")?;
    if !(m.is_finite() && m > 0.0) {
        return Err(cfg_err(m_line, "`solver.M` must be positive"));
    }

    let (h_raw, h_line) = req(&mut seen, "solver.h")?;
    let hs = parse_floats(&h_raw, h_line, "solver.h")?;
    if hs.is_empty() || hs.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
        return Err(cfg_err(h_line, "`solver.h` must list positive spacings"));
    }

    let (mode_raw, mode_line) = req(&mut seen, "solver.mode")?;
    let mode = match mode_raw.as_str() {
        "conservative" => Mode::Conservative,
        "sharp" => Mode::Sharp,
        "regularized" => Mode::Regularized,
        other => {
            return Err(cfg_err(
                mode_line,
                format!("`solver.mode`: unknown mode `{other}` (use conservative, sharp, or regularized)"),
            ))
        }
    };

    let (epsilons, eps_line) = match seen.remove("solver.epsilon") {
        Some((raw, line)) => {
            if mode != Mode::Regularized {
                return Err(cfg_err(
                    line,
                    "`solver.epsilon` requires solver.mode = regularized",
                ));
            }
            let v = parse_floats(&raw, line, "solver.epsilon")?;
            if v.is_empty() || v.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
                return Err(cfg_err(line, "`solver.epsilon` must list positive values"));
            }
            (v, line)
        }
        None if mode == Mode::Regularized => {
            return Err(cfg_err(0, "missing required key `solver.epsilon`"))
        }
        None => (Vec::new(), 0),
    };

    let corrector_iters = match seen.remove("solver.corrector_iters") {
        Some((raw, line)) => {
            let v: usize = raw.parse().map_err(|_| {
                cfg_err(line, "`solver.corrector_iters` must be a positive integer")
            })?;
            if v == 0 {
                return Err(cfg_err(
                    line,
                    "`solver.corrector_iters` must be a positive integer",
                ));
            }
            v
        }
        None => 2,
    };

    let (taus_raw, taus_line) = req(&mut seen, "frames.taus")?;
    let taus = parse_floats(&taus_raw, taus_line, "frames.taus")?;
    if taus.is_empty() {
        return Err(cfg_err(taus_line, "`frames.taus` must list at least one time"));
    }
    if taus.iter().any(|&t| !(t.is_finite() && t >= 0.0))
        || taus.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(cfg_err(
            taus_line,
            "`frames.taus` must be nonnegative and strictly increasing",
        ));
    }

    let (samp_raw, samp_line) = req(&mut seen, "frames.samples")?;
    let samples: usize = samp_raw
        .parse()
        .map_err(|_| cfg_err(samp_line, "`frames.samples` must be an integer ≥ 2"))?;
    if samples < 2 {
        return Err(cfg_err(samp_line, "`frames.samples` must be an integer ≥ 2"));
    }

    let (dir_raw, dir_line) = req(&mut seen, "output.dir")?;
    if dir_raw.is_empty() {
        return Err(cfg_err(dir_line, "`output.dir` must not be empty"));
    }

    let cfg = RunConfig {
        fam,
        data_kind,
        data_params,
        support,
        grid_dx,
        m,
        hs,
        mode,
        epsilons,
        corrector_iters,
        taus,
        samples,
        out_dir: PathBuf::from(dir_raw),
        h_line,
        eps_line,
    };
    // Probe the data constructor on a tiny grid so bad shape parameters
    // (nonpositive widths and the like) surface as line-numbered errors.
    build_data_on(&cfg, (cfg.support.1 - cfg.support.0) / 8.0)
        .map_err(|e| cfg_err(dpar_line, format!("`data.params`: {e}")))?;
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

fn construct_data(cfg: &RunConfig, grid: Grid1d) -> Result<InitialData> {
    let p = &cfg.data_params;
    match cfg.data_kind {
        DataKind::Zero => InitialData::zero(grid, cfg.support),
        DataKind::Gaussian => {
            InitialData::gaussian(grid, p[0], p[1], p[2], p[3], p[4], cfg.support)
        }
        DataKind::SinePacket => InitialData::sine_packet(grid, p[0], p[1], p[2], cfg.support),
        DataKind::SquarePulse => InitialData::square_pulse(grid, p[0], p[1], p[2], cfg.support),
    }
}

fn build_data_on(cfg: &RunConfig, dx: f64) -> Result<InitialData> {
    let (lo, hi) = cfg.support;
    construct_data(cfg, Grid1d::covering(lo - GRID_PAD, hi + GRID_PAD, dx)?)
}

/// Construct the initial data described by the configuration.
pub fn build_data(cfg: &RunConfig) -> Result<InitialData> {
    build_data_on(cfg, cfg.grid_dx)
}

fn solver_config(cfg: &RunConfig, h: f64, epsilon: f64) -> SolverConfig {
    SolverConfig {
        mode: cfg.mode,
        epsilon,
        h,
        m: cfg.m,
        corrector_iters: cfg.corrector_iters,
    }
}

/// Scalar diagnostics of one run, the body of `report.json`.
#[derive(Debug, Clone)]
pub struct RunReport {
    /// max over emitted times of |energy_total − E0| / E0 (0 for zero data).
    pub energy_drift_rel: f64,
    pub lambda_max: f64,
    pub commutator_max: f64,
    pub pq_closed_max: f64,
    pub pq_min: f64,
    pub pq_max: f64,
    pub monotone_violations: usize,
}

/// Everything one pipeline pass produces.
pub struct PipelineOutput {
    pub data: InitialData,
    pub e0: f64,
    pub grid: CharGrid,
    pub xt: XtFields,
    pub frames: Vec<PhysicalFrame>,
    pub energy: EnergyReport,
    pub report: RunReport,
}

/// Run data → curve → solver → coordinates → frames → diagnostics.
pub fn run_pipeline(cfg: &RunConfig, scfg: &SolverConfig) -> Result<PipelineOutput> {
    let data = build_data(cfg)?;
    let inv = riemann_invariants(&data, &cfg.fam);
    let curve = build_boundary(&inv)?;
    let grid = integrate(&curve, &cfg.fam, scfg)?;
    let xt = integrate_xt(&grid, &cfg.fam);
    let frames = cfg
        .taus
        .iter()
        .map(|&tau| sample_frame(&grid, &xt, tau, cfg.samples))
        .collect::<Result<Vec<_>>>()?;
    let energy = energy_trace(&grid, &xt, &cfg.taus)?;
    let e0 = curve.e0;
    let energy_drift_rel = if e0 > 0.0 {
        energy
            .energy_total
            .iter()
            .fold(0.0_f64, |acc, &e| acc.max((e - e0).abs() / e0))
    } else {
        0.0
    };
    let (pq_min, pq_max) = grid.pq_extrema();
    let report = RunReport {
        energy_drift_rel,
        lambda_max: lambda_residual(&grid, &cfg.fam).0,
        commutator_max: commutator_residual(&grid, &cfg.fam).max(),
        pq_closed_max: check_pq_closed(&grid),
        pq_min,
        pq_max,
        monotone_violations: monotonicity_violations(&grid, &xt),
    };
    Ok(PipelineOutput {
        data,
        e0,
        grid,
        xt,
        frames,
        energy,
        report,
    })
}

fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_grid_csv(path: &Path, grid: &CharGrid, xt: &XtFields) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    writeln!(f, "X,Y,u,w,z,p,q,x,t")?;
    let n = grid.lat.n;
    let mut line = String::with_capacity(256);
    for j in 0..n {
        for i in 0..n {
            if grid.is_outer(i, j) {
                continue;
            }
            let id = grid.idx(i, j);
            line.clear();
            let _ = write!(
                line,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                grid.lat.coord(i),
                grid.lat.coord(j),
                grid.u[id],
                grid.w[id],
                grid.z[id],
                grid.p[id],
                grid.q[id],
                xt.x[id],
                xt.t[id],
            );
            writeln!(f, "{line}")?;
        }
    }
    f.flush()?;
    Ok(())
}

fn write_frames_csv(path: &Path, frames: &[PhysicalFrame]) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    writeln!(f, "tau,x,u,R,S")?;
    for fr in frames {
        for k in 0..fr.xs.len() {
            writeln!(
                f,
                "{},{},{},{},{}",
                cell(fr.tau),
                cell(fr.xs[k]),
                cell(fr.us[k]),
                cell(fr.rs[k]),
                cell(fr.ss[k])
            )?;
        }
    }
    f.flush()?;
    Ok(())
}

fn write_energy_csv(path: &Path, rep: &EnergyReport) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    writeln!(f, "tau,energy_ac,energy_total,sing_w,sing_z")?;
    for k in 0..rep.taus.len() {
        writeln!(
            f,
            "{},{},{},{},{}",
            cell(rep.taus[k]),
            cell(rep.energy_ac[k]),
            cell(rep.energy_total[k]),
            cell(rep.sing_w[k]),
            cell(rep.sing_z[k])
        )?;
    }
    f.flush()?;
    Ok(())
}

fn write_report_json(path: &Path, rep: &RunReport) -> Result<()> {
    let body = serde_json::json!({
        "energy_drift_rel": rep.energy_drift_rel,
        "lambda_max": rep.lambda_max,
        "commutator_max": rep.commutator_max,
        "pq_closed_max": rep.pq_closed_max,
        "pq_min": rep.pq_min,
        "pq_max": rep.pq_max,
        "monotone_violations": rep.monotone_violations as u64,
    });
    fs::write(path, format!("{:#}\n", body))?;
    Ok(())
}

fn write_error_report(dir: &Path, err: &Error) {
    let body = serde_json::json!({ "error": err.name() });
    let _ = fs::write(dir.join("report.json"), format!("{:#}\n", body));
}

/// Execute one run and write `grid.csv`, `frames.csv`, `energy.csv`, and
/// `report.json` into `output.dir`.
///
/// Exit discipline (mapped by the binary): `Ok` → 0; config errors → 2 with
/// a line-numbered message; solver errors → 3, with the error's name left in
/// `report.json`.
pub fn cmd_run(path: &Path) -> Result<()> {
    let cfg = load_config(path)?;
    if cfg.hs.len() != 1 {
        return Err(cfg_err(
            cfg.h_line,
            "`solver.h` must be a single value for `run`",
        ));
    }
    if cfg.mode == Mode::Regularized && cfg.epsilons.len() != 1 {
        return Err(cfg_err(
            cfg.eps_line,
            "`solver.epsilon` must be a single value for `run`",
        ));
    }
    let scfg = solver_config(&cfg, cfg.hs[0], cfg.epsilons.first().copied().unwrap_or(0.0));
    fs::create_dir_all(&cfg.out_dir)?;
    match run_pipeline(&cfg, &scfg) {
        Ok(out) => {
            write_grid_csv(&cfg.out_dir.join("grid.csv"), &out.grid, &out.xt)?;
            write_frames_csv(&cfg.out_dir.join("frames.csv"), &out.frames)?;
            write_energy_csv(&cfg.out_dir.join("energy.csv"), &out.energy)?;
            write_report_json(&cfg.out_dir.join("report.json"), &out.report)?;
            Ok(())
        }
        Err(e) => {
            write_error_report(&cfg.out_dir, &e);
            Err(e)
        }
    }
}

/// Max |u_solver − u_oracle| over every frame, with the oracle evaluated at
/// the frame's own sample positions. Constant-speed runs compare against the
/// closed-form solution; the other families run the physical-space upwind
/// marcher at resolution matched to `h`. `None` when the oracle declares
/// blow-up before the last frame time.
fn linf_vs_oracle(cfg: &RunConfig, h: f64, data: &InitialData, frames: &[PhysicalFrame]) -> Result<Option<f64>> {
    let mut worst = 0.0_f64;
    if let SpeedFamily::Constant { c0 } = cfg.fam {
        for fr in frames {
            let exact = dalembert(data, c0, fr.tau, &fr.xs)?;
            for (u, e) in fr.us.iter().zip(&exact) {
                worst = worst.max((u - e).abs());
            }
        }
        return Ok(Some(worst));
    }
    let tau_max = *cfg.taus.last().unwrap();
    let reach = cfg.fam.c_max() * tau_max + 1.0;
    let grid = Grid1d::covering(cfg.support.0 - reach, cfg.support.1 + reach, h)?;
    let oracle_data = construct_data(cfg, grid)?;
    let inv0 = riemann_invariants(&oracle_data, &cfg.fam);
    let ucfg = UpwindConfig::default();
    for fr in frames {
        let marched = match upwind_rs(&inv0, &cfg.fam, fr.tau, &ucfg) {
            Ok(v) => v,
            Err(Error::BlowupDetected { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let xs = marched.grid.xs();
        for (x, u) in fr.xs.iter().zip(&fr.us) {
            let e = interp_clamped(&xs, &marched.u, *x);
            worst = worst.max((u - e).abs());
        }
    }
    Ok(Some(worst))
}

fn order_cell(prev_v: Option<f64>, v: Option<f64>, prev_h: f64, h: f64) -> String {
    match (prev_v, v) {
        (Some(a), Some(b))
            if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 && prev_h != h =>
        {
            format!("{:.3}", (a / b).log2() / (prev_h / h).log2())
        }
        _ => String::new(),
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

/// Repeat the run across the `solver.h` list (paired with `solver.epsilon`
/// in regularized mode) and emit `convergence.csv` with columns
/// `h,eps,linf_vs_oracle,lambda_max,commutator_max,pq_closed_max,
/// energy_drift,order_linf,order_lambda,order_commutator,order_pq_closed,
/// trans_mod,l1_prev`.
///
/// Order columns hold the successive-ratio log₂ estimate and stay empty on
/// the first row (and whenever a ratio is not computable). `trans_mod` (the
/// largest translation modulus over a fixed physical shift set) and
/// `l1_prev` (L¹ distance to the previous row's fields) are filled in
/// regularized mode, where they track the compactness of the ε-family.
pub fn cmd_convergence(path: &Path) -> Result<()> {
    let cfg = load_config(path)?;
    if cfg.mode == Mode::Regularized && cfg.epsilons.len() != cfg.hs.len() {
        return Err(cfg_err(
            cfg.eps_line.max(cfg.h_line),
            "`solver.epsilon` and `solver.h` must pair up one-to-one for a regularized sweep",
        ));
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let shift = cfg.m / 20.0;
    let shifts = [(shift, 0.0), (0.0, shift), (shift, shift)];

    struct Row {
        h: f64,
        eps: Option<f64>,
        linf: Option<f64>,
        lambda: f64,
        comm: f64,
        pqc: f64,
        drift: f64,
        trans: Option<f64>,
        l1_prev: Option<f64>,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut prev_grid: Option<CharGrid> = None;
    for (k, &h) in cfg.hs.iter().enumerate() {
        let eps = cfg.epsilons.get(k).copied();
        let scfg = solver_config(&cfg, h, eps.unwrap_or(0.0));
        let out = match run_pipeline(&cfg, &scfg) {
            Ok(v) => v,
            Err(e) => {
                write_error_report(&cfg.out_dir, &e);
                return Err(e);
            }
        };
        let linf = linf_vs_oracle(&cfg, h, &out.data, &out.frames)?;
        let (trans, l1_prev) = if cfg.mode == Mode::Regularized {
            let t = translation_modulus(&out.grid, &shifts)?
                .into_iter()
                .fold(0.0_f64, f64::max);
            let d = match &prev_grid {
                Some(pg) => Some(l1_distance(pg, &out.grid)?),
                None => None,
            };
            (Some(t), d)
        } else {
            (None, None)
        };
        rows.push(Row {
            h,
            eps,
            linf,
            lambda: out.report.lambda_max,
            comm: out.report.commutator_max,
            pqc: out.report.pq_closed_max,
            drift: out.report.energy_drift_rel,
            trans,
            l1_prev,
        });
        prev_grid = Some(out.grid);
    }

    let mut f = BufWriter::new(fs::File::create(cfg.out_dir.join("convergence.csv"))?);
    writeln!(
        f,
        "h,eps,linf_vs_oracle,lambda_max,commutator_max,pq_closed_max,energy_drift,order_linf,order_lambda,order_commutator,order_pq_closed,trans_mod,l1_prev"
    )?;
    for (k, row) in rows.iter().enumerate() {
        let prev = if k > 0 { Some(&rows[k - 1]) } else { None };
        let ord = |pv: Option<f64>, v: Option<f64>| match prev {
            Some(p) => order_cell(pv, v, p.h, row.h),
            None => String::new(),
        };
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            cell(row.h),
            opt_cell(row.eps),
            opt_cell(row.linf),
            cell(row.lambda),
            cell(row.comm),
            cell(row.pqc),
            cell(row.drift),
            ord(prev.and_then(|p| p.linf), row.linf),
            ord(prev.map(|p| p.lambda), Some(row.lambda)),
            ord(prev.map(|p| p.comm), Some(row.comm)),
            ord(prev.map(|p| p.pqc), Some(row.pqc)),
            opt_cell(row.trans),
            opt_cell(row.l1_prev),
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Run the scenario in both the conservative and the sharp dissipative mode
/// (whatever `solver.mode` says) and emit `compare.csv` with columns
/// `tau,energy_cons,energy_diss,sing_w,sing_z,frame_l2`: the conservative
/// total energy, the dissipative absolutely-continuous energy, the
/// dissipative singular slice measures, and the L² distance between the two
/// solution frames at each emitted time.
pub fn cmd_compare(path: &Path) -> Result<()> {
    let cfg = load_config(path)?;
    if cfg.hs.len() != 1 {
        return Err(cfg_err(
            cfg.h_line,
            "`solver.h` must be a single value for `compare`",
        ));
    }
    let h = cfg.hs[0];
    fs::create_dir_all(&cfg.out_dir)?;
    let mut cons_cfg = cfg.clone();
    cons_cfg.mode = Mode::Conservative;
    cons_cfg.epsilons.clear();
    let mut diss_cfg = cons_cfg.clone();
    diss_cfg.mode = Mode::Sharp;

    let cons = match run_pipeline(&cons_cfg, &solver_config(&cons_cfg, h, 0.0)) {
        Ok(v) => v,
        Err(e) => {
            write_error_report(&cfg.out_dir, &e);
            return Err(e);
        }
    };
    let diss = match run_pipeline(&diss_cfg, &solver_config(&diss_cfg, h, 0.0)) {
        Ok(v) => v,
        Err(e) => {
            write_error_report(&cfg.out_dir, &e);
            return Err(e);
        }
    };

    let mut f = BufWriter::new(fs::File::create(cfg.out_dir.join("compare.csv"))?);
    writeln!(f, "tau,energy_cons,energy_diss,sing_w,sing_z,frame_l2")?;
    for k in 0..cfg.taus.len() {
        let l2 = crate::diagnostics::frame_l2_distance(&cons.frames[k], &diss.frames[k]);
        writeln!(
            f,
            "{},{},{},{},{},{}",
            cell(cfg.taus[k]),
            cell(cons.energy.energy_total[k]),
            cell(diss.energy.energy_ac[k]),
            cell(diss.energy.sing_w[k]),
            cell(diss.energy.sing_z[k]),
            cell(l2)
        )?;
    }
    f.flush()?;
    Ok(())
}
