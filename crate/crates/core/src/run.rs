//! Evaluates a [`RunConfig`] into a [`Table`] and writes it out.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::{ConfigError, Format, ParamSet, Preset, RunConfig, ScenarioKind, Tolerances};
use crate::error::Error;
use crate::micromaser::{
    self, fig1_gt_grid, fig1_sweep, steady_state_pss, two_atom_concurrence, TABLE1, TABLE1_KAPPAS,
};
use crate::record::{Cell, Status, Table};
use crate::{scenario_a, scenario_b};

/// Top Fock weight above which a micromaser row is flagged.
pub const TRUNCATION_WARN: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Usage(e.0)
    }
}

impl RunError {
    /// 1 usage, 2 numeric or i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 1,
            RunError::Numeric(_) | RunError::Io(_) => 2,
        }
    }
}

pub fn header(kind: ScenarioKind) -> Vec<&'static str> {
    match kind {
        ScenarioKind::ScenarioA => vec![
            "scenario",
            "gt",
            "kappa1_over_g",
            "kappa2_over_g",
            "fock_dim",
            "c_ideal",
            "c_analytic",
            "c_numeric",
            "gap_rel",
            "c_c1c2",
            "status",
        ],
        ScenarioKind::ScenarioB => vec![
            "scenario",
            "gt",
            "kappa_over_g",
            "gap_gt",
            "fock_dim",
            "c_ideal",
            "c_analytic",
            "c_wootters",
            "c_numeric",
            "gap_rel",
            "status",
        ],
        ScenarioKind::Micromaser => vec![
            "scenario",
            "n_pump",
            "n_th",
            "gt",
            "kappa_over_g",
            "gamma_over_g",
            "fock_dim",
            "p0",
            "p1",
            "p2",
            "mean_n",
            "c_two_atom",
            "status",
        ],
    }
}

pub fn table1_header() -> Vec<&'static str> {
    vec![
        "kappa_over_g",
        "p0",
        "p1",
        "p2",
        "mean_n",
        "p0_ref",
        "p1_ref",
        "p2_ref",
        "mean_n_ref",
        "max_abs_dev",
        "tolerance",
        "status",
    ]
}

fn relative_gap(numeric: Option<f64>, analytic: Option<f64>) -> Option<f64> {
    match (numeric, analytic) {
        (Some(n), Some(a)) if a > 0.0 => Some((n - a) / a),
        _ => None,
    }
}

fn gap_status(gap: Option<f64>, kappa: f64, tol: &Tolerances) -> Status {
    match gap {
        Some(g) if kappa <= tol.secular_kappa_max && g.abs() > tol.secular_gap => Status::ToleranceFail,
        _ => Status::Ok,
    }
}

fn row_a(p: &scenario_a::Params, cfg: &RunConfig) -> Result<Vec<Cell>, Error> {
    let analytic = scenario_a::concurrence_a(p);
    let (numeric, pair, leakage) = if cfg.oracle {
        let sim = scenario_a::simulate_a(p)?;
        (Some(sim.c_c1_a1), Some(sim.c_c1_c2), sim.leakage)
    } else {
        (None, None, 0.0)
    };
    let gap = relative_gap(numeric, Some(analytic));
    let mut status = gap_status(gap, p.kappa1_over_g.max(p.kappa2_over_g), &cfg.tolerances);
    if leakage > 0.0 {
        status = status.worst(Status::TruncationWarning);
    }
    Ok(vec![
        "scenario-a".into(),
        p.gt.into(),
        p.kappa1_over_g.into(),
        p.kappa2_over_g.into(),
        p.fock_dim.into(),
        scenario_a::c_ideal_a(p.gt).abs().into(),
        analytic.into(),
        numeric.into(),
        gap.into(),
        pair.into(),
        status.into(),
    ])
}

fn row_b(p: &scenario_b::Params, cfg: &RunConfig) -> Result<Vec<Cell>, Error> {
    let immediate = p.gap_gt == 0.0;
    let analytic = immediate.then(|| scenario_b::concurrence_b(p));
    let wootters = if immediate && cfg.both_routes {
        scenario_b::compare_routes(p)?.wootters
    } else {
        None
    };
    let (numeric, leakage) = if cfg.oracle {
        let sim = scenario_b::simulate_b(p)?;
        (Some(sim.concurrence), sim.leakage)
    } else {
        (None, 0.0)
    };
    let gap = relative_gap(numeric, analytic);
    let mut status = gap_status(gap, p.kappa_over_g, &cfg.tolerances);
    if leakage > 0.0 {
        status = status.worst(Status::TruncationWarning);
    }
    Ok(vec![
        "scenario-b".into(),
        p.gt.into(),
        p.kappa_over_g.into(),
        p.gap_gt.into(),
        p.fock_dim.into(),
        scenario_b::c_ideal_b(p.gt).into(),
        analytic.into(),
        wootters.into(),
        numeric.into(),
        gap.into(),
        status.into(),
    ])
}

fn micromaser_row(p: &micromaser::Params, pss: &micromaser::PhotonDistribution, c: f64) -> Vec<Cell> {
    let status = if pss.top() > TRUNCATION_WARN {
        Status::TruncationWarning
    } else {
        Status::Ok
    };
    vec![
        "micromaser".into(),
        p.n_pump.into(),
        p.n_th.into(),
        p.gt.into(),
        p.kappa_over_g.into(),
        p.gamma_over_g.into(),
        p.fock_dim.into(),
        pss.get(0).into(),
        pss.get(1).into(),
        pss.get(2).into(),
        pss.mean_n.into(),
        c.into(),
        status.into(),
    ]
}

fn row_micromaser(p: &micromaser::Params) -> Result<Vec<Cell>, Error> {
    let pss = steady_state_pss(p)?;
    let c = two_atom_concurrence(&pss, p.gt)?;
    Ok(micromaser_row(p, &pss, c))
}

fn evaluate_point(point: &ParamSet, cfg: &RunConfig) -> Result<Vec<Cell>, Error> {
    match point {
        ParamSet::A(p) => row_a(p, cfg),
        ParamSet::B(p) => row_b(p, cfg),
        ParamSet::Micromaser(p) => row_micromaser(p),
    }
}

fn micromaser_base(cfg: &RunConfig) -> Result<micromaser::Params, RunError> {
    match cfg.points()?.as_slice() {
        [ParamSet::Micromaser(p)] => Ok(*p),
        _ => Err(RunError::Usage("presets take no sweep axes".into())),
    }
}

fn table1(cfg: &RunConfig) -> Result<Table, RunError> {
    let base = micromaser_base(cfg)?;
    let tol = cfg.tolerances.table1;
    let computed = TABLE1
        .par_iter()
        .map(|row| steady_state_pss(&base.with_kappa(row.kappa_over_g)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(table1_header());
    for (row, pss) in TABLE1.iter().zip(&computed) {
        let dev = (0..3)
            .map(|n| (pss.get(n) - row.p[n]).abs())
            .chain([(pss.mean_n - row.mean_n).abs()])
            .fold(0.0, f64::max);
        let status = if dev > tol {
            Status::ToleranceFail
        } else if pss.top() > TRUNCATION_WARN {
            Status::TruncationWarning
        } else {
            Status::Ok
        };
        table.push(vec![
            row.kappa_over_g.into(),
            pss.get(0).into(),
            pss.get(1).into(),
            pss.get(2).into(),
            pss.mean_n.into(),
            row.p[0].into(),
            row.p[1].into(),
            row.p[2].into(),
            row.mean_n.into(),
            dev.into(),
            tol.into(),
            status.into(),
        ]);
    }
    Ok(table)
}

fn fig1(cfg: &RunConfig) -> Result<Table, RunError> {
    let base = micromaser_base(cfg)?;
    let points = fig1_sweep(&base, &fig1_gt_grid(), &TABLE1_KAPPAS)?;
    let mut table = Table::new(header(ScenarioKind::Micromaser));
    for pt in &points {
        let p = base.with_kappa(pt.kappa_over_g).with_gt(pt.gt);
        table.push(micromaser_row(&p, &pt.pss, pt.concurrence));
    }
    Ok(table)
}

/// Computes every row. Points are evaluated in parallel and kept in sweep
/// order.
pub fn evaluate(cfg: &RunConfig) -> Result<Table, RunError> {
    cfg.validate()?;
    let table = match cfg.preset {
        Some(Preset::Table1) => table1(cfg)?,
        Some(Preset::Fig1) => fig1(cfg)?,
        None => {
            let points = cfg.points()?;
            let rows = points
                .par_iter()
                .map(|p| evaluate_point(p, cfg))
                .collect::<Result<Vec<_>, _>>()?;
            spot_check(&points, &rows, cfg)?;
            let mut table = Table::new(header(cfg.kind()));
            for r in rows {
                table.push(r);
            }
            table
        }
    };
    check_rows(&table)?;
    Ok(table)
}

/// Re-evaluates one row in a hundred and requires an identical result.
fn spot_check(points: &[ParamSet], rows: &[Vec<Cell>], cfg: &RunConfig) -> Result<(), RunError> {
    for i in (0..points.len()).step_by(100) {
        if evaluate_point(&points[i], cfg)? != rows[i] {
            return Err(Error::InvalidParameter(format!("row {i} is not reproducible")).into());
        }
    }
    Ok(())
}

/// Rejects non-finite values and out-of-range probabilities or concurrences.
pub fn check_rows(table: &Table) -> Result<(), Error> {
    for (r, row) in table.rows.iter().enumerate() {
        for (name, cell) in table.header.iter().zip(row) {
            let Cell::Float(x) = cell else { continue };
            if !x.is_finite() {
                return Err(Error::NonFinite { row: r, col: 0 });
            }
            let bounded = name.starts_with("c_") || (name.starts_with('p') && name.len() == 2);
            if bounded && !(-1e-12..=1.0 + 1e-12).contains(x) {
                return Err(Error::InvalidParameter(format!("row {r}: {name} = {x} outside [0, 1]")));
            }
        }
    }
    Ok(())
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

/// Fails early when the output file cannot be created in its directory.
pub fn check_output_path(path: &Path) -> Result<(), RunError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        return Err(RunError::Usage(format!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    if path.is_dir() {
        return Err(RunError::Usage(format!(
            "output path {} is a directory",
            path.display()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub table: Table,
    pub rendered: String,
    /// Some row carries `tolerance-fail`.
    pub tolerance_failed: bool,
}

/// Evaluates and, if the config names an output path, writes the file.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    if let Some(path) = &cfg.output.path {
        check_output_path(path)?;
    }
    let table = evaluate(cfg)?;
    let rendered = render(&table, cfg.output.format);
    if let Some(path) = &cfg.output.path {
        fs::write(path, &rendered).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(RunOutcome {
        tolerance_failed: table.any_status(Status::ToleranceFail),
        table,
        rendered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepAxis;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn scenario_a_sweep_peaks_at_optimum() {
        let mut cfg = RunConfig::new(ScenarioKind::ScenarioA);
        cfg.base.set("gt", FRAC_PI_4).unwrap();
        cfg.oracle = false;
        cfg.sweep
            .push(SweepAxis::parse("kappa_over_g=0,0.1,0.2581,0.5,1.0").unwrap());
        let t = evaluate(&cfg).unwrap();
        let c: Vec<f64> = (0..5).map(|r| t.float(r, "c_analytic").unwrap()).collect();
        let best = (0..5).max_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
        assert_eq!(t.float(best, "kappa1_over_g"), Some(0.2581));
        assert_eq!(t.rows[0][7], Cell::Missing);
    }

    #[test]
    fn oracle_columns_filled() {
        let mut cfg = RunConfig::new(ScenarioKind::ScenarioB);
        cfg.sweep.push(SweepAxis::parse("kappa_over_g=0,0.01").unwrap());
        let t = evaluate(&cfg).unwrap();
        assert_eq!(t.header, header(ScenarioKind::ScenarioB));
        for r in 0..2 {
            assert!(t.float(r, "c_numeric").is_some());
            assert!(t.float(r, "c_wootters").is_some());
            assert_eq!(t.text(r, "status"), Some("ok"));
        }
        assert!(t.float(1, "gap_rel").unwrap().abs() < 0.05);
    }

    #[test]
    fn gap_beyond_tolerance_is_flagged() {
        let mut cfg = RunConfig::new(ScenarioKind::ScenarioB);
        cfg.base.set("gt", 1.5).unwrap();
        cfg.base.set("kappa_over_g", 0.01).unwrap();
        let t = evaluate(&cfg).unwrap();
        assert_eq!(t.text(0, "status"), Some("tolerance-fail"));
    }

    #[test]
    fn delayed_second_atom_has_no_closed_form() {
        let mut cfg = RunConfig::new(ScenarioKind::ScenarioB);
        cfg.base.set("gap_gt", 0.3).unwrap();
        let t = evaluate(&cfg).unwrap();
        assert_eq!(t.float(0, "c_analytic"), None);
        assert!(t.float(0, "c_numeric").is_some());
    }

    #[test]
    fn table1_preset_passes() {
        let mut cfg = RunConfig::new(ScenarioKind::Micromaser);
        cfg.preset = Some(Preset::Table1);
        let t = evaluate(&cfg).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert!(!t.any_status(Status::ToleranceFail));
        cfg.tolerances.table1 = 1e-4;
        assert!(evaluate(&cfg).unwrap().any_status(Status::ToleranceFail));
    }

    #[test]
    fn presets_need_micromaser() {
        let mut cfg = RunConfig::new(ScenarioKind::ScenarioA);
        cfg.preset = Some(Preset::Fig1);
        assert!(matches!(evaluate(&cfg), Err(RunError::Usage(_))));
    }

    #[test]
    fn missing_directory_is_usage_error() {
        let mut cfg = RunConfig::new(ScenarioKind::ScenarioA);
        cfg.output.path = Some("/nonexistent-dir-for-test/out.csv".into());
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn row_checks() {
        let mut t = Table::new(vec!["c_x", "p1", "gt"]);
        t.push(vec![0.5.into(), 0.2.into(), 7.0.into()]);
        assert!(check_rows(&t).is_ok());
        t.push(vec![1.5.into(), 0.2.into(), 1.0.into()]);
        assert!(check_rows(&t).is_err());
        let mut t = Table::new(vec!["gt"]);
        t.push(vec![f64::NAN.into()]);
        assert!(check_rows(&t).is_err());
    }
}
