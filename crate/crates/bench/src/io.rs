//! Plot-ready output files: CSV tables and trajectories, JSON run reports.

use std::fs;
use std::path::Path;

use epibo::epidemic::{EpidemicState, Trajectory};
use epibo::error::{Error, Result};
use epibo::optimizer::RunReport;

use crate::sweep::SweepReport;

/// Sweep table with columns
/// `model,d,fill,seed,aofv,rt_seconds,aofv_ratio,rt_ratio`.
pub fn sweep_csv(report: &SweepReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "model",
            "d",
            "fill",
            "seed",
            "aofv",
            "rt_seconds",
            "aofv_ratio",
            "rt_ratio",
        ])
        .map_err(csv_error)?;
    for cell in &report.cells {
        writer
            .write_record([
                cell.model.clone(),
                cell.d.to_string(),
                cell.fill.to_string(),
                cell.seed.to_string(),
                cell.aofv.to_string(),
                cell.rt_seconds.to_string(),
                cell.aofv_ratio.to_string(),
                cell.rt_ratio.to_string(),
            ])
            .map_err(csv_error)?;
    }
    finish(writer)
}

pub fn write_sweep_csv(path: &Path, report: &SweepReport) -> Result<()> {
    fs::write(path, sweep_csv(report)?)?;
    Ok(())
}

/// Trajectory with columns `t,S,E,I,R,u,cost`; the E and R columns are empty
/// for SIS states.
pub fn trajectory_csv(trajectory: &Trajectory) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["t", "S", "E", "I", "R", "u", "cost"])
        .map_err(csv_error)?;
    for (((epoch, state), control), cost) in trajectory
        .epochs
        .iter()
        .zip(&trajectory.states)
        .zip(&trajectory.controls)
        .zip(&trajectory.costs)
    {
        let (s, e, i, r) = match state {
            EpidemicState::Seir(x) => (
                x.s.to_string(),
                x.e.to_string(),
                x.i.to_string(),
                x.r.to_string(),
            ),
            EpidemicState::Sis(x) => (x.s.to_string(), String::new(), x.i.to_string(), String::new()),
        };
        writer
            .write_record([
                epoch.to_string(),
                s,
                e,
                i,
                r,
                control.to_string(),
                cost.to_string(),
            ])
            .map_err(csv_error)?;
    }
    finish(writer)
}

pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    fs::write(path, trajectory_csv(trajectory)?)?;
    Ok(())
}

/// Pretty JSON encoding of a run report.
pub fn report_json(report: &RunReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("cannot encode report: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn save_report(path: &Path, report: &RunReport) -> Result<()> {
    fs::write(path, report_json(report)?)?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse report {}: {e}", path.display())))
}

fn csv_error(err: csv::Error) -> Error {
    Error::Config(format!("cannot encode csv: {err}"))
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("cannot encode csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv is not utf-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use epibo::dimension::{Bounds, ControlStrategy};
    use epibo::epidemic::{simulate, EpidemicInstance};
    use epibo::optimizer::{run, OptimizerConfig};

    fn tiny_report() -> RunReport {
        let mut config = OptimizerConfig::new(EpidemicInstance::default_seir());
        config.instance.objective.t_f = 15;
        config.d = 5;
        config.iterations = 3;
        config.n_init = 3;
        config.n_zones = 2;
        config.m_points = 2;
        config.n_random = 4;
        config.adam.steps = 2;
        run(&config).unwrap()
    }

    #[test]
    fn report_round_trips_through_json() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let mut report = tiny_report();
        report.config_text = Some("model = seir\n".to_string());
        save_report(&path, &report).unwrap();
        let loaded = load_report(&path).unwrap();
        assert_eq!(report, loaded);
    }

    #[test]
    fn trajectory_csv_has_the_expected_schema() {
        let instance = EpidemicInstance::default_seir();
        let control = ControlStrategy::constant(0.0, 100, Bounds::unit()).unwrap();
        let trajectory = simulate(&instance, &control, None).unwrap();
        let text = trajectory_csv(&trajectory).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,S,E,I,R,u,cost");
        assert_eq!(text.lines().count(), 101);
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,0.99,0,0.01,0,0,"), "{first}");
    }

    #[test]
    fn sis_trajectory_leaves_e_and_r_empty() {
        use rand::SeedableRng;
        let instance = EpidemicInstance::default_sis();
        let control = ControlStrategy::constant(0.0, 200, Bounds::unit()).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let trajectory = simulate(&instance, &control, Some(&mut rng)).unwrap();
        let text = trajectory_csv(&trajectory).unwrap();
        let first = text.lines().nth(1).unwrap();
        assert!(first.starts_with("1,0.97,,0.03,,0,"), "{first}");
    }
}
