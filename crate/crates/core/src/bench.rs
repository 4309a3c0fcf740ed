//! Instance × driver benchmark matrix.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::cnf::CnfFormula;
use crate::rational::Rational;
use crate::solve::{solve, Driver, SolveOptions};

#[derive(Clone, Debug)]
pub struct BenchInstance {
    pub name: String,
    pub formula: CnfFormula,
    pub eps: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub driver: String,
    pub counter_calls: u64,
    pub candidates: u64,
    pub stages: usize,
    pub success: bool,
    pub exit_code: i32,
    pub wall_time_ms: f64,
}

/// One row per (instance, driver), sorted by instance name then driver.
/// Everything but `wall_time_ms` is deterministic.
pub fn run_bench(instances: &[BenchInstance], drivers: &[Driver], base: &SolveOptions) -> Vec<BenchRow> {
    let mut rows = Vec::with_capacity(instances.len() * drivers.len());
    for inst in instances {
        for &driver in drivers {
            let opts = SolveOptions {
                driver,
                eps: inst.eps.clone().or_else(|| base.eps.clone()),
                ..base.clone()
            };
            let start = Instant::now();
            let trace = solve(&inst.formula, &opts);
            rows.push(BenchRow {
                instance: inst.name.clone(),
                driver: driver.name().to_string(),
                counter_calls: trace.cost.counter_calls,
                candidates: trace.cost.candidates_examined,
                stages: trace.stages.len(),
                success: trace.succeeded(),
                exit_code: trace.outcome.exit_code(),
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    rows.sort_by(|a, b| (&a.instance, &a.driver).cmp(&(&b.instance, &b.driver)));
    rows
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planted::{generate, PlantSpec};
    use crate::rational::ratio;

    #[test]
    fn matrix_shape_and_naive_calls() {
        let instances: Vec<BenchInstance> = (0..10)
            .map(|seed| {
                let spec = PlantSpec { n: 8, m: 10, k: 3, seed };
                BenchInstance {
                    name: format!("p{seed:02}"),
                    formula: generate(spec, &ratio(1, 4), 24).unwrap().0.formula,
                    eps: Some(ratio(1, 4)),
                }
            })
            .collect();
        let drivers = [Driver::Stagewise, Driver::Naive, Driver::PrgEnum];
        let rows = run_bench(&instances, &drivers, &SolveOptions::default());
        assert_eq!(rows.len(), 30);
        for r in &rows {
            assert!(r.success, "{r:?}");
            if r.driver == "naive" {
                assert_eq!(r.counter_calls, 16);
            }
        }
        let mut buf = Vec::new();
        write_bench_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 31);
    }
}
