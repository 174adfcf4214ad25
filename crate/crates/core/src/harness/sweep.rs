//! Experiment sweeps over the UAV count or UAV compute frequency.

use std::path::Path;

use super::experiment::ExperimentConfig;
use super::train::run_training;
use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    UavCount,
    UavFrequency,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::UavCount => "uav_count",
            SweepAxis::UavFrequency => "uav_frequency",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uav_count" => Ok(SweepAxis::UavCount),
            "uav_frequency" => Ok(SweepAxis::UavFrequency),
            other => Err(format!("unknown sweep axis `{other}` (uav_count|uav_frequency)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    /// Median final processed megabits across seeds.
    pub median_processed_mbits: f64,
    /// (seed, final processed megabits) per run.
    pub per_seed: Vec<(u64, f64)>,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},median_processed_Mbits", self.axis.name());
        let seeds = self.rows.first().map_or(0, |r| r.per_seed.len());
        for i in 0..seeds {
            out.push_str(&format!(",seed{i}_processed_Mbits"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.value, row.median_processed_mbits));
            for (_, v) in &row.per_seed {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn apply_axis(cfg: &mut ExperimentConfig, axis: SweepAxis, value: f64) -> Result<(), HarnessError> {
    match axis {
        SweepAxis::UavCount => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(HarnessError::Sweep(format!(
                    "uav_count values must be positive integers, got {value}"
                )));
            }
            cfg.sim.num_uavs = value as usize;
        }
        SweepAxis::UavFrequency => {
            if value <= 0.0 {
                return Err(HarnessError::Sweep(format!(
                    "uav_frequency values must be positive, got {value}"
                )));
            }
            cfg.sim.f_uav_max = value;
        }
    }
    Ok(())
}

/// Trains one policy per axis value per seed (otherwise-fixed config, shared
/// seed set) and reports the median final processed data per value. Values
/// must be sorted ascending.
pub fn sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    seeds: &[u64],
) -> Result<SweepTable, HarnessError> {
    sweep_with_mode(base, axis, values, seeds, false)
}

/// [`sweep`] with an explicit policy mode. With `reuse_policy`, one policy
/// per seed is trained on the base config and loaded for every axis value,
/// so the axis isolates the resource effect under common random numbers.
/// Reuse is only possible where the network shapes do not change with the
/// axis (the UAV count changes them; the compute frequency does not).
pub fn sweep_with_mode(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    seeds: &[u64],
    reuse_policy: bool,
) -> Result<SweepTable, HarnessError> {
    if values.is_empty() || seeds.is_empty() {
        return Err(HarnessError::Sweep("sweep needs at least one value and one seed".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Sweep("sweep values must be sorted ascending".into()));
    }
    if reuse_policy && axis == SweepAxis::UavCount {
        return Err(HarnessError::Sweep(
            "cannot reuse one policy across UAV counts: network shapes change".into(),
        ));
    }
    let outdir = Path::new(&base.output_dir);

    // Policies trained once per seed on the base config, when reusing.
    let mut trained: Vec<(u64, std::path::PathBuf, ExperimentConfig)> = Vec::new();
    if reuse_policy {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.sim.seed = seed;
            cfg.output_dir = outdir
                .join(format!("sweep_{}_base_seed{seed}", axis.name()))
                .display()
                .to_string();
            let outcome = run_training(&cfg)?;
            trained.push((seed, outcome.checkpoint_path, cfg));
        }
    }

    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut per_seed = Vec::with_capacity(seeds.len());
        if reuse_policy {
            for (seed, checkpoint, trained_cfg) in &trained {
                let mut cfg = trained_cfg.clone();
                apply_axis(&mut cfg, axis, value)?;
                let mut agents = super::build_agents(&cfg.sim, cfg.variant)?;
                super::load_checkpoint(checkpoint, cfg.variant, &cfg.sim, &mut agents)?;
                let out = super::run_evaluation(&agents, &cfg, cfg.eval_episodes, 0);
                per_seed.push((*seed, out.processed_mbits));
            }
        } else {
            for &seed in seeds {
                let mut cfg = base.clone();
                cfg.sim.seed = seed;
                apply_axis(&mut cfg, axis, value)?;
                cfg.output_dir = outdir
                    .join(format!("sweep_{}_{value}_seed{seed}", axis.name()))
                    .display()
                    .to_string();
                let outcome = run_training(&cfg)?;
                let last = outcome
                    .metrics
                    .last()
                    .ok_or_else(|| HarnessError::Sweep("training emitted no metrics".into()))?;
                per_seed.push((seed, last.processed_mbits));
            }
        }
        let mut vals: Vec<f64> = per_seed.iter().map(|(_, v)| *v).collect();
        rows.push(SweepRow { value, median_processed_mbits: median(&mut vals), per_seed });
    }
    let table = SweepTable { axis, rows };
    std::fs::create_dir_all(outdir)?;
    std::fs::write(outdir.join(format!("sweep_{}.csv", axis.name())), table.to_csv())?;
    Ok(table)
}
