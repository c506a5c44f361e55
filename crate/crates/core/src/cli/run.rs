use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::eval::{compare_model, DensityEstimate, Report};
use crate::netcore::save_stack;
use crate::vgan::{train, TrainedModel};

use super::config::ExperimentConfig;

pub const CONFIG_ECHO: &str = "config_echo.toml";
pub const HISTORY_CSV: &str = "history.csv";
pub const REPORT_JSON: &str = "report.json";
pub const MODEL_BIN: &str = "model.bin";

/// Result of one experiment; the same data is on disk under `output_dir`.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub output_dir: PathBuf,
    pub model: TrainedModel,
    pub report: Report,
}

/// Trains, evaluates and writes every artifact of `config` to `config.output_dir`.
///
/// Artifacts: `config_echo.toml`, `history.csv`, `model.bin` (generator),
/// `report.json`, and `density_{true,model}_{k}.csv` per constellation index `k`
/// plus `density_{true,model}_marginal.csv`. Numeric outputs depend only on the
/// config, so reruns are byte-identical.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CONFIG_ECHO), config.to_toml()?)?;

    let source = config.modulation.source();
    let model = train(&config.channel, &source, &config.train)?;
    model.history.save_csv(dir.join(HISTORY_CSV))?;
    save_stack(&model.generator, dir.join(MODEL_BIN))?;

    let report = compare_model(&model.generator, &config.channel, &source, &config.eval)?;
    report.save_json(dir.join(REPORT_JSON))?;
    let d = &report.densities;
    for (k, (t, m)) in d.truth.iter().zip(&d.model).enumerate() {
        write_density(dir, &format!("density_true_{k}.csv"), t)?;
        write_density(dir, &format!("density_model_{k}.csv"), m)?;
    }
    if let (Some(t), Some(m)) = (&d.truth_marginal, &d.model_marginal) {
        write_density(dir, "density_true_marginal.csv", t)?;
        write_density(dir, "density_model_marginal.csv", m)?;
    }
    Ok(ExperimentRun {
        output_dir: dir.clone(),
        model,
        report,
    })
}

fn write_density(dir: &Path, name: &str, d: &DensityEstimate) -> Result<()> {
    d.write_csv(BufWriter::new(File::create(dir.join(name))?))
}
