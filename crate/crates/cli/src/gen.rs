use std::path::PathBuf;

use clap::{Args, ValueEnum};
use pbda::data::{gen_moons, write_svmlight, MoonsConfig, ThetaMode};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::common::{emit, merge_config, usage, CliResult};

#[derive(Debug, Clone, Copy, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ThetaArg {
    Random,
    Even,
}

#[derive(Debug, Args, Serialize)]
pub struct GenMoonsArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Source points per class.
    #[arg(long)]
    pub n_per_class: Option<usize>,
    /// Target points per class; defaults to the source count.
    #[arg(long)]
    pub target_per_class: Option<usize>,
    /// Test points per class.
    #[arg(long)]
    pub test_per_class: Option<usize>,
    /// Rotation of the target and test clouds, in degrees.
    #[arg(long)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub theta: Option<ThetaArg>,
    /// Directory receiving source.svm, target.svm and test.svm.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GenMoonsConfig {
    pub n_per_class: usize,
    pub target_per_class: Option<usize>,
    pub test_per_class: usize,
    pub angle: f64,
    pub noise_sd: f64,
    pub seed: u64,
    pub theta: ThetaMode,
    pub out_dir: PathBuf,
}

impl Default for GenMoonsConfig {
    fn default() -> Self {
        Self {
            n_per_class: 150,
            target_per_class: None,
            test_per_class: 500,
            angle: 30.0,
            noise_sd: 0.1,
            seed: 0,
            theta: ThetaMode::Random,
            out_dir: PathBuf::from("."),
        }
    }
}

pub fn gen_moons_cmd(args: GenMoonsArgs) -> CliResult<()> {
    let cfg: GenMoonsConfig = merge_config(args.config.as_deref(), &args)?;
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let target_per_class = cfg.target_per_class.unwrap_or(cfg.n_per_class);
    let parts = [
        ("source", cfg.n_per_class, 0.0, cfg.seed),
        ("target", target_per_class, cfg.angle, cfg.seed.wrapping_add(1)),
        ("test", cfg.test_per_class, cfg.angle, cfg.seed.wrapping_add(2)),
    ];
    let mut files = serde_json::Map::new();
    for (name, n, angle, seed) in parts {
        let sample = gen_moons(&MoonsConfig {
            n_per_class: n,
            rotation_degrees: angle,
            noise_sd: cfg.noise_sd,
            seed,
            theta: cfg.theta,
        })?;
        let path = cfg.out_dir.join(format!("{name}.svm"));
        write_svmlight(&sample, &path)?;
        files.insert(
            name.into(),
            json!({ "path": path, "count": sample.len(), "seed": seed, "angle": angle }),
        );
    }
    emit(&cfg, json!({ "seed": cfg.seed, "angle": cfg.angle, "files": files }))
}
