use gradlab_data::synth::{write_idx_files, SynthConfig};

use crate::config::Config;
use crate::error::{runtime, validation, Result};
use crate::io::write_atomic;
use crate::{out_dir, SynthArgs};

pub fn run(args: SynthArgs) -> Result<()> {
    let config = Config::load(args.common.config.as_deref())?;
    let out = out_dir(&args.common, &config)?;

    let classes_raw = config.resolve(
        "synth.classes",
        args.synth_classes.clone(),
        "0,1,2,3,4,5,6,7,8,9".to_string(),
    )?;
    let classes: Vec<u8> = classes_raw
        .split(',')
        .map(|s| s.trim().parse::<u8>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| validation(format!("bad class list {classes_raw:?}")))?;

    let synth = SynthConfig {
        classes,
        train_per_class: config.resolve("synth.train_per_class", args.train_per_class, 640usize)?,
        test_per_class: config.resolve("synth.test_per_class", args.test_per_class, 110usize)?,
        seed: config.resolve("seed", args.common.seed, 0u64)?,
        noise: config.resolve("synth.noise", args.noise, 0.10f64)?,
    };
    let paths = write_idx_files(&synth, &out).map_err(runtime)?;
    write_atomic(&out.join("manifest.txt"), &config.manifest("synth-data"))?;
    for path in paths {
        println!("wrote {}", path.display());
    }
    Ok(())
}
