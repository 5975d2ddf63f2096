use std::fmt::Write;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use invlearn_experiments::{run_batch, summarize, write_metrics_csv, BenchConfig};

pub fn run(config: &Path, out: &Path) -> anyhow::Result<()> {
    let cfg = BenchConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    let rows = run_batch(&cfg.specs(), &cfg.models, cfg.repetitions, &cfg.options)?;
    std::fs::create_dir_all(out)?;
    let metrics = out.join("metrics.csv");
    write_metrics_csv(BufWriter::new(File::create(&metrics)?), &rows, true)?;
    let summary = summarize(&rows);
    std::fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    let mut text = String::new();
    writeln!(text, "{:<10} {:<14} {:>6} {:>5} {:>10} {:>9} {:>9}", "model", "scenario", "noise", "know", "distance", "recovery", "seconds")?;
    for e in &summary.entries {
        let model = e.r.map_or_else(|| e.model.clone(), |r| format!("{}({r})", e.model));
        let dist = e.mean_distance.map_or_else(|| "-".into(), |d| format!("{d:.4}"));
        writeln!(
            text,
            "{model:<10} {:<14} {:>6} {:>5} {dist:>10} {:>9.3} {:>9.4}",
            e.scenario.as_str(),
            e.noise,
            e.knowledge,
            e.recovery_rate,
            e.mean_seconds
        )?;
    }
    writeln!(text, "{} rows, {} failures; wrote {}", summary.rows, summary.failures.len(), metrics.display())?;
    Ok(crate::print_out(&text)?)
}
