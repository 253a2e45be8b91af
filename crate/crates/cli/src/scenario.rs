//! The `scenario` command: generate a seeded system, write it, simulate it,
//! and for one-dimensional states write initial and final histograms.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use polydyn::scenarios::{OneValueParams, PolytopeParams, RandomArrayParams, TwoValueParams};
use polydyn::*;
use serde_json::json;

use crate::config::{OutputFormat, RunConfig};
use crate::plot;
use crate::run::{simulate_into, write_system, Report};

fn default_kind(name: &str) -> Result<ScenarioKind> {
    Ok(match name {
        "random-array" => ScenarioKind::RandomArray(RandomArrayParams::default()),
        "one-value-A" => ScenarioKind::OneValueA(OneValueParams::default()),
        "two-value-A" => ScenarioKind::TwoValueA(TwoValueParams::default()),
        "polytope" => ScenarioKind::Polytope(PolytopeParams::default()),
        "cleavage" => ScenarioKind::Cleavage(CleavageParams::default()),
        other => bail!(
            "unknown scenario {other:?} (expected random-array, one-value-A, two-value-A, polytope or cleavage)"
        ),
    })
}

/// The spec file (if any) with seed, n and m overridden by the run config.
pub fn resolve_spec(cfg: &RunConfig) -> Result<ScenarioSpec> {
    let mut spec = match (&cfg.spec, &cfg.scenario) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str::<ScenarioSpec>(&text)
                .with_context(|| format!("invalid scenario spec {}", path.display()))?
        }
        (None, Some(name)) => {
            let kind = default_kind(name)?;
            let (n, m) = match kind {
                ScenarioKind::Cleavage(_) => (250, 1),
                _ => (20, 2),
            };
            ScenarioSpec {
                n,
                m,
                seed: 0,
                kind,
            }
        }
        (None, None) => bail!("scenario needs a generator name or --spec"),
    };
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(n) = cfg.n {
        spec.n = n;
    }
    if let Some(m) = cfg.m {
        spec.m = m;
    }
    Ok(spec)
}

fn histogram_file(dir: &Path, format: OutputFormat, stem: &str, h: &Histogram) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => {
            let mut s = String::from("lo,hi,count\n");
            for (k, c) in h.counts.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{c}\n",
                    polydyn::io::fmt_f64(h.edges[k]),
                    polydyn::io::fmt_f64(h.edges[k + 1])
                ));
            }
            s
        }
        OutputFormat::Json => {
            let doc =
                json!({ "edges": h.edges, "counts": h.counts, "modes": h.significant_modes() });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    fs::write(dir.join(format!("{stem}.{}", format.ext())), text)?;
    Ok(())
}

fn run_one(cfg: &RunConfig, spec: &ScenarioSpec, dir: &Path) -> Result<Report> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let sys = spec.generate()?;
    write_system(dir, cfg.format(), &sys)?;
    fs::write(
        dir.join("scenario.json"),
        serde_json::to_string_pretty(spec)? + "\n",
    )?;
    let (report, last) = simulate_into(cfg, dir, &sys)?;
    let mut summary = format!(
        "scenario {} seed={}: {}",
        spec.kind.name(),
        spec.seed,
        report.summary
    );
    if sys.x0.m() == 1 {
        let bins = cfg.bins();
        let before = histogram(&sys.x0, bins)?;
        let after = histogram(&last, bins)?;
        histogram_file(dir, cfg.format(), "histogram_initial", &before)?;
        histogram_file(dir, cfg.format(), "histogram_final", &after)?;
        if cfg.gnuplot() && cfg.format() == OutputFormat::Csv {
            fs::write(dir.join("histogram.gp"), plot::histogram_script())?;
        }
        summary.push_str(&format!(
            ", modes {} -> {}",
            before.significant_modes(),
            after.significant_modes()
        ));
    }
    Ok(Report::new(report.ok, summary))
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let spec = resolve_spec(cfg)?;
    let out = cfg.out_dir();
    let replicas = cfg.replicas.unwrap_or(1);
    if replicas == 1 {
        return run_one(cfg, &spec, &out);
    }
    // independent seeds seed, seed + 1, ..., each in its own directory
    let results: Vec<Result<Report>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..replicas)
            .map(|i| {
                let spec = ScenarioSpec {
                    seed: spec.seed.wrapping_add(i as u64),
                    ..spec.clone()
                };
                let dir = out.join(format!("replica_{i:03}"));
                scope.spawn(move || run_one(cfg, &spec, &dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| bail!("replica thread panicked"))
            })
            .collect()
    });
    let mut ok = 0;
    for (i, r) in results.into_iter().enumerate() {
        let r = r.with_context(|| format!("replica {i}"))?;
        log::info!("replica {i}: {}", r.summary);
        ok += usize::from(r.ok);
    }
    Ok(Report::new(
        ok == replicas,
        format!(
            "scenario {}: {ok}/{replicas} replicas converged",
            spec.kind.name()
        ),
    ))
}
