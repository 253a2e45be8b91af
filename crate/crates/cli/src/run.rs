//! Command dispatch. Every command reads its inputs, calls the library once
//! or twice, writes files into the output directory and returns a one-line
//! summary plus a verdict.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use polydyn::io::{self, Format};
use polydyn::*;
use serde_json::{json, Value};

use crate::config::{CentralityChoice, Command, LimitChoice, OutputFormat, RunConfig};
use crate::plot;

/// Outcome of a successful run; input errors are `Err`.
#[derive(Debug)]
pub struct Report {
    /// False for infeasible or non-convergent results (exit status 1).
    pub ok: bool,
    pub summary: String,
    /// Extra lines printed after the summary (ranked centrality list).
    pub details: Vec<String>,
}

impl Report {
    pub(crate) fn new(ok: bool, summary: String) -> Report {
        Report {
            ok,
            summary,
            details: Vec::new(),
        }
    }
}

struct Out {
    dir: PathBuf,
    format: OutputFormat,
}

impl Out {
    fn new(cfg: &RunConfig) -> Result<Out> {
        let dir = cfg.out_dir();
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Out {
            dir,
            format: cfg.format(),
        })
    }

    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}.{ext}"))
    }

    fn matrix(&self, stem: &str, m: &DMatrix<f64>) -> Result<()> {
        let (fmt, ext) = match self.format {
            OutputFormat::Csv => (Format::Csv, "csv"),
            OutputFormat::Json => (Format::Json, "json"),
        };
        io::write_matrix(&self.path(stem, ext), m, fmt)?;
        Ok(())
    }

    fn damping(&self, stem: &str, a: &DampingMatrix) -> Result<()> {
        match self.format {
            OutputFormat::Csv => self.text(&format!("{stem}.csv"), &io::damping_to_csv(a)),
            OutputFormat::Json => self.json(stem, &json!(a.as_slice())),
        }
    }

    fn json(&self, stem: &str, value: &Value) -> Result<()> {
        self.text(
            &format!("{stem}.json"),
            &(serde_json::to_string_pretty(value)? + "\n"),
        )
    }

    fn text(&self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

fn read_w(cfg: &RunConfig) -> Result<InfluenceMatrix> {
    let path = cfg.input(cfg.w.as_ref(), "w")?;
    io::read_influence(&path).with_context(|| format!("{}", path.display()))
}

fn read_a(cfg: &RunConfig) -> Result<DampingMatrix> {
    let path = cfg.input(cfg.a.as_ref(), "a")?;
    io::read_damping(&path).with_context(|| format!("{}", path.display()))
}

fn read_x(cfg: &RunConfig, field: Option<&PathBuf>, name: &str) -> Result<StateMatrix> {
    let path = cfg.input(field, name)?;
    io::read_state(&path).with_context(|| format!("{}", path.display()))
}

fn iterate_options(cfg: &RunConfig, n: usize, m: usize) -> IterateOptions {
    let d = IterateOptions::for_size(n, m);
    IterateOptions {
        tol: cfg.tol.unwrap_or(d.tol),
        k_max: cfg.k_max.unwrap_or(d.k_max),
        record_every: cfg.record_every.unwrap_or(d.record_every),
    }
}

fn classification_json(c: &ConvergenceClass) -> Value {
    serde_json::to_value(c).expect("classification serializes")
}

fn trajectory_summary(t: &Trajectory) -> String {
    if t.converged {
        format!("converged k={}", t.iterations)
    } else {
        let suffix = if t.periodic_suspect {
            ", periodic suspect"
        } else {
            ""
        };
        format!(
            "not converged k={} (last change {:.3e}{suffix})",
            t.iterations, t.final_delta
        )
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let cmd = cfg.validate()?;
    match cmd {
        Command::Simulate => simulate(cfg),
        Command::Limit => limit(cfg),
        Command::Classify => classify_cmd(cfg),
        Command::DesignInitial => design_initial(cfg),
        Command::DesignDamping => design_damping(cfg),
        Command::DesignFamily => design_family_cmd(cfg),
        Command::Centrality => centrality(cfg),
        Command::Scenario => crate::scenario::run(cfg),
    }
}

fn simulate(cfg: &RunConfig) -> Result<Report> {
    let (w, a, x0) = (
        read_w(cfg)?,
        read_a(cfg)?,
        read_x(cfg, cfg.x0.as_ref(), "x0")?,
    );
    let out = Out::new(cfg)?;
    Ok(simulate_system(cfg, &out, &System::new(w, a, x0)?)?.0)
}

/// Iterates a system and writes `trajectory.csv` and `limit.json`; also
/// returns the final state.
fn simulate_system(cfg: &RunConfig, out: &Out, sys: &System) -> Result<(Report, StateMatrix)> {
    let opts = iterate_options(cfg, sys.w.n(), sys.x0.m());
    let (traj, lim) = iterate(&sys.w, &sys.a, &sys.x0, &opts)?;
    let class = classify(&sys.w, &sys.a)?;
    out.text("trajectory.csv", &io::trajectory_to_csv(&traj))?;
    let diagnostics = json!({
        "converged": traj.converged,
        "iterations": traj.iterations,
        "final_delta": traj.final_delta,
        "periodic_suspect": traj.periodic_suspect,
        "classification": classification_json(&class),
    });
    out.json("limit", &io::limit_to_json(&lim, diagnostics))?;
    if cfg.gnuplot() {
        out.text("plot.gp", &plot::trajectory_script(sys.w.n(), sys.x0.m()))?;
    }
    let report = Report::new(traj.converged, trajectory_summary(&traj));
    Ok((report, traj.final_state().clone()))
}

fn limit(cfg: &RunConfig) -> Result<Report> {
    let (w, a, x0) = (
        read_w(cfg)?,
        read_a(cfg)?,
        read_x(cfg, cfg.x0.as_ref(), "x0")?,
    );
    let out = Out::new(cfg)?;
    let class = classify(&w, &a)?;
    let mut diagnostics = json!({ "classification": classification_json(&class) });
    let method = match cfg.method.unwrap_or_default() {
        LimitChoice::Auto if class.nonsingular => LimitChoice::ClosedForm,
        LimitChoice::Auto => LimitChoice::Iterative,
        other => other,
    };
    let (lim, ok, note) = match method {
        LimitChoice::ClosedForm => (closed_form_limit(&w, &a, &x0)?, true, String::new()),
        LimitChoice::Neumann => {
            let terms = match cfg.terms {
                Some(t) => t,
                None => neumann_terms(&class)?,
            };
            let v = neumann_limit(&w, &a, terms)?;
            let x_inf = StateMatrix::new(&v * x0.as_matrix())?;
            diagnostics["terms"] = json!(terms);
            (
                LimitResult {
                    v,
                    x_inf,
                    method: LimitMethod::Neumann,
                },
                true,
                format!(", {terms} terms"),
            )
        }
        LimitChoice::Iterative | LimitChoice::Auto => {
            let (traj, lim) = iterate(&w, &a, &x0, &iterate_options(cfg, w.n(), x0.m()))?;
            diagnostics["converged"] = json!(traj.converged);
            diagnostics["iterations"] = json!(traj.iterations);
            diagnostics["final_delta"] = json!(traj.final_delta);
            diagnostics["periodic_suspect"] = json!(traj.periodic_suspect);
            (
                lim,
                traj.converged,
                format!(", {}", trajectory_summary(&traj)),
            )
        }
    };
    out.json("limit", &io::limit_to_json(&lim, diagnostics))?;
    out.matrix("x_inf", lim.x_inf.as_matrix())?;
    let summary = format!(
        "{} limit, case {}{note}",
        method_name(lim.method),
        class.case.as_str()
    );
    Ok(Report::new(ok, summary))
}

fn method_name(m: LimitMethod) -> &'static str {
    match m {
        LimitMethod::ClosedForm => "closed-form",
        LimitMethod::Iterative => "iterative",
        LimitMethod::Neumann => "neumann",
    }
}

/// Smallest `K` with `rho^K < 1e-14`, from the upper spectral bound.
fn neumann_terms(class: &ConvergenceClass) -> Result<usize> {
    let rho = class.spectral_radius_estimate.as_ref().map(|s| s.upper);
    match rho {
        Some(r) if r < 1.0 => Ok(if r <= 0.0 {
            1
        } else {
            ((1e-14f64).ln() / r.ln()).ceil() as usize
        }),
        _ => bail!(
            "series convergence not guaranteed for this system; pass --terms or use another method"
        ),
    }
}

fn classify_cmd(cfg: &RunConfig) -> Result<Report> {
    let (w, a) = (read_w(cfg)?, read_a(cfg)?);
    let out = Out::new(cfg)?;
    let class = classify(&w, &a)?;
    let structure = structure_class(&w);
    out.json(
        "classify",
        &json!({
            "classification": classification_json(&class),
            "structure": serde_json::to_value(&structure)?,
        }),
    )?;
    let verdict = if class.converges {
        "converges"
    } else {
        "does not converge"
    };
    Ok(Report::new(
        class.converges,
        format!(
            "{}: {verdict} ({}); W is {}",
            class.case.as_str(),
            class.reason,
            structure.describe()
        ),
    ))
}

fn write_design(out: &Out, d: &DesignSolution) -> Result<()> {
    out.json("design", &io::design_to_json(d))?;
    out.matrix("x0", d.x0.as_matrix())?;
    out.damping("a", &d.a)
}

fn design_initial(cfg: &RunConfig) -> Result<Report> {
    let (w, a, x_inf) = (
        read_w(cfg)?,
        read_a(cfg)?,
        read_x(cfg, cfg.xinf.as_ref(), "xinf")?,
    );
    let out = Out::new(cfg)?;
    let x0 = solve_initial(&w, &a, &x_inf)?;
    let residual = closed_form_limit(&w, &a, &x0)?.x_inf.max_abs_diff(&x_inf);
    let d = DesignSolution { a, x0, residual };
    write_design(&out, &d)?;
    Ok(Report::new(
        true,
        format!("design-initial residual={residual:.3e}"),
    ))
}

fn design_family_cmd(cfg: &RunConfig) -> Result<Report> {
    let (w, x_inf) = (read_w(cfg)?, read_x(cfg, cfg.xinf.as_ref(), "xinf")?);
    let a = match (&cfg.a, cfg.a_value) {
        (Some(_), _) => read_a(cfg)?.as_slice().to_vec(),
        (None, Some(v)) => vec![v; w.n()],
        (None, None) => bail!("design-family needs --a or --a-value"),
    };
    let out = Out::new(cfg)?;
    let d = design_family(&w, &x_inf, &a)?;
    write_design(&out, &d)?;
    Ok(Report::new(
        true,
        format!("design-family residual={:.3e}", d.residual),
    ))
}

fn design_damping(cfg: &RunConfig) -> Result<Report> {
    let (w, x0, x_inf) = (
        read_w(cfg)?,
        read_x(cfg, cfg.x0.as_ref(), "x0")?,
        read_x(cfg, cfg.xinf.as_ref(), "xinf")?,
    );
    let out = Out::new(cfg)?;
    let tol = FeasibilityTolerances {
        interval_eps: cfg
            .tol
            .unwrap_or(FeasibilityTolerances::default().interval_eps),
        ..Default::default()
    };
    let report = solve_damping(&w, &x0, &x_inf, &tol)?;
    out.json("feasibility", &io::feasibility_to_json(&report))?;
    if let Some(a) = &report.a {
        out.damping("a", &DampingMatrix::new(a.clone())?)?;
        return Ok(Report::new(true, "feasible".into()));
    }
    let failures: Vec<String> = report
        .per_node
        .iter()
        .filter(|d| d.diagnosis != Diagnosis::Ok)
        .map(|d| format!("node {} {}", d.node + 1, d.diagnosis.as_str()))
        .collect();
    Ok(Report::new(
        false,
        format!("infeasible: {}", failures.join(", ")),
    ))
}

fn centrality(cfg: &RunConfig) -> Result<Report> {
    let w = read_w(cfg)?;
    let choice = cfg.centrality.unwrap_or_default();
    let r = match choice {
        CentralityChoice::Net => {
            let a = read_a(cfg)?;
            let class = classify(&w, &a)?;
            if !class.converges {
                bail!("no limit matrix: {}", class.reason);
            }
            let v = if class.nonsingular {
                closed_form_limit(&w, &a, &StateMatrix::column(&vec![0.0; w.n()])?)?.v
            } else {
                // with X(0) = I the state is V(k) itself
                let eye = StateMatrix::new(DMatrix::identity(w.n(), w.n()))?;
                let (traj, lim) = iterate(&w, &a, &eye, &iterate_options(cfg, w.n(), w.n()))?;
                if !traj.converged {
                    return Ok(Report::new(
                        false,
                        format!("V(k) {}", trajectory_summary(&traj)),
                    ));
                }
                lim.v
            };
            net_influence(&v)?
        }
        CentralityChoice::Alpha => {
            let Some(alpha) = cfg.alpha else {
                bail!("--alpha is required for alpha centrality");
            };
            alpha_centrality(&w, alpha)?
        }
        CentralityChoice::Perron => perron_centrality(&w)?,
    };
    let out = Out::new(cfg)?;
    match out.format {
        OutputFormat::Csv => out.text("centrality.csv", &io::centrality_to_csv(&r))?,
        OutputFormat::Json => out.json("centrality", &io::centrality_to_json(&r))?,
    }
    let ranked = r.ranked();
    let mut report = Report::new(
        true,
        format!(
            "centrality ({choice:?}): top node {} ({:.6})",
            ranked[0].0 + 1,
            ranked[0].1
        )
        .to_lowercase(),
    );
    report.details = ranked
        .iter()
        .enumerate()
        .map(|(rank, (node, score))| format!("{:>4} {:>6} {score:.12}", rank + 1, node + 1))
        .collect();
    Ok(report)
}

pub(crate) fn write_system(dir: &Path, format: OutputFormat, sys: &System) -> Result<()> {
    let out = Out {
        dir: dir.to_path_buf(),
        format,
    };
    out.matrix("w", sys.w.as_matrix())?;
    out.damping("a", &sys.a)?;
    out.matrix("x0", sys.x0.as_matrix())
}

pub(crate) fn simulate_into(
    cfg: &RunConfig,
    dir: &Path,
    sys: &System,
) -> Result<(Report, StateMatrix)> {
    let out = Out {
        dir: dir.to_path_buf(),
        format: cfg.format(),
    };
    simulate_system(cfg, &out, sys)
}
