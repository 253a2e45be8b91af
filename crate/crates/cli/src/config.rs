//! Run configuration: the JSON `--config` file and the command-line flags
//! both produce a [`RunConfig`]; flags override file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Limit,
    Classify,
    DesignInitial,
    DesignDamping,
    DesignFamily,
    Centrality,
    Scenario,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn ext(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LimitChoice {
    /// Closed form when `I - AW` is nonsingular, iteration otherwise.
    #[default]
    Auto,
    ClosedForm,
    Iterative,
    Neumann,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CentralityChoice {
    /// Column means of the limit matrix of `{W, A}`.
    #[default]
    Net,
    /// `A = alpha I` fixed point.
    Alpha,
    /// Left Perron vector of `W`.
    Perron,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub w: Option<PathBuf>,
    pub a: Option<PathBuf>,
    pub x0: Option<PathBuf>,
    pub xinf: Option<PathBuf>,
    /// Output directory; created if missing.
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub tol: Option<f64>,
    pub k_max: Option<usize>,
    pub record_every: Option<usize>,
    pub method: Option<LimitChoice>,
    pub terms: Option<usize>,
    /// Uniform damping value for design-family (instead of an `a` file).
    pub a_value: Option<f64>,
    pub centrality: Option<CentralityChoice>,
    pub alpha: Option<f64>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    /// Scenario generator name, e.g. `cleavage`.
    pub scenario: Option<String>,
    /// Scenario spec file (JSON); takes precedence over `scenario`.
    pub spec: Option<PathBuf>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub replicas: Option<usize>,
    pub gnuplot_script: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        overlay!(self, top; command, w, a, x0, xinf, out, format, tol, k_max, record_every,
                 method, terms, a_value, centrality, alpha, bins, seed, scenario, spec, n, m,
                 replicas, gnuplot_script);
        self
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn bins(&self) -> usize {
        self.bins.unwrap_or(25)
    }

    pub fn gnuplot(&self) -> bool {
        self.gnuplot_script.unwrap_or(false)
    }

    /// A required input path that must exist.
    pub fn input(&self, field: Option<&PathBuf>, name: &str) -> Result<PathBuf> {
        let Some(path) = field else {
            bail!("missing required input --{name}");
        };
        if !path.is_file() {
            bail!(
                "--{name}: {} does not exist or is not a file",
                path.display()
            );
        }
        Ok(path.clone())
    }

    /// Checks that the inputs each command needs are present and readable,
    /// and that the output directory can be created, before any computation.
    pub fn validate(&self) -> Result<Command> {
        let Some(cmd) = self.command else {
            bail!("no command given (use a subcommand or set \"command\" in the config)");
        };
        let needs: &[(&Option<PathBuf>, &str)] = match cmd {
            Command::Simulate | Command::Limit => {
                &[(&self.w, "w"), (&self.a, "a"), (&self.x0, "x0")]
            }
            Command::Classify => &[(&self.w, "w"), (&self.a, "a")],
            Command::DesignInitial => &[(&self.w, "w"), (&self.a, "a"), (&self.xinf, "xinf")],
            Command::DesignDamping => &[(&self.w, "w"), (&self.x0, "x0"), (&self.xinf, "xinf")],
            Command::DesignFamily => &[(&self.w, "w"), (&self.xinf, "xinf")],
            Command::Centrality => match self.centrality.unwrap_or_default() {
                CentralityChoice::Net => &[(&self.w, "w"), (&self.a, "a")],
                _ => &[(&self.w, "w")],
            },
            Command::Scenario => &[],
        };
        for (field, name) in needs {
            self.input(field.as_ref(), name)?;
        }
        if cmd == Command::DesignFamily && self.a.is_none() && self.a_value.is_none() {
            bail!("design-family needs --a or --a-value");
        }
        if cmd == Command::Scenario {
            match (&self.spec, &self.scenario) {
                (Some(spec), _) => {
                    self.input(Some(spec), "spec")?;
                }
                (None, Some(_)) => {}
                (None, None) => bail!("scenario needs a generator name or --spec"),
            }
        }
        if let Some(r) = self.replicas {
            if r == 0 {
                bail!("--replicas must be at least 1");
            }
        }
        let out = self.out_dir();
        if out.exists() && !out.is_dir() {
            bail!("--out: {} exists and is not a directory", out.display());
        }
        Ok(cmd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"command": "simulate", "tolerance": 1}"#);
        assert!(err.is_err());
        let ok: RunConfig =
            serde_json::from_str(r#"{"command": "design-damping", "k_max": 10}"#).unwrap();
        assert_eq!(ok.command, Some(Command::DesignDamping));
    }

    #[test]
    fn overlay_prefers_flags() {
        let base = RunConfig {
            tol: Some(1e-3),
            seed: Some(1),
            ..Default::default()
        };
        let top = RunConfig {
            seed: Some(2),
            ..Default::default()
        };
        let merged = base.overlay(top);
        assert_eq!(merged.tol, Some(1e-3));
        assert_eq!(merged.seed, Some(2));
    }
}
