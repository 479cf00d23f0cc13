//! Command-line front end and the JSON report format.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{parse_csv, ColumnSelector};
use crate::depth::{DepthMode, MedianRule, DEFAULT_DIRECTIONS};
use crate::error::Error;
use crate::fence::{BagplotModel, ClassicModel};
use crate::inference::ErrorControl;
use crate::pipeline::{FitConfig, Prepared};
use crate::render::{render_classic_svg, render_compare_svg, render_svg, RenderStyle};
use crate::robust_scatter::{McdConfig, DEFAULT_SEED};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "BAGWHISKER_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fwer,
    Fdr,
    Pfer,
    Classic,
}

impl Method {
    fn control(self) -> Option<ErrorControl> {
        match self {
            Method::Fwer => Some(ErrorControl::Fwer),
            Method::Fdr => Some(ErrorControl::Fdr),
            Method::Pfer => Some(ErrorControl::Pfer),
            Method::Classic => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DepthChoice {
    /// Exact up to 5000 points, 360 directions above.
    Auto,
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MedianChoice {
    Centroid,
    CoordinateMedian,
}

/// Bag-and-whisker plots for bivariate data.
#[derive(Debug, Parser)]
#[command(name = "bagwhisker", version)]
pub struct Cli {
    /// CSV file with the observations
    #[arg(long, required_unless_present = "from_json")]
    pub input: Option<PathBuf>,
    /// Column for x: header name or 0-based index
    #[arg(long, default_value = "0")]
    pub x: ColumnSelector,
    /// Column for y: header name or 0-based index
    #[arg(long, default_value = "1")]
    pub y: ColumnSelector,
    #[arg(long, value_enum, default_value = "fwer")]
    pub method: Method,
    /// Error level q (defaults: fwer 0.1, fdr 0.01, pfer 0.5)
    #[arg(long, allow_negative_numbers = true)]
    pub level: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    pub depth_mode: DepthChoice,
    /// Number of directions for approximate depth
    #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
    pub directions: usize,
    #[arg(long, value_enum, default_value = "centroid")]
    pub median_rule: MedianChoice,
    /// Seed for the MCD random starts (BAGWHISKER_SEED takes precedence)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "svg")]
    pub format: Format,
    /// Output file; with `--format both` the .svg and .json extensions are
    /// added to its stem. Standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Four panels: classic, FWER, FDR, PFER
    #[arg(long, conflicts_with_all = ["method", "level"])]
    pub compare: bool,
    /// Re-render the SVG of a saved JSON report
    #[arg(long, conflicts_with = "input")]
    pub from_json: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptivePanel {
    pub method: ErrorControl,
    pub level: f64,
    pub lambda: f64,
    pub outliers: Vec<usize>,
    pub model: BagplotModel,
}

impl AdaptivePanel {
    fn new(model: BagplotModel) -> Self {
        AdaptivePanel {
            method: model.outcome.method,
            level: model.outcome.q,
            lambda: model.lambda,
            outliers: model.outliers(),
            model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Report {
    Adaptive {
        schema_version: u32,
        #[serde(flatten)]
        panel: AdaptivePanel,
    },
    Classic {
        schema_version: u32,
        outliers: Vec<usize>,
        model: ClassicModel,
    },
    Compare {
        schema_version: u32,
        classic: ClassicModel,
        panels: Vec<AdaptivePanel>,
    },
}

impl Report {
    pub fn schema_version(&self) -> u32 {
        match self {
            Report::Adaptive { schema_version, .. }
            | Report::Classic { schema_version, .. }
            | Report::Compare { schema_version, .. } => *schema_version,
        }
    }

    pub fn render(&self, style: &RenderStyle) -> Result<String, Error> {
        Ok(match self {
            Report::Adaptive { panel, .. } => render_svg(&panel.model, style)?,
            Report::Classic { model, .. } => render_classic_svg(model, style)?,
            Report::Compare { classic, panels, .. } => {
                let labelled: Vec<(&str, &BagplotModel)> = panels.iter().map(|p| (p.method.label(), &p.model)).collect();
                render_compare_svg(classic, &labelled, style)?
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let report: Report = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
        if report.schema_version() != SCHEMA_VERSION {
            return Err(Error::Json(format!("unsupported schema_version {}", report.schema_version())));
        }
        Ok(report)
    }
}

fn seed(cli: &Cli) -> Result<u64, Error> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(cli.seed),
    }
}

fn fit_config(cli: &Cli) -> Result<FitConfig, Error> {
    if cli.directions < 2 {
        return Err(Error::Usage(format!("--directions must be at least 2, got {}", cli.directions)));
    }
    let depth_mode = match cli.depth_mode {
        DepthChoice::Auto => None,
        DepthChoice::Exact => Some(DepthMode::Exact),
        DepthChoice::Approx => Some(DepthMode::Approx { directions: cli.directions }),
    };
    let median_rule = match cli.median_rule {
        MedianChoice::Centroid => MedianRule::Centroid,
        MedianChoice::CoordinateMedian => MedianRule::CoordinateMedian,
    };
    Ok(FitConfig { depth_mode, median_rule, mcd: McdConfig { seed: seed(cli)?, ..McdConfig::default() } })
}

/// Runs the pipeline described by `cli` and returns the report.
pub fn build_report(cli: &Cli) -> Result<Report, Error> {
    let path = cli.input.as_ref().ok_or_else(|| Error::Usage("--input is required".into()))?;
    let file = File::open(path).map_err(|source| Error::Io { context: format!("reading {}", path.display()), source })?;
    let data = parse_csv(BufReader::new(file), &cli.x, &cli.y)?;
    if let Some(q) = cli.level {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Usage(format!("--level must be positive, got {q}")));
        }
    }
    let prepared = Prepared::new(data.points(), &fit_config(cli)?)?;
    if cli.compare {
        let panels = ErrorControl::ALL
            .iter()
            .map(|&m| prepared.model(m, m.default_level()).map(AdaptivePanel::new))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Report::Compare { schema_version: SCHEMA_VERSION, classic: prepared.classic()?, panels });
    }
    match cli.method.control() {
        Some(m) => {
            let model = prepared.model(m, cli.level.unwrap_or(m.default_level()))?;
            Ok(Report::Adaptive { schema_version: SCHEMA_VERSION, panel: AdaptivePanel::new(model) })
        }
        None => {
            let model = prepared.classic()?;
            Ok(Report::Classic { schema_version: SCHEMA_VERSION, outliers: model.outliers.clone(), model })
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { context: format!("writing {}", p.display()), source }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| Error::Io { context: "writing standard output".into(), source }),
    }
}

pub fn run(cli: &Cli) -> Result<(), Error> {
    let style = RenderStyle::default();
    if let Some(path) = &cli.from_json {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { context: format!("reading {}", path.display()), source })?;
        let report = Report::from_json(&text)?;
        return match cli.format {
            Format::Svg => write_output(cli.output.as_deref(), &report.render(&style)?),
            _ => Err(Error::Usage("--from-json only produces SVG".into())),
        };
    }
    let report = build_report(cli)?;
    match cli.format {
        Format::Svg => write_output(cli.output.as_deref(), &report.render(&style)?),
        Format::Json => write_output(cli.output.as_deref(), &report.to_json()),
        Format::Both => {
            let base = cli.output.as_ref().ok_or_else(|| Error::Usage("--format both needs --output".into()))?;
            write_output(Some(&base.with_extension("svg")), &report.render(&style)?)?;
            write_output(Some(&base.with_extension("json")), &report.to_json())
        }
    }
}

/// Parses arguments, runs, and reports failures as one JSON line on stderr.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let message = e.to_string();
            let message = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            let record = Error::Usage(message.to_owned()).record(None);
            eprintln!("{}", serde_json::to_string(&record).expect("record serializes"));
            return record.exit_code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let input = cli.input.as_ref().or(cli.from_json.as_ref()).map(|p| p.display().to_string());
            let record = e.record(input.as_deref());
            eprintln!("{}", serde_json::to_string(&record).expect("record serializes"));
            e.exit_code()
        }
    }
}
