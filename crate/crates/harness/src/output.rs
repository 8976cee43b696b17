//! CSV, manifest and plot-script writers. Floats use Rust's `{:e}`
//! formatting: shortest round-trip digits, `.` decimal point, no locale.

use std::fs;
use std::path::Path;

use bivelocity::{FlowState, GasModel, Grid1D};

use crate::config::{to_toml, ScenarioConfig};
use crate::runner::RunError;

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn create_dir(path: &Path) -> Result<(), RunError> {
    fs::create_dir_all(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), RunError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let wrap = |source: csv::Error| RunError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub const FIELD_HEADER: [&str; 8] = ["x", "a_n", "v_bar", "u_m", "e_in", "rho", "pressure", "temperature"];

pub fn write_fields(path: &Path, state: &FlowState, gas: &GasModel, grid: &Grid1D) -> Result<(), RunError> {
    let d = state.derived_quantities(gas)?;
    let x = grid.centers();
    let rows = (0..state.len()).map(|i| {
        [
            x[i],
            state.a_n[i],
            state.v_bar[i],
            state.u_m[i],
            state.e_in[i],
            d.rho_bar[i],
            d.pressure[i],
            d.temperature[i],
        ]
        .map(num)
    });
    write_csv(path, &FIELD_HEADER, rows)
}

pub fn write_metrics(path: &Path, metrics: &[(String, f64)]) -> Result<(), RunError> {
    write_csv(path, &["metric", "value"], metrics.iter().map(|(k, v)| [k.clone(), num(*v)]))
}

/// Resolved configuration plus a `[version]` table; parses back with
/// [`crate::config::parse_config`].
pub fn manifest(cfg: &ScenarioConfig) -> String {
    format!(
        "{}\n[version]\ncrate = \"bivelocity\"\nversion = \"{}\"\n",
        to_toml(cfg),
        env!("CARGO_PKG_VERSION")
    )
}

/// Gnuplot script for the CSVs of one run directory.
pub fn plot_script(plots: &[Plot]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    for p in plots {
        s.push_str(&format!(
            "\nset output '{}.png'\nset title '{}'\nset xlabel '{}'\nset ylabel '{}'\n{}{}plot {}\n",
            p.name,
            p.title,
            p.xlabel,
            p.ylabel,
            if p.logx { "set logscale x\n" } else { "unset logscale x\n" },
            if p.logy { "set logscale y\n" } else { "unset logscale y\n" },
            p.series
                .iter()
                .map(|(file, cols)| format!("'{file}' using {cols} with linespoints"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    s
}

pub struct Plot {
    pub name: &'static str,
    pub title: String,
    pub xlabel: &'static str,
    pub ylabel: &'static str,
    pub logx: bool,
    pub logy: bool,
    /// `(csv file, gnuplot using-spec)`.
    pub series: Vec<(String, String)>,
}

impl Plot {
    pub fn new(name: &'static str, title: impl Into<String>, xlabel: &'static str, ylabel: &'static str) -> Self {
        Self {
            name,
            title: title.into(),
            xlabel,
            ylabel,
            logx: false,
            logy: false,
            series: Vec::new(),
        }
    }

    pub fn loglog(mut self) -> Self {
        self.logx = true;
        self.logy = true;
        self
    }

    pub fn logy(mut self) -> Self {
        self.logy = true;
        self
    }

    pub fn series(mut self, file: impl Into<String>, using: impl Into<String>) -> Self {
        self.series.push((file.into(), using.into()));
        self
    }
}

