use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{CellModel, ExperimentCell, GridRun};
use crate::classical::ModelKind;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "model,features,test_acc,valid_acc,seed,runtime_sec";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Markdown,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidConfig(format!("unknown report format {other:?}"))),
        }
    }
}

/// Accuracy as a percentage with two decimals, rounding halves up.
pub fn format_percent(acc: f64) -> String {
    // Accuracies are ratios of small integers; the nudge keeps values such
    // as 0.56345 from landing just under the half.
    let hundredths = (acc * 10_000.0 + 0.5 + 1e-7).floor() as i64;
    format!("{}.{:02}%", hundredths / 100, hundredths % 100)
}

fn table_title(model: CellModel) -> &'static str {
    match model {
        CellModel::Classical(ModelKind::Svm) => "Table 1. SVM",
        CellModel::Classical(ModelKind::Knn) => "Table 2. KNN",
        CellModel::Classical(ModelKind::LogReg) => "Table 3. Logistic Regression",
        CellModel::Classical(ModelKind::RandomForest) => "Table 4. Random Forest",
        CellModel::Ann => "Table 5. ANN",
    }
}

const TABLE_ORDER: [CellModel; 5] = [
    CellModel::Classical(ModelKind::Svm),
    CellModel::Classical(ModelKind::Knn),
    CellModel::Classical(ModelKind::LogReg),
    CellModel::Classical(ModelKind::RandomForest),
    CellModel::Ann,
];

fn acc_or_err(a: Option<f64>) -> String {
    a.map_or_else(|| "ERR".to_string(), format_percent)
}

fn markdown(run: &GridRun) -> String {
    let mut out = String::new();
    for model in TABLE_ORDER {
        let rows: Vec<&ExperimentCell> = run.cells.iter().filter(|c| c.spec.model == model).collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(out, "### {}\n", table_title(model));
        out.push_str("| Features | Test | Validation |\n|---|---|---|\n");
        for c in &rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                c.spec.features.label(),
                acc_or_err(c.test_acc),
                acc_or_err(c.valid_acc)
            );
        }
        for c in rows.iter().filter(|c| c.error.is_some()) {
            let _ = writeln!(
                out,
                "\nERR {}: {}",
                c.spec.features.label(),
                c.error.as_deref().unwrap_or_default()
            );
        }
        out.push('\n');
    }

    out.push_str("### Table 6. Diagnostics\n\n");
    let _ = writeln!(out, "Global seed: {}\n", run.seed);
    out.push_str("| Split | Majority baseline |\n|---|---|\n");
    let _ = writeln!(
        out,
        "| Test | {} |",
        run.majority_test.map_or("NA".to_string(), format_percent)
    );
    let _ = writeln!(
        out,
        "| Validation | {} |\n",
        run.majority_valid.map_or("NA".to_string(), format_percent)
    );
    out.push_str("| Cell | Seed | Runtime (s) |\n|---|---|---|\n");
    for c in &run.cells {
        let _ = writeln!(out, "| {} | {} | {} |", c.spec, c.seed, runtime(c));
    }
    out
}

fn runtime(c: &ExperimentCell) -> String {
    c.runtime_sec.map_or_else(|| "NA".to_string(), |r| format!("{r:.3}"))
}

fn csv(run: &GridRun) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let acc = |a: Option<f64>| a.map_or_else(|| "ERR".to_string(), |v| format!("{v:.6}"));
    for c in &run.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.spec.model.key(),
            c.spec.features.key(),
            acc(c.test_acc),
            acc(c.valid_acc),
            c.seed,
            runtime(c)
        );
    }
    out
}

pub fn emit_report(run: &GridRun, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => markdown(run),
        ReportFormat::Csv => csv(run),
    }
}
