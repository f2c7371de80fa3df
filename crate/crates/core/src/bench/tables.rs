//! Table runners and their text and delimited renderings.

use std::fmt::Write;

use crate::conic::{ConicBackend, RelaxationLevel};
use crate::cuts::poly::LocalForm;
use crate::cuts::{base_cut, generate_local, Family};
use crate::driver::{extract_rank_one, run, DriverConfig};
use crate::exact::{family_max_violation, objective_gap};
use crate::model::BoxQpInstance;
use crate::oracle::solve_global;
use crate::par::{self, Execution};

use super::search::{cut_objective, objective_form, search_max_gap, SearchConfig};
use super::{builtin_bl, generate, GenSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(f64),
    Empty,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub title: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, title: &str, rows: Vec<String>, cols: Vec<String>) -> Self {
        let cells = vec![vec![Cell::Empty; cols.len()]; rows.len()];
        Table {
            name: name.into(),
            title: title.into(),
            row_labels: rows,
            col_labels: cols,
            cells,
        }
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        match self.cells[row][col] {
            Cell::Value(v) => Some(v),
            _ => None,
        }
    }

    fn cell_text(c: &Cell) -> String {
        match c {
            Cell::Value(v) => format!("{v:.5}"),
            Cell::Empty => "-".into(),
            Cell::Failed(_) => "FAILED".into(),
        }
    }

    /// Aligned plain text, five decimals.
    pub fn render_text(&self) -> String {
        let w0 = self
            .row_labels
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max(8);
        let widths: Vec<usize> = self
            .col_labels
            .iter()
            .enumerate()
            .map(|(j, l)| {
                self.cells
                    .iter()
                    .map(|r| Self::cell_text(&r[j]).len())
                    .max()
                    .unwrap_or(0)
                    .max(l.len())
            })
            .collect();
        let mut out = String::new();
        writeln!(out, "{}", self.title).unwrap();
        write!(out, "{:w0$}", "").unwrap();
        for (l, w) in self.col_labels.iter().zip(&widths) {
            write!(out, "  {l:>w$}").unwrap();
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.cells) {
            write!(out, "{label:<w0$}").unwrap();
            for (c, w) in row.iter().zip(&widths) {
                write!(out, "  {:>w$}", Self::cell_text(c)).unwrap();
            }
            out.push('\n');
        }
        for (label, row) in self.row_labels.iter().zip(&self.cells) {
            for (col, c) in self.col_labels.iter().zip(row) {
                if let Cell::Failed(msg) = c {
                    writeln!(out, "  [{label} / {col}] {msg}").unwrap();
                }
            }
        }
        out
    }

    /// One record per cell: `table,row,col,value`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["table", "row", "col", "value"]).unwrap();
        for (label, row) in self.row_labels.iter().zip(&self.cells) {
            for (col, c) in self.col_labels.iter().zip(row) {
                let v = match c {
                    Cell::Value(v) => format!("{v:.5}"),
                    Cell::Empty => String::new(),
                    Cell::Failed(_) => "NaN".into(),
                };
                w.write_record([self.name.as_str(), label, col, &v]).unwrap();
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn violation_table(
    name: &str,
    title: &str,
    levels: &[RelaxationLevel],
    families: &[Family],
    backend: &dyn ConicBackend,
    exec: Execution,
) -> Table {
    let mut cols: Vec<String> = families.iter().map(|f| f.name().to_string()).collect();
    cols.extend(families.iter().map(|f| format!("{} norm", f.name())));
    let rows = levels.iter().map(|l| l.name()).collect();
    let mut t = Table::new(name, title, rows, cols);
    let nf = families.len();
    for (i, level) in levels.iter().enumerate() {
        for (j, &fam) in families.iter().enumerate() {
            match family_max_violation(&generate_local(fam), level, backend, exec) {
                Ok(v) => {
                    t.cells[i][j] = Cell::Value(v.raw);
                    t.cells[i][nf + j] = Cell::Value(v.normalized);
                }
                Err(e) => {
                    t.cells[i][j] = Cell::Failed(e.to_string());
                    t.cells[i][nf + j] = Cell::Failed(e.to_string());
                }
            }
        }
    }
    t
}

/// Maximum violations of RLT, TRI and ETRI1 over the three base relaxations.
pub fn run_t1(backend: &dyn ConicBackend, exec: Execution) -> Table {
    violation_table(
        "T1",
        "Maximum violations (RLT, TRI, ETRI1)",
        &[
            RelaxationLevel::psd_diag(),
            RelaxationLevel::psd_rlt(),
            RelaxationLevel::psd_rlt_tri(),
        ],
        &[Family::Rlt, Family::Tri, Family::Etri1],
        backend,
        exec,
    )
}

/// Maximum violations of ETRI2 and ETRI3, including over PSD+RLT+TRI+ETRI1.
pub fn run_t2(backend: &dyn ConicBackend, exec: Execution) -> Table {
    violation_table(
        "T2",
        "Maximum violations (ETRI2, ETRI3)",
        &[
            RelaxationLevel::psd_diag(),
            RelaxationLevel::psd_rlt(),
            RelaxationLevel::psd_rlt_tri(),
            RelaxationLevel::etri1(),
        ],
        &[Family::Etri2, Family::Etri3],
        backend,
        exec,
    )
}

/// The ladder of driver runs on the built-in three-dimensional instance.
pub fn run_t3(backend: &dyn ConicBackend, config: &DriverConfig) -> Table {
    let levels = [
        RelaxationLevel::psd_rlt_tri(),
        RelaxationLevel::etri1(),
        RelaxationLevel::etri123(),
        RelaxationLevel::soc(),
    ];
    let bl = builtin_bl();
    let mut t = Table::new(
        "T3",
        "Relaxation values on BL",
        levels.iter().map(|l| l.name()).collect(),
        labels(&["value", "feasible", "ETRI", "SOC blocks"]),
    );
    for (i, level) in levels.iter().enumerate() {
        match run(&bl, level, config, backend) {
            Ok(r) => {
                t.cells[i] = vec![
                    Cell::Value(r.value),
                    Cell::Value(r.feasible_value),
                    Cell::Value(r.etri_count as f64),
                    Cell::Value(r.soc_blocks as f64),
                ];
            }
            Err(e) => t.cells[i] = vec![Cell::Failed(e.to_string()); 4],
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct T4Row {
    pub level: RelaxationLevel,
    pub remark: &'static str,
    pub gap: Option<f64>,
    pub objective: Option<[f64; 9]>,
}

/// The three unit objectives whose gaps are known in closed form.
pub fn t4_deterministic_objectives() -> [(RelaxationLevel, &'static str, LocalForm); 3] {
    let two_rlt = LocalForm {
        off: [1.0, 1.0, 0.0],
        ..Default::default()
    };
    let tri = *base_cut(Family::Tri, 0).form();
    let etri = generate_local(Family::Etri1)
        .into_iter()
        .min_by(|a, b| a.coefficient_norm().total_cmp(&b.coefficient_norm()))
        .expect("non-empty family");
    let unit = |f: LocalForm| {
        let r = crate::cuts::LinearCut::from_local((0, 1, 2), f, Family::Tri, Default::default());
        f.scale(1.0 / r.coefficient_norm())
    };
    [
        (RelaxationLevel::psd_diag(), "Sum of 2 RLT", unit(two_rlt)),
        (RelaxationLevel::psd_rlt(), "TRI", unit(tri)),
        (RelaxationLevel::psd_rlt_tri(), "ETRI1", unit(*etri.form())),
    ]
}

fn form_coefficients(f: &LocalForm) -> [f64; 9] {
    [
        f.c[0], f.c[1], f.c[2], f.diag[0], f.diag[1], f.diag[2], f.off[0], f.off[1], f.off[2],
    ]
}

fn catalog_starts() -> Vec<[f64; 9]> {
    [Family::Tri, Family::Etri1, Family::Etri2, Family::Etri3]
        .into_iter()
        .flat_map(generate_local)
        .map(|c| cut_objective(&c))
        .collect()
}

fn catalog_pieces() -> Vec<[f64; 9]> {
    let mut v: Vec<[f64; 9]> = generate_local(Family::Rlt).iter().map(cut_objective).collect();
    v.extend(catalog_starts());
    v
}

/// Normalised gaps: three deterministic rows, then searched rows for the
/// stronger levels when `search` is given.
pub fn run_t4(backend: &dyn ConicBackend, search: Option<&SearchConfig>) -> (Table, Vec<T4Row>) {
    let mut rows = Vec::new();
    for (level, remark, obj) in t4_deterministic_objectives() {
        rows.push(T4Row {
            level,
            remark,
            gap: objective_gap(&obj, &level, backend).ok(),
            objective: Some(form_coefficients(&obj)),
        });
    }
    let mut incumbents: Vec<[f64; 9]> = rows.iter().filter_map(|r| r.objective).collect();
    for level in [
        RelaxationLevel::etri1(),
        RelaxationLevel::etri123(),
        RelaxationLevel::soc(),
    ] {
        let found = search.and_then(|cfg| {
            let mut cfg = cfg.clone();
            let mut starts = incumbents.clone();
            starts.extend(cfg.starts.iter().copied());
            starts.extend(catalog_starts());
            cfg.starts = starts;
            if cfg.pieces.is_empty() {
                cfg.pieces = catalog_pieces();
            }
            search_max_gap(&level, &cfg, backend).ok()
        });
        if let Some(f) = &found {
            incumbents.insert(0, f.objective);
        }
        rows.push(T4Row {
            level,
            remark: if search.is_some() { "search" } else { "not run" },
            gap: found.as_ref().map(|g| g.gap),
            objective: found.map(|g| g.objective),
        });
    }
    // an objective found for a stronger level is also a witness at weaker ones
    for i in 3..rows.len() {
        for j in i + 1..rows.len() {
            let Some(obj) = rows[j].objective else { continue };
            if let Ok(g) = objective_gap(&objective_form(&obj), &rows[i].level, backend) {
                if rows[i].gap.is_none_or(|cur| g > cur) {
                    rows[i].gap = Some(g);
                    rows[i].objective = Some(obj);
                }
            }
        }
    }
    let mut t = Table::new(
        "T4",
        "Maximum normalised gaps",
        rows.iter().map(|r| r.level.name()).collect(),
        labels(&["gap"]),
    );
    for (i, r) in rows.iter().enumerate() {
        t.cells[i][0] = match (r.gap, r.remark) {
            (Some(g), _) => Cell::Value(g),
            (None, "not run") => Cell::Empty,
            (None, _) => Cell::Failed("solver failure".into()),
        };
    }
    (t, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub count: usize,
    pub densities: Vec<u32>,
    pub seed: u64,
    pub driver: DriverConfig,
    /// Seeds tried for rank-one extraction on closed instances.
    pub extraction_seeds: u64,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            count: 50,
            densities: vec![50, 60, 70, 75, 80, 85, 90],
            seed: 2020,
            driver: DriverConfig {
                exec: Execution::Sequential,
                ..Default::default()
            },
            extraction_seeds: 5,
            exec: Execution::default(),
        }
    }
}

impl SuiteConfig {
    /// Dimensions cycle through 5..=10 and densities through the list.
    pub fn spec(&self, k: usize) -> GenSpec {
        GenSpec::new(
            5 + k % 6,
            self.densities[k % self.densities.len()],
            (k / 6 + 1) as u32,
            self.seed,
        )
    }
}

/// Levels of the suite ladder.
pub fn suite_levels() -> [RelaxationLevel; 4] {
    [
        RelaxationLevel::psd_rlt_tri(),
        RelaxationLevel::etri1(),
        RelaxationLevel::etri123(),
        RelaxationLevel::soc(),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub label: String,
    pub instance: BoxQpInstance,
    pub opt: f64,
    /// Relaxation values along [`suite_levels`]; `NaN` on failure.
    pub values: [f64; 4],
    pub feasible: [f64; 4],
    pub etri_cuts: [usize; 4],
    pub soc_blocks: usize,
    /// On instances whose strongest level reaches the optimum: the extracted
    /// point's value, if extraction succeeded.
    pub extracted_value: Option<f64>,
    pub errors: Vec<String>,
}

impl SuiteRow {
    pub fn gaps(&self) -> [f64; 4] {
        self.values.map(|v| v - self.opt)
    }

    pub fn closed_by_soc(&self, tol: f64) -> bool {
        self.values[3] - self.opt < tol
    }
}

fn suite_row(inst: BoxQpInstance, cfg: &SuiteConfig, backend: &dyn ConicBackend) -> SuiteRow {
    let opt = solve_global(&inst).map(|s| s.value).unwrap_or(f64::NAN);
    let mut row = SuiteRow {
        label: inst.label().unwrap_or("").to_string(),
        opt,
        values: [f64::NAN; 4],
        feasible: [f64::NAN; 4],
        etri_cuts: [0; 4],
        soc_blocks: 0,
        extracted_value: None,
        errors: Vec::new(),
        instance: inst.clone(),
    };
    let mut last = None;
    for (i, level) in suite_levels().iter().enumerate() {
        match run(&inst, level, &cfg.driver, backend) {
            Ok(r) => {
                row.values[i] = r.value;
                row.feasible[i] = r.feasible_value;
                row.etri_cuts[i] = r.etri_count;
                if i == 3 {
                    row.soc_blocks = r.soc_blocks;
                }
                last = Some(r);
            }
            Err(e) => row.errors.push(format!("{}: {e}", level.name())),
        }
    }
    if let Some(r) = last.filter(|_| row.closed_by_soc(1e-4)) {
        if let Some(x) = &r.extracted {
            row.extracted_value = inst.feasible_value(x).ok();
        }
        for s in 0..cfg.extraction_seeds {
            if row
                .extracted_value
                .is_some_and(|v| (v - r.value).abs() <= 1e-4)
            {
                break;
            }
            if let Ok(Some(x)) = extract_rank_one(
                &inst,
                r.value,
                &r.state,
                backend,
                cfg.driver.seed + s,
                cfg.driver.rank_tol,
            ) {
                row.extracted_value = inst.feasible_value(&x).ok();
            }
        }
    }
    row
}

/// Regenerated instances with `5 <= n <= 10`: per-instance rows plus value
/// and gap tables.
pub fn run_t56(cfg: &SuiteConfig, backend: &dyn ConicBackend) -> (Vec<SuiteRow>, Table, Table) {
    let instances: Vec<BoxQpInstance> = (0..cfg.count).map(|k| generate(&cfg.spec(k))).collect();
    let rows = par::map(cfg.exec, &instances, |inst| suite_row(inst.clone(), cfg, backend));
    let level_names: Vec<String> = suite_levels().iter().map(|l| l.name()).collect();

    let mut vcols = vec!["OPT".to_string()];
    vcols.extend(level_names.iter().cloned());
    vcols.extend(level_names.iter().map(|n| format!("feas {n}")));
    let mut values = Table::new(
        "T5",
        "Objective values on regenerated instances",
        rows.iter().map(|r| r.label.clone()).collect(),
        vcols,
    );
    let mut gcols: Vec<String> = level_names.iter().map(|n| format!("opt {n}")).collect();
    gcols.extend(level_names.iter().map(|n| format!("feas {n}")));
    let mut gaps = Table::new(
        "T6",
        "Gaps on regenerated instances",
        values.row_labels.clone(),
        gcols,
    );
    let cell = |v: f64| {
        if v.is_nan() {
            Cell::Failed("see errors".into())
        } else {
            Cell::Value(v)
        }
    };
    for (i, r) in rows.iter().enumerate() {
        values.cells[i][0] = cell(r.opt);
        for l in 0..4 {
            values.cells[i][1 + l] = cell(r.values[l]);
            values.cells[i][5 + l] = cell(r.feasible[l]);
            gaps.cells[i][l] = cell(r.values[l] - r.opt);
            gaps.cells[i][4 + l] = cell(r.values[l] - r.feasible[l]);
        }
    }
    (rows, values, gaps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering() {
        let mut t = Table::new("TX", "demo", labels(&["a", "bb"]), labels(&["c1", "c2"]));
        t.cells[0][0] = Cell::Value(0.125);
        t.cells[1][1] = Cell::Failed("boom".into());
        let text = t.render_text();
        assert!(text.contains("0.12500"));
        assert!(text.contains("FAILED") && text.contains("boom"));
        let csv = t.to_csv();
        assert!(csv.starts_with("table,row,col,value\n"));
        assert!(csv.contains("TX,a,c1,0.12500"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn deterministic_objectives_are_unit() {
        for (_, _, f) in t4_deterministic_objectives() {
            assert!((form_coefficients(&f).iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
