//! `kmfix emit-plotdata`: experiment CSV in, tidy per-figure CSV out.
//!
//! Proportion figures keep one row per cell with the Wilson band and the
//! theoretical bound. Practice figures average over repetitions and attach a
//! normal-approximation band of +-1.96 standard errors.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use kmfix_core::experiments::{PRACTICE_HEADER, PROPORTION_HEADER};
use kmfix_core::report::{fmt_real, parse_real, schema_hash, Table};

use crate::{CliError, CliResult};

pub const PROPORTION_TIDY: [&str; 10] = [
    "series",
    "variant",
    "d",
    "sigma2",
    "beta",
    "ratio",
    "lo",
    "hi",
    "bound",
    "bound_valid",
];

pub const PRACTICE_TIDY: [&str; 9] = ["series", "d", "sigma2", "init", "algorithm", "reps", "y", "lo", "hi"];

enum Figure {
    Proportion(&'static str),
    Practice(&'static str),
}

fn figure(name: &str) -> CliResult<Figure> {
    Ok(match name {
        "fig1" => Figure::Proportion("reassign"),
        "fig2" => Figure::Proportion("typical"),
        "fig5" => Figure::Proportion("warmup"),
        "fig7" => Figure::Proportion("union"),
        "fig3" => Figure::Practice("nmi"),
        "fig4" => Figure::Practice("loss_score"),
        other => {
            return Err(CliError::config(format!(
                "unknown figure {other:?}; known: fig1 fig2 fig3 fig4 fig5 fig7"
            )))
        }
    })
}

fn expect_schema(table: &Table, header: &[&str], what: &str) -> CliResult<()> {
    let want: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    if schema_hash(&table.header) != schema_hash(&want) {
        return Err(CliError::config(format!(
            "input is not a {what} table; header is {:?}",
            table.header.join(",")
        )));
    }
    Ok(())
}

fn real(s: &str) -> CliResult<f64> {
    parse_real(s).map_err(|e| CliError::config(e.to_string()))
}

fn proportion(table: &Table, experiment: &str) -> CliResult<Table> {
    expect_schema(table, &PROPORTION_HEADER, "proportion")?;
    let col = |n: &str| table.column(n).map_err(|e| CliError::config(e.to_string()));
    let [exp, variant, d, sigma2, beta, ratio, lo, hi, bound, valid] = [
        "experiment",
        "variant",
        "d",
        "sigma2",
        "beta",
        "ratio",
        "wilson_lo",
        "wilson_hi",
        "theory_bound",
        "bound_valid",
    ]
    .map(col);
    let (exp, variant, d, sigma2, beta) = (exp?, variant?, d?, sigma2?, beta?);
    let (ratio, lo, hi, bound, valid) = (ratio?, lo?, hi?, bound?, valid?);

    let mut out = Table::new(&PROPORTION_TIDY);
    for row in table.rows.iter().filter(|r| r[exp] == experiment) {
        // typical cells are indexed by beta; the others by noise level
        let series = if row[beta].is_empty() {
            format!("sigma2={}", real(&row[sigma2])?)
        } else {
            format!("beta={}", real(&row[beta])?)
        };
        out.push(vec![
            series,
            row[variant].clone(),
            row[d].clone(),
            row[sigma2].clone(),
            row[beta].clone(),
            row[ratio].clone(),
            row[lo].clone(),
            row[hi].clone(),
            row[bound].clone(),
            row[valid].clone(),
        ]);
    }
    if out.is_empty() {
        return Err(CliError::config(format!("no {experiment} rows in input")));
    }
    Ok(out)
}

#[derive(Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

fn practice(table: &Table, metric: &str) -> CliResult<Table> {
    expect_schema(table, &PRACTICE_HEADER, "practice")?;
    let col = |n: &str| table.column(n).map_err(|e| CliError::config(e.to_string()));
    let (d, sigma2, init, algorithm, y) = (col("d")?, col("sigma2")?, col("init")?, col("algorithm")?, col(metric)?);

    // groups in order of first appearance
    let mut order: Vec<[String; 4]> = Vec::new();
    let mut groups: HashMap<[String; 4], Moments> = HashMap::new();
    for row in &table.rows {
        let key = [row[d].clone(), row[sigma2].clone(), row[init].clone(), row[algorithm].clone()];
        let v = real(&row[y])?;
        let m = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            Moments::default()
        });
        m.count += 1;
        m.sum += v;
        m.sum_sq += v * v;
    }

    let mut out = Table::new(&PRACTICE_TIDY);
    for key in order {
        let m = &groups[&key];
        let n = m.count as f64;
        let mean = m.sum / n;
        let var = if m.count > 1 {
            ((m.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let half = 1.96 * (var / n).sqrt();
        let [d, sigma2, init, algorithm] = key;
        out.push(vec![
            format!("{algorithm}/{init}"),
            d,
            sigma2,
            init,
            algorithm,
            m.count.to_string(),
            fmt_real(mean),
            fmt_real(mean - half),
            fmt_real(mean + half),
        ]);
    }
    Ok(out)
}

pub fn cmd_emit_plotdata(input: &Path, figure_name: &str, out: Option<&Path>) -> CliResult<()> {
    let fig = figure(figure_name)?;
    let file = File::open(input).map_err(|e| CliError::config(format!("{}: {e}", input.display())))?;
    let table = Table::read_csv(BufReader::new(file)).map_err(|e| CliError::config(format!("{}: {e}", input.display())))?;
    if table.is_empty() {
        return Err(CliError::config(format!("{}: no data rows", input.display())));
    }
    let tidy = match fig {
        Figure::Proportion(exp) => proportion(&table, exp)?,
        Figure::Practice(metric) => practice(&table, metric)?,
    };
    crate::run::emit(&tidy, out)
}
