//! `kmfix bound`: closed-form bounds over a parameter grid.

use std::collections::BTreeMap;
use std::path::Path;

use kmfix_core::bounds::{self, BoundValue, ClusterSizes};
use kmfix_core::report::{fmt_real, Table};

use crate::{CliError, CliResult};

/// Bound names with their parameters. `sigma` may be given as `sigma2`, and
/// `rho_*` bounds accept an optional `d` for an extra `rho^(d/4)` column.
const BOUNDS: [(&str, &str); 15] = [
    ("chibound", "b1 b2 m d"),
    ("t_max", "b1 b2"),
    ("a_t", "sigma s_t"),
    ("a_c", "sigma tau s_c"),
    ("sigma_threshold", "tau s_c s_t"),
    ("rho_general", "sigma tau s_c s_t [d]"),
    ("rho_equal", "sigma s [d]"),
    ("rho_warmup", "sigma tau [d]"),
    ("sigma_typical", "beta n q"),
    ("rho_typical", "sigma|beta n q [d]"),
    ("d_threshold_sample", "eps rho"),
    ("d_threshold_partition", "eps n rho"),
    ("d_threshold_all", "eps n rho"),
    ("q_threshold", "delta"),
    ("n_threshold", "q"),
];

/// Expands `v1,v2,...` or `lo:hi:count`.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [lo, hi, count] = parts[..] else {
            return Err(format!("range must be lo:hi:count, got {spec:?}"));
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let count: usize = count.trim().parse().map_err(|_| format!("bad count in {spec:?}"))?;
        return match count {
            0 => Err(format!("range {spec:?} has no points")),
            1 => Ok(vec![lo]),
            _ => Ok((0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect()),
        };
    }
    let values = spec.split(',').map(num).collect::<Result<Vec<f64>, String>>()?;
    if values.is_empty() {
        return Err("empty axis".into());
    }
    Ok(values)
}

struct Point<'a>(&'a BTreeMap<String, f64>);

impl Point<'_> {
    fn get(&self, key: &str) -> CliResult<f64> {
        self.0
            .get(key)
            .copied()
            .ok_or_else(|| CliError::config(format!("missing parameter {key:?}")))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    fn count(&self, key: &str) -> CliResult<u64> {
        let v = self.get(key)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(CliError::config(format!("{key} must be a nonnegative integer, got {v}")));
        }
        Ok(v as u64)
    }

    fn sigma(&self) -> CliResult<f64> {
        match (self.0.get("sigma"), self.0.get("sigma2")) {
            (Some(s), _) => Ok(*s),
            (None, Some(s2)) => Ok(s2.sqrt()),
            (None, None) => Err(CliError::config("missing parameter \"sigma\" (or \"sigma2\")")),
        }
    }

    fn sizes(&self) -> CliResult<ClusterSizes> {
        ClusterSizes::new(self.count("s_c")?, self.count("s_t")?).map_err(|e| CliError::config(e.to_string()))
    }
}

/// One evaluated grid point: value, validity, failed conditions and the
/// optional `rho^(d/4)`.
struct Eval {
    value: f64,
    valid: bool,
    failed: String,
    pow: Option<f64>,
}

fn from_bound(b: BoundValue, p: &Point) -> Eval {
    Eval {
        value: b.value,
        valid: b.valid,
        failed: b.report(),
        pow: p.0.get("d").map(|&d| b.pow_quarter_d(d)),
    }
}

fn scalar(value: f64) -> Eval {
    Eval {
        value,
        valid: true,
        failed: String::new(),
        pow: None,
    }
}

fn regime(result: kmfix_core::Result<f64>) -> Eval {
    match result {
        Ok(v) => scalar(v),
        Err(e) => Eval {
            value: f64::NAN,
            valid: false,
            failed: e.to_string(),
            pow: None,
        },
    }
}

fn evaluate(name: &str, p: &Point) -> CliResult<Eval> {
    let domain = |e: kmfix_core::Error| CliError::config(e.to_string());
    Ok(match name {
        "chibound" => match bounds::lemma_chibound(p.get("b1")?, p.get("b2")?, p.get("m")?, p.count("d")?) {
            Ok(b) => from_bound(b, p),
            Err(e) => regime(Err(e)),
        },
        "t_max" => regime(bounds::t_max(p.get("b1")?, p.get("b2")?)),
        "a_t" => scalar(bounds::a_t(p.sigma()?, p.count("s_t")?.max(1))),
        "a_c" => scalar(bounds::a_c(p.sigma()?, p.get_or("tau", 1.0), p.count("s_c")?.max(1))),
        "sigma_threshold" => scalar(bounds::sigma_threshold(p.get_or("tau", 1.0), p.sizes()?)),
        "rho_general" => from_bound(bounds::rho_general(p.sigma()?, p.get_or("tau", 1.0), p.sizes()?), p),
        "rho_equal" => from_bound(bounds::rho_equal(p.sigma()?, p.count("s")?), p),
        "rho_warmup" => from_bound(bounds::rho_warmup(p.sigma()?, p.get_or("tau", 1.0)), p),
        "sigma_typical" => regime(bounds::sigma_typical(p.get("beta")?, p.count("n")?, p.get_or("q", 2.0))),
        "rho_typical" => {
            let (n, q) = (p.count("n")?, p.get_or("q", 2.0));
            let sigma = match p.0.get("beta") {
                Some(&beta) => match bounds::sigma_typical(beta, n, q) {
                    Ok(s) => s,
                    Err(e) => return Ok(regime(Err(e))),
                },
                None => p.sigma()?,
            };
            from_bound(bounds::rho_typical(sigma, n, q), p)
        }
        "d_threshold_sample" | "d_threshold_partition" | "d_threshold_all" => {
            let eps = p.get("eps")?;
            let rho = BoundValue::from_value(p.get("rho")?);
            let r = match name {
                "d_threshold_sample" => bounds::d_threshold_sample(eps, &rho),
                "d_threshold_partition" => bounds::d_threshold_partition(eps, p.count("n")?, &rho),
                _ => bounds::d_threshold_all(eps, p.count("n")?, &rho),
            };
            match r {
                Ok(d) => scalar(d as f64),
                Err(kmfix_core::Error::Domain(m)) => return Err(CliError::config(m)),
                Err(e) => regime(Err(e)),
            }
        }
        "q_threshold" => scalar(bounds::q_threshold(p.get("delta")?).map_err(domain)?),
        "n_threshold" => scalar(bounds::n_threshold(p.get("q")?)),
        _ => unreachable!("names are checked before evaluation"),
    })
}

fn list() -> Table {
    let mut t = Table::new(&["bound", "parameters"]);
    for (name, params) in BOUNDS {
        t.push(vec![name.to_string(), params.to_string()]);
    }
    t
}

pub fn cmd_bound(name: &str, params: &[(String, String)], out: Option<&Path>) -> CliResult<()> {
    if name == "list" {
        return crate::run::emit(&list(), out);
    }
    if !BOUNDS.iter().any(|(n, _)| *n == name) {
        let known: Vec<&str> = BOUNDS.iter().map(|(n, _)| *n).collect();
        return Err(CliError::config(format!("unknown bound {name:?}; known: {}", known.join(", "))));
    }
    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    for (key, spec) in params {
        if axes.iter().any(|(k, _)| k == key) {
            return Err(CliError::config(format!("parameter {key:?} given twice")));
        }
        let values = parse_axis(spec).map_err(|e| CliError::config(format!("{key}: {e}")))?;
        axes.push((key.clone(), values));
    }

    // cartesian product, first axis slowest
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for (_, values) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }

    let with_pow = name.starts_with("rho_") && axes.iter().any(|(k, _)| k == "d");
    let mut header: Vec<&str> = axes.iter().map(|(k, _)| k.as_str()).collect();
    header.push("value");
    if with_pow {
        header.push("rho_pow_d4");
    }
    header.extend(["valid", "failed"]);
    let mut table = Table::new(&header);
    for values in points {
        let map: BTreeMap<String, f64> = axes.iter().map(|(k, _)| k.clone()).zip(values.iter().copied()).collect();
        let e = evaluate(name, &Point(&map))?;
        let mut row: Vec<String> = values.iter().map(|v| fmt_real(*v)).collect();
        row.push(fmt_real(e.value));
        if with_pow {
            row.push(e.pow.map(fmt_real).unwrap_or_default());
        }
        row.push(e.valid.to_string());
        row.push(e.failed);
        table.push(row);
    }
    crate::run::emit(&table, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes() {
        assert_eq!(parse_axis("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_axis("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_axis("4:9:1").unwrap(), vec![4.0]);
        assert!(parse_axis("0:1").is_err());
        assert!(parse_axis("0:1:0").is_err());
        assert!(parse_axis("x").is_err());
    }
}
