//! Generates self-contained matplotlib scripts that redraw a CSV produced by the
//! harness. The script is written only after the CSV passes a schema check.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Gaussian example: bound and its three branches.
    Fig4,
    /// Rate curves of built-in case 1.
    Fig5,
    /// Rate curves of built-in case 2.
    Fig6,
    /// Rate curves of built-in case 3.
    Fig7,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig4" | "4" => Ok(Figure::Fig4),
            "fig5" | "5" => Ok(Figure::Fig5),
            "fig6" | "6" => Ok(Figure::Fig6),
            "fig7" | "7" => Ok(Figure::Fig7),
            other => Err(Error::config("figure", format!("unknown figure `{other}`"))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        })
    }
}

struct Curve {
    column: String,
    label: String,
    style: &'static str,
}

fn read_header(csv: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(csv)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{} is empty", csv.display())))?;
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if line.split(',').count() != cols.len() {
            return Err(Error::Schema(format!(
                "row {} has the wrong number of fields",
                i + 1
            )));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Schema(format!("{} has no data rows", csv.display())));
    }
    if !cols.iter().any(|c| c == "snr_db") {
        return Err(Error::Schema("missing column `snr_db`".into()));
    }
    Ok(cols)
}

fn rate_label(col: &str) -> String {
    let rate = |tag: &str| tag.replacen('_', "/", 1);
    if col == "sud" {
        "SUD".into()
    } else if col == "s2" {
        "Scenario 2".into()
    } else if let Some(t) = col.strip_prefix("mud_") {
        format!("MUD×2, R2 = {}", rate(t))
    } else if let Some(t) = col.strip_prefix("gauss_") {
        format!("Gaussian, R2 = {}", rate(t))
    } else {
        col.into()
    }
}

fn curves_for(figure: Figure, cols: &[String]) -> Result<Vec<Curve>> {
    let has = |c: &str| cols.iter().any(|x| x == c);
    match figure {
        Figure::Fig4 => {
            for c in ["r1_bound", "regime"] {
                if !has(c) {
                    return Err(Error::Schema(format!("missing column `{c}`")));
                }
            }
            let mut v = vec![Curve {
                column: "r1_bound".into(),
                label: "bound on R1".into(),
                style: "r-",
            }];
            for (c, label) in [
                ("c_full", "C(P/N)"),
                ("c_sumrate", "sum-rate branch"),
                ("c_interference", "interference as noise"),
            ] {
                if has(c) {
                    v.push(Curve {
                        column: c.into(),
                        label: label.into(),
                        style: "--",
                    });
                }
            }
            if has("mc_bound") {
                v.push(Curve {
                    column: "mc_bound".into(),
                    label: "Monte Carlo".into(),
                    style: "kx",
                });
            }
            Ok(v)
        }
        _ => {
            let v: Vec<Curve> = cols
                .iter()
                .filter(|c| {
                    let c = c.as_str();
                    (c == "sud" || c == "s2" || c.starts_with("mud_") || c.starts_with("gauss_"))
                        && !c.ends_with("_se")
                })
                .map(|c| Curve {
                    column: c.clone(),
                    label: rate_label(c),
                    style: if c.starts_with("gauss_") { "--" } else { "-" },
                })
                .collect();
            if v.is_empty() {
                return Err(Error::Schema(
                    "no rate columns (sud, mud_*, s2, gauss_*)".into(),
                ));
            }
            Ok(v)
        }
    }
}

fn py_str(s: &str) -> String {
    format!("{:?}", s)
}

/// Writes a Python script to `out` that plots `csv` as `figure` and saves `<out>.png`.
pub fn emit_plot_script(csv: &Path, figure: Figure, out: &Path) -> Result<()> {
    let cols = read_header(csv)?;
    let curves = curves_for(figure, &cols)?;
    let title = match figure {
        Figure::Fig4 => "Gaussian inputs",
        Figure::Fig5 => "Case 1",
        Figure::Fig6 => "Case 2",
        Figure::Fig7 => "Case 3",
    };
    let png = out.with_extension("png");
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("import csv\n\nimport matplotlib\n\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!(
        "CSV = {}\nPNG = {}\n",
        py_str(&csv.display().to_string()),
        py_str(&png.display().to_string())
    ));
    s.push_str("CURVES = [\n");
    for c in &curves {
        s.push_str(&format!(
            "    ({}, {}, {}),\n",
            py_str(&c.column),
            py_str(&c.label),
            py_str(c.style)
        ));
    }
    s.push_str("]\n\n");
    s.push_str("with open(CSV, newline=\"\") as f:\n    rows = list(csv.DictReader(f))\n");
    s.push_str("x = [float(r[\"snr_db\"]) for r in rows]\n");
    s.push_str("fig, ax = plt.subplots(figsize=(7, 4.5))\n");
    s.push_str("for col, label, style in CURVES:\n");
    s.push_str("    ax.plot(x, [float(r[col]) for r in rows], style, label=label)\n");
    s.push_str("ax.set_xlabel(\"P/N [dB]\")\n");
    s.push_str("ax.set_ylabel(\"rate [bit/symbol]\")\n");
    s.push_str(&format!("ax.set_title({})\n", py_str(title)));
    s.push_str(
        "ax.grid(True, alpha=0.3)\nax.legend()\nfig.tight_layout()\nfig.savefig(PNG, dpi=150)\n",
    );
    fs::write(out, s)?;
    Ok(())
}
