//! Reference child process for the external-predictor wire protocol.
//!
//! Serves two purposes: a working example of the protocol for anyone wiring
//! their own model behind `vivi`, and a family of analytically known
//! predictors for the test suites.
//!
//! Usage: `vivi-oracle <function>` where `<function>` is one of
//!
//! - `const:<v>`            constant prediction v
//! - `rowindex`             prediction = 0-based row index within the batch
//! - `lin:<c1,c2,...>`      sum of ci * xi (missing coefficients are 0)
//! - `prod:<i,j>`           xi * xj, 0-based column positions
//! - `classes:<a,b,..>:const:<p1,p2,..>`  classification, fixed probabilities
//!
//! The child reads `PREDICT <m>` followed by m CSV rows on stdin and writes
//! one reply line per row. Values are parsed as plain floats; this reference
//! implementation does not handle quoted CSV fields.

use std::io::{BufRead, Write};

enum Func {
    Const(f64),
    RowIndex,
    Linear(Vec<f64>),
    Product(usize, usize),
    ClassConst { probs: Vec<f64> },
}

fn parse_func(spec: &str) -> Result<(Func, Option<Vec<String>>), String> {
    if spec == "rowindex" {
        return Ok((Func::RowIndex, None));
    }
    if let Some(rest) = spec.strip_prefix("const:") {
        let v: f64 = rest.parse().map_err(|_| format!("bad constant '{rest}'"))?;
        return Ok((Func::Const(v), None));
    }
    if let Some(rest) = spec.strip_prefix("lin:") {
        let coefs = rest
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|_| format!("bad coefficient '{s}'")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok((Func::Linear(coefs), None));
    }
    if let Some(rest) = spec.strip_prefix("prod:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err("prod needs exactly two column positions".into());
        }
        let i = parts[0].parse().map_err(|_| "bad column position".to_string())?;
        let j = parts[1].parse().map_err(|_| "bad column position".to_string())?;
        return Ok((Func::Product(i, j), None));
    }
    if let Some(rest) = spec.strip_prefix("classes:") {
        let (labels, func) = rest
            .split_once(':')
            .ok_or_else(|| "classes:<labels>:<function> expected".to_string())?;
        let classes: Vec<String> = labels.split(',').map(str::to_string).collect();
        let probs_spec = func
            .strip_prefix("const:")
            .ok_or_else(|| "only const:<p1,p2,..> is supported for classes".to_string())?;
        let probs = probs_spec
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|_| format!("bad probability '{s}'")))
            .collect::<Result<Vec<_>, _>>()?;
        if probs.len() != classes.len() {
            return Err("probability count must match class count".into());
        }
        return Ok((Func::ClassConst { probs }, Some(classes)));
    }
    Err(format!("unknown function '{spec}'"))
}

fn run() -> Result<(), String> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 1 {
        return Err("usage: vivi-oracle <function>".into());
    }
    let (func, classes) = parse_func(&args[0])?;

    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    if let Some(classes) = &classes {
        writeln!(out, "CLASSES {}", classes.join(",")).map_err(|e| e.to_string())?;
        out.flush().map_err(|e| e.to_string())?;
    }

    while let Some(line) = lines.next() {
        let line = line.map_err(|e| e.to_string())?;
        let m: usize = line
            .strip_prefix("PREDICT ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| format!("expected 'PREDICT <m>', got '{line}'"))?;
        for row in 0..m {
            let record = lines
                .next()
                .ok_or_else(|| "input ended mid-batch".to_string())?
                .map_err(|e| e.to_string())?;
            let fields: Vec<f64> = record
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad cell '{s}'")))
                .collect::<Result<Vec<_>, _>>()?;
            match &func {
                Func::Const(v) => writeln!(out, "{v}").map_err(|e| e.to_string())?,
                Func::RowIndex => writeln!(out, "{row}").map_err(|e| e.to_string())?,
                Func::Linear(coefs) => {
                    let y: f64 =
                        coefs.iter().zip(&fields).map(|(c, x)| c * x).sum();
                    writeln!(out, "{y}").map_err(|e| e.to_string())?;
                }
                Func::Product(i, j) => {
                    let y = fields
                        .get(*i)
                        .and_then(|a| fields.get(*j).map(|b| a * b))
                        .ok_or_else(|| "column position out of range".to_string())?;
                    writeln!(out, "{y}").map_err(|e| e.to_string())?;
                }
                Func::ClassConst { probs } => {
                    let text: Vec<String> = probs.iter().map(|p| format!("{p}")).collect();
                    writeln!(out, "{}", text.join(",")).map_err(|e| e.to_string())?;
                }
            }
        }
        out.flush().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() {
    if let Err(msg) = run() {
        eprintln!("vivi-oracle: {msg}");
        std::process::exit(1);
    }
}
