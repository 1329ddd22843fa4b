#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/synthetic")
        .join(name)
}

pub fn eventdur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eventdur"))
        .args(args)
        .env_remove("EVENTDUR_OUT")
        .output()
        .expect("binary runs")
}

pub fn read_csv(path: &Path) -> Vec<HashMap<String, String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            headers
                .iter()
                .zip(r.iter())
                .map(|(h, v)| (h.to_owned(), v.to_owned()))
                .collect()
        })
        .collect()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

pub fn f(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("column {key}: `{}` is not a number", row[key]))
}

pub fn pipeline_args<'a>(out: &'a str, forecasts: &'a str, cases: &'a str, table: &'a str) -> Vec<&'a str> {
    vec![
        "pipeline",
        "--forecasts",
        forecasts,
        "--cases",
        cases,
        "--table",
        table,
        "--out",
        out,
    ]
}
