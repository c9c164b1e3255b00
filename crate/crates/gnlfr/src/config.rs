//! `key = value` scenario files and the MPE report CSV.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use gnlfr_core::simgen::{Method, ModelId, MpeReport, ScenarioSpec};

use crate::error::{AppError, AppResult};

const KEYS: [&str; 10] = [
    "model_id",
    "n",
    "m",
    "p",
    "r",
    "seed",
    "replicates",
    "mc_directions",
    "grid_size",
    "method",
];

/// Parses a scenario file. `model_id` is required; every other key falls back
/// to the model's defaults. Blank lines and `#` comments are ignored.
pub fn parse_spec(text: &str, path: &Path) -> AppResult<ScenarioSpec> {
    let mut pairs: Vec<(u64, &str, &str)> = Vec::new();
    let mut seen = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = (k + 1) as u64;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| AppError::parse(path, line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(AppError::parse(path, line, format!("unknown key '{key}'")));
        }
        if !seen.insert(key) {
            return Err(AppError::parse(path, line, format!("duplicate key '{key}'")));
        }
        pairs.push((line, key, value));
    }
    let &(line, _, model) = pairs
        .iter()
        .find(|(_, k, _)| *k == "model_id")
        .ok_or_else(|| AppError::parse(path, 1, "missing required key 'model_id'"))?;
    let model: ModelId = model.parse().map_err(|e: gnlfr_core::Error| AppError::parse(path, line, e.to_string()))?;
    let mut spec = ScenarioSpec::new(model);
    for (line, key, value) in pairs {
        let bad = |e: String| AppError::parse(path, line, format!("{key}: {e}"));
        let int = || value.parse::<usize>().map_err(|e| bad(e.to_string()));
        match key {
            "model_id" => {}
            "n" => spec.n = int()?,
            "m" => spec.m = int()?,
            "p" => spec.p = int()?,
            "r" => spec.r = int()?,
            "seed" => spec.seed = value.parse::<u64>().map_err(|e| bad(e.to_string()))?,
            "replicates" => spec.replicates = int()?,
            "mc_directions" => spec.mc_directions = int()?,
            "grid_size" => spec.grid_size = int()?,
            "method" => spec.method = value.parse::<Method>().map_err(|e| bad(e.to_string()))?,
            _ => unreachable!("key list checked above"),
        }
    }
    spec.validate().map_err(|e| AppError::parse(path, 0, e.to_string()))?;
    Ok(spec)
}

pub fn format_spec(spec: &ScenarioSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model_id = {}", spec.model_id);
    let _ = writeln!(s, "n = {}", spec.n);
    let _ = writeln!(s, "m = {}", spec.m);
    let _ = writeln!(s, "p = {}", spec.p);
    let _ = writeln!(s, "r = {}", spec.r);
    let _ = writeln!(s, "seed = {}", spec.seed);
    let _ = writeln!(s, "replicates = {}", spec.replicates);
    let _ = writeln!(s, "mc_directions = {}", spec.mc_directions);
    let _ = writeln!(s, "grid_size = {}", spec.grid_size);
    let _ = writeln!(s, "method = {}", spec.method.name());
    s
}

/// `replicate,error` rows followed by `summary,<mean>,<stderr>`.
pub fn write_report<W: Write>(out: W, report: &MpeReport) -> AppResult<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record(["replicate", "error"])?;
    for (b, e) in report.errors.iter().enumerate() {
        w.write_record([b.to_string(), e.to_string()])?;
    }
    w.write_record(["summary".to_string(), report.mean.to_string(), report.stderr.to_string()])?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        let mut spec = ScenarioSpec::new(ModelId::III2);
        spec.n = 60;
        spec.seed = 99;
        spec.method = Method::Gnlfr;
        let text = format_spec(&spec);
        assert_eq!(parse_spec(&text, Path::new("s.conf")).unwrap(), spec);
    }

    #[test]
    fn defaults_and_comments() {
        let spec = parse_spec("# Table 1 cell\nmodel_id = I1  # first model\nn=400\n\n", Path::new("s")).unwrap();
        let mut expected = ScenarioSpec::new(ModelId::I1);
        expected.n = 400;
        assert_eq!(spec, expected);
    }

    #[test]
    fn bad_lines_are_reported() {
        let p = Path::new("s.conf");
        let e = parse_spec("model_id = I1\nbandwidth = 3\n", p).unwrap_err().to_string();
        assert!(e.contains(":2:") && e.contains("bandwidth"), "{e}");
        let e = parse_spec("n = 10\n", p).unwrap_err().to_string();
        assert!(e.contains("model_id"), "{e}");
        let e = parse_spec("model_id = I1\nn = ten\n", p).unwrap_err().to_string();
        assert!(e.contains(":2:"), "{e}");
        let e = parse_spec("model_id = I1\nn = 7\n", p).unwrap_err().to_string();
        assert!(e.contains("even"), "{e}");
        assert!(parse_spec("model_id = I1\nn = 10\nn = 12\n", p).is_err());
    }

    #[test]
    fn report_layout() {
        let report = MpeReport::from_errors(vec![0.5, 1.5]).unwrap();
        let mut buf = Vec::new();
        write_report(&mut buf, &report).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "replicate,error");
        assert_eq!(lines[1], "0,0.5");
        assert_eq!(lines[3], "summary,1,0.5");
    }
}
