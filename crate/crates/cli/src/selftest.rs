//! Golden cases live in `cases.json` inside the golden directory:
//!
//! ```json
//! [{"name": "unique kernel", "args": ["solve", "unique_kernel.json"],
//!   "exit": 0, "expect": {"kernel": [["1/3", "2/3"], ["1/3", "2/3"]]}}]
//! ```
//!
//! Arguments naming a file in the directory are resolved against it. `expect`
//! must be contained in the output: objects by key, arrays elementwise.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::{EXIT_FAILED, EXIT_INPUT, EXIT_OK};

pub const BUNDLED_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/golden");

#[derive(Debug)]
struct Case {
    name: String,
    args: Vec<String>,
    exit: i32,
    expect: Value,
}

fn parse_cases(text: &str) -> Result<Vec<Case>, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("cases.json is not JSON: {e}"))?;
    let list = v.as_array().ok_or("cases.json must be an array")?;
    list.iter()
        .enumerate()
        .map(|(i, c)| {
            let name = c.get("name").and_then(Value::as_str).map_or_else(|| format!("case {i}"), str::to_owned);
            let args = c
                .get("args")
                .and_then(Value::as_array)
                .and_then(|a| a.iter().map(|s| s.as_str().map(str::to_owned)).collect::<Option<Vec<_>>>())
                .ok_or_else(|| format!("{name}: args must be an array of strings"))?;
            let exit = c.get("exit").and_then(Value::as_i64).unwrap_or(0) as i32;
            let expect = c.get("expect").cloned().unwrap_or(Value::Null);
            Ok(Case { name, args, exit, expect })
        })
        .collect()
}

/// `Ok` when every part of `expected` appears in `actual`; otherwise the path
/// of the first difference.
fn contained(expected: &Value, actual: &Value, path: &str) -> Result<(), String> {
    match (expected, actual) {
        (Value::Null, _) => Ok(()),
        (Value::Object(e), Value::Object(a)) => e.iter().try_for_each(|(k, v)| {
            let child = format!("{path}.{k}");
            match a.get(k) {
                Some(av) => contained(v, av, &child),
                None => Err(format!("{child} missing")),
            }
        }),
        (Value::Array(e), Value::Array(a)) if e.len() == a.len() => e
            .iter()
            .zip(a)
            .enumerate()
            .try_for_each(|(i, (ev, av))| contained(ev, av, &format!("{path}[{i}]"))),
        _ if expected == actual => Ok(()),
        _ => Err(format!("{path}: expected {expected}, found {actual}")),
    }
}

fn run_case(case: &Case, dir: &Path) -> Result<(), String> {
    let args: Vec<String> = std::iter::once("sot".to_owned())
        .chain(case.args.iter().map(|a| {
            let candidate = dir.join(a);
            if !a.starts_with('-') && candidate.is_file() {
                candidate.to_string_lossy().into_owned()
            } else {
                a.clone()
            }
        }))
        .collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = crate::run_with_env(&args, None, &mut out, &mut err);
    if code != case.exit {
        let err = String::from_utf8_lossy(&err);
        return Err(format!("exit {code}, expected {}: {}", case.exit, err.trim()));
    }
    if case.expect.is_null() {
        return Ok(());
    }
    let actual: Value = serde_json::from_slice(&out).map_err(|e| format!("output is not JSON: {e}"))?;
    contained(&case.expect, &actual, "$")
}

pub(crate) fn run(dir: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let dir: PathBuf = dir.map_or_else(|| PathBuf::from(BUNDLED_DIR), Path::to_path_buf);
    let cases_path = dir.join("cases.json");
    let text = match std::fs::read_to_string(&cases_path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot read {}: {e}", cases_path.display());
            return EXIT_INPUT;
        }
    };
    let cases = match parse_cases(&text) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(stdout, "FAIL  {}: {msg}", cases_path.display());
            return EXIT_FAILED;
        }
    };
    let width = cases.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for case in &cases {
        match run_case(case, &dir) {
            Ok(()) => {
                let _ = writeln!(stdout, "PASS  {}", case.name);
            }
            Err(why) => {
                failed += 1;
                let _ = writeln!(stdout, "FAIL  {:width$}  {why}", case.name);
            }
        }
    }
    let _ = writeln!(stdout, "{} passed, {failed} failed", cases.len() - failed);
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
