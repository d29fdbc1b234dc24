//! `key = value` config files merged underneath command-line flags.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Parsed `key = value` pairs in file order. `#` starts a comment line.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, found {line:?}", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", n + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

fn flag_value(args: &[OsString], name: &str) -> Option<String> {
    let long = format!("--{name}");
    let eq = format!("--{name}=");
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == long {
            return it.next().map(|v| v.to_string_lossy().into_owned());
        }
        if let Some(v) = s.strip_prefix(&eq) {
            return Some(v.to_string());
        }
    }
    None
}

fn has_flag(args: &[OsString], name: &str) -> bool {
    let long = format!("--{name}");
    let eq = format!("--{name}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&eq)
    })
}

/// Rewrites `argv` so config entries become flags the user did not give.
/// An `experiment` key supplies the subcommand when none is on the line.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = flag_value(&argv, "config") else {
        return Ok(argv);
    };
    let pairs = read_config(Path::new(&path))?;
    let mut args = argv;
    let has_sub = args.get(1).is_some_and(|a| !a.to_string_lossy().starts_with('-'));
    if !has_sub {
        let exp = pairs
            .iter()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| CliError::Config("no subcommand given and the config has no experiment key".into()))?;
        args.insert(1.min(args.len()), exp.into());
    }
    let mut extra = Vec::new();
    for (k, v) in pairs {
        if k == "experiment" || k == "config" || has_flag(&args, &k) {
            continue;
        }
        extra.push(OsString::from(format!("--{k}={v}")));
    }
    let tail = args.split_off(2.min(args.len()));
    args.extend(extra);
    args.extend(tail);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse_config("# run\nseed = 7\n\nmax_index=8\n").unwrap();
        assert_eq!(p, vec![("seed".into(), "7".into()), ("max-index".into(), "8".into())]);
        assert!(parse_config("seed 7").is_err());
        assert!(parse_config(" = 3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "experiment = oracle-check\nn = 6\ncases = 10\n").unwrap();
        let argv = os(&["tsg", "--config", path.to_str().unwrap(), "--n", "5"]);
        let merged: Vec<String> = merge_config(argv).unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(merged[1], "oracle-check");
        assert!(merged.contains(&"--cases=10".to_string()));
        assert!(!merged.iter().any(|a| a == "--n=6"));
        assert!(merged.windows(2).any(|w| w[0] == "--n" && w[1] == "5"));
    }
}
