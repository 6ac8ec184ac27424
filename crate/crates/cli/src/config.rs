//! `--config <path>` files: `key=value` lines turned into `--key value` flags.

use std::path::Path;

const SUBCOMMANDS: [&str; 4] = ["sweep", "solve", "mode", "disc-check"];

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(format!("config line {}: invalid key {k:?}", i + 1));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Path given by `--config <path>` or `--config=<path>`, if any.
fn config_path(args: &[String]) -> Option<&str> {
    args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).map(String::as_str)
        } else {
            a.strip_prefix("--config=")
        }
    })
}

/// Insert flags from the config file right after the subcommand so that
/// explicit flags, which come later, override them.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(path)).map_err(|e| format!("reading config {path}: {e}"))?;
    let pairs = parse(&text)?;
    let Some(at) = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    for (k, v) in pairs {
        out.push(format!("--{k}"));
        out.push(v);
    }
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}
