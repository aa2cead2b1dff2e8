//! Flat `key = value` configuration files.
//!
//! Each entry becomes `--key value` (or a bare `--key` for `true`; `false`
//! drops the entry), inserted directly after the subcommand name. A key that
//! is also given on the command line is dropped from the file, so the command
//! line always wins, including for list-valued flags.

use std::fs;

/// Expands `--config FILE` in `argv`.
pub fn inject(argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some((pos, width, path)) = find_config(&argv) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let mut rest: Vec<String> = argv[..pos].to_vec();
    rest.extend_from_slice(&argv[pos + width..]);
    let Some(sub) = rest.iter().skip(1).position(|a| !a.starts_with('-')) else {
        return Err("--config needs a subcommand".to_string());
    };
    let at = sub + 2;
    let given: Vec<&str> = rest[at..].iter().filter_map(|a| flag_name(a)).collect();
    let flags = without_keys(parse(&text)?, &given);
    let mut out = rest[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&rest[at..]);
    Ok(out)
}

fn find_config(argv: &[String]) -> Option<(usize, usize, String)> {
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            return argv.get(i + 1).map(|p| (i, 2, p.clone()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some((i, 1, p.to_string()));
        }
    }
    None
}

fn flag_name(token: &str) -> Option<&str> {
    let name = token.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(k, _)| k))
}

/// Drops `--key [value]` groups whose key is in `keys`.
fn without_keys(tokens: Vec<String>, keys: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skipping = false;
    for t in tokens {
        if let Some(name) = flag_name(&t) {
            skipping = keys.contains(&name);
        }
        if !skipping {
            out.push(t);
        }
    }
    out
}

/// Turns file lines into flag tokens. `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("config line {}: bad key `{key}`", i + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}
