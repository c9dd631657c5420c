//! `--config` file support: simple `key=value` lines merged *under* explicit
//! flags (anything given on the command line wins).
//!
//! The file is translated to flags inserted right after the subcommand, and
//! later (explicit) occurrences override earlier ones. `key=true` becomes a
//! bare `--key`; `key=false` for a switch is dropped; `#` starts a comment.

pub fn expand_config_args(raw: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = raw.iter().position(|a| a == "--config") else {
        return Ok(raw);
    };
    let path = raw
        .get(pos + 1)
        .ok_or_else(|| "--config needs a file path".to_string())?
        .clone();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config '{path}': {e}"))?;

    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (line, "true"),
        };
        if key.is_empty() {
            return Err(format!("{path}:{}: empty key", lineno + 1));
        }
        // Switches with value semantics (like join-components) still accept
        // an explicit value; plain booleans become bare flags.
        match (key, value) {
            ("join-components", v) => {
                injected.push(format!("--{key}"));
                injected.push(v.to_string());
            }
            (_, "true") => injected.push(format!("--{key}")),
            (_, "false") => {}
            (_, v) => {
                injected.push(format!("--{key}"));
                injected.push(v.to_string());
            }
        }
    }

    // Insert after the subcommand so explicit flags (which come later on the
    // line) override the config.
    if raw.len() < 2 {
        return Err("--config requires a subcommand".to_string());
    }
    let mut out = raw[..2].to_vec();
    out.extend(injected);
    out.extend(raw[2..].iter().cloned());
    Ok(out)
}
