//! `--config` files: one `key = value` per line, keys named like the long
//! flags (`grad-tol = 1e-8`; underscores are accepted too). `#` starts a
//! comment. Boolean flags take `true` or `false`; `solver` may list several
//! methods separated by commas.

use std::path::Path;

use clap::Parser;

use super::{Flags, Usage};

#[derive(Parser)]
#[command(no_binary_name = true, disable_help_flag = true)]
struct ConfigFile {
    #[command(flatten)]
    flags: Flags,
}

const SWITCHES: [&str; 2] = ["bias", "deterministic"];

pub(super) fn read_config(path: &Path) -> Result<Flags, Usage> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Usage(format!("cannot read --config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|Usage(m)| Usage(format!("in --config {}: {m}", path.display())))
}

pub(super) fn parse_config(text: &str) -> Result<Flags, Usage> {
    let mut argv = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Usage(format!(
                "line {}: expected `key = value`, found {line:?}",
                k + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            return Err(Usage(format!(
                "line {}: config files cannot include others",
                k + 1
            )));
        }
        if SWITCHES.contains(&key.as_str()) {
            match value {
                "true" => argv.push(format!("--{key}")),
                "false" => {}
                _ => {
                    return Err(Usage(format!(
                        "line {}: {key} must be true or false, found {value:?}",
                        k + 1
                    )))
                }
            }
        } else if key == "solver" {
            for m in value.split(',') {
                argv.push("--solver".into());
                argv.push(m.trim().into());
            }
        } else {
            argv.push(format!("--{key}"));
            argv.push(value.into());
        }
    }
    ConfigFile::try_parse_from(argv)
        .map(|c| c.flags)
        .map_err(|e| Usage(first_line(&e.to_string())))
}

fn first_line(s: &str) -> String {
    s.lines()
        .next()
        .unwrap_or("")
        .trim_start_matches("error: ")
        .to_string()
}
