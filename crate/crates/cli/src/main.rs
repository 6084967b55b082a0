//! `homog`: command-line front end of the homogenization laboratory.
//!
//! Every subcommand reads an optional key-value file given by `--config`; each key can be
//! overridden by the flag of the same name.

mod commands;
mod options;
mod svg;

use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use homog::lab::KeyValues;

use commands::COMMANDS;
use options::Options;

fn cli() -> Command {
    let mut cmd = Command::new("homog")
        .about("Numerical laboratory for periodic homogenization of Hamilton-Jacobi equations")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in COMMANDS {
        let mut sub = Command::new(c.name)
            .about(c.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key-value file; flags take precedence"));
        for k in c.keys {
            let mut arg = Arg::new(k.name).long(k.name).value_name("VALUE").help(k.help);
            if !k.default.is_empty() {
                arg = arg.help(format!("{} [default: {}]", k.help, k.default));
            }
            sub = sub.arg(arg);
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn resolve(c: &commands::Command, m: &ArgMatches) -> homog::Result<Options> {
    let mut kv = match m.get_one::<String>("config") {
        Some(path) => KeyValues::read(path)?,
        None => KeyValues::default(),
    };
    for k in c.keys {
        if let Some(v) = m.get_one::<String>(k.name) {
            kv.set(k.name, v);
        }
    }
    Options::new(kv, c.keys)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let c = COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand");
    match resolve(c, sub).and_then(|o| (c.run)(&o)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("homog {name}: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_table_is_consistent() {
        cli().debug_assert();
        for c in COMMANDS {
            let mut names: Vec<&str> = c.keys.iter().map(|k| k.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), c.keys.len(), "{}", c.name);
        }
    }

    #[test]
    fn rate_keys_match_the_experiment_config() {
        let rate = COMMANDS.iter().find(|c| c.name == "rate").unwrap();
        let names: Vec<&str> = rate.keys.iter().map(|k| k.name).collect();
        assert_eq!(names, homog::lab::ExperimentConfig::KEYS.to_vec());
    }

    #[test]
    fn flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "steps = 4\nP = 1\n").unwrap();
        let m = cli().get_matches_from(["homog", "effh", "--config", path.to_str().unwrap(), "--steps", "6"]);
        let (_, sub) = m.subcommand().unwrap();
        let o = resolve(&COMMANDS[0], sub).unwrap();
        assert_eq!(o.parse::<usize>("steps").unwrap(), 6);
        assert_eq!(o.parse::<f64>("P").unwrap(), 1.0);
        assert_eq!(o.parse::<f64>("T").unwrap(), 50.0);
        assert_eq!(o.get("cells"), None);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "colour = red\n").unwrap();
        let m = cli().get_matches_from(["homog", "effh", "--config", path.to_str().unwrap()]);
        let (_, sub) = m.subcommand().unwrap();
        assert!(resolve(&COMMANDS[0], sub).is_err());
    }
}
