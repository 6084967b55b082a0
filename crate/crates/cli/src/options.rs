use std::str::FromStr;

use homog::lab::{parse_eps_ladder, KeyValues};
use homog::{Error, Result};

/// A configurable key: name, default (empty for none) and help text.
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

/// Resolved settings of one subcommand: flags over the config file over defaults.
pub struct Options {
    kv: KeyValues,
    keys: &'static [Key],
}

impl Options {
    pub fn new(kv: KeyValues, keys: &'static [Key]) -> Result<Self> {
        if let Some(k) = kv.keys().find(|k| !keys.iter().any(|d| d.name == *k)) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        Ok(Self { kv, keys })
    }

    pub fn kv(&self) -> &KeyValues {
        &self.kv
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        let v = self.kv.get(name).or_else(|| self.keys.iter().find(|k| k.name == name).map(|k| k.default))?;
        Some(v).filter(|v| !v.is_empty())
    }

    pub fn str(&self, name: &str) -> Result<&str> {
        self.get(name).ok_or_else(|| Error::Parse(format!("missing value for `{name}`")))
    }

    pub fn parse<V: FromStr>(&self, name: &str) -> Result<V> {
        let s = self.str(name)?;
        s.parse().map_err(|_| Error::Parse(format!("bad value `{s}` for `{name}`")))
    }

    pub fn opt<V: FromStr>(&self, name: &str) -> Result<Option<V>> {
        self.get(name).map(|_| self.parse(name)).transpose()
    }

    pub fn list<V: FromStr>(&self, name: &str) -> Result<Vec<V>> {
        split_list(self.str(name)?, name)
    }

    /// Semicolon-separated vectors, for example `0.25,0; 0.5,0.25`.
    pub fn vectors<V: FromStr>(&self, name: &str) -> Result<Vec<Vec<V>>> {
        self.str(name)?.split(';').map(|v| split_list(v, name)).collect()
    }

    /// Single `1/k` value.
    pub fn eps_recip(&self, name: &str) -> Result<u32> {
        match parse_eps_ladder(self.str(name)?)?.as_slice() {
            [k] => Ok(*k),
            _ => Err(Error::Parse(format!("`{name}` takes a single epsilon"))),
        }
    }
}

fn split_list<V: FromStr>(s: &str, name: &str) -> Result<Vec<V>> {
    s.split(',')
        .map(|c| c.trim().parse().map_err(|_| Error::Parse(format!("bad entry `{}` in `{name}`", c.trim()))))
        .collect()
}
