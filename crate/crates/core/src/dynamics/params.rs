use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Raw `key = value` parameters handed to a rule constructor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.trim()
                    .parse::<T>()
                    .map_err(|_| Error::InvalidParameter(format!("{key} = `{v}`")))
            })
            .transpose()
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse(key)?
            .ok_or_else(|| Error::InvalidParameter(format!("missing `{key}`")))
    }

    /// Comma-separated list; absent or blank yields an empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>> {
        split_list(self.raw(key).unwrap_or(""))
            .map(|item| {
                item.parse::<T>()
                    .map_err(|_| Error::InvalidParameter(format!("{key}: bad item `{item}`")))
            })
            .collect()
    }

    /// Comma-separated `name:value` pairs, in file order.
    pub fn pairs<T: FromStr>(&self, key: &str) -> Result<Vec<(String, T)>> {
        parse_pairs(key, self.raw(key).unwrap_or(""))
    }

    pub fn probability(&self, key: &str, default: f64) -> Result<f64> {
        let p = self.parse_or(key, default)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{key} = {p} not in [0,1]")));
        }
        Ok(p)
    }
}

pub fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

pub fn parse_pairs<T: FromStr>(key: &str, s: &str) -> Result<Vec<(String, T)>> {
    split_list(s)
        .map(|item| {
            let (name, value) = item.rsplit_once(':').ok_or_else(|| {
                Error::InvalidParameter(format!("{key}: expected name:value, got `{item}`"))
            })?;
            let value = value
                .trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidParameter(format!("{key}: bad value in `{item}`")))?;
            Ok((name.trim().to_string(), value))
        })
        .collect()
}
