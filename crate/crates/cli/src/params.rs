//! `key=value,key=value` parameter lists for `gen`.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};

pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("parameter `{pair}` is not of the form key=value"))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                bail!("parameter `{k}` given twice");
            }
        }
        Ok(Params(map))
    }

    /// Takes `key` parsed as `V`, or `default` when absent.
    pub fn take<V: std::str::FromStr>(&mut self, key: &str, default: V) -> Result<V> {
        match self.0.remove(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| anyhow!("bad value `{v}` for parameter `{key}`")),
        }
    }

    /// Fails on keys nobody asked for.
    pub fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            None => Ok(()),
            Some(k) => bail!("unknown parameter `{k}`"),
        }
    }
}
