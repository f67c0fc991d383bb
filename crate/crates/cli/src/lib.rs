//! Library side of the `limit` binary: seed-range parsing, the command
//! implementations and the playground HTTP router.

pub mod commands;
pub mod server;

use anyhow::{bail, Context};

/// Parses `a..b` (inclusive), `a..=b`, a comma list, or a single seed.
pub fn parse_seeds(spec: &str) -> anyhow::Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad seed range start in {spec:?}"))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("bad seed range end in {spec:?}"))?;
        if hi < lo {
            bail!("empty seed range {spec:?}");
        }
        return Ok((lo..=hi).collect());
    }
    let seeds = spec
        .split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad seed {s:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}
