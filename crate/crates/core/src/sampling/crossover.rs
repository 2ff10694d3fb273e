use std::collections::HashSet;

use crate::error::{Result, TuneError};
use crate::space::ConfigVector;

/// Cartesian-product crossover of context candidates.
///
/// Each candidate is split at `location` into a prefix `[0, location)` and a
/// suffix `[location, d)`. The output holds every distinct prefix combined with
/// every distinct suffix, prefix-major in first-appearance order, so it always
/// contains the input candidates.
pub fn crossover_enrich(candidates: &[ConfigVector], location: usize) -> Result<Vec<ConfigVector>> {
    let Some(first) = candidates.first() else {
        return Ok(Vec::new());
    };
    let d = first.coords.len();
    if location == 0 || location >= d {
        return Err(TuneError::contract(format!("crossover location {location} outside 1..{d}")));
    }
    if candidates.iter().any(|c| c.coords.len() != d || c.group != first.group) {
        return Err(TuneError::contract("crossover candidates must share one space"));
    }

    let distinct = |range: std::ops::Range<usize>| {
        let mut seen = HashSet::new();
        let mut parts: Vec<&[f64]> = Vec::new();
        for c in candidates {
            let part = &c.coords[range.clone()];
            let key: Vec<u64> = part.iter().map(|v| v.to_bits()).collect();
            if seen.insert(key) {
                parts.push(part);
            }
        }
        parts
    };
    let prefixes = distinct(0..location);
    let suffixes = distinct(location..d);

    let mut out = Vec::with_capacity(prefixes.len() * suffixes.len());
    for p in &prefixes {
        for s in &suffixes {
            let mut coords = p.to_vec();
            coords.extend_from_slice(s);
            out.push(ConfigVector::new(first.group, coords));
        }
    }
    Ok(out)
}
