use super::WeightVector;
use crate::error::{Result, TuneError};
use crate::pareto::{normalize, HasObjectives, ParetoSet};

/// Index of the weighted-Utopia-nearest entry of `front`.
///
/// The front is min-max normalized so the Utopia point is the origin; the
/// distance is `sqrt(Σ (w_i · p'_i)²)`. Ties go to the entry with the lowest
/// first objective (the earlier entry in canonical order).
pub fn wun_index<T: HasObjectives>(front: &ParetoSet<T>, weights: &WeightVector) -> Result<usize> {
    if front.is_empty() {
        return Err(TuneError::EmptyParetoSet);
    }
    let k = front.entries()[0].objectives().k();
    if weights.k() != k {
        return Err(TuneError::contract(format!("{}-d weight for {k} objectives", weights.k())));
    }
    let norm = normalize(front);
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in norm.iter().enumerate() {
        let d = p
            .values()
            .iter()
            .zip(weights.values())
            .map(|(v, w)| (w * v) * (w * v))
            .sum::<f64>()
            .sqrt();
        let better = match best {
            None => true,
            Some((bi, bd)) => {
                d < bd || (d == bd && front.entries()[i].objectives().canonical_cmp(front.entries()[bi].objectives()).is_lt())
            }
        };
        if better {
            best = Some((i, d));
        }
    }
    Ok(best.expect("nonempty front").0)
}

/// The weighted-Utopia-nearest entry of `front`.
pub fn wun_recommend<'a, T: HasObjectives>(front: &'a ParetoSet<T>, weights: &WeightVector) -> Result<&'a T> {
    wun_index(front, weights).map(|i| &front.entries()[i])
}
