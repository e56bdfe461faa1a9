use rayon::prelude::*;

use super::{Match, MatchError};
use crate::features::BinaryDescriptor;

/// Nearest neighbour in `db` for every descriptor of `da` by Hamming
/// distance; ties go to the smallest train index.
pub fn match_bruteforce(da: &[BinaryDescriptor], db: &[BinaryDescriptor]) -> Result<Vec<Match>, MatchError> {
    let first = da.first().ok_or(MatchError::Empty)?;
    if db.is_empty() {
        return Err(MatchError::Empty);
    }
    let bits = first.len_bits();
    if let Some(d) = da.iter().chain(db).find(|d| d.len_bits() != bits) {
        return Err(MatchError::MixedLengths(bits, d.len_bits()));
    }
    Ok(da
        .par_iter()
        .enumerate()
        .map(|(qi, q)| {
            let mut best = (u32::MAX, 0usize);
            for (ti, t) in db.iter().enumerate() {
                let d = q.hamming(t);
                if d < best.0 {
                    best = (d, ti);
                }
            }
            Match {
                query_idx: qi,
                train_idx: best.1,
                distance: best.0,
            }
        })
        .collect())
}
