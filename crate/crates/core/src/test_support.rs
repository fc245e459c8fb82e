//! Exact-arithmetic oracles shared by unit tests.

use num_rational::Ratio;

/// Exact rank by fraction-free elimination over the rationals.
pub fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Ratio<i128>>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| Ratio::from_integer(v as i128)).collect())
        .collect();
    let (nr, nc) = (m.len(), m[0].len());
    let mut rank = 0;
    for col in 0..nc {
        let Some(piv) = (rank..nr).find(|&r| m[r][col] != Ratio::from_integer(0)) else {
            continue;
        };
        m.swap(rank, piv);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] != Ratio::from_integer(0) {
                let f = row[col] / pivot[col];
                for (dst, &p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *dst -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}
