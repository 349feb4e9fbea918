//! Small dense linear algebra over a coefficient field.

use crate::scalar::Scalar;

/// Reduced row echelon form of the row space of `rows`.
///
/// Returns the nonzero reduced rows and their pivot columns. In float mode
/// the pivot of largest magnitude is chosen and entries at or below the
/// field tolerance count as zero.
pub fn rref<C: Scalar>(rows: &[Vec<C>]) -> (Vec<Vec<C>>, Vec<usize>) {
    let mut m: Vec<Vec<C>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|c| c.magnitude()))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let negligible = |c: &C| {
        if C::EXACT {
            c.is_zero()
        } else {
            c.magnitude() <= 1e-10 * scale
        }
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == m.len() {
            break;
        }
        let mut best = None;
        let mut best_mag = 0.0;
        for (i, row) in m.iter().enumerate().skip(r) {
            if negligible(&row[col]) {
                continue;
            }
            let mag = row[col].magnitude();
            if best.is_none() || (!C::EXACT && mag > best_mag) {
                best = Some(i);
                best_mag = mag;
            }
            if C::EXACT {
                break;
            }
        }
        let Some(pi) = best else { continue };
        m.swap(r, pi);
        let inv = C::one() / m[r][col].clone();
        for c in m[r].iter_mut() {
            *c = c.clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i == r || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for c in 0..ncols {
                let v = m[i][c].clone() - f.clone() * m[r][c].clone();
                m[i][c] = if negligible(&v) { C::zero() } else { v };
            }
        }
        pivots.push(col);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank<C: Scalar>(rows: &[Vec<C>]) -> usize {
    rref(rows).1.len()
}

/// Coordinates of `v` in the span of an echelon basis, or `None` if `v` is
/// not in the span.
pub fn coords_in_rref<C: Scalar>(basis: &[Vec<C>], pivots: &[usize], v: &[C]) -> Option<Vec<C>> {
    let coords: Vec<C> = pivots.iter().map(|&p| v[p].clone()).collect();
    for (j, x) in v.iter().enumerate() {
        let mut r = x.clone();
        for (b, c) in basis.iter().zip(&coords) {
            r = r - c.clone() * b[j].clone();
        }
        let bad = if C::EXACT { !r.is_zero() } else { r.magnitude() > 1e-9 * (1.0 + x.magnitude()) };
        if bad {
            return None;
        }
    }
    Some(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSqrt5;

    fn q(v: i64) -> QSqrt5 {
        QSqrt5::integer(v)
    }

    #[test]
    fn rref_of_dependent_rows() {
        let rows = vec![vec![q(2), q(4), q(0)], vec![q(1), q(2), q(0)], vec![q(0), q(0), q(3)]];
        let (r, piv) = rref(&rows);
        assert_eq!(piv, vec![0, 2]);
        assert_eq!(r[0], vec![q(1), q(2), q(0)]);
        assert_eq!(r[1], vec![q(0), q(0), q(1)]);
    }

    #[test]
    fn float_rank_ignores_roundoff() {
        let rows = vec![vec![1.0, 0.1 + 0.2], vec![3.0, 0.9000000000000001]];
        assert_eq!(rank(&rows), 1);
    }

    #[test]
    fn coordinates_in_span() {
        let rows = vec![vec![q(1), q(0), q(2)], vec![q(0), q(1), q(1)]];
        let (b, p) = rref(&rows);
        assert_eq!(coords_in_rref(&b, &p, &[q(2), q(3), q(7)]), Some(vec![q(2), q(3)]));
        assert_eq!(coords_in_rref(&b, &p, &[q(2), q(3), q(8)]), None);
    }
}
