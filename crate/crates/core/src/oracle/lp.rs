//! Exact maximisation of piecewise-linear objectives `sum_m w_m min(a_m . c, 1)`.
//!
//! The hinge loss is `min(z, 1)`, so every hinge objective has this form. Its LP
//! dual is
//!
//! ```text
//! minimise  sum_m (w_m - u_m)   s.t.  sum_m u_m a_m = 0,  0 <= u_m <= w_m
//! ```
//!
//! which has one equality row per free critic coordinate and one bounded column
//! per term. It is solved with a dense bounded-variable simplex using Bland's
//! rule; the optimal critic is read off the simplex multipliers.

/// Optimal critic (free coordinates only) and dual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct HingeSolution {
    pub critic: Vec<f64>,
    /// `sum_m (w_m - u_m)` at the dual optimum; equals the primal supremum.
    pub dual_value: f64,
    pub pivots: usize,
}

const DUAL_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-12;

/// `terms` are `(weight, coefficients)` over `rows` free coordinates.
pub fn solve(terms: &[(f64, Vec<f64>)], rows: usize, max_pivots: usize) -> Option<HingeSolution> {
    let m = terms.len();
    let cols = m + rows;
    let total_weight: f64 = terms.iter().map(|t| t.0).sum();
    if rows == 0 {
        return Some(HingeSolution { critic: Vec::new(), dual_value: 0.0, pivots: 0 });
    }

    // tableau B^{-1} [A | I]; artificials are fixed at zero (upper bound 0)
    let mut tab = vec![vec![0.0; cols]; rows];
    for (j, (_, a)) in terms.iter().enumerate() {
        for r in 0..rows {
            tab[r][j] = a[r];
        }
    }
    for r in 0..rows {
        tab[r][m + r] = 1.0;
    }
    let upper: Vec<f64> = terms.iter().map(|t| t.0).chain(std::iter::repeat(0.0).take(rows)).collect();
    let cost: Vec<f64> = (0..cols).map(|j| if j < m { 1.0 } else { 0.0 }).collect();
    let mut basis: Vec<usize> = (m..cols).collect();
    let mut is_basic = vec![false; cols];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut at_upper = vec![false; cols];
    let mut xb = vec![0.0f64; rows];
    // reduced costs: cost - c_B B^{-1} A, with c_B = 0 initially
    let mut reduced = cost.clone();

    let mut pivots = 0;
    loop {
        let entering = (0..cols).find(|&j| {
            !is_basic[j] && upper[j] > 0.0 && ((!at_upper[j] && reduced[j] > DUAL_TOL) || (at_upper[j] && reduced[j] < -DUAL_TOL))
        });
        let Some(q) = entering else { break };
        if pivots >= max_pivots {
            return None;
        }
        pivots += 1;

        let dir = if at_upper[q] { -1.0 } else { 1.0 };
        let mut theta = upper[q];
        let mut leave: Option<(usize, bool)> = None;
        for r in 0..rows {
            let alpha = dir * tab[r][q];
            let (ratio, to_upper) = if alpha > PIVOT_TOL {
                (xb[r].max(0.0) / alpha, false)
            } else if alpha < -PIVOT_TOL {
                ((upper[basis[r]] - xb[r]).max(0.0) / -alpha, true)
            } else {
                continue;
            };
            let better = match leave {
                None => ratio < theta,
                Some((lr, _)) => ratio < theta || (ratio == theta && basis[r] < basis[lr]),
            };
            if better {
                theta = ratio;
                leave = Some((r, to_upper));
            }
        }

        for r in 0..rows {
            xb[r] -= dir * theta * tab[r][q];
        }
        match leave {
            None => {
                at_upper[q] = !at_upper[q];
            }
            Some((r, to_upper)) => {
                let entering_value = if at_upper[q] { upper[q] } else { 0.0 } + dir * theta;
                let out = basis[r];
                is_basic[out] = false;
                at_upper[out] = to_upper;
                is_basic[q] = true;
                at_upper[q] = false;
                basis[r] = q;

                let piv = tab[r][q];
                for v in tab[r].iter_mut() {
                    *v /= piv;
                }
                let pivot_row = tab[r].clone();
                for (i, row) in tab.iter_mut().enumerate() {
                    if i != r {
                        let factor = row[q];
                        if factor != 0.0 {
                            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                                *v -= factor * pv;
                            }
                        }
                    }
                }
                let factor = reduced[q];
                for (v, pv) in reduced.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                xb[r] = entering_value;
            }
        }
    }

    // multipliers y = c_B B^{-1}; B^{-1} sits in the artificial columns
    let critic: Vec<f64> = (0..rows)
        .map(|i| (0..rows).map(|r| cost[basis[r]] * tab[r][m + i]).sum())
        .collect();
    let mut used = 0.0;
    for j in 0..m {
        if is_basic[j] {
            continue;
        }
        if at_upper[j] {
            used += upper[j];
        }
    }
    for r in 0..rows {
        if basis[r] < m {
            used += xb[r];
        }
    }
    Some(HingeSolution { critic, dual_value: total_weight - used, pivots })
}
