//! Equality-row presolve: rank-revealing elimination of linearly dependent
//! rows, with an immediate Farkas certificate when a dependent row is
//! inconsistent.

/// Outcome of presolving the equality system A x = b.
#[derive(Debug, Clone)]
pub enum PresolveResult {
    /// Indices of the retained (independent) rows.
    Reduced { keep: Vec<usize> },
    /// The system is inconsistent; `y` is a combination with A'y = 0 and
    /// b'y = -1 over the ORIGINAL rows (the Farkas sign convention of the
    /// conic engine).
    Inconsistent { y: Vec<f64> },
}

/// Pivoted Gram-Schmidt over the rows of [A | b]. A dependent row whose
/// residual right-hand side stays nonzero yields the inconsistency
/// certificate.
pub fn presolve_equalities(rows: &[Vec<f64>], rhs: &[f64], tol: f64) -> PresolveResult {
    let m = rows.len();
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |a, &v| a.max(v.abs()))
        .max(rhs.iter().fold(0.0f64, |a, &v| a.max(v.abs())))
        .max(1.0);

    // orthonormalized kept rows plus bookkeeping: each ortho row as a
    // combination of original rows
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut ortho_rhs: Vec<f64> = Vec::new();
    let mut combos: Vec<Vec<f64>> = Vec::new();
    let mut keep: Vec<usize> = Vec::new();

    for i in 0..m {
        let mut v = rows[i].clone();
        let mut r = rhs[i];
        let mut combo = vec![0.0; m];
        combo[i] = 1.0;
        for (k, q) in ortho.iter().enumerate() {
            let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for j in 0..n {
                v[j] -= proj * q[j];
            }
            r -= proj * ortho_rhs[k];
            for j in 0..m {
                combo[j] -= proj * combos[k][j];
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol * scale {
            let inv = 1.0 / norm;
            ortho.push(v.iter().map(|x| x * inv).collect());
            ortho_rhs.push(r * inv);
            combos.push(combo.iter().map(|x| x * inv).collect());
            keep.push(i);
        } else if r.abs() > tol * scale {
            // dependent row with inconsistent rhs: combo gives A'y = 0,
            // b'y = r; normalize to b'y = -1
            let y: Vec<f64> = combo.iter().map(|c| -c / r).collect();
            return PresolveResult::Inconsistent { y };
        }
        // dependent and consistent: drop silently
    }
    PresolveResult::Reduced { keep }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_dependent_consistent_rows() {
        let rows = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0], // sum of the first two
        ];
        let rhs = vec![1.0, 2.0, 3.0];
        match presolve_equalities(&rows, &rhs, 1e-12) {
            PresolveResult::Reduced { keep } => assert_eq!(keep, vec![0, 1]),
            _ => panic!("expected reduction"),
        }
    }

    #[test]
    fn certifies_inconsistent_rows() {
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let rhs = vec![1.0, 3.0];
        match presolve_equalities(&rows, &rhs, 1e-12) {
            PresolveResult::Inconsistent { y } => {
                // A'y = 0 and b'y = -1
                let a0 = y[0] * 1.0 + y[1] * 2.0;
                let a1 = y[0] * 1.0 + y[1] * 2.0;
                let by = y[0] * 1.0 + y[1] * 3.0;
                assert!(a0.abs() < 1e-12 && a1.abs() < 1e-12);
                assert!((by + 1.0).abs() < 1e-12);
            }
            _ => panic!("expected inconsistency certificate"),
        }
    }
}
