use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// One vertex of the polytope together with its affine coefficients over
/// the input states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolytopeVertex {
    pub point: Vec<f64>,
    /// Coefficients c with vertex = sum_i c_i rho_i, sum_i c_i = 1.
    pub coeffs: Vec<f64>,
}

/// The polytope aff{rho_i} ∩ R_+^d of normalized states in a commuting
/// span, with its vertex list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalPolytope {
    pub dim: usize,
    pub affine_basis: Vec<Vec<f64>>,
    pub extremes: Vec<PolytopeVertex>,
}

const MAX_DIM: usize = 12;
const MAX_AFFINE_DIM: usize = 6;

fn validate_prob_vector(idx: usize, v: &[f64]) -> Result<()> {
    if v.iter().any(|&x| x < -1e-12) {
        return Err(Error::InvalidArgument(format!(
            "state {idx} has a negative entry"
        )));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "state {idx} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Enumerate the vertices of aff{rho_i} ∩ R_+^d by iterating over
/// candidate active sets of nonnegativity constraints. Exact for desk
/// scale; refuses beyond d = 12 or affine dimension 6 rather than
/// approximating.
pub fn polytope_extremes(states: &[Vec<f64>]) -> Result<ClassicalPolytope> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no states".into()));
    }
    let d = states[0].len();
    if d == 0 || states.iter().any(|s| s.len() != d) {
        return Err(Error::DimensionMismatch("state vector lengths differ".into()));
    }
    if d > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "vertex enumeration is capped at dimension {MAX_DIM}, got {d}"
        )));
    }
    for (i, s) in states.iter().enumerate() {
        validate_prob_vector(i, s)?;
    }

    // affine directions, reduced to an independent set (duplicate states
    // are thereby handled)
    let base = &states[0];
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for s in states.iter().skip(1) {
        let mut v: Vec<f64> = s.iter().zip(base.iter()).map(|(a, b)| a - b).collect();
        for q in &dirs {
            let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (vj, qj) in v.iter_mut().zip(q.iter()) {
                *vj -= proj * qj;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-10 {
            dirs.push(v.iter().map(|x| x / norm).collect());
        }
    }
    let k = dirs.len();
    if k > MAX_AFFINE_DIM {
        return Err(Error::Unsupported(format!(
            "vertex enumeration is capped at affine dimension {MAX_AFFINE_DIM}, got {k}"
        )));
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    if k == 0 {
        vertices.push(base.clone());
    } else {
        // iterate over all zero-coordinate subsets; a subset pins a vertex
        // when the directions restricted to it have full rank k
        for mask in 1u32..(1 << d) {
            let zset: Vec<usize> = (0..d).filter(|j| mask & (1 << j) != 0).collect();
            if zset.len() < k {
                continue;
            }
            // solve dirs_Z^T t = -base_Z in the least-squares sense and
            // demand uniqueness (rank k) and exact solvability
            let rows = zset.len();
            let a = nalgebra::DMatrix::<f64>::from_fn(rows, k, |r, c| dirs[c][zset[r]]);
            let b = nalgebra::DVector::<f64>::from_fn(rows, |r, _| -base[zset[r]]);
            let svd = a.clone().svd(true, true);
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&s| s > 1e-10)
                .count();
            if rank < k {
                continue;
            }
            let t = match svd.solve(&b, 1e-12) {
                Ok(t) => t,
                Err(_) => continue,
            };
            // residual: the zero pattern must actually be achievable
            let resid = (&a * &t - &b).amax();
            if resid > 1e-10 {
                continue;
            }
            let mut x = base.clone();
            for (c, dir) in dirs.iter().enumerate() {
                for j in 0..d {
                    x[j] += t[c] * dir[j];
                }
            }
            if x.iter().any(|&v| v < -1e-12) {
                continue;
            }
            // snap tiny negatives from roundoff
            for v in x.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            if !vertices.iter().any(|w: &Vec<f64>| {
                w.iter().zip(x.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-9
            }) {
                vertices.push(x);
            }
        }
    }

    // affine coefficients of each vertex over the original states
    let n = states.len();
    let mut extremes = Vec::with_capacity(vertices.len());
    for point in vertices {
        let a = nalgebra::DMatrix::<f64>::from_fn(d + 1, n, |r, c| {
            if r < d {
                states[c][r]
            } else {
                1.0
            }
        });
        let b = nalgebra::DVector::<f64>::from_fn(d + 1, |r, _| if r < d { point[r] } else { 1.0 });
        let svd = a.clone().svd(true, true);
        let coeffs = svd
            .solve(&b, 1e-12)
            .map_err(|e| Error::NumericFailure(e.to_string()))?;
        let resid = (&a * &coeffs - &b).amax();
        if resid > 1e-10 {
            return Err(Error::NumericFailure(format!(
                "vertex does not lie in the affine hull (residual {resid:.3e})"
            )));
        }
        extremes.push(PolytopeVertex {
            point,
            coeffs: coeffs.iter().copied().collect(),
        });
    }
    // deterministic order
    extremes.sort_by(|a, b| {
        a.point
            .iter()
            .zip(b.point.iter())
            .find_map(|(x, y)| {
                if (x - y).abs() > 1e-12 {
                    x.partial_cmp(y)
                } else {
                    None
                }
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    Ok(ClassicalPolytope {
        dim: d,
        affine_basis: states.to_vec(),
        extremes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_is_its_own_vertex() {
        let rho = vec![0.25, 0.5, 0.25];
        let p = polytope_extremes(&[rho.clone()]).unwrap();
        assert_eq!(p.extremes.len(), 1);
        assert_eq!(p.extremes[0].point, rho);
    }

    #[test]
    fn boundary_segment_has_its_endpoints_as_vertices() {
        // rho1 = (p, 1-p, 0), rho2 = (q, 0, 1-q): both already on the
        // boundary, so the vertices are exactly the two states
        let p = 0.5;
        let q = 0.25;
        let rho1 = vec![p, 1.0 - p, 0.0];
        let rho2 = vec![q, 0.0, 1.0 - q];
        let poly = polytope_extremes(&[rho1.clone(), rho2.clone()]).unwrap();
        assert_eq!(poly.extremes.len(), 2);
        for v in &poly.extremes {
            let is_rho1 = v.point.iter().zip(&rho1).all(|(a, b)| (a - b).abs() < 1e-9);
            let is_rho2 = v.point.iter().zip(&rho2).all(|(a, b)| (a - b).abs() < 1e-9);
            assert!(is_rho1 || is_rho2, "unexpected vertex {:?}", v.point);
        }
    }

    #[test]
    fn interior_segment_extends_to_the_boundary() {
        // two interior states on a segment: vertices lie beyond them on
        // the boundary of the orthant
        let rho1 = vec![0.5, 0.3, 0.2];
        let rho2 = vec![0.5, 0.2, 0.3];
        let poly = polytope_extremes(&[rho1, rho2]).unwrap();
        assert_eq!(poly.extremes.len(), 2);
        for v in &poly.extremes {
            assert!(v.point.iter().any(|&x| x.abs() < 1e-12));
            // affine recovery
            assert!((v.coeffs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn four_vertex_fixture() {
        // rho1 = diag(1,1,0,0)/2, rho2 = diag(0,1,1,0)/2,
        // rho3 = diag(0,0,1,1)/2: vertices are rho1, rho2, rho3 and
        // rho4 = rho1 + rho3 - rho2
        let r1 = vec![0.5, 0.5, 0.0, 0.0];
        let r2 = vec![0.0, 0.5, 0.5, 0.0];
        let r3 = vec![0.0, 0.0, 0.5, 0.5];
        let r4 = vec![0.5, 0.0, 0.0, 0.5];
        let poly = polytope_extremes(&[r1.clone(), r2.clone(), r3.clone()]).unwrap();
        assert_eq!(poly.extremes.len(), 4, "{:#?}", poly.extremes);
        for expect in [&r1, &r2, &r3, &r4] {
            assert!(
                poly.extremes.iter().any(|v| v
                    .point
                    .iter()
                    .zip(expect.iter())
                    .all(|(a, b)| (a - b).abs() < 1e-9)),
                "missing vertex {expect:?}"
            );
        }
    }

    #[test]
    fn refuses_beyond_caps() {
        let big = vec![vec![1.0 / 13.0; 13]];
        assert!(matches!(
            polytope_extremes(&big),
            Err(Error::Unsupported(_)) | Err(Error::InvalidArgument(_))
        ));
    }
}
