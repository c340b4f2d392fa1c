//! Dense matrix helpers shared by the structure, decomposition and atlas code.

use nalgebra::DMatrix;

pub type Mat = DMatrix<f64>;

pub fn bracket(x: &Mat, y: &Mat) -> Mat {
    x * y - y * x
}

pub fn frob(x: &Mat) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Matrix exponential (scaling and squaring, via nalgebra).
pub fn expm(x: &Mat) -> Mat {
    x.clone().exp()
}

/// Exponential of a nilpotent matrix; the series terminates after `n` terms.
pub fn exp_nilpotent(x: &Mat) -> Mat {
    let n = x.nrows();
    let mut out = Mat::identity(n, n);
    let mut term = Mat::identity(n, n);
    for k in 1..n {
        term = &term * x / k as f64;
        if frob(&term) == 0.0 {
            break;
        }
        out += &term;
    }
    out
}

/// Logarithm of a unipotent matrix; exact because `g - 1` is nilpotent.
pub fn log_unipotent(g: &Mat) -> Mat {
    let n = g.nrows();
    let m = g - Mat::identity(n, n);
    let mut out = Mat::zeros(n, n);
    let mut pow = m.clone();
    for k in 1..n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out += &pow * (sign / k as f64);
        pow = &pow * &m;
    }
    out
}

/// Inverse of an invertible matrix, panicking never: falls back to a pseudo-inverse.
pub fn inv(g: &Mat) -> Mat {
    g.clone()
        .try_inverse()
        .unwrap_or_else(|| g.clone().pseudo_inverse(1e-300).expect("svd"))
}

/// Row-major flattening of a matrix.
pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat, String> {
    let nr = rows.len();
    let nc = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != nc) {
        return Err("ragged matrix rows".into());
    }
    Ok(Mat::from_fn(nr, nc, |i, j| rows[i][j]))
}

/// Condition number from the singular values (infinite when singular).
pub fn cond(m: &Mat) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Serde adapters writing matrices as row-major nested arrays.
pub mod mat_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub mod mat_vec_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[Mat], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Mat>, D::Error> {
        let all = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
        all.iter()
            .map(|r| from_rows(r).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nilpotent_exp_log_roundtrip() {
        let x = Mat::from_row_slice(3, 3, &[0., 0., 0., 1.5, 0., 0., -0.7, 2.0, 0.]);
        let g = exp_nilpotent(&x);
        assert!(frob(&(&g - expm(&x))) < 1e-13);
        assert!(frob(&(log_unipotent(&g) - &x)) < 1e-13);
    }

    #[test]
    fn rows_roundtrip() {
        let m = Mat::from_row_slice(2, 3, &[1., 2., 3., 4., 5., 6.]);
        assert_eq!(from_rows(&to_rows(&m)).unwrap(), m);
        assert!(from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
