//! JSON encodings shared with the command-line tool.
//!
//! A complex matrix is a list of rows, each row a list of `[re, im]` pairs.
//! A complex vector is a flat list of `[re, im]` pairs. Real matrices and
//! vectors are plain nested number arrays.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{c64, CMatrix, CVector};

pub type Rows<T> = Vec<Vec<T>>;

pub fn cmatrix_to_rows(m: &CMatrix) -> Rows<[f64; 2]> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn cmatrix_from_rows(rows: &Rows<[f64; 2]>) -> Result<CMatrix, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err("ragged matrix rows".into());
    }
    Ok(CMatrix::from_fn(r, c, |i, j| c64(rows[i][j][0], rows[i][j][1])))
}

pub fn rmatrix_to_rows(m: &DMatrix<f64>) -> Rows<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn rmatrix_from_rows(rows: &Rows<f64>) -> Result<DMatrix<f64>, String> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// `#[serde(with = "json::cmatrix")]`
pub mod cmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        cmatrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Rows::<[f64; 2]>::deserialize(d)?;
        cmatrix_from_rows(&rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "json::cmatrix_list")]`
pub mod cmatrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(cmatrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let list = Vec::<Rows<[f64; 2]>>::deserialize(d)?;
        list.iter()
            .map(|rows| cmatrix_from_rows(rows).map_err(D::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "json::cvector")]`
pub mod cvector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVector::from_iterator(pairs.len(), pairs.iter().map(|p| c64(p[0], p[1]))))
    }
}

/// `#[serde(with = "json::rmatrix")]`
pub mod rmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        rmatrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Rows::<f64>::deserialize(d)?;
        rmatrix_from_rows(&rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "json::rvector")]`
pub mod rvector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.iter().copied().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        Ok(DVector::from_vec(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Holder {
        #[serde(with = "cmatrix")]
        m: CMatrix,
    }

    #[test]
    fn matrix_layout_is_rows_of_pairs() {
        let h = Holder {
            m: CMatrix::from_row_slice(1, 2, &[c64(1.0, -2.0), c64(0.5, 0.0)]),
        };
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(text, r#"{"m":[[[1.0,-2.0],[0.5,0.0]]]}"#);
        let back: Holder = serde_json::from_str(&text).unwrap();
        assert_eq!(back.m, h.m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = serde_json::from_str::<Holder>(r#"{"m":[[[1,0]],[[1,0],[0,0]]]}"#);
        assert!(err.is_err());
    }
}
