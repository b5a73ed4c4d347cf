//! Matrix wire format: row-major nested arrays of `[re, im]` pairs.
//!
//! ```text
//! [[[1.0, 0.0], [0.0, 1.0]],
//!  [[0.0, -1.0], [2.0, 0.0]]]
//! ```
//!
//! Floats go through `serde_json`'s shortest round-trip formatting, so a
//! serialize/deserialize cycle is bit-exact.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{hermitize, CMatrix, CVector, HermitianMatrix, C64};

/// Serialized shape of a dense matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixRepr(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for MatrixRepr {
    fn from(m: &CMatrix) -> Self {
        MatrixRepr(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl MatrixRepr {
    pub fn to_matrix(&self) -> Result<CMatrix, String> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err("ragged matrix rows".into());
        }
        let mut m = CMatrix::zeros(rows, cols);
        for (i, row) in self.0.iter().enumerate() {
            for (j, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err("non-finite matrix entry".into());
                }
                m[(i, j)] = C64::new(re, im);
            }
        }
        Ok(m)
    }
}

impl From<HermitianMatrix> for MatrixRepr {
    fn from(h: HermitianMatrix) -> Self {
        MatrixRepr::from(h.as_matrix())
    }
}

impl TryFrom<MatrixRepr> for HermitianMatrix {
    type Error = String;

    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        let m = r.to_matrix()?;
        let h = hermitize(&m).map_err(|e| e.to_string())?;
        // Accept only matrices that were Hermitian on the wire.
        if h.as_matrix() != &m {
            return Err("matrix is not Hermitian".into());
        }
        Ok(h)
    }
}

pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
    MatrixRepr::from(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
    MatrixRepr::deserialize(d)?.to_matrix().map_err(D::Error::custom)
}

/// `Option<CMatrix>` fields.
pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixRepr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMatrix>, D::Error> {
        Option::<MatrixRepr>::deserialize(d)?
            .map(|r| r.to_matrix().map_err(D::Error::custom))
            .transpose()
    }
}

/// `Vec<CMatrix>` fields.
pub mod list {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(MatrixRepr::from).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Vec::<MatrixRepr>::deserialize(d)?
            .iter()
            .map(|r| r.to_matrix().map_err(D::Error::custom))
            .collect()
    }
}

/// Column vectors as flat arrays of `[re, im]` pairs.
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVector::from_iterator(raw.len(), raw.into_iter().map(|[re, im]| C64::new(re, im))))
    }
}

/// `Option<CVector>` fields.
pub mod option_vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<CVector>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CVector>, D::Error> {
        Ok(Option::<Vec<[f64; 2]>>::deserialize(d)?
            .map(|raw| CVector::from_iterator(raw.len(), raw.into_iter().map(|[re, im]| C64::new(re, im)))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre, rng_from_seed, Field};
    use proptest::prelude::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "super")]
        m: CMatrix,
    }

    #[test]
    fn layout_is_row_major_pairs() {
        let m = crate::linalg::cmatrix(2, 2, &[(1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (2.0, 0.0)]);
        let s = serde_json::to_string(&Holder { m }).unwrap();
        assert_eq!(s, r#"{"m":[[[1.0,0.0],[0.0,1.0]],[[0.0,-1.0],[2.0,0.0]]]}"#);
    }

    #[test]
    fn non_hermitian_rejected_for_hermitian_type() {
        let r = serde_json::from_str::<HermitianMatrix>("[[[1.0,0.0],[2.0,0.0]],[[0.0,0.0],[1.0,0.0]]]");
        assert!(r.is_err());
        assert!(serde_json::from_str::<HermitianMatrix>("[[[1.0,0.0]],[[0.0,0.0],[1.0,0.0]]]").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6) {
            let mut rng = rng_from_seed(seed);
            let m = ginibre(rows, cols, Field::Complex, &mut rng) * C64::new(1e3, 0.0);
            let h = Holder { m };
            let back: Holder = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
            prop_assert_eq!(back, h);
        }
    }
}
