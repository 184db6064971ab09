//! `{"rows": r, "cols": c, "entries": [[re, im], ...]}`, row-major, each
//! scalar in the Q(e) JSON form (the text form is accepted on input).

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::EpsMatrix;
use crate::epsfield::{EpsComplex, EpsRational};

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<(EpsRational, EpsRational)>,
}

impl Serialize for EpsMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|z| (z.re.clone(), z.im.clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EpsMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        let entries = r
            .entries
            .into_iter()
            .map(|(re, im)| EpsComplex::new(re, im))
            .collect();
        EpsMatrix::from_entries(r.rows, r.cols, entries).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut m = EpsMatrix::identity(2);
        m[(0, 1)] = EpsComplex::new(EpsRational::eps(), EpsRational::from_frac(-1, 3));
        let s = serde_json::to_string(&m).unwrap();
        let back: EpsMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        let t: EpsMatrix =
            serde_json::from_str(r#"{"rows":1,"cols":2,"entries":[["1-e","0"],["1/2","e"]]}"#)
                .unwrap();
        assert_eq!(t[(0, 1)].im, EpsRational::eps());
        assert!(serde_json::from_str::<EpsMatrix>(r#"{"rows":2,"cols":2,"entries":[]}"#).is_err());
    }
}
