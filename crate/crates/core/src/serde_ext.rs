//! Serde adapters that keep infinities representable in JSON.
//!
//! Finite values stay numbers; `±∞` and NaN become the strings `"inf"`,
//! `"-inf"` and `"nan"`, which is also how the CSV tables spell them.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Str(String),
}

/// Text form shared by JSON and CSV output.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:?}")
    }
}

fn to_repr(x: f64) -> Repr {
    if x.is_finite() {
        Repr::Num(x)
    } else {
        Repr::Str(format_f64(x))
    }
}

fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(x) => Ok(x),
        Repr::Str(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(E::custom(format!("expected a number, 'inf', '-inf' or 'nan', got '{other}'"))),
        },
    }
}

pub mod f64_ext {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }
}

pub mod opt_f64_ext {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(to_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
    }
}

pub mod pairs_ext {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&(a, b)| (to_repr(a), to_repr(b))).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        Vec::<(Repr, Repr)>::deserialize(d)?
            .into_iter()
            .map(|(a, b)| Ok((from_repr(a)?, from_repr(b)?)))
            .collect::<Result<_, D::Error>>()
            .map_err(|e: D::Error| D::Error::custom(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Probe {
        #[serde(with = "f64_ext")]
        x: f64,
        #[serde(with = "opt_f64_ext")]
        y: Option<f64>,
        #[serde(with = "pairs_ext")]
        z: Vec<(f64, f64)>,
    }

    #[test]
    fn round_trip() {
        let p = Probe {
            x: f64::INFINITY,
            y: Some(0.5),
            z: vec![(0.64, 1.0), (4.0, f64::INFINITY)],
        };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"x":"inf","y":0.5,"z":[[0.64,1.0],[4.0,"inf"]]}"#);
        assert_eq!(serde_json::from_str::<Probe>(&s).unwrap(), p);
        assert_eq!(format_f64(1.0), "1.0");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert!(serde_json::from_str::<Probe>(r#"{"x":"big","y":null,"z":[]}"#).is_err());
    }
}
