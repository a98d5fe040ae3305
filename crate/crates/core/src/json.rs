//! Serde helpers for the JSON schemas: complex numbers are `[re, im]` pairs,
//! the point at infinity is the string `"inf"`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Version tag written into every report and accepted in every config.
pub const SCHEMA_VERSION: u32 = 1;

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = zs.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

pub mod complex_opt {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| [z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        let pair = Option::<[f64; 2]>::deserialize(d)?;
        Ok(pair.map(|[re, im]| Complex64::new(re, im)))
    }
}

/// Parses `a+bi` style complex literals: `3`, `-2i`, `2.5+0.2i`, `0.09+0.85i`,
/// `1e-3-4i`. No spaces.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let err = || format!("cannot parse complex number {text:?}; expected a+bi");
    if let Some(body) = s.strip_suffix(['i', 'j']) {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let (re, im) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("0", body),
        };
        let re: f64 = re.parse().map_err(|_| err())?;
        let im: f64 = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse().map_err(|_| err())?,
        };
        Ok(Complex64::new(re, im))
    } else {
        s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        let cases = [
            ("3", Complex64::new(3.0, 0.0)),
            ("-2i", Complex64::new(0.0, -2.0)),
            ("i", Complex64::new(0.0, 1.0)),
            ("-i", Complex64::new(0.0, -1.0)),
            ("2.5+0.2i", Complex64::new(2.5, 0.2)),
            ("0.09+0.85i", Complex64::new(0.09, 0.85)),
            ("16-4i", Complex64::new(16.0, -4.0)),
            ("1e-3-4i", Complex64::new(1e-3, -4.0)),
            ("-1e+2+1.5e-1i", Complex64::new(-100.0, 0.15)),
            ("1-i", Complex64::new(1.0, -1.0)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex(text).unwrap(), want, "{text}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for text in ["", "abc", "1+2", "1+xi", "2 + 3i"] {
            assert!(parse_complex(text).is_err(), "{text}");
        }
    }
}
