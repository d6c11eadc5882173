//! JSON form: `{"n": 3, "A": "0", "a": "-1/2", "f": [{"poly": ["0", "1"]}, ...]}`.

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use super::RationalQuasigroup;
use crate::error::{Error, Result};
use crate::funcs::UnivariateFunction;
use crate::scalar::{format_rational, int, parse_rational_field};

fn rational_field(obj: &Value, key: &str) -> Result<BigRational> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(BigRational::zero()),
        Some(Value::String(s)) => parse_rational_field(key, s),
        Some(Value::Number(n)) if n.is_i64() => Ok(int(n.as_i64().unwrap_or_default())),
        Some(_) => Err(Error::parse(key, "expected an integer or \"p/q\" string")),
    }
}

impl RationalQuasigroup {
    /// Parses a spec without the solvability check; use
    /// [`RationalQuasigroup::solvability_check`] or classify the result.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            Error::parse(
                format!("line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        if !value.is_object() {
            return Err(Error::parse("<root>", "expected a JSON object"));
        }
        let n = value
            .get("n")
            .ok_or_else(|| Error::parse("n", "missing"))?
            .as_u64()
            .ok_or_else(|| Error::parse("n", "expected a non-negative integer"))?
            as usize;
        let numer_shift = rational_field(value, "A")?;
        let denom_shift = rational_field(value, "a")?;
        let items = value
            .get("f")
            .ok_or_else(|| Error::parse("f", "missing"))?
            .as_array()
            .ok_or_else(|| Error::parse("f", "expected an array"))?;
        if items.len() != n {
            return Err(Error::parse(
                "f",
                format!("expected {n} functions, found {}", items.len()),
            ));
        }
        let funcs = items
            .iter()
            .enumerate()
            .map(|(k, v)| UnivariateFunction::from_json_value(&format!("f[{k}]"), v))
            .collect::<Result<Vec<_>>>()?;
        RationalQuasigroup::new_unchecked(funcs, numer_shift, denom_shift)
            .map_err(|e| Error::parse("n", e.to_string()))
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "n": self.arity(),
            "A": format_rational(self.numer_shift()),
            "a": format_rational(self.denom_shift()),
            "f": self.funcs(),
        })
    }
}
