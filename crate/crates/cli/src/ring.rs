use clap::Args;
use delta_forge::{Error, Result, RingParams, SeriesRing, WittRing};
use serde_json::{json, Value};

#[derive(Debug, Clone, Args)]
pub struct RingArgs {
    /// Inline ring configuration, e.g. '{"p":3,"prec":8,"m":1}' or '{"backend":"kolchin","trunc":10}'
    #[arg(long, global = true, conflicts_with_all = ["p", "prec", "m", "modulus", "trunc"])]
    pub ring: Option<String>,
    /// Residue characteristic (odd prime)
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// p-adic precision N of Z/p^N
    #[arg(long, global = true)]
    pub prec: Option<u32>,
    /// Residue degree m of F_{p^m}
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Irreducible modulus over F_p, coefficients low-to-high, e.g. 1,0,1
    #[arg(long, global = true, value_delimiter = ',')]
    pub modulus: Option<Vec<u64>>,
    /// Truncation order M of Q[[t]]/t^M; selects the Kolchin backend
    #[arg(long, global = true)]
    pub trunc: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingConfig {
    Arithmetic(RingParams),
    Kolchin { trunc: u32 },
}

impl RingConfig {
    pub fn from_args(args: &RingArgs) -> Result<Self> {
        if let Some(text) = &args.ring {
            let v: Value = serde_json::from_str(text)
                .map_err(|e| Error::Input(format!("--ring is not valid JSON ({e}): {text}")))?;
            return Self::from_json(&v);
        }
        if let Some(trunc) = args.trunc {
            return Ok(RingConfig::Kolchin { trunc });
        }
        let (p, prec) = match (args.p, args.prec) {
            (Some(p), Some(prec)) => (p, prec),
            _ => {
                return Err(Error::Input(
                    "a ring is required: pass --p and --prec (optionally --m, --modulus), --trunc, or --ring".into(),
                ))
            }
        };
        let params = match (&args.modulus, args.m) {
            (Some(modulus), m) => {
                let params = RingParams::extension(p, prec, modulus.clone());
                if m.is_some_and(|m| m != params.m) {
                    return Err(Error::InvalidParams(format!(
                        "--m {} disagrees with a modulus of degree {}",
                        m.unwrap(),
                        params.m
                    )));
                }
                params
            }
            (None, m) => RingParams::with_default_modulus(p, prec, m.unwrap_or(1))?,
        };
        Ok(RingConfig::Arithmetic(params))
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        match v.get("backend").and_then(Value::as_str) {
            Some("kolchin") => {
                let trunc = v
                    .get("trunc")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Input(format!("kolchin ring needs an integer `trunc`: {v}")))?;
                Ok(RingConfig::Kolchin { trunc: trunc as u32 })
            }
            None | Some("arithmetic") => {
                let mut fields = v.clone();
                if let Some(obj) = fields.as_object_mut() {
                    obj.remove("backend");
                }
                let params: RingParams = serde_json::from_value(fields)
                    .map_err(|e| Error::Input(format!("bad ring configuration ({e}): {v}")))?;
                match params.modulus {
                    Some(_) => Ok(RingConfig::Arithmetic(params)),
                    None => Ok(RingConfig::Arithmetic(RingParams::with_default_modulus(
                        params.p,
                        params.prec,
                        params.m,
                    )?)),
                }
            }
            Some(other) => Err(Error::Input(format!(
                "unknown backend {other:?}; expected arithmetic or kolchin"
            ))),
        }
    }

    /// The same ring with `extra` more digits (or series coefficients).
    pub fn lifted(&self, extra: u32) -> Self {
        match self {
            RingConfig::Arithmetic(params) => RingConfig::Arithmetic(params.with_prec(params.prec + extra)),
            RingConfig::Kolchin { trunc } => RingConfig::Kolchin { trunc: trunc + extra },
        }
    }

    pub fn build(&self) -> Result<Ring> {
        Ok(match self {
            RingConfig::Arithmetic(params) => Ring::Arithmetic(WittRing::new(params.clone())?),
            RingConfig::Kolchin { trunc } => Ring::Kolchin(SeriesRing::new(*trunc)?),
        })
    }

    pub fn to_json(&self) -> Value {
        match self {
            RingConfig::Arithmetic(params) => {
                let mut v = serde_json::to_value(params).expect("ring parameters serialize");
                v["backend"] = json!("arithmetic");
                v
            }
            RingConfig::Kolchin { trunc } => json!({"backend": "kolchin", "trunc": trunc}),
        }
    }
}

pub enum Ring {
    Arithmetic(WittRing),
    Kolchin(SeriesRing),
}
