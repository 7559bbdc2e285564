//! A μ₂ value tagged with the route that produced it.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::tensor::{TraceFreeSym3, ViscosityTensor4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Pairing,
    CorrectorEnergy,
    LatticeSum,
    ErgodicIntegral,
    IsotropicReference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub s: TraceFreeSym3<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mu2Value {
    Tensor(ViscosityTensor4<f64>),
    Samples(Vec<Sample>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mu2Estimate {
    pub value: Mu2Value,
    pub route: Route,
    pub params: Map<String, Value>,
    pub error_bar: f64,
}

impl Mu2Estimate {
    pub fn samples(route: Route, samples: Vec<Sample>, error_bar: f64) -> Self {
        Self { value: Mu2Value::Samples(samples), route, params: Map::new(), error_bar: error_bar.abs() }
    }

    pub fn tensor(route: Route, t: ViscosityTensor4<f64>, error_bar: f64) -> Self {
        Self { value: Mu2Value::Tensor(t), route, params: Map::new(), error_bar: error_bar.abs() }
    }

    pub fn with_param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), v.into());
        self
    }

    /// `μ₂ S : S`: from the tensor, or from the sample with exactly this strain.
    pub fn quadratic(&self, s: &TraceFreeSym3<f64>) -> Option<f64> {
        match &self.value {
            Mu2Value::Tensor(t) => Some(t.contract(s, s)),
            Mu2Value::Samples(v) => v.iter().find(|x| x.s == *s).map(|x| x.value),
        }
    }

    /// The single sample value, if this estimate carries exactly one.
    pub fn scalar(&self) -> Option<f64> {
        match &self.value {
            Mu2Value::Samples(v) if v.len() == 1 => Some(v[0].value),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("route".into(), serde_json::to_value(self.route).expect("enum"));
        m.insert("params".into(), Value::Object(self.params.clone()));
        match &self.value {
            Mu2Value::Tensor(t) => {
                m.insert("matrix5".into(), serde_json::to_value(t.matrix5()).expect("finite"));
                m.insert("basis".into(), Value::from(crate::tensor::BASIS_ID));
            }
            Mu2Value::Samples(v) => {
                m.insert("samples".into(), serde_json::to_value(v).expect("finite"));
            }
        }
        m.insert("error_bar".into(), Value::from(self.error_bar));
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> crate::Result<Self> {
        use crate::Error;
        let bad = |s: &str| Error::Config(format!("Mu2Estimate JSON: {s}"));
        let route: Route = serde_json::from_value(v.get("route").cloned().ok_or_else(|| bad("route"))?)?;
        let params = v
            .get("params")
            .and_then(|p| p.as_object().cloned())
            .unwrap_or_default();
        let error_bar = v.get("error_bar").and_then(Value::as_f64).ok_or_else(|| bad("error_bar"))?;
        let value = if let Some(mx) = v.get("matrix5") {
            let t: ViscosityTensor4<f64> = serde_json::from_value(serde_json::json!({
                "basis": crate::tensor::BASIS_ID, "matrix5": mx
            }))?;
            Mu2Value::Tensor(t)
        } else if let Some(s) = v.get("samples") {
            Mu2Value::Samples(serde_json::from_value(s.clone())?)
        } else {
            return Err(bad("needs matrix5 or samples"));
        };
        Ok(Self { value, route, params, error_bar })
    }
}
