//! JSON exchange formats for charts, parameters and systems. Matrices are
//! row-major nested arrays.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{from_rows, to_rows};
use crate::schur::SchurParams;
use crate::sysid::StateSpace;
use crate::young::{Chart, NumberedYoungDiagram};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartJson {
    pub m: usize,
    pub n: usize,
    pub d: Vec<usize>,
    #[serde(rename = "Y")]
    pub y: Vec<Vec<usize>>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    #[serde(rename = "Jtilde")]
    pub jtilde: Vec<usize>,
    pub u_idx: Vec<usize>,
}

impl From<&Chart> for ChartJson {
    fn from(c: &Chart) -> Self {
        Self {
            m: c.m(),
            n: c.n(),
            d: c.dynamical_indices().as_slice().to_vec(),
            y: c.diagram().rows(),
            j: c.j().as_slice().to_vec(),
            jtilde: c.jtilde().as_slice().to_vec(),
            u_idx: c.u_idx().to_vec(),
        }
    }
}

impl ChartJson {
    /// Rebuilds the chart from `Y` and checks every other field against it.
    pub fn to_chart(&self) -> Result<Chart> {
        let y = NumberedYoungDiagram::new(self.y.clone())?;
        if (y.m(), y.n()) != (self.m, self.n) {
            return Err(Error::Dimension(format!(
                "Y is {}x{}, header says m = {}, n = {}",
                y.m(),
                y.n(),
                self.m,
                self.n
            )));
        }
        let chart = Chart::from_diagram(y)?;
        let derived = ChartJson::from(&chart);
        if derived != *self {
            return Err(Error::Inadmissible(
                "chart fields are inconsistent with Y".into(),
            ));
        }
        Ok(chart)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub m: usize,
    pub n: usize,
    pub v: Vec<Vec<f64>>,
    #[serde(rename = "D0")]
    pub d0: Vec<Vec<f64>>,
}

impl From<&SchurParams> for ParamsJson {
    fn from(p: &SchurParams) -> Self {
        Self {
            m: p.m(),
            n: p.n(),
            v: p.v().iter().map(|x| x.iter().copied().collect()).collect(),
            d0: to_rows(p.d0()),
        }
    }
}

impl ParamsJson {
    pub fn to_params(&self) -> Result<SchurParams> {
        if self.v.len() != self.n {
            return Err(Error::Dimension(format!(
                "{} Schur vectors, header says n = {}",
                self.v.len(),
                self.n
            )));
        }
        if let Some(k) = self.v.iter().position(|x| x.len() != self.m) {
            return Err(Error::Dimension(format!("v_{} does not have length {}", k + 1, self.m)));
        }
        let v = self.v.iter().map(|x| DVector::from_column_slice(x)).collect();
        SchurParams::new(v, from_rows(&self.d0, self.m, self.m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemJson {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
}

impl From<&StateSpace> for SystemJson {
    fn from(ss: &StateSpace) -> Self {
        Self {
            m: ss.m(),
            n: ss.n(),
            p: ss.p(),
            a: to_rows(&ss.a),
            b: to_rows(&ss.b),
            c: ss.c.as_ref().map(to_rows),
            d: ss.d.as_ref().map(to_rows),
        }
    }
}

impl SystemJson {
    pub fn to_state_space(&self) -> Result<StateSpace> {
        let (m, n, p) = (self.m, self.n, self.p);
        let a = from_rows(&self.a, n, n)?;
        let b = from_rows(&self.b, n, m)?;
        let c = self.c.as_ref().map(|c| from_rows(c, p, n)).transpose()?;
        let d = self.d.as_ref().map(|d| from_rows(d, p, m)).transpose()?;
        if c.is_none() && d.is_some() {
            return Err(Error::Dimension("D given without C".into()));
        }
        StateSpace::new(a, b, c, d)
    }
}

/// Row-major nested arrays, re-exported for callers building JSON by hand.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    to_rows(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::enumerate_all;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chart_round_trip() {
        for chart in enumerate_all(3, 4) {
            let json = serde_json::to_string(&ChartJson::from(&chart)).unwrap();
            let back: ChartJson = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_chart().unwrap(), chart);
        }
    }

    #[test]
    fn tampered_chart_is_rejected() {
        let chart = &enumerate_all(3, 4)[0];
        let mut json = ChartJson::from(chart);
        json.u_idx[0] = 2;
        assert!(json.to_chart().is_err());
    }

    #[test]
    fn params_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SchurParams::random(&mut rng, 3, 4);
        let json = serde_json::to_string(&ParamsJson::from(&p)).unwrap();
        let back: ParamsJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_params().unwrap(), p);
    }

    #[test]
    fn system_without_output_map() {
        let text = r#"{"m":1,"n":1,"p":0,"A":[[0.5]],"B":[[1.0]]}"#;
        let sys: SystemJson = serde_json::from_str(text).unwrap();
        let ss = sys.to_state_space().unwrap();
        assert!(ss.c.is_none());
        assert_eq!(serde_json::to_string(&SystemJson::from(&ss)).unwrap(), text);
    }
}
