//! JSON equation files: `{"N": 2, "coeffs": [[["0","0"],["1","0"]], [], [["6","0"]]]}`.
//!
//! `coeffs[n]` lists the coefficients of `a_n(z)` in increasing powers of
//! `z`, each as a pair of rational strings `[re, im]`.

use std::fs;
use std::path::Path;

use psent::equation::EquationSpec;
use psent::series::Poly;
use psent::ExactScalar;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub already_canonical: bool,
}

impl EquationFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("malformed equation file: {e}")))
    }

    pub fn to_spec(&self) -> Result<EquationSpec, CliError> {
        if self.coeffs.len() != self.n + 1 {
            return Err(CliError::input(format!(
                "N = {} needs {} coefficient polynomials, found {}",
                self.n,
                self.n + 1,
                self.coeffs.len()
            )));
        }
        let mut a = Vec::with_capacity(self.coeffs.len());
        for (k, poly) in self.coeffs.iter().enumerate() {
            let terms = poly
                .iter()
                .map(|[re, im]| ExactScalar::parse_pair(re, im))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::input(format!("a_{k}: {e}")))?;
            a.push(Poly::new(terms));
        }
        let spec = EquationSpec::new(self.n, a).map_err(CliError::from)?;
        if self.already_canonical && !spec.is_canonical() {
            return Err(CliError::input(
                "already_canonical is set but a_{N-1} is nonzero or a_N is not 2(N+1)/(N-1)^2".into(),
            ));
        }
        Ok(spec)
    }

    pub fn from_spec(spec: &EquationSpec) -> Self {
        EquationFile {
            n: spec.degree(),
            coeffs: spec.coeffs().iter().map(|p| p.coeffs().iter().map(|c| c.to_string_pair()).collect()).collect(),
            already_canonical: spec.is_canonical(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let text = r#"{"N": 2, "coeffs": [[["0","0"],["1","0"]], [], [["6","0"]]], "already_canonical": true}"#;
        let f = EquationFile::parse(text).unwrap();
        let spec = f.to_spec().unwrap();
        assert!(spec.is_canonical());
        let back = EquationFile::from_spec(&spec);
        assert_eq!(back.to_spec().unwrap(), spec);
    }

    #[test]
    fn rejects_bad_rationals_and_lengths() {
        let bad = r#"{"N": 2, "coeffs": [[["1/0","0"]], [], [["6","0"]]]}"#;
        assert_eq!(EquationFile::parse(bad).unwrap().to_spec().unwrap_err().code, 1);
        let short = r#"{"N": 3, "coeffs": [[], [], [["6","0"]]]}"#;
        assert_eq!(EquationFile::parse(short).unwrap().to_spec().unwrap_err().code, 1);
        let lying = r#"{"N": 2, "coeffs": [[], [], [["1","0"]]], "already_canonical": true}"#;
        assert_eq!(EquationFile::parse(lying).unwrap().to_spec().unwrap_err().code, 1);
    }
}
