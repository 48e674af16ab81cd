//! JSON descriptors for coverings and data snapshots.
//!
//! Complex numbers are always `[re, im]` pairs; struct fields serialize in
//! declaration order, so identical inputs produce byte-identical output.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frobenius::{Covering, FrobeniusData, PrimaryDifferential};
use crate::genus0::CoveringG0;
use crate::genus1::CoveringG1;

pub fn c_to_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pair_to_c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn vec_to_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(c_to_pair).collect()
}

/// Covering descriptor, the on-disk form of a point of a Hurwitz space.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoveringDescriptor {
    pub genus: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole_profile: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<[f64; 2]>>,
}

impl CoveringDescriptor {
    pub fn to_covering(&self) -> Result<Covering> {
        match self.genus {
            0 => {
                let kind = self
                    .kind
                    .as_deref()
                    .ok_or_else(|| Error::Descriptor("genus-0 descriptor needs 'kind'".into()))?;
                match kind {
                    "polynomial" => {
                        let params = self.require_params()?;
                        if params.len() + 1 != self.n {
                            return Err(Error::Descriptor(format!(
                                "polynomial of degree {} needs {} parameters a_2..a_N",
                                self.n,
                                self.n - 1
                            )));
                        }
                        Ok(Covering::G0(CoveringG0::polynomial(params)?))
                    }
                    "laurent" => {
                        let k = self.k.ok_or_else(|| {
                            Error::Descriptor("laurent descriptor needs 'k'".into())
                        })?;
                        let params = self.require_params()?;
                        if params.len() != self.n {
                            return Err(Error::Descriptor(format!(
                                "laurent covering of degree {} needs {} parameters b_1..b_N",
                                self.n, self.n
                            )));
                        }
                        Ok(Covering::G0(CoveringG0::laurent(k, params)?))
                    }
                    "rational" => {
                        let profile = self.pole_profile.clone().ok_or_else(|| {
                            Error::Descriptor("rational descriptor needs 'pole_profile'".into())
                        })?;
                        let num = self
                            .num
                            .as_ref()
                            .ok_or_else(|| Error::Descriptor("rational needs 'num'".into()))?;
                        let den = self
                            .den
                            .as_ref()
                            .ok_or_else(|| Error::Descriptor("rational needs 'den'".into()))?;
                        let num: Vec<C64> = num.iter().copied().map(pair_to_c).collect();
                        let den: Vec<C64> = den.iter().copied().map(pair_to_c).collect();
                        Ok(Covering::G0(CoveringG0::rational(profile, num, den)?))
                    }
                    other => Err(Error::Descriptor(format!("unknown genus-0 kind '{other}'"))),
                }
            }
            1 => {
                let sigma = self
                    .sigma
                    .ok_or_else(|| Error::Descriptor("genus-1 descriptor needs 'sigma'".into()))?;
                let c0 = self
                    .c0
                    .ok_or_else(|| Error::Descriptor("genus-1 descriptor needs 'c0'".into()))?;
                let c = self
                    .c
                    .as_ref()
                    .ok_or_else(|| Error::Descriptor("genus-1 descriptor needs 'c'".into()))?;
                if c.len() + 1 != self.n {
                    return Err(Error::Descriptor(format!(
                        "genus-1 covering of degree {} needs {} coefficients c_2..c_N",
                        self.n,
                        self.n - 1
                    )));
                }
                let c: Vec<C64> = c.iter().copied().map(pair_to_c).collect();
                Ok(Covering::G1(CoveringG1::new(pair_to_c(sigma), pair_to_c(c0), c)?))
            }
            g => Err(Error::Descriptor(format!("unsupported genus {g}"))),
        }
    }

    fn require_params(&self) -> Result<Vec<C64>> {
        Ok(self
            .params
            .as_ref()
            .ok_or_else(|| Error::Descriptor("descriptor needs 'params'".into()))?
            .iter()
            .copied()
            .map(pair_to_c)
            .collect())
    }

    pub fn from_covering(covering: &Covering) -> Self {
        let mut d = CoveringDescriptor {
            genus: covering.genus(),
            kind: None,
            n: 0,
            k: None,
            pole_profile: None,
            params: None,
            num: None,
            den: None,
            sigma: None,
            c0: None,
            c: None,
        };
        match covering {
            Covering::G0(cov) => {
                d.n = cov.degree();
                d.pole_profile = Some(cov.pole_profile());
                match cov {
                    CoveringG0::Polynomial { a } => {
                        d.kind = Some("polynomial".into());
                        d.params = Some(vec_to_pairs(a));
                    }
                    CoveringG0::Laurent { k, b } => {
                        d.kind = Some("laurent".into());
                        d.k = Some(*k);
                        d.params = Some(vec_to_pairs(b));
                    }
                    CoveringG0::Rational { num, den, .. } => {
                        d.kind = Some("rational".into());
                        d.num = Some(vec_to_pairs(num));
                        d.den = Some(vec_to_pairs(den));
                    }
                }
            }
            Covering::G1(cov) => {
                d.n = cov.degree();
                d.sigma = Some(c_to_pair(cov.sigma()));
                d.c0 = Some(c_to_pair(cov.c0()));
                d.c = Some(vec_to_pairs(cov.c_coeffs()));
            }
        }
        d
    }
}

/// On-disk form of a `FrobeniusData` snapshot.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrobeniusDataJson {
    pub phi: String,
    pub lambdas: Vec<[f64; 2]>,
    pub eta_diag: Vec<[f64; 2]>,
    pub gamma: Vec<Vec<[f64; 2]>>,
    pub v: Vec<Vec<[f64; 2]>>,
    pub hamiltonians: Vec<[f64; 2]>,
    pub bergmann_quantities: Vec<[f64; 2]>,
    pub log_tau_bergmann: [f64; 2],
    pub log_tau_iso: [f64; 2],
    pub log_j: [f64; 2],
    pub g: [f64; 2],
    pub g_literal: [f64; 2],
    pub pole_orders: Vec<usize>,
    pub h_factors: Vec<[f64; 2]>,
    pub f_factors: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_coordinates: Option<Vec<[f64; 2]>>,
}

impl From<&FrobeniusData> for FrobeniusDataJson {
    fn from(d: &FrobeniusData) -> Self {
        let m = d.lambdas.len();
        let matrix = |mat: &nalgebra::DMatrix<C64>| -> Vec<Vec<[f64; 2]>> {
            (0..m)
                .map(|i| (0..m).map(|j| c_to_pair(mat[(i, j)])).collect())
                .collect()
        };
        FrobeniusDataJson {
            phi: d.phi.tag().to_string(),
            lambdas: vec_to_pairs(&d.lambdas),
            eta_diag: vec_to_pairs(&d.eta_diag),
            gamma: matrix(&d.gamma),
            v: matrix(&d.v),
            hamiltonians: vec_to_pairs(&d.hamiltonians),
            bergmann_quantities: vec_to_pairs(&d.bergmann_quantities),
            log_tau_bergmann: c_to_pair(d.log_tau_bergmann),
            log_tau_iso: c_to_pair(d.log_tau_iso),
            log_j: c_to_pair(d.log_j),
            g: c_to_pair(d.g),
            g_literal: c_to_pair(d.g_literal),
            pole_orders: d.h_factors.iter().map(|(k, _)| *k).collect(),
            h_factors: d.h_factors.iter().map(|(_, h)| c_to_pair(*h)).collect(),
            f_factors: vec_to_pairs(&d.f_factors),
            flat_coordinates: d.flat_coordinates.as_ref().map(|t| vec_to_pairs(t)),
        }
    }
}

/// Parses the descriptor and designates the primary differential (explicit
/// tag wins, the family default otherwise).
pub fn parse_with_phi(
    descriptor: &CoveringDescriptor,
    phi: Option<&str>,
) -> Result<(Covering, PrimaryDifferential)> {
    let covering = descriptor.to_covering()?;
    let phi = match phi {
        Some(tag) => PrimaryDifferential::parse(tag)?,
        None => covering.designated_phi(),
    };
    if !covering.phi_compatible(phi) {
        return Err(Error::IncompatiblePhi(format!(
            "{} is not a primary differential of this covering",
            phi.tag()
        )));
    }
    Ok((covering, phi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_polynomial_descriptor() {
        let json = r#"{"genus":0,"kind":"polynomial","N":3,"params":[[-3.0,0.0],[0.0,0.0]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(json).unwrap();
        let cov = d.to_covering().unwrap();
        assert!(matches!(cov, Covering::G0(CoveringG0::Polynomial { .. })));
    }

    #[test]
    fn parse_laurent_descriptor() {
        let json = r#"{"genus":0,"kind":"laurent","N":2,"k":1,"params":[[0.0,0.0],[1.0,0.0]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(json).unwrap();
        assert!(d.to_covering().is_ok());
    }

    #[test]
    fn parse_genus1_descriptor() {
        let json = r#"{"genus":1,"N":2,"sigma":[0.0,1.0],"c0":[0.0,0.0],"c":[[1.0,0.0]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(json).unwrap();
        assert!(d.to_covering().is_ok());
    }

    #[test]
    fn reject_malformed_descriptors() {
        let missing_k = r#"{"genus":0,"kind":"laurent","N":2,"params":[[0.0,0.0],[1.0,0.0]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(missing_k).unwrap();
        assert!(d.to_covering().is_err());

        let wrong_count = r#"{"genus":0,"kind":"polynomial","N":4,"params":[[1.0,0.0]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(wrong_count).unwrap();
        assert!(d.to_covering().is_err());

        let unknown_field = r#"{"genus":0,"kind":"polynomial","N":2,"params":[[1,0]],"zzz":3}"#;
        assert!(serde_json::from_str::<CoveringDescriptor>(unknown_field).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"genus":0,"kind":"laurent","N":3,"k":1,"params":[[0.5,0.1],[0.2,-0.3],[1.0,0.4]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(json).unwrap();
        let cov = d.to_covering().unwrap();
        let back = CoveringDescriptor::from_covering(&cov);
        let cov2 = back.to_covering().unwrap();
        let p1 = match &cov {
            Covering::G0(c) => c.params().unwrap(),
            _ => unreachable!(),
        };
        let p2 = match &cov2 {
            Covering::G0(c) => c.params().unwrap(),
            _ => unreachable!(),
        };
        assert_eq!(p1, p2);
    }

    #[test]
    fn phi_designation() {
        let json = r#"{"genus":0,"kind":"laurent","N":2,"k":1,"params":[[0.0,0.0],[1.0,0.0]]}"#;
        let d: CoveringDescriptor = serde_json::from_str(json).unwrap();
        let (_, phi) = parse_with_phi(&d, None).unwrap();
        assert_eq!(phi, PrimaryDifferential::DzOverZ);
        assert!(parse_with_phi(&d, Some("omega")).is_err());
        let (_, phi) = parse_with_phi(&d, Some("dz")).unwrap();
        assert_eq!(phi, PrimaryDifferential::Dz);
    }
}
