//! The on-disk instance format: JSON with exact rational strings, so a
//! parse/emit round trip loses nothing.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::matrix::{Basis, RatMat};
use crate::norm::{Magnitude, NormOrder};
use crate::numerics::RankRatio;
use crate::rat::{format_rat, parse_rat};
use crate::reductions::{BddInstance, GapCvpInstance, SBound, StBddInstance, StBddMeta};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RadiusField {
    Plain(String),
    PthPower { pth_power: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub kind: String,
    pub p: String,
    /// Row-major: one inner array per ambient-space row.
    pub basis: Vec<Vec<String>>,
    pub target: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<RadiusField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl InstanceFile {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn norm_order(&self) -> Result<NormOrder> {
        NormOrder::parse(&self.p)
    }

    pub fn parsed_basis(&self) -> Result<Basis> {
        let rows: Result<Vec<Vec<BigRational>>> = self
            .basis
            .iter()
            .map(|row| row.iter().map(|s| parse_rat(s)).collect())
            .collect();
        Basis::new(RatMat::from_rows(rows?)?)
    }

    pub fn parsed_target(&self) -> Result<Vec<BigRational>> {
        self.target.iter().map(|s| parse_rat(s)).collect()
    }

    pub fn parsed_radius(&self, p: &NormOrder) -> Result<Magnitude> {
        match &self.r {
            None => Err(Error::Parse("instance has no radius field".into())),
            Some(RadiusField::Plain(s)) => Magnitude::from_radius(&parse_rat(s)?, p),
            Some(RadiusField::PthPower { pth_power }) => {
                Magnitude::from_pth_power(&parse_rat(pth_power)?, p)
            }
        }
    }

    pub fn parsed_alpha(&self) -> Result<BigRational> {
        match &self.alpha {
            None => Err(Error::Parse("instance has no alpha field".into())),
            Some(s) => parse_rat(s),
        }
    }

    pub fn as_gapcvp(&self) -> Result<GapCvpInstance> {
        if self.kind != "gapcvp" {
            return Err(Error::Parse(format!("expected kind gapcvp, got {:?}", self.kind)));
        }
        let p = self.norm_order()?;
        let basis = self.parsed_basis()?;
        let target = self.parsed_target()?;
        if target.len() != basis.dim() {
            return Err(Error::Dimension("target length != basis rows".into()));
        }
        Ok(GapCvpInstance { p, basis, target })
    }

    pub fn as_bdd(&self) -> Result<BddInstance> {
        if self.kind != "bdd" {
            return Err(Error::Parse(format!("expected kind bdd, got {:?}", self.kind)));
        }
        let p = self.norm_order()?;
        let basis = self.parsed_basis()?;
        let target = self.parsed_target()?;
        if target.len() != basis.dim() {
            return Err(Error::Dimension("target length != basis rows".into()));
        }
        Ok(BddInstance { p, basis, target, alpha: self.parsed_alpha()? })
    }

    pub fn as_stbdd(&self) -> Result<StBddInstance> {
        if self.kind != "stbdd" {
            return Err(Error::Parse(format!("expected kind stbdd, got {:?}", self.kind)));
        }
        let p = self.norm_order()?;
        let basis = self.parsed_basis()?;
        let target = self.parsed_target()?;
        if target.len() != basis.dim() {
            return Err(Error::Dimension("target length != basis rows".into()));
        }
        let r = self.parsed_radius(&p)?;
        let alpha = self.parsed_alpha()?;
        let meta = self
            .meta
            .as_ref()
            .ok_or_else(|| Error::Parse("stbdd instance needs a meta object".into()))?;
        let get_u64 = |key: &str| -> Result<u64> {
            meta.get(key)
                .and_then(|v| v.as_u64())
                .ok_or_else(|| Error::Parse(format!("meta.{key} missing or not an integer")))
        };
        let c = match meta.get("c") {
            Some(serde_json::Value::String(s)) => RankRatio::parse(s)?,
            Some(v) => RankRatio::parse(&v.to_string())?,
            None => return Err(Error::Parse("meta.c missing".into())),
        };
        Ok(StBddInstance {
            p,
            basis,
            r,
            target,
            alpha,
            meta: StBddMeta {
                s_bound: SBound::Exact(get_u64("s_bound")?),
                t_count: get_u64("t_count")?,
                n_prime: get_u64("n_prime")? as usize,
                c,
            },
        })
    }
}

fn basis_strings(b: &Basis) -> Vec<Vec<String>> {
    (0..b.dim())
        .map(|i| (0..b.rank()).map(|j| format_rat(b.matrix().get(i, j))).collect())
        .collect()
}

fn target_strings(t: &[BigRational]) -> Vec<String> {
    t.iter().map(format_rat).collect()
}

/// Exact radius encoding: plain rational for the sup norm, otherwise the
/// rational p-th power. Fails if the p-th power is irrational (fractional
/// p with an incommensurate radius), which no pipeline output produces.
fn radius_field(r: &Magnitude) -> Result<RadiusField> {
    match r {
        Magnitude::Sup(v) => Ok(RadiusField::Plain(format_rat(v))),
        Magnitude::PthPower { .. } => match r.pth_power_rational() {
            Some(q) => Ok(RadiusField::PthPower { pth_power: format_rat(&q) }),
            None => Err(Error::Constraint(
                "radius has an irrational p-th power and cannot be serialized exactly".into(),
            )),
        },
    }
}

pub fn gapcvp_to_file(inst: &GapCvpInstance) -> InstanceFile {
    InstanceFile {
        kind: "gapcvp".into(),
        p: inst.p.to_string(),
        basis: basis_strings(&inst.basis),
        target: target_strings(&inst.target),
        r: None,
        alpha: None,
        meta: None,
    }
}

pub fn stbdd_to_file(inst: &StBddInstance) -> Result<InstanceFile> {
    let s_bound = match &inst.meta.s_bound {
        SBound::Exact(s) => serde_json::json!(s),
        SBound::MoBound(b) => serde_json::json!({ "mo_bound": b }),
    };
    Ok(InstanceFile {
        kind: "stbdd".into(),
        p: inst.p.to_string(),
        basis: basis_strings(&inst.basis),
        target: target_strings(&inst.target),
        r: Some(radius_field(&inst.r)?),
        alpha: Some(format_rat(&inst.alpha)),
        meta: Some(serde_json::json!({
            "s_bound": s_bound,
            "t_count": inst.meta.t_count,
            "n_prime": inst.meta.n_prime,
            "c": inst.meta.c.to_string(),
        })),
    })
}

pub fn bdd_to_file(inst: &BddInstance, meta: Option<serde_json::Value>) -> InstanceFile {
    InstanceFile {
        kind: "bdd".into(),
        p: inst.p.to_string(),
        basis: basis_strings(&inst.basis),
        target: target_strings(&inst.target),
        r: None,
        alpha: Some(format_rat(&inst.alpha)),
        meta,
    }
}
