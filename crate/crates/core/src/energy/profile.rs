//! Per-operation and per-bit energy constants for one technology scenario.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, int, ratio, Rational};

/// Accumulate/compare/subtract cost shared by the built-in profiles (22 nm).
pub const BASE_OP_PJ: &str = "0.05448";

/// Largest activation and weight width the generated default tables cover.
pub const TABLE_MAX_BITS: u32 = 16;

/// Energy constants in picojoules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareProfile {
    pub name: String,
    pub e_acc: Rational,
    pub e_cmp: Rational,
    pub e_sub: Rational,
    /// `(activation_bits, weight_bits) → pJ per MAC`.
    pub e_mac: BTreeMap<(u32, u32), Rational>,
    /// `weight_bits → pJ per weight access`.
    pub e_weight: BTreeMap<u32, Rational>,
    /// Dense movement cost per bit.
    pub e_move_dense: Rational,
    /// Sparse (event) movement cost per bit.
    pub e_move_sparse: Rational,
}

impl HardwareProfile {
    pub fn mac(&self, activation_bits: u32, weight_bits: u32) -> Result<&Rational> {
        self.e_mac
            .get(&(activation_bits, weight_bits))
            .ok_or_else(|| Error::MissingMac {
                profile: self.name.clone(),
                activation_bits,
                weight_bits,
            })
    }

    pub fn weight(&self, weight_bits: u32) -> Result<&Rational> {
        self.e_weight.get(&weight_bits).ok_or_else(|| Error::MissingWeight {
            profile: self.name.clone(),
            weight_bits,
        })
    }

    /// Rejects negative energies.
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("e_acc", &self.e_acc),
            ("e_cmp", &self.e_cmp),
            ("e_sub", &self.e_sub),
            ("e_move_dense", &self.e_move_dense),
            ("e_move_sparse", &self.e_move_sparse),
        ];
        for (field, value) in scalars {
            if value.is_negative() {
                return Err(Error::Config(format!("profile '{}': {field} is negative", self.name)));
            }
        }
        if let Some(((a, w), _)) = self.e_mac.iter().find(|(_, v)| v.is_negative()) {
            return Err(Error::Config(format!(
                "profile '{}': e_mac({a}, {w}) is negative",
                self.name
            )));
        }
        if let Some((w, _)) = self.e_weight.iter().find(|(_, v)| v.is_negative()) {
            return Err(Error::Config(format!(
                "profile '{}': e_weight({w}) is negative",
                self.name
            )));
        }
        Ok(())
    }

    /// Non-fatal oddities, e.g. sparse movement cheaper than dense.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.e_move_sparse < self.e_move_dense {
            out.push(format!(
                "profile '{}': sparse movement ({} pJ/bit) is cheaper than dense ({} pJ/bit)",
                self.name,
                rational::to_decimal_string(&self.e_move_sparse),
                rational::to_decimal_string(&self.e_move_dense)
            ));
        }
        out
    }

    /// `k = E_MAC / E_ACC` for one bit-width pair.
    pub fn mac_ratio(&self, activation_bits: u32, weight_bits: u32) -> Result<Rational> {
        if self.e_acc.is_zero() {
            return Err(Error::Domain("k is undefined when E_ACC = 0".into()));
        }
        Ok(self.mac(activation_bits, weight_bits)? / &self.e_acc)
    }

    /// Regenerates the MAC table with the product model at a new scale.
    pub fn with_mac_scale(mut self, k_per_bit_product: &Rational) -> Self {
        self.e_mac = product_mac_table(&self.e_acc, k_per_bit_product);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDocument =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid profile JSON: {e}")))?;
        doc.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProfileDocument::from(self)).expect("profile serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read profile {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Placeholder MAC model, not a measured curve: `E_MAC(a, w) = E_ACC · c · a · w`,
/// so `k = c·a·w` grows with the multiplier's partial-product count.
pub fn product_mac_table(e_acc: &Rational, k_per_bit_product: &Rational) -> BTreeMap<(u32, u32), Rational> {
    let mut table = BTreeMap::new();
    for a in 1..=TABLE_MAX_BITS {
        for w in 1..=TABLE_MAX_BITS {
            table.insert((a, w), e_acc * k_per_bit_product * int(i64::from(a * w)));
        }
    }
    table
}

/// Default `c` for [`product_mac_table`]: `k = 6` at 3-bit activations and 8-bit weights.
pub fn default_mac_scale() -> Rational {
    ratio(1, 4)
}

/// Weight access cost: a fixed access overhead plus a per-bit term,
/// `0.09 + 0.01125·w` pJ (0.18 pJ at 8 bits, 0.135 pJ at 4 bits).
pub fn default_weight_table() -> BTreeMap<u32, Rational> {
    (1..=TABLE_MAX_BITS)
        .map(|w| (w, ratio(9, 100) + ratio(1125, 100_000) * int(i64::from(w))))
        .collect()
}

fn preset(name: &str, sparse: Rational, dense: Rational) -> HardwareProfile {
    let base = rational::parse_decimal(BASE_OP_PJ).expect("constant parses");
    HardwareProfile {
        name: name.to_string(),
        e_mac: product_mac_table(&base, &default_mac_scale()),
        e_weight: default_weight_table(),
        e_acc: base.clone(),
        e_cmp: base.clone(),
        e_sub: base,
        e_move_dense: dense,
        e_move_sparse: sparse,
    }
}

pub const PRESET_NAMES: [&str; 3] = ["theoretical-min", "typical-neuromorphic", "worst-sparse"];

/// Built-in profiles by name.
pub fn builtin(name: &str) -> Option<HardwareProfile> {
    match name {
        "theoretical-min" => Some(preset(name, Rational::zero(), Rational::zero())),
        "typical-neuromorphic" => Some(preset(name, int(3), ratio(1, 4))),
        // One 64-bit DRAM word (1300 pJ) per spike; dense amortizes it over 64 bits.
        "worst-sparse" => Some(preset(name, int(1300), ratio(1300, 64))),
        _ => None,
    }
}

pub fn builtins() -> Vec<HardwareProfile> {
    PRESET_NAMES.iter().map(|n| builtin(n).expect("known preset")).collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MacEntry {
    activation_bits: u32,
    weight_bits: u32,
    #[serde(with = "rational::decimal")]
    pj: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightEntry {
    weight_bits: u32,
    #[serde(with = "rational::decimal")]
    pj: Rational,
}

/// On-disk JSON layout.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDocument {
    name: String,
    #[serde(with = "rational::decimal")]
    e_acc: Rational,
    #[serde(with = "rational::decimal")]
    e_cmp: Rational,
    #[serde(with = "rational::decimal")]
    e_sub: Rational,
    e_mac: Vec<MacEntry>,
    e_weight: Vec<WeightEntry>,
    #[serde(with = "rational::decimal")]
    e_move_dense: Rational,
    #[serde(with = "rational::decimal")]
    e_move_sparse: Rational,
}

impl From<&HardwareProfile> for ProfileDocument {
    fn from(p: &HardwareProfile) -> Self {
        Self {
            name: p.name.clone(),
            e_acc: p.e_acc.clone(),
            e_cmp: p.e_cmp.clone(),
            e_sub: p.e_sub.clone(),
            e_mac: p
                .e_mac
                .iter()
                .map(|(&(activation_bits, weight_bits), pj)| MacEntry {
                    activation_bits,
                    weight_bits,
                    pj: pj.clone(),
                })
                .collect(),
            e_weight: p
                .e_weight
                .iter()
                .map(|(&weight_bits, pj)| WeightEntry {
                    weight_bits,
                    pj: pj.clone(),
                })
                .collect(),
            e_move_dense: p.e_move_dense.clone(),
            e_move_sparse: p.e_move_sparse.clone(),
        }
    }
}

impl TryFrom<ProfileDocument> for HardwareProfile {
    type Error = Error;

    fn try_from(doc: ProfileDocument) -> Result<Self> {
        let mut e_mac = BTreeMap::new();
        for entry in doc.e_mac {
            let key = (entry.activation_bits, entry.weight_bits);
            if e_mac.insert(key, entry.pj).is_some() {
                return Err(Error::Config(format!("duplicate e_mac entry for {key:?}")));
            }
        }
        let mut e_weight = BTreeMap::new();
        for entry in doc.e_weight {
            if e_weight.insert(entry.weight_bits, entry.pj).is_some() {
                return Err(Error::Config(format!(
                    "duplicate e_weight entry for weight_bits={}",
                    entry.weight_bits
                )));
            }
        }
        let profile = HardwareProfile {
            name: doc.name,
            e_acc: doc.e_acc,
            e_cmp: doc.e_cmp,
            e_sub: doc.e_sub,
            e_mac,
            e_weight,
            e_move_dense: doc.e_move_dense,
            e_move_sparse: doc.e_move_sparse,
        };
        profile.validate()?;
        Ok(profile)
    }
}
