//! On-disk formats: group files, family files and reports.

use std::path::Path;

use fcgroup::analysis::{closure, Subgroup};
use fcgroup::combinat::SetFamily;
use fcgroup::constructions::{BlockStructure, TreeGroup};
use fcgroup::fpspace::span_reduce;
use fcgroup::{BilinearMap, FactorSystem, FormGroup, FpVec, GroupElement, Limits, Subspace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// A group `E(tau)` with its strictly upper-triangular `tau` stored as
/// sparse `(i, j, coefficients)` triples, sorted by `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<String>,
    pub p: u32,
    pub gen_dim: usize,
    pub cen_dim: usize,
    pub tau: Vec<(usize, usize, Vec<u32>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockStructure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyAnnotation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subgroups: Vec<NamedSubgroup>,
}

/// Which generators are probes and which realize the family's sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyAnnotation {
    pub family: SetFamily,
    pub base_gen_dim: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSubgroup {
    pub name: String,
    #[serde(flatten)]
    pub spec: SubgroupSpec,
}

/// Subspace pairs hold reduced row-echelon bases; element lists hold sorted
/// `(v, w)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubgroupSpec {
    Pair {
        gens: Vec<Vec<u32>>,
        central: Vec<Vec<u32>>,
    },
    Elements {
        elements: Vec<(Vec<u32>, Vec<u32>)>,
    },
}

pub fn rows(s: &Subspace) -> Vec<Vec<u32>> {
    s.basis().iter().map(|v| v.coords().to_vec()).collect()
}

pub fn element_json(x: &GroupElement) -> (Vec<u32>, Vec<u32>) {
    (x.v.coords().to_vec(), x.w.coords().to_vec())
}

pub fn subgroup_spec(s: &Subgroup) -> SubgroupSpec {
    match s {
        Subgroup::Pair { gens, central } => SubgroupSpec::Pair {
            gens: rows(gens),
            central: rows(central),
        },
        Subgroup::Generated { elements } => SubgroupSpec::Elements {
            elements: elements.iter().map(element_json).collect(),
        },
    }
}

fn malformed(detail: impl Into<String>) -> CliError {
    CliError::input("malformed input", detail)
}

fn vector(p: u32, len: usize, coords: &[u32], what: &str) -> Result<FpVec, CliError> {
    if coords.len() != len {
        return Err(malformed(format!(
            "{what}: expected {len} coordinates, found {}",
            coords.len()
        )));
    }
    if let Some(c) = coords.iter().find(|&&c| c >= p) {
        return Err(malformed(format!(
            "{what}: coordinate {c} is not reduced mod {p}"
        )));
    }
    Ok(FpVec::new(p, coords.to_vec()))
}

fn echelon(p: u32, n: usize, given: &[Vec<u32>], what: &str) -> Result<Subspace, CliError> {
    let vs = given
        .iter()
        .map(|r| vector(p, n, r, what))
        .collect::<Result<Vec<_>, _>>()?;
    let s = span_reduce(p, n, &vs)?;
    if rows(&s) != given {
        return Err(malformed(format!(
            "{what}: rows are not a reduced echelon basis"
        )));
    }
    Ok(s)
}

impl GroupFile {
    pub fn from_group(g: &FormGroup, construction: Option<String>) -> GroupFile {
        let n = g.gen_dim();
        let mut tau = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let c = g.tau().get(i, j);
                if !c.is_zero() {
                    tau.push((i, j, c.coords().to_vec()));
                }
            }
        }
        GroupFile {
            format_version: FORMAT_VERSION,
            construction,
            p: g.p(),
            gen_dim: n,
            cen_dim: g.cen_dim(),
            tau,
            blocks: None,
            family: None,
            subgroups: Vec::new(),
        }
    }

    pub fn from_tree(t: &TreeGroup, construction: Option<String>) -> GroupFile {
        GroupFile {
            blocks: Some(t.blocks.clone()),
            ..GroupFile::from_group(&t.group, construction)
        }
    }

    pub fn group(&self) -> Result<FormGroup, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(malformed(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        let (p, n, m) = (self.p, self.gen_dim, self.cen_dim);
        let mut tau = BilinearMap::zero(p, n, m);
        let mut last: Option<(usize, usize)> = None;
        for (i, j, c) in &self.tau {
            let (i, j) = (*i, *j);
            if i >= j || j >= n {
                return Err(malformed(format!("tau entry ({i}, {j}) needs i < j < {n}")));
            }
            if last.is_some_and(|l| l >= (i, j)) {
                return Err(malformed(format!(
                    "tau entry ({i}, {j}) is out of order or repeated"
                )));
            }
            let v = vector(p, m, c, &format!("tau entry ({i}, {j})"))?;
            if v.is_zero() {
                return Err(malformed(format!("tau entry ({i}, {j}) is zero")));
            }
            tau.set(i, j, v);
            last = Some((i, j));
        }
        Ok(FormGroup::new(FactorSystem::new(tau))?)
    }

    pub fn tree_group(&self) -> Result<TreeGroup, CliError> {
        let blocks = self.blocks.clone().ok_or_else(|| {
            CliError::input("missing block structure", "the group file has no blocks")
        })?;
        Ok(TreeGroup::new(self.group()?, blocks)?)
    }

    /// The named subgroups, each checked to be a subgroup of `g`.
    pub fn named_subgroups(
        &self,
        g: &FormGroup,
        limits: &Limits,
    ) -> Result<Vec<(String, Subgroup)>, CliError> {
        let (p, n, m) = (g.p(), g.gen_dim(), g.cen_dim());
        let mut out = Vec::new();
        for s in &self.subgroups {
            let what = format!("subgroup {}", s.name);
            let sub = match &s.spec {
                SubgroupSpec::Pair { gens, central } => Subgroup::pair(
                    g,
                    echelon(p, n, gens, &what)?,
                    echelon(p, m, central, &what)?,
                )?,
                SubgroupSpec::Elements { elements } => {
                    let els = elements
                        .iter()
                        .map(|(v, w)| {
                            Ok(GroupElement {
                                v: vector(p, n, v, &what)?,
                                w: vector(p, m, w, &what)?,
                            })
                        })
                        .collect::<Result<Vec<_>, CliError>>()?;
                    if els.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(malformed(format!(
                            "{what}: elements must be sorted and distinct"
                        )));
                    }
                    let closed = closure(g, &els, limits)?;
                    if closed.order() != els.len() as u64 {
                        return Err(malformed(format!(
                            "{what}: elements do not form a subgroup"
                        )));
                    }
                    Subgroup::Generated { elements: els }
                }
            };
            out.push((s.name.clone(), sub));
        }
        Ok(out)
    }

    /// Parses, validates and checks that re-serializing gives the same value.
    pub fn parse(text: &str) -> Result<GroupFile, CliError> {
        let f: GroupFile = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
        let g = f.group()?;
        if let Some(b) = &f.blocks {
            TreeGroup::new(g.clone(), b.clone())?;
        }
        if let Some(a) = &f.family {
            if a.base_gen_dim > g.gen_dim() || a.target >= g.cen_dim() {
                return Err(malformed("family annotation does not fit the group"));
            }
        }
        f.named_subgroups(&g, &Limits::default())?;
        Ok(f)
    }
}

/// Pretty JSON with a trailing newline; the same value always gives the
/// same bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn read_input(path: &Path) -> Result<(String, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            CliError::input("no such input", path.display().to_string())
        }
        _ => CliError::input("unreadable input", format!("{}: {e}", path.display())),
    })?;
    let digest = hex(&Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| malformed(format!("{}: not UTF-8", path.display())))?;
    Ok((text, digest))
}

pub fn parse_family(text: &str) -> Result<SetFamily, CliError> {
    serde_json::from_str(text).map_err(|e| malformed(e.to_string()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// The record written by every analysis command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub format_version: u32,
    pub command: String,
    pub args: Vec<String>,
    pub input_sha256: Option<String>,
    pub seed: Option<u64>,
    pub exact: bool,
    pub results: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}
