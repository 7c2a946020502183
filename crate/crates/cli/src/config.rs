//! TOML run configuration. Every numeric field is optional; [`RunConfig::resolve`]
//! fills in defaults and produces the canonical form echoed into reports.

use std::path::Path;

use hopfforge::{Branch, Domain, Family, PerturbationOrigin, PerturbationPMinus, SolveOptions, VerifyOptions};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_SEEDS: usize = 24;
pub const DEFAULT_SCAN_GRID: usize = 256;
pub const DEFAULT_SCAN_SEEDS: usize = 8;
pub const DEFAULT_OUT: &str = "hopfforge-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Origin,
    PMinus,
    PPlus,
}

/// Raw `[family]` table. Coefficients default to zero.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyInput {
    pub id: Option<String>,
    pub kind: Option<FamilyKind>,
    pub abar0: Option<f64>,
    pub alpha0: Option<f64>,
    pub xi0: Option<f64>,
    pub abar1: Option<f64>,
    pub alpha1: Option<f64>,
    pub xi1: Option<f64>,
    pub abar2: Option<f64>,
    pub alpha2: Option<f64>,
    pub xi2: Option<f64>,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub zeta0: Option<f64>,
    pub zeta1: Option<f64>,
    pub zeta2: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictInput {
    pub grid: Option<usize>,
    pub seeds: Option<usize>,
    pub order: Option<u8>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyInput {
    pub eps: Option<Vec<f64>>,
    pub rtol: Option<f64>,
    pub atol_per_eps: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanInput {
    pub zeta0: Option<Vec<f64>>,
    pub zeta2: Option<Vec<f64>>,
    pub alpha2: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub seeds: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputInput {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<FamilyInput>,
    pub predict: Option<PredictInput>,
    pub verify: Option<VerifyInput>,
    pub scan: Option<ScanInput>,
    pub output: Option<OutputInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginCoefficients {
    pub abar0: f64,
    pub alpha0: f64,
    pub abar1: f64,
    pub alpha1: f64,
    pub abar2: f64,
    pub alpha2: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PCoefficients {
    pub abar0: f64,
    pub alpha0: f64,
    pub xi0: f64,
    pub abar1: f64,
    pub alpha1: f64,
    pub xi1: f64,
    pub alpha2: f64,
    pub xi2: f64,
    pub zeta0: f64,
    pub beta1: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedFamily {
    Origin {
        id: String,
        #[serde(flatten)]
        c: OriginCoefficients,
    },
    PMinus {
        id: String,
        #[serde(flatten)]
        c: PCoefficients,
    },
    PPlus {
        id: String,
        #[serde(flatten)]
        c: PCoefficients,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedPredict {
    pub grid: usize,
    pub seeds: usize,
    pub order: u8,
    pub r_min: f64,
    pub r_max: f64,
    pub w_min: f64,
    pub w_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedVerify {
    pub eps: Vec<f64>,
    pub rtol: f64,
    pub atol_per_eps: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedScan {
    pub zeta0: Vec<f64>,
    pub zeta2: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub grid: usize,
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedOutput {
    pub dir: String,
}

/// Fully defaulted configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<ResolvedFamily>,
    pub predict: ResolvedPredict,
    pub verify: ResolvedVerify,
    pub scan: ResolvedScan,
    pub output: ResolvedOutput,
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let family = self.family.as_ref().map(resolve_family).transpose()?;
        let p = self.predict.clone().unwrap_or_default();
        let d = Domain::<f64>::default();
        let order = match (p.order, &family) {
            (Some(o @ (1 | 2)), _) => o,
            (Some(o), _) => return Err(input(format!("predict.order must be 1 or 2, got {o}"))),
            (None, Some(ResolvedFamily::Origin { .. })) | (None, None) => 1,
            (None, Some(_)) => 2,
        };
        let predict = ResolvedPredict {
            grid: p.grid.unwrap_or(DEFAULT_GRID),
            seeds: p.seeds.unwrap_or(DEFAULT_SEEDS),
            order,
            r_min: p.r_min.unwrap_or(d.r_min),
            r_max: p.r_max.unwrap_or(d.r_max),
            w_min: p.w_min.unwrap_or(d.w_min),
            w_max: p.w_max.unwrap_or(d.w_max),
        };
        let v = self.verify.clone().unwrap_or_default();
        let vd = VerifyOptions::<f64>::default();
        let default_eps = match &family {
            Some(ResolvedFamily::Origin { .. }) | None => vec![0.02, 0.01, 0.005],
            Some(_) => vec![0.05, 0.025],
        };
        let verify = ResolvedVerify {
            eps: v.eps.unwrap_or(default_eps),
            rtol: v.rtol.unwrap_or(vd.rtol),
            atol_per_eps: v.atol_per_eps.unwrap_or(vd.atol_per_eps),
            max_iterations: v.max_iterations.unwrap_or(vd.max_iterations),
        };
        let s = self.scan.clone().unwrap_or_default();
        let scan = ResolvedScan {
            zeta0: s.zeta0.unwrap_or_else(|| vec![-1.0]),
            zeta2: s.zeta2.unwrap_or_else(|| (-13..=5).map(f64::from).collect()),
            alpha2: s.alpha2.unwrap_or_else(|| vec![-7.0, -6.0, -5.0]),
            grid: s.grid.unwrap_or(DEFAULT_SCAN_GRID),
            seeds: s.seeds.unwrap_or(DEFAULT_SCAN_SEEDS),
        };
        let output = ResolvedOutput {
            dir: self
                .output
                .as_ref()
                .and_then(|o| o.dir.clone())
                .unwrap_or_else(|| DEFAULT_OUT.into()),
        };
        let r = Resolved {
            family,
            predict,
            verify,
            scan,
            output,
        };
        r.check()?;
        Ok(r)
    }
}

fn resolve_family(f: &FamilyInput) -> Result<ResolvedFamily, CliError> {
    let kind = f.kind.ok_or_else(|| input("family.kind is required (origin, p_minus or p_plus)"))?;
    let id = f.id.clone().unwrap_or_else(|| "family".into());
    let v = |x: Option<f64>| x.unwrap_or(0.0);
    let origin_only = [("abar2", f.abar2), ("beta0", f.beta0), ("beta2", f.beta2)];
    let p_only = [
        ("xi0", f.xi0),
        ("xi1", f.xi1),
        ("xi2", f.xi2),
        ("zeta0", f.zeta0),
        ("zeta1", f.zeta1),
        ("zeta2", f.zeta2),
    ];
    fn stray(keys: &[(&'static str, Option<f64>)]) -> Option<&'static str> {
        keys.iter().find(|(_, x)| x.is_some()).map(|(k, _)| *k)
    }
    match kind {
        FamilyKind::Origin => {
            if let Some(k) = stray(&p_only) {
                return Err(input(format!("family.{k} does not apply to an origin family")));
            }
            Ok(ResolvedFamily::Origin {
                id,
                c: OriginCoefficients {
                    abar0: v(f.abar0),
                    alpha0: v(f.alpha0),
                    abar1: v(f.abar1),
                    alpha1: v(f.alpha1),
                    abar2: v(f.abar2),
                    alpha2: v(f.alpha2),
                    beta0: v(f.beta0),
                    beta1: v(f.beta1),
                    beta2: v(f.beta2),
                    omega: v(f.omega),
                },
            })
        }
        FamilyKind::PMinus | FamilyKind::PPlus => {
            if let Some(k) = stray(&origin_only) {
                return Err(input(format!("family.{k} does not apply to a p_minus/p_plus family")));
            }
            let c = PCoefficients {
                abar0: v(f.abar0),
                alpha0: v(f.alpha0),
                xi0: v(f.xi0),
                abar1: v(f.abar1),
                alpha1: v(f.alpha1),
                xi1: v(f.xi1),
                alpha2: v(f.alpha2),
                xi2: v(f.xi2),
                zeta0: v(f.zeta0),
                beta1: v(f.beta1),
                zeta1: v(f.zeta1),
                zeta2: v(f.zeta2),
                omega: v(f.omega),
            };
            Ok(if kind == FamilyKind::PMinus {
                ResolvedFamily::PMinus { id, c }
            } else {
                ResolvedFamily::PPlus { id, c }
            })
        }
    }
}

impl ResolvedFamily {
    pub fn id(&self) -> &str {
        match self {
            Self::Origin { id, .. } | Self::PMinus { id, .. } | Self::PPlus { id, .. } => id,
        }
    }

    pub fn family(&self) -> Family<f64> {
        match self {
            Self::Origin { c, .. } => Family::Origin(PerturbationOrigin {
                abar0: c.abar0,
                alpha0: c.alpha0,
                abar1: c.abar1,
                alpha1: c.alpha1,
                abar2: c.abar2,
                alpha2: c.alpha2,
                beta0: c.beta0,
                beta1: c.beta1,
                beta2: c.beta2,
                omega: c.omega,
            }),
            Self::PMinus { c, .. } => Family::PMinus(p_family(c, Branch::Minus)),
            Self::PPlus { c, .. } => Family::PMinus(p_family(c, Branch::Plus)),
        }
    }
}

pub fn p_family(c: &PCoefficients, branch: Branch) -> PerturbationPMinus<f64> {
    PerturbationPMinus {
        abar0: c.abar0,
        alpha0: c.alpha0,
        xi0: c.xi0,
        abar1: c.abar1,
        alpha1: c.alpha1,
        xi1: c.xi1,
        alpha2: c.alpha2,
        xi2: c.xi2,
        zeta0: c.zeta0,
        beta1: c.beta1,
        zeta1: c.zeta1,
        zeta2: c.zeta2,
        omega: c.omega,
        branch,
    }
}

impl Resolved {
    fn check(&self) -> Result<(), CliError> {
        let finite = |name: &str, xs: &[f64]| {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(input(format!("{name} must be finite")))
            }
        };
        let p = &self.predict;
        finite("predict domain", &[p.r_min, p.r_max, p.w_min, p.w_max])?;
        if p.seeds == 0 {
            return Err(input("predict.seeds must be positive"));
        }
        let v = &self.verify;
        finite("verify.eps", &v.eps)?;
        if v.eps.is_empty() || v.eps.iter().any(|e| *e <= 0.0) || v.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(input("verify.eps must be a non-empty, strictly decreasing list of positive values"));
        }
        if !(v.rtol > 0.0 && v.atol_per_eps > 0.0) {
            return Err(input("verify tolerances must be positive"));
        }
        if v.max_iterations == 0 {
            return Err(input("verify.max_iterations must be positive"));
        }
        let s = &self.scan;
        finite("scan axes", &[s.zeta0.as_slice(), &s.zeta2, &s.alpha2].concat())?;
        if s.seeds == 0 {
            return Err(input("scan.seeds must be positive"));
        }
        if let Some(f) = &self.family {
            let c: Vec<f64> = match f {
                ResolvedFamily::Origin { c, .. } => vec![c.abar0, c.alpha0, c.abar1, c.alpha1, c.abar2, c.alpha2, c.beta0, c.beta1, c.beta2, c.omega],
                ResolvedFamily::PMinus { c, .. } | ResolvedFamily::PPlus { c, .. } => vec![
                    c.abar0, c.alpha0, c.xi0, c.abar1, c.alpha1, c.xi1, c.alpha2, c.xi2, c.zeta0, c.beta1,
                    c.zeta1, c.zeta2, c.omega,
                ],
            };
            finite("family coefficients", &c)?;
        }
        Ok(())
    }

    /// Canonical TOML text; parsing it back resolves to the same value.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }

    pub fn solve_options(&self) -> SolveOptions<f64> {
        let p = &self.predict;
        SolveOptions {
            domain: Domain {
                r_min: p.r_min,
                r_max: p.r_max,
                w_min: p.w_min,
                w_max: p.w_max,
            },
            seeds: p.seeds,
            grid: p.grid,
        }
    }

    pub fn verify_options(&self) -> VerifyOptions<f64> {
        VerifyOptions {
            rtol: self.verify.rtol,
            atol_per_eps: self.verify.atol_per_eps,
            max_iterations: self.verify.max_iterations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORIGIN: &str = r#"
[family]
id = "bench"
kind = "origin"
abar0 = 1.0
abar2 = 1.0
beta0 = 2
beta2 = 1
omega = 2.0

[verify]
eps = [0.02, 0.01, 0.005]
"#;

    #[test]
    fn canonical_round_trip() {
        let r = RunConfig::parse(ORIGIN).unwrap().resolve().unwrap();
        let text = r.canonical();
        let again = RunConfig::parse(&text).unwrap().resolve().unwrap();
        assert_eq!(r, again);
        assert_eq!(text, again.canonical());
        assert_eq!(r.predict.order, 1);
    }

    #[test]
    fn p_defaults() {
        let r = RunConfig::parse("[family]\nkind = \"p_minus\"\nabar0 = 1\nabar1 = 1\nzeta0 = -1\nomega = 2")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(r.predict.order, 2);
        assert_eq!(r.verify.eps, vec![0.05, 0.025]);
        let again = RunConfig::parse(&r.canonical()).unwrap().resolve().unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "[family]\nkind = \"origin\"\nzeta0 = 1",
            "[family]\nkind = \"p_minus\"\nbeta0 = 1",
            "[family]\nabar0 = 1",
            "[verify]\neps = [0.01, 0.02]",
            "[verify]\neps = []",
            "[predict]\norder = 3",
            "[predict]\nseeds = 0",
            "[bogus]\nx = 1",
            "[family]\nkind = \"origin\"\nomega = nan",
        ] {
            let r = RunConfig::parse(bad).and_then(|c| c.resolve());
            assert!(matches!(r, Err(CliError::Input(_))), "{bad}");
        }
    }
}
