//! TOML run configuration.
//!
//! ```toml
//! dimension = 1
//! domain = [0.0, 5.0]
//! M = [320, 640]          # a single value or a ladder
//! N = [32, 64]
//! t0 = 0.0
//! T = 3.0
//!
//! [isotherm]
//! a = 1.0
//! p = 0.5
//!
//! [scheme]
//! name = "hires_weno"     # explicit1 | explicit2 | implicit1 | compact2 | hires_weno
//!
//! [velocity]
//! kind = "constant"       # constant | cosine | rotation2d | tabulated
//! value = 1.0
//!
//! [ic]
//! kind = "step"           # step | exact_step | gauss4 | gauss4_planar | constant
//!
//! [bc]
//! left = { kind = "dirichlet", value = 0.0 }
//! right = { kind = "outflow" }
//!
//! [reference]
//! kind = "exact"          # exact | oracle (with refine) | none
//! ```
//!
//! Unknown keys are rejected. Parsing collects every violated constraint
//! instead of stopping at the first.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::experiments::Reference;
use crate::isotherm::{IsothermSpec, NewtonConfig};
use crate::scheme::{LimiterMode, Scheme, SchemeConfig};
use crate::setup::{BoundaryKind, BoundarySpec, Dimension, InitialCondition, RunSpec};
use crate::velocity::VelocityField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: u8,
    pub domain: [f64; 2],
    #[serde(rename = "M")]
    pub cells: Ladder,
    #[serde(rename = "N")]
    pub steps: Ladder,
    pub t0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub isotherm: IsothermSection,
    pub scheme: SchemeSection,
    pub velocity: VelocitySection,
    pub ic: IcSection,
    pub bc: BcSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// One resolution or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ladder {
    One(usize),
    Many(Vec<usize>),
}

impl Ladder {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Self::One(v) => vec![*v],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsothermSection {
    #[serde(default = "one")]
    pub a: f64,
    pub p: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Explicit1,
    Explicit2,
    Implicit1,
    Compact2,
    HiresWeno,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimiterName {
    #[default]
    Local,
    Frozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = SchemeConfig::new(Scheme::Implicit1);
        Self {
            tol: d.sweep_tol,
            max_sweeps: d.max_sweeps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub name: SchemeName,
    /// Fixed blend of `compact2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default = "default_weno_eps")]
    pub weno_eps: f64,
    #[serde(default = "default_passes")]
    pub corrector_passes: usize,
    #[serde(default)]
    pub limiter: LimiterName,
    #[serde(default)]
    pub force_first_order: bool,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub sweep: SweepSection,
}

fn default_weno_eps() -> f64 {
    SchemeConfig::new(Scheme::HiresWeno).weno_eps
}

fn default_passes() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySection {
    Constant {
        value: f64,
        /// Vertical component in 2D.
        #[serde(default)]
        w: f64,
    },
    Cosine {},
    Rotation2d {},
    Tabulated {
        x: Vec<f64>,
        v: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IcSection {
    Step {},
    ExactStep {},
    Gauss4 {},
    Gauss4Planar {},
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BcSide {
    Dirichlet { value: f64 },
    Outflow {},
    Exact {},
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSection {
    pub left: BcSide,
    pub right: BcSide,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bottom: Option<BcSide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<BcSide>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceSection {
    Exact {},
    Oracle {
        #[serde(default = "default_refine")]
        refine: usize,
    },
    None {},
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self::None {}
    }
}

fn default_refine() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<String> {
    vec!["csv".into()]
}

/// Why a configuration was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed TOML or a wrong key or type.
    Syntax { line: Option<usize>, message: String },
    /// Well-formed but violating constraints; all of them are listed.
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax {
                line: Some(l),
                message,
            } => write!(f, "syntax error at line {l}: {message}"),
            Self::Syntax { line: None, message } => write!(f, "syntax error: {message}"),
            Self::Invalid(v) => {
                write!(f, "{} invalid setting(s):", v.len())?;
                for m in v {
                    write!(f, "\n  - {m}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validated configuration turned into solver inputs.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub spec: RunSpec,
    pub ladder: Vec<(usize, usize)>,
    pub reference: Reference,
    pub output_dir: Option<String>,
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(v))
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn dimension(&self) -> Option<Dimension> {
        match self.dimension {
            1 => Some(Dimension::One),
            2 => Some(Dimension::Two),
            _ => None,
        }
    }

    fn scheme_config(&self) -> SchemeConfig {
        let s = &self.scheme;
        let scheme = match s.name {
            SchemeName::Explicit1 => Scheme::Explicit1,
            SchemeName::Explicit2 => Scheme::Explicit2,
            SchemeName::Implicit1 => Scheme::Implicit1,
            SchemeName::Compact2 => Scheme::Compact2 {
                omega: s.omega.unwrap_or(0.5),
            },
            SchemeName::HiresWeno => Scheme::HiresWeno,
        };
        let mut c = SchemeConfig::new(scheme);
        c.newton = s.newton;
        c.sweep_tol = s.sweep.tol;
        c.max_sweeps = s.sweep.max_sweeps;
        c.weno_eps = s.weno_eps;
        c.corrector_passes = s.corrector_passes;
        c.force_first_order = s.force_first_order;
        c.limiter_mode = match s.limiter {
            LimiterName::Local => LimiterMode::Local,
            LimiterName::Frozen => LimiterMode::Frozen,
        };
        c
    }

    fn velocity_field(&self) -> VelocityField {
        match &self.velocity {
            VelocitySection::Constant { value, w } => VelocityField::Constant { v: *value, w: *w },
            VelocitySection::Cosine {} => VelocityField::Cosine,
            VelocitySection::Rotation2d {} => VelocityField::Rotation2D,
            VelocitySection::Tabulated { x, v } => VelocityField::Tabulated {
                x: x.clone(),
                v: v.clone(),
            },
        }
    }

    fn run_spec(&self, dimension: Dimension) -> RunSpec {
        let side = |b: BcSide| match b {
            BcSide::Dirichlet { value } => BoundaryKind::Dirichlet(value),
            BcSide::Outflow {} => BoundaryKind::Outflow,
            BcSide::Exact {} => BoundaryKind::Exact,
        };
        let b = &self.bc;
        let bc = match (b.bottom, b.top) {
            (Some(bottom), Some(top)) => BoundarySpec::TwoD {
                left: side(b.left),
                right: side(b.right),
                bottom: side(bottom),
                top: side(top),
            },
            _ => BoundarySpec::OneD {
                left: side(b.left),
                right: side(b.right),
            },
        };
        RunSpec {
            dimension,
            domain: (self.domain[0], self.domain[1]),
            t0: self.t0,
            t_end: self.t_end,
            iso: IsothermSpec {
                a: self.isotherm.a,
                p: self.isotherm.p,
            },
            velocity: self.velocity_field(),
            ic: match self.ic {
                IcSection::Step {} => InitialCondition::Step,
                IcSection::ExactStep {} => InitialCondition::ExactStep,
                IcSection::Gauss4 {} => InitialCondition::Gauss4,
                IcSection::Gauss4Planar {} => InitialCondition::Gauss4Planar,
                IcSection::Constant { value } => InitialCondition::Constant(value),
            },
            bc,
            scheme: self.scheme_config(),
        }
    }

    fn reference(&self) -> Reference {
        match self.reference {
            ReferenceSection::Exact {} => Reference::Exact,
            ReferenceSection::Oracle { refine } => Reference::Oracle { refine },
            ReferenceSection::None {} => Reference::None,
        }
    }

    /// Every violated constraint, each naming its key.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let dim = self.dimension();
        if dim.is_none() {
            out.push(format!("dimension must be 1 or 2, got {}", self.dimension));
        }
        let (ms, ns) = (self.cells.values(), self.steps.values());
        if ms.is_empty() {
            out.push("M must list at least one resolution".into());
        }
        if ms.len() != ns.len() {
            out.push(format!(
                "M and N must have the same length ({} vs {})",
                ms.len(),
                ns.len()
            ));
        }
        if ms.contains(&0) {
            out.push("M must be >= 1".into());
        }
        if ns.contains(&0) {
            out.push("N must be >= 1".into());
        }
        if self.scheme.omega.is_some() && self.scheme.name != SchemeName::Compact2 {
            out.push("scheme.omega only applies to compact2".into());
        }
        if dim == Some(Dimension::One) && (self.bc.bottom.is_some() || self.bc.top.is_some()) {
            out.push("bc: 1D runs take left/right boundaries only".into());
        }
        if dim == Some(Dimension::Two) && (self.bc.bottom.is_none() || self.bc.top.is_none()) {
            out.push("bc: 2D runs need left, right, bottom and top".into());
        }
        if let ReferenceSection::Oracle { refine } = self.reference {
            if refine < 4 {
                out.push(format!("reference.refine must be >= 4, got {refine}"));
            }
        }
        for f in &self.output.formats {
            if f != "csv" {
                out.push(format!("output.formats: unsupported format {f:?} (only \"csv\")"));
            }
        }
        {
            // with an invalid dimension the remaining settings are still checked as 1D
            let spec = self.run_spec(dim.unwrap_or(Dimension::One));
            for m in spec.violations() {
                // boundary shape was already reported above
                let shape_known = dim.is_none() || out.iter().any(|o| o.starts_with("bc: "));
                if !m.starts_with("bc: ") || !shape_known {
                    out.push(m);
                }
            }
            if dim.is_some() && matches!(self.reference, ReferenceSection::Exact {}) && spec.step_solution().is_none() {
                out.push(
                    "reference.kind = exact needs the 1D step problem (constant velocity 1)".into(),
                );
            }
        }
        out
    }

    /// Validated solver inputs.
    pub fn plan(&self) -> Result<RunPlan, ConfigError> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(ConfigError::Invalid(v));
        }
        let dim = self.dimension().expect("validated");
        Ok(RunPlan {
            spec: self.run_spec(dim),
            ladder: self.cells.values().into_iter().zip(self.steps.values()).collect(),
            reference: self.reference(),
            output_dir: self.output.dir.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
dimension = 1
domain = [0.0, 5.0]
M = 40
N = 4
t0 = 0.0
T = 1.0

[isotherm]
p = 0.5

[scheme]
name = "implicit1"

[velocity]
kind = "constant"
value = 1.0

[ic]
kind = "step"

[bc]
left = { kind = "dirichlet", value = 0.0 }
right = { kind = "outflow" }
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.ladder, vec![(40, 4)]);
        assert_eq!(plan.spec.iso.a, 1.0);
        assert_eq!(plan.reference, Reference::None);
    }

    #[test]
    fn negative_exponent_names_the_key() {
        let text = MINIMAL.replace("p = 0.5", "p = -1.0");
        match parse_config(&text) {
            Err(ConfigError::Invalid(v)) => {
                assert_eq!(v.len(), 1, "{v:?}");
                assert!(v[0].contains("isotherm.p"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let text = MINIMAL
            .replace("p = 0.5", "p = -1.0")
            .replace("N = 4", "N = 0")
            .replace("domain = [0.0, 5.0]", "domain = [5.0, 0.0]");
        match parse_config(&text) {
            Err(ConfigError::Invalid(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let text = MINIMAL.replace("N = 4", "N = = 4");
        match parse_config(&text) {
            Err(ConfigError::Syntax { line: Some(l), .. }) => assert_eq!(l, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[ic]\nkind = \"step\"", "[ic]\nkind = \"step\"\nwidth = 2");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax { .. })));
        let text = format!("colour = 1\n{MINIMAL}");
        assert!(matches!(parse_config(&text), Err(ConfigError::Syntax { line: Some(1), .. })));
    }

    #[test]
    fn round_trip() {
        let cfg = parse_config(MINIMAL).unwrap();
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_toml(), again.to_toml());
    }
}
