//! Where a distribution comes from: explicit values, a JSON spec, or a named construction.

use cobose_core::exact::{exact_from_distribution, parse_rational, ExactDistribution};
use cobose_core::extremal::{build, ExtremalKind};
use cobose_core::schmidt::{DistributionSpec, Group, SchmidtDistribution};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::args::Flags;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Values {
        values: Vec<BigRational>,
        tail: f64,
        normalize: bool,
    },
    Spec(DistributionSpec),
    /// `(λ₁, P)`, optionally naming the distribution to build from it.
    Pair {
        kind: Option<ExtremalKind>,
        lambda1: Option<f64>,
        purity: Option<f64>,
    },
}

fn parse_values(text: &str) -> CliResult<Vec<BigRational>> {
    let values: Vec<BigRational> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_rational(s).map_err(CliError::from))
        .collect::<CliResult<_>>()?;
    if values.is_empty() {
        return Err(CliError::parse("--values is empty"));
    }
    Ok(values)
}

fn parse_spec(text: &str) -> CliResult<DistributionSpec> {
    let trimmed = text.trim_start();
    let json = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(text).map_err(|e| CliError::parse(format!("cannot read {text}: {e}")))?
    };
    serde_json::from_str(&json).map_err(|e| CliError::parse(format!("bad distribution JSON: {e}")))
}

impl Source {
    /// At most one kind of source may be given; `None` when there is none.
    pub fn from_flags(flags: &Flags) -> CliResult<Option<Source>> {
        let pair = flags.lambda1.is_some() || flags.purity.is_some();
        let given = [flags.values.is_some(), flags.groups.is_some(), pair].iter().filter(|&&b| b).count();
        if given > 1 {
            return Err(CliError::parse("give exactly one of --values, --groups or --lambda1/--purity"));
        }
        if flags.tail.is_some() && flags.values.is_none() {
            return Err(CliError::parse("--tail only applies to --values"));
        }
        if let Some(text) = &flags.values {
            return Ok(Some(Source::Values {
                values: parse_values(text)?,
                tail: flags.tail.unwrap_or(0.0),
                normalize: flags.normalize,
            }));
        }
        if let Some(text) = &flags.groups {
            return Ok(Some(Source::Spec(parse_spec(text)?)));
        }
        if pair {
            let kind = flags.extremal.as_deref().map(str::parse::<ExtremalKind>).transpose()?;
            return Ok(Some(Source::Pair { kind, lambda1: flags.lambda1, purity: flags.purity }));
        }
        Ok(None)
    }

    pub fn distribution(&self) -> CliResult<SchmidtDistribution> {
        Ok(match self {
            Source::Values { values, tail, normalize } => {
                let groups = values.iter().map(|v| Group::new(v.to_f64().unwrap_or(f64::NAN), 1));
                SchmidtDistribution::new(groups, *tail, *normalize)?
            }
            Source::Spec(spec) => spec.build()?,
            Source::Pair { kind: Some(kind), lambda1, purity } => build(*kind, *lambda1, *purity)?.distribution,
            Source::Pair { kind: None, .. } => {
                return Err(CliError::parse("--lambda1/--purity need --extremal to pick a distribution"))
            }
        })
    }

    /// Exact coefficients for the brute-force oracle.
    pub fn exact(&self) -> CliResult<ExactDistribution> {
        match self {
            Source::Values { values, .. } => {
                // Float validation first, so both paths accept the same inputs.
                let d = self.distribution()?;
                if d.has_tail() {
                    return Err(CliError::parse("the oracle engine needs a distribution without tail"));
                }
                let total: BigRational = values.iter().sum();
                Ok(ExactDistribution::new(values.iter().map(|v| v / &total).collect())?)
            }
            _ => Ok(exact_from_distribution(&self.distribution()?)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags::default()
    }

    #[test]
    fn values_with_fractions() {
        let f = Flags { values: Some("1/3, 2/3".into()), ..flags() };
        let s = Source::from_flags(&f).unwrap().unwrap();
        let e = s.exact().unwrap();
        assert_eq!(e.values()[0], BigRational::new(2.into(), 3.into()));
        assert!((s.distribution().unwrap().purity() - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_applies_exactly() {
        let f = Flags { values: Some("1,1,2".into()), normalize: true, ..flags() };
        let e = Source::from_flags(&f).unwrap().unwrap().exact().unwrap();
        assert_eq!(e.values()[0], BigRational::new(1.into(), 2.into()));
        let f = Flags { values: Some("1,1,2".into()), ..flags() };
        assert!(Source::from_flags(&f).unwrap().unwrap().distribution().is_err());
    }

    #[test]
    fn inline_groups() {
        let f =
            Flags { groups: Some(r#"{"groups": [{"value": 0.25, "mult": 2}], "tail_mass": 0.5}"#.into()), ..flags() };
        let d = Source::from_flags(&f).unwrap().unwrap().distribution().unwrap();
        assert_eq!(d.groups(), &[Group::new(0.25, 2)]);
        assert_eq!(d.tail_mass(), 0.5);
    }

    #[test]
    fn sources_are_exclusive() {
        let f = Flags { values: Some("1".into()), lambda1: Some(0.3), ..flags() };
        assert!(Source::from_flags(&f).is_err());
        let f = Flags { tail: Some(0.1), ..flags() };
        assert!(Source::from_flags(&f).is_err());
        assert_eq!(Source::from_flags(&flags()).unwrap(), None);
    }

    #[test]
    fn tailed_values_refuse_the_oracle() {
        let f = Flags { values: Some("0.5".into()), tail: Some(0.5), ..flags() };
        let s = Source::from_flags(&f).unwrap().unwrap();
        assert!(s.distribution().is_ok());
        assert!(s.exact().is_err());
    }

    #[test]
    fn named_construction() {
        let f = Flags { lambda1: Some(0.31), purity: Some(0.205), extremal: Some("min".into()), ..flags() };
        let d = Source::from_flags(&f).unwrap().unwrap().distribution().unwrap();
        assert!((d.purity() - 0.205).abs() < 1e-12);
        assert_eq!(d.lambda1(), 0.31);
        let f = Flags { lambda1: Some(0.31), purity: Some(0.205), ..flags() };
        assert!(Source::from_flags(&f).unwrap().unwrap().distribution().is_err());
    }
}
