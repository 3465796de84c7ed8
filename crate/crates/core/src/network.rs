//! Reaction networks, conservation laws and quotient-space constraints.
//!
//! Stoichiometric coefficients follow the products-positive convention, so
//! the quotient of reaction `j` is `Q_j(c) = ∏_i c_i^{S_ij}` and
//! `ln Q = Sᵀ ln c`.

use std::collections::{BTreeMap, HashSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{echelon_basis, lstsq_min_norm, null_space, rank};
use crate::Scalar;

/// Relative tolerance for membership of `ln Q` in `Im(Sᵀ)`.
pub const ACHIEVABILITY_TOL: f64 = 1e-9;
/// Relative tolerance for the Wegscheider cycle condition.
pub const WEGSCHEIDER_TOL: f64 = 1e-9;

/// One reaction given as signed per-species coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSpec<T> {
    pub name: String,
    pub stoich: Vec<(String, T)>,
}

impl<T: Scalar> ReactionSpec<T> {
    pub fn new(name: impl Into<String>, stoich: &[(&str, f64)]) -> Self {
        Self {
            name: name.into(),
            stoich: stoich.iter().map(|(s, v)| (s.to_string(), T::lit(*v))).collect(),
        }
    }
}

/// Species, reactions and the `n × r` stoichiometric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T: Scalar> {
    species: Vec<String>,
    reactions: Vec<String>,
    stoich: DMatrix<T>,
}

/// Columns of `l` span `ker(Sᵀ)`; each column is one conservation law.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationBasis<T: Scalar> {
    pub l: DMatrix<T>,
}

impl<T: Scalar> ConservationBasis<T> {
    /// Number of independent conservation laws.
    pub fn dim(&self) -> usize {
        self.l.ncols()
    }

    /// Conserved totals `Lᵀc`.
    pub fn totals(&self, c: &DVector<T>) -> DVector<T> {
        self.l.transpose() * c
    }
}

/// Outcome of projecting a log-quotient vector onto `Im(Sᵀ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Achievability<T> {
    pub achievable: bool,
    /// Norm of the component of `x` orthogonal to `Im(Sᵀ)`.
    pub residual: T,
    pub tolerance: T,
}

/// Per-cycle result of the Wegscheider condition `νᵀ ln K_eq = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleViolation<T: Scalar> {
    /// Cycle vector `ν` with `Sν = 0`.
    pub cycle: DVector<T>,
    /// `|νᵀ ln K_eq|`, the log of the equilibrium-constant product around the cycle.
    pub violation: T,
    pub tolerance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WegscheiderReport<T: Scalar> {
    pub consistent: bool,
    /// Largest `|νᵀ ln K_eq|` over the cycle basis (zero without cycles).
    pub worst_violation: T,
    pub cycles: Vec<CycleViolation<T>>,
}

impl<T: Scalar> Network<T> {
    /// Builds a network from species names and reaction specs.
    ///
    /// Fails on duplicate names, unknown species, non-finite coefficients and
    /// reactions whose every coefficient is zero.
    pub fn new(species: Vec<String>, reactions: Vec<ReactionSpec<T>>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::InvalidNetwork("at least one species is required".into()));
        }
        if reactions.is_empty() {
            return Err(Error::InvalidNetwork("at least one reaction is required".into()));
        }
        let mut index = BTreeMap::new();
        for (i, s) in species.iter().enumerate() {
            if index.insert(s.as_str(), i).is_some() {
                return Err(Error::InvalidNetwork(format!("duplicate species `{s}`")));
            }
        }
        let mut seen = HashSet::new();
        let mut stoich = DMatrix::zeros(species.len(), reactions.len());
        for (j, rx) in reactions.iter().enumerate() {
            if !seen.insert(rx.name.as_str()) {
                return Err(Error::InvalidNetwork(format!("duplicate reaction `{}`", rx.name)));
            }
            for (sp, coef) in &rx.stoich {
                if !coef.is_finite() {
                    return Err(Error::InvalidNetwork(format!(
                        "non-finite coefficient for `{sp}` in reaction `{}`",
                        rx.name
                    )));
                }
                let &i = index.get(sp.as_str()).ok_or_else(|| {
                    Error::InvalidNetwork(format!(
                        "reaction `{}` references unknown species `{sp}`",
                        rx.name
                    ))
                })?;
                stoich[(i, j)] += *coef;
            }
        }
        let names = reactions.into_iter().map(|r| r.name).collect();
        Self::from_matrix(species, names, stoich)
    }

    /// Builds a network directly from a stoichiometric matrix.
    pub fn from_matrix(
        species: Vec<String>,
        reactions: Vec<String>,
        stoich: DMatrix<T>,
    ) -> Result<Self> {
        if stoich.nrows() != species.len() {
            return Err(Error::DimensionMismatch {
                context: "stoichiometric rows",
                expected: species.len(),
                actual: stoich.nrows(),
            });
        }
        if stoich.ncols() != reactions.len() {
            return Err(Error::DimensionMismatch {
                context: "stoichiometric columns",
                expected: reactions.len(),
                actual: stoich.ncols(),
            });
        }
        if species.is_empty() || reactions.is_empty() {
            return Err(Error::InvalidNetwork("empty network".into()));
        }
        if stoich.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidNetwork("non-finite stoichiometric coefficient".into()));
        }
        let unique: HashSet<_> = species.iter().collect();
        if unique.len() != species.len() {
            return Err(Error::InvalidNetwork("duplicate species name".into()));
        }
        let unique: HashSet<_> = reactions.iter().collect();
        if unique.len() != reactions.len() {
            return Err(Error::InvalidNetwork("duplicate reaction name".into()));
        }
        for (j, col) in stoich.column_iter().enumerate() {
            if col.iter().all(|v| *v == T::zero()) {
                return Err(Error::InvalidNetwork(format!(
                    "reaction `{}` has an all-zero stoichiometric column",
                    reactions[j]
                )));
            }
        }
        Ok(Self {
            species,
            reactions,
            stoich,
        })
    }

    /// Parses the JSON network format:
    /// `{"species": [...], "reactions": [{"name": ..., "stoich": {species: coef}}]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(s)
            .map_err(|e| Error::InvalidNetwork(format!("malformed network JSON: {e}")))?;
        file.build()
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactions(&self) -> &[String] {
        &self.reactions
    }

    /// Stoichiometric matrix `S` (rows species, columns reactions).
    pub fn stoichiometry(&self) -> &DMatrix<T> {
        &self.stoich
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s == name)
    }

    /// `ln Q = Sᵀ ln c`.
    pub fn log_quotients(&self, ln_c: &DVector<T>) -> Result<DVector<T>> {
        self.check_species_len(ln_c.len(), "log concentrations")?;
        Ok(self.stoich.transpose() * ln_c)
    }

    /// Reaction quotients `Q_j = ∏ c_i^{S_ij}` for positive concentrations.
    pub fn quotients(&self, c: &DVector<T>) -> Result<DVector<T>> {
        self.check_species_len(c.len(), "concentrations")?;
        if c.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(invalid_conc());
        }
        Ok(self.log_quotients(&c.map(|v| v.ln()))?.map(|v| v.exp()))
    }

    /// Basis of `ker(Sᵀ)` in reduced echelon form.
    ///
    /// For `A ⇌ B` this is the single law `[A] + [B]`. When the kernel is
    /// trivial the result is an `n × 0` matrix.
    pub fn conservation_basis(&self) -> ConservationBasis<T> {
        let l = echelon_basis(&null_space(&self.stoich.transpose()));
        ConservationBasis { l }
    }

    /// Basis of `ker(S)`: reaction combinations with no net change, in
    /// reduced echelon form (a 3-cycle gives `(1, 1, 1)`).
    pub fn cycle_basis(&self) -> DMatrix<T> {
        echelon_basis(&null_space(&self.stoich))
    }

    pub fn rank(&self) -> usize {
        rank(&self.stoich)
    }

    /// Tests whether log-quotients `x` lie in `Im(Sᵀ)`, i.e. are produced by
    /// some positive concentration vector.
    pub fn check_quotient_achievable(&self, x: &DVector<T>) -> Result<Achievability<T>> {
        self.check_reaction_len(x.len(), "log-quotients")?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("log-quotients"));
        }
        let s_t = self.stoich.transpose();
        let u = lstsq_min_norm(&s_t, x)?;
        let residual = (x - &s_t * u).norm();
        let tolerance = T::tol(ACHIEVABILITY_TOL) * x.norm().max(T::one());
        Ok(Achievability {
            achievable: residual <= tolerance,
            residual,
            tolerance,
        })
    }

    /// Checks that the equilibrium constants multiply to one around every
    /// reaction cycle.
    pub fn wegscheider_check(&self, k_eq: &DVector<T>) -> Result<WegscheiderReport<T>> {
        self.check_reaction_len(k_eq.len(), "equilibrium constants")?;
        if k_eq.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "K_eq".into(),
                reason: "equilibrium constants must be positive and finite".into(),
            });
        }
        let ln_k = k_eq.map(|v| v.ln());
        let scale = ln_k.norm().max(T::one());
        let cycles: Vec<CycleViolation<T>> = self
            .cycle_basis()
            .column_iter()
            .map(|nu| {
                let tolerance = T::tol(WEGSCHEIDER_TOL) * nu.norm() * scale;
                CycleViolation {
                    cycle: nu.into_owned(),
                    violation: nu.dot(&ln_k).abs(),
                    tolerance,
                }
            })
            .collect();
        let worst = cycles
            .iter()
            .fold(T::zero(), |m, c| m.max(c.violation));
        Ok(WegscheiderReport {
            consistent: cycles.iter().all(|c| c.violation <= c.tolerance),
            worst_violation: worst,
            cycles,
        })
    }

    fn check_species_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.n_species() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n_species(),
                actual: len,
            });
        }
        Ok(())
    }

    fn check_reaction_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.n_reactions() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.n_reactions(),
                actual: len,
            });
        }
        Ok(())
    }
}

fn invalid_conc() -> Error {
    Error::InvalidParameter {
        name: "concentrations".into(),
        reason: "must be positive and finite".into(),
    }
}

/// On-disk JSON form of a network.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub species: Vec<String>,
    pub reactions: Vec<ReactionFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReactionFile {
    pub name: String,
    pub stoich: BTreeMap<String, f64>,
}

impl NetworkFile {
    pub fn build<T: Scalar>(&self) -> Result<Network<T>> {
        let reactions = self
            .reactions
            .iter()
            .map(|r| ReactionSpec {
                name: r.name.clone(),
                stoich: r.stoich.iter().map(|(k, v)| (k.clone(), T::lit(*v))).collect(),
            })
            .collect();
        Network::new(self.species.clone(), reactions)
    }
}

/// Convenience constructors for the small networks used in examples and tests.
pub mod presets {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// `A ⇌ B`.
    pub fn isomerization<T: Scalar>() -> Network<T> {
        Network::new(
            names(&["A", "B"]),
            vec![ReactionSpec::new("A<->B", &[("A", -1.0), ("B", 1.0)])],
        )
        .expect("valid preset")
    }

    /// Unimolecular conversion with custom species names.
    pub fn conversion<T: Scalar>(reactant: &str, product: &str) -> Network<T> {
        Network::new(
            names(&[reactant, product]),
            vec![ReactionSpec::new(
                format!("{reactant}<->{product}"),
                &[(reactant, -1.0), (product, 1.0)],
            )],
        )
        .expect("valid preset")
    }

    /// `A ⇌ B`, `B ⇌ C`, `C ⇌ A`.
    pub fn triangle<T: Scalar>() -> Network<T> {
        Network::new(
            names(&["A", "B", "C"]),
            vec![
                ReactionSpec::new("A<->B", &[("A", -1.0), ("B", 1.0)]),
                ReactionSpec::new("B<->C", &[("B", -1.0), ("C", 1.0)]),
                ReactionSpec::new("C<->A", &[("C", -1.0), ("A", 1.0)]),
            ],
        )
        .expect("valid preset")
    }

    /// Linear chain `S0 ⇌ S1 ⇌ … ⇌ Sk`.
    pub fn chain<T: Scalar>(species: &[&str]) -> Network<T> {
        let reactions = species
            .windows(2)
            .map(|w| ReactionSpec::new(format!("{}<->{}", w[0], w[1]), &[(w[0], -1.0), (w[1], 1.0)]))
            .collect();
        Network::new(names(species), reactions).expect("valid preset")
    }
}
