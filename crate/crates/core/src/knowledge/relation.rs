use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::concept::tokenize;

/// The commonsense relations queried per sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Intent,
    Reason,
    Effect,
    Need,
    Want,
    React,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Intent,
        Relation::Reason,
        Relation::Effect,
        Relation::Need,
        Relation::Want,
        Relation::React,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::Intent => "intent",
            Relation::Reason => "reason",
            Relation::Effect => "effect",
            Relation::Need => "need",
            Relation::Want => "want",
            Relation::React => "react",
        }
    }

    pub fn default_surface_id(self) -> &'static str {
        match self {
            Relation::Intent => "xIntent",
            Relation::Reason => "xReason",
            Relation::Effect => "xEffect",
            Relation::Need => "xNeed",
            Relation::Want => "xWant",
            Relation::React => "xReact",
        }
    }

    pub fn from_name(name: &str) -> Option<Relation> {
        Relation::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelationSetError {
    #[error("relation set needs at least two members, got {0}")]
    TooSmall(usize),
    #[error("relation {0} listed twice")]
    Duplicate(Relation),
    #[error("surface id {surface:?} for {relation} must be a single non-empty token")]
    BadSurface { relation: Relation, surface: String },
    #[error("surface id {0:?} is used by two relations")]
    SharedSurface(String),
}

/// The relations in use, in a fixed order, with their surface ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationSet {
    members: Vec<Relation>,
    surfaces: BTreeMap<Relation, String>,
}

impl Default for RelationSet {
    fn default() -> Self {
        Self::new(Relation::ALL.to_vec(), BTreeMap::new()).expect("default relation set is valid")
    }
}

impl RelationSet {
    /// `overrides` replaces the default surface id of individual relations.
    pub fn new(
        members: Vec<Relation>,
        overrides: BTreeMap<Relation, String>,
    ) -> Result<Self, RelationSetError> {
        if members.len() < 2 {
            return Err(RelationSetError::TooSmall(members.len()));
        }
        let mut surfaces = BTreeMap::new();
        for &r in &members {
            let surface = overrides
                .get(&r)
                .cloned()
                .unwrap_or_else(|| r.default_surface_id().to_string());
            if surface.is_empty()
                || surface.chars().any(char::is_whitespace)
                || tokenize(&surface).len() != 1
            {
                return Err(RelationSetError::BadSurface { relation: r, surface });
            }
            if surfaces.insert(r, surface).is_some() {
                return Err(RelationSetError::Duplicate(r));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in surfaces.values() {
            if !seen.insert(s) {
                return Err(RelationSetError::SharedSurface(s.clone()));
            }
        }
        Ok(Self { members, surfaces })
    }

    pub fn members(&self) -> &[Relation] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, r: Relation) -> bool {
        self.surfaces.contains_key(&r)
    }

    /// Surface id of a member; falls back to the default for non-members.
    pub fn surface(&self, r: Relation) -> &str {
        self.surfaces
            .get(&r)
            .map_or_else(|| r.default_surface_id(), String::as_str)
    }

    pub fn by_surface(&self, surface: &str) -> Option<Relation> {
        self.surfaces
            .iter()
            .find(|(_, s)| s.as_str() == surface)
            .map(|(r, _)| *r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_set_is_the_six_relations() {
        let set = RelationSet::default();
        assert_eq!(set.len(), 6);
        let names: Vec<_> = set.members().iter().map(|r| r.name()).collect();
        assert_eq!(names, ["intent", "reason", "effect", "need", "want", "react"]);
        assert_eq!(set.surface(Relation::Need), "xNeed");
    }

    #[test]
    fn rejects_bad_sets() {
        assert_eq!(
            RelationSet::new(vec![Relation::Need], BTreeMap::new()),
            Err(RelationSetError::TooSmall(1))
        );
        let bad = BTreeMap::from([(Relation::Need, "x Need".to_string())]);
        assert!(matches!(
            RelationSet::new(vec![Relation::Need, Relation::Want], bad),
            Err(RelationSetError::BadSurface { .. })
        ));
        let punct = BTreeMap::from([(Relation::Need, "need.".to_string())]);
        assert!(RelationSet::new(vec![Relation::Need, Relation::Want], punct).is_err());
        let shared = BTreeMap::from([(Relation::Need, "xWant".to_string())]);
        assert!(matches!(
            RelationSet::new(vec![Relation::Need, Relation::Want], shared),
            Err(RelationSetError::SharedSurface(_))
        ));
    }

    #[test]
    fn surface_override() {
        let set = RelationSet::new(
            vec![Relation::Effect, Relation::Need],
            BTreeMap::from([(Relation::Effect, "Causes".to_string())]),
        )
        .unwrap();
        assert_eq!(set.surface(Relation::Effect), "Causes");
        assert_eq!(set.by_surface("Causes"), Some(Relation::Effect));
    }
}
