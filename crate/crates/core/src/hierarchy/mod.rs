//! Comparisons across families: a common wrapper for structures, the maps
//! between posets, transition graphs and resolvable conflict structures, the
//! three equivalences, and the exhaustive searches behind the
//! expressiveness results.

pub mod catalog;
mod oracle;
mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bundle::{Bes, CauseFlavor, Des, Ebes};
use crate::dynamic::{Dces, StepMode};
use crate::error::{Error, Result};
use crate::events::{fmt_set, Configuration, EventSet, Poset, Trace, TransitionGraph};
use crate::growing::Ges;
use crate::kernel::{bit, bits, Mask, MaskGraph, Universe};
use crate::prime::Rpes;
use crate::rces::Rces;
use crate::shrinking::Ses;

pub use oracle::{verify_result, Report, Tier, Witness, CHECKS, SANITY_CHECKS};
pub use search::{enumerate_structures, Clause, Constraints, Enumeration, SEARCH_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Rpes,
    Bes,
    Ebes,
    Des,
    Ses,
    Ges,
    Dces,
    Rces,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Rpes,
        Kind::Bes,
        Kind::Ebes,
        Kind::Des,
        Kind::Ses,
        Kind::Ges,
        Kind::Dces,
        Kind::Rces,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Rpes => "rpes",
            Kind::Bes => "bes",
            Kind::Ebes => "ebes",
            Kind::Des => "des",
            Kind::Ses => "ses",
            Kind::Ges => "ges",
            Kind::Dces => "dces",
            Kind::Rces => "rces",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName { what: "structure kind", name: s.to_string() })
    }
}

/// A structure of any family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Structure {
    Rpes(Rpes),
    Bes(Bes),
    Ebes(Ebes),
    Des(Des),
    Ses(Ses),
    Ges(Ges),
    Dces(Dces),
    Rces(Rces),
}

macro_rules! from_family {
    ($($v:ident),*) => {$(
        impl From<$v> for Structure {
            fn from(s: $v) -> Self {
                Structure::$v(s)
            }
        }
    )*};
}

from_family!(Rpes, Bes, Ebes, Des, Ses, Ges, Dces, Rces);

impl Structure {
    pub fn kind(&self) -> Kind {
        match self {
            Structure::Rpes(_) => Kind::Rpes,
            Structure::Bes(_) => Kind::Bes,
            Structure::Ebes(_) => Kind::Ebes,
            Structure::Des(_) => Kind::Des,
            Structure::Ses(_) => Kind::Ses,
            Structure::Ges(_) => Kind::Ges,
            Structure::Dces(_) => Kind::Dces,
            Structure::Rces(_) => Kind::Rces,
        }
    }

    pub fn events(&self) -> &EventSet {
        match self {
            Structure::Rpes(s) => s.events(),
            Structure::Bes(s) => s.events(),
            Structure::Ebes(s) => s.events(),
            Structure::Des(s) => s.events(),
            Structure::Ses(s) => s.events(),
            Structure::Ges(s) => s.events(),
            Structure::Dces(s) => s.events(),
            Structure::Rces(s) => s.events(),
        }
    }

    fn unsupported(&self, semantics: &'static str) -> Error {
        Error::Unsupported { semantics, kind: self.kind().name() }
    }

    /// Traces; for dynamic causality, sequences of single event steps.
    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        match self {
            Structure::Rpes(s) => s.traces(),
            Structure::Bes(s) => s.traces(),
            Structure::Ebes(s) => s.traces(),
            Structure::Des(s) => s.traces(),
            Structure::Ses(s) => s.traces(),
            Structure::Ges(s) => s.traces(),
            Structure::Dces(s) => s.traces(),
            Structure::Rces(_) => Err(self.unsupported("traces")),
        }
    }

    /// Trace based configurations, or reachable ones for the families
    /// defined by a step relation.
    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        match self {
            Structure::Rpes(s) => s.configurations(),
            Structure::Bes(s) => s.configurations(),
            Structure::Ebes(s) => s.configurations(),
            Structure::Des(s) => s.configurations(),
            Structure::Ses(s) => s.configurations(),
            Structure::Ges(s) => s.configurations(),
            Structure::Dces(s) => s.configurations(),
            Structure::Rces(s) => s.reachable_configurations(),
        }
    }

    /// Posets under the given cause flavor. Prime and stable bundle
    /// structures have one poset per configuration whatever the flavor;
    /// dynamic causality structures have posets only when they are EBDC.
    pub fn posets(&self, flavor: CauseFlavor) -> Result<BTreeSet<Poset>> {
        match self {
            Structure::Rpes(s) => s.posets(),
            Structure::Bes(s) => s.posets(),
            Structure::Ebes(s) => s.posets(),
            Structure::Des(s) => s.posets(flavor),
            Structure::Ses(s) => s.posets(flavor),
            Structure::Dces(s) => s.ebdc_posets(),
            Structure::Ges(_) | Structure::Rces(_) => Err(self.unsupported("posets")),
        }
    }

    /// Reachable configurations and steps. Poset based families derive their
    /// steps from poset inclusion; dynamic causality structures forget the
    /// causality part of their states.
    pub fn transition_graph(&self) -> Result<TransitionGraph> {
        match self {
            Structure::Rpes(_) | Structure::Bes(_) | Structure::Ebes(_) | Structure::Des(_) => {
                transitions_from_posets(self)
            }
            Structure::Ses(s) => s.transition_graph(),
            Structure::Ges(s) => s.transition_graph(),
            Structure::Dces(s) => s.transition_graph(),
            Structure::Rces(s) => s.transition_graph(),
        }
    }

    /// The graph to draw: the state graph for dynamic causality, otherwise
    /// the transition graph, restricted to single event steps if asked.
    pub fn graph(&self, mode: StepMode) -> Result<TransitionGraph> {
        if let Structure::Dces(d) = self {
            return d.state_graph(mode);
        }
        let mut g = self.transition_graph()?;
        if mode == StepMode::Single {
            g.edges.retain(|(x, y)| y.config.len() == x.config.len() + 1);
        }
        Ok(g)
    }

    pub(crate) fn universe(&self) -> Result<Universe> {
        Universe::new(self.events())
    }
}

/// Steps `X ↦ Y` between configurations whose posets are included in each
/// other: `X ⊂ Y` and some poset on `X` has its order inside the order of
/// some poset on `Y`. Dual structures use early causality.
pub fn transitions_from_posets(s: &Structure) -> Result<TransitionGraph> {
    let posets = match s {
        Structure::Rpes(_) | Structure::Bes(_) | Structure::Ebes(_) | Structure::Des(_) => {
            s.posets(CauseFlavor::Early)?
        }
        _ => return Err(s.unsupported("transitions from posets")),
    };
    let u = s.universe()?;
    let masks = posets.iter().map(|p| mask_order(&u, p)).collect::<Result<Vec<_>>>()?;
    let mut g = MaskGraph::default();
    for (x, lo) in &masks {
        g.nodes.insert(*x);
        for (y, hi) in &masks {
            if x & !y == 0 && x != y && bits(*x).all(|i| lo[i] & !hi[i] == 0) {
                g.edges.insert((*x, *y));
            }
        }
    }
    Ok(u.graph(&g))
}

/// Carrier mask and, per event, the mask of events below it.
fn mask_order(u: &Universe, p: &Poset) -> Result<(Mask, Vec<Mask>)> {
    let mut below = vec![0; u.len()];
    for (lo, hi) in p.order() {
        below[u.idx(hi)?] |= bit(u.idx(lo)?);
    }
    Ok((u.mask(p.carrier())?, below))
}

fn mask_graph(u: &Universe, g: &TransitionGraph) -> Result<MaskGraph> {
    Ok(MaskGraph {
        nodes: g.nodes.iter().map(|n| u.mask(&n.config)).collect::<Result<_>>()?,
        edges: g
            .edges
            .iter()
            .map(|(x, y)| Ok((u.mask(&x.config)?, u.mask(&y.config)?)))
            .collect::<Result<_>>()?,
    })
}

/// Every step strictly grows the configuration, and shrinking a step from
/// the outside, `X′ ⊆ X ⊂ Y ⊆ Y′` with `X′ ↦ Y′`, keeps it a step between
/// configurations `X` and `Y`.
pub fn check_strict_dense(g: &TransitionGraph) -> Result<()> {
    let events: EventSet = g.nodes.iter().flat_map(|n| n.config.iter().cloned()).collect();
    let u = Universe::new(&events)?;
    let m = mask_graph(&u, g)?;
    for &(x, y) in &m.edges {
        if x & !y != 0 || x == y {
            return Err(Error::NotStrictDense(format!("{} to {} is not strict", fmt_set(&u.set(x)), fmt_set(&u.set(y)))));
        }
    }
    for &(x0, y0) in &m.edges {
        let inner = m.nodes.iter().filter(|&&c| c & !y0 == 0 && x0 & !c == 0);
        for &x in inner.clone() {
            for &y in inner.clone() {
                if x & !y == 0 && x != y && !m.edges.contains(&(x, y)) {
                    return Err(Error::NotStrictDense(format!(
                        "{} to {} lies inside {} to {} but is missing",
                        fmt_set(&u.set(x)),
                        fmt_set(&u.set(y)),
                        fmt_set(&u.set(x0)),
                        fmt_set(&u.set(y0))
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The resolvable conflict structure with enabling `X ⊢ Z` for every step
/// `X ↦ Y` and `Z ⊆ Y`. Its reachable graph is the graph of `s`.
pub fn rces_of(s: &Structure) -> Result<Rces> {
    let g = s.transition_graph()?.project();
    check_strict_dense(&g)?;
    let u = s.universe()?;
    Rces::from_graph(&u, &mask_graph(&u, &g)?)
}

pub fn trace_equivalent(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(a.traces()? == b.traces()?)
}

pub fn poset_equivalent(a: &Structure, b: &Structure, flavor: CauseFlavor) -> Result<bool> {
    Ok(a.posets(flavor)? == b.posets(flavor)?)
}

/// Equal reachable transition graphs over configurations.
pub fn transition_equivalent(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(a.transition_graph()?.project() == b.transition_graph()?.project())
}

pub fn configuration_equivalent(a: &Structure, b: &Structure) -> Result<bool> {
    Ok(a.configurations()? == b.configurations()?)
}
