//! Exhaustive enumeration of the structures of one family over a fixed
//! event set.
//!
//! The space is a product of independent dimensions, one per conflict or
//! disabling pair, per dependency `c → t` (together with its modifiers), per
//! bundle target and per enabling pair. Options that would break a family's
//! own well-formedness rules are never generated, so the product size is
//! the exact number of candidates. Bundles of one target are enumerated as
//! antichains: a bundle containing another bundle of the same target never
//! changes traces, configurations or posets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bes, Bundle, BundleKernel, Des, Ebes};
use crate::dynamic::{Dces, DcesKernel};
use crate::error::{Error, Result};
use crate::events::{fmt_set, EventId, EventSet, Relation, Triple};
use crate::growing::{Ges, GesKernel};
use crate::hierarchy::{Kind, Structure};
use crate::kernel::{bit, bits, full, submasks, Mask, Universe};
use crate::prime::{Rpes, RpesKernel};
use crate::rces::{Enabling, Rces, RcesKernel};
use crate::shrinking::{Ses, SesKernel};

/// Largest number of candidates a single enumeration may cover.
pub const SEARCH_LIMIT: u128 = 1 << 26;

/// Largest event set for which bundle antichains are enumerated.
const ANTICHAIN_EVENTS: usize = 4;

/// One relation entry a structure may contain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    Conflict(EventId, EventId),
    Cause(EventId, EventId),
    /// `(a, b)`: `a` precedes `b` whenever both occur.
    Disable(EventId, EventId),
    Bundle(Bundle),
    Drop(Triple),
    Add(Triple),
    Enable(EventSet, EventSet),
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Conflict(a, b) => write!(f, "conflict {a} ~ {b}"),
            Clause::Cause(a, b) => write!(f, "cause {a} -> {b}"),
            Clause::Disable(a, b) => write!(f, "disable {a} < {b}"),
            Clause::Bundle(b) => write!(f, "bundle {b}"),
            Clause::Drop(t) => write!(f, "drop {t}"),
            Clause::Add(t) => write!(f, "add {t}"),
            Clause::Enable(w, z) => write!(f, "enable {} |- {}", fmt_set(w), fmt_set(z)),
        }
    }
}

/// Restrictions on an enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    /// Clauses every candidate contains.
    pub forced: BTreeSet<Clause>,
    /// Clauses no candidate contains.
    pub forbidden: BTreeSet<Clause>,
    /// Lower bounds on the number of initial causes of an event.
    pub min_causes: BTreeMap<EventId, usize>,
    /// One line per builder call, used by [`Constraints::describe`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Constraints {
    pub fn none() -> Self {
        Constraints::default()
    }

    pub fn is_empty(&self) -> bool {
        self.forced.is_empty() && self.forbidden.is_empty() && self.min_causes.is_empty()
    }

    /// No conflict between any two of `events`.
    pub fn no_conflict(mut self, events: &EventSet) -> Self {
        self.notes.push(format!("no conflict within {}", fmt_set(events)));
        for (a, b) in events.iter().tuple_combinations() {
            self.forbidden.insert(Clause::Conflict(a.clone(), b.clone()));
        }
        self
    }

    /// No initial cause, taken from `events`, for any of `targets`.
    pub fn no_initial_causes(mut self, events: &EventSet, targets: &EventSet) -> Self {
        self.notes.push(format!("no initial cause from {} for {}", fmt_set(events), fmt_set(targets)));
        for c in events {
            for t in targets {
                self.forbidden.insert(Clause::Cause(c.clone(), t.clone()));
            }
        }
        self
    }

    /// `x` waits for itself forever and only acts as a cause of other events.
    pub fn impossible(mut self, events: &EventSet, x: &EventId) -> Self {
        self.notes.push(format!("{x} is impossible and only causes other events"));
        self.forced.insert(Clause::Cause(x.clone(), x.clone()));
        for y in events {
            if y != x {
                self.forbidden.insert(Clause::Cause(y.clone(), x.clone()));
                for (a, b) in [(x, y), (y, x)] {
                    self.forbidden.insert(Clause::Conflict(a.clone(), b.clone()));
                    self.forbidden.insert(Clause::Disable(a.clone(), b.clone()));
                }
            }
            for z in events {
                for t in [Triple::new(y.clone(), z.clone(), x.clone()), Triple::new(x.clone(), y.clone(), z.clone())] {
                    self.forbidden.insert(Clause::Drop(t.clone()));
                    self.forbidden.insert(Clause::Add(t));
                }
            }
        }
        self
    }

    pub fn at_least_causes(mut self, e: &EventId, n: usize) -> Self {
        self.notes.push(format!("at least {n} initial causes for {e}"));
        self.min_causes.insert(e.clone(), n);
        self
    }

    /// The builder summaries, or for hand-built constraints one line per
    /// forced or forbidden clause and per bound.
    pub fn describe(&self) -> Vec<String> {
        if !self.notes.is_empty() {
            return self.notes.clone();
        }
        let mut out = Vec::new();
        out.extend(self.forced.iter().map(|c| format!("forced: {c}")));
        out.extend(self.forbidden.iter().map(|c| format!("forbidden: {c}")));
        out.extend(self.min_causes.iter().map(|(e, n)| format!("at least {n} initial causes for {e}")));
        out
    }
}

/// A clause over numbered events.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Atom {
    /// Smaller index first.
    Conflict(usize, usize),
    Cause(usize, usize),
    Disable(usize, usize),
    Bundle(Mask, usize),
    Drop(usize, usize, usize),
    Add(usize, usize, usize),
    Enable(Mask, Mask),
}

/// A candidate over numbered events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Raw {
    pub conflict: Vec<Mask>,
    pub cause: Vec<Mask>,
    pub disabled_by: Vec<Mask>,
    pub bundles: Vec<Vec<Mask>>,
    pub drop_by: Vec<Vec<Mask>>,
    pub add_by: Vec<Vec<Mask>>,
    pub enabling: Vec<(Mask, Mask)>,
}

impl Raw {
    fn new(n: usize) -> Self {
        Raw {
            conflict: vec![0; n],
            cause: vec![0; n],
            disabled_by: vec![0; n],
            bundles: vec![Vec::new(); n],
            drop_by: vec![vec![0; n]; n],
            add_by: vec![vec![0; n]; n],
            enabling: Vec::new(),
        }
    }

    fn add(&mut self, a: Atom) {
        match a {
            Atom::Conflict(i, j) => {
                self.conflict[i] |= bit(j);
                self.conflict[j] |= bit(i);
            }
            Atom::Cause(c, t) => self.cause[t] |= bit(c),
            Atom::Disable(x, y) => self.disabled_by[y] |= bit(x),
            Atom::Bundle(m, t) => self.bundles[t].push(m),
            Atom::Drop(m, c, t) => self.drop_by[t][c] |= bit(m),
            Atom::Add(m, c, t) => self.add_by[t][c] |= bit(m),
            Atom::Enable(w, z) => self.enabling.push((w, z)),
        }
    }

    pub(crate) fn rpes(&self, u: &Universe) -> RpesKernel {
        RpesKernel { u: u.clone(), preds: self.cause.clone(), conflict: self.conflict.clone() }
    }

    pub(crate) fn bundle(&self, u: &Universe) -> BundleKernel {
        BundleKernel::from_masks(u.clone(), self.conflict.clone(), self.disabled_by.clone(), self.bundles.clone())
    }

    pub(crate) fn ses(&self, u: &Universe) -> SesKernel {
        SesKernel { u: u.clone(), conflict: self.conflict.clone(), ic: self.cause.clone(), drop_by: self.drop_by.clone() }
    }

    pub(crate) fn ges(&self, u: &Universe) -> GesKernel {
        GesKernel { u: u.clone(), ic: self.cause.clone(), add_by: self.add_by.clone() }
    }

    pub(crate) fn dces(&self, u: &Universe) -> DcesKernel {
        DcesKernel {
            u: u.clone(),
            init: self.cause.clone(),
            drop_by: self.drop_by.clone(),
            add_by: self.add_by.clone(),
        }
    }

    pub(crate) fn rces(&self, u: &Universe) -> RcesKernel {
        RcesKernel { u: u.clone(), pairs: self.enabling.clone() }
    }
}

/// All structures of one family over one event set that satisfy a set of
/// constraints, in a fixed order.
#[derive(Clone, Debug)]
pub struct Enumeration {
    kind: Kind,
    u: Universe,
    dims: Vec<Vec<Vec<Atom>>>,
    min_causes: Vec<(usize, usize)>,
}

pub fn enumerate_structures(kind: Kind, events: &EventSet, constraints: &Constraints) -> Result<Enumeration> {
    let u = Universe::new(events)?;
    let n = u.len();
    let mut dims = match kind {
        Kind::Rpes => [conflict_dims(n), pair_dims(n, Atom::Cause)].concat(),
        Kind::Bes | Kind::Des => [conflict_dims(n), antichain_dims(n)?].concat(),
        Kind::Ebes => [disable_dims(n), antichain_dims(n)?].concat(),
        Kind::Ses => [conflict_dims(n), dependency_dims(n, ses_options)].concat(),
        Kind::Ges => dependency_dims(n, ges_options),
        Kind::Dces => dependency_dims(n, dces_options),
        Kind::Rces => enabling_dims(n)?,
    };
    let forced = constraints.forced.iter().map(|c| atom(&u, c)).collect::<Result<BTreeSet<_>>>()?;
    let forbidden = constraints.forbidden.iter().map(|c| atom(&u, c)).collect::<Result<BTreeSet<_>>>()?;
    let mut placed = BTreeSet::new();
    for dim in &mut dims {
        let here: BTreeSet<Atom> = dim.iter().flatten().copied().collect();
        let need: Vec<Atom> = forced.intersection(&here).copied().collect();
        placed.extend(need.iter().copied());
        dim.retain(|o| o.iter().all(|a| !forbidden.contains(a)) && need.iter().all(|a| o.contains(a)));
    }
    if placed.len() < forced.len() {
        // a forced clause that the family cannot contain
        dims.push(Vec::new());
    }
    let min_causes = constraints
        .min_causes
        .iter()
        .map(|(e, k)| Ok((u.idx(e)?, *k)))
        .collect::<Result<_>>()?;
    let e = Enumeration { kind, u, dims, min_causes };
    if e.size() > SEARCH_LIMIT {
        return Err(Error::BoundExceeded { size: e.size(), limit: SEARCH_LIMIT });
    }
    Ok(e)
}

fn atom(u: &Universe, c: &Clause) -> Result<Atom> {
    Ok(match c {
        Clause::Conflict(a, b) => {
            let (i, j) = (u.idx(a)?, u.idx(b)?);
            Atom::Conflict(i.min(j), i.max(j))
        }
        Clause::Cause(a, b) => Atom::Cause(u.idx(a)?, u.idx(b)?),
        Clause::Disable(a, b) => Atom::Disable(u.idx(a)?, u.idx(b)?),
        Clause::Bundle(b) => Atom::Bundle(u.mask(&b.members)?, u.idx(&b.target)?),
        Clause::Drop(t) => Atom::Drop(u.idx(&t.modifier)?, u.idx(&t.cause)?, u.idx(&t.target)?),
        Clause::Add(t) => Atom::Add(u.idx(&t.modifier)?, u.idx(&t.cause)?, u.idx(&t.target)?),
        Clause::Enable(w, z) => Atom::Enable(u.mask(w)?, u.mask(z)?),
    })
}

fn conflict_dims(n: usize) -> Vec<Vec<Vec<Atom>>> {
    (0..n).tuple_combinations().map(|(i, j)| vec![vec![], vec![Atom::Conflict(i, j)]]).collect()
}

fn disable_dims(n: usize) -> Vec<Vec<Vec<Atom>>> {
    (0..n)
        .cartesian_product(0..n)
        .filter(|(x, y)| x != y)
        .map(|(x, y)| vec![vec![], vec![Atom::Disable(x, y)]])
        .collect()
}

fn pair_dims(n: usize, f: fn(usize, usize) -> Atom) -> Vec<Vec<Vec<Atom>>> {
    (0..n).cartesian_product(0..n).map(|(c, t)| vec![vec![], vec![f(c, t)]]).collect()
}

/// Per target, every antichain of nonempty member sets.
fn antichain_dims(n: usize) -> Result<Vec<Vec<Vec<Atom>>>> {
    if n > ANTICHAIN_EVENTS {
        return Err(Error::BoundExceeded { size: 1u128 << ((1u128 << n) - 1).min(127), limit: SEARCH_LIMIT });
    }
    let sets: Vec<Mask> = (1..=full(n)).collect();
    let mut antichains = Vec::new();
    for pick in 0u64..(1u64 << sets.len()) {
        let family: Vec<Mask> = bits(pick).map(|i| sets[i]).collect();
        let free = family.iter().tuple_combinations().all(|(a, b)| a & !b != 0 && b & !a != 0);
        if free {
            antichains.push(family);
        }
    }
    Ok((0..n)
        .map(|t| antichains.iter().map(|f| f.iter().map(|&m| Atom::Bundle(m, t)).collect()).collect())
        .collect())
}

/// Per dependency `c → t`, the options for the initial relation and the
/// modifiers, each drawn from events other than `c` and `t`.
fn dependency_dims(n: usize, options: fn(usize, usize, Mask) -> Vec<Vec<Atom>>) -> Vec<Vec<Vec<Atom>>> {
    (0..n)
        .cartesian_product(0..n)
        .map(|(c, t)| options(c, t, full(n) & !bit(c) & !bit(t)))
        .collect()
}

/// Absent, or present with any set of droppers.
fn ses_options(c: usize, t: usize, cand: Mask) -> Vec<Vec<Atom>> {
    let mut out = vec![vec![]];
    for d in submasks(cand) {
        out.push(std::iter::once(Atom::Cause(c, t)).chain(bits(d).map(|m| Atom::Drop(m, c, t))).collect());
    }
    out
}

/// Present initially, or absent with any set of adders.
fn ges_options(c: usize, t: usize, cand: Mask) -> Vec<Vec<Atom>> {
    let mut out = vec![vec![Atom::Cause(c, t)]];
    for a in submasks(cand) {
        out.push(bits(a).map(|m| Atom::Add(m, c, t)).collect());
    }
    out
}

/// Initial presence with disjoint adders and droppers: droppers need the
/// dependency initially or an adder, and adders of an initial dependency
/// need a dropper.
fn dces_options(c: usize, t: usize, cand: Mask) -> Vec<Vec<Atom>> {
    let mut out = Vec::new();
    for init in [false, true] {
        for a in submasks(cand) {
            for d in submasks(cand & !a) {
                if (d != 0 && !init && a == 0) || (init && a != 0 && d == 0) {
                    continue;
                }
                let mut o: Vec<Atom> = Vec::new();
                if init {
                    o.push(Atom::Cause(c, t));
                }
                o.extend(bits(a).map(|m| Atom::Add(m, c, t)));
                o.extend(bits(d).map(|m| Atom::Drop(m, c, t)));
                out.push(o);
            }
        }
    }
    out
}

fn enabling_dims(n: usize) -> Result<Vec<Vec<Vec<Atom>>>> {
    if n > 2 {
        let size = 1u128 << ((1u128 << (2 * n)).min(127));
        return Err(Error::BoundExceeded { size, limit: SEARCH_LIMIT });
    }
    Ok(submasks(full(n))
        .cartesian_product(submasks(full(n)).collect::<Vec<_>>())
        .map(|(w, z)| vec![vec![], vec![Atom::Enable(w, z)]])
        .collect())
}

impl Enumeration {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn events(&self) -> EventSet {
        self.u.set(self.u.all())
    }

    /// Number of candidates before the cross-dimension filters (bundle
    /// stability and cause bounds).
    pub fn size(&self) -> u128 {
        self.dims.iter().fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
    }

    pub(crate) fn universe(&self) -> &Universe {
        &self.u
    }

    fn atoms(&self, mut index: u128) -> Vec<Atom> {
        let mut out = Vec::new();
        for d in &self.dims {
            let len = d.len() as u128;
            out.extend(d[(index % len) as usize].iter().copied());
            index /= len;
        }
        out
    }

    /// The candidate at `index`, unless a cross-dimension filter drops it.
    pub(crate) fn raw(&self, index: u128) -> Option<Raw> {
        let mut raw = Raw::new(self.u.len());
        for a in self.atoms(index) {
            raw.add(a);
        }
        let bounded = self.min_causes.iter().all(|&(e, k)| raw.cause[e].count_ones() as usize >= k);
        (bounded && self.stable(&raw)).then_some(raw)
    }

    /// Members of a bundle exclude each other: by conflict for bundle event
    /// structures, by mutual disabling for extended ones.
    fn stable(&self, raw: &Raw) -> bool {
        let excl: Vec<Mask> = match self.kind {
            Kind::Bes => raw.conflict.clone(),
            Kind::Ebes => {
                let n = self.u.len();
                (0..n).map(|x| (0..n).filter(|&y| raw.disabled_by[y] & bit(x) != 0 && raw.disabled_by[x] & bit(y) != 0).fold(0, |a, y| a | bit(y))).collect()
            }
            _ => return true,
        };
        raw.bundles
            .iter()
            .flatten()
            .all(|&m| bits(m).all(|x| m & !bit(x) & !excl[x] == 0))
    }

    pub fn get(&self, index: u128) -> Option<Structure> {
        if index >= self.size() {
            return None;
        }
        self.raw(index)?;
        Some(self.structure(&self.atoms(index)))
    }

    pub fn iter(&self) -> impl Iterator<Item = Structure> + '_ {
        (0..self.size()).filter_map(|i| self.get(i))
    }

    fn structure(&self, atoms: &[Atom]) -> Structure {
        let u = &self.u;
        let name = |i: usize| u.name(i).clone();
        let mut conflict = Relation::new();
        let mut cause = Relation::new();
        let mut disabling = Relation::new();
        let mut bundles = BTreeSet::new();
        let mut shrink = BTreeSet::new();
        let mut grow = BTreeSet::new();
        let mut enabling = Enabling::new();
        for &a in atoms {
            match a {
                Atom::Conflict(i, j) => {
                    conflict.insert((name(i), name(j)));
                }
                Atom::Cause(c, t) => {
                    cause.insert((name(c), name(t)));
                }
                Atom::Disable(x, y) => {
                    disabling.insert((name(x), name(y)));
                }
                Atom::Bundle(m, t) => {
                    bundles.insert(Bundle { members: u.set(m), target: name(t) });
                }
                Atom::Drop(m, c, t) => {
                    shrink.insert(Triple::new(name(m), name(c), name(t)));
                }
                Atom::Add(m, c, t) => {
                    grow.insert(Triple::new(name(m), name(c), name(t)));
                }
                Atom::Enable(w, z) => {
                    enabling.insert((u.set(w), u.set(z)));
                }
            }
        }
        let events = self.events();
        let built: std::result::Result<Structure, _> = match self.kind {
            Kind::Rpes => Rpes::new(events, conflict, cause).map(Into::into),
            Kind::Bes => Bes::new(events, conflict, bundles).map(Into::into),
            Kind::Ebes => Ebes::new(events, disabling, bundles).map(Into::into),
            Kind::Des => Des::new(events, conflict, bundles).map(Into::into),
            Kind::Ses => Ses::new(events, conflict, cause, shrink).map(Into::into),
            Kind::Ges => Ges::new(events, cause, grow).map(Into::into),
            Kind::Dces => Dces::new(events, cause, shrink, grow).map(Into::into),
            Kind::Rces => Rces::new(events, enabling).map(Into::into),
        };
        built.expect("enumerated candidates are well formed")
    }

    /// Applies `matches` to every candidate. Returns the number of
    /// candidates that passed the filters and the first matching index in
    /// enumeration order.
    pub(crate) fn search<F>(&self, matches: F) -> (u64, Option<u128>)
    where
        F: Fn(&Raw) -> bool + Sync,
    {
        let size = self.size() as u64;
        (0..size)
            .into_par_iter()
            .fold(
                || (0u64, None::<u128>),
                |(count, first), i| match self.raw(i as u128) {
                    None => (count, first),
                    Some(raw) => {
                        let hit = first.is_none() && matches(&raw);
                        (count + 1, if hit { Some(i as u128) } else { first })
                    }
                },
            )
            .reduce(
                || (0, None),
                |(c1, f1), (c2, f2)| {
                    let first = match (f1, f2) {
                        (Some(a), Some(b)) => Some(a.min(b)),
                        (a, b) => a.or(b),
                    };
                    (c1 + c2, first)
                },
            )
    }
}
