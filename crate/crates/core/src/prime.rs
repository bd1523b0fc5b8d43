//! Relaxed prime event structures: binary conflict and an enabling relation
//! that need not be a partial order.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result, Violations};
use crate::events::{Configuration, EventId, EventSet, Poset, Relation, Trace};
use crate::kernel::{bit, bits, close_in_place, has_cycle, Mask, MaskPoset, Sequential, Universe, ENUMERATION_LIMIT};
use crate::validate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rpes {
    events: EventSet,
    conflict: Relation,
    enabling: Relation,
}

impl Rpes {
    /// Validates the candidate; one-sided conflict pairs are mirrored.
    pub fn new(events: EventSet, conflict: Relation, enabling: Relation) -> Result<Self, Violations> {
        Self::build(events, conflict, enabling, false)
    }

    /// Like [`Rpes::new`] but rejects conflict pairs given without their mirror.
    pub fn new_strict(events: EventSet, conflict: Relation, enabling: Relation) -> Result<Self, Violations> {
        Self::build(events, conflict, enabling, true)
    }

    fn build(events: EventSet, conflict: Relation, enabling: Relation, strict: bool) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &conflict, "conflict", &mut v);
        validate::pair_within(&events, &enabling, "enabling", &mut v);
        let conflict = validate::symmetric_conflict(&conflict, strict, &mut v);
        Violations(v).into_result(Rpes { events, conflict, enabling })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    /// Symmetrically closed.
    pub fn conflict(&self) -> &Relation {
        &self.conflict
    }

    pub fn enabling(&self) -> &Relation {
        &self.enabling
    }

    pub(crate) fn kernel(&self) -> Result<RpesKernel> {
        let u = Universe::new(&self.events)?;
        let preds = u.preds(&self.enabling)?;
        let conflict = u.preds(&self.conflict)?;
        Ok(RpesKernel { u, preds, conflict })
    }

    /// Conflict free, downward closed under enabling and free of enabling
    /// cycles (self-loops count as cycles).
    pub fn is_configuration(&self, c: &Configuration) -> Result<bool> {
        let k = self.kernel()?;
        let m = k.u.mask(c)?;
        Ok(k.is_configuration(m))
    }

    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        k.limit()?;
        Ok(k.u.configs(&k.reachable_sets()))
    }

    /// Backward closure of `e` under enabling.
    pub fn causes(&self, e: &EventId) -> Result<EventSet> {
        let k = self.kernel()?;
        let i = k.u.idx(e)?;
        let mut reach = k.preds.clone();
        close_in_place(k.u.all(), &mut reach);
        Ok(k.u.set(reach[i] | bit(i)))
    }

    /// Causes of `d` inside the configuration `c`.
    pub fn causes_in(&self, c: &Configuration, d: &EventId) -> Result<EventSet> {
        let k = self.kernel()?;
        let m = k.u.mask(c)?;
        let i = k.u.idx(d)?;
        if m & bit(i) == 0 {
            return Err(Error::NotAConfiguration(format!("{d} is not in the given set")));
        }
        let mut reach: Vec<Mask> = k.preds.iter().map(|&p| p & m).collect();
        close_in_place(m, &mut reach);
        Ok(k.u.set(reach[i] | bit(i)))
    }

    /// Every event occurs in some configuration.
    pub fn is_full(&self) -> Result<bool> {
        let k = self.kernel()?;
        k.limit()?;
        let possible = k.reachable_sets().iter().fold(0, |a, &m| a | m);
        Ok(possible == k.u.all())
    }

    /// Syntactic conflict among possible events coincides with the absence of
    /// a common configuration.
    pub fn is_faithful(&self) -> Result<bool> {
        let k = self.kernel()?;
        k.limit()?;
        let configs = k.reachable_sets();
        let possible = configs.iter().fold(0, |a, &m| a | m);
        for i in bits(possible) {
            for j in bits(possible & !bit(i)) {
                let together = configs.iter().any(|&c| c & bit(i) != 0 && c & bit(j) != 0);
                let syntactic = k.conflict[j] & bit(i) != 0;
                if syntactic == together {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// One poset per configuration, ordered by the closure of enabling.
    pub fn posets(&self) -> Result<BTreeSet<Poset>> {
        let k = self.kernel()?;
        k.limit()?;
        Ok(k.reachable_sets().into_iter().map(|c| k.u.poset(&k.poset(c))).collect())
    }

    /// Sequences each of whose prefixes is a configuration.
    pub fn is_trace(&self, t: &Trace) -> Result<bool> {
        let k = self.kernel()?;
        Ok(k.is_trace_seq(&k.u.seq(t)?))
    }

    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        let k = self.kernel()?;
        Ok(k.trace_seqs().iter().map(|s| k.u.trace(s)).collect())
    }
}

pub(crate) struct RpesKernel {
    pub u: Universe,
    pub preds: Vec<Mask>,
    pub conflict: Vec<Mask>,
}

impl RpesKernel {
    fn limit(&self) -> Result<()> {
        if self.u.len() > ENUMERATION_LIMIT {
            return Err(Error::TooManyEvents {
                got: self.u.len(),
                limit: ENUMERATION_LIMIT,
            });
        }
        Ok(())
    }

    pub(crate) fn is_configuration(&self, m: Mask) -> bool {
        let conflict_free = bits(m).all(|i| self.conflict[i] & m == 0);
        let closed = bits(m).all(|i| self.preds[i] & !m == 0);
        conflict_free && closed && !has_cycle(m, &self.preds)
    }

    pub(crate) fn poset(&self, c: Mask) -> MaskPoset {
        MaskPoset::close(c, &self.preds).expect("configurations are free of enabling cycles")
    }
}

/// Adding `e` keeps a configuration a configuration iff `e` is conflict free
/// with it and all its causes are present; a self-loop on `e` can never be
/// satisfied since `e` is not yet present.
impl Sequential for RpesKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn can_extend(&self, done: Mask, e: usize) -> bool {
        self.conflict[e] & done == 0 && self.preds[e] & !done == 0
    }
}
