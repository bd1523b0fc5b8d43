//! Shrinking causality: a dropper `d` in `(d, c, t)` removes the dependency
//! `c → t` once it occurs.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::bundle::{posets_from_choices, select_causes, Bundle, CauseFlavor, Des};
use crate::error::{Error, Result, Violation, Violations};
use crate::events::{fresh_names, Configuration, EventId, EventSet, Poset, Relation, Trace, TransitionGraph, Triple};
use crate::kernel::{bit, bits, position_weights, Mask, Sequential, Stepper, Universe};
use crate::validate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ses {
    events: EventSet,
    conflict: Relation,
    enabling: Relation,
    shrink: BTreeSet<Triple>,
}

impl Ses {
    pub fn new(events: EventSet, conflict: Relation, enabling: Relation, shrink: BTreeSet<Triple>) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &conflict, "conflict", &mut v);
        validate::pair_within(&events, &enabling, "enabling", &mut v);
        validate::triples_within(&events, &shrink, "drop", &mut v);
        let conflict = validate::symmetric_conflict(&conflict, false, &mut v);
        for t in &shrink {
            if !enabling.contains(&t.pair()) {
                v.push(Violation::new(format!("dropper without dependency: {t}")));
            }
            if t.modifier == t.cause {
                v.push(Violation::new(format!("modifier equals cause: {t}")));
            }
            if t.modifier == t.target {
                v.push(Violation::new(format!("modifier equals target: {t}")));
            }
        }
        Violations(v).into_result(Ses { events, conflict, enabling, shrink })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn conflict(&self) -> &Relation {
        &self.conflict
    }

    pub fn enabling(&self) -> &Relation {
        &self.enabling
    }

    pub fn shrink(&self) -> &BTreeSet<Triple> {
        &self.shrink
    }

    pub(crate) fn kernel(&self) -> Result<SesKernel> {
        let u = Universe::new(&self.events)?;
        let n = u.len();
        let conflict = u.preds(&self.conflict)?;
        let ic = u.preds(&self.enabling)?;
        let mut drop_by = vec![vec![0; n]; n];
        for t in &self.shrink {
            drop_by[u.idx(&t.target)?][u.idx(&t.cause)?] |= bit(u.idx(&t.modifier)?);
        }
        Ok(SesKernel { u, conflict, ic, drop_by })
    }

    /// Initial causes of `e`.
    pub fn ic(&self, e: &EventId) -> Result<EventSet> {
        let k = self.kernel()?;
        Ok(k.u.set(k.ic[k.u.idx(e)?]))
    }

    /// Causes of `e` dropped by some event of `h`.
    pub fn dc(&self, h: &EventSet, e: &EventId) -> Result<EventSet> {
        let k = self.kernel()?;
        Ok(k.u.set(k.dc(k.u.mask(h)?, k.u.idx(e)?)))
    }

    /// Dependencies dropped by the events of `Y ∖ X`.
    pub fn dropped(&self, x: &EventSet, y: &EventSet) -> Result<Relation> {
        let k = self.kernel()?;
        let (x, y) = (k.u.mask(x)?, k.u.mask(y)?);
        Ok(k.u.relation(&k.dropped(x, y)))
    }

    pub fn is_trace(&self, t: &Trace) -> Result<bool> {
        let k = self.kernel()?;
        Ok(k.is_trace_seq(&k.u.seq(t)?))
    }

    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        let k = self.kernel()?;
        Ok(k.trace_seqs().iter().map(|s| k.u.trace(s)).collect())
    }

    /// Alphabets of traces.
    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.reachable_sets()))
    }

    pub fn step(&self, x: &Configuration, y: &Configuration) -> Result<bool> {
        let k = self.kernel()?;
        Ok(k.step(k.u.mask(x)?, k.u.mask(y)?))
    }

    /// Enabling minus every dependency dropped by `x`.
    pub fn caus(&self, x: &Configuration) -> Result<Relation> {
        let k = self.kernel()?;
        Ok(k.u.relation(&k.caus(k.u.mask(x)?)))
    }

    /// Step on states; returns the successor causality relation if `X ↦ Y`
    /// is allowed from `(X, caus_x)`.
    pub fn step_stateful(&self, x: &Configuration, caus_x: &Relation, y: &Configuration) -> Result<Option<Relation>> {
        let k = self.kernel()?;
        let caus = k.u.preds(caus_x)?;
        Ok(k.step_stateful(k.u.mask(x)?, &caus, k.u.mask(y)?).map(|c| k.u.relation(&c)))
    }

    pub fn reachable_configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.mask_graph().nodes))
    }

    pub fn transition_graph(&self) -> Result<TransitionGraph> {
        let k = self.kernel()?;
        Ok(k.u.graph(&k.mask_graph()))
    }

    /// Earliest causes of the event at 1-based `position` of `t`.
    pub fn early_causes(&self, t: &Trace, position: usize) -> Result<BTreeSet<EventSet>> {
        self.causes(t, position, CauseFlavor::Early)
    }

    /// Candidate causes at 1-based `position` of `t`. Bundle satisfaction is
    /// not defined for this family.
    pub fn causes(&self, t: &Trace, position: usize, flavor: CauseFlavor) -> Result<BTreeSet<EventSet>> {
        let k = self.kernel()?;
        let seq = k.trace_seq(t)?;
        if position == 0 || position > seq.len() {
            return Err(Error::PositionOutOfRange { position, len: seq.len() });
        }
        let choices = k.cause_choices(&seq, flavor)?;
        Ok(choices[position - 1].iter().map(|&m| k.u.set(m)).collect())
    }

    pub fn posets_of_trace(&self, t: &Trace, flavor: CauseFlavor) -> Result<BTreeSet<Poset>> {
        let k = self.kernel()?;
        let seq = k.trace_seq(t)?;
        let choices = k.cause_choices(&seq, flavor)?;
        Ok(posets_from_choices(&seq, &choices, k.u.len()).iter().map(|p| k.u.poset(p)).collect())
    }

    pub fn posets(&self, flavor: CauseFlavor) -> Result<BTreeSet<Poset>> {
        let k = self.kernel()?;
        let mut all = HashSet::new();
        for seq in k.trace_seqs() {
            let choices = k.cause_choices(&seq, flavor)?;
            all.extend(posets_from_choices(&seq, &choices, k.u.len()));
        }
        Ok(all.iter().map(|p| k.u.poset(p)).collect())
    }
}

/// One bundle per initial dependency `x → y`: `x` together with all droppers
/// of `x → y` point at `y`.
pub fn ses_to_des(s: &Ses) -> Des {
    let bundles = s
        .enabling
        .iter()
        .map(|(x, y)| {
            let mut members: EventSet = s
                .shrink
                .iter()
                .filter(|t| &t.cause == x && &t.target == y)
                .map(|t| t.modifier.clone())
                .collect();
            members.insert(x.clone());
            Bundle { members, target: y.clone() }
        })
        .collect();
    Des::new(s.events.clone(), s.conflict.clone(), bundles).expect("a valid shrinking structure yields a valid dual structure")
}

/// Each bundle `X_i ↦ e` becomes a fresh impossible event `x_i` with
/// `x_i → e`, dropped by every member of `X_i`. A bundle member equal to its
/// target can never satisfy the bundle and gets no dropper.
pub fn des_to_ses(d: &Des) -> Ses {
    let fresh = fresh_names(d.events(), "__x", d.bundles().len());
    let mut events = d.events().clone();
    let mut enabling = Relation::new();
    let mut shrink = BTreeSet::new();
    for (b, x) in d.bundles().iter().zip(fresh) {
        events.insert(x.clone());
        enabling.insert((x.clone(), b.target.clone()));
        enabling.insert((x.clone(), x.clone()));
        for m in b.members.iter().filter(|&m| m != &b.target) {
            shrink.insert(Triple::new(m.clone(), x.clone(), b.target.clone()));
        }
    }
    Ses::new(events, d.conflict().clone(), enabling, shrink).expect("the encoding satisfies the shrinking constraints")
}

pub(crate) struct SesKernel {
    pub u: Universe,
    pub conflict: Vec<Mask>,
    pub ic: Vec<Mask>,
    /// `drop_by[t][c]` is the mask of droppers of `c → t`.
    pub drop_by: Vec<Vec<Mask>>,
}

impl SesKernel {
    pub(crate) fn dc(&self, h: Mask, e: usize) -> Mask {
        self.drop_by[e].iter().enumerate().filter(|(_, &d)| d & h != 0).fold(0, |a, (c, _)| a | bit(c))
    }

    /// Predecessor masks of the dependencies dropped by `y ∖ x`.
    pub(crate) fn dropped(&self, x: Mask, y: Mask) -> Vec<Mask> {
        (0..self.u.len()).map(|t| self.dc(y & !x, t)).collect()
    }

    pub(crate) fn caus(&self, x: Mask) -> Vec<Mask> {
        (0..self.u.len()).map(|t| self.ic[t] & !self.dc(x, t)).collect()
    }

    pub(crate) fn conflict_free(&self, y: Mask) -> bool {
        bits(y).all(|i| self.conflict[i] & y == 0)
    }

    pub(crate) fn step_stateful(&self, x: Mask, caus: &[Mask], y: Mask) -> Option<Vec<Mask>> {
        if x & !y != 0 || x == y || !self.conflict_free(y) {
            return None;
        }
        if bits(y & !x).any(|e| caus[e] & !x != 0) {
            return None;
        }
        let dropped = self.dropped(x, y);
        Some(caus.iter().zip(dropped).map(|(&c, d)| c & !d).collect())
    }

    fn trace_seq(&self, t: &Trace) -> Result<Vec<usize>> {
        let seq = self.u.seq(t)?;
        if !self.is_trace_seq(&seq) {
            return Err(Error::NotATrace(t.to_string()));
        }
        Ok(seq)
    }

    pub(crate) fn cause_choices(&self, seq: &[usize], flavor: CauseFlavor) -> Result<Vec<Vec<Mask>>> {
        if flavor == CauseFlavor::Bsat {
            return Err(Error::Unsupported {
                semantics: "bundle satisfaction posets",
                kind: "ses",
            });
        }
        let w = position_weights(seq, self.u.len());
        let mut prior = 0;
        let mut out = Vec::with_capacity(seq.len());
        for &e in seq {
            let droppers = self.drop_by[e].iter().fold(0, |a, &d| a | d);
            let domain = (self.ic[e] | droppers) & prior;
            let sat = |u: Mask| self.ic[e] & !self.dc(u, e) & !u == 0;
            out.push(select_causes(flavor, domain, &sat, None, &w));
            prior |= bit(e);
        }
        Ok(out)
    }
}

impl Sequential for SesKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn can_extend(&self, done: Mask, e: usize) -> bool {
        self.conflict[e] & done == 0 && self.ic[e] & !self.dc(done, e) & !done == 0
    }
}

impl Stepper for SesKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn step(&self, x: Mask, y: Mask) -> bool {
        x & !y == 0
            && x != y
            && self.conflict_free(y)
            && bits(y & !x).all(|e| self.ic[e] & !self.dc(x, e) & !x == 0)
    }
}
