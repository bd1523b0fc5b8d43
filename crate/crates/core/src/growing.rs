//! Growing causality: an adder `a` in `(a, c, t)` inserts the dependency
//! `c → t` once it occurs. There is no conflict relation; conflicts are
//! expressed by adding impossible causes.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, Violation, Violations};
use crate::events::{fresh_name, Configuration, EventId, EventSet, Relation, Trace, TransitionGraph, Triple};
use crate::kernel::{bit, bits, Mask, Sequential, Stepper, Universe};
use crate::prime::Rpes;
use crate::validate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ges {
    events: EventSet,
    enabling: Relation,
    grow: BTreeSet<Triple>,
}

impl Ges {
    pub fn new(events: EventSet, enabling: Relation, grow: BTreeSet<Triple>) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &enabling, "enabling", &mut v);
        validate::triples_within(&events, &grow, "add", &mut v);
        for t in &grow {
            if enabling.contains(&t.pair()) {
                v.push(Violation::new(format!("adder for an existing dependency: {t}")));
            }
            if t.modifier == t.cause {
                v.push(Violation::new(format!("modifier equals cause: {t}")));
            }
            if t.modifier == t.target {
                v.push(Violation::new(format!("modifier equals target: {t}")));
            }
        }
        Violations(v).into_result(Ges { events, enabling, grow })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn enabling(&self) -> &Relation {
        &self.enabling
    }

    pub fn grow(&self) -> &BTreeSet<Triple> {
        &self.grow
    }

    pub(crate) fn kernel(&self) -> Result<GesKernel> {
        let u = Universe::new(&self.events)?;
        let n = u.len();
        let ic = u.preds(&self.enabling)?;
        let mut add_by = vec![vec![0; n]; n];
        for t in &self.grow {
            add_by[u.idx(&t.target)?][u.idx(&t.cause)?] |= bit(u.idx(&t.modifier)?);
        }
        Ok(GesKernel { u, ic, add_by })
    }

    pub fn ic(&self, e: &EventId) -> Result<EventSet> {
        let k = self.kernel()?;
        Ok(k.u.set(k.ic[k.u.idx(e)?]))
    }

    /// Causes of `e` added by some event of `h`.
    pub fn ac(&self, h: &EventSet, e: &EventId) -> Result<EventSet> {
        let k = self.kernel()?;
        Ok(k.u.set(k.ac(k.u.mask(h)?, k.u.idx(e)?)))
    }

    /// Dependencies added by the events of `Y ∖ X`.
    pub fn added(&self, x: &EventSet, y: &EventSet) -> Result<Relation> {
        let k = self.kernel()?;
        let (x, y) = (k.u.mask(x)?, k.u.mask(y)?);
        Ok(k.u.relation(&k.added(x, y)))
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

    /// Enabling plus every dependency added by `x`.
    pub fn caus(&self, x: &Configuration) -> Result<Relation> {
        let k = self.kernel()?;
        Ok(k.u.relation(&k.caus(k.u.mask(x)?)))
    }

    /// Step on states; returns the successor causality relation if allowed.
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
}

/// Conflicts become mutual additions of a fresh impossible cause.
pub fn rpes_to_ges(p: &Rpes) -> Ges {
    let imp = fresh_name(p.events(), "__imp");
    let mut events = p.events().clone();
    events.insert(imp.clone());
    let mut enabling = p.enabling().clone();
    enabling.insert((imp.clone(), imp.clone()));
    let grow = p
        .conflict()
        .iter()
        .map(|(a, b)| Triple::new(a.clone(), imp.clone(), b.clone()))
        .collect();
    Ges::new(events, enabling, grow).expect("the encoding satisfies the growing constraints")
}

pub(crate) struct GesKernel {
    pub u: Universe,
    pub ic: Vec<Mask>,
    /// `add_by[t][c]` is the mask of adders of `c → t`.
    pub add_by: Vec<Vec<Mask>>,
}

impl GesKernel {
    pub(crate) fn ac(&self, h: Mask, e: usize) -> Mask {
        self.add_by[e].iter().enumerate().filter(|(_, &a)| a & h != 0).fold(0, |m, (c, _)| m | bit(c))
    }

    pub(crate) fn added(&self, x: Mask, y: Mask) -> Vec<Mask> {
        (0..self.u.len()).map(|t| self.ac(y & !x, t)).collect()
    }

    pub(crate) fn caus(&self, x: Mask) -> Vec<Mask> {
        (0..self.u.len()).map(|t| self.ic[t] | self.ac(x, t)).collect()
    }

    /// No target occurs together with one of its adders unless the added
    /// cause is already present.
    pub(crate) fn no_adder_race(&self, x: Mask, y: Mask) -> bool {
        let new = y & !x;
        bits(new).all(|t| self.ac(new, t) & !x == 0)
    }

    pub(crate) fn step_stateful(&self, x: Mask, caus: &[Mask], y: Mask) -> Option<Vec<Mask>> {
        if x & !y != 0 || x == y {
            return None;
        }
        if bits(y & !x).any(|e| caus[e] & !x != 0) || !self.no_adder_race(x, y) {
            return None;
        }
        Some(caus.iter().zip(self.added(x, y)).map(|(&c, a)| c | a).collect())
    }
}

impl Sequential for GesKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn can_extend(&self, done: Mask, e: usize) -> bool {
        (self.ic[e] | self.ac(done, e)) & !done == 0
    }
}

impl Stepper for GesKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn step(&self, x: Mask, y: Mask) -> bool {
        x & !y == 0
            && x != y
            && bits(y & !x).all(|e| (self.ic[e] | self.ac(x, e)) & !x == 0)
            && self.no_adder_race(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{event_set, relation};

    fn tr(s: &str) -> Trace {
        s.parse().unwrap()
    }

    fn gamma_sigma() -> Ges {
        Ges::new(event_set(["a", "b"]), Relation::new(), [Triple::new("b", "a", "a")].into()).unwrap()
    }

    fn fig6d() -> Ges {
        Ges::new(
            event_set(["a", "b", "c"]),
            Relation::new(),
            [Triple::new("a", "c", "b"), Triple::new("b", "c", "a")].into(),
        )
        .unwrap()
    }

    #[test]
    fn validation_messages() {
        let bad = Ges::new(event_set(["a", "c", "t"]), relation([("c", "t")]), [Triple::new("a", "c", "t")].into());
        assert!(bad.unwrap_err().to_string().contains("existing dependency"));
        let bad = Ges::new(event_set(["a", "t"]), Relation::new(), [Triple::new("a", "t", "a")].into());
        assert!(bad.unwrap_err().to_string().contains("modifier equals target"));
        fig6d();
    }

    #[test]
    fn added_causes() {
        let g = gamma_sigma();
        assert_eq!(g.ac(&event_set(["b"]), &"a".into()).unwrap(), event_set(["a"]));
        assert!(g.ac(&EventSet::new(), &"a".into()).unwrap().is_empty());
        assert_eq!(fig6d().added(&EventSet::new(), &event_set(["a"])).unwrap(), relation([("c", "b")]));
        assert_eq!(g.caus(&event_set(["b"])).unwrap(), relation([("a", "a")]));
        assert!(g.caus(&EventSet::new()).unwrap().is_empty());
    }

    #[test]
    fn traces() {
        let g = gamma_sigma();
        assert_eq!(g.traces().unwrap(), [tr("ε"), tr("a"), tr("b"), tr("a b")].into());
        assert!(!g.is_trace(&tr("b a")).unwrap());
        let d = fig6d();
        assert!(!d.is_trace(&tr("a b")).unwrap());
        assert!(d.is_trace(&tr("a c b")).unwrap());
    }

    #[test]
    fn steps() {
        let d = fig6d();
        assert!(!d.step(&EventSet::new(), &event_set(["a", "b"])).unwrap());
        assert!(d.step(&EventSet::new(), &event_set(["a", "c"])).unwrap());
        assert!(!d.step(&event_set(["a"]), &event_set(["a"])).unwrap());
        let free = Ges::new(event_set(["a", "b", "c"]), Relation::new(), BTreeSet::new()).unwrap();
        assert!(free.step(&event_set(["a", "b"]), &event_set(["a", "b", "c"])).unwrap());
    }

    #[test]
    fn stateful_step_agrees_on_fig6d() {
        let d = fig6d();
        let subsets: Vec<EventSet> = crate::kernel::submasks(0b111)
            .map(|m| bits(m).map(|i| ["a", "b", "c"][i].into()).collect())
            .collect();
        for x in &subsets {
            for y in &subsets {
                let stateful = d.step_stateful(x, &d.caus(x).unwrap(), y).unwrap();
                assert_eq!(d.step(x, y).unwrap(), stateful.is_some());
                if let Some(c) = stateful {
                    assert_eq!(c, d.caus(y).unwrap());
                }
            }
        }
    }

    #[test]
    fn prime_embedding() {
        let p = Rpes::new(event_set(["a", "b", "c"]), relation([("a", "c")]), relation([("a", "b")])).unwrap();
        let g = rpes_to_ges(&p);
        assert!(g.events().contains(&"__imp".into()));
        assert_eq!(
            *g.grow(),
            [Triple::new("a", "__imp", "c"), Triple::new("c", "__imp", "a")].into()
        );
        assert_eq!(g.configurations().unwrap(), p.configurations().unwrap());

        let free = Rpes::new(event_set(["a"]), Relation::new(), Relation::new()).unwrap();
        assert!(rpes_to_ges(&free).grow().is_empty());
    }
}
