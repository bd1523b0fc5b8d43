//! Event structures for resolvable conflicts: set-to-set enabling `W ⊢ Z`
//! and the step relation it induces.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result, Violation, Violations};
use crate::events::{fmt_set, Configuration, EventSet, TransitionGraph};
use crate::kernel::{bits, submasks, Mask, MaskGraph, Stepper, Universe, ENUMERATION_LIMIT};
use crate::validate;

pub type Enabling = BTreeSet<(EventSet, EventSet)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rces {
    events: EventSet,
    enabling: Enabling,
}

impl Rces {
    pub fn new(events: EventSet, enabling: Enabling) -> Result<Self, Violations> {
        let mut v = Vec::new();
        for (w, z) in &enabling {
            let what = format!("enabling {} |- {}", fmt_set(w), fmt_set(z));
            validate::set_within(&events, w, &what, &mut v);
            validate::set_within(&events, z, &what, &mut v);
        }
        if events.len() > ENUMERATION_LIMIT {
            v.push(Violation::new(format!(
                "{} events exceed the limit of {ENUMERATION_LIMIT}",
                events.len()
            )));
        }
        Violations(v).into_result(Rces { events, enabling })
    }

    /// `∅ ⊢ Z` for every `Z ⊆ s` except the listed sets.
    pub fn all_subsets_except(s: &EventSet, except: &[EventSet]) -> Enabling {
        let names: Vec<_> = s.iter().cloned().collect();
        let mut out = Enabling::new();
        for m in submasks(crate::kernel::full(names.len())) {
            let z: EventSet = bits(m).map(|i| names[i].clone()).collect();
            if !except.contains(&z) {
                out.insert((EventSet::new(), z));
            }
        }
        out
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn enabling(&self) -> &Enabling {
        &self.enabling
    }

    pub(crate) fn kernel(&self) -> Result<RcesKernel> {
        let u = Universe::new(&self.events)?;
        let pairs = self
            .enabling
            .iter()
            .map(|(w, z)| Ok((u.mask(w)?, u.mask(z)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RcesKernel { u, pairs })
    }

    /// `X ⊂ Y` and every subset of `Y` is enabled by some subset of `X`.
    pub fn step(&self, x: &Configuration, y: &Configuration) -> Result<bool> {
        let k = self.kernel()?;
        Ok(k.step(k.u.mask(x)?, k.u.mask(y)?))
    }

    pub fn reachable_configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.mask_graph().nodes))
    }

    pub fn transition_graph(&self) -> Result<TransitionGraph> {
        let k = self.kernel()?;
        Ok(k.u.graph(&k.mask_graph()))
    }

    pub(crate) fn from_graph(u: &Universe, g: &MaskGraph) -> Result<Rces> {
        if u.len() > ENUMERATION_LIMIT {
            return Err(Error::TooManyEvents { got: u.len(), limit: ENUMERATION_LIMIT });
        }
        let mut enabling = Enabling::new();
        for &(x, y) in &g.edges {
            for z in submasks(y) {
                enabling.insert((u.set(x), u.set(z)));
            }
        }
        Ok(Rces {
            events: u.set(u.all()),
            enabling,
        })
    }
}

pub(crate) struct RcesKernel {
    pub u: Universe,
    pub pairs: Vec<(Mask, Mask)>,
}

impl Stepper for RcesKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn step(&self, x: Mask, y: Mask) -> bool {
        if x & !y != 0 || x == y {
            return false;
        }
        let covered: HashSet<Mask> = self
            .pairs
            .iter()
            .filter(|&&(w, z)| w & !x == 0 && z & !y == 0)
            .map(|&(_, z)| z)
            .collect();
        covered.len() as u64 == 1u64 << y.count_ones()
    }
}
