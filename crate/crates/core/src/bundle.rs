//! Bundle, extended bundle and dual event structures. A bundle `X ↦ e` is
//! satisfied once some member of `X` has occurred; `e` needs all its bundles
//! satisfied.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation, Violations};
use crate::events::{fmt_set, Configuration, EventId, EventSet, Poset, Relation, Trace};
use crate::kernel::{
    bit, bits, minimal_sets, position_weights, submasks, weight, Mask, MaskPoset, Sequential, Universe,
};
use crate::validate;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Bundle {
    pub members: EventSet,
    pub target: EventId,
}

impl Bundle {
    pub fn new<I, S>(members: I, target: impl Into<EventId>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Bundle {
            members: crate::events::event_set(members),
            target: target.into(),
        }
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", fmt_set(&self.members), self.target)
    }
}

/// How a cause is picked for an event among its satisfied bundles.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CauseFlavor {
    /// The earliest satisfying set of prior events.
    Early,
    /// Any satisfying set of prior bundle members.
    Liberal,
    /// Sets onto which the bundles map surjectively by picking one member each.
    Bsat,
    /// Satisfying sets without a satisfying proper subset.
    Minimal,
    /// The latest minimal satisfying set.
    Late,
}

impl CauseFlavor {
    pub const ALL: [CauseFlavor; 5] = [
        CauseFlavor::Early,
        CauseFlavor::Liberal,
        CauseFlavor::Bsat,
        CauseFlavor::Minimal,
        CauseFlavor::Late,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CauseFlavor::Early => "early",
            CauseFlavor::Liberal => "liberal",
            CauseFlavor::Bsat => "bsat",
            CauseFlavor::Minimal => "minimal",
            CauseFlavor::Late => "late",
        }
    }
}

impl std::str::FromStr for CauseFlavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CauseFlavor::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownName { what: "cause flavor", name: s.to_string() })
    }
}

fn check_bundles(events: &EventSet, bundles: &BTreeSet<Bundle>, v: &mut Vec<Violation>) {
    for b in bundles {
        validate::set_within(events, &b.members, &format!("bundle {b}"), v);
        if !events.contains(&b.target) {
            v.push(Violation::new(format!("bundle {b} targets undeclared event {}", b.target)));
        }
    }
}

/// Bundles with conflict; members of a bundle are pairwise in conflict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bes {
    events: EventSet,
    conflict: Relation,
    bundles: BTreeSet<Bundle>,
}

impl Bes {
    pub fn new(events: EventSet, conflict: Relation, bundles: BTreeSet<Bundle>) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &conflict, "conflict", &mut v);
        check_bundles(&events, &bundles, &mut v);
        let conflict = validate::symmetric_conflict(&conflict, false, &mut v);
        for b in &bundles {
            for x in &b.members {
                for y in b.members.range(x..).skip(1) {
                    if !validate::has_pair(&conflict, x, y) {
                        v.push(Violation::new(format!(
                            "stability: members {x} and {y} of bundle {b} are not in conflict"
                        )));
                    }
                }
            }
        }
        Violations(v).into_result(Bes { events, conflict, bundles })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn conflict(&self) -> &Relation {
        &self.conflict
    }

    pub fn bundles(&self) -> &BTreeSet<Bundle> {
        &self.bundles
    }

    /// The same relations read as a dual event structure.
    pub fn to_des(&self) -> Des {
        Des {
            events: self.events.clone(),
            conflict: self.conflict.clone(),
            bundles: self.bundles.clone(),
        }
    }

    pub(crate) fn kernel(&self) -> Result<BundleKernel> {
        BundleKernel::new(&self.events, &self.conflict, &Relation::new(), &self.bundles)
    }

    pub fn is_trace(&self, t: &Trace) -> Result<bool> {
        self.kernel()?.is_trace(t)
    }

    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        Ok(self.kernel()?.traces())
    }

    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.reachable_sets()))
    }

    pub fn poset_of_configuration(&self, c: &Configuration) -> Result<Poset> {
        self.kernel()?.poset_of(c)
    }

    pub fn posets(&self) -> Result<BTreeSet<Poset>> {
        Ok(self.kernel()?.posets())
    }
}

/// Bundles with an asymmetric disabling relation instead of conflict.
/// A pair `(x, y)` in `disabling` means `y` disables `x`: whenever both
/// occur, `x` comes first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ebes {
    events: EventSet,
    disabling: Relation,
    bundles: BTreeSet<Bundle>,
}

impl Ebes {
    pub fn new(events: EventSet, disabling: Relation, bundles: BTreeSet<Bundle>) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &disabling, "disabling", &mut v);
        validate::irreflexive(&disabling, "disabling", &mut v);
        check_bundles(&events, &bundles, &mut v);
        for b in &bundles {
            for x in &b.members {
                for y in b.members.range(x..).skip(1) {
                    if !validate::has_pair(&disabling, x, y) || !validate::has_pair(&disabling, y, x) {
                        v.push(Violation::new(format!(
                            "stability: members {x} and {y} of bundle {b} do not disable each other"
                        )));
                    }
                }
            }
        }
        Violations(v).into_result(Ebes { events, disabling, bundles })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn disabling(&self) -> &Relation {
        &self.disabling
    }

    pub fn bundles(&self) -> &BTreeSet<Bundle> {
        &self.bundles
    }

    pub(crate) fn kernel(&self) -> Result<BundleKernel> {
        BundleKernel::new(&self.events, &Relation::new(), &self.disabling, &self.bundles)
    }

    pub fn is_trace(&self, t: &Trace) -> Result<bool> {
        self.kernel()?.is_trace(t)
    }

    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        Ok(self.kernel()?.traces())
    }

    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.reachable_sets()))
    }

    pub fn poset_of_configuration(&self, c: &Configuration) -> Result<Poset> {
        self.kernel()?.poset_of(c)
    }

    pub fn posets(&self) -> Result<BTreeSet<Poset>> {
        Ok(self.kernel()?.posets())
    }
}

/// Bundles with conflict but without the stability requirement, so the
/// cause of an event can be ambiguous.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Des {
    events: EventSet,
    conflict: Relation,
    bundles: BTreeSet<Bundle>,
}

impl Des {
    pub fn new(events: EventSet, conflict: Relation, bundles: BTreeSet<Bundle>) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &conflict, "conflict", &mut v);
        check_bundles(&events, &bundles, &mut v);
        let conflict = validate::symmetric_conflict(&conflict, false, &mut v);
        Violations(v).into_result(Des { events, conflict, bundles })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn conflict(&self) -> &Relation {
        &self.conflict
    }

    pub fn bundles(&self) -> &BTreeSet<Bundle> {
        &self.bundles
    }

    pub(crate) fn kernel(&self) -> Result<BundleKernel> {
        BundleKernel::new(&self.events, &self.conflict, &Relation::new(), &self.bundles)
    }

    pub fn is_trace(&self, t: &Trace) -> Result<bool> {
        self.kernel()?.is_trace(t)
    }

    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        Ok(self.kernel()?.traces())
    }

    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.reachable_sets()))
    }

    /// Earliest causes of the event at 1-based `position` of `t`.
    pub fn early_causes(&self, t: &Trace, position: usize) -> Result<BTreeSet<EventSet>> {
        self.causes(t, position, CauseFlavor::Early)
    }

    /// Candidate causes of the event at 1-based `position` of `t`.
    pub fn causes(&self, t: &Trace, position: usize, flavor: CauseFlavor) -> Result<BTreeSet<EventSet>> {
        let k = self.kernel()?;
        let seq = k.trace_seq(t)?;
        if position == 0 || position > seq.len() {
            return Err(Error::PositionOutOfRange { position, len: seq.len() });
        }
        let choices = k.cause_choices(&seq, flavor);
        Ok(choices[position - 1].iter().map(|&m| k.u.set(m)).collect())
    }

    /// Posets obtained from the single trace `t`.
    pub fn posets_of_trace(&self, t: &Trace, flavor: CauseFlavor) -> Result<BTreeSet<Poset>> {
        let k = self.kernel()?;
        let seq = k.trace_seq(t)?;
        let choices = k.cause_choices(&seq, flavor);
        Ok(posets_from_choices(&seq, &choices, k.u.len()).iter().map(|p| k.u.poset(p)).collect())
    }

    pub fn posets(&self, flavor: CauseFlavor) -> Result<BTreeSet<Poset>> {
        let k = self.kernel()?;
        let mut all = HashSet::new();
        for seq in k.trace_seqs() {
            let choices = k.cause_choices(&seq, flavor);
            all.extend(posets_from_choices(&seq, &choices, k.u.len()));
        }
        Ok(all.iter().map(|p| k.u.poset(p)).collect())
    }
}

pub(crate) struct BundleKernel {
    pub u: Universe,
    pub conflict: Vec<Mask>,
    /// `blocked[e]` holds every `q` with `disa(e, q)`: once `q` occurred, `e` cannot.
    pub blocked: Vec<Mask>,
    /// Bundle member masks per target.
    pub bundles: Vec<Vec<Mask>>,
    /// Immediate precedence used for posets of configurations.
    pub prec: Vec<Mask>,
}

impl BundleKernel {
    fn new(events: &EventSet, conflict: &Relation, disabling: &Relation, bundles: &BTreeSet<Bundle>) -> Result<Self> {
        let u = Universe::new(events)?;
        let conflict = u.preds(conflict)?;
        let disabled_by = u.preds(disabling)?;
        let mut per_target = vec![Vec::new(); u.len()];
        for b in bundles {
            per_target[u.idx(&b.target)?].push(u.mask(&b.members)?);
        }
        Ok(BundleKernel::from_masks(u, conflict, disabled_by, per_target))
    }

    /// `disabled_by[y]` holds every `x` with `disa(x, y)`.
    pub(crate) fn from_masks(u: Universe, conflict: Vec<Mask>, disabled_by: Vec<Mask>, bundles: Vec<Vec<Mask>>) -> Self {
        let mut blocked = vec![0; u.len()];
        for (q, &ds) in disabled_by.iter().enumerate() {
            for e in bits(ds) {
                blocked[e] |= bit(q);
            }
        }
        let mut prec = disabled_by;
        for (t, bs) in bundles.iter().enumerate() {
            prec[t] |= bs.iter().fold(0, |a, &b| a | b);
        }
        BundleKernel { u, conflict, blocked, bundles, prec }
    }

    fn is_trace(&self, t: &Trace) -> Result<bool> {
        Ok(self.is_trace_seq(&self.u.seq(t)?))
    }

    fn trace_seq(&self, t: &Trace) -> Result<Vec<usize>> {
        let seq = self.u.seq(t)?;
        if !self.is_trace_seq(&seq) {
            return Err(Error::NotATrace(t.to_string()));
        }
        Ok(seq)
    }

    fn traces(&self) -> BTreeSet<Trace> {
        self.trace_seqs().iter().map(|s| self.u.trace(s)).collect()
    }

    pub(crate) fn mask_poset(&self, c: Mask) -> Option<MaskPoset> {
        MaskPoset::close(c, &self.prec)
    }

    fn poset_of(&self, c: &Configuration) -> Result<Poset> {
        let m = self.u.mask(c)?;
        if !self.reachable_sets().contains(&m) {
            return Err(Error::NotAConfiguration(fmt_set(c)));
        }
        let p = self.mask_poset(m).expect("precedence on a configuration is acyclic");
        Ok(self.u.poset(&p))
    }

    fn posets(&self) -> BTreeSet<Poset> {
        self.reachable_sets()
            .into_iter()
            .map(|c| self.u.poset(&self.mask_poset(c).expect("precedence on a configuration is acyclic")))
            .collect()
    }

    /// Cause candidates for every position of a valid trace.
    pub(crate) fn cause_choices(&self, seq: &[usize], flavor: CauseFlavor) -> Vec<Vec<Mask>> {
        let w = position_weights(seq, self.u.len());
        let mut prior = 0;
        let mut out = Vec::with_capacity(seq.len());
        for &e in seq {
            let bundles = &self.bundles[e];
            let domain = bundles.iter().fold(0, |a, &b| a | b);
            let sat = |u: Mask| bundles.iter().all(|&b| b & u != 0);
            let bsat = |u: Mask| surjective_choice(bundles, u);
            out.push(select_causes(flavor, prior & domain, &sat, Some(&bsat), &w));
            prior |= bit(e);
        }
        out
    }
}

impl Sequential for BundleKernel {
    fn size(&self) -> usize {
        self.u.len()
    }

    fn can_extend(&self, done: Mask, e: usize) -> bool {
        self.conflict[e] & done == 0
            && self.blocked[e] & done == 0
            && self.bundles[e].iter().all(|&b| b & done != 0)
    }
}

/// Whether picking one member of each bundle inside `u` can cover all of `u`.
fn surjective_choice(bundles: &[Mask], u: Mask) -> bool {
    fn go(bundles: &[Mask], u: Mask, covered: Mask) -> bool {
        match bundles.split_first() {
            None => covered == u,
            Some((&b, rest)) => {
                // each remaining bundle covers at most one new member
                let need = (u & !covered).count_ones() as usize;
                if need > bundles.len() {
                    return false;
                }
                bits(b & u).any(|x| go(rest, u, covered | bit(x)))
            }
        }
    }
    go(bundles, u, 0)
}

/// Candidate causes among subsets of `domain` for a satisfaction predicate
/// that is upward closed.
pub(crate) fn select_causes(
    flavor: CauseFlavor,
    domain: Mask,
    sat: &dyn Fn(Mask) -> bool,
    bsat: Option<&dyn Fn(Mask) -> bool>,
    w: &[u128],
) -> Vec<Mask> {
    match flavor {
        CauseFlavor::Liberal => submasks(domain).filter(|&u| sat(u)).collect(),
        CauseFlavor::Bsat => {
            let bsat = bsat.expect("bundle satisfaction requires bundles");
            submasks(domain).filter(|&u| sat(u) && bsat(u)).collect()
        }
        CauseFlavor::Minimal => minimal_sets(domain, sat),
        CauseFlavor::Early => minimal_sets(domain, sat).into_iter().min_by_key(|&u| weight(u, w)).into_iter().collect(),
        CauseFlavor::Late => minimal_sets(domain, sat).into_iter().max_by_key(|&u| weight(u, w)).into_iter().collect(),
    }
}

/// One poset per combination of cause choices along the trace.
pub(crate) fn posets_from_choices(seq: &[usize], choices: &[Vec<Mask>], n: usize) -> Vec<MaskPoset> {
    let carrier = seq.iter().fold(0, |a, &e| a | bit(e));
    let mut out = Vec::new();
    let mut strict = vec![0; n];
    fn go(i: usize, seq: &[usize], choices: &[Vec<Mask>], carrier: Mask, strict: &mut Vec<Mask>, out: &mut Vec<MaskPoset>) {
        if i == seq.len() {
            out.push(MaskPoset::close(carrier, strict).expect("causes precede their effects"));
            return;
        }
        for &u in &choices[i] {
            strict[seq[i]] = u;
            go(i + 1, seq, choices, carrier, strict, out);
        }
        strict[seq[i]] = 0;
    }
    go(0, seq, choices, carrier, &mut strict, &mut out);
    out
}
