//! Random structures for property suites and the acceptance run. Every
//! generator returns a structure that passes its family's validator.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dyncaus_core::{Bes, Bundle, Dces, Des, Ebes, EventId, EventSet, Ges, Relation, Rpes, Ses, Structure, Triple};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

pub fn names(n: usize) -> Vec<EventId> {
    NAMES[..n].iter().map(|s| EventId::from(*s)).collect()
}

fn events(n: usize) -> EventSet {
    names(n).into_iter().collect()
}

fn pairs(rng: &mut impl Rng, ev: &[EventId], p: f64, reflexive: bool) -> Relation {
    let mut r = Relation::new();
    for a in ev {
        for b in ev {
            if (reflexive || a != b) && rng.random_bool(p) {
                r.insert((a.clone(), b.clone()));
            }
        }
    }
    r
}

fn conflicts(rng: &mut impl Rng, ev: &[EventId], p: f64) -> Relation {
    let mut r = Relation::new();
    for (i, a) in ev.iter().enumerate() {
        for b in &ev[i + 1..] {
            if rng.random_bool(p) {
                r.insert((a.clone(), b.clone()));
                r.insert((b.clone(), a.clone()));
            }
        }
    }
    r
}

fn subset(rng: &mut impl Rng, ev: &[EventId], p: f64) -> EventSet {
    ev.iter().filter(|_| rng.random_bool(p)).cloned().collect()
}

fn bundles(rng: &mut impl Rng, ev: &[EventId], max: usize) -> BTreeSet<Bundle> {
    let mut out = BTreeSet::new();
    if ev.is_empty() {
        return out;
    }
    for _ in 0..rng.random_range(0..=max) {
        let target = ev.choose(rng).unwrap().clone();
        let mut members = subset(rng, ev, 0.4);
        if members.is_empty() {
            members.insert(ev.choose(rng).unwrap().clone());
        }
        // members containing the target make it impossible; keep that rare
        if members.contains(&target) && rng.random_bool(0.7) {
            members.remove(&target);
            if members.is_empty() {
                continue;
            }
        }
        out.insert(Bundle { members, target });
    }
    out
}

fn size(rng: &mut impl Rng, max: usize) -> usize {
    rng.random_range(1..=max)
}

pub fn rpes(rng: &mut impl Rng, max: usize) -> Rpes {
    let ev = names(size(rng, max));
    let conflict = conflicts(rng, &ev, 0.2);
    let mut causes = pairs(rng, &ev, 0.2, false);
    if rng.random_bool(0.1) {
        let e = ev.choose(rng).unwrap().clone();
        causes.insert((e.clone(), e));
    }
    Rpes::new(ev.into_iter().collect(), conflict, causes).unwrap()
}

pub fn des(rng: &mut impl Rng, max: usize, max_bundles: usize) -> Des {
    let ev = names(size(rng, max));
    let conflict = conflicts(rng, &ev, 0.2);
    let b = bundles(rng, &ev, max_bundles);
    Des::new(ev.into_iter().collect(), conflict, b).unwrap()
}

/// Members of each bundle are put in conflict.
pub fn bes(rng: &mut impl Rng, max: usize, max_bundles: usize) -> Bes {
    let ev = names(size(rng, max));
    let mut conflict = conflicts(rng, &ev, 0.15);
    let b = bundles(rng, &ev, max_bundles);
    for x in &b {
        for p in &x.members {
            for q in &x.members {
                if p != q {
                    conflict.insert((p.clone(), q.clone()));
                }
            }
        }
    }
    Bes::new(ev.into_iter().collect(), conflict, b).unwrap()
}

/// Members of each bundle disable each other.
pub fn ebes(rng: &mut impl Rng, max: usize, max_bundles: usize) -> Ebes {
    let ev = names(size(rng, max));
    let mut disabling = pairs(rng, &ev, 0.2, false);
    let b = bundles(rng, &ev, max_bundles);
    for x in &b {
        for p in &x.members {
            for q in &x.members {
                if p != q {
                    disabling.insert((p.clone(), q.clone()));
                }
            }
        }
    }
    Ebes::new(ev.into_iter().collect(), disabling, b).unwrap()
}

pub fn ses(rng: &mut impl Rng, max: usize) -> Ses {
    let ev = names(size(rng, max));
    let conflict = conflicts(rng, &ev, 0.15);
    let causes = pairs(rng, &ev, 0.3, true);
    let mut shrink = BTreeSet::new();
    for (c, t) in &causes {
        for m in &ev {
            if m != c && m != t && rng.random_bool(0.3) {
                shrink.insert(Triple::new(m.clone(), c.clone(), t.clone()));
            }
        }
    }
    Ses::new(ev.into_iter().collect(), conflict, causes, shrink).unwrap()
}

pub fn ges(rng: &mut impl Rng, max: usize) -> Ges {
    let ev = names(size(rng, max));
    let causes = pairs(rng, &ev, 0.15, true);
    let mut grow = BTreeSet::new();
    for c in &ev {
        for t in &ev {
            if causes.contains(&(c.clone(), t.clone())) {
                continue;
            }
            for m in &ev {
                if m != c && m != t && rng.random_bool(0.15) {
                    grow.insert(Triple::new(m.clone(), c.clone(), t.clone()));
                }
            }
        }
    }
    Ges::new(ev.into_iter().collect(), causes, grow).unwrap()
}

/// Adders and droppers of one dependency are disjoint; droppers need the
/// dependency initially or an adder, and adders of an initial dependency
/// need a dropper.
pub fn dces(rng: &mut impl Rng, max: usize) -> Dces {
    let ev = names(size(rng, max));
    let mut causes = Relation::new();
    let mut shrink = BTreeSet::new();
    let mut grow = BTreeSet::new();
    for c in &ev {
        for t in &ev {
            let others: Vec<&EventId> = ev.iter().filter(|m| *m != c && *m != t).collect();
            let init = rng.random_bool(0.25);
            let mut adders = Vec::new();
            let mut droppers = Vec::new();
            for m in others {
                match rng.random_range(0..8) {
                    0 => adders.push(m.clone()),
                    1 => droppers.push(m.clone()),
                    _ => {}
                }
            }
            if !init && adders.is_empty() {
                droppers.clear();
            }
            if init && !adders.is_empty() && droppers.is_empty() {
                adders.clear();
            }
            if init {
                causes.insert((c.clone(), t.clone()));
            }
            grow.extend(adders.into_iter().map(|m| Triple::new(m, c.clone(), t.clone())));
            shrink.extend(droppers.into_iter().map(|m| Triple::new(m, c.clone(), t.clone())));
        }
    }
    Dces::new(ev.into_iter().collect(), causes, shrink, grow).unwrap()
}

/// A structure and a second one over the same events: an identical copy,
/// a copy with a redundant bundle or cause, a one-entry mutation or an
/// independent draw.
pub fn related_pair(rng: &mut impl Rng, kind: dyncaus_core::Kind, max: usize) -> (Structure, Structure) {
    use dyncaus_core::Kind;
    let draw = |rng: &mut ChaCha8Rng, n: usize| -> Structure {
        match kind {
            Kind::Rpes => rpes(rng, n).into(),
            Kind::Bes => bes(rng, n, 4).into(),
            Kind::Ebes => ebes(rng, n, 4).into(),
            Kind::Des => des(rng, n, 4).into(),
            _ => unreachable!("pairs are drawn for static families"),
        }
    };
    let seed = rng.random::<u64>();
    let a = draw(&mut self::rng(seed), max);
    let n = a.events().len();
    let b = match rng.random_range(0..4) {
        0 => a.clone(),
        1 => redundant(rng, &a),
        2 => mutate(rng, &a),
        _ => loop {
            let b = draw(&mut self::rng(rng.random()), max);
            if b.events().len() == n {
                break b;
            }
        },
    };
    (a, b)
}

/// Adds a bundle containing an existing bundle of the same target, or a
/// cause implied by transitivity.
fn redundant(rng: &mut impl Rng, s: &Structure) -> Structure {
    let ev: Vec<EventId> = s.events().iter().cloned().collect();
    let widen = |b: &BTreeSet<Bundle>, rng: &mut dyn rand::RngCore| -> BTreeSet<Bundle> {
        let mut out = b.clone();
        if let Some(x) = b.iter().next() {
            let mut members = x.members.clone();
            members.insert(ev[rng.random_range(0..ev.len())].clone());
            out.insert(Bundle { members, target: x.target.clone() });
        }
        out
    };
    match s {
        Structure::Rpes(x) => {
            let mut causes = x.enabling().clone();
            let chained: Vec<_> = causes
                .iter()
                .flat_map(|(a, b)| causes.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
                .collect();
            causes.extend(chained);
            Rpes::new(x.events().clone(), x.conflict().clone(), causes).unwrap().into()
        }
        Structure::Des(x) => Des::new(x.events().clone(), x.conflict().clone(), widen(x.bundles(), rng)).unwrap().into(),
        Structure::Bes(x) => {
            let b = widen(x.bundles(), rng);
            let mut conflict = x.conflict().clone();
            for y in &b {
                for p in &y.members {
                    for q in &y.members {
                        if p != q {
                            conflict.insert((p.clone(), q.clone()));
                        }
                    }
                }
            }
            Bes::new(x.events().clone(), conflict, b).unwrap().into()
        }
        Structure::Ebes(x) => {
            let b = widen(x.bundles(), rng);
            let mut disabling = x.disabling().clone();
            for y in &b {
                for p in &y.members {
                    for q in &y.members {
                        if p != q {
                            disabling.insert((p.clone(), q.clone()));
                        }
                    }
                }
            }
            Ebes::new(x.events().clone(), disabling, b).unwrap().into()
        }
        other => other.clone(),
    }
}

fn toggle(r: &Relation, pair: (EventId, EventId)) -> Relation {
    let mut r = r.clone();
    if !r.remove(&pair) {
        r.insert(pair);
    }
    r
}

/// Flips one conflict, cause or disabling entry, or drops one bundle;
/// falls back to the original when the result would be invalid.
fn mutate(rng: &mut impl Rng, s: &Structure) -> Structure {
    let ev: Vec<EventId> = s.events().iter().cloned().collect();
    let a = ev[rng.random_range(0..ev.len())].clone();
    let b = ev[rng.random_range(0..ev.len())].clone();
    let sym = |r: &Relation| {
        if a == b {
            return r.clone();
        }
        toggle(&toggle(r, (a.clone(), b.clone())), (b.clone(), a.clone()))
    };
    let fewer = |bs: &BTreeSet<Bundle>| -> BTreeSet<Bundle> { bs.iter().skip(1).cloned().collect() };
    let out: Option<Structure> = match s {
        Structure::Rpes(x) => Some(Rpes::new(x.events().clone(), x.conflict().clone(), toggle(x.enabling(), (a.clone(), b.clone()))).unwrap().into()),
        Structure::Des(x) => Some(if rng.random_bool(0.5) {
            Des::new(x.events().clone(), sym(x.conflict()), x.bundles().clone()).unwrap().into()
        } else {
            Des::new(x.events().clone(), x.conflict().clone(), fewer(x.bundles())).unwrap().into()
        }),
        Structure::Bes(x) => {
            if rng.random_bool(0.5) {
                Bes::new(x.events().clone(), sym(x.conflict()), x.bundles().clone()).ok().map(Into::into)
            } else {
                Bes::new(x.events().clone(), x.conflict().clone(), fewer(x.bundles())).ok().map(Into::into)
            }
        }
        Structure::Ebes(x) => {
            if rng.random_bool(0.5) && a != b {
                Ebes::new(x.events().clone(), toggle(x.disabling(), (a.clone(), b.clone())), x.bundles().clone()).ok().map(Into::into)
            } else {
                Ebes::new(x.events().clone(), x.disabling().clone(), fewer(x.bundles())).ok().map(Into::into)
            }
        }
        _ => None,
    };
    out.unwrap_or_else(|| s.clone())
}

/// Every subset of the event set.
pub fn all_subsets(ev: &EventSet) -> Vec<EventSet> {
    let v: Vec<&EventId> = ev.iter().collect();
    (0..1u32 << v.len())
        .map(|m| v.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, e)| (*e).clone()).collect())
        .collect()
}
