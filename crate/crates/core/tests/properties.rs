mod common;

use std::collections::BTreeSet;

use dyncaus_core::dynamic::{embed_ses, ts_equivalent};
use dyncaus_core::hierarchy::{
    check_strict_dense, enumerate_structures, rces_of, transition_equivalent, transitions_from_posets, Constraints,
};
use dyncaus_core::textio::{parse, parse_structure, render, render_structure, EsDocument};
use dyncaus_core::{Bundle, Ebes, Error, EventId, EventSet, Ges, Kind, Ses, Structure, Trace};
use proptest::prelude::*;

/// Every sequence of distinct events.
fn sequences(events: &EventSet) -> Vec<Vec<EventId>> {
    fn go(left: &[EventId], acc: &mut Vec<EventId>, out: &mut Vec<Vec<EventId>>) {
        out.push(acc.clone());
        for e in left {
            if !acc.contains(e) {
                acc.push(e.clone());
                go(left, acc, out);
                acc.pop();
            }
        }
    }
    let v: Vec<EventId> = events.iter().cloned().collect();
    let mut out = Vec::new();
    go(&v, &mut Vec::new(), &mut out);
    out
}

fn traces_by(events: &EventSet, ok: impl Fn(&[EventId]) -> bool) -> BTreeSet<Trace> {
    sequences(events).into_iter().filter(|s| ok(s)).map(|s| Trace::new(s).unwrap()).collect()
}

/// Each event waits for its initial causes that no earlier event dropped;
/// the whole sequence is conflict free.
fn ses_trace(s: &Ses, seq: &[EventId]) -> bool {
    let free = seq.iter().all(|a| seq.iter().all(|b| !s.conflict().contains(&(a.clone(), b.clone()))));
    free && seq.iter().enumerate().all(|(i, e)| {
        let before = &seq[..i];
        s.enabling().iter().filter(|(_, t)| t == e).all(|(c, t)| {
            before.contains(c) || s.shrink().iter().any(|d| &d.cause == c && &d.target == t && before.contains(&d.modifier))
        })
    })
}

/// Each event waits for its initial causes and for causes added by earlier
/// events.
fn ges_trace(g: &Ges, seq: &[EventId]) -> bool {
    seq.iter().enumerate().all(|(i, e)| {
        let before = &seq[..i];
        let initial = g.enabling().iter().filter(|(_, t)| t == e).all(|(c, _)| before.contains(c));
        let added = g.grow().iter().filter(|a| &a.target == e && before.contains(&a.modifier)).all(|a| before.contains(&a.cause));
        initial && added
    })
}

/// Each event has a member of every bundle pointing at it earlier, and no
/// event it must precede occurred before it.
fn ebes_trace(x: &Ebes, seq: &[EventId]) -> bool {
    seq.iter().enumerate().all(|(i, e)| {
        let before = &seq[..i];
        let bundles = x.bundles().iter().filter(|b: &&Bundle| &b.target == e).all(|b| b.members.iter().any(|m| before.contains(m)));
        let order = before.iter().all(|y| !x.disabling().contains(&(e.clone(), y.clone())));
        bundles && order
    })
}

fn config_mode() -> ProptestConfig {
    ProptestConfig { cases: 200, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config_mode())]

    #[test]
    fn ses_traces_follow_the_dropping_rule(seed in any::<u64>()) {
        let s = common::ses(&mut common::rng(seed), 4);
        prop_assert_eq!(s.traces().unwrap(), traces_by(s.events(), |q| ses_trace(&s, q)));
    }

    #[test]
    fn ges_traces_follow_the_adding_rule(seed in any::<u64>()) {
        let g = common::ges(&mut common::rng(seed), 4);
        prop_assert_eq!(g.traces().unwrap(), traces_by(g.events(), |q| ges_trace(&g, q)));
    }

    #[test]
    fn ebes_traces_follow_bundles_and_disabling(seed in any::<u64>()) {
        let x = common::ebes(&mut common::rng(seed), 4, 4);
        prop_assert_eq!(x.traces().unwrap(), traces_by(x.events(), |q| ebes_trace(&x, q)));
    }

    #[test]
    fn traces_are_prefix_closed(seed in any::<u64>()) {
        let d = common::dces(&mut common::rng(seed), 4);
        let traces = d.traces().unwrap();
        for t in &traces {
            if let Some((_, init)) = t.events().split_last() {
                prop_assert!(traces.contains(&Trace::new(init.to_vec()).unwrap()));
            }
        }
    }

    #[test]
    fn poset_transitions_are_strict_and_dense(seed in any::<u64>(), pick in 0..4usize) {
        let mut r = common::rng(seed);
        let s: Structure = match pick {
            0 => common::rpes(&mut r, 4).into(),
            1 => common::bes(&mut r, 4, 4).into(),
            2 => common::ebes(&mut r, 4, 4).into(),
            _ => common::des(&mut r, 4, 4).into(),
        };
        let g = transitions_from_posets(&s).unwrap();
        prop_assert!(check_strict_dense(&g).is_ok());
        prop_assert!(g.is_well_formed());
    }

    #[test]
    fn rces_of_keeps_every_transition(seed in any::<u64>(), pick in 0..3usize) {
        let mut r = common::rng(seed);
        let s: Structure = match pick {
            0 => common::ses(&mut r, 5).into(),
            1 => common::ges(&mut r, 5).into(),
            _ => common::dces(&mut r, 4).into(),
        };
        match rces_of(&s) {
            Ok(back) => prop_assert!(transition_equivalent(&s, &back.into()).unwrap()),
            // dynamic structures need not be dense
            Err(Error::NotStrictDense(_)) => prop_assert_eq!(s.kind(), Kind::Dces),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn dynamic_equivalence_is_reflexive(seed in any::<u64>()) {
        let d = common::dces(&mut common::rng(seed), 4);
        prop_assert!(ts_equivalent(&d, &d).unwrap());
        let s = common::ses(&mut common::rng(seed), 4);
        prop_assert!(ts_equivalent(&embed_ses(&s), &embed_ses(&s)).unwrap());
    }

    #[test]
    fn rendering_is_a_fixpoint(seed in any::<u64>(), pick in 0..7usize) {
        let mut r = common::rng(seed);
        let s: Structure = match pick {
            0 => common::rpes(&mut r, 5).into(),
            1 => common::bes(&mut r, 4, 4).into(),
            2 => common::ebes(&mut r, 4, 4).into(),
            3 => common::des(&mut r, 4, 4).into(),
            4 => common::ses(&mut r, 5).into(),
            5 => common::ges(&mut r, 5).into(),
            _ => common::dces(&mut r, 4).into(),
        };
        let text = render_structure(&s);
        let doc = parse(&text).unwrap();
        prop_assert_eq!(&doc, &EsDocument::from_structure(&s));
        prop_assert_eq!(render(&doc), text.clone());
        prop_assert_eq!(parse_structure(&text).unwrap(), s);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "\\PC{0,80}") {
        check_outcome(&text);
    }

    #[test]
    fn grammar_soup_never_panics(parts in prop::collection::vec(prop::sample::select(vec![
        "kind", "ses", "dces", "rces", "events", "a", "b", "c", ";", "->", "~", "<", "{", "}", ",", ":", "(", ")",
        "|-", "cause", "drop", "add", "enable", "all-subsets-of", "except", "bundle", "conflict", "\"x\"", "#", "\n",
    ]), 0..40)) {
        check_outcome(&parts.join(" "));
    }
}

fn check_outcome(text: &str) {
    match parse(text) {
        Ok(doc) => {
            let _ = doc.to_structure();
        }
        Err(e) => assert!(e.position().is_some(), "unpositioned error {e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Every enumerated candidate validates, and no two are equal.
    #[test]
    fn enumerations_are_valid_and_distinct(pick in 0..8usize) {
        let kind = Kind::ALL[pick];
        let events: EventSet = common::names(if kind == Kind::Rces { 1 } else { 2 }).into_iter().collect();
        let e = enumerate_structures(kind, &events, &Constraints::none()).unwrap();
        let all: Vec<Structure> = e.iter().collect();
        let distinct: BTreeSet<String> = all.iter().map(render_structure).collect();
        prop_assert_eq!(distinct.len(), all.len());
        for s in &all {
            prop_assert!(parse_structure(&render_structure(s)).is_ok());
        }
    }
}
