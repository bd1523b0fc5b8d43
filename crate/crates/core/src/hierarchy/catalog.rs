//! Named example and counterexample structures.

use std::collections::BTreeSet;

use crate::bundle::{Bes, Bundle, Des, Ebes};
use crate::dynamic::{dces_of_ebes, Dces};
use crate::events::{event_set, relation, EventSet, Relation, Triple};
use crate::growing::{rpes_to_ges, Ges};
use crate::hierarchy::Structure;
use crate::prime::Rpes;
use crate::rces::{Enabling, Rces};
use crate::shrinking::Ses;

fn s(names: &[&str]) -> EventSet {
    event_set(names.iter())
}

fn triples(ts: &[(&str, &str, &str)]) -> BTreeSet<Triple> {
    ts.iter().map(|&t| t.into()).collect()
}

/// `c` drops the dependency `a → b`.
pub fn sigma_xi() -> Ses {
    Ses::new(s(&["a", "b", "c"]), Relation::new(), relation([("a", "b")]), triples(&[("c", "a", "b")]))
        .expect("valid")
}

/// `e` before `f` whenever both occur.
pub fn xi_sigma() -> Ebes {
    Ebes::new(s(&["e", "f"]), relation([("e", "f")]), BTreeSet::new()).expect("valid")
}

/// `b` adds the self-dependency `a → a`, disabling `a`.
pub fn gamma_sigma() -> Ges {
    Ges::new(s(&["a", "b"]), Relation::new(), triples(&[("b", "a", "a")])).expect("valid")
}

/// `a` adds `b → c`.
pub fn gamma_xi() -> Ges {
    Ges::new(s(&["a", "b", "c"]), Relation::new(), triples(&[("a", "b", "c")])).expect("valid")
}

/// `c` needs one of the conflicting `a` and `b`.
pub fn beta_gamma() -> Bes {
    Bes::new(s(&["a", "b", "c"]), relation([("a", "b")]), [Bundle::new(["a", "b"], "c")].into()).expect("valid")
}

/// `a` and `c` are in conflict until `b` occurs.
pub fn rho() -> Rces {
    let abc = s(&["a", "b", "c"]);
    let mut enabling = Rces::all_subsets_except(&abc, &[s(&["a", "c"])]);
    enabling.insert((s(&["b"]), s(&["a", "c"])));
    Rces::new(abc, enabling).expect("valid")
}

/// `c` is disabled by the conjunction of `a` and `b`; no step is larger
/// than one event.
pub fn rho_gamma() -> Rces {
    let pairs: [(&[&str], &[&str]); 11] = [
        (&[], &[]),
        (&[], &["a"]),
        (&[], &["b"]),
        (&[], &["c"]),
        (&["a"], &["a", "b"]),
        (&["b"], &["a", "b"]),
        (&["a"], &["a", "c"]),
        (&["c"], &["a", "c"]),
        (&["b"], &["b", "c"]),
        (&["c"], &["b", "c"]),
        (&["c"], &["a", "b", "c"]),
    ];
    let enabling: Enabling = pairs.iter().map(|(w, z)| (s(w), s(z))).collect();
    Rces::new(s(&["a", "b", "c"]), enabling).expect("valid")
}

/// `f` may follow `e` only if `f` came first: the steps of a disabling.
pub fn rho_sigma() -> Rces {
    let enabling: Enabling = [(s(&[]), s(&[])), (s(&[]), s(&["e"])), (s(&[]), s(&["f"])), (s(&["f"]), s(&["e", "f"]))].into();
    Rces::new(s(&["e", "f"]), enabling).expect("valid")
}

/// `a` adds and `d` drops `c → t`; the order of `a` and `d` decides
/// whether `t` still waits for `c`.
pub fn fig9() -> Dces {
    Dces::new(s(&["a", "c", "d", "t"]), Relation::new(), triples(&[("d", "c", "t")]), triples(&[("a", "c", "t")]))
        .expect("valid")
}

/// `e` needs at least three of `a`, `b`, `c`, `d`.
pub fn lemma_a3() -> Des {
    let others = ["a", "b", "c", "d"];
    let bundles = others
        .iter()
        .enumerate()
        .flat_map(|(i, x)| others[i + 1..].iter().map(move |y| Bundle::new([*x, *y], "e")))
        .collect();
    Des::new(s(&["a", "b", "c", "d", "e"]), Relation::new(), bundles).expect("valid")
}

/// Rain makes watering unnecessary; an infestation makes pest control
/// necessary before the harvest.
pub fn farm() -> Dces {
    Dces::new(
        s(&["harvest", "pest_control", "pest_infestation", "plant", "plow", "rain", "water"]),
        relation([("plow", "plant"), ("water", "plant"), ("plant", "harvest")]),
        triples(&[("rain", "water", "plant")]),
        triples(&[("pest_infestation", "pest_control", "harvest")]),
    )
    .expect("valid")
}

/// A pacemaker replaces the CT scan before removal by an X-ray; CT and
/// pacemaker exclude each other through the impossible `__imp`.
pub fn medical() -> Dces {
    Dces::new(
        s(&["__imp", "cardiac_pacemaker", "ct", "rem", "x_ray"]),
        relation([("ct", "rem"), ("cardiac_pacemaker", "x_ray"), ("__imp", "__imp")]),
        triples(&[("cardiac_pacemaker", "ct", "rem")]),
        triples(&[
            ("cardiac_pacemaker", "x_ray", "rem"),
            ("ct", "__imp", "cardiac_pacemaker"),
            ("cardiac_pacemaker", "__imp", "ct"),
        ]),
    )
    .expect("valid")
}

/// The medical example without dynamic causality: removal needs a CT scan
/// or an X-ray.
pub fn medical_des() -> Des {
    Des::new(
        s(&["cardiac_pacemaker", "ct", "rem", "x_ray"]),
        relation([("ct", "cardiac_pacemaker")]),
        [Bundle::new(["ct", "x_ray"], "rem"), Bundle::new(["cardiac_pacemaker"], "x_ray")].into(),
    )
    .expect("valid")
}

pub fn fig3a() -> Bes {
    Bes::new(s(&["a", "b", "c"]), relation([("a", "b")]), [Bundle::new(["a", "b"], "c")].into()).expect("valid")
}

pub fn fig3b() -> Ebes {
    let disabling = relation([("a", "b"), ("b", "a"), ("a", "c"), ("c", "a"), ("b", "c"), ("c", "b"), ("d", "e")]);
    let bundles = [Bundle::new(["a", "c"], "d"), Bundle::new(["b", "c"], "d")].into();
    Ebes::new(s(&["a", "b", "c", "d", "e"]), disabling, bundles).expect("valid")
}

pub fn fig3c() -> Des {
    Des::new(s(&["a", "b", "c"]), Relation::new(), [Bundle::new(["a", "b"], "c")].into()).expect("valid")
}

/// Disabling: `b` disables `a`.
pub fn fig6a() -> Ges {
    gamma_sigma()
}

/// Conflict: `a` and `b` disable each other.
pub fn fig6b() -> Ges {
    Ges::new(s(&["a", "b"]), Relation::new(), triples(&[("b", "a", "a"), ("a", "b", "b")])).expect("valid")
}

/// Temporary disabling: after `c`, `b` has to wait for `a`.
pub fn fig6c() -> Ges {
    Ges::new(s(&["a", "b", "c"]), relation([("c", "a")]), triples(&[("c", "a", "b")])).expect("valid")
}

/// Resolvable conflict: `a` and `b` exclude each other until `c` occurs.
pub fn fig6d() -> Ges {
    Ges::new(s(&["a", "b", "c"]), Relation::new(), triples(&[("a", "c", "b"), ("b", "c", "a")])).expect("valid")
}

pub fn fig7() -> Rpes {
    Rpes::new(s(&["a", "b", "c"]), relation([("a", "c")]), relation([("a", "b")])).expect("valid")
}

pub fn fig7_ges() -> Ges {
    rpes_to_ges(&fig7())
}

/// A dependency cycle: only the empty configuration.
pub fn cyclic_rpes() -> Rpes {
    Rpes::new(s(&["a", "b", "c"]), Relation::new(), relation([("a", "b"), ("b", "c"), ("c", "a")])).expect("valid")
}

pub fn fig13a() -> Ebes {
    Ebes::new(
        s(&["a", "b", "c", "d"]),
        relation([("a", "b"), ("b", "a"), ("c", "d")]),
        [Bundle::new(["a", "b"], "c"), Bundle::new(["c"], "a")].into(),
    )
    .expect("valid")
}

pub fn fig13b() -> Dces {
    dces_of_ebes(&fig13a())
}

/// Every catalog entry by name.
pub fn all() -> Vec<(&'static str, Structure)> {
    vec![
        ("sigma_xi", sigma_xi().into()),
        ("xi_sigma", xi_sigma().into()),
        ("gamma_sigma", gamma_sigma().into()),
        ("gamma_xi", gamma_xi().into()),
        ("beta_gamma", beta_gamma().into()),
        ("rho", rho().into()),
        ("rho_gamma", rho_gamma().into()),
        ("rho_sigma", rho_sigma().into()),
        ("fig9", fig9().into()),
        ("lemma_a3", lemma_a3().into()),
        ("farm", farm().into()),
        ("medical", medical().into()),
        ("medical_des", medical_des().into()),
        ("fig3a", fig3a().into()),
        ("fig3b", fig3b().into()),
        ("fig3c", fig3c().into()),
        ("fig6a", fig6a().into()),
        ("fig6b", fig6b().into()),
        ("fig6c", fig6c().into()),
        ("fig6d", fig6d().into()),
        ("fig7", fig7().into()),
        ("fig7_ges", fig7_ges().into()),
        ("cyclic_rpes", cyclic_rpes().into()),
        ("fig13a", fig13a().into()),
        ("fig13b", fig13b().into()),
    ]
}

pub fn by_name(name: &str) -> Option<Structure> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
}
