//! The recipes of the worked examples: odometer, bit flip, and the three
//! counterexamples. The two construction recipes come from
//! [`crate::construction`].

use std::sync::Arc;

use super::{GeneratorRecipe, NodeKey, RecipeError, RecipeSource};
use crate::bratteli::{Diagram, FinitePath, Label};
use crate::fixtures;

fn diagram(cfg: crate::bratteli::DiagramConfig) -> Diagram {
    Diagram::from_config(&cfg).expect("fixture diagrams are valid")
}

fn single(k: &NodeKey) -> Result<(&FinitePath, &FinitePath), RecipeError> {
    match (k.a.as_slice(), k.b.as_slice()) {
        ([a], [b]) => Ok((a, b)),
        _ => Err(RecipeError::Generator(format!("{k:?} is not a singleton node"))),
    }
}

fn od_step(d: &Diagram, k: &NodeKey) -> Result<super::Expansion, RecipeError> {
    let (a, b) = single(k)?;
    let zero = Label::new("0");
    let one = Label::new("1");
    let pair = (d.extend(a, &zero)?, d.extend(b, &one)?);
    let child = NodeKey::new(k.level + 1, vec![d.extend(a, &one)?], vec![d.extend(b, &zero)?], &k.tag);
    Ok((vec![pair], vec![child]))
}

fn flip_step(d: &Diagram, k: &NodeKey, sigma: fn(&str) -> &str) -> Result<super::Expansion, RecipeError> {
    let (a, b) = single(k)?;
    let mut children = Vec::new();
    for e in d.out_edges(a.end_level(), a.end())? {
        let image = Label::new(sigma(e.label.as_str()));
        let a1 = d.extend(a, &e.label)?;
        let b1 = d.extend(b, &image)?;
        children.push(NodeKey::new(k.level + 1, vec![a1], vec![b1], &k.tag));
    }
    Ok((Vec::new(), children))
}

fn bit_flip(s: &str) -> &str {
    match s {
        "0" => "1",
        "1" => "0",
        other => other,
    }
}

fn swap_bc(s: &str) -> &str {
    match s {
        "b" => "c",
        "c" => "b",
        other => other,
    }
}

fn root_key(d: &Diagram, tag: &str) -> NodeKey {
    let v = d.vertices(d.start_level()).expect("first level")[0].clone();
    let p = FinitePath::vertex(d.start_level(), &v);
    NodeKey::new(d.start_level(), vec![p.clone()], vec![p], tag)
}

/// `(1^k, 0^k)` with pair `(1^k 0, 0^k 1)` and child `(1^(k+1), 0^(k+1))`.
pub fn odometer() -> Arc<dyn RecipeSource> {
    let d = diagram(fixtures::binary());
    let root = root_key(&d, "od");
    Arc::new(GeneratorRecipe::new("odometer", d, root, od_step))
}

/// `({w}, {w^})` with children `({w0}, {w^1})` and `({w1}, {w^0})`.
pub fn flip() -> Arc<dyn RecipeSource> {
    let d = diagram(fixtures::binary());
    let root = root_key(&d, "flip");
    Arc::new(GeneratorRecipe::new("flip", d, root, |d, k| flip_step(d, k, bit_flip)))
}

/// Letterwise `a -> a, b -> c, c -> b` on words in `{a,b,c}`; fixes `aaa...`.
pub fn counterexample_1() -> Arc<dyn RecipeSource> {
    let d = diagram(fixtures::abc());
    let root = root_key(&d, "sigma");
    Arc::new(GeneratorRecipe::new("counterexample-1", d, root, |d, k| {
        flip_step(d, k, swap_bc)
    }))
}

/// The same letterwise map on words whose first letter is not `a`.
pub fn counterexample_2() -> Arc<dyn RecipeSource> {
    let d = diagram(fixtures::abc_without_first_a());
    let root = root_key(&d, "sigma");
    Arc::new(GeneratorRecipe::new("counterexample-2", d, root, |d, k| {
        flip_step(d, k, swap_bc)
    }))
}

/// Odometer after a leading `0`, bit flip after a leading `1`.
pub fn counterexample_3() -> Arc<dyn RecipeSource> {
    let d = diagram(fixtures::binary());
    let root = root_key(&d, "split");
    Arc::new(GeneratorRecipe::new("counterexample-3", d, root, |d, k| match &*k.tag {
        "split" => {
            let (a, b) = single(k)?;
            let mut children = Vec::new();
            for (label, tag) in [("0", "od"), ("1", "flip")] {
                let l = Label::new(label);
                children.push(NodeKey::new(k.level + 1, vec![d.extend(a, &l)?], vec![d.extend(b, &l)?], tag));
            }
            Ok((Vec::new(), children))
        }
        "od" => od_step(d, k),
        "flip" => flip_step(d, k, bit_flip),
        t => Err(RecipeError::Generator(format!("unknown tag {t:?}"))),
    }))
}

/// The five recipes above, by name.
pub fn basic() -> Vec<(&'static str, Arc<dyn RecipeSource>)> {
    vec![
        ("odometer", odometer()),
        ("flip", flip()),
        ("counterexample-1", counterexample_1()),
        ("counterexample-2", counterexample_2()),
        ("counterexample-3", counterexample_3()),
    ]
}

/// [`basic`] plus the recipes of the two construction fixtures.
pub fn all() -> Vec<(&'static str, Arc<dyn RecipeSource>)> {
    let mut v = basic();
    for (name, cfg) in [("zhalf", fixtures::zhalf()), ("fibonacci", fixtures::fibonacci())] {
        let b = crate::construction::build(&cfg, crate::construction::DEFAULT_DEPTH).expect("fixture configs build");
        v.push((name, b.recipe));
    }
    v
}

pub fn by_name(name: &str) -> Option<Arc<dyn RecipeSource>> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, r)| r)
}
