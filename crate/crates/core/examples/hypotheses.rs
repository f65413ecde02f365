//! Constrained, disjoint and highly symmetric checks on every named recipe.

use bratteli_split::construction::build;
use bratteli_split::fixtures;
use bratteli_split::recipe::{etale_verdict, fixtures as recipes};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let depth = 5;
    for (name, src) in recipes::basic() {
        let v = etale_verdict(src.as_ref(), &|l| l, depth)?;
        let witness = v.disjoint.witness.as_ref().map(|w| format!(" (level {}, vertex {})", w.level, w.vertex));
        println!("{name:<18} {}{}", v.verdict, witness.unwrap_or_default());
    }
    for name in ["zhalf", "fibonacci"] {
        let b = build(&fixtures::construction_by_name(name).expect("named"), depth + 1)?;
        let n = |l| b.constraint(l);
        println!("{name:<18} {}", etale_verdict(b.recipe.as_ref(), &n, depth)?.verdict);
    }
    Ok(())
}
