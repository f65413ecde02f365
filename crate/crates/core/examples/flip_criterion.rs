//! The flip criterion: on finitely generated groups, and on the rational
//! family with a full derivation trace.

use bratteli_split::aif::{flip_check_fg, flip_check_rational_family, RationalFamilyParams, SemigroupElement};
use bratteli_split::homology::group_from_presentation;
use num_bigint::BigInt;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let big = |x: i64| BigInt::from(x);
    for rels in [vec![vec![big(0), big(2)]], vec![vec![big(2), big(0)], vec![big(0), big(3)]]] {
        let g = group_from_presentation(2, &rels);
        let f = flip_check_fg(&g);
        println!("{g}: flip is the identity: {} {:?}", f.pass, f.offending);
    }

    let params = RationalFamilyParams::new(&[2, 3], &[3])?;
    let x = SemigroupElement::parse("7/6,1/3")?;
    let y = SemigroupElement::parse("5/4,2/3")?;
    let t = flip_check_rational_family(&x, &y, &params)?;
    println!("\n{x} (x) {y}: {}", if t.pass { "commutes" } else { "does not commute" });
    for s in &t.steps {
        println!("  {s}");
    }
    Ok(())
}
