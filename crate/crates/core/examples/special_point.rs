//! The map of the Z[1/2] + Z/2 construction on one eventually periodic
//! point, and back through the reversed recipe.

use bratteli_split::bratteli::{EventuallyPeriodicPath, FinitePath, Label};
use bratteli_split::construction::build;
use bratteli_split::fixtures;
use bratteli_split::recipe::{eval_eventually_periodic, eval_prefix, reverse, EpOutcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let b = build(&fixtures::zhalf(), 8)?;
    let d = b.recipe.diagram();
    let pre = d.extend(&FinitePath::vertex(0, "root"), &Label::new("3"))?;
    let x = EventuallyPeriodicPath::new(d, pre, vec![Label::new("1"), Label::new("2")], 2)?;
    println!("x        = {}", x.to_text(d)?);

    let (prefix, state) = eval_prefix(b.recipe.as_ref(), &x.prefix(d, 9)?, 9)?;
    println!("phi(x|9) = {prefix}  (still needs {} input edges)", state.more_input);

    let EpOutcome::Exact(y) = eval_eventually_periodic(b.recipe.as_ref(), &x, 64)? else {
        return Err("image not resolved".into());
    };
    println!("phi(x)   = {}", y.to_text(d)?);

    let rev = reverse(b.recipe.clone());
    if let EpOutcome::Exact(back) = eval_eventually_periodic(rev.as_ref(), &y, 64)? {
        println!("back     = {}  same point: {}", back.to_text(d)?, back.same_point(&x));
    }
    Ok(())
}
