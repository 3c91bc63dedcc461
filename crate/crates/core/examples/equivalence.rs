//! Transition operators carry one star product onto another.
//!
//! For T = exp(½∇ᵀC∇) and a product with matrix B, T(f ⋆_B g) = Tf ⋆_{B+C} Tg.

use starkit::star::BilinearStar;
use starkit::transition::{check_equivalence, DerivOperator};
use starkit::{parse, Params};

fn main() -> starkit::Result<()> {
    let params = Params::default().with_gamma(0.2);
    let f = parse("q^3*p - 2*p^2 + exp(-q^2 - p^2)")?;
    let g = parse("p^2*q + 0.5*q")?;

    let cases = [
        ("damped", BilinearStar::moyal(params), DerivOperator::damped(params.gamma, params)),
        ("standard", BilinearStar::standard(params), DerivOperator::standard(params)),
        ("husimi", BilinearStar::moyal(params), DerivOperator::husimi(1.5, params)),
    ];
    for (name, star, op) in &cases {
        let target = op.image_of(star);
        let residual = check_equivalence(&f, &g, star, op)?;
        println!("{name:>8}: {:?} -> {:?}, relative residual {residual:.2e}", star.kind(), target.kind());
    }

    let op = DerivOperator::damped(params.gamma, params);
    println!("T(q^2 p^2) = {}", op.apply(&parse("q^2*p^2")?)?);
    Ok(())
}
