//! Star products of a few symbols under each built-in product.

use starkit::star::{star_commutator, star_product, BilinearStar};
use starkit::{parse, Params};

fn main() -> starkit::Result<()> {
    let params = Params::default().with_gamma(0.1);
    let products = [
        ("moyal", BilinearStar::moyal(params)),
        ("damped", BilinearStar::damped(params.gamma, params)),
        ("standard", BilinearStar::standard(params)),
        ("husimi", BilinearStar::husimi(1.0, params)),
    ];
    let pairs = [("q", "p"), ("p", "p"), ("p^2 + q^2", "q*p"), ("exp(-q^2)", "exp(-p^2)")];

    for (name, star) in &products {
        println!("[{name}]");
        for (l, r) in pairs {
            let f = parse(l)?;
            let g = parse(r)?;
            println!("  ({l}) * ({r}) = {}", star_product(&f, &g, star)?);
        }
        let comm = star_commutator(&parse("q")?, &parse("p")?, star)?;
        println!("  [q, p] = {comm}");
    }
    Ok(())
}
