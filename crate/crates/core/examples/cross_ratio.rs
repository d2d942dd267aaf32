use rog::constructions::cross_ratio_cone;
use rog::isomorph::{cones_isomorphic, cross_ratio, s4_orbit, IsoOutcome};

fn acot(c: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 - c.atan()
}

fn main() -> Result<(), rog::error::Error> {
    let a = [0.0, 1.0, 2.0, 3.0].map(acot);
    let b = [1.0, 3.0, 5.0, 7.0].map(acot); // image of a under c ↦ 2c + 1
    let c = [0.0, 1.0, 2.0, -4.0].map(acot);
    for (name, angles) in [("a", a), ("b", b), ("c", c)] {
        let l = cross_ratio(angles)?;
        println!("{name}: λ = {l:.4}, orbit {:?}", s4_orbit(l).map(|v| (v * 1e4).round() / 1e4));
    }
    let ka = cross_ratio_cone(&a)?;
    for (name, other) in [("b", b), ("c", c)] {
        let verdict = match cones_isomorphic(&ka, &cross_ratio_cone(&other)?)? {
            IsoOutcome::Isomorphic { .. } => "isomorphic".to_string(),
            IsoOutcome::NotIsomorphic { reason } => format!("not isomorphic ({reason})"),
            other => format!("{other:?}"),
        };
        println!("a vs {name}: {verdict}");
    }
    Ok(())
}
