mod common;

use graphnls::gn::{gn_ratio_critical_parts, random_family};
use graphnls::rearrange::two_sided_rearrangement;
use graphnls::{critical_mass_line, Mesh};

/// On a graph with no terminal edge the two-sided rearrangement of |u|
/// transplants to a line function with the same mass and L6 norm and no
/// larger Dirichlet energy, so its critical ratio must obey the line
/// Gagliardo-Nirenberg constant 3/mu_R^2. The 5h slack covers the
/// piecewise-linear resampling of |u|.
#[test]
fn rearranged_random_functions_respect_the_line_constant() {
    let graph = common::fixture("loop");
    let spacing = Mesh::default_spacing(&graph);
    let mesh = Mesh::build(graph, spacing).unwrap();
    let h = mesh.max_spacing();
    let bound = 3.0 / critical_mass_line().powi(2) * (1.0 + 5.0 * h);

    let family = random_family(&mesh, 2026, 500, 0.5, 2.0).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for (i, u) in family.iter().enumerate() {
        let r = two_sided_rearrangement(&u.abs()).unwrap();
        let ratio =
            gn_ratio_critical_parts(r.mass(), r.lp_norm_p(6.0), r.dirichlet_energy()).unwrap();
        assert!(
            ratio <= bound,
            "sample {i}: rearranged ratio {ratio:.6} exceeds {bound:.6}"
        );
        worst = worst.max(ratio);
    }
    // the bound must be doing work: the family is oscillatory, not flat
    assert!(worst > 0.0, "degenerate family, worst ratio {worst}");
}
