use bragg_core::bloch::CombParams;
use bragg_core::kick::KickLaw;
use bragg_core::lindblad::{semiclassical_compare, BranchPolicy, SemiclassicalConfig};

fn main() {
    let comb = CombParams::new(1.0, 80.0).unwrap();
    let kick = KickLaw::default_laplace();
    let config = SemiclassicalConfig {
        k0: 20.3,
        t: 5.0,
        n_realizations: 2000,
        seed: 9901,
        bin_width: 0.05,
        policy: BranchPolicy::default(),
        coupled: true,
    };
    let lambdas = [0.8, 0.4, 0.2, 0.1, 0.05, 0.025];
    let r = semiclassical_compare(&lambdas, &config, &kick, &comb).unwrap();
    for p in &r.points {
        println!("lambda={:<6} L1={:.5}", p.lambda, p.l1_distance);
    }
}
