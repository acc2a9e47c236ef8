use proptest::prelude::*;
use uccd_core::ansatz::{build_generators, generators_for, AnsatzKind, CompiledAnsatz, Excitation, GeneratorSet};
use uccd_core::amplitudes::Amplitudes;
use uccd_core::bench::{run_methods, Method, Point, SystemSpec, WarmStart};
use uccd_core::cc::CcConfig;
use uccd_core::fci::fci_ground_state;
use uccd_core::fcidump::SpatialIntegrals;
use uccd_core::hamiltonian::{denominators, to_spin_orbital, SpinOrbitalHamiltonian};
use uccd_core::sector::{enumerate_sector, hamiltonian_matrix, sector_for, DeterminantSector, SectorOperator};
use uccd_core::singles::corrections;
use uccd_core::vqe::VqeConfig;

const KINDS: [(AnsatzKind, bool); 6] = [
    (AnsatzKind::Doubles, false),
    (AnsatzKind::Doubles, true),
    (AnsatzKind::PairedDoubles, false),
    (AnsatzKind::PairedDoubles, true),
    (AnsatzKind::SinglesDoubles, false),
    (AnsatzKind::SinglesDoubles, true),
];

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}.fcidump", env!("CARGO_MANIFEST_DIR"))
}

fn h4() -> (SpinOrbitalHamiltonian, DeterminantSector, SectorOperator) {
    let h = to_spin_orbital(&SpatialIntegrals::from_file(fixture("h4_chain_1.0")).unwrap()).unwrap();
    let sector = sector_for(&h).unwrap();
    let hmat = hamiltonian_matrix(&sector, &h).unwrap();
    (h, sector, hmat)
}

/// Dense `e^{θA}` by scaling and squaring a Taylor series.
fn dense_expm(a: &[f64], n: usize, theta: f64) -> Vec<f64> {
    let norm = (0..n).map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>()).fold(0.0, f64::max) * theta.abs();
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = theta / 2f64.powi(squarings as i32);
    let mul = |x: &[f64], y: &[f64]| {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = x[i * n + k];
                if xik != 0.0 {
                    for j in 0..n {
                        z[i * n + j] += xik * y[k * n + j];
                    }
                }
            }
        }
        z
    };
    let scaled: Vec<f64> = a.iter().map(|x| x * scale).collect();
    let mut out: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
    let mut term = out.clone();
    for k in 1..30 {
        term = mul(&term, &scaled).iter().map(|x| x / k as f64).collect();
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
    }
    for _ in 0..squarings {
        out = mul(&out, &out);
    }
    out
}

#[test]
fn closed_form_factors_match_dense_exponential() {
    let (h, sector, _) = h4();
    let n = sector.dim();
    let c = CompiledAnsatz::new(build_generators(&h, AnsatzKind::SinglesDoubles, true), &sector).unwrap();
    let hf = sector.hf_vector();
    for (k, theta) in (0..c.param_count()).zip([0.37, -1.3, 2.9, 0.05].iter().cycle()) {
        let mut p = vec![0.0; c.param_count()];
        p[k] = *theta;
        let v = c.prepare_state(&p).unwrap();
        let e = dense_expm(&c.generator_matrix(k).to_dense(), n, *theta);
        for (row, x) in v.iter().enumerate() {
            let y: f64 = (0..n).map(|col| e[row * n + col] * hf[col]).sum();
            assert!((x - y).abs() < 1e-12, "generator {k}, component {row}: {x} vs {y}");
        }
    }
    // 4-determinant sector
    let small = enumerate_sector(4, 1, 1).unwrap();
    let c = CompiledAnsatz::new(generators_for(4, 2, AnsatzKind::Doubles, true), &small).unwrap();
    let e = dense_expm(&c.generator_matrix(0).to_dense(), 4, 0.81);
    let v = c.prepare_state(&[0.81]).unwrap();
    for row in 0..4 {
        assert!((v[row] - e[row * 4 + small.hf_index]).abs() < 1e-12);
    }
}

#[test]
fn commuting_generators_are_trotter_exact() {
    let (_, sector, hmat) = h4();
    // pair excitations on disjoint orbitals commute
    let gens = |trotterized| GeneratorSet {
        kind: AnsatzKind::PairedDoubles,
        trotterized,
        n_so: 8,
        n_occ: 4,
        generators: vec![Excitation::double(0, 1, 4, 5), Excitation::double(2, 3, 6, 7)],
    };
    let a = CompiledAnsatz::new(gens(false), &sector).unwrap();
    let b = CompiledAnsatz::new(gens(true), &sector).unwrap();
    let p = [0.43, -0.71];
    let (va, vb) = (a.prepare_state(&p).unwrap(), b.prepare_state(&p).unwrap());
    for (x, y) in va.iter().zip(vb.iter()) {
        assert!((x - y).abs() < 1e-12);
    }
    assert!((a.energy(&p, &hmat).unwrap() - b.energy(&p, &hmat).unwrap()).abs() < 1e-12);
}

#[test]
fn analytic_gradients_match_central_differences() {
    let (h, sector, hmat) = h4();
    for (kind, trot) in KINDS {
        let c = CompiledAnsatz::new(build_generators(&h, kind, trot), &sector).unwrap();
        let p: Vec<f64> = (0..c.param_count()).map(|k| 0.3 * ((k as f64 * 1.7).sin())).collect();
        let (_, g) = c.energy_and_gradient(&p, &hmat).unwrap();
        let fd = c.gradient_fd(&p, &hmat, 1e-5).unwrap();
        for (k, (x, y)) in g.iter().zip(&fd).enumerate() {
            assert!((x - y).abs() < 1e-8, "{} parameter {k}: {x} vs {y}", c.gens.label());
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let spec = SystemSpec { tag: "H4".into(), fcidump: fixture("h4_chain_1.0").into(), frozen: Some(0), fci_level: Some(0) };
    let methods: Vec<Method> = ["UCCD[6S]", "tUCCD[4S]", "tUCCSD", "pUCCD[6S]", "CCSD", "CCD"].iter().map(|s| s.parse().unwrap()).collect();
    let run = || {
        let point = Point::load(&spec).unwrap();
        run_methods(&point, &methods, &VqeConfig::default(), &CcConfig::default(), &mut WarmStart::new())
    };
    let (a, b) = (run(), run());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.e_total.to_bits(), y.e_total.to_bits(), "{}", x.method);
        assert_eq!(x.iterations, y.iterations);
    }
}

#[test]
fn h2_exactness() {
    let h = to_spin_orbital(&SpatialIntegrals::from_file(fixture("h2_0.74")).unwrap()).unwrap();
    let sector = sector_for(&h).unwrap();
    let hmat = hamiltonian_matrix(&sector, &h).unwrap();
    let fci = fci_ground_state(&sector, &hmat).unwrap();
    let c = CompiledAnsatz::new(build_generators(&h, AnsatzKind::Doubles, false), &sector).unwrap();
    assert_eq!(c.param_count(), 1);
    let r = uccd_core::vqe::minimize(&c, &hmat, &h, &VqeConfig::default()).unwrap();
    assert!(r.converged);
    assert!((r.energy - fci.energy).abs() < 1e-8);
    let empty = GeneratorSet { kind: AnsatzKind::Doubles, trotterized: false, n_so: 4, n_occ: 2, generators: vec![] };
    let e = uccd_core::vqe::minimize(&CompiledAnsatz::new(empty, &sector).unwrap(), &hmat, &h, &VqeConfig::default()).unwrap();
    assert_eq!(e.iterations, 0);
    assert!((e.energy - h.e_hf).abs() < 1e-12);
}

fn params(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn states_stay_normalized(kind in 0usize..6, raw in params(64)) {
        let (h, sector, hmat) = h4();
        let (kind, trot) = KINDS[kind];
        let c = CompiledAnsatz::new(build_generators(&h, kind, trot), &sector).unwrap();
        let p = &raw[..c.param_count()];
        let v = c.prepare_state(p).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let fci = fci_ground_state(&sector, &hmat).unwrap();
        prop_assert!(c.energy(p, &hmat).unwrap() >= fci.energy - 1e-9);
    }

    #[test]
    fn corrections_are_attractive_and_have_fixed_parities(raw in params(64), scale in 0.01f64..0.5) {
        let (h, _, _) = h4();
        let d = denominators(&h);
        let c = CompiledAnsatz::new(build_generators(&h, AnsatzKind::Doubles, false), &sector_for(&h).unwrap()).unwrap();
        let p: Vec<f64> = raw[..c.param_count()].iter().map(|x| x * scale).collect();
        let t2 = uccd_core::ansatz::params_to_t2(&c.gens, &p).unwrap();
        let plus = corrections(&h, &t2, &d).unwrap();
        let minus = corrections(&h, &Amplitudes::scaled(&t2, -1.0), &d).unwrap();
        prop_assert!(plus.e4s <= 0.0 && plus.e6 <= 0.0);
        prop_assert_eq!(plus.e4s, minus.e4s);
        prop_assert_eq!(plus.e6, minus.e6);
        prop_assert_eq!(plus.e5, -minus.e5);
        prop_assert_eq!(plus.e6s, plus.e4s + plus.e5 + plus.e6);
    }
}
