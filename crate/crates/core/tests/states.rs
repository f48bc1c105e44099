use ame_core::states::{
    construct_ame43, construct_ame44, construct_ame5_phased, construct_ame5_prime, construct_ame64, construct_ghz,
    construct_linear, reduced_density, states_equal_up_to_global_phase, subsets, tensor_compose, uniformity,
};
use ame_core::{ComplexAmp, MinimalSupportState, MultiIndex, Phase, SparseState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-10;

/// Independent partial trace over a dense amplitude vector.
fn dense_marginal(s: &SparseState, keep: &[usize]) -> Vec<Complex64> {
    let (n, d) = (s.n(), s.d());
    let rest: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let dim = d.pow(keep.len() as u32);
    let norm: f64 = s.terms().values().map(|a| a.to_complex().norm_sqr()).sum();
    let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
    let code = |idx: &MultiIndex, ps: &[usize]| ps.iter().fold(0, |acc, &p| acc * d + idx.0[p]);
    for (a, x) in s.terms() {
        for (b, y) in s.terms() {
            if code(a, &rest) == code(b, &rest) {
                rho[code(a, keep) * dim + code(b, keep)] += x.to_complex() * y.to_complex().conj() / norm;
            }
        }
    }
    rho
}

fn assert_k_uniform(s: &SparseState, k: usize) {
    for keep in subsets(s.n(), k) {
        let rho = reduced_density(s, &keep).unwrap();
        assert!(rho.is_exact(), "reduction on {keep:?} fell back to floats");
        assert!(rho.is_maximally_mixed(TOL), "reduction on {keep:?} is not Id/d^k");
        let dense = dense_marginal(s, &keep);
        let dim = rho.dim();
        for r in 0..dim {
            for c in 0..dim {
                let want = if r == c { 1.0 / dim as f64 } else { 0.0 };
                assert!((dense[r * dim + c] - Complex64::new(want, 0.0)).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn ghz_examples() {
    let g = construct_ghz(3, 2).unwrap();
    assert_eq!(g.rows(), [MultiIndex(vec![0, 0, 0]), MultiIndex(vec![1, 1, 1])]);
    let g43 = construct_ghz(4, 3).unwrap();
    assert_eq!(g43.rows().len(), 3);
    assert!(g43.rows().iter().all(|r| r.0.iter().all(|&x| x == r.0[0])));
    assert_eq!(uniformity(&construct_ghz(5, 2).unwrap().to_sparse(), TOL).unwrap(), 1);
    assert_eq!(uniformity(&construct_ghz(4, 2).unwrap().to_sparse(), TOL).unwrap(), 1);
    assert!(construct_ghz(1, 2).is_err());
}

#[test]
fn ghz_marginal() {
    let g = construct_ghz(3, 2).unwrap().to_sparse();
    let rho = reduced_density(&g, &[0, 1]).unwrap();
    assert_eq!(rho.nonzero_positions(), [(0, 0), (3, 3)]);
    assert!((rho.get(3, 3).re - 0.5).abs() < 1e-15);
    assert!(reduced_density(&g, &[]).is_err());
    assert!(reduced_density(&g, &[0, 1, 2]).is_err());
}

#[test]
fn linear_examples() {
    let ame43 = construct_linear(3, &[vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]]).unwrap();
    assert_eq!(ame43, construct_ame43());
    assert_eq!(ame43.len(), 9);
    let p5 = construct_linear(5, &[vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1], vec![3, 1]]).unwrap();
    assert_eq!(p5, construct_ame5_prime(5).unwrap());
    let ghz = construct_linear(2, &[vec![1], vec![1], vec![1]]).unwrap();
    assert_eq!(ghz, construct_ghz(3, 2).unwrap());
    assert!(construct_linear(4, &[vec![1, 0], vec![0, 1], vec![1, 1]]).is_err());
    // i, j, i+j, 2i+j, 3i+j is not strength 2 over Z_3
    assert!(construct_linear(3, &[vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1], vec![0, 1]]).is_err());
}

#[test]
fn ame44_terms() {
    let s = construct_ame44();
    assert_eq!(s.len(), 16);
    assert!(s.position(&MultiIndex(vec![0, 0, 0, 0])).is_some());
    assert!(s.position(&MultiIndex(vec![1, 2, 3, 2])).is_some());
    assert_eq!(uniformity(&s.to_sparse(), TOL).unwrap(), 2);
}

#[test]
fn phased_five_party_states() {
    let s = construct_ame5_phased(2).unwrap();
    assert_eq!(s.support_count(), 8);
    for d in 2..=5 {
        let s = construct_ame5_phased(d).unwrap();
        assert_eq!(s.support_count(), d * d * d);
        assert_eq!(uniformity(&s, TOL).unwrap(), 2, "d = {d}");
        assert_k_uniform(&s, 2);
    }
}

#[test]
fn uniformity_of_every_construction() {
    assert_k_uniform(&construct_ame43().to_sparse(), 2);
    assert_k_uniform(&construct_ame44().to_sparse(), 2);
    assert_k_uniform(&construct_ame5_prime(5).unwrap().to_sparse(), 2);
    assert_k_uniform(&construct_ame5_prime(7).unwrap().to_sparse(), 2);
    assert_k_uniform(&construct_ame64().to_sparse(), 3);
    let ame49 = tensor_compose(&construct_ame43(), &construct_ame43()).unwrap();
    assert_eq!(ame49.d(), 9);
    assert_k_uniform(&ame49.to_sparse(), 2);
    let product = SparseState::new(4, 2, [(MultiIndex(vec![0; 4]), ComplexAmp::unit(Phase::ONE))]).unwrap();
    assert_eq!(uniformity(&product, TOL).unwrap(), 0);
}

#[test]
fn phases_keep_uniformity() {
    let s = construct_ame43();
    let flipped = s.with_phases([(&MultiIndex(vec![0, 0, 0, 0]), Phase::rational(1, 2).unwrap())]).unwrap();
    assert_k_uniform(&flipped.to_sparse(), 2);
    assert_eq!(s.with_phases(std::iter::empty()).unwrap(), s);
    assert!(s.with_phases([(&MultiIndex(vec![0, 0, 0, 1]), Phase::ONE)]).is_err());
    let hex = construct_ame64();
    let marked = hex.with_phases([(&MultiIndex(vec![0; 6]), Phase::from_angle(0.7))]).unwrap();
    assert_eq!(uniformity(&marked.to_sparse(), TOL).unwrap(), 3);
}

#[test]
fn composition_keeps_uniformity() {
    let g = construct_ghz(3, 2).unwrap();
    let gg = tensor_compose(&g, &g).unwrap();
    assert_eq!(gg.d(), 4);
    assert_eq!(gg.len(), g.len() * g.len());
    assert_eq!(uniformity(&gg.to_sparse(), TOL).unwrap(), 1);
    let a = construct_ame43();
    let b = construct_ame44();
    let ab = tensor_compose(&a, &b).unwrap();
    assert_eq!(ab.len(), 9 * 16);
    assert_eq!(uniformity(&ab.to_sparse(), TOL).unwrap(), 2);
    assert!(tensor_compose(&g, &a).is_err());
}

#[test]
fn ame49_pairing() {
    let s = tensor_compose(&construct_ame43(), &construct_ame43()).unwrap();
    // (i, j, i+j, 2i+j) ⊗ (k, l, k+l, 2k+l) with (x, y) ↦ 3x + y
    for (i, j, k, l) in [(1, 2, 0, 1), (2, 2, 1, 1)] {
        let row = [(i, k), (j, l), ((i + j) % 3, (k + l) % 3), ((2 * i + j) % 3, (2 * k + l) % 3)];
        let idx = MultiIndex(row.iter().map(|&(x, y)| 3 * x + y).collect());
        assert!(s.position(&idx).is_some());
    }
}

#[test]
fn global_phase_comparison() {
    let s = construct_ame43().to_sparse();
    assert!(states_equal_up_to_global_phase(&s, &s, TOL).unwrap().is_one());
    let neg =
        SparseState::new(4, 3, s.terms().keys().map(|i| (i.clone(), ComplexAmp::unit(Phase::rational(1, 2).unwrap()))))
            .unwrap();
    assert_eq!(states_equal_up_to_global_phase(&neg, &s, TOL).unwrap(), Phase::rational(1, 2).unwrap());
    let other = construct_ame44().to_sparse();
    assert!(states_equal_up_to_global_phase(&s, &other, TOL).is_none());
}

#[test]
fn index_unity_is_enforced() {
    let rows = [[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 1]];
    let terms = rows.iter().map(|r| (MultiIndex(r.to_vec()), Phase::ONE)).collect();
    assert!(MinimalSupportState::new(3, 2, 2, terms).is_err());
}

#[test]
fn five_party_marginal_matches_dense_oracle() {
    let s = construct_ame5_phased(3).unwrap();
    let keep = [2, 3, 4];
    let rho = reduced_density(&s, &keep).unwrap();
    let dense = dense_marginal(&s, &keep);
    let dim = rho.dim();
    assert_eq!(dim, 27);
    for r in 0..dim {
        for c in 0..dim {
            assert!((rho.get(r, c) - dense[r * dim + c]).norm() < 1e-12);
        }
    }
    // closed form: Σ_{i,j} Σ_{k,k'} ω^{(3i+j)(k-k')} |i+j, 2i+j+k, k⟩⟨i+j, 2i+j+k', k'| / d³
    let d = 3usize;
    let mut expected = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for kp in 0..d {
                    let r = ((i + j) % d * d + (2 * i + j + k) % d) * d + k;
                    let c = ((i + j) % d * d + (2 * i + j + kp) % d) * d + kp;
                    let turn = ((3 * i + j) * (k + d - kp)) as f64 / d as f64;
                    expected[r * dim + c] += Complex64::from_polar(1.0 / 27.0, std::f64::consts::TAU * turn);
                }
            }
        }
    }
    for r in 0..dim {
        for c in 0..dim {
            assert!((rho.get(r, c) - expected[r * dim + c]).norm() < 1e-12);
        }
    }
    // d blocks of size d² along the diagonal, each with d² nonzero entries per block row
    assert!(rho.nonzero_positions().iter().all(|&(r, c)| r / 9 == c / 9));
    assert_eq!(rho.nonzero_count(), 81);
}

#[test]
fn random_marginals_are_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let n: usize = rng.random_range(2..=4);
        let d: usize = rng.random_range(2..=3);
        let total = d.pow(n as u32);
        let mut terms = Vec::new();
        for c in 0..total {
            if !rng.random_bool(0.6) {
                continue;
            }
            let mut w = vec![0; n];
            let mut c = c;
            for slot in w.iter_mut().rev() {
                *slot = c % d;
                c /= d;
            }
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            terms.push((MultiIndex(w), ComplexAmp::Float(z)));
        }
        let Ok(s) = SparseState::new(n, d, terms) else { continue };
        let size = rng.random_range(1..n);
        let keep: Vec<usize> = subsets(n, size).swap_remove(0);
        let rho = reduced_density(&s, &keep).unwrap();
        assert!(rho.is_hermitian(1e-12));
        assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(rho.eigenvalues().unwrap().iter().all(|&e| e > -1e-10));
    }
}
