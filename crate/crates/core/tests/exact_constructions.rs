use nalgebra::DMatrix;
use nqs_core::ansatz::CouplingNet;
use nqs_core::exact::{
    aklt_nqs_sz, aklt_nqs_xyz, dense_from_ansatz, exact_ground_state, exact_low_spectrum, fidelity, mps_amplitude,
    spin_correlation, string_order, AkltMps, DenseState, SectorHamiltonian,
};
use nqs_core::hilbert::{enumerate_sector, Basis, SectorSpec};
use nqs_core::model::{build_afh, build_aklt};
use num_complex::Complex64;

/// Checks `net ∝ mps` over the whole space with exact zeros agreeing.
fn assert_proportional(net: &CouplingNet, basis: Basis) -> Complex64 {
    let n = net.n_sites();
    let mps = AkltMps::new(basis);
    let configs = enumerate_sector(n, basis, SectorSpec::None).unwrap();
    let mut ratio: Option<Complex64> = None;
    for c in &configs {
        let want = mps_amplitude(&mps, c).unwrap();
        let got = net.amplitude(c.sites());
        if want.norm() < 1e-14 {
            assert_eq!(got, Complex64::new(0.0, 0.0), "N={n} {c}: net nonzero where MPS vanishes");
            continue;
        }
        assert!(got.norm() > 0.0, "N={n} {c}: net vanishes where MPS is {want}");
        let r = want / got;
        match ratio {
            None => ratio = Some(r),
            Some(r0) => assert!((r - r0).norm() <= 1e-10 * r0.norm(), "N={n} {c}: ratio {r} vs {r0}"),
        }
    }
    ratio.expect("MPS has nonzero amplitudes")
}

#[test]
fn xyz_construction_matches_mps() {
    for n in 3..=8 {
        let net = aklt_nqs_xyz(n).unwrap();
        assert_eq!(net.n_hidden(), 2 * n);
        let r = assert_proportional(&net, Basis::Xyz);
        assert!((r.norm() - 2f64.powi(-(n as i32) - 1)).abs() < 1e-12 * r.norm());
    }
}

#[test]
fn sz_construction_matches_mps() {
    for n in 3..=6 {
        let net = aklt_nqs_sz(n).unwrap();
        let r = assert_proportional(&net, Basis::Sz);
        assert!((r.norm() - 2f64.powi(-(n as i32))).abs() < 1e-12 * r.norm());
    }
}

#[test]
fn xyz_nodal_structure_is_the_parity_rule() {
    for n in 2..=8 {
        let net = aklt_nqs_xyz(n).unwrap();
        let p = n % 2;
        for c in enumerate_sector(n, Basis::Xyz, SectorSpec::None).unwrap() {
            let s = c.sites();
            let count = |v| s.iter().filter(|&&x| x == v).count() % 2;
            let allowed = count(0) == p && count(1) == p && count(2) == p;
            let both = nqs_core::ansatz::correlator(&net, 0, s) * nqs_core::ansatz::correlator(&net, 1, s);
            assert_eq!(both.norm() > 0.0, allowed, "N={n} {c}");
        }
    }
}

fn independent_full_hamiltonian(n: usize, periodic: bool) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    // S+ and S- in the (⇑, 0, ⇓) basis; S·S = SzSz + (S+S- + S-S+)/2
    let sp = DMatrix::from_row_slice(3, 3, &[z, re(2.0 * s), z, z, z, re(2.0 * s), z, z, z]);
    let sm = sp.adjoint();
    let sz = DMatrix::from_row_slice(3, 3, &[re(1.0), z, z, z, z, z, z, z, re(-1.0)]);
    let embed = |op: &DMatrix<Complex64>, site: usize| {
        let mut m = DMatrix::from_element(1, 1, re(1.0));
        for j in 0..n {
            let f = if j == site { op.clone() } else { DMatrix::identity(3, 3) };
            m = m.kronecker(&f);
        }
        m
    };
    let dim = 3usize.pow(n as u32);
    let mut h = DMatrix::zeros(dim, dim);
    let bonds = if periodic { n } else { n - 1 };
    for b in 0..bonds {
        let (i, j) = (b, (b + 1) % n);
        h += embed(&sz, i) * embed(&sz, j);
        h += (embed(&sp, i) * embed(&sm, j) + embed(&sm, i) * embed(&sp, j)) * re(0.5);
    }
    h
}

#[test]
fn afh_ground_energy_matches_full_space_oracle() {
    let full = independent_full_hamiltonian(4, true);
    let oracle = full.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let h = build_afh(4, 1.0, true, Basis::Sz).unwrap();
    let (e0, _) = exact_ground_state(&h, SectorSpec::TotalSz(0)).unwrap();
    assert!((e0 - oracle).abs() < 1e-10, "{e0} vs {oracle}");
    let (e_all, _) = exact_ground_state(&h, SectorSpec::None).unwrap();
    assert!((e_all - oracle).abs() < 1e-10);
}

#[test]
fn sector_hamiltonian_matches_full_space_matrix() {
    let n = 4;
    let full = independent_full_hamiltonian(n, false);
    let h = build_afh(n, 1.0, false, Basis::Sz).unwrap();
    let sh = SectorHamiltonian::new(&h, SectorSpec::None).unwrap();
    let m = sh.to_dense();
    assert!((&m - &full).norm() < 1e-12);
}

#[test]
fn aklt_ground_state_is_the_construction() {
    for (n, basis) in [(6, Basis::Xyz), (6, Basis::Sz), (8, Basis::Xyz), (8, Basis::Sz)] {
        let h = build_aklt(n, basis).unwrap();
        let sector = SectorSpec::ground_state_default(n, basis);
        let spec = exact_low_spectrum(&h, sector).unwrap();
        assert!(spec.ground_energy.abs() < 1e-10, "N={n} {basis}: {}", spec.ground_energy);
        assert!(spec.gap > 0.0);
        let net = match basis {
            Basis::Xyz => aklt_nqs_xyz(n).unwrap(),
            Basis::Sz => aklt_nqs_sz(n).unwrap(),
        };
        let psi = dense_from_ansatz(&net, basis, sector).unwrap();
        let f = fidelity(&psi, &spec.ground_state).unwrap();
        assert!(1.0 - f < 1e-10, "N={n} {basis}: 1-F = {}", 1.0 - f);
        let sh = SectorHamiltonian::new(&h, sector).unwrap();
        let v = spec.ground_state.amplitudes();
        assert!(sh.residual(v, spec.ground_energy) < 1e-8);
    }
}

fn sz_aklt_state(n: usize) -> DenseState {
    let mps = AkltMps::new(Basis::Sz);
    DenseState::from_fn(n, Basis::Sz, SectorSpec::TotalSz(0), |c| mps.amplitude_of_sites(c.sites())).unwrap()
}

#[test]
fn aklt_correlations_decay_by_one_third() {
    let psi = sz_aklt_state(10);
    for l in 2..=3 {
        let a = spin_correlation(&psi, l, true).unwrap();
        let b = spin_correlation(&psi, l + 1, true).unwrap();
        assert!(((b / a).abs() - 1.0 / 3.0).abs() < 0.05, "l={l}: {}", b / a);
        assert!(a * b < 0.0);
    }
}

#[test]
fn aklt_string_order() {
    let psi = sz_aklt_state(12);
    let s = string_order(&psi, 5, true).unwrap();
    assert!((s + 4.0 / 9.0).abs() < 0.03, "{s}");
}
