use donor_strain::donor::DonorTable;
use donor_strain::spin::{sensitivity_dfda, transitions_at_frequency, TransitionOptions, TransitionSolver};

fn central_fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn hellmann_feynman_matches_finite_differences() {
    let table = DonorTable::builtin();
    for donor in table.donors() {
        let t = transitions_at_frequency(donor, donor.a0_hz, donor.g_e, 9.7e9, &TransitionOptions::default()).unwrap();
        for row in &t.rows {
            let b = row.b_res_t;
            let ha = 1e-4 * donor.a0_hz;
            let fd_a = central_fd(
                |a| TransitionSolver::for_donor(donor, a, donor.g_e, b).unwrap().frequency(row.m_i, b).unwrap(),
                donor.a0_hz,
                ha,
            );
            let hg = 1e-5 * donor.g_e;
            let fd_g = central_fd(
                |g| TransitionSolver::for_donor(donor, donor.a0_hz, g, b).unwrap().frequency(row.m_i, b).unwrap(),
                donor.g_e,
                hg,
            );
            assert!((fd_a - row.dfda).abs() <= 1e-6 * row.dfda.abs(), "{} {}: {fd_a} vs {}", donor.name, row.m_i, row.dfda);
            assert!((fd_g - row.dfdg_hz).abs() <= 1e-6 * row.dfdg_hz.abs(), "{} {}: {fd_g} vs {}", donor.name, row.m_i, row.dfdg_hz);
        }
    }
}

#[test]
fn phosphorus_high_field_limit() {
    let table = DonorTable::builtin();
    let p = table.get("P").unwrap();
    let solver = TransitionSolver::for_donor(p, p.a0_hz, p.g_e, 10.0).unwrap();
    for m in solver.branches() {
        let d = sensitivity_dfda(p, p.a0_hz, p.g_e, 10.0, m).unwrap();
        assert!((d - m.value()).abs() < 1e-3, "{m}: {d}");
    }
}

#[test]
fn bi_dfda_sum_matches_second_order_perturbation() {
    // df/dA = m + A (I(I+1) - m^2) / f_Z to second order, so the branch sum
    // is A sum(I(I+1) - m^2) / f_Z
    use donor_strain::constants::{MU_B_OVER_H, MU_N_OVER_H};
    let table = DonorTable::builtin();
    let bi = table.get("Bi").unwrap();
    let b = 5.0;
    let s = TransitionSolver::for_donor(bi, bi.a0_hz, bi.g_e, b).unwrap();
    let sum: f64 = s.branches().into_iter().map(|m| s.dfda(m, b).unwrap()).sum();
    let i = bi.nuclear_spin.value();
    let fz = (bi.g_e * MU_B_OVER_H + bi.g_n * MU_N_OVER_H) * b;
    let oracle: f64 = s.branches().into_iter().map(|m| i * (i + 1.0) - m.value().powi(2)).sum::<f64>() * bi.a0_hz / fz;
    assert!((sum / oracle - 1.0).abs() < 0.02, "{sum} vs {oracle}");
}
