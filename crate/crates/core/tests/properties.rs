//! Property tests for invariants that span modules.

use num_complex::Complex64;
use proptest::prelude::*;

use ris_sim::cell::{CellState, CircuitResponse, DiodeState, S21Row, S21Table};
use ris_sim::codebook::{code_for, opposite_phase, quantize_phase};
use ris_sim::farfield::{metrics, radiate};
use ris_sim::link::{calibrate, evaluate, received_power_direct, received_power_via_ris, LinkScenario, Observation};
use ris_sim::{
    AngularGrid, ArrayLayout, BeamTarget, CodeMatrix, DiodeCircuitModel, IlluminationModel, UnitCellModel,
};

const F: f64 = 5.8e9;

fn small_code(n: usize) -> impl Strategy<Value = CodeMatrix> {
    proptest::collection::vec(any::<bool>(), n * n).prop_map(move |b| CodeMatrix::new(n, n, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn centered_feed_distances_are_dihedral(n in 1usize..20, period_mm in 5.0f64..40.0, feed_mm in 50.0f64..600.0) {
        let l = ArrayLayout::new(n, n, period_mm / 1000.0, feed_mm / 1000.0).unwrap();
        let d = l.feed_distances();
        let at = |r: usize, c: usize| d[r * n + c];
        for r in 0..n {
            for c in 0..n {
                prop_assert_eq!(at(r, c), at(c, r));
                prop_assert_eq!(at(r, c), at(n - 1 - r, c));
                prop_assert_eq!(at(r, c), at(r, n - 1 - c));
                prop_assert!(at(r, c) >= l.feed_distance());
            }
        }
    }

    #[test]
    fn quantizer_complement(phase in 0.0f64..std::f64::consts::TAU) {
        prop_assert_ne!(quantize_phase(phase), quantize_phase(opposite_phase(phase)));
    }

    #[test]
    fn broadside_code_is_dihedral(n in 1usize..24, period_mm in 8.0f64..30.0, feed_mm in 100.0f64..500.0) {
        let l = ArrayLayout::new(n, n, period_mm / 1000.0, feed_mm / 1000.0).unwrap();
        let code = code_for(&l, &BeamTarget::new(0.0, 0.0, F).unwrap());
        prop_assert_eq!(&code.transposed(), &code);
        prop_assert_eq!(&code.flipped_rows(), &code);
        prop_assert_eq!(&code.flipped_cols(), &code);
    }

    // Azimuths on a quarter-degree grid have exactly negated direction cosines half a turn away.
    #[test]
    fn opposite_azimuth_mirrors_code(
        rows in 1usize..20,
        cols in 1usize..20,
        theta in 0.0f64..89.0,
        quarter_deg in 0u32..720,
    ) {
        let l = ArrayLayout::new(rows, cols, 0.018, 0.26).unwrap();
        let phi = quarter_deg as f64 * 0.25;
        let a = code_for(&l, &BeamTarget::new(theta, phi, F).unwrap());
        let b = code_for(&l, &BeamTarget::new(theta, phi + 180.0, F).unwrap());
        prop_assert_eq!(b, a.rotated_half_turn());
    }

    #[test]
    fn transmission_never_exceeds_unity(
        il in 0.0f64..10.0,
        f in 5.4e9f64..=6.6e9,
        one in any::<bool>(),
    ) {
        let state = CellState::from_bit(one);
        let table = S21Table::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/data/s21_simulated.csv")).unwrap();
        let models = [
            UnitCellModel::ideal(il).unwrap(),
            UnitCellModel::circuit(DiodeCircuitModel::default(), CircuitResponse::default()).unwrap(),
            UnitCellModel::tabulated(table),
        ];
        for m in &models {
            prop_assert!(m.transmission(state, f).unwrap().norm() <= 1.0 + 1e-15);
        }
        let ideal = &models[0];
        prop_assert_eq!(
            ideal.transmission(CellState::One, f).unwrap(),
            -ideal.transmission(CellState::Zero, f).unwrap()
        );
    }

    #[test]
    fn tabulated_interpolation_stays_within_segment(
        mags in proptest::collection::vec(-20.0f64..0.0, 4),
        t in 0.0f64..=1.0,
        seg in 0usize..3,
    ) {
        let rows: Vec<S21Row> = (0..4)
            .map(|i| S21Row {
                freq_hz: 5e9 + i as f64 * 0.3e9,
                mag0_db: mags[i],
                phase0_deg: 10.0 * i as f64,
                mag1_db: mags[3 - i],
                phase1_deg: 180.0 + 10.0 * i as f64,
            })
            .collect();
        let table = S21Table::from_rows(&rows).unwrap();
        let f = rows[seg].freq_hz + t * (rows[seg + 1].freq_hz - rows[seg].freq_hz);
        let (m, _) = table.interpolate(CellState::Zero, f).unwrap();
        let (lo, hi) = (mags[seg].min(mags[seg + 1]), mags[seg].max(mags[seg + 1]));
        prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        for (i, r) in rows.iter().enumerate() {
            prop_assert_eq!(table.interpolate(CellState::Zero, r.freq_hz).unwrap().0, mags[i]);
        }
    }

    #[test]
    fn diode_real_parts(r in 0.1f64..20.0, l_ph in 0.0f64..5.0, c_pf in 0.01f64..2.0, f in 1e9f64..20e9) {
        let d = DiodeCircuitModel::new(r, l_ph * 1e-12, c_pf * 1e-12, l_ph * 1e-12).unwrap();
        prop_assert!(d.impedance(DiodeState::On, f).unwrap().re > 0.0);
        prop_assert_eq!(d.impedance(DiodeState::Off, f).unwrap().re, 0.0);
    }
}

// Rotating every cell transmission by one complex constant changes no metric.
fn rotated_table(mag_shift_db: f64, phase_shift_deg: f64) -> S21Table {
    let rows: Vec<S21Row> = [5.4e9, 6.6e9]
        .iter()
        .map(|&f| S21Row {
            freq_hz: f,
            mag0_db: -1.0 - mag_shift_db,
            phase0_deg: 20.0 + phase_shift_deg,
            mag1_db: -1.0 - mag_shift_db,
            phase1_deg: 200.0 + phase_shift_deg,
        })
        .collect();
    S21Table::from_rows(&rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn pattern_is_linear_in_cell_transmission(
        code in small_code(4),
        mag_shift in 0.0f64..10.0,
        phase_shift in -170.0f64..170.0,
    ) {
        let layout = ArrayLayout::new(4, 4, 0.03, 0.1).unwrap();
        let illum = IlluminationModel::default();
        let grid = AngularGrid::default_cuts(0.0);
        let base = UnitCellModel::tabulated(rotated_table(0.0, 0.0));
        let scaled = UnitCellModel::tabulated(rotated_table(mag_shift, phase_shift));
        let a = radiate(&layout, &base, &illum, &code, F, &grid).unwrap();
        let b = radiate(&layout, &scaled, &illum, &code, F, &grid).unwrap();
        let k = Complex64::from_polar(10f64.powf(-mag_shift / 20.0), phase_shift.to_radians());
        for (ea, eb) in a.field().iter().zip(b.field()) {
            prop_assert!((ea * k - eb).norm() <= 1e-12 * a.peak_magnitude());
        }
        let (ma, mb) = (metrics(&a).unwrap(), metrics(&b).unwrap());
        prop_assert!((ma.peak_theta_deg - mb.peak_theta_deg).abs() < 1e-6);
        prop_assert!((ma.directivity - mb.directivity).abs() < 1e-9 * ma.directivity);
    }
}

fn scenario() -> LinkScenario {
    LinkScenario::prototype(22.6, 0.0)
}

proptest! {
    #[test]
    fn ris_gain_ignores_tx_power_and_rx_gain(pt in -30.0f64..30.0, gr in -5.0f64..25.0) {
        let base = evaluate(&scenario()).unwrap().ris_gain_db;
        let mut s = scenario();
        s.tx_power_dbm = pt;
        s.rx_gain_dbi = gr;
        prop_assert!((evaluate(&s).unwrap().ris_gain_db - base).abs() < 1e-9);
    }

    #[test]
    fn link_monotonicity(d in 0.1f64..20.0, extra in 0.01f64..5.0, w in 0.0f64..40.0, dd in 0.1f64..10.0) {
        let mut a = scenario();
        a.direct_distance_m = d;
        a.wall_loss_db = w;
        let mut b = a.clone();
        b.direct_distance_m = d + extra;
        prop_assert!(received_power_direct(&b).unwrap() < received_power_direct(&a).unwrap());
        b = a.clone();
        b.wall_loss_db = w + extra;
        prop_assert!(received_power_direct(&b).unwrap() < received_power_direct(&a).unwrap());

        a.d1_m = dd;
        a.d2_m = dd;
        let p = received_power_via_ris(&a).unwrap();
        for edit in 0..3 {
            let mut c = a.clone();
            match edit {
                0 => c.d1_m += extra,
                1 => c.d2_m += extra,
                _ => c.ris_directivity_dbi -= extra,
            }
            prop_assert!(received_power_via_ris(&c).unwrap() < p);
        }
    }

    #[test]
    fn calibration_residuals_ignore_tx_power(
        rows in proptest::collection::vec((0.2f64..3.0, -90.0f64..-50.0, -90.0f64..-50.0), 2..6),
        shift in -20.0f64..20.0,
    ) {
        let obs: Vec<Observation> = rows.iter().map(|&(d, a, b)| Observation::new(d, a, b)).collect();
        prop_assume!(obs.iter().any(|o| o != &obs[0]));
        let a = calibrate(&obs, &scenario(), true).unwrap();
        let mut shifted = scenario();
        shifted.tx_power_dbm += shift;
        let b = calibrate(&obs, &shifted, true).unwrap();
        for (ra, rb) in a.residuals.iter().zip(&b.residuals) {
            prop_assert!((ra.without_db - rb.without_db).abs() < 1e-9);
            prop_assert!((ra.with_db - rb.with_db).abs() < 1e-9);
        }
    }
}
