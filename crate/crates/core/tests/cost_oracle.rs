use lhv_teleport::cost::{
    entropy_report, entropy_series, ideal_codelength, zone_prob_given_u, ZoneProbTable,
};
use lhv_teleport::geometry::sample_triplet;
use lhv_teleport::lhv::U_MAX;
use lhv_teleport::protocol::{run_vn_session, BlochState, VnMeasurement, Zone};
use lhv_teleport::stats::{binomial_se, Moments};
use lhv_teleport::{SessionStreams, UnitVec3, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(x: f64, y: f64, z: f64) -> UnitVec3 {
    UnitVec3::normalize(Vec3::new(x, y, z)).unwrap()
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    const TRIPLETS: u64 = 10_000_000;
    let us: Vec<f64> = (0..20).map(|i| (i as f64 + 0.5) * U_MAX / 20.0).collect();
    let a = unit(0.6, -0.2, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    // counts[u][zone] in Zone::ALL order
    let mut counts = vec![[0u64; 4]; us.len()];
    for _ in 0..TRIPLETS {
        let t = sample_triplet(&mut rng);
        let c1 = a.dot(t.lambda).abs();
        let c2 = c1 + a.dot(t.mu).abs();
        let c3 = c2 + a.dot(t.nu).abs();
        for (row, &u) in counts.iter_mut().zip(&us) {
            let z = if u < c1 {
                0
            } else if u < c2 {
                1
            } else if u < c3 {
                2
            } else {
                3
            };
            row[z] += 1;
        }
    }
    for (row, &u) in counts.iter().zip(&us) {
        for (zi, zone) in Zone::ALL.into_iter().enumerate() {
            let p = zone_prob_given_u(zone, u).unwrap();
            let f = row[zi] as f64 / TRIPLETS as f64;
            let se = binomial_se(p, TRIPLETS).max(1.0 / TRIPLETS as f64);
            assert!(
                (f - p).abs() <= 4.0 * se,
                "{} at u={u}: quadrature {p}, MC {f}",
                zone.name()
            );
        }
    }
}

#[test]
fn closed_form_points() {
    assert_eq!(zone_prob_given_u(Zone::ALambda, 0.0).unwrap(), 1.0);
    assert!((zone_prob_given_u(Zone::ALambda, 0.5).unwrap() - 0.5).abs() < 1e-12);
    assert!((zone_prob_given_u(Zone::Reject, U_MAX).unwrap() - 1.0).abs() < 1e-6);
    assert!(zone_prob_given_u(Zone::Reject, 0.0).unwrap().abs() < 1e-6);
    assert!(zone_prob_given_u(Zone::AMu, -0.1).is_err());
    assert!(zone_prob_given_u(Zone::AMu, 1.8).is_err());
}

#[test]
fn partition_of_unity_on_fine_grid() {
    let n = 10_000;
    let mut prev_lambda = f64::INFINITY;
    let mut prev_r = -1.0;
    for i in 0..=n {
        let u = (U_MAX * i as f64 / n as f64).min(U_MAX);
        let p: Vec<f64> = Zone::ALL
            .iter()
            .map(|&z| zone_prob_given_u(z, u).unwrap())
            .collect();
        assert!(
            p.iter().all(|&x| (-1e-9..=1.0 + 1e-9).contains(&x)),
            "u={u}: {p:?}"
        );
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6, "u={u}: {p:?}");
        assert!(p[0] <= prev_lambda + 1e-9 && p[3] >= prev_r - 1e-9, "u={u}");
        prev_lambda = p[0];
        prev_r = p[3];
    }
}

#[test]
fn table_tracks_direct_quadrature() {
    let table = ZoneProbTable::global();
    for i in 0..=997 {
        let u = (U_MAX * i as f64 / 997.0).min(U_MAX);
        for z in Zone::ALL {
            let d = (table.prob(z, u) - zone_prob_given_u(z, u).unwrap()).abs();
            assert!(d < 1e-6, "{} at {u}: {d}", z.name());
        }
    }
}

#[test]
fn report_identities() {
    let r = entropy_report();
    assert!((r.p_a + r.p_r - 1.0).abs() < 1e-9);
    let q = r.q_a_lambda + r.q_a_mu + r.q_a_nu + r.q_r;
    assert!((r.h - q / r.p_a).abs() < 1e-9);
    assert_eq!(r.total_vn, r.h + 1.0);
    assert_eq!(r.singlet_bits, r.h);
    assert!((r.total_povm - 2.0 * (r.total_vn + 1.0)).abs() < 1e-12);
    // mu and nu have equal averages but different entropies
    assert!((r.p_a_mu - r.p_a_nu).abs() < 1e-9);
    assert!(r.q_a_mu - r.q_a_nu > 0.01);
}

#[test]
fn series_matches_closed_form() {
    let r = entropy_report();
    let s = entropy_series(
        [r.p_a_lambda, r.p_a_mu, r.p_a_nu],
        r.p_r,
        &r.q_values(),
        200,
    );
    assert!((s - r.h).abs() < 1e-9, "{s} vs {}", r.h);
}

fn mean_codelength(a: UnitVec3, master: u64, n: u64) -> (Moments, u64) {
    let streams = SessionStreams::new(master);
    let (a, b) = (BlochState::new(a), VnMeasurement::new(UnitVec3::X));
    let mut m = Moments::default();
    let mut records = 0;
    for i in 0..n {
        let seed = streams.seed(i);
        let (_, t) = run_vn_session(&a, &b, seed).unwrap();
        m.push(ideal_codelength(&t, &streams.stream(i)));
        records += t.records_consumed;
    }
    (m, records)
}

#[test]
fn averages_do_not_depend_on_state() {
    let n = 300_000;
    let runs: Vec<(Moments, u64)> = [UnitVec3::Z, unit(1.0, 1.0, 0.0), unit(-0.2, 0.5, -0.9)]
        .iter()
        .enumerate()
        .map(|(i, &a)| mean_codelength(a, 40 + i as u64, n))
        .collect();
    let h = entropy_report().h;
    for (m, _) in &runs {
        assert!(
            (m.mean - h).abs() < 4.0 * m.std_error(),
            "{} vs {h}",
            m.mean
        );
    }
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (mi, mj) = (&runs[i].0, &runs[j].0);
            let se = (mi.std_error().powi(2) + mj.std_error().powi(2)).sqrt();
            assert!((mi.mean - mj.mean).abs() < 4.0 * se);
            // acceptance fraction n / records
            let (ri, rj) = (n as f64 / runs[i].1 as f64, n as f64 / runs[j].1 as f64);
            assert!((ri - rj).abs() < 0.004, "{ri} {rj}");
        }
    }
}
