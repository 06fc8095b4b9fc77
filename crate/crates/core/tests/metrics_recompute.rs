//! Metrics recomputed from the emitted CSV files, independent of the
//! in-process report.

use std::collections::BTreeMap;

use manet_core::config::{ScenarioConfig, StopCondition};
use manet_core::engine::run;
use manet_core::metrics::{aggregate, MetricsReport};
use manet_core::output;
use manet_core::protocols::Protocol;

fn rows(bytes: &[u8]) -> Vec<BTreeMap<String, String>> {
    csv::Reader::from_reader(bytes).deserialize().map(Result::unwrap).collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn csv_recomputation_matches_report() {
    for protocol in Protocol::ALL {
        for tpc in [false, true] {
            let config = ScenarioConfig {
                protocol,
                tpc,
                v_max: 20.0,
                seed: 13,
                stop: StopCondition::Duration { seconds: 300.0 },
                ..ScenarioConfig::set1()
            };
            let out = run(&config).unwrap();
            let report = MetricsReport::from_run(&out);
            let (mut packets, mut routes, mut ledger) = (Vec::new(), Vec::new(), Vec::new());
            output::write_packets(&out, &mut packets).unwrap();
            output::write_routes(&out, &mut routes).unwrap();
            output::write_ledger(&out, &mut ledger).unwrap();
            let (packets, routes, ledger) = (rows(&packets), rows(&routes), rows(&ledger));

            // Time-averaged hop count: per session lifetime-weighted hops.
            let mut per_session: BTreeMap<String, (f64, f64)> = BTreeMap::new();
            for r in &routes {
                let down = if r["torn_down_s"].is_empty() { 300.0 } else { num(r, "torn_down_s") };
                let life = down - num(r, "discovered_s");
                let entry = per_session.entry(r["session"].clone()).or_default();
                entry.0 += num(r, "hops") * life;
                entry.1 += life;
            }
            let averages: Vec<f64> = per_session.values().filter(|(_, l)| *l > 0.0).map(|(w, l)| w / l).collect();
            let hop_count = averages.iter().sum::<f64>() / averages.len() as f64;
            assert!(close(hop_count, report.hop_count.unwrap()), "{hop_count} vs {:?}", report.hop_count);

            // Fairness: population stddev of per-node totals.
            let totals: Vec<f64> = ledger.iter().map(|r| num(r, "total_J")).collect();
            let mean = totals.iter().sum::<f64>() / totals.len() as f64;
            let fairness = (totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / totals.len() as f64).sqrt();
            assert!(close(fairness, report.fairness_stddev), "{fairness} vs {}", report.fairness_stddev);

            // Route transitions: route rows per session.
            assert!(close(routes.len() as f64 / config.session_count as f64, report.route_transitions));

            // Energy per packet from category columns, beacons excluded.
            let delivered: Vec<_> = packets.iter().filter(|p| !p["delivered_s"].is_empty()).collect();
            let energy: f64 = ledger
                .iter()
                .map(|r| num(r, "data_tx_J") + num(r, "data_rx_J") + num(r, "mac_J") + num(r, "discovery_J"))
                .sum();
            assert!(close(energy / delivered.len() as f64, report.energy_per_packet.unwrap()));

            // Delay and its decomposition.
            let n = delivered.len() as f64;
            let delay = delivered.iter().map(|p| num(p, "delivered_s") - num(p, "created_s")).sum::<f64>() / n;
            let buffering = delivered.iter().map(|p| num(p, "buffering_s")).sum::<f64>() / n;
            let service = delivered.iter().map(|p| num(p, "service_s")).sum::<f64>() / n;
            assert!(close(delay, report.delay_per_packet.unwrap()));
            assert!((delay - (buffering + service)).abs() < 1e-9 * delay);
            assert_eq!(report.delivered, delivered.len());

            // Ledger columns add up.
            for r in &ledger {
                let sum = ["data_tx_J", "data_rx_J", "mac_J", "beacon_J", "discovery_J"]
                    .iter()
                    .map(|k| num(r, k))
                    .sum::<f64>();
                assert!((sum - num(r, "total_J")).abs() < 1e-9);
                assert!((num(r, "total_J") + num(r, "residual_J") - 1500.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn aggregation_over_replications() {
    let reports: Vec<MetricsReport> = (0..4)
        .map(|seed| {
            let config = ScenarioConfig {
                protocol: Protocol::Lbr,
                seed,
                stop: StopCondition::Duration { seconds: 100.0 },
                ..ScenarioConfig::set1()
            };
            MetricsReport::from_run(&run(&config).unwrap())
        })
        .collect();
    let agg = aggregate(&reports).unwrap();
    let values: Vec<f64> = reports.iter().map(|r| r.route_transitions).collect();
    let mean = values.iter().sum::<f64>() / 4.0;
    let sample_sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
    let summary = agg.get("route_transitions").unwrap();
    assert!(close(summary.mean, mean));
    assert!((summary.stddev - sample_sd).abs() < 1e-12);
    assert_eq!(summary.n, 4);
    assert_eq!(agg.get("first_failure_time"), None);

    let same = aggregate(&[reports[0].clone(), reports[0].clone()]).unwrap();
    assert_eq!(same.get("fairness_stddev").unwrap().stddev, 0.0);
    assert_eq!(same.get("fairness_stddev").unwrap().mean, reports[0].fairness_stddev);
}
