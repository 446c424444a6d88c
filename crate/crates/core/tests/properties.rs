mod common;

use std::collections::{BTreeMap, HashMap};
use std::net::Ipv6Addr;

use proptest::prelude::*;

use common::{brute_lpm, covers};
use ztedge::config::RunConfig;
use ztedge::harness::run_scenario;
use ztedge::packet::{LabeledPacket, PortRole, Truth, Vector, L4};
use ztedge::pipeline::FloodModule;
use ztedge::scenario::{build_topology, generate, ScenarioSpec, SEC_NS};
use ztedge::sketch::{DEFAULT_BLOOM_BITS, DEFAULT_BLOOM_SEEDS, DEFAULT_EXT_SEEDS};
use ztedge::trace::{parse_trace_record, serialize_trace_record};
use ztedge::{BloomFilter, CountMinSketch, LpmTable, Packet, Pipeline, PipelineConfig, PrefixEntry, Stage};

fn addr() -> impl Strategy<Value = Ipv6Addr> {
    prop_oneof![
        any::<u128>().prop_map(Ipv6Addr::from),
        Just(Ipv6Addr::UNSPECIFIED),
        (0u16..4).prop_map(|n| Ipv6Addr::new(0xff02, 0, 0, 0, 0, 0, 0, n)),
    ]
}

fn l4() -> impl Strategy<Value = L4> {
    prop_oneof![
        (any::<u16>(), any::<u16>(), any::<bool>()).prop_map(|(s, d, syn)| L4::Tcp { src_port: s, dst_port: d, syn }),
        (any::<u16>(), any::<u16>()).prop_map(|(s, d)| L4::Udp { src_port: s, dst_port: d }),
        addr().prop_map(L4::neighbor_solicitation),
        (any::<u8>().prop_filter("not NS", |t| *t != 135)).prop_map(|t| L4::Icmpv6 { icmp_type: t, ns_target: None }),
        Just(L4::Other),
    ]
}

fn truth() -> impl Strategy<Value = Option<Truth>> {
    prop_oneof![
        Just(None),
        Just(Some(Truth::Benign)),
        (0usize..4).prop_map(|i| Some(Truth::Attack(Vector::ALL[i]))),
    ]
}

fn labeled_packet() -> impl Strategy<Value = LabeledPacket> {
    (any::<u64>(), any::<u16>(), addr(), addr(), any::<u8>(), l4(), truth()).prop_map(
        |(ts_ns, ingress_port, src, dst, hop_limit, l4, truth)| LabeledPacket {
            packet: Packet { ts_ns, ingress_port, src, dst, hop_limit, l4 },
            truth,
        },
    )
}

fn entries() -> impl Strategy<Value = Vec<PrefixEntry>> {
    prop::collection::vec((any::<u128>(), 0u8..=128, 0u8..=255), 1..40).prop_map(|rows| {
        let mut seen = std::collections::HashSet::new();
        rows.into_iter()
            .filter_map(|(bits, len, lo)| {
                // Collapse onto a few roots so prefixes nest.
                let bits = (bits & !(u128::MAX << 112)) | (u128::from(len % 3) << 120);
                let masked = if len == 0 { 0 } else { bits & (u128::MAX << (128 - u32::from(len))) };
                seen.insert((masked, len)).then(|| PrefixEntry::new(Ipv6Addr::from(masked), len, lo / 2, lo).unwrap())
            })
            .collect()
    })
}

/// A short run of scenario `id` for `seed`.
fn short_spec(id: u8, seed: u64, windows: u64) -> ScenarioSpec {
    let mut spec = ScenarioSpec::new(id).unwrap();
    spec.seed = seed;
    spec.duration_ns = windows * SEC_NS;
    spec
}

proptest! {
    #[test]
    fn trace_round_trip(lp in labeled_packet()) {
        let line = serialize_trace_record(&lp);
        prop_assert!(!line.contains('\n'));
        prop_assert_eq!(parse_trace_record(&line).unwrap(), lp);
    }

    #[test]
    fn lpm_insertion_order_is_irrelevant(es in entries(), probes in prop::collection::vec(any::<u128>(), 50), shuffle in any::<u64>()) {
        let forward = LpmTable::load_from_config(es.clone()).unwrap();
        let mut rev = es.clone();
        rev.reverse();
        let n = rev.len();
        rev.rotate_left(shuffle as usize % n);
        let other = LpmTable::load_from_config(rev).unwrap();
        for p in probes {
            let a = Ipv6Addr::from((p & !(u128::MAX << 112)) | (u128::from((p >> 126) as u8 % 3) << 120));
            prop_assert_eq!(forward.lookup(&a), other.lookup(&a));
            prop_assert_eq!(forward.lookup(&a), brute_lpm(&es, &a));
        }
    }

    #[test]
    fn cms_never_undercounts(width_log in 1u32..8, keys in prop::collection::vec(0u16..300, 0..2000)) {
        let mut cms = CountMinSketch::new(1 << width_log, DEFAULT_EXT_SEEDS).unwrap();
        let mut exact: HashMap<u16, u32> = HashMap::new();
        for k in &keys {
            cms.increment(&k.to_le_bytes());
            *exact.entry(*k).or_default() += 1;
        }
        prop_assert_eq!(cms.total_increments(), keys.len() as u64);
        for (k, n) in exact {
            prop_assert!(cms.estimate(&k.to_le_bytes()) >= n);
        }
    }

    #[test]
    fn bloom_has_no_false_negatives(items in prop::collection::vec(any::<[u8; 16]>(), 1..500)) {
        let mut bloom = BloomFilter::new(DEFAULT_BLOOM_BITS, DEFAULT_BLOOM_SEEDS).unwrap();
        for (i, item) in items.iter().enumerate() {
            bloom.insert(item);
            for earlier in &items[..=i] {
                prop_assert!(bloom.check(earlier));
            }
        }
    }

    #[test]
    fn spoof_drops_never_touch_sketches(pkts in prop::collection::vec((0u16..4, any::<u8>(), 0u8..4, 0u8..3, any::<bool>()), 1..300)) {
        let table = LpmTable::load_from_config([
            PrefixEntry::new("2001:db8::".parse().unwrap(), 32, 40, 80).unwrap(),
            PrefixEntry::new("2001:db8:1::".parse().unwrap(), 48, 60, 62).unwrap(),
        ]).unwrap();
        let roles = BTreeMap::from([(1, PortRole::External), (2, PortRole::External), (3, PortRole::Internal), (4, PortRole::Internal)]);
        let mut pipe = Pipeline::new(PipelineConfig::new(roles, table, 5, 4, 2, SEC_NS)).unwrap();
        for (i, (port, hl, host, dst, dad)) in pkts.into_iter().enumerate() {
            let port = port + 1;
            let src = match host {
                0 => "2001:db8::9".parse().unwrap(),
                1 => "2001:db8:1::9".parse().unwrap(),
                2 => "2001:dead::9".parse().unwrap(),
                _ => Ipv6Addr::new(0xfd00, 0, 0, 0, 0, 0, 0, u16::from(hl % 4)),
            };
            let dst = if dst == 0 { Ipv6Addr::new(0xff02, 0, 0, 0, 0, 0, 0, 1) } else { Ipv6Addr::new(0xfd00, 0, 0, 0, 0, 0, 0, 0x80) };
            let (src, l4) = if dad && port > 2 { (Ipv6Addr::UNSPECIFIED, L4::neighbor_solicitation(src)) } else { (src, L4::tcp_syn(1, 2)) };
            let pkt = Packet { ts_ns: i as u64 * 50_000_000, ingress_port: port, src, dst, hop_limit: hl, l4 };
            let before = (pipe.sketch(FloodModule::External).total_increments(), pipe.sketch(FloodModule::Internal).total_increments());
            let v = pipe.process_packet(&pkt).unwrap();
            let after = (pipe.sketch(FloodModule::External).total_increments(), pipe.sketch(FloodModule::Internal).total_increments());
            match v.stage {
                Stage::ExtSpoof | Stage::IntSpoof | Stage::ExtFlood | Stage::IntFlood => prop_assert_eq!(before, after),
                Stage::None => {
                    let external = port <= 2;
                    prop_assert_eq!(after.0 - before.0, u64::from(external));
                    prop_assert_eq!(after.1 - before.1, u64::from(!external));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), id in 1u8..=15) {
        let topo = build_topology(seed);
        prop_assert_eq!(&topo, &build_topology(seed));
        let spec = short_spec(id, seed, 2);
        prop_assert_eq!(generate(&spec, &topo).unwrap(), generate(&spec, &topo).unwrap());
    }

    #[test]
    fn labels_are_sound(seed in any::<u64>()) {
        let topo = build_topology(seed);
        let entries = topo.hl_entries();
        let stream = generate(&short_spec(15, seed, 2), &topo).unwrap();
        let internal: HashMap<Ipv6Addr, u16> = topo.internal_hosts.iter().map(|h| (h.addr, h.port)).collect();
        for lp in &stream {
            let p = &lp.packet;
            let external = topo.port_roles[&p.ingress_port] == PortRole::External;
            let band = if external { brute_lpm(&entries, &p.src).map(|e| e.band) } else { None };
            match lp.truth.unwrap() {
                Truth::Attack(Vector::ExtSpoof) => prop_assert!(!band.unwrap().contains(p.hop_limit)),
                Truth::Attack(Vector::IntSpoof) => prop_assert_ne!(internal.get(&p.src), Some(&p.ingress_port)),
                Truth::Attack(Vector::ExtFlood) => prop_assert!(covers(topo.flood_prefix.addr(), topo.flood_prefix.len(), &p.src)),
                Truth::Attack(Vector::IntFlood) => prop_assert_eq!(p.src, topo.int_flood_attacker.addr),
                Truth::Benign if external => prop_assert!(band.unwrap().contains(p.hop_limit)),
                Truth::Benign => {}
            }
        }
    }

    #[test]
    fn benign_traffic_stays_under_budget(seed in any::<u64>(), id in 1u8..=15) {
        let mut cfg = RunConfig { seed, ..RunConfig::default() };
        cfg.traffic.duration_windows = 3;
        let topo = cfg.topology();
        let pcfg = cfg.pipeline_config(&topo).unwrap();
        let run = run_scenario(&cfg.scenario(id).unwrap(), &topo, &pcfg).unwrap();
        prop_assert_eq!(run.report.confusion.fp, 0);
    }
}
