//! Dump-level properties of the streaming ingest.

use proptest::prelude::*;
use wigi_core::{stream_entities, Collector, PropertyConfig, StreamOptions};

fn entity(i: u64, kind: u8) -> String {
    let claim = |p: &str, q: &str| {
        format!(
            r#""{p}":[{{"mainsnak":{{"datavalue":{{"value":{{"id":"{q}"}}}}}},"rank":"normal"}}]"#
        )
    };
    match kind {
        0 => format!(
            r#"{{"id":"Q{i}","claims":{{{},{}}}}}"#,
            claim("P31", "Q5"),
            claim("P21", if i.is_multiple_of(2) { "Q6581072" } else { "Q6581097" })
        ),
        1 => format!(r#"{{"id":"Q{i}","claims":{{{}}}}}"#, claim("P31", "Q6256")),
        2 => format!(r#"{{"id":"Q{i}","claims":{{{}}}}}"#, claim("P17", "Q183")),
        3 => format!(r#"{{"id":"Q{i}","claims":{{}}}}"#),
        _ => format!("{{\"id\":\"Q{i}\", broken"),
    }
}

fn run(lines: &[String], threads: usize) -> (Collector, wigi_core::IngestStats) {
    let dump = lines.join("\n");
    let mut sink = Collector::default();
    let opts = StreamOptions {
        threads,
        batch_lines: 3,
        ..Default::default()
    };
    let stats = stream_entities(
        dump.as_bytes(),
        &PropertyConfig::default(),
        &mut sink,
        &opts,
    )
    .unwrap();
    (sink, stats)
}

proptest! {
    #[test]
    fn partition_and_permutation(kinds in proptest::collection::vec(0u8..5, 1..60), seed in any::<u64>(), threads in 1usize..4) {
        let lines: Vec<String> = kinds.iter().enumerate().map(|(i, &k)| entity(i as u64 + 1, k)).collect();
        let (a, sa) = run(&lines, 1);
        prop_assert_eq!(sa.humans + sa.places + sa.skipped + sa.malformed, sa.entities_seen);
        prop_assert_eq!(sa.entities_seen, lines.len() as u64);

        let mut shuffled = lines.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let (b, sb) = run(&shuffled, threads);
        let mut ha = a.humans.clone();
        let mut hb = b.humans.clone();
        ha.sort_by_key(|r| r.id);
        hb.sort_by_key(|r| r.id);
        prop_assert_eq!(ha, hb);
        prop_assert_eq!((sa.humans, sa.places, sa.skipped, sa.malformed), (sb.humans, sb.places, sb.skipped, sb.malformed));
        prop_assert_eq!(a.places.len(), b.places.len());
    }
}
