use lhv_teleport::coding::{
    decode_block, encode_block, encode_block_checked, naive_bits, CodedBlock,
};
use lhv_teleport::cost::{entropy_report, message_codelength, ZoneProbTable};
use lhv_teleport::geometry::sample_unit_vector;
use lhv_teleport::protocol::{alice_select, Label};
use lhv_teleport::{AliceMessage, BlochState, SessionStreams, Sign};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Block {
    states: Vec<BlochState>,
    messages: Vec<AliceMessage>,
    ideal: f64,
}

/// `n` sessions of `master`, each with its own random state.
fn sessions(master: u64, n: u64) -> Block {
    let streams = SessionStreams::new(master);
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0x5eed);
    let table = ZoneProbTable::global();
    let mut b = Block {
        states: Vec::new(),
        messages: Vec::new(),
        ideal: 0.0,
    };
    for i in 0..n {
        let a = BlochState::new(sample_unit_vector(&mut rng));
        let mut s = streams.stream(i);
        let msg = alice_select(&a, &mut s).unwrap().message;
        b.ideal += message_codelength(1, &msg, &s, table);
        b.states.push(a);
        b.messages.push(msg);
    }
    b
}

fn roundtrip(master: u64, n: u64) -> (Block, CodedBlock) {
    let streams = SessionStreams::new(master);
    let b = sessions(master, n);
    let coded = encode_block_checked(&b.states, &b.messages, &streams).unwrap();
    let parsed = CodedBlock::from_bytes(&coded.to_bytes()).unwrap();
    assert_eq!(
        decode_block(&parsed, &streams).unwrap(),
        b.messages,
        "master {master}, n {n}"
    );
    (b, coded)
}

#[test]
fn hundred_blocks_are_lossless() {
    let sizes = [1, 10, 1_000, 100_000];
    for i in 0..100u64 {
        roundtrip(1_000 + i, sizes[i as usize % sizes.len()]);
    }
}

#[test]
fn ten_thousand_sessions_roundtrip() {
    let (b, coded) = roundtrip(77, 10_000);
    assert_eq!(coded.n_sessions, 10_000);
    for (i, m) in b.messages.iter().enumerate() {
        assert_eq!(coded.sign(i as u64), m.sign);
    }
}

#[test]
fn wrong_master_seed_is_an_integrity_error() {
    let b = sessions(21, 1_000);
    let coded = encode_block(&b.messages, &SessionStreams::new(21)).unwrap();
    for wrong in [22, 0, u64::MAX] {
        let err = decode_block(&coded, &SessionStreams::new(wrong)).unwrap_err();
        assert!(err.is_integrity(), "seed {wrong}: {err}");
    }
}

#[test]
fn empty_block_decodes_to_nothing() {
    let streams = SessionStreams::new(9);
    let coded = encode_block(&[], &streams).unwrap();
    let parsed = CodedBlock::from_bytes(&coded.to_bytes()).unwrap();
    assert!(decode_block(&parsed, &streams).unwrap().is_empty());
}

#[test]
fn rate_does_not_grow_with_block_size() {
    const SESSIONS: u64 = 200_000;
    let mut prev = f64::INFINITY;
    for (j, n) in [10u64, 100, 1_000, 10_000].into_iter().enumerate() {
        let mut bits = 0u64;
        for blk in 0..SESSIONS / n {
            let master = (j as u64) << 32 | blk;
            let b = sessions(master, n);
            bits += encode_block(&b.messages, &SessionStreams::new(master))
                .unwrap()
                .payload_bits;
        }
        let rate = bits as f64 / SESSIONS as f64;
        assert!(rate <= prev, "n={n}: {rate} after {prev}");
        prev = rate;
    }
}

#[test]
fn excess_over_ideal_shrinks() {
    let mut prev = f64::INFINITY;
    for n in [10u64, 100, 1_000, 10_000, 100_000] {
        let b = sessions(500 + n, n);
        let coded = encode_block(&b.messages, &SessionStreams::new(500 + n)).unwrap();
        let excess = (coded.payload_bits as f64 - b.ideal) / n as f64;
        assert!(
            excess > 0.0 && excess <= prev,
            "n={n}: {excess} after {prev}"
        );
        prev = excess;
    }
    assert!(prev < 0.01, "{prev}");
}

#[test]
fn large_block_rate_and_signs() {
    let n = 100_000;
    let (b, coded) = roundtrip(4242, n);
    let h = entropy_report().h;
    let rate = coded.payload_bits_per_session();
    assert!(rate <= h + 0.05, "{rate} vs {h}");
    assert_eq!(coded.total_bits() - coded.payload_bits, n);
    assert_eq!(coded.sign_bits.len() as u64, n.div_ceil(8));
    let naive = naive_bits(&b.messages) as f64 / n as f64;
    assert!(naive > rate + 1.0, "naive {naive}, coded {rate}");
}

fn message() -> impl Strategy<Value = AliceMessage> {
    (1u64..=20, 0usize..3, any::<bool>()).prop_map(|(k, l, minus)| AliceMessage {
        k,
        label: Label::ALL[l],
        sign: if minus { Sign::Minus } else { Sign::Plus },
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arbitrary_messages_roundtrip(
        seed in any::<u64>(),
        msgs in prop::collection::vec(message(), 0..200),
    ) {
        let streams = SessionStreams::new(seed);
        let coded = encode_block(&msgs, &streams).unwrap();
        let parsed = CodedBlock::from_bytes(&coded.to_bytes()).unwrap();
        prop_assert_eq!(decode_block(&parsed, &streams).unwrap(), msgs);
    }
}
