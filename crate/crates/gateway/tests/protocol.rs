#[path = "support/gen.rs"]
mod gen;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rico_gateway::protocol::{decode, decode_command, encode, ServerMessage};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn telemetry_round_trips(seed in any::<u64>()) {
        let frame = gen::random_frame(&mut ChaCha8Rng::seed_from_u64(seed));
        let msg = ServerMessage::Telemetry(frame);
        prop_assert_eq!(decode(&encode(&msg)).unwrap(), msg);
    }

    #[test]
    fn decoding_is_total(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
        let _ = decode_command(&bytes);
    }

    #[test]
    fn accepted_commands_reencode_identically(seed in any::<u64>()) {
        let raw = gen::random_message(&mut ChaCha8Rng::seed_from_u64(seed));
        if let Ok(cmd) = decode_command(&raw) {
            let text = rico_gateway::protocol::encode_command(&cmd);
            prop_assert_eq!(decode_command(text.as_bytes()).unwrap(), cmd);
        }
    }
}

#[test]
fn frame_carries_type_tag() {
    let frame = gen::random_frame(&mut ChaCha8Rng::seed_from_u64(1));
    let v: serde_json::Value = serde_json::from_str(&encode(&ServerMessage::Telemetry(frame))).unwrap();
    assert_eq!(v["type"], "telemetry");
    assert_eq!(v["lidar"].as_array().unwrap().len(), 360);
}
