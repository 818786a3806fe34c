use crate::geometry::UnitVec3;
use crate::lhv::{LhvStream, RecordSource};

use super::{zone_of, AliceMessage, BlochState, ProtocolError, Sign, DEFAULT_ITERATION_CAP};

/// Result of one acceptance scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub message: AliceMessage,
    /// The accepted vector before any flip.
    pub accepted: UnitVec3,
    /// Records examined in this scan, including the accepted one.
    pub records_scanned: u64,
}

/// Scans records `start, start+1, ...` and stops at the first one outside
/// the rejection zone.
pub fn scan<S: RecordSource + ?Sized>(
    a: &BlochState,
    source: &S,
    start: u64,
    cap: u64,
) -> Result<Selection, ProtocolError> {
    assert!(start >= 1, "record indices start at 1");
    for k in start..start.saturating_add(cap) {
        let record = source.record(k);
        if let Some(label) = zone_of(a, &record).label() {
            let accepted = label.pick(&record.triplet);
            let sign = Sign::of(a.vector().dot(accepted));
            return Ok(Selection {
                message: AliceMessage { k, label, sign },
                accepted,
                records_scanned: k - start + 1,
            });
        }
    }
    Err(ProtocolError::NonTermination { cap })
}

/// Runs Alice's acceptance loop from the stream cursor and leaves the cursor
/// just past the accepted record.
pub fn alice_select(a: &BlochState, stream: &mut LhvStream) -> Result<Selection, ProtocolError> {
    let sel = scan(a, stream, stream.cursor(), DEFAULT_ITERATION_CAP)?;
    stream.seek(sel.message.k + 1);
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrthoTriplet;
    use crate::lhv::{fixed_record, ScriptedRecords};
    use crate::protocol::Label;

    fn zx_y() -> OrthoTriplet {
        OrthoTriplet::new(UnitVec3::Z, UnitVec3::X, UnitVec3::Y).unwrap()
    }

    #[test]
    fn first_record_accepted() {
        let a = BlochState::new(UnitVec3::Z);
        let src = ScriptedRecords::new(vec![fixed_record(zx_y(), 0.5)]);
        let sel = scan(&a, &src, 1, 10).unwrap();
        assert_eq!(sel.message.k, 1);
        assert_eq!(sel.message.label, Label::Lambda);
        assert_eq!(sel.message.sign, Sign::Plus);
        assert_eq!(sel.records_scanned, 1);
    }

    #[test]
    fn negative_alignment_sends_minus() {
        let a = BlochState::new(-UnitVec3::Z);
        let src = ScriptedRecords::new(vec![fixed_record(zx_y(), 0.5)]);
        let sel = scan(&a, &src, 1, 10).unwrap();
        assert_eq!(sel.message.sign, Sign::Minus);
        assert_eq!(sel.accepted, UnitVec3::Z);
    }

    #[test]
    fn skips_rejections_until_nu() {
        // a = ẑ with frame (x̂, ŷ, ẑ): thresholds 0, 0, 1
        let a = BlochState::new(UnitVec3::Z);
        let rej = fixed_record(zx_y(), 1.2);
        let nu = fixed_record(OrthoTriplet::CANONICAL, 0.4);
        let src = ScriptedRecords::new(vec![rej, rej, nu]);
        let sel = scan(&a, &src, 1, 10).unwrap();
        assert_eq!(sel.message.k, 3);
        assert_eq!(sel.message.label, Label::Nu);
        assert_eq!(sel.records_scanned, 3);
    }

    #[test]
    fn cap_yields_non_termination() {
        let a = BlochState::new(UnitVec3::Z);
        let src = ScriptedRecords::new(vec![fixed_record(zx_y(), 1.5)]);
        assert_eq!(
            scan(&a, &src, 1, 100),
            Err(ProtocolError::NonTermination { cap: 100 })
        );
    }

    #[test]
    fn stream_cursor_moves_past_acceptance() {
        let a = BlochState::new(UnitVec3::X);
        let mut s = LhvStream::new(5);
        let first = alice_select(&a, &mut s).unwrap();
        assert_eq!(s.cursor(), first.message.k + 1);
        let second = alice_select(&a, &mut s).unwrap();
        assert!(second.message.k > first.message.k);
    }
}
