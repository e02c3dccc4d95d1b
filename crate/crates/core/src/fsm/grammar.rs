//! Flag-style text format for finite-state machine descriptors.
//!
//! ```text
//! --nstates N
//!   --s<i> BEHAVIOR [--rwm<i> K | --att<i> X | --rep<i> X]
//!   --n<i> M
//!     --n<i>x<j> TARGET --c<i>x<j> CONDITION --p<i>x<j> V [--w<i>x<j> ETA]
//! ```
//!
//! Tokens are whitespace separated and must appear in this order. For the
//! floor and fixed-probability conditions `p` is β; for the neighbor-count
//! conditions `p` is ξ and `w` is η. Serialization prints numbers in their
//! shortest round-trip form, which is the canonical text.

use std::fmt;

use super::{BehaviorKind, ConditionKind, FsmDescriptor, FsmState, Transition, MAX_STATES, MAX_TRANSITIONS};

pub const FSM_HEADER: &str = "# fsm-v1";

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedEnd { expected: String },
    UnexpectedToken { expected: String, found: String },
    UnknownBehavior(String),
    UnknownCondition(String),
    InvalidNumber(String),
    OutOfRange(String),
    StateCount(usize),
    TransitionCount(usize),
    BadTarget(usize),
    TrailingInput(String),
    MissingHeader,
}

/// A parse failure at a token (0-based index) and byte offset.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub token: usize,
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "token {} (byte {}): ", self.token, self.offset)?;
        match &self.kind {
            ParseErrorKind::UnexpectedEnd { expected } => write!(f, "input ended, expected {expected}"),
            ParseErrorKind::UnexpectedToken { expected, found } => write!(f, "expected {expected}, found `{found}`"),
            ParseErrorKind::UnknownBehavior(b) => write!(f, "unknown behavior `{b}`"),
            ParseErrorKind::UnknownCondition(c) => write!(f, "unknown condition `{c}`"),
            ParseErrorKind::InvalidNumber(n) => write!(f, "invalid number `{n}`"),
            ParseErrorKind::OutOfRange(m) => write!(f, "parameter out of range: {m}"),
            ParseErrorKind::StateCount(n) => write!(f, "state count {n} outside [1, {MAX_STATES}]"),
            ParseErrorKind::TransitionCount(n) => write!(f, "transition count {n} outside [0, {MAX_TRANSITIONS}]"),
            ParseErrorKind::BadTarget(t) => write!(f, "transition target {t} is the source state or does not exist"),
            ParseErrorKind::TrailingInput(t) => write!(f, "unexpected trailing token `{t}`"),
            ParseErrorKind::MissingHeader => write!(f, "missing `{FSM_HEADER}` header line"),
        }
    }
}

impl std::error::Error for ParseError {}

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    end_offset: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let base = text.as_ptr() as usize;
        let items = text
            .split_whitespace()
            .map(|t| (t.as_ptr() as usize - base, t))
            .collect();
        Self {
            items,
            pos: 0,
            end_offset: text.len(),
        }
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let offset = self.items.get(self.pos).map_or(self.end_offset, |t| t.0);
        ParseError {
            token: self.pos,
            offset,
            kind,
        }
    }

    fn error_prev(&self, kind: ParseErrorKind) -> ParseError {
        let idx = self.pos.saturating_sub(1);
        ParseError {
            token: idx,
            offset: self.items.get(idx).map_or(self.end_offset, |t| t.0),
            kind,
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).map(|t| t.1)
    }

    fn next(&mut self, expected: &str) -> Result<&'a str, ParseError> {
        match self.items.get(self.pos) {
            Some(&(_, t)) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.error_here(ParseErrorKind::UnexpectedEnd {
                expected: expected.to_string(),
            })),
        }
    }

    fn flag(&mut self, name: &str) -> Result<(), ParseError> {
        let found = self.next(name)?;
        if found == name {
            Ok(())
        } else {
            Err(self.error_prev(ParseErrorKind::UnexpectedToken {
                expected: name.to_string(),
                found: found.to_string(),
            }))
        }
    }

    fn value(&mut self, name: &str) -> Result<&'a str, ParseError> {
        self.flag(name)?;
        self.next(&format!("a value for {name}"))
    }

    fn real(&mut self, name: &str, lo: f64, hi: f64) -> Result<f64, ParseError> {
        let raw = self.value(name)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| self.error_prev(ParseErrorKind::InvalidNumber(raw.to_string())))?;
        if !(lo..=hi).contains(&v) {
            return Err(self.error_prev(ParseErrorKind::OutOfRange(format!("{name} = {raw} not in [{lo}, {hi}]"))));
        }
        Ok(v)
    }

    fn integer(&mut self, name: &str, lo: u32, hi: u32) -> Result<u32, ParseError> {
        let raw = self.value(name)?;
        let v: i64 = raw
            .parse()
            .map_err(|_| self.error_prev(ParseErrorKind::InvalidNumber(raw.to_string())))?;
        if v < lo as i64 || v > hi as i64 {
            return Err(self.error_prev(ParseErrorKind::OutOfRange(format!("{name} = {raw} not in [{lo}, {hi}]"))));
        }
        Ok(v as u32)
    }

    fn count(&mut self, name: &str) -> Result<i64, ParseError> {
        let raw = self.value(name)?;
        raw.parse()
            .map_err(|_| self.error_prev(ParseErrorKind::InvalidNumber(raw.to_string())))
    }
}

/// Parse a descriptor from its flag-style text.
pub fn parse_fsm(text: &str) -> Result<FsmDescriptor, ParseError> {
    use super::{ATT_RANGE, BETA_RANGE, ETA_RANGE, REP_RANGE, RWM_RANGE, XI_RANGE};

    let mut tk = Tokens::new(text);
    let nstates = tk.count("--nstates")?;
    if nstates < 1 || nstates > MAX_STATES as i64 {
        return Err(tk.error_prev(ParseErrorKind::StateCount(nstates.max(0) as usize)));
    }
    let nstates = nstates as usize;
    let mut states = Vec::with_capacity(nstates);
    for i in 0..nstates {
        let name = tk.value(&format!("--s{i}"))?;
        let behavior = match name {
            "exploration" => BehaviorKind::Exploration {
                rwm: tk.integer(&format!("--rwm{i}"), RWM_RANGE.0, RWM_RANGE.1)?,
            },
            "stop" => BehaviorKind::Stop,
            "phototaxis" => BehaviorKind::Phototaxis,
            "antiphototaxis" => BehaviorKind::AntiPhototaxis,
            "attraction" => BehaviorKind::Attraction {
                att: tk.real(&format!("--att{i}"), ATT_RANGE.0, ATT_RANGE.1)?,
            },
            "repulsion" => BehaviorKind::Repulsion {
                rep: tk.real(&format!("--rep{i}"), REP_RANGE.0, REP_RANGE.1)?,
            },
            other => return Err(tk.error_prev(ParseErrorKind::UnknownBehavior(other.to_string()))),
        };
        let ntrans = tk.count(&format!("--n{i}"))?;
        if ntrans < 0 || ntrans > MAX_TRANSITIONS as i64 || (ntrans > 0 && nstates == 1) {
            return Err(tk.error_prev(ParseErrorKind::TransitionCount(ntrans.max(0) as usize)));
        }
        let mut transitions = Vec::with_capacity(ntrans as usize);
        for j in 0..ntrans as usize {
            let target_raw = tk.value(&format!("--n{i}x{j}"))?;
            let target: usize = target_raw
                .parse()
                .map_err(|_| tk.error_prev(ParseErrorKind::InvalidNumber(target_raw.to_string())))?;
            if target == i || target >= nstates {
                return Err(tk.error_prev(ParseErrorKind::BadTarget(target)));
            }
            let cname = tk.value(&format!("--c{i}x{j}"))?;
            let p = format!("--p{i}x{j}");
            let condition = match cname {
                "blackfloor" => ConditionKind::BlackFloor {
                    beta: tk.real(&p, BETA_RANGE.0, BETA_RANGE.1)?,
                },
                "grayfloor" => ConditionKind::GrayFloor {
                    beta: tk.real(&p, BETA_RANGE.0, BETA_RANGE.1)?,
                },
                "whitefloor" => ConditionKind::WhiteFloor {
                    beta: tk.real(&p, BETA_RANGE.0, BETA_RANGE.1)?,
                },
                "fixedprobability" => ConditionKind::FixedProbability {
                    beta: tk.real(&p, BETA_RANGE.0, BETA_RANGE.1)?,
                },
                "neighborcount" | "invertedneighborcount" => {
                    let xi = tk.integer(&p, XI_RANGE.0, XI_RANGE.1)?;
                    let eta = tk.real(&format!("--w{i}x{j}"), ETA_RANGE.0, ETA_RANGE.1)?;
                    if cname == "neighborcount" {
                        ConditionKind::NeighborCount { eta, xi }
                    } else {
                        ConditionKind::InvertedNeighborCount { eta, xi }
                    }
                }
                other => return Err(tk.error_prev(ParseErrorKind::UnknownCondition(other.to_string()))),
            };
            transitions.push(Transition { condition, target });
        }
        states.push(FsmState { behavior, transitions });
    }
    if let Some(extra) = tk.peek() {
        return Err(tk.error_here(ParseErrorKind::TrailingInput(extra.to_string())));
    }
    let desc = FsmDescriptor { states };
    debug_assert!(desc.validate().is_ok());
    Ok(desc)
}

/// Canonical text of a descriptor. The descriptor must be valid.
pub fn serialize_fsm(desc: &FsmDescriptor) -> String {
    let mut parts: Vec<String> = vec!["--nstates".into(), desc.states.len().to_string()];
    for (i, state) in desc.states.iter().enumerate() {
        parts.push(format!("--s{i}"));
        parts.push(state.behavior.name().into());
        match state.behavior {
            BehaviorKind::Exploration { rwm } => parts.extend([format!("--rwm{i}"), rwm.to_string()]),
            BehaviorKind::Attraction { att } => parts.extend([format!("--att{i}"), att.to_string()]),
            BehaviorKind::Repulsion { rep } => parts.extend([format!("--rep{i}"), rep.to_string()]),
            _ => {}
        }
        parts.push(format!("--n{i}"));
        parts.push(state.transitions.len().to_string());
        for (j, t) in state.transitions.iter().enumerate() {
            parts.extend([format!("--n{i}x{j}"), t.target.to_string()]);
            parts.extend([format!("--c{i}x{j}"), t.condition.name().into()]);
            match t.condition {
                ConditionKind::BlackFloor { beta }
                | ConditionKind::GrayFloor { beta }
                | ConditionKind::WhiteFloor { beta }
                | ConditionKind::FixedProbability { beta } => parts.extend([format!("--p{i}x{j}"), beta.to_string()]),
                ConditionKind::NeighborCount { eta, xi } | ConditionKind::InvertedNeighborCount { eta, xi } => {
                    parts.extend([format!("--p{i}x{j}"), xi.to_string()]);
                    parts.extend([format!("--w{i}x{j}"), eta.to_string()]);
                }
            }
        }
    }
    parts.join(" ")
}

/// On-disk form: the header line, then the canonical text on one line.
pub fn serialize_fsm_file(desc: &FsmDescriptor) -> String {
    format!("{FSM_HEADER}\n{}\n", serialize_fsm(desc))
}

pub fn parse_fsm_file(text: &str) -> Result<FsmDescriptor, ParseError> {
    let trimmed = text.trim_start();
    let Some(rest) = trimmed.strip_prefix(FSM_HEADER) else {
        return Err(ParseError {
            token: 0,
            offset: text.len() - trimmed.len(),
            kind: ParseErrorKind::MissingHeader,
        });
    };
    if !(rest.is_empty() || rest.starts_with('\n') || rest.starts_with("\r\n")) {
        return Err(ParseError {
            token: 0,
            offset: text.len() - trimmed.len(),
            kind: ParseErrorKind::MissingHeader,
        });
    }
    let body_offset = text.len() - rest.len();
    parse_fsm(rest).map_err(|mut e| {
        e.offset += body_offset;
        e
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsm::sample_fsm;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn minimal_program() {
        let d = parse_fsm("--nstates 1 --s0 stop --n0 0").unwrap();
        assert_eq!(d, FsmDescriptor::single(BehaviorKind::Stop));
        assert_eq!(serialize_fsm(&d), "--nstates 1 --s0 stop --n0 0");
    }

    #[test]
    fn explore_then_stop_program() {
        let text = "--nstates 2 --s0 exploration --rwm0 50 --n0 1 --n0x0 1 --c0x0 blackfloor --p0x0 0.9 --s1 stop --n1 0";
        let d = parse_fsm(text).unwrap();
        assert_eq!(d.states.len(), 2);
        assert_eq!(d.states[0].behavior, BehaviorKind::Exploration { rwm: 50 });
        assert_eq!(
            d.states[0].transitions,
            vec![Transition {
                condition: ConditionKind::BlackFloor { beta: 0.9 },
                target: 1
            }]
        );
        assert_eq!(d.states[1].behavior, BehaviorKind::Stop);
        assert_eq!(serialize_fsm(&d), text);
    }

    #[test]
    fn neighbor_condition_params() {
        let text = "--nstates 2 --s0 attraction --att0 2.5 --n0 1 --n0x0 1 --c0x0 neighborcount --p0x0 3 --w0x0 7.25 --s1 repulsion --rep1 1 --n1 1 --n1x0 0 --c1x0 invertedneighborcount --p1x0 0 --w1x0 20";
        let d = parse_fsm(text).unwrap();
        assert_eq!(d.states[0].transitions[0].condition, ConditionKind::NeighborCount { eta: 7.25, xi: 3 });
        assert_eq!(serialize_fsm(&d), text);
    }

    #[test]
    fn file_format() {
        let d = parse_fsm("--nstates 1 --s0 phototaxis --n0 0").unwrap();
        let file = serialize_fsm_file(&d);
        assert!(file.starts_with("# fsm-v1\n"));
        assert_eq!(parse_fsm_file(&file).unwrap(), d);
        assert_eq!(parse_fsm_file("--nstates 1 --s0 stop --n0 0").unwrap_err().kind, ParseErrorKind::MissingHeader);
        let err = parse_fsm_file("# fsm-v1\n--nstates 1 --s0 dance --n0 0\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownBehavior("dance".into()));
        assert_eq!(err.token, 3);
        assert_eq!(err.offset, "# fsm-v1\n--nstates 1 --s0 ".len());
    }

    fn err(text: &str) -> ParseError {
        parse_fsm(text).unwrap_err()
    }

    #[test]
    fn positioned_errors() {
        let e = err("");
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedEnd { .. }));
        assert_eq!(e.token, 0);

        let e = err("--nstates 5");
        assert_eq!((e.token, e.kind), (1, ParseErrorKind::StateCount(5)));

        let e = err("--nstates 1 --s0 stop --n0 1 --n0x0 0");
        assert_eq!(e.kind, ParseErrorKind::TransitionCount(1));

        let e = err("--nstates 2 --s0 stop --n0 1 --n0x0 0 --c0x0 blackfloor --p0x0 1 --s1 stop --n1 0");
        assert_eq!((e.token, e.kind), (7, ParseErrorKind::BadTarget(0)));

        let e = err("--nstates 1 --s0 exploration --rwm0 101 --n0 0");
        assert_eq!(e.token, 5);
        assert!(matches!(e.kind, ParseErrorKind::OutOfRange(_)));

        let e = err("--nstates 1 --s0 stop --n0 0 --s1 stop");
        assert_eq!(e.token, 6);
        assert!(matches!(e.kind, ParseErrorKind::TrailingInput(_)));

        let e = err("--nstates 1 --s1 stop --n0 0");
        assert_eq!(e.token, 2);
        assert!(matches!(e.kind, ParseErrorKind::UnexpectedToken { .. }));

        let e = err("--nstates two");
        assert_eq!(e.kind, ParseErrorKind::InvalidNumber("two".into()));

        let e = err("--nstates 2 --s0 stop --n0 1 --n0x0 1 --c0x0 sunshine --p0x0 1 --s1 stop --n1 0");
        assert_eq!(e.kind, ParseErrorKind::UnknownCondition("sunshine".into()));
        assert!(e.to_string().contains("token 9"));
    }

    #[test]
    fn thousand_random_descriptors_round_trip() {
        let mut rng = stream(2024, &[]);
        for _ in 0..1000 {
            let d = sample_fsm(&mut rng);
            let text = serialize_fsm(&d);
            let back = parse_fsm(&text).unwrap();
            assert_eq!(back, d);
            assert_eq!(serialize_fsm(&back), text);
        }
    }

    proptest! {
        #[test]
        fn arbitrary_text_never_panics(text in "(--[a-z0-9]{1,8}|[a-z]{1,12}|-?[0-9]{1,3}(\\.[0-9]{1,3})?| ){0,40}") {
            let _ = parse_fsm(&text);
        }

        #[test]
        fn mutated_canonical_text_never_panics(seed in any::<u64>(), cut in 0usize..200, junk in "[ -~]{0,6}") {
            let d = sample_fsm(&mut stream(seed, &[]));
            let mut text = serialize_fsm(&d);
            let at = cut.min(text.len());
            text.insert_str(at, &junk);
            match parse_fsm(&text) {
                Ok(parsed) => prop_assert!(parsed.validate().is_ok()),
                Err(e) => prop_assert!(e.offset <= text.len()),
            }
        }
    }
}
