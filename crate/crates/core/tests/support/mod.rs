//! Shared fixtures and oracles for the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;

pub const LABELED_RULES: [&str; 5] = ["R1", "R2", "R10", "R16", "TBX"];

/// Hand labels, `S`/`V` per rule in `LABELED_RULES` order.
pub const LABELED: [(&str, &str); 20] = [
    (
        "While in the Sample_Collection mode, the Spacecraft shall collect Asteroid_A_Regolith with Regolith_Sample_Mass target between 0.5 kg and 1 kg.",
        "SSSSS",
    ),
    ("The Spacecraft shall not exceed 100 kg.", "VSSVS"),
    ("The Spacecraft shall be capable of collecting regolith with mass TBD kg.", "SSVSV"),
    ("The data shall be stored by the Rover within 1 s.", "SVSSS"),
    ("The Rover is fast.", "VSSSS"),
    ("The Rover shall drive and shall steer within 5 s.", "VSSSS"),
    ("The Lander shall be able to land within 10 m of Target_Site.", "SSVSS"),
    ("When the samples were collected by the Arm, the Rover shall seal Sample_Tubes within 1 h.", "SVSSS"),
    ("The Antenna shall point at Earth with accuracy TBR deg.", "SSSSV"),
    ("The Battery shall be charged to 90% every sol.", "SSSSS"),
    ("The Heater shall not be activated by Flight_Software during Launch.", "VVSVS"),
    ("The Instrument shall collect spectra at least every 10 min.", "SSSSS"),
    ("While in Safe mode, the Spacecraft shall transmit Beacon_Tone every 60 s.", "SSSSS"),
    ("The Orbiter shall relay Surface_Data every 8 hours under Relay_Pass mode.", "SSSSS"),
    ("The Radio shall be capable of transmitting at 2 kbps minimum.", "VSVSS"),
    ("The Drill shall penetrate to 2 m depth within TBC hours.", "SSSSV"),
    ("The Mast shall be deployed by the Crew within 5 min.", "SVSSS"),
    ("the rover SHALL NOT exceed 0.1 m/s with Payload_Mass above 10 kg.", "SSSVS"),
    ("The Arm shall grip samples with force between 5 N and 10 N while being observed by Camera_A.", "SSSSS"),
    ("The Software shall log each TBDEvent within 1 ms.", "SSSSV"),
];

pub const SUBJECTS: [&str; 8] = [
    "Spacecraft",
    "Rover",
    "Lander",
    "Ground_Station",
    "Power_Subsystem",
    "Thermal_Controller",
    "Sample_Tube",
    "Orbiter",
];
pub const VERBS: [&str; 8] = [
    "collect", "transmit", "store", "deploy", "measure", "maintain", "relay", "heat",
];
pub const OBJECTS: [&str; 6] = [
    "Asteroid_A_Regolith",
    "telemetry",
    "Solar_Arrays",
    "Sample_Tubes",
    "Battery_Temperature",
    "Surface_Data to Earth",
];
pub const CONSTRAINTS: [&str; 12] = [
    "within 5 s",
    "at least 10 m",
    "at most 15 g",
    "between 0.5 kg and 1 kg",
    "with Regolith_Sample_Mass target between 0.5 kg and 1 kg",
    "in less than 100 ms",
    "no more than 2 W",
    "every 8 hours",
    "per orbit",
    "to within 0.1 deg",
    "in under 2 s",
    "no less than 101 kPa",
];
pub const CONDITIONS: [&str; 6] = [
    "While in the Sample_Collection mode",
    "When the Lander touches down",
    "If Battery_Voltage drops below 24 V",
    "During Cruise mode",
    "Upon Launch_Abort",
    "Where a Docking_Port is fitted",
];
pub const CARSON_CONDITIONS: [&str; 3] = ["Sample_Collection mode", "Eclipse mode", "Relay_Pass mode"];

/// A statement filled from the pattern grammar, with its expected slots
/// (`SR1..SR5`, `None` when the pattern has no such slot).
#[derive(Debug, Clone)]
pub struct Generated {
    pub text: String,
    pub pattern: &'static str,
    pub slots: [Option<String>; 5],
}

/// `pattern`: 0 = Iso1, 1 = Iso2, 2 = Carson. Indices wrap.
pub fn fill(
    pattern: usize,
    cond: usize,
    subj: usize,
    verb: usize,
    obj: usize,
    cons: usize,
    article: usize,
) -> Generated {
    let subject = SUBJECTS[subj % SUBJECTS.len()];
    let verb = VERBS[verb % VERBS.len()];
    let object = OBJECTS[obj % OBJECTS.len()];
    let constraint = CONSTRAINTS[cons % CONSTRAINTS.len()];
    let s = |x: &str| Some(x.to_string());
    match pattern % 3 {
        0 => {
            let lead = ["The ", "A ", ""][article % 3];
            let action = format!("{verb} {object}");
            Generated {
                text: format!("{lead}{subject} shall {action} {constraint}."),
                pattern: "Iso1",
                slots: [None, s(subject), Some(action), None, s(constraint)],
            }
        }
        1 => {
            let condition = CONDITIONS[cond % CONDITIONS.len()];
            Generated {
                text: format!("{condition}, the {subject} shall {verb} {object} {constraint}."),
                pattern: "Iso2",
                slots: [s(condition), s(subject), s(verb), s(object), s(constraint)],
            }
        }
        _ => {
            let condition = CARSON_CONDITIONS[cond % CARSON_CONDITIONS.len()];
            let action = format!("{verb} {object}");
            Generated {
                text: format!("The {subject} shall {action} {constraint} under {condition}."),
                pattern: "Carson",
                slots: [s(condition), s(subject), Some(action), None, s(constraint)],
            }
        }
    }
}

/// The fixed 50-statement generated corpus.
pub fn generated_corpus() -> Vec<Generated> {
    (0..50)
        .map(|i| fill(i, i / 3, i * 7, i * 5 + 1, i * 3 + 2, i * 11 + 3, i / 2))
        .collect()
}

pub fn generated_statement() -> impl Strategy<Value = Generated> {
    (
        0..3usize,
        0..6usize,
        0..8usize,
        0..8usize,
        0..6usize,
        0..12usize,
        0..3usize,
    )
        .prop_map(|(p, c, s, v, o, k, a)| fill(p, c, s, v, o, k, a))
}

/// Text biased toward the parser's keywords and punctuation.
pub fn keyword_soup() -> impl Strategy<Value = String> {
    let word = prop_oneof![
        Just("shall".to_string()),
        Just("SHALL".to_string()),
        Just("shall,".to_string()),
        Just("the".to_string()),
        Just("The".to_string()),
        Just("a".to_string()),
        Just("While".to_string()),
        Just("When".to_string()),
        Just("under".to_string()),
        Just("in".to_string()),
        Just("within".to_string()),
        Just("at".to_string()),
        Just("least".to_string()),
        Just("between".to_string()),
        Just("by".to_string()),
        Just("be".to_string()),
        Just("stored".to_string()),
        Just("TBD".to_string()),
        Just(",".to_string()),
        Just(".".to_string()),
        Just("é".to_string()),
        Just("Spacecraft,".to_string()),
        "[A-Za-z_]{1,8}",
        "\\PC{1,4}",
    ];
    let sep = prop_oneof![Just(" "), Just("  "), Just("\t"), Just(""), Just("\n")];
    prop::collection::vec((word, sep), 0..16)
        .prop_map(|parts| parts.into_iter().map(|(w, s)| format!("{w}{s}")).collect())
}

/// Transitive closure by Floyd-Warshall: `reach[i][j]` iff a path i -> j exists.
pub fn reachability(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}

/// Upstream/downstream id sets of node `i` for a Derive DAG on ids `N{k}`.
pub fn closure_oracle(n: usize, edges: &[(usize, usize)], i: usize) -> (BTreeSet<String>, BTreeSet<String>) {
    let reach = reachability(n, edges);
    let up = (0..n).filter(|&j| j != i && reach[i][j]).map(node_id).collect();
    let down = (0..n).filter(|&j| j != i && reach[j][i]).map(node_id).collect();
    (up, down)
}

pub fn node_id(i: usize) -> String {
    format!("N{i}")
}

/// Random DAG edges `(a, b)` with `a > b` over `n` nodes.
pub fn dag(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..a).map(move |b| (a, b))).collect();
        (Just(n), prop::sample::subsequence(pairs.clone(), 0..=pairs.len()))
    })
}
