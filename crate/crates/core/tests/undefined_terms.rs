//! Ten statements with hand-listed undefined element-like tokens.

use mbsr_core::glossary::find_undefined;
use mbsr_core::{Glossary, GlossaryTerm};

fn glossary() -> Glossary {
    let mut g = Glossary::new(false);
    g.add_term(GlossaryTerm::new("Spacecraft")).unwrap();
    g.add_term(GlossaryTerm::new("Asteroid_A_Regolith").with_synonyms(&["AAR"]))
        .unwrap();
    g.add_term(GlossaryTerm::new("Regolith_Sample_Mass")).unwrap();
    g.add_term(GlossaryTerm::new("Sample_Collection")).unwrap();
    g
}

const ELEMENTS: [&str; 1] = ["Ground_Station"];

const FIXTURE: [(&str, &[&str]); 10] = [
    (
        "While in the Sample_Collection mode, the Spacecraft shall collect Asteroid_A_Regolith with Regolith_Sample_Mass target between 0.5 kg and 1 kg.",
        &[],
    ),
    ("The Spacecraft shall store Regolith_Container securely.", &["Regolith_Container"]),
    ("The GroundStation shall receive Telemetry_Frames within 1 s.", &["GroundStation", "Telemetry_Frames"]),
    ("The Ground_Station shall receive data every pass.", &[]),
    ("The Spacecraft shall transmit HK_Data and HK_Data again within 5 s.", &["HK_Data"]),
    ("The Spacecraft shall sample Asteroid_A_Regolith_Cores within 1 h.", &["Asteroid_A_Regolith_Cores"]),
    ("The Spacecraft shall measure Regolith_Sample_Mass with the onboardScale to within 1 g.", &["onboardScale"]),
    ("The NASA team shall review TBD items.", &[]),
    ("While in Sample_Collection mode, the iPhone_App shall display status within 2 s.", &["iPhone_App"]),
    ("The Spacecraft shall log 3_4 and Mode_B for AAR.", &["Mode_B"]),
];

#[test]
fn undefined_tokens_match_hand_list() {
    let g = glossary();
    for (text, want) in FIXTURE {
        assert_eq!(find_undefined(text, &g, &ELEMENTS), want, "{text}");
    }
}
