//! Hand-annotated slot boundaries for twelve synthetic statements.

use mbsr_core::{
    analyze_statement, parse_statement, render_statement, text::normalize_whitespace, Catalog, Glossary, ParseError,
    PatternId, SlotKey, SubjectArticle,
};

struct Golden {
    text: &'static str,
    pattern: PatternId,
    slots: [Option<&'static str>; 5],
    error: Option<ParseError>,
}

const fn ok(text: &'static str, pattern: PatternId, slots: [Option<&'static str>; 5]) -> Golden {
    Golden {
        text,
        pattern,
        slots,
        error: None,
    }
}

fn golden() -> Vec<Golden> {
    use PatternId::*;
    vec![
        ok(
            "The Rover shall drive at least 10 m per sol.",
            Iso1,
            [None, Some("Rover"), Some("drive"), None, Some("at least 10 m per sol")],
        ),
        ok(
            "When the Lander touches down, the Lander shall deploy Solar_Arrays within 60 s.",
            Iso2,
            [Some("When the Lander touches down"), Some("Lander"), Some("deploy"), Some("Solar_Arrays"), Some("within 60 s")],
        ),
        ok(
            "If Battery_Voltage drops below 24 V, the Power_Subsystem shall shed Noncritical_Loads in less than 100 ms.",
            Iso2,
            [
                Some("If Battery_Voltage drops below 24 V"),
                Some("Power_Subsystem"),
                Some("shed"),
                Some("Noncritical_Loads"),
                Some("in less than 100 ms"),
            ],
        ),
        ok(
            "The Orbiter shall relay Surface_Data to Earth every 8 hours under Relay_Pass mode.",
            Carson,
            [Some("Relay_Pass mode"), Some("Orbiter"), Some("relay Surface_Data to Earth"), None, Some("every 8 hours")],
        ),
        ok(
            "The Ground_Station shall store Telemetry_Frames with no more than 1 error per 10^6 bits.",
            Iso1,
            [None, Some("Ground_Station"), Some("store Telemetry_Frames"), None, Some("with no more than 1 error per 10^6 bits")],
        ),
        ok(
            "During Cruise mode, the Spacecraft shall maintain Attitude_Knowledge to within 0.1 deg.",
            Iso2,
            [Some("During Cruise mode"), Some("Spacecraft"), Some("maintain"), Some("Attitude_Knowledge"), Some("to within 0.1 deg")],
        ),
        ok(
            "A Sample_Tube shall hold at most 15 g of regolith.",
            Iso1,
            [None, Some("Sample_Tube"), Some("hold"), None, Some("at most 15 g of regolith")],
        ),
        ok(
            "Upon Launch_Abort, the Crew_Module shall separate from Launch_Vehicle in under 2 s.",
            Iso2,
            [Some("Upon Launch_Abort"), Some("Crew_Module"), Some("separate"), Some("from Launch_Vehicle"), Some("in under 2 s")],
        ),
        ok(
            "The Thermal_Controller shall keep Battery_Temperature between 0 C and 30 C under Eclipse mode.",
            Carson,
            [Some("Eclipse mode"), Some("Thermal_Controller"), Some("keep Battery_Temperature"), None, Some("between 0 C and 30 C")],
        ),
        ok(
            "Where a Docking_Port is fitted, the Vehicle shall verify Seal_Pressure no less than 101 kPa.",
            Iso2,
            [Some("Where a Docking_Port is fitted"), Some("Vehicle"), Some("verify"), Some("Seal_Pressure"), Some("no less than 101 kPa")],
        ),
        Golden {
            text: "The Rover shall drive.",
            pattern: Iso1,
            slots: [None, Some("Rover"), Some("drive"), None, None],
            error: Some(ParseError::EmptySlot(SlotKey::Sr5)),
        },
        Golden {
            text: "The Camera shall capture images and shall store them within 1 s.",
            pattern: Iso1,
            slots: [None, Some("Camera"), Some("capture images and shall store them"), None, Some("within 1 s")],
            error: Some(ParseError::MultipleShall { count: 2 }),
        },
    ]
}

#[test]
fn twelve_annotated_statements() {
    let (glossary, catalog) = (Glossary::default(), Catalog::default());
    let cases = golden();
    assert_eq!(cases.len(), 12);
    for case in cases {
        let analysis = analyze_statement(case.text, &glossary, &catalog);
        let st = analysis.statement.as_ref().expect(case.text);
        assert_eq!(st.pattern, case.pattern, "{}", case.text);
        for (key, want) in SlotKey::ALL.iter().zip(case.slots) {
            assert_eq!(st.slot(*key).map(|s| s.text.as_str()), want, "{} {key}", case.text);
        }
        for (key, span) in &analysis.diagnostics.slot_spans {
            assert_eq!(span.slice(case.text), st.slot(*key).unwrap().text, "{}", case.text);
        }
        assert!(analysis.diagnostics.unconsumed.is_empty(), "{}", case.text);

        let strict = parse_statement(case.text, &glossary, &catalog);
        match case.error {
            Some(err) => assert_eq!(strict.unwrap_err(), err, "{}", case.text),
            None => {
                let (st, diag) = strict.unwrap();
                let order: Vec<SlotKey> = diag.slot_spans.iter().map(|(k, _)| *k).collect();
                assert_eq!(order, st.pattern.slot_order(), "{}", case.text);
                assert_eq!(render_statement(&st).unwrap(), normalize_whitespace(case.text));
            }
        }
    }
}

#[test]
fn verbatim_article_survives() {
    let (st, _) = parse_statement(
        "A Sample_Tube shall hold at most 15 g of regolith.",
        &Glossary::default(),
        &Catalog::default(),
    )
    .unwrap();
    assert_eq!(st.article, SubjectArticle::Verbatim("A".into()));
}

#[test]
fn no_shall() {
    assert_eq!(
        parse_statement("The system is fast.", &Glossary::default(), &Catalog::default()).unwrap_err(),
        ParseError::NoShallKeyword
    );
}
