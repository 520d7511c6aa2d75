use proptest::prelude::*;

use refracto_core::io::*;
use refracto_core::sensor_sim::{synth_frame, SimGeometry, SimScenario};
use refracto_core::{CaptureErrorKind, Error, PixelFrame};

fn sample_frame(seed: u64) -> PixelFrame {
    synth_frame(
        &SimScenario {
            seed,
            ..SimScenario::default()
        },
        &SimGeometry::default(),
    )
    .unwrap()
}

fn kind_of(text: &str) -> (usize, CaptureErrorKind) {
    match parse_capture(text, "t.rcap") {
        Err(Error::Capture { line, kind, .. }) => (line, kind),
        other => panic!("expected a capture error, got {other:?}"),
    }
}

const GOOD: &str = "# refracto-capture v1\nintegration_time_us=1600\nled_level=1\ntemperature_c=20\npixels=3\n0.5\n1.5\n2.5\n";

#[test]
fn capture_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let frame = sample_frame(9);
    let a = dir.path().join("a.rcap");
    let b = dir.path().join("b.rcap");
    write_capture(&frame, &a).unwrap();
    write_capture(&frame, &b).unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert!(bytes.starts_with(b"# refracto-capture v1\n"));
    assert_eq!(read_capture(&a).unwrap(), frame);
}

#[test]
fn malformed_captures_name_their_line() {
    assert_eq!(parse_capture(GOOD, "t").unwrap().voltages, vec![0.5, 1.5, 2.5]);

    let (line, kind) = kind_of(&GOOD.replace("v1", "v2"));
    assert_eq!(line, 1);
    assert!(matches!(kind, CaptureErrorKind::Version(_)));

    assert!(matches!(kind_of("pixels=1\n0.1\n").1, CaptureErrorKind::MissingHeader));

    let (line, kind) = kind_of(&GOOD.replace("2.5", "abc"));
    assert_eq!(line, 8);
    assert!(matches!(kind, CaptureErrorKind::NonNumericSample(_)));

    let (_, kind) = kind_of(&GOOD.replace("pixels=3", "pixels=4"));
    assert!(matches!(kind, CaptureErrorKind::CountMismatch { declared: 4, found: 3 }));

    let (line, kind) = kind_of(&GOOD.replace("led_level=1\n", "led_level=1\nled_level=1\n"));
    assert_eq!(line, 4);
    assert!(matches!(kind, CaptureErrorKind::DuplicateKey(_)));

    let (_, kind) = kind_of(&GOOD.replace("temperature_c=20\n", ""));
    assert!(matches!(kind, CaptureErrorKind::MissingKey("temperature_c")));

    let (line, kind) = kind_of(&GOOD.replace("led_level=1", "led_level=bright"));
    assert_eq!(line, 3);
    assert!(matches!(kind, CaptureErrorKind::BadValue { .. }));

    let (_, kind) = kind_of(&GOOD.replace("pixels=3\n", "pixels=3\ngain=2\n"));
    assert!(matches!(kind, CaptureErrorKind::UnknownKey(_)));

    let (_, kind) = kind_of(&format!("{GOOD}pixels=3\n"));
    assert!(matches!(kind, CaptureErrorKind::MisplacedMetadata));
}

#[test]
fn missing_file_is_io_error() {
    let err = read_capture(std::path::Path::new("/nonexistent/x.rcap")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/x.rcap"));
}

#[test]
fn model_files_reject_bad_content() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, "{\"version\": 1}").unwrap();
    assert!(matches!(load_model(&path), Err(Error::Model(_))));
    std::fs::write(&path, "not json").unwrap();
    assert!(matches!(load_model(&path), Err(Error::Model(_))));
}

#[test]
fn config_rejects_bad_values_at_load() {
    let cfg = RunConfig::parse("# comment\nwindow_m = 10\nstep_dx=40\n", "c.cfg").unwrap();
    assert_eq!((cfg.pipeline.window_m, cfg.pipeline.step_dx), (10, 40));
    assert!(matches!(
        RunConfig::parse("window_mm=10\n", "c.cfg"),
        Err(Error::ConfigParse { line: 1, .. })
    ));
    assert!(matches!(
        RunConfig::parse("window_m=0\n", "c.cfg"),
        Err(Error::InvalidConfig(_))
    ));
    assert!(matches!(
        RunConfig::parse("dither_amp_lsb=0.5\n", "c.cfg"),
        Err(Error::InvalidConfig(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn arbitrary_frames_round_trip(
        voltages in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..400),
        t in 0.0f64..5000.0,
        led in 0.0f64..=1.0,
        temp in -20.0f64..60.0,
    ) {
        let frame = PixelFrame { voltages, integration_time_us: t, led_level: led, temperature_c: temp };
        let text = format_capture(&frame);
        prop_assert_eq!(parse_capture(&text, "p").unwrap(), frame.clone());
        let back = parse_capture(&text, "p").unwrap();
        prop_assert_eq!(format_capture(&back), text);
    }
}
