use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use depgraph::macroeval::{OverlapReport, RegionTable};
use depgraph_cli::*;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run<F: FnOnce(&mut Vec<u8>, &mut Vec<u8>) -> u8>(f: F) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = f(&mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn extract(args: ExtractArgs) -> (u8, String, String) {
    run(|o, e| cmd_extract(&args, o, e))
}

#[test]
fn fixture_project_matches_hand_derived_edges() {
    let (code, csv, err) = extract(ExtractArgs {
        root: fixtures().join("project"),
        ..Default::default()
    });
    assert_eq!(code, EXIT_OK, "{err}");
    let expected = std::fs::read_to_string(fixtures().join("project.expected.csv")).unwrap();
    assert_eq!(csv, expected);
    assert!(err.contains("22 edges"));
}

#[test]
fn extraction_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("run{i}.csv"));
            let (code, _, _) = extract(ExtractArgs {
                root: fixtures().join("project"),
                out: Some(out.clone()),
                include_external: true,
                ..Default::default()
            });
            assert_eq!(code, EXIT_OK);
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn empty_directory_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let (code, csv, _) = extract(ExtractArgs {
        root: dir.path().to_path_buf(),
        ..Default::default()
    });
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn missing_root_is_fatal() {
    let (code, _, err) = extract(ExtractArgs {
        root: "/no/such/dir".into(),
        ..Default::default()
    });
    assert_eq!(code, EXIT_FATAL);
    assert!(err.contains("/no/such/dir"));
}

#[test]
fn broken_file_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ok.py"), "def f():\n    pass\nf()\n").unwrap();
    std::fs::write(dir.path().join("bad.py"), "def (:\n").unwrap();
    let (code, csv, err) = extract(ExtractArgs {
        root: dir.path().to_path_buf(),
        ..Default::default()
    });
    assert_eq!(code, EXIT_PARTIAL);
    assert!(err.contains("bad.py"));
    assert!(csv.contains("ok.f"));
}

#[test]
fn kinds_filter() {
    let (code, csv, _) = extract(ExtractArgs {
        root: fixtures().join("project"),
        kinds: Some(vec![depgraph::EdgeKind::Inherit]),
        ..Default::default()
    });
    assert_eq!(code, EXIT_OK);
    assert_eq!(csv.lines().count(), 2);
}

fn micro(mode: MicroMode, suite: PathBuf) -> (u8, String, String) {
    let args = MicroArgs {
        suite,
        mode,
        profile: None,
    };
    run(|o, e| cmd_micro(&args, o, e))
}

fn total_row(table: &str) -> Vec<String> {
    let row = table.lines().find(|l| l.starts_with("| Total")).unwrap();
    row.split('|')
        .map(|c| c.trim().to_string())
        .filter(|c| !c.is_empty())
        .collect()
}

#[test]
fn micro_modes() {
    let suite = fixtures().join("minisuite/manifest.txt");
    let (code, table, _) = micro(MicroMode::Cleaned, suite.clone());
    assert_eq!(code, EXIT_OK);
    assert_eq!(total_row(&table).last().unwrap(), "1.00");
    let (_, table, _) = micro(MicroMode::Initial, suite.clone());
    assert_ne!(total_row(&table).last().unwrap(), "1.00");
    let (_, table, _) = micro(MicroMode::Both, suite);
    assert!(table.starts_with("| Category"));
    assert!(table.contains("Recall*"));
}

#[test]
fn empty_suite_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.txt");
    std::fs::write(&manifest, "# nothing\n").unwrap();
    let (code, _, err) = micro(MicroMode::Cleaned, manifest);
    assert_eq!(code, EXIT_FATAL);
    assert!(err.starts_with("error:"));
}

/// Writes one pairs file per tool realizing the table's regions, and a
/// config comparing them.
fn materialize(table: &RegionTable, dir: &Path) -> PathBuf {
    let mut files = vec![String::new(); table.tools.len()];
    let mut next = 0usize;
    for region in &table.regions {
        for _ in 0..region.count {
            for name in &region.tools {
                let i = table.tools.iter().position(|t| t == name).unwrap();
                writeln!(files[i], "m.f{next},m.g{next}").unwrap();
            }
            next += 1;
        }
    }
    let mut config = format!(
        "title = {:?}\njson_out = \"out/report.json\"\n",
        table.title.clone().unwrap()
    );
    for (tool, body) in table.tools.iter().zip(&files) {
        std::fs::write(dir.join(format!("{tool}.csv")), body).unwrap();
        write!(
            config,
            "[[tool]]\nname = \"{tool}\"\nfile = \"{tool}.csv\"\nformat = \"pairs-csv\"\nheader = false\n"
        )
        .unwrap();
    }
    let path = dir.join("compare.toml");
    std::fs::write(&path, config).unwrap();
    path
}

fn macro_run(config: PathBuf) -> (u8, String, String) {
    let args = MacroArgs { config, out: None };
    run(|o, e| cmd_macro(&args, o, e))
}

#[test]
fn guava_shaped_comparison() {
    let table: RegionTable =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("regions/google_guava.json")).unwrap())
            .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = materialize(&table, dir.path());
    let (code, md, err) = macro_run(config);
    assert_eq!(code, EXIT_OK, "{err}");
    let row = md.lines().nth(2).unwrap();
    for cell in [
        "| 9249 |",
        "335(4%)",
        "3726(40%)",
        "2650(29%)",
        "6711(73%)",
        "8382(91%)",
        "6592(71%)",
        "1790(19%)",
    ] {
        assert!(row.contains(cell), "{cell} missing from {row}");
    }
    let json: OverlapReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(json, table.into_report().unwrap());
}

#[test]
fn identical_tools_have_no_unique_edges() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.json"), r#"{"m.f": ["m.g", "m.h"]}"#).unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(
        &config,
        "[[tool]]\nname = \"A\"\nfile = \"a.json\"\nformat = \"adjacency-json\"\n\
         [[tool]]\nname = \"B\"\nfile = \"a.json\"\nformat = \"adjacency-json\"\n",
    )
    .unwrap();
    let (code, md, _) = macro_run(config);
    assert_eq!(code, EXIT_OK);
    assert!(md.contains("Unique A | Unique B |"));
    assert!(md.lines().nth(2).unwrap().ends_with("| 0(0%) | 0(0%) |"));
}

#[test]
fn macro_errors() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.toml");
    std::fs::write(
        &one,
        "[[tool]]\nname = \"A\"\nfile = \"a.json\"\nformat = \"adjacency-json\"\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("a.json"), "{}").unwrap();
    let (code, _, err) = macro_run(one);
    assert_eq!(code, EXIT_FATAL);
    assert!(err.contains("at least 2 tools"));

    let missing = dir.path().join("missing.toml");
    std::fs::write(
        &missing,
        "[[tool]]\nname = \"A\"\nfile = \"a.json\"\nformat = \"adjacency-json\"\n\
         [[tool]]\nname = \"Ghost\"\nfile = \"nope.json\"\nformat = \"adjacency-json\"\n",
    )
    .unwrap();
    let (code, _, err) = macro_run(missing);
    assert_eq!(code, EXIT_FATAL);
    assert!(err.contains("Ghost"));
}
