//! End-to-end runs of the `dimerflow` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn out_dir(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn dimerflow(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimerflow"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(out: &Path, file: &str) -> String {
    std::fs::read_to_string(out.join(file)).unwrap_or_else(|e| panic!("{file}: {e}"))
}

#[test]
fn counts_the_two_by_two_square() {
    let out = out_dir("count");
    let o = dimerflow(&out, &["count", "--lattice", "square", "--region", "square", "--L", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2");
    assert_eq!(read(&out, "count.csv"), "count\n2\n");
    let o = dimerflow(&out, &["count", "--lattice", "hexagon", "--region", "disk", "--L", "4", "--method", "both"]);
    assert_eq!(stdout(&o).trim(), "20");
}

#[test]
fn pyramid_drift_table_is_nonpositive() {
    let out = out_dir("drift");
    let o = dimerflow(&out, &["drift", "--lattice", "squarehexagon", "--pyramid", "--L", "8", "--samples", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out, "drift.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("face,thread,pos,sides,depth,case,drift"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let drift = cols[6];
        assert!(drift == "0" || drift.starts_with('-'), "{line}");
        if cols[5] == "interior" {
            assert_eq!(drift, "0", "{line}");
        }
        rows += 1;
    }
    assert!(rows > 0);
}

fn polygon_count(svg: &str) -> usize {
    svg.matches("<polygon ").count()
}

#[test]
fn render_is_well_formed_and_deterministic() {
    let out = out_dir("render");
    let args = ["render", "--lattice", "hexagon", "--region", "disk", "--L", "8", "--seed", "4"];
    let o = dimerflow(&out, &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = read(&out, "render.svg");
    assert!(first.starts_with("<?xml") && first.trim_end().ends_with("</svg>"));
    assert_eq!(first.matches("<g ").count(), first.matches("</g>").count());
    let dimers: usize = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(polygon_count(&first), dimers);
    dimerflow(&out, &args);
    assert_eq!(read(&out, "render.svg"), first);

    // a sampled matching written by `sample` renders one tile per dimer
    let o = dimerflow(&out, &["sample", "--lattice", "square", "--region", "disk", "--L", "8", "--seed", "2"]);
    assert!(o.status.success());
    let input = out.join("sample.matching");
    let o = dimerflow(&out, &["render", "--input", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read(&out, "sample.matching");
    let dimers: usize = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!(dimers > 0 && !m.is_empty());
    assert_eq!(polygon_count(&read(&out, "render.svg")), dimers);
}

#[test]
fn pyramid_render_has_labelled_regions() {
    let out = out_dir("render-pyramid");
    let o = dimerflow(&out, &["render", "--lattice", "square", "--pyramid", "--L", "6"]);
    assert!(o.status.success());
    let svg = read(&out, "render.svg");
    assert!(svg.matches(r#"<g id="class-"#).count() >= 4);
}

#[test]
fn empty_interior_renders_boundary_only() {
    let out = out_dir("render-empty");
    let o = dimerflow(
        &out,
        &["render", "--lattice", "hexagon", "--region", "disk", "--L", "1", "--boundary", "flat:0.2,0.3"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = read(&out, "render.svg");
    assert!(polygon_count(&svg) > 0);
    assert_eq!(svg.matches("<g ").count(), 1);
    assert!(svg.contains(r#"<g id="boundary""#));
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let out = out_dir("exit");
    let code = |args: &[&str]| dimerflow(&out, args).status.code();
    // configuration
    assert_eq!(code(&["count", "--lattice", "octagon", "--L", "2"]), Some(2));
    assert_eq!(code(&["count", "--lattice", "square"]), Some(2));
    assert_eq!(code(&["kinv", "--lattice", "square", "--grid-n", "8"]), Some(2));
    // compute cap
    assert_eq!(
        code(&["count", "--lattice", "square", "--region", "square", "--L", "12", "--method", "enumerate"]),
        Some(3)
    );
    // numerical failure
    assert_eq!(code(&["kinv", "--lattice", "square", "--slope", "5,5"]), Some(4));
    assert_eq!(code(&["count", "--lattice", "square", "--region", "square", "--L", "2"]), Some(0));
}

#[test]
fn metadata_and_reruns_are_reproducible() {
    let out = out_dir("meta");
    let args = ["sample", "--lattice", "hexagon", "--region", "disk", "--L", "6", "--dynamics", "sync", "--horizon", "3", "--seed", "9"];
    assert!(dimerflow(&out, &args).status.success());
    let heights = read(&out, "sample_heights.csv");
    let meta = read(&out, "sample.meta");
    assert!(meta.starts_with("command = sample\n"));
    assert_eq!(meta.matches("seed = 9\n").count(), 1);
    assert!(meta.contains("status = ok\n"));
    let hash = meta.lines().find_map(|l| l.strip_prefix("hash = ")).unwrap();
    assert_eq!(hash.len(), 64);
    assert!(dimerflow(&out, &args).status.success());
    assert_eq!(read(&out, "sample_heights.csv"), heights);
    assert_eq!(read(&out, "sample.meta"), meta);

    let o = dimerflow(&out, &["count", "--lattice", "nope", "--L", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let meta = read(&out, "count.meta");
    assert!(meta.contains("seed = none\n") && meta.contains("status = error"));
}

#[test]
fn flags_override_the_config_file() {
    let out = out_dir("config");
    let file = out.join("run.conf");
    std::fs::write(&file, "# two by two\nlattice = square\nregion = square\nL = 2\n").unwrap();
    let with = |extra: &[&str]| {
        let mut args = vec!["--config", file.to_str().unwrap(), "count"];
        args.extend_from_slice(extra);
        stdout(&dimerflow(&out, &args)).trim().to_string()
    };
    assert_eq!(with(&[]), "2");
    assert_eq!(with(&["--L", "4"]), "36");
    std::fs::write(&file, "lattice = square\nbogus = 1\n").unwrap();
    let o = dimerflow(&out, &["--config", file.to_str().unwrap(), "count", "--L", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("'bogus'"));
}

#[test]
fn fk_table_has_a_header() {
    let out = out_dir("fksums");
    let o = dimerflow(&out, &["fksums", "--k", "2", "--Ls", "10"]);
    assert!(o.status.success());
    let csv = read(&out, "fksums.csv");
    assert_eq!(csv.lines().next(), Some("k,L,F,F_tilde,bound_holds,ratio"));
    assert_eq!(csv.lines().count(), 3);
}
