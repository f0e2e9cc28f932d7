use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jingleprint::io::netpbm::encode_ppm;
use jingleprint::GrayFrame;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jingleprint"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small corpus: 2 jingles, 1 stream of 600 frames, each jingle planted twice.
fn small_corpus(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("corpus");
    let mut args = vec![
        "gen-corpus",
        "--out",
        s(&out),
        "--jingles",
        "2",
        "--streams",
        "1",
        "--frames",
        "600",
        "--seed",
        "5",
    ];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn sign(corpus: &Path, id: &str, catalogue: &Path) -> Output {
    let frames = corpus.join("jingles").join(id);
    run(&[
        "sign",
        "--frames",
        s(&frames),
        "--id",
        id,
        "--channel",
        "SYN",
        "--catalogue",
        s(catalogue),
    ])
}

fn truth_rows(corpus: &Path) -> Vec<(String, usize, String)> {
    std::fs::read_to_string(corpus.join("truth.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].to_string())
        })
        .collect()
}

fn report_rows(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].to_string())
        })
        .collect()
}

#[test]
fn help_exits_zero_and_lists_defaults() {
    for sub in [
        "sign",
        "scan",
        "calibrate",
        "catalogue",
        "gen-corpus",
        "segment-image",
    ] {
        let o = run(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
    }
    let scan = stdout(&run(&["scan", "--help"]));
    for flag in [
        "--stride",
        "--q",
        "--tau",
        "--thre-dist",
        "--jobs",
        "--config",
        "[default: 32]",
    ] {
        assert!(scan.contains(flag), "missing {flag}");
    }
    let gen = stdout(&run(&["gen-corpus", "--help"]));
    assert!(gen.contains("--noise-amp") && gen.contains("[default: 2000]"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["scan", "--bogus"])), 1);
    assert_eq!(code(&run(&["sign", "--tau", "zero"])), 1);
}

#[test]
fn gen_corpus_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_corpus(&dir.path().join("a"), &[]);
    let b = small_corpus(&dir.path().join("b"), &[]);
    for rel in [
        "truth.csv",
        "streams/stream_00.y4m",
        "jingles/J01/frame_000059.pgm",
    ] {
        assert_eq!(
            std::fs::read(a.join(rel)).unwrap(),
            std::fs::read(b.join(rel)).unwrap(),
            "{rel}"
        );
    }
    assert_eq!(truth_rows(&a).len(), 4);
}

#[test]
fn sign_refuses_duplicates_and_out_of_range() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let cat = dir.path().join("cat.jpc");
    let o = sign(&corpus, "J00", &cat);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("J00 n_frame=5 t_step=12"));
    assert!(std::fs::read_to_string(&cat)
        .unwrap()
        .contains("ENTRY J00 SYN"));
    assert_eq!(code(&sign(&corpus, "J00", &cat)), 3);

    let frames = corpus.join("jingles/J01");
    let o = run(&[
        "sign",
        "--frames",
        s(&frames),
        "--id",
        "J01",
        "--channel",
        "SYN",
        "--nframes",
        "5",
        "--tstep",
        "25",
        "--catalogue",
        s(&cat),
    ]);
    assert_eq!(code(&o), 3);
    let list = stdout(&run(&["catalogue", "list", "--catalogue", s(&cat)]));
    assert_eq!(list.lines().count(), 2);
}

#[test]
fn scan_finds_planted_jingle() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let cat = dir.path().join("cat.jpc");
    assert_eq!(code(&sign(&corpus, "J00", &cat)), 0);
    let report = dir.path().join("r.csv");
    let stream = corpus.join("streams/stream_00.y4m");
    let o = run(&[
        "scan",
        "--stream",
        s(&stream),
        "--catalogue",
        s(&cat),
        "--report",
        s(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let expected: Vec<(usize, String)> = truth_rows(&corpus)
        .into_iter()
        .filter(|t| t.2 == "J00")
        .map(|t| (t.1, t.2))
        .collect();
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(report_rows(&text), expected);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",1.0000")));

    // stride 5 keeps the same detections, shifted by less than the stride
    let o = run(&[
        "scan",
        "--stream",
        s(&stream),
        "--catalogue",
        s(&cat),
        "--stride",
        "5",
    ]);
    let strided = report_rows(&stdout(&o));
    assert_eq!(strided.len(), expected.len());
    for ((a, ida), (b, idb)) in strided.iter().zip(&expected) {
        assert_eq!(ida, idb);
        assert!(a.abs_diff(*b) <= 4, "{a} vs {b}");
    }
}

#[test]
fn scan_refuses_mismatched_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let cat = dir.path().join("cat.jpc");
    sign(&corpus, "J00", &cat);
    let stream = corpus.join("streams/stream_00.y4m");
    let o = run(&[
        "scan",
        "--stream",
        s(&stream),
        "--catalogue",
        s(&cat),
        "--tstep",
        "10",
    ]);
    assert_eq!(code(&o), 3);
    let o = run(&[
        "scan",
        "--stream",
        s(&stream),
        "--catalogue",
        s(&cat),
        "--q",
        "64",
    ]);
    assert_eq!(code(&o), 3);
    let missing = dir.path().join("none.y4m");
    let o = run(&["scan", "--stream", s(&missing), "--catalogue", s(&cat)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "t_step = 10\nw_poi = 0.5\n").unwrap();
    let cat = dir.path().join("cat.jpc");
    let frames = corpus.join("jingles/J00");
    let o = run(&[
        "--config",
        s(&conf),
        "sign",
        "--frames",
        s(&frames),
        "--id",
        "J00",
        "--channel",
        "SYN",
        "--catalogue",
        s(&cat),
        "--w-poi",
        "0.25",
    ]);
    assert_eq!(code(&o), 0);
    let list = stdout(&run(&["catalogue", "list", "--catalogue", s(&cat)]));
    assert!(list.contains("J00,SYN,5,10,1.000000,0.250000"), "{list}");

    std::fs::write(&conf, "nonsense\n").unwrap();
    let o = run(&[
        "--config",
        s(&conf),
        "catalogue",
        "list",
        "--catalogue",
        s(&cat),
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "--config",
        s(&conf),
        "sign",
        "--frames",
        s(&frames),
        "--id",
        "X",
        "--channel",
        "SYN",
        "--catalogue",
        s(&cat),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn catalogue_remove_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let cat = dir.path().join("cat.jpc");
    sign(&corpus, "J00", &cat);
    sign(&corpus, "J01", &cat);
    let o = run(&["catalogue", "remove", "--catalogue", s(&cat), "--id", "J00"]);
    assert_eq!(code(&o), 0);
    let list = stdout(&run(&["catalogue", "list", "--catalogue", s(&cat)]));
    assert!(!list.contains("J00") && list.contains("J01"));
    assert_eq!(
        code(&run(&[
            "catalogue",
            "remove",
            "--catalogue",
            s(&cat),
            "--id",
            "J00"
        ])),
        3
    );

    let mut bytes = std::fs::read(&cat).unwrap();
    bytes[40] ^= 0x01;
    std::fs::write(&cat, bytes).unwrap();
    assert_eq!(
        code(&run(&["catalogue", "list", "--catalogue", s(&cat)])),
        3
    );
}

#[test]
fn calibrate_rewrites_weights() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let cat = dir.path().join("cat.jpc");
    sign(&corpus, "J00", &cat);
    sign(&corpus, "J01", &cat);
    let truth = corpus.join("truth.csv");
    let o = run(&["calibrate", "--catalogue", s(&cat), "--truth", s(&truth)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    assert!(table.lines().next().unwrap().contains(" R "));
    assert!(table.contains("ccv") && table.contains("poi"));
    let list = stdout(&run(&["catalogue", "list", "--catalogue", s(&cat)]));
    assert!(list.contains("J00,SYN,5,12,1.000000,1.000000"), "{list}");

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "stream_path,offset,program_id\n").unwrap();
    let o = run(&["calibrate", "--catalogue", s(&cat), "--truth", s(&empty)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn calibrate_counts_unmatched_truth_as_missed() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = small_corpus(dir.path(), &[]);
    let cat = dir.path().join("cat.jpc");
    sign(&corpus, "J00", &cat);
    sign(&corpus, "J01", &cat);
    let mut truth = std::fs::read_to_string(corpus.join("truth.csv")).unwrap();
    let planted: Vec<usize> = truth
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(planted.len(), 4);
    // one extra row where nothing was planted: CI=4, MI=1, FI=0
    let phantom = (0..540)
        .step_by(10)
        .find(|o: &usize| planted.iter().all(|p| p.abs_diff(*o) > 80))
        .unwrap();
    truth.push_str(&format!("streams/stream_00.y4m,{phantom},J00\n"));
    let path = corpus.join("truth_phantom.csv");
    std::fs::write(&path, truth).unwrap();

    let o = run(&["calibrate", "--catalogue", s(&cat), "--truth", s(&path)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = stdout(&o);
    for name in ["ccv", "poi"] {
        let row = table.lines().find(|l| l.starts_with(name)).unwrap();
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(&cols[1..], ["4", "1", "0", "0.8000", "1.0000", "0.89"], "{row}");
    }
    let list = stdout(&run(&["catalogue", "list", "--catalogue", s(&cat)]));
    assert!(list.contains("J00,SYN,5,12,0.888889,0.888889"), "{list}");
}

fn write_gray_ppm(path: &Path, f: &GrayFrame) {
    let rgb: Vec<u8> = f.luma().iter().flat_map(|&v| [v, v, v]).collect();
    std::fs::write(path, encode_ppm(f.width(), f.height(), &rgb)).unwrap();
}

fn segment_regions(input: &Path, out: &Path, extra: &[&str]) -> usize {
    let mut args = vec!["segment-image", "--input", s(input), "--out", s(out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(table.lines().next(), Some("region_id,size,mean"));
    let n = table.lines().count() - 1;
    assert_eq!(stdout(&o).trim(), format!("{n} regions"));
    n
}

#[test]
fn segment_image_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.ppm");
    let out = dir.path().join("flat.pgm");
    write_gray_ppm(&input, &GrayFrame::filled(32, 24, 90));
    assert_eq!(segment_regions(&input, &out, &[]), 1);
    let pgm = jingleprint::io::read_image(&out).unwrap();
    assert_eq!((pgm.width(), pgm.height()), (32, 24));

    let input = dir.path().join("half.ppm");
    let half = GrayFrame::from_fn(32, 24, |x, _| if x < 16 { 10 } else { 240 });
    write_gray_ppm(&input, &half);
    assert_eq!(
        segment_regions(&input, &dir.path().join("half.pgm"), &[]),
        2
    );

    // noisy fixture: finer Q never yields fewer regions
    let input = dir.path().join("noisy.ppm");
    let noisy = GrayFrame::from_fn(32, 24, |x, y| ((x * 37 + y * 91 + x * y * 13) % 256) as u8);
    write_gray_ppm(&input, &noisy);
    let coarse = segment_regions(&input, &dir.path().join("q2.pgm"), &["--q", "2"]);
    let fine = segment_regions(&input, &dir.path().join("q256.pgm"), &["--q", "256"]);
    assert!(fine >= coarse, "{fine} < {coarse}");
}
