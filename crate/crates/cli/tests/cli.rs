use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fsm-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

// triangle 0-1-2 with a tail 2-3
const TAILED: &str = "# comment\n0 1\n1 2\n2 0\n2 3\n";

#[test]
fn prints_table_to_stdout() {
    let g = scratch("tailed.el", TAILED);
    let out = stdout(&fsm(&[
        "--graph",
        g.to_str().unwrap(),
        "--size",
        "3",
        "--support",
        "1",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0],
        "# size=3 threshold=1 mode=two-vertex induce=edge seed=0 match_sample=none join_sample=none"
    );
    assert_eq!(lines[1], "support\tsize\tembeddings\tcanonical");
    // wedge and triangle
    assert_eq!(lines.len(), 4);
    assert!(lines[2..].iter().all(|l| l.starts_with("3\t3\t")));
}

#[test]
fn writes_out_and_stats_files() {
    let g = scratch("tailed2.el", TAILED);
    let out = g.with_extension("tsv");
    let stats = g.with_extension("json");
    let o = fsm(&[
        "--graph",
        g.to_str().unwrap(),
        "--size",
        "4",
        "--support",
        "n*0.5",
        "--out",
        out.to_str().unwrap(),
        "--stats",
        stats.to_str().unwrap(),
    ]);
    assert!(stdout(&o).is_empty());
    let table = fs::read_to_string(&out).unwrap();
    assert!(table.starts_with("# size=4 threshold=2 "));
    let s = fs::read_to_string(&stats).unwrap();
    for key in [
        "hash_probe_bytes",
        "canonicalization_calls",
        "combine_calls",
        "outputs",
        "pruned_count",
    ] {
        assert!(s.contains(key), "missing {key}");
    }
}

#[test]
fn json_format_and_modes_agree() {
    let g = scratch("tailed3.el", TAILED);
    let run = |mode: &str| {
        stdout(&fsm(&[
            "--graph",
            g.to_str().unwrap(),
            "--size",
            "4",
            "--support",
            "1",
            "--mode",
            mode,
            "--format",
            "json",
        ]))
    };
    let two = run("two-vertex");
    let single = run("single-vertex");
    assert!(two.contains("\"mode\": \"two-vertex\""));
    let rows = |s: &str| s.split("\"patterns\"").nth(1).unwrap().to_string();
    assert_eq!(rows(&two), rows(&single));
}

#[test]
fn random_labels_are_reproducible() {
    let g = scratch("tailed4.el", TAILED);
    let run = |seed: &str, threads: &str| {
        stdout(&fsm(&[
            "--graph",
            g.to_str().unwrap(),
            "--size",
            "4",
            "--support",
            "1",
            "--random-labels",
            "2",
            "--label-seed",
            seed,
            "--threads",
            threads,
        ]))
    };
    assert_eq!(run("7", "1"), run("7", "1"));
    assert_eq!(run("7", "1"), run("7", "2"));
}

#[test]
fn label_file_is_used() {
    let g = scratch("tailed5.el", TAILED);
    let l = scratch("tailed5.labels", "0 0\n1 0\n2 1\n3 1\n");
    let out = stdout(&fsm(&[
        "--graph",
        g.to_str().unwrap(),
        "--labels",
        l.to_str().unwrap(),
        "--size",
        "2",
        "--support",
        "1",
    ]));
    // label pairs 0-0, 0-1, 1-1
    assert_eq!(out.lines().count(), 5);
}

#[test]
fn bad_input_fails_cleanly() {
    let g = scratch("tailed6.el", TAILED);
    let gp = g.to_str().unwrap();
    let cases: &[&[&str]] = &[
        &["--graph", gp, "--size", "1", "--support", "1"],
        &["--graph", gp, "--size", "3", "--support", "0"],
        &["--graph", gp, "--size", "3", "--support", "2%x"],
        &[
            "--graph",
            "/nonexistent/graph.el",
            "--size",
            "3",
            "--support",
            "1",
        ],
        &[
            "--graph",
            gp,
            "--size",
            "3",
            "--support",
            "1",
            "--mode",
            "single-vertex",
            "--match-sample",
            "2",
        ],
        &[
            "--graph",
            gp,
            "--size",
            "3",
            "--support",
            "1",
            "--labels",
            gp,
            "--random-labels",
            "2",
        ],
        &[
            "--graph",
            gp,
            "--size",
            "3",
            "--support",
            "1",
            "--random-labels",
            "0",
        ],
    ];
    for args in cases {
        let o = fsm(args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty());
    }
    let bad = scratch("bad.el", "0 1\n1 x\n");
    let o = fsm(&[
        "--graph",
        bad.to_str().unwrap(),
        "--size",
        "3",
        "--support",
        "1",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
