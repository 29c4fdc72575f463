use std::fs;
use std::path::Path;
use std::process::Command;

fn cesgraph(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cesgraph")).current_dir(dir).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn synth_then_merge_then_export() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let (code, _, err) = cesgraph(dir, &["synth", "--preset", "planted", "--areas", "3", "--posts", "400", "--out", "syn", "--seed", "4"]);
    assert_eq!(code, 0, "{err}");
    assert!(dir.join("syn/config.toml").is_file());

    let (code, stdout, err) = cesgraph(dir, &["merge", "--config", "syn/config.toml", "--pair-budget", "300"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("merged: 3 areas"), "{stdout}");
    let merged = dir.join("syn/results/merged");
    for f in ["centrality.csv", "edges.csv", "partition.csv", "graph.graphml", "graph.dot", "report.json"] {
        assert!(merged.join(f).is_file(), "{f}");
    }

    let (code, _, err) = cesgraph(dir, &["export", "--graph", "syn/results/merged/graph.graphml", "--format", "edge-csv", "--out", "conv"]);
    assert_eq!(code, 0, "{err}");
    assert!(dir.join("conv/graph.edges.csv").is_file());

    let (code, stdout, err) = cesgraph(dir, &["classify", "--graph", "conv/graph.edges.csv", "--out", "cls"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("community 0"));
    assert!(dir.join("cls/partition.csv").is_file());
}

#[test]
fn clean_build_analyze_on_ad_hoc_input() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("posts.jsonl"),
        "{\"post_id\":\"1\",\"user_id\":\"a\",\"hashtags\":[\"#Beach\",\"#sun\",\"#q\"],\"query\":\"q\"}\n\
         {\"post_id\":\"2\",\"user_id\":\"b\",\"hashtags\":[\"beach\",\"sea\"],\"query\":\"q\"}\n\
         {\"post_id\":\"3\",\"user_id\":\"c\",\"hashtags\":[\"sun\",\"sea\",\"beach\"],\"query\":\"q\"}\n",
    )
    .unwrap();
    for cmd in ["clean", "build", "analyze"] {
        let (code, _, err) = cesgraph(dir, &[cmd, "--input", "posts.jsonl", "--area", "demo", "--out", "o"]);
        assert_eq!(code, 0, "{cmd}: {err}");
    }
    let cleaned = fs::read_to_string(dir.join("o/areas/demo/clean.jsonl")).unwrap();
    assert!(!cleaned.contains("\"q\"]"));
    assert!(dir.join("o/areas/demo/network.graphml").is_file());
    assert!(dir.join("o/areas/demo/report.json").is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // Input problems exit 1.
    assert_eq!(cesgraph(dir, &["analyze", "--input", "missing.jsonl"]).0, 1);
    assert_eq!(cesgraph(dir, &["merge"]).0, 1);
    assert_eq!(cesgraph(dir, &["analyze", "--input", "x.jsonl", "--k-top", "1"]).0, 1);
    assert_eq!(cesgraph(dir, &["no-such-command"]).0, 1);
    fs::write(dir.join("bad.toml"), "k_top = \"many\"\n").unwrap();
    assert_eq!(cesgraph(dir, &["merge", "--config", "bad.toml"]).0, 1);
    assert_eq!(cesgraph(dir, &["--help"]).0, 0);

    // Non-convergence is an analysis failure and exits 2.
    fs::write(
        dir.join("posts.jsonl"),
        "{\"post_id\":\"1\",\"user_id\":\"a\",\"hashtags\":[\"a\",\"b\",\"c\"],\"query\":\"q\"}\n\
         {\"post_id\":\"2\",\"user_id\":\"a\",\"hashtags\":[\"a\",\"d\"],\"query\":\"q\"}\n",
    )
    .unwrap();
    fs::write(
        dir.join("run.toml"),
        "eigen_max_iterations = 1\nout_dir = \"o\"\n[[areas]]\nname = \"x\"\ninputs = [\"posts.jsonl\"]\n",
    )
    .unwrap();
    let (code, _, err) = cesgraph(dir, &["analyze", "--config", "run.toml"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("centrality") && err.contains('x'), "{err}");
}
