use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sramsey")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout {:?} stderr {:?}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

#[test]
fn chains_arrow_exit_codes() {
    let ok = run(&["arrow", "--C", "chain6", "--B", "chain3", "--A", "chain2", "--r", "2", "--d", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["verdict"], "holds");

    let fail = run(&["arrow", "--C", "chain5", "--B", "chain3", "--A", "chain2", "--r", "2", "--d", "1"]);
    assert_eq!(fail.status.code(), Some(3));
    let rep = report(&fail);
    assert_eq!(rep["verdict"], "fails");
    // The witness is a 2-coloring of the 10 pairs with no monochromatic triple.
    let domain = rep["witness"]["domain"].as_array().unwrap();
    let colors = rep["witness"]["colors"].as_array().unwrap();
    assert_eq!(domain.len(), 10);
    let color = |x: u64, y: u64| {
        let i = domain.iter().position(|p| p[0] == x && p[1] == y).unwrap();
        colors[i].as_u64().unwrap()
    };
    for a in 0..5 {
        for b in a + 1..5 {
            for c in b + 1..5 {
                let cs = [color(a, b), color(a, c), color(b, c)];
                assert!(cs.iter().any(|&x| x != cs[0]), "{a}{b}{c} monochromatic");
            }
        }
    }
}

#[test]
fn exhaustive_flag_agrees() {
    let out = run(&["arrow", "--C", "chain5", "--B", "chain3", "--A", "chain2", "--r", "2", "--d", "1", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["stats"]["exhaustive"], true);
}

#[test]
fn triangle_automorphisms() {
    let out = run(&["aut", "--A", "k3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["details"]["order"], 6);
}

#[test]
fn small_witness_verifies() {
    let out = run(&["semiret-verify", "--witness", "treeprop_c2s2", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "pass");
}

#[test]
fn error_exit_codes() {
    let malformed = run(&["aut", "--A", "/nonexistent/structure.json"]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&malformed.stderr).contains("chainN"));

    let degenerate = run(&["arrow", "--C", "chain2", "--B", "chain3", "--A", "chain2", "--r", "2", "--d", "1"]);
    assert_eq!(degenerate.status.code(), Some(4));

    let budget = run(&["emb", "--A", "chain2", "--C", "chain9", "--max-universe", "8"]);
    assert_eq!(budget.status.code(), Some(5));
    assert_eq!(report(&budget)["verdict"], "budget_exceeded");

    let zero_colors = run(&["arrow", "--C", "chain5", "--B", "chain3", "--A", "chain2", "--r", "0", "--d", "1"]);
    assert_eq!(zero_colors.status.code(), Some(2));
}

#[test]
fn verdicts_do_not_depend_on_workers() {
    let args = ["arrow", "--C", "chain5", "--B", "chain3", "--A", "chain2", "--r", "2", "--d", "1"];
    let reports: Vec<Value> = [1, 2, 4]
        .iter()
        .map(|w| {
            let w = w.to_string();
            let mut a = args.to_vec();
            a.extend(["--workers", &w]);
            report(&run(&a))
        })
        .collect();
    for r in &reports[1..] {
        assert_eq!(r["verdict"], reports[0]["verdict"]);
        assert_eq!(r["witness"], reports[0]["witness"]);
        assert_eq!(r["inputs_digest"], reports[0]["inputs_digest"]);
    }
}

#[test]
fn tsv_reports() {
    let out = run(&["aut", "--A", "k3", "--format", "tsv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(keys, ["command", "inputs_digest", "budgets", "verdict", "details", "wall_time_ms"]);
}

#[test]
fn made_structures_load_back() {
    let dir = std::env::temp_dir().join(format!("sramsey-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let made = run(&["make", "graph", "--m", "4", "--edges", "0-1,1-2,2-3,3-0"]);
    assert_eq!(made.status.code(), Some(0));
    let path = dir.join("c4.json");
    std::fs::write(&path, &made.stdout).unwrap();
    let out = run(&["aut", "--A", path.to_str().unwrap()]);
    assert_eq!(report(&out)["details"]["order"], 8);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn encodings_and_transfer() {
    let out = run(&["encode-graph-ba", "--m", "3", "--edges", "0-1,1-2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["details"]["atoms"].as_array().unwrap().len(), 5);

    let out = run(&["transfer", "--witness", "ordgraph3", "--a0", "0,1", "--b0", "0,1,2", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["details"]["identities"], 3);

    let out = run(&["indisc", "--family", "noorder3"]);
    assert_eq!(out.status.code(), Some(3));
}
