use std::process::Command;

fn run(args: &str) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_coherence-forge"))
        .args(args.split_whitespace())
        .env_remove("COHERENCE_FORGE_BOUND")
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn verdicts_map_to_exit_codes() {
    // classification exits on the weak-equivalence verdict
    assert_eq!(run("classify --map stdlib:mon_to_smon").0, 0);
    assert_eq!(run("classify --map stdlib:bin_to_mon").0, 1);
    assert_eq!(run("coherence mon_nounit --arity 4").0, 0);
    assert_eq!(
        run("coherence assoc --source tensor(tensor(tensor(1,2),3),4) --lhs alpha;alpha --rhs alpha@1;alpha;alpha@2").0,
        1
    );
    assert_eq!(run("certify --map stdlib:mon_to_smon").0, 0);
}

#[test]
fn usage_errors() {
    assert_eq!(run("enumerate").0, 3);
    assert_eq!(run("enumerate nope --arity 2").0, 3);
    assert_eq!(run("show bin --max-arity 0").0, 3);
}

#[test]
fn json_is_the_default() {
    let (code, out) = run("enumerate bin --arity 3");
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());
}

#[test]
fn bound_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_coherence-forge"))
        .args(["enumerate", "bin", "--arity", "5"])
        .env("COHERENCE_FORGE_BOUND", "5,8,16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bound"]["max_arity"], 5);
    assert_eq!(v["result"]["homCategory"]["objects"].as_array().unwrap().len(), 14);
}
