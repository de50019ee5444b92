use std::process::{Command, Output};

fn cuspform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspform"))
        .args(args)
        .env("CUSPFORM_THREADS", "2")
        .output()
        .unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn jacobi_command() {
    let o = cuspform(&["jacobi", "--a", "2,3,3", "--at", "sm=1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["dim"], 7);
    let o = cuspform(&["jacobi", "--a", "1,1,1", "--at", "sm=1"]);
    assert_eq!(json(&o)["dim"], 2);
    assert_eq!(
        cuspform(&["jacobi", "--a", "2,3,3", "--at", "sm=0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cuspform(&["jacobi", "--a", "2,3", "--at", "sm=1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        cuspform(&["jacobi", "--a", "2,3,3", "--at", "s99=1,sm=1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn residue_command() {
    let r = |h: &str| {
        json(&cuspform(&[
            "residue", "--a", "2,3,3", "--at", "sm=3", "--h", h,
        ]))["residue"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(r("x1*x2*x3"), "27");
    assert_eq!(r("1"), "0");
    assert_eq!(r("x2^2"), "0");
    assert_eq!(
        cuspform(&["residue", "--a", "2,3,3", "--at", "sm=3", "--h", "x1*("])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn verify_command() {
    let o = cuspform(&["verify", "--case", "233", "--checks", "eta"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["case"], "233");
    assert_eq!(v["seed"], 20231);
    assert_eq!(v["trials"], 5);
    assert!(v["checks"][1]["detail"]
        .as_str()
        .unwrap()
        .starts_with("[[0,0,0,0,0,0,1]"));

    let o = cuspform(&[
        "verify", "--case", "235", "--checks", "phipsi", "--trials", "3", "--seed", "7",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert_eq!(json(&o)["seed"], 7);

    assert_eq!(
        cuspform(&["verify", "--case", "999"]).status.code(),
        Some(3)
    );
    assert_eq!(
        cuspform(&["verify", "--case", "233", "--checks", "nope"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        cuspform(&["verify", "--case", "233", "--mode", "fast"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn verify_corrupted_file_fails() {
    let dir = std::env::temp_dir().join(format!("cuspform-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text: String = cuspform::cases::case_text("233")
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("checksum"))
        .map(|l| format!("{}\n", l.replace("1/18*t21^3", "1/9*t21^3")))
        .collect();
    let path = dir.join("bad.case");
    std::fs::write(&path, text).unwrap();
    let out = dir.join("report.json");
    let o = cuspform(&[
        "verify",
        "--case-file",
        path.to_str().unwrap(),
        "--checks",
        "wdvv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["checks"][0]["status"], "fail");
    assert!(v["checks"][0]["location"].is_string());
    assert!(!v["checks"][0]["residual"].as_str().unwrap().is_empty());

    let o = cuspform(&[
        "verify",
        "--case-file",
        dir.join("missing.case").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_are_byte_identical() {
    let args = [
        "verify",
        "--case",
        "234",
        "--checks",
        "wdvv,phipsi,mirror",
        "--trials",
        "2",
    ];
    let a = cuspform(&args);
    let b = cuspform(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn selftest_command() {
    let mut verdicts = Vec::new();
    for seed in 1..=5 {
        let o = cuspform(&["selftest", "--seed", &seed.to_string()]);
        verdicts.push((
            o.status.code(),
            json(&o)["checks"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c["status"].clone())
                .collect::<Vec<_>>(),
        ));
    }
    assert!(verdicts.iter().all(|v| v == &verdicts[0]));
    assert_eq!(verdicts[0].0, Some(0));
    assert_eq!(
        cuspform(&["selftest", "--corrupt-table"]).status.code(),
        Some(1)
    );
}

#[test]
fn thread_cap_must_be_positive() {
    let o = Command::new(env!("CARGO_BIN_EXE_cuspform"))
        .args(["selftest"])
        .env("CUSPFORM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}
