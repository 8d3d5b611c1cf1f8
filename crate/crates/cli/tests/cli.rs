use std::path::Path;
use std::process::{Command, Output};

fn qpcodes(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpcodes")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV document as (header -> value) lookups.
fn rows(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let (header, rows) = rows(csv);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const PARITY: &str = "# n=3 q=2\n000\n011\n101\n110\n";
const BSC: &str = "kind = matrix\nrow = 3/4 1/4\nrow = 1/4 3/4\n";

fn hamming74() -> String {
    let g = [[1, 0, 0, 0, 1, 1, 0], [0, 1, 0, 0, 1, 0, 1], [0, 0, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]];
    let mut text = String::from("# n=7 q=2\n");
    for m in 0..16u8 {
        for j in 0..7 {
            let bit: u8 = (0..4).map(|i| ((m >> i) & 1) * g[i][j]).sum::<u8>() % 2;
            text.push(char::from(b'0' + bit));
        }
        text.push('\n');
    }
    text
}

#[test]
fn bound_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpcodes(dir.path(), &["bound", "--family", "erasure_error", "--q", "2", "--eps", "0.25", "--delta", "0", "--M", "2", "--n", "3", "--psi", "eq39"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "value"), vec![0.15625]);
    assert!(stdout(&o).starts_with("# "));

    let o = qpcodes(dir.path(), &["bound", "--family", "mds", "--q", "2", "--delta", "0.25", "--M", "4", "--n", "2..3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "value"), vec![0.234375, 0.08203125]);

    let o = qpcodes(dir.path(), &["bound", "--family", "lossy_uniform", "--n", "4", "--M", "2", "--D", "1/4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "value"), vec![0.375]);
    assert!(stdout(&o).contains("# mode=rational"));
}

#[test]
fn bound_modes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bound", "--family", "erasure_error", "--q", "4", "--eps", "0.05", "--delta", "0.2", "--M", "16", "--n", "2..5", "--psi", "scan"];
    let float = stdout(&qpcodes(dir.path(), &args));
    let mut exact_args = args.to_vec();
    exact_args.extend(["--mode", "rational"]);
    let exact = stdout(&qpcodes(dir.path(), &exact_args));
    for (a, b) in column(&float, "value").iter().zip(column(&exact, "value")) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn other_bound_families() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(dir.path(), "bsc.txt", BSC);
    let o = qpcodes(dir.path(), &["bound", "--family", "metaconverse", "--channel", &ch, "--M", "16", "--n", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "value"), vec![0.5550537109375]);

    let noiseless = write(dir.path(), "id.txt", "kind = matrix\nrow = 1 0\nrow = 0 1\n");
    let o = qpcodes(dir.path(), &["bound", "--family", "jscc", "--channel", &noiseless, "--source", "1/2 3/10 1/5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "value"), vec![0.2]);

    let code = write(dir.path(), "rep.txt", "# n=4 q=2\n0000\n1111\n");
    let o = qpcodes(dir.path(), &["bound", "--family", "lossy_code", "--code", &code, "--D", "1/4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = column(&stdout(&o), "value")[0];
    assert!((0.375..=1.0).contains(&v));
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let bsc = write(dir.path(), "bsc.txt", BSC);
    let ham = write(dir.path(), "h.txt", &hamming74());
    let o = qpcodes(dir.path(), &["verify", "--code", &ham, "--channel", &bsc]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(field(&r, "verdict"), "perfect");
    assert_eq!(field(&r, "pe"), "0.5550537109375");
    assert_eq!(field(&r, "bound"), "0.5550537109375");
    assert_eq!(field(&r, "attained"), "true");

    let parity = write(dir.path(), "p.txt", PARITY);
    let o = qpcodes(dir.path(), &["verify", "--code", &parity, "--eps", "0", "--delta", "1/4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(field(&r, "verdict"), "quasi-perfect");
    assert_eq!(field(&r, "pe"), "0.08203125");
    assert_eq!(field(&r, "bound"), "0.08203125");

    let near = write(dir.path(), "d1.txt", "# n=3 q=2\n000\n001\n");
    let o = qpcodes(dir.path(), &["verify", "--code", &near, "--channel", &bsc]);
    let r = stdout(&o);
    assert_eq!(field(&r, "verdict"), "neither");
    assert!(field(&r, "pe").parse::<f64>().unwrap() > field(&r, "bound").parse::<f64>().unwrap());
    assert_eq!(field(&r, "attained"), "false");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let z = write(dir.path(), "z.txt", "kind = matrix\nrow = 1 0\nrow = 1/4 3/4\n");
    let parity = write(dir.path(), "p.txt", PARITY);
    let o = qpcodes(dir.path(), &["verify", "--code", &parity, "--channel", &z]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("symmetric"));

    let o = qpcodes(dir.path(), &["bound", "--family", "mds", "--q", "2", "--delta", "0.25", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("M"));

    let o = qpcodes(dir.path(), &["bound", "--family", "mds", "--q", "2", "--delta", "zero", "--M", "4", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delta"));

    let bad = write(dir.path(), "bad.cfg", "family = mds\nthis line is broken\n");
    let o = qpcodes(dir.path(), &["bound", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));

    let o = qpcodes(dir.path(), &["search", "--n", "6", "--M", "6", "--eps", "1/4", "--delta", "0", "--budget", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "exhaustive"), "false");

    let o = qpcodes(dir.path(), &["simulate", "--rs", "3,7,3", "--delta", "0.25", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));

    let bsc = write(dir.path(), "bsc.txt", BSC);
    let o = qpcodes(dir.path(), &["bound", "--family", "metaconverse", "--channel", &bsc, "--M", "4", "--n", "30"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));

    let o = qpcodes(dir.path(), &["nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# mds run\nfamily = mds\nq = 2\ndelta = 1/4\nM = 4\nn = 2..3\n");
    let o = qpcodes(dir.path(), &["bound", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "value"), vec![0.234375, 0.08203125]);
    let o = qpcodes(dir.path(), &["bound", "--config", &cfg, "--n", "3"]);
    assert_eq!(column(&stdout(&o), "value"), vec![0.08203125]);
}

#[test]
fn simulate_is_reproducible_and_reports_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--rs", "3,7,3", "--delta", "0.25", "--decoder", "ml", "--trials", "20000", "--seed", "3"];
    let a = qpcodes(dir.path(), &args);
    assert!(a.status.success(), "{}", stderr(&a));
    let mut more = args.to_vec();
    more.extend(["--workers", "6"]);
    let b = qpcodes(dir.path(), &more);
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["bound_name"], "mds");
    assert_eq!(json["trials"], 20000);
    assert_eq!(json["seed"], 3);
    let lo = json["ci95_lo"].as_f64().unwrap();
    let hi = json["ci95_hi"].as_f64().unwrap();
    assert!(lo <= json["estimate"].as_f64().unwrap() && json["estimate"].as_f64().unwrap() <= hi);
}

#[test]
fn search_objectives() {
    let dir = tempfile::tempdir().unwrap();
    let bec = write(dir.path(), "bec.txt", "kind = erasure_error\nq = 2\neps = 0\ndelta = 1/4\n");
    let o = qpcodes(dir.path(), &["search", "--n", "3", "--M", "4", "--channel", &bec]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(field(&r, "pe_exact"), "21/256");
    assert_eq!(field(&r, "attained"), "true");

    let o = qpcodes(dir.path(), &["search", "--objective", "lossy", "--n", "4", "--M", "2", "--D", "1/4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(field(&r, "excess_exact"), "3/8");
    assert_eq!(field(&r, "attained"), "true");
}

#[test]
fn figure_writes_data_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpcodes(dir.path(), &["figure", "fig1", "--out", "f1.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("f1.csv")).unwrap();
    let script = std::fs::read_to_string(dir.path().join("f1.gp")).unwrap();
    assert!(script.contains("'f1.csv'"));
    assert!(csv.lines().any(|l| l.starts_with("# ") && l.contains("desk scale")));
    let (header, data) = rows(&csv);
    let ch = header.iter().position(|h| h == "channel").unwrap();
    let n = header.iter().position(|h| h == "n").unwrap();
    let eq = header.iter().position(|h| h == "equal").unwrap();
    let equal_at = |name: &str| -> Vec<String> {
        data.iter().filter(|r| r[ch] == name && r[eq] == "true").map(|r| r[n].clone()).collect()
    };
    assert_eq!(equal_at("bsc"), ["2", "3", "4", "5", "6"]);
    assert_eq!(equal_at("bec"), ["2", "3"]);

    let o = qpcodes(dir.path(), &["figure", "fig3", "--n", "2..5", "--script", "plot3.gp"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("n,D,M,exact_ped,bound_uniform,qp_marker"));
    assert!(std::fs::read_to_string(dir.path().join("plot3.gp")).unwrap().contains("fig3.csv"));
}
