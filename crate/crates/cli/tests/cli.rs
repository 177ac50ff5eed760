use std::process::{Command, Output};

const RATE_HEADER: &str = "length_km,T,eps_tm,beta,alpha_opt,g_opt,p_succ,i_ab_bits,chi_eb_bits,key_rate,baseline_noqs_dm,baseline_gg02,plob_bound";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qs-cvqkd")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(line: &str, name: &str) -> f64 {
    let idx = RATE_HEADER.split(',').position(|c| c == name).unwrap();
    line.split(',').nth(idx).unwrap().parse().unwrap()
}

#[test]
fn rate_prints_header_and_one_row() {
    let out = run(&["rate", "--length-km", "30", "--eps-tm", "0.01", "--alpha", "0.5", "--gain", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, [RATE_HEADER, lines[1]]);
    assert_eq!(column(lines[1], "alpha_opt"), 0.5);
    assert_eq!(column(lines[1], "g_opt"), 2.0);
    assert!(column(lines[1], "key_rate") >= 0.0);
    // ten significant digits
    assert!(lines[1].split(',').all(|f| f.split('e').next().unwrap().trim_start_matches('-').len() == 11));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["rate", "--length-km", "30", "--alpha", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["rate", "--length-km", "30", "--alpha", "0.5", "--gain", "0.5"]).status.code(), Some(3));
    assert_eq!(run(&["rate", "--length-km", "30", "--alpha", "-0.5", "--gain", "2"]).status.code(), Some(3));
    assert_eq!(run(&["optimize", "--length-km", "10", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(run(&["optimize", "--length-km", "10", "--protocol", "correlations"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--length-km", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", "/nonexistent/qs.cfg"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# baseline only\nprotocol = gg02\nlength-km = 10\neps-tm = 0.01\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--length-km", "20,40"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lengths: Vec<f64> = text.lines().skip(1).map(|l| column(l, "length_km")).collect();
    assert_eq!(lengths, vec![20.0, 40.0]);
    assert!(text.lines().skip(1).all(|l| column(l, "eps_tm") == 0.01));

    std::fs::write(&cfg, "lenght-km = 10\n").unwrap();
    assert_eq!(run(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sweep_is_byte_stable_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("s{i}.csv"))).collect();
    for p in &paths {
        let out = run(&["sweep", "--length-km", "20:60:40", "--eps-tm", "0,0.01", "--grid-nodes", "1001", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 5);
    for line in text.lines().skip(1) {
        let k = column(line, "key_rate");
        let plob = column(line, "plob_bound");
        assert!(k >= 0.0 && k <= plob);
    }
}

#[test]
fn empty_length_list_gives_header_only() {
    let out = run(&["sweep", "--length-km", "", "--protocol", "plob"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), format!("{RATE_HEADER}\n"));
}

#[test]
fn json_output_uses_csv_names() {
    let out = run(&["optimize", "--length-km", "50", "--protocol", "gg02", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.trim_start().starts_with('['));
    for key in RATE_HEADER.split(',') {
        assert!(text.contains(&format!("\"{key}\":")), "missing {key}");
    }
}

#[test]
fn correlations_cover_admissible_range() {
    let out = run(&["correlations", "--gain", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "v_a,z_g,z_g_nla,z4,z4_qs");
    assert_eq!(lines.len(), 51);
    assert!(!text.contains("NaN"));
}

#[test]
fn oracle_check_single_point_passes() {
    let out = run(&["oracle-check", "--alpha", "0.6", "--gain", "1.5", "--length-km", "25", "--eps-tm", "0.03", "--fock-cutoff", "25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("alpha,T,eps_tm,g,quantity,closed_form,oracle,abs_diff,tolerance,pass\n"));
    assert_eq!(text.lines().count(), 1 + 6 + 4 * 5);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
