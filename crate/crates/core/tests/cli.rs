use std::process::{Command, Output};

use shor_audit::spectrum::{build_spectrum, FactoringInstance};

fn shor_audit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shor-audit"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_status_contract() {
    let cases: [(&[&str], i32); 9] = [
        (&["audit", "--n", "15", "--s", "8", "--reg2", "4"], 0),
        (&["audit", "--n", "15", "--s", "1", "--reg2", "4"], 2),
        (&["audit", "--n", "15", "--s", "4", "--reg2", "4"], 2),
        (&["audit", "--n", "15", "--s", "8", "--reg2", "2"], 2),
        (&["audit", "--n", "15", "--s", "8"], 1),
        (&["simulate", "--n", "9", "--x", "2"], 1),
        (&["simulate", "--n", "15", "--x", "7", "--trials", "3"], 0),
        (&["spectrum", "--n", "15", "--x", "7", "--q", "3"], 1),
        (&["sweep", "--n-list", "15", "--trials", "0"], 1),
    ];
    for (args, expected) in cases {
        let out = shor_audit(args);
        assert_eq!(out.status.code(), Some(expected), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn prime_power_error_names_the_condition() {
    let out = shor_audit(&["simulate", "--n", "9", "--x", "2"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("prime power"), "{err}");
}

#[test]
fn single_qubit_audit_report() {
    let out = shor_audit(&["audit", "--n", "15", "--s", "1", "--reg2", "4", "--x", "7"]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "non_compliant");
    assert_eq!(doc["narrative"][0], "COND_Q_GE_N2");
    let first = &doc["checks"][0];
    assert_eq!(first["condition_id"], "COND_Q_GE_N2");
    assert_eq!(first["evidence"]["q"], 2);
    assert_eq!(first["evidence"]["n_squared"], 225);
    assert_eq!(doc["bound_argument"]["applicable"], false);
    assert_eq!(doc["bound_argument"]["order_over_q"], 2.0);
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let args = ["simulate", "--n", "15", "--x", "7", "--trials", "1", "--seed", "12345"];
    let a = shor_audit(&args);
    let b = shor_audit(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());

    let args = ["simulate", "--n", "15", "--x", "7", "--trials", "20", "--format", "structured-record"];
    assert_eq!(shor_audit(&args).stdout, shor_audit(&args).stdout);
}

#[test]
fn simulate_aggregate_report() {
    let out = shor_audit(&[
        "simulate", "--n", "15", "--x", "7", "--trials", "10000", "--format", "structured-record",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["record"], "success_report");
    let rate = v["order_rate"].as_f64().unwrap();
    assert!((0.48..=0.52).contains(&rate), "{rate}");
    assert!((v["success_bound"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-11);
}

#[test]
fn trace_records_spell_out_absent_fields() {
    let out = shor_audit(&[
        "simulate", "--n", "15", "--x", "7", "--trials", "20", "--format", "delimited-table",
    ]);
    let body = stdout(&out);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.get(8), Some("recovered_d"));
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    for row in &rows {
        let c = &row[6];
        if c == "0" {
            assert_eq!(&row[8], "none");
            assert_eq!(&row[13], "bad_c_no_recovery");
        }
        if &row[11] != "none" {
            assert_eq!((&row[11], &row[12]), ("3", "5"));
        }
    }
}

#[test]
fn spectrum_table_round_trips() {
    let out = shor_audit(&["spectrum", "--n", "21", "--x", "2", "--format", "delimited-table"]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    assert!(!body.contains('\r'));

    let table = build_spectrum(&FactoringInstance::new(21, 2).unwrap(), 512).unwrap();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(body.as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["c", "marginal_probability", "signed_residue", "good_flag"]
    );
    let mut count = 0;
    for (c, row) in reader.records().enumerate() {
        let row = row.unwrap();
        let c = c as u64;
        assert_eq!(row[0].parse::<u64>().unwrap(), c);
        let printed: f64 = row[1].parse().unwrap();
        let exact = table.marginal(c);
        assert!((printed - exact).abs() <= 5e-12 * exact.abs().max(1e-300), "c = {c}: {printed} vs {exact}");
        assert_eq!(row[2].parse::<i64>().unwrap(), table.signed_residue(c));
        assert_eq!(row[3].parse::<bool>().unwrap(), table.is_good(c));
        count += 1;
    }
    assert_eq!(count, 512);

    let normalization = body
        .lines()
        .find_map(|l| l.strip_prefix("# normalization="))
        .unwrap();
    assert!((normalization.parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn spectrum_peaks_for_fifteen() {
    let out = shor_audit(&["spectrum", "--n", "15", "--x", "7", "--format", "structured-record"]);
    let body = stdout(&out);
    let mut nonzero = Vec::new();
    for line in body.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["record"] == "spectrum_row" && v["marginal_probability"].as_f64().unwrap() > 0.0 {
            assert_eq!(v["marginal_probability"], 0.25);
            nonzero.push(v["c"].as_u64().unwrap());
        }
        if v["record"] == "spectrum_summary" {
            assert_eq!(v["normalization"], 1.0);
        }
    }
    assert_eq!(nonzero, vec![0, 64, 128, 192]);
}

#[test]
fn single_qubit_spectrum_has_two_rows() {
    let out = shor_audit(&["spectrum", "--n", "15", "--x", "7", "--q", "2", "--format", "delimited-table"]);
    let body = stdout(&out);
    let rows: Vec<&str> = body.lines().skip(1).filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, vec!["0,0.5,0,true", "1,0.5,0,true"]);
}

#[test]
fn sweep_rows_meet_bounds() {
    let out = shor_audit(&["sweep", "--n-list", "15,21,35", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut rows = 0;
    for row in reader.records() {
        let row = row.unwrap();
        let bound: f64 = row[4].parse().unwrap();
        let order_rate: f64 = row[5].parse().unwrap();
        let p_min: f64 = row[7].parse().unwrap();
        let one_third: f64 = row[8].parse().unwrap();
        assert!(order_rate >= bound, "{row:?}");
        assert!(p_min > one_third, "{row:?}");
        rows += 1;
    }
    // φ(15) + φ(21) + φ(35) bases, minus x = 1 for each
    assert_eq!(rows, 7 + 11 + 23);
}

#[test]
fn sweep_over_demo_bases_factors_fifteen() {
    let out = shor_audit(&["sweep", "--n-list", "15", "--bases", "2,7,8,13", "--trials", "500"]);
    let body = stdout(&out);
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!(row[6].parse::<f64>().unwrap() > 0.0, "{row:?}");
    }
}

#[test]
fn verify_bounds_reports() {
    let out = shor_audit(&["verify-bounds", "--n", "15", "--x", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let body = stdout(&out);
    assert!(body.contains("p_min                   0.0625"), "{body}");
    assert!(body.contains("p_min > 1/(3r^2)        true"));
}
