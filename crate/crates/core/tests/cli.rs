use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

fn ssrchain(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ssrchain"))
        .args(args)
        .env_remove("SSRCHAIN_JOBS")
        .output()
        .expect("spawn ssrchain");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Data rows of a CSV with `#` metadata, keyed by column name.
fn rows(text: &str) -> Vec<HashMap<String, String>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn data_section(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn poles_single_emitter() {
    for sep in ["0.1", "1", "10"] {
        let (code, out, _) = ssrchain(&["poles", "--n", "1", "--sep", sep]);
        assert_eq!(code, 0);
        let r = rows(&out);
        assert_eq!(r.len(), 1);
        assert!((num(&r[0], "re_gamma") - 1.0).abs() < 1e-10);
        assert!(num(&r[0], "im_gamma").abs() < 1e-10);
    }
}

#[test]
fn poles_rejects_bad_input() {
    assert_eq!(ssrchain(&["poles", "--n", "0", "--sep", "0.3"]).0, 2);
    assert_eq!(ssrchain(&["poles", "--n", "2", "--sep", "-1"]).0, 2);
    assert_eq!(
        ssrchain(&["poles", "--n", "2", "--sep", "0.3", "--mode", "bogus"]).0,
        2
    );
    assert_eq!(
        ssrchain(&["poles", "--n", "2", "--sep", "0.3", "--re-min", "1", "--re-max", "-1"]).0,
        2
    );
    assert_eq!(ssrchain(&["--bogus"]).0, 2);
}

#[test]
fn metadata_echoes_arguments() {
    let (code, out, _) = ssrchain(&[
        "poles", "--n", "3", "--sep", "0.25", "--mode", "general", "--omega", "40",
    ]);
    assert_eq!(code, 0);
    for line in [
        "# command = poles",
        "# n = 3",
        "# sep = 0.25",
        "# mode = general",
        "# omega = 40.0",
    ] {
        assert!(out.lines().any(|l| l == line), "missing {line:?} in\n{out}");
    }
    assert!(out.lines().any(|l| l.starts_with("# units")));
}

#[test]
fn ssr_reference_values() {
    let (code, out, _) = ssrchain(&["ssr", "--n", "2"]);
    assert_eq!(code, 0);
    let r = &rows(&out)[0];
    assert!((num(r, "re_gamma_ssr") - 4.59).abs() < 0.02);
    assert!((num(r, "l_critical") - 0.56).abs() < 0.01);
    assert_eq!(r["coalescence"], "true");

    let (_, out, _) = ssrchain(&["ssr", "--n", "3"]);
    assert!(num(&rows(&out)[0], "re_gamma_ssr") > 3.0);

    assert_eq!(ssrchain(&["ssr", "--n", "1"]).0, 2);
    assert_eq!(ssrchain(&["ssr", "--n", "3", "--bracket", "0.5"]).0, 2);
}

#[test]
fn json_output_wraps_meta_and_data() {
    let (code, out, _) = ssrchain(&["ssr", "--n", "2", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["meta"]["command"], "ssr");
    assert_eq!(v["meta"]["args"]["n"], 2);
    let g = v["data"][0]["re_gamma_ssr"].as_f64().unwrap();
    assert!((g - 4.59112151921).abs() < 1e-10);
}

#[test]
fn sweep_small_range_increasing() {
    let (code, out, _) = ssrchain(&["sweep", "--n-min", "2", "--n-max", "10", "--jobs", "2"]);
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 9);
    assert!(r.iter().all(|row| row["status"] == "ok"));
    let g: Vec<f64> = r.iter().map(|row| num(row, "re_gamma_ssr")).collect();
    assert!(g.windows(2).all(|w| w[1] > w[0]), "{g:?}");
    assert_eq!(ssrchain(&["sweep", "--n-min", "5", "--n-max", "2"]).0, 2);
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let args = |jobs: &'static str| {
        [
            "sweep", "--n-min", "3", "--n-max", "9", "--n-step", "2", "--jobs", jobs,
        ]
    };
    let (_, one, _) = ssrchain(&args("1"));
    let (_, four, _) = ssrchain(&args("4"));
    assert_eq!(data_section(&one), data_section(&four));
    let env = Command::new(env!("CARGO_BIN_EXE_ssrchain"))
        .args(args("1"))
        .env("SSRCHAIN_JOBS", "3")
        .output()
        .unwrap();
    let env_out = String::from_utf8(env.stdout).unwrap();
    assert_eq!(data_section(&env_out), data_section(&one));
    assert!(env_out.lines().any(|l| l == "# jobs = 3"));
}

#[test]
fn sweep_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let csv_s = csv.to_str().unwrap();
    let (code, _, _) = ssrchain(&[
        "sweep", "--n-min", "20", "--n-max", "100", "--n-step", "20", "-o", csv_s,
    ]);
    assert_eq!(code, 0);
    let r = rows(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(r.len(), 5);
    for row in &r {
        let per_n = num(row, "re_gamma_ssr") / num(row, "n_qubits");
        assert!((2.25..=2.30).contains(&per_n), "{per_n}");
    }
    let (code, out, err) = ssrchain(&["fit", "--input", csv_s]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let alpha = v["data"]["alpha"].as_f64().unwrap();
    assert!((alpha - 2.277).abs() < 0.005 * 2.277);
    assert!(v["data"]["beta_stderr"].is_number());
    assert_eq!(v["data"]["points"].as_array().unwrap().len(), 5);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn fit_synthetic_exact_law() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("# synthetic\nn_qubits,l_critical,re_gamma_ssr,im_gamma_ssr,coalescence,residual,evaluations\n");
    for n in [20usize, 40, 60, 80] {
        text += &format!(
            "{n},{},{},0,true,0,0\n",
            1.75 / (n * n) as f64,
            2.25 * n as f64
        );
    }
    let path = write(dir.path(), "exact.csv", &text);
    let (code, out, _) = ssrchain(&["fit", "--input", &path]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for p in v["data"]["points"].as_array().unwrap() {
        assert!(p["gamma_deviation"].as_f64().unwrap() < 1e-12);
        assert!(p["l_deviation"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn fit_reports_malformed_line() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        "# x\nn_qubits,l_critical,re_gamma_ssr,im_gamma_ssr,coalescence,residual,evaluations\n\
                20,0.004,45.5,0,true,0,0\n30,oops,68.3,0,true,0,0\n";
    let path = write(dir.path(), "bad.csv", text);
    let (code, _, err) = ssrchain(&["fit", "--input", &path]);
    assert_eq!(code, 2);
    assert!(err.contains(":4"), "{err}");
    assert_eq!(ssrchain(&["fit", "--input", "/nonexistent/file.csv"]).0, 2);
}

#[test]
fn asym_critical_and_contour() {
    let (code, out, _) = ssrchain(&["asym", "--critical"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let a = v["data"]["alpha_c"].as_f64().unwrap();
    let b = v["data"]["beta_c"].as_f64().unwrap();
    assert!((a * b - 4.0).abs() < 1e-10);

    let (code, out, _) = ssrchain(&[
        "asym",
        "--contour",
        "--beta-min",
        "0.1",
        "--beta-max",
        "2.5",
        "--steps",
        "200",
    ]);
    assert_eq!(code, 0);
    let bmax = rows(&out)
        .iter()
        .map(|r| num(r, "beta"))
        .fold(0.0, f64::max);
    assert!((bmax - b).abs() < 1e-6, "{bmax} vs {b}");
    assert_eq!(ssrchain(&["asym", "--contour", "--steps", "1"]).0, 2);
    assert_eq!(ssrchain(&["asym"]).0, 2);
}

#[test]
fn fieldmap_minimum_marks_pole() {
    let (code, out, _) = ssrchain(&["poles", "--n", "2", "--sep", "0.56"]);
    assert_eq!(code, 0);
    let poles: Vec<(f64, f64)> = rows(&out)
        .iter()
        .filter(|r| r["classification"] != "zero-mode")
        .map(|r| (num(r, "re_delta"), num(r, "im_delta")))
        .collect();
    let (code, out, _) = ssrchain(&[
        "fieldmap",
        "--n",
        "2",
        "--sep",
        "0.56",
        "--re-range",
        "-0.5,0.5",
        "--im-range",
        "-2.8,-1.8",
        "--resolution",
        "101",
    ]);
    assert_eq!(code, 0);
    let grid = rows(&out);
    assert_eq!(grid.len(), 101 * 101);
    let best = grid
        .iter()
        .min_by(|a, b| num(a, "log10_abs_f").total_cmp(&num(b, "log10_abs_f")))
        .unwrap();
    let (x, y) = (num(best, "re_delta"), num(best, "im_delta"));
    let cell = 1.0 / 100.0;
    assert!(
        poles
            .iter()
            .any(|(pr, pi)| (pr - x).abs() <= cell && (pi - y).abs() <= cell),
        "{x},{y} vs {poles:?}"
    );

    let (code, out, _) = ssrchain(&[
        "fieldmap",
        "--n",
        "1",
        "--sep",
        "3",
        "--re-range",
        "-0.2,0.2",
        "--im-range",
        "-0.7,-0.3",
        "--resolution",
        "41",
    ]);
    assert_eq!(code, 0);
    let best = rows(&out)
        .into_iter()
        .min_by(|a, b| num(a, "log10_abs_f").total_cmp(&num(b, "log10_abs_f")))
        .unwrap();
    assert!(num(&best, "re_delta").abs() < 1e-12 && (num(&best, "im_delta") + 0.5).abs() < 1e-12);

    assert_eq!(
        ssrchain(&[
            "fieldmap",
            "--n",
            "2",
            "--sep",
            "0.5",
            "--re-range",
            "1,1",
            "--im-range",
            "-1,0"
        ])
        .0,
        2
    );
    assert_eq!(
        ssrchain(&[
            "fieldmap",
            "--n",
            "2",
            "--sep",
            "0.5",
            "--re-range",
            "-1,1",
            "--im-range",
            "-1,0",
            "--resolution",
            "5000"
        ])
        .0,
        2
    );
}

#[test]
fn help_documents_units() {
    let (code, out, _) = ssrchain(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("γ₀"));
}
