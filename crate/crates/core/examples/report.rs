//! Drive the command-line front end from code: run two suites and collect
//! their JSON reports.

use sobolev_lab::cli::run;

fn main() {
    for args in [
        vec![
            "sobolev-lab",
            "verify",
            "identities",
            "--format",
            "json",
            "--no-timestamp",
        ],
        vec![
            "sobolev-lab",
            "verify",
            "alpha-sweep",
            "--n",
            "2",
            "--m",
            "2",
            "--format",
            "json",
            "--no-timestamp",
        ],
    ] {
        let out = run(args.clone());
        let report: serde_json::Value = serde_json::from_str(&out.stdout).expect("json report");
        let checks = report["checks"].as_array().map_or(0, Vec::len);
        println!(
            "{:<24} exit {}  passed {}  checks {}",
            report["config"]["command"].as_str().unwrap_or("?"),
            out.code,
            report["passed"],
            checks
        );
    }

    // Table output is what the binary prints.
    print!(
        "{}",
        run([
            "sobolev-lab",
            "constants",
            "--n",
            "3",
            "--m",
            "4",
            "--p",
            "1.5"
        ])
        .stdout
    );
}
