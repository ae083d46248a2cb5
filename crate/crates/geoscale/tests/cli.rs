//! End-to-end runs of the command line through `run_with`.

use std::fs;
use std::path::Path;

use geoscale::cli::run_with;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(std::iter::once("geoscale").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn lines_geojson(lines: &[(&[(f64, f64)], Option<&str>)]) -> String {
    let features: Vec<Value> = lines
        .iter()
        .map(|(pts, name)| {
            let coords: Vec<[f64; 2]> = pts.iter().map(|p| [p.0, p.1]).collect();
            let props = match name {
                Some(n) => serde_json::json!({ "name": n }),
                None => serde_json::json!({}),
            };
            serde_json::json!({"type": "Feature", "properties": props,
                "geometry": {"type": "LineString", "coordinates": coords}})
        })
        .collect();
    serde_json::json!({"type": "FeatureCollection", "features": features}).to_string()
}

fn grid_geojson(n: usize) -> String {
    let m = n as f64;
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    for i in 0..=n {
        lines.push(vec![(0.0, i as f64), (m, i as f64)]);
        lines.push(vec![(i as f64, 0.0), (i as f64, m)]);
    }
    let refs: Vec<(&[(f64, f64)], Option<&str>)> = lines.iter().map(|l| (l.as_slice(), None)).collect();
    lines_geojson(&refs)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn koch_json_has_65_vertices() {
    let v = json(&["koch", "--iterations", "3", "--json"]);
    assert_eq!(v["vertex_count"], 65);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 65);
    let len = v["length"].as_f64().unwrap();
    assert!((len - 64.0 / 27.0).abs() < 1e-12);
    // JSON carries the library value exactly
    let curve = geoscale_core::fractal::koch_curve(&geoscale_core::fractal::KochSpec::new(3)).unwrap();
    assert_eq!(len, curve.length());
}

#[test]
fn maup_demo_prints_documented_rates() {
    let (code, out, _) = run(&["maup", "demo"]);
    assert_eq!(code, 0);
    let doc = &out[out.find("documented groupings").unwrap()..];
    let pcts: Vec<&str> = doc.lines().skip(1).map(|l| l.split_whitespace().last().unwrap()).collect();
    assert_eq!(pcts, vec!["10%", "8%", "13%", "15%"]);

    let v = json(&["maup", "demo", "--json"]);
    let got: Vec<i64> = v["groupings"].as_array().unwrap().iter().map(|g| g["percent"].as_i64().unwrap()).collect();
    assert_eq!(got, vec![10, 8, 13, 15]);
}

#[test]
fn divider_with_two_yardsticks_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "l.geojson", &lines_geojson(&[(&[(0.0, 0.0), (1.0, 0.3), (2.0, 0.0)], None)]));
    let (code, _, err) = run(&["dimension", &f, "--method", "divider", "--scales", "0.5,0.25"]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = run(&["dimension", &f, "--method", "divider", "--scales", "0.5,0.25,0.125"]);
    assert_eq!(code, 0);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.geojson", "{\"type\": \"LineString\",");
    let (code, _, err) = run(&["length", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("line 1"), "{err}");
    let pt = write(dir.path(), "pt.geojson", r#"{"type":"Point","coordinates":[0,0]}"#);
    let (code, _, err) = run(&["length", &pt]);
    assert_eq!(code, 2);
    assert!(err.contains("unsupported geometry: Point"));
    let (code, _, _) = run(&["htb", dir.path().join("missing.csv").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["dimension", &pt, "--method", "fourier"]);
    assert_eq!(code, 2);
}

#[test]
fn boxcount_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(
        dir.path(),
        "sq.geojson",
        r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}"#,
    );
    let v = json(&["dimension", &sq, "--method", "boxcount", "--scales", "0.5,0.25,0.125,0.0625", "--json"]);
    let d = v["fit"]["dimension"].as_f64().unwrap();
    assert!((d - 2.0).abs() < 1e-9);
}

#[test]
fn area_with_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let sq = write(
        dir.path(),
        "sq.geojson",
        r#"{"type":"Polygon","coordinates":[[[0.25,0.25],[1.25,0.25],[1.25,1.25],[0.25,1.25],[0.25,0.25]]]}"#,
    );
    let v = json(&["area", &sq, "--cells", "0.5", "--anchor", "0.25,0.25", "--json"]);
    assert_eq!(v["rasterized"][0]["area"], 2.25);
    let v = json(&["area", &sq, "--cells", "0.5", "--json"]);
    assert_eq!(v["rasterized"][0]["area"], 1.0);
}

#[test]
fn htb_and_htindex() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (1..=1000).map(|k| (1.0 / k as f64).to_string()).collect();
    let f = write(dir.path(), "z.csv", &format!("# zipf\n{}\n", values.join("\n")));
    let v = json(&["htb", &f, "--json"]);
    assert_eq!(v["ht_index"], 5);
    assert_eq!(v["head_sizes"][0], 133);
    let (code, out, _) = run(&["htindex", &f]);
    assert_eq!((code, out.trim()), (0, "5"));
    let cfg = write(dir.path(), "c.cfg", "head-limit = 0.1\n");
    let strict = json(&["htb", &f, "--config", &cfg, "--json"]);
    assert_eq!(strict["head_limit"], 0.1);
    let flag_wins = json(&["htb", &f, "--config", &cfg, "--head-limit", "0.4", "--json"]);
    assert_eq!(flag_wins["head_limit"], 0.4);
}

#[test]
fn slope_from_ascii_grid() {
    let dir = tempfile::tempdir().unwrap();
    let t = 30f64.to_radians().tan();
    let mut rows = String::new();
    for _ in 0..9 {
        let r: Vec<String> = (0..9).map(|c| ((c as f64 + 0.5) * t).to_string()).collect();
        rows += &format!("{}\n", r.join(" "));
    }
    let dem = write(dir.path(), "p.asc", &format!("ncols 9\nnrows 9\nxllcorner 0\nyllcorner 0\ncellsize 1\n{rows}"));
    let prefix = dir.path().join("out_").to_str().unwrap().to_string();
    let v = json(&["slope", &dem, "--coarsen", "2", "--out-prefix", &prefix, "--json"]);
    for level in v["levels"].as_array().unwrap() {
        assert!((level["min"].as_f64().unwrap() - 30.0).abs() < 1e-9);
        assert!((level["max"].as_f64().unwrap() - 30.0).abs() < 1e-9);
    }
    for f in ["slope1.asc", "hist1.csv", "hist1.svg", "slope2.asc", "hist2.csv", "hist2.svg"] {
        assert!(Path::new(&format!("{prefix}{f}")).exists(), "{f}");
    }
    let hist = fs::read_to_string(format!("{prefix}hist1.csv")).unwrap();
    assert_eq!(hist.lines().last().unwrap(), "30,49");
}

#[test]
fn synthetic_slope_is_reproducible() {
    let args = ["slope", "--synthetic", "5", "--seed", "9", "--coarsen", "2,4", "--json"];
    assert_eq!(run(&args).1, run(&args).1);
    let other = ["slope", "--synthetic", "5", "--seed", "10", "--json"];
    assert_ne!(run(&args).1, run(&other).1);
}

#[test]
fn maup_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let cells = write(dir.path(), "cells.csv", "col,row,numerator,denominator\n0,0,1,10\n1,0,3,10\n0,1,2,10\n1,1,6,10\n");
    let fine = write(dir.path(), "fine.csv", "0,0,a\n1,0,b\n0,1,c\n1,1,d\n");
    let halves = write(dir.path(), "halves.csv", "0,0,W\n0,1,W\n1,0,E\n1,1,E\n");
    let rows = write(dir.path(), "rows.csv", "0,0,N\n1,0,N\n0,1,S\n1,1,S\n");
    let v = json(&["maup", &cells, "--zones", &format!("{fine},{halves}"), "--nested", "--json"]);
    let scale = v["scale_effect"].as_array().unwrap();
    assert_eq!(scale[0]["spread"], 50.0);
    assert_eq!(scale[1]["spread"], 30.0);
    let v = json(&["maup", &cells, "--zones", &format!("{halves},{rows}"), "--json"]);
    assert_eq!(v["zoning_effect"]["summaries"][1]["zoning"], "rows");
    // rows are not nested in halves
    let (code, _, _) = run(&["maup", &cells, "--zones", &format!("{rows},{halves}"), "--nested"]);
    assert_eq!(code, 2);
}

#[test]
fn streets_plus_sign() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "plus.geojson",
        &lines_geojson(&[(&[(-1.0, 0.0), (1.0, 0.0)], Some("A")), (&[(0.0, -1.0), (0.0, 1.0)], Some("B"))]),
    );
    let graph = dir.path().join("g.json");
    let out = dir.path().join("s.geojson");
    let v = json(&["streets", &f, "--graph", graph.to_str().unwrap(), "--out", out.to_str().unwrap(), "--json"]);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
    assert_eq!(v["links"], serde_json::json!([[0, 1]]));
    let from_file: Value = serde_json::from_str(&fs::read_to_string(graph).unwrap()).unwrap();
    assert_eq!(from_file, v);
    let streets = geoscale::features::parse_geojson(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(streets.len(), 2);
    assert_eq!(streets[0].properties["degree"], "1");
    let (code, _, _) = run(&["streets", &f, "--strategy", "longest"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["streets", &f, "--angle", "120"]);
    assert_eq!(code, 2);
}

#[test]
fn blocks_border_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "grid.geojson", &grid_geojson(3));
    let out = dir.path().join("b.geojson");
    let v = json(&["blocks", &f, "--border-numbers", "--out", out.to_str().unwrap(), "--json"]);
    let numbers: Vec<i64> = v["blocks"].as_array().unwrap().iter().map(|b| b["border_number"].as_i64().unwrap()).collect();
    assert_eq!(numbers.iter().filter(|&&n| n == 1).count(), 8);
    assert_eq!(numbers.iter().filter(|&&n| n == 2).count(), 1);
    let center = v["topological_center"][0].as_u64().unwrap() as usize;
    assert_eq!(numbers[center], 2);
    let written = geoscale::features::parse_geojson(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(written.len(), 9);
    assert_eq!(written[center].properties["border_number"], "2");
}

#[test]
fn cities_and_hotspots() {
    let dir = tempfile::tempdir().unwrap();
    let xs = [0.0, 1.0, 2.0, 3.0, 13.0, 23.0];
    let mut lines: Vec<Vec<(f64, f64)>> = vec![vec![(0.0, 0.0), (23.0, 0.0)], vec![(0.0, 1.0), (23.0, 1.0)]];
    lines.extend(xs.iter().map(|&x| vec![(x, 0.0), (x, 1.0)]));
    let refs: Vec<(&[(f64, f64)], Option<&str>)> = lines.iter().map(|l| (l.as_slice(), None)).collect();
    let f = write(dir.path(), "strip.geojson", &lines_geojson(&refs));
    let out = dir.path().join("c.geojson");
    let v = json(&["cities", &f, "--hotspots", "--out", out.to_str().unwrap(), "--json"]);
    assert_eq!(v["cities"].as_array().unwrap().len(), 1);
    assert_eq!(v["cities"][0]["blocks"].as_array().unwrap().len(), 3);
    assert!(fs::read_to_string(out).unwrap().contains("MultiPolygon"));
    // a single block is too few for a mean
    let one = write(dir.path(), "one.geojson", &grid_geojson(1));
    assert_eq!(run(&["cities", &one]).0, 3);
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "grid.geojson", &grid_geojson(4));
    for args in [
        vec!["streets", f.as_str(), "--json"],
        vec!["blocks", f.as_str(), "--border-numbers", "--json"],
        vec!["koch", "-n", "4", "--json"],
        vec!["maup", "demo"],
    ] {
        assert_eq!(run(&args), run(&args));
    }
}
