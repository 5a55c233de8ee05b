mod common;

use std::path::Path;
use std::process::Command;

use kobol_pricer::config::{
    parse_market, parse_model, quote_from_record, render_quote, OutputFormat,
};
use kobol_pricer::pricer::{price_basket_call, PriceCtrl, TermBudget};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kobol-pricer"))
}

fn repo_config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn golden_price_run() {
    let out = bin()
        .args([
            "price",
            "--model",
            &repo_config("model_single.toml"),
            "--market",
            &repo_config("market_single.toml"),
            "--eps-alias",
            "1e-8",
            "--radius",
            "22026.465794806718",
            "--format",
            "delimited",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("value,"));
    let value: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    // golden value pinned from the quadrature reference
    assert!((value - 11.48301697062286).abs() < 1e-4);
}

#[test]
fn missing_file_is_exit_1() {
    let out = bin()
        .args([
            "price",
            "--model",
            "/nonexistent/model.toml",
            "--market",
            &repo_config("market_single.toml"),
            "--terms",
            "100",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
}

#[test]
fn shallow_tempering_is_exit_2_naming_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.toml");
    std::fs::write(
        &model,
        "[[asset]]\nnu = 0.5\nc_plus = 1.0\nc_minus = 1.0\nlambda_plus = 8.0\nlambda_minus = -0.5\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "price",
            "--model",
            model.to_str().unwrap(),
            "--market",
            &repo_config("market_single.toml"),
            "--terms",
            "100",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lambda_minus") || err.contains("a_-"), "{err}");
}

#[test]
fn index_set_cap_is_exit_3() {
    let out = bin()
        .args([
            "indexset",
            "--model",
            &repo_config("model_spread.toml"),
            "--maturity",
            "0.5",
            "--radius",
            "1e200",
            "--period",
            "512",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_quick_passes() {
    let out = bin().args(["validate", "--scope", "quick"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("check,tolerance,error,status"));
    assert!(text.contains("pass"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn density_table_has_header_and_grid() {
    let out = bin()
        .args([
            "density",
            "--model",
            &repo_config("model_single.toml"),
            "--maturity",
            "0.5",
            "--eps-alias",
            "1e-6",
            "--radius",
            "1e4",
            "--grid",
            "11",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# P="));
    assert!(text.contains("L_p_alias_bound="));
    assert_eq!(text.lines().count(), 2 + 11);
}

#[test]
fn indexset_export_reimports() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.csv");
    let out = bin()
        .args([
            "indexset",
            "--model",
            &repo_config("model_single.toml"),
            "--maturity",
            "0.5",
            "--terms",
            "50",
            "--out",
            path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    // first line is the diagnostics header, then the export block
    let export = text.splitn(2, '\n').nth(1).unwrap();
    let set = kobol_pricer::IndexSet::import(export).unwrap();
    assert!(set.len() > 10);
    assert!(set.contains(&[0]));
}

#[test]
fn config_parsing_round_trip() {
    let model = parse_model(
        "strip_shrink = 0.8\n\n[[asset]]\nnu = 0.5\nc_plus = 1.0\nc_minus = 2.0\nlambda_plus = 6.0\nlambda_minus = -5.0\nmu = 0.1\n",
    )
    .unwrap();
    assert_eq!(model.n, 1);
    assert!((model.idio[0].c_minus - 2.0).abs() < 1e-15);
    assert!((model.strip_shrink - 0.8).abs() < 1e-15);

    let market = parse_market("spot = [100.0, 40.0]\nstrike = 50.0\nrate = 0.03\nmaturity = 0.5\n").unwrap();
    assert_eq!(market.spot.len(), 2);

    assert!(parse_model("[[asset]]\nnu = 5.0\nc_plus = 1\nc_minus = 1\nlambda_plus = 8\nlambda_minus = -4\n").is_err());
    assert!(parse_market("strike = 50.0\n").is_err());
}

#[test]
fn quote_record_round_trips_to_equal_values() {
    let model = common::pinned_model();
    let market = common::market_1d(100.0);
    let ctrl = PriceCtrl::new(1e-6, TermBudget::Terms(30.0)).unwrap();
    let quote = price_basket_call(&model, &market, &ctrl).unwrap();
    let record = render_quote(&quote, OutputFormat::Record).unwrap();
    let back = quote_from_record(&record).unwrap();
    assert_eq!(quote, back);
}

#[test]
fn delimited_output_uses_12_significant_digits() {
    let model = common::pinned_model();
    let market = common::market_1d(100.0);
    let ctrl = PriceCtrl::new(1e-6, TermBudget::Terms(30.0)).unwrap();
    let quote = price_basket_call(&model, &market, &ctrl).unwrap();
    let text = render_quote(&quote, OutputFormat::Delimited).unwrap();
    let value_field = text.lines().nth(1).unwrap().split(',').next().unwrap().to_string();
    // mantissa carries 12 significant digits: d.ddddddddddd
    let mantissa = value_field.split('e').next().unwrap();
    let digits: usize = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 12, "{value_field}");
    let parsed: f64 = value_field.parse().unwrap();
    assert!((parsed - quote.value).abs() < 1e-10 * quote.value.abs());
}
