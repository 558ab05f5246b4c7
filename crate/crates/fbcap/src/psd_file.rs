//! PSD specs from the command line: a builtin name or a JSON file.
//!
//! Builtins are `paper` (taps `[1, 1]`, unit innovation variance) and
//! `white:LEVEL`. Anything else is read as a path to a JSON document such as
//! `{"type":"ma","coeffs":[1,1],"sigma2":1}`,
//! `{"type":"samples","values":[...]}` or `{"type":"white","level":2}`.

use std::path::Path;

use fbcap_core::PsdSpec;

use crate::CliError;

pub fn parse_psd_arg(arg: &str) -> Result<PsdSpec, CliError> {
    if arg == "paper" {
        return Ok(PsdSpec::first_order_ma());
    }
    if let Some(level) = arg.strip_prefix("white:") {
        let level: f64 = level
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("white level {level:?} is not a number")))?;
        return Ok(PsdSpec::white(level)?);
    }
    read_psd_file(Path::new(arg))
}

pub fn read_psd_file(path: &Path) -> Result<PsdSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read psd file {}: {e}", path.display())))?;
    parse_psd_json(&text).map_err(|e| match e {
        CliError::Invalid(msg) => CliError::Invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_psd_json(text: &str) -> Result<PsdSpec, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("malformed psd spec: {e}")))
}

pub fn psd_to_json(psd: &PsdSpec) -> String {
    serde_json::to_string(psd).expect("psd specs always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        assert_eq!(parse_psd_arg("paper").unwrap(), PsdSpec::first_order_ma());
        assert_eq!(
            parse_psd_arg("white:2.5").unwrap(),
            PsdSpec::white(2.5).unwrap()
        );
        assert!(matches!(
            parse_psd_arg("white:x"),
            Err(CliError::Invalid(_))
        ));
        assert!(matches!(
            parse_psd_arg("white:-1"),
            Err(CliError::Invalid(_))
        ));
    }

    #[test]
    fn json_forms() {
        let ma = parse_psd_json(r#"{"type":"ma","coeffs":[1,1],"sigma2":1}"#).unwrap();
        assert_eq!(ma, PsdSpec::first_order_ma());
        let s = parse_psd_json(r#"{"type":"samples","values":[2,1,0.5]}"#).unwrap();
        assert_eq!(s, PsdSpec::samples(vec![2.0, 1.0, 0.5]).unwrap());
        let w = parse_psd_json(r#"{"type":"white","level":3}"#).unwrap();
        assert_eq!(w, PsdSpec::white(3.0).unwrap());
    }

    #[test]
    fn rejects_bad_documents() {
        for bad in [
            "",
            "{}",
            r#"{"type":"ar","coeffs":[1]}"#,
            r#"{"type":"ma","coeffs":[],"sigma2":1}"#,
            r#"{"type":"ma","coeffs":[1,1],"sigma2":-1}"#,
            r#"{"type":"samples","values":[1,-1]}"#,
            r#"{"type":"white","level":0}"#,
        ] {
            assert!(
                matches!(parse_psd_json(bad), Err(CliError::Invalid(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn round_trip() {
        for psd in [
            PsdSpec::ma(vec![0.3, -1.7, 0.1], 0.25).unwrap(),
            PsdSpec::samples(vec![1.0, 0.1, 1.0 / 3.0]).unwrap(),
            PsdSpec::white(0.1).unwrap(),
        ] {
            assert_eq!(parse_psd_json(&psd_to_json(&psd)).unwrap(), psd);
        }
    }
}
