//! Acceptance criterion 2: the stored countermodels falsify the
//! probabilistic axioms B2, B3 and B4 under Markovian semantics, verified
//! end to end through the `mc` command.

use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

fn mc(model: &str, state: &str, formula: &str) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_cml"))
        .args(["mc", &fixture(model), state, formula])
        .output()
        .expect("run cml mc");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).trim().to_string(),
    )
}

#[test]
fn criterion_2_pml_unsoundness_witnesses() {
    // B2 instance L[a,1/2]T: no transitions, so the rate lower bound fails.
    let (code, stdout) = mc("b2.json", "s0", "L[a,1/2] T");
    assert_eq!((code, stdout.as_str()), (1, "false"), "B2 countermodel");

    // B3 instance L[a,1/2]phi <-> M[a,1/2]~phi at phi = T: at the absorbing
    // state the left side fails while the vacuous upper bound holds.
    let b3 = "(L[a,1/2] T -> M[a,1/2] ~T) & (M[a,1/2] ~T -> L[a,1/2] T)";
    let (code, stdout) = mc("b3.json", "s1", b3);
    assert_eq!((code, stdout.as_str()), (1, "false"), "B3 countermodel");
    // The same instance holds at the transitioning state, so the violation
    // is genuinely about the semantics, not a parse artifact.
    let (code, _) = mc("b3.json", "s0", b3);
    assert_eq!(code, 0);

    // B4 instance with r = s = 1 (r + s > 1): both phi- and (~phi)-rates
    // from `m` are 1, so the probabilistic exclusion fails.
    let b4 = "L[a,1] L[a,1] T -> ~L[a,1] ~L[a,1] T";
    let (code, stdout) = mc("b4.json", "m", b4);
    assert_eq!((code, stdout.as_str()), (1, "false"), "B4 countermodel");

    println!("[PASS] criterion 2: B2, B3, B4 falsified by stored countermodels via mc");
}
