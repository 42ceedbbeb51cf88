//! Plain-text coefficient tables in the layout of a regression printout.

use std::fmt::Write as _;

use crate::labeling::Reaction;
use crate::mnl::{goodness_of_fit, z_tests, FittedModel, SelectionStep};
use crate::trajectory::UserKind;

/// `2838` -> `2,838`.
pub fn thousands(n: usize) -> String {
    let s = n.to_string();
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn title(kind: UserKind) -> &'static str {
    match kind {
        UserKind::Vehicle => "Vehicle",
        UserKind::Pedestrian => "Pedestrian",
    }
}

/// Both alternatives side by side: estimate, standard error, z and p per
/// term, then the deviance and goodness-of-fit footer.
pub fn coefficient_table(model: &FittedModel, caption: &str) -> String {
    let kind = model.spec.user_kind;
    let tests = z_tests(model);
    let q = model.spec.predictors.len() + 1;
    let mut s = String::new();
    writeln!(s, "{} decisional model, {caption}. Basemodel=No reaction", title(kind)).unwrap();
    let head = |r: Reaction| format!("No reaction to {} ({})", r.name(), r.code(kind));
    writeln!(
        s,
        "{:<14}| {:<38}| {}",
        "",
        head(Reaction::Prudent),
        head(Reaction::Aggressive)
    )
    .unwrap();
    let cols = format!("{:>9} {:>9} {:>8} {:>8} ", "beta", "Std.err.", "Z-value", "Pr");
    writeln!(s, "{:<14}|{cols}|{cols}", "Variable").unwrap();
    writeln!(s, "{}", "-".repeat(14 + 2 * 39 + 2)).unwrap();
    for i in 0..q {
        let (a, b) = (&tests[i], &tests[q + i]);
        let cell = |t: &crate::mnl::CoefficientTest| {
            format!("{:>9.3} {:>9.3} {:>8.2} {:>8.3} ", t.estimate, t.std_error, t.z, t.p)
        };
        writeln!(s, "{:<14}|{}|{}", a.term.to_string(), cell(a), cell(b)).unwrap();
    }
    writeln!(s, "{}", "-".repeat(14 + 2 * 39 + 2)).unwrap();
    let g = goodness_of_fit(model);
    writeln!(
        s,
        "Number of observations = {}; Dev = {:.2}; Constant-only model: Dev. = {:.2}",
        thousands(model.n_obs),
        model.deviance,
        model.null_deviance
    )
    .unwrap();
    writeln!(
        s,
        "Goodness of Fit: chi2 = {:.2} with d.f.={}. Prob >= chi2 = {:.4} (likelihood ratio vs constant-only model)",
        g.chi2, g.df, g.p
    )
    .unwrap();
    writeln!(s, "Converged after {} iterations", model.iterations).unwrap();
    s
}

/// Variables dropped by backward elimination, in order.
pub fn selection_table(full: &FittedModel, steps: &[SelectionStep], min_ratio: f64) -> String {
    let mut s = String::new();
    let full_chi2 = goodness_of_fit(full).chi2;
    writeln!(
        s,
        "Backward selection (keep while chi2 >= {min_ratio} x full-model chi2 = {:.2})",
        min_ratio * full_chi2
    )
    .unwrap();
    writeln!(s, "{:<6}{:<14}{:>12}{:>12}", "step", "dropped", "Dev", "chi2").unwrap();
    writeln!(s, "{:<6}{:<14}{:>12.2}{:>12.2}", 0, "-", full.deviance, full_chi2).unwrap();
    for (i, st) in steps.iter().enumerate() {
        writeln!(
            s,
            "{:<6}{:<14}{:>12.2}{:>12.2}",
            i + 1,
            st.dropped.name(),
            st.deviance,
            st.chi2
        )
        .unwrap();
    }
    s
}
