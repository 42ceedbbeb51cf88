//! Confusion matrices and misclassification rates, and the calibrated
//! models' choice probabilities for a few situations.
//!
//! cargo run --example evaluate

use conflict_choice::evaluation::ConfusionMatrix;
use conflict_choice::mnl::{predict_proba, reference};
use conflict_choice::predictors::PredictorVector;
use conflict_choice::trajectory::UserKind;

fn main() -> conflict_choice::Result<()> {
    // Rows observed NRV/DEC/ACC, columns predicted.
    let vehicle = ConfusionMatrix::from_counts([[125, 57, 14], [22, 420, 22], [21, 55, 92]]);
    println!(
        "vehicle matrix: {} rows, {} correct, misclassification {:.3}",
        vehicle.total(),
        vehicle.correct(),
        vehicle.misclassification_rate()?
    );

    let base = PredictorVector {
        min_dist: 1.5,
        time_min_dist: 3.0,
        act_dist: 20.0,
        ort_dist: 4.0,
        time_delay_xp: 0.5,
        speed_veh: 6.0,
        acc_veh: 0.0,
        speed_ped: 1.3,
        acc_ped: 0.0,
        cp_conf_nr: 1,
        pc_conf_nr: 1,
        car_ahead: false,
    };
    for (what, x) in [
        ("steady approach", base),
        ("vehicle braking", PredictorVector { acc_veh: -1.5, ..base }),
        ("vehicle speeding up", PredictorVector { acc_veh: 1.5, ..base }),
    ] {
        for kind in [UserKind::Vehicle, UserKind::Pedestrian] {
            let p = predict_proba(&reference::model(kind), &x)?;
            println!(
                "{what:<20} {:<10} NR {:.3}  PR {:.3}  AG {:.3}",
                kind.to_string(),
                p[0],
                p[1],
                p[2]
            );
        }
    }
    Ok(())
}
