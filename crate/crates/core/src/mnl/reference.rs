//! Calibrated reference models, estimated on observed shared-space traffic.
//! Useful as simulation ground truth and for smoke tests.

use super::{FittedModel, ModelSpec};
use crate::predictors::Predictor;
use crate::trajectory::UserKind;

/// (predictor, prudent/decelerate, aggressive/accelerate)
const VEHICLE: [(Predictor, f64, f64); 7] = [
    (Predictor::MinDist, -0.402, -0.265),
    (Predictor::TimeMinDist, 0.365, 0.539),
    (Predictor::OrtDist, 0.136, 0.225),
    (Predictor::TimeDelayXP, 0.161, 0.116),
    (Predictor::SpeedVeh, -0.118, -0.800),
    (Predictor::AccVeh, -1.738, 1.199),
    (Predictor::AccPed, 0.659, -0.882),
];
const VEHICLE_INTERCEPTS: (f64, f64) = (0.196, -0.309);

const PEDESTRIAN: [(Predictor, f64, f64); 6] = [
    (Predictor::MinDist, -0.497, -0.309),
    (Predictor::TimeMinDist, 0.745, 0.547),
    (Predictor::TimeDelayXP, 0.288, 0.252),
    (Predictor::SpeedPed, 0.099, -2.344),
    (Predictor::AccPed, -3.919, 2.484),
    (Predictor::AccVeh, 0.327, 0.131),
];
const PEDESTRIAN_INTERCEPTS: (f64, f64) = (-2.193, 1.057);

fn build(kind: UserKind, rows: &[(Predictor, f64, f64)], (a_p, a_g): (f64, f64)) -> FittedModel {
    let spec = ModelSpec::new(kind, rows.iter().map(|r| r.0).collect()).expect("distinct predictors");
    FittedModel::from_coefficients(
        spec,
        (a_p, rows.iter().map(|r| r.1).collect()),
        (a_g, rows.iter().map(|r| r.2).collect()),
    )
    .expect("consistent lengths")
}

pub fn vehicle_model() -> FittedModel {
    build(UserKind::Vehicle, &VEHICLE, VEHICLE_INTERCEPTS)
}

pub fn pedestrian_model() -> FittedModel {
    build(UserKind::Pedestrian, &PEDESTRIAN, PEDESTRIAN_INTERCEPTS)
}

pub fn model(kind: UserKind) -> FittedModel {
    match kind {
        UserKind::Vehicle => vehicle_model(),
        UserKind::Pedestrian => pedestrian_model(),
    }
}
