use std::sync::Arc;

use autoda_core::seed::{derive, rng_from};
use autoda_core::victims::{
    hyperplane_instances, load_cifar10_batch, select_starting_point, sphere_instances,
    EvalInstance, HyperplaneSetup, MlpOracle, SphereSetup,
};
use autoda_core::{DecisionOracle, InputVector, Label};
use rand::seq::SliceRandom;

use crate::args::{VictimArgs, VictimKind};
use crate::error::CliError;

pub const DEFAULT_DIM: usize = 16;

/// `count` attack instances for the victim described by `args`.
pub fn build_instances(
    args: &VictimArgs,
    count: usize,
    seed: u64,
) -> Result<Vec<EvalInstance>, CliError> {
    let kind = args.victim.unwrap_or(VictimKind::Sphere);
    let dim = args.dim.unwrap_or(DEFAULT_DIM);
    if kind != VictimKind::Mlp && dim == 0 {
        return Err(CliError::Config("--dim must be positive".into()));
    }
    match kind {
        VictimKind::Sphere => Ok(sphere_instances(dim, count, seed, SphereSetup::default())),
        VictimKind::Hyperplane if dim < 2 => Err(CliError::Config(
            "the hyperplane victim needs --dim of at least 2".into(),
        )),
        VictimKind::Hyperplane => Ok(hyperplane_instances(
            dim,
            count,
            seed,
            HyperplaneSetup::default(),
        )),
        VictimKind::Mlp => mlp_instances(args, count, seed),
    }
}

/// Originals are correctly classified images in seeded random order; each
/// starts from the nearest image the network puts in another class.
fn mlp_instances(
    args: &VictimArgs,
    count: usize,
    seed: u64,
) -> Result<Vec<EvalInstance>, CliError> {
    let (Some(weights), Some(data)) = (&args.weights, &args.data) else {
        return Err(CliError::Config(
            "the mlp victim needs --weights and --data".into(),
        ));
    };
    let net = MlpOracle::load(weights)
        .map_err(|e| CliError::Victim(format!("{}: {e}", weights.display())))?;
    let samples = load_cifar10_batch(data)
        .map_err(|e| CliError::Victim(format!("{}: {e}", data.display())))?;
    if let Some((x, _)) = samples.first() {
        if x.len() != net.input_shape().len() {
            return Err(CliError::Victim(format!(
                "{} takes {} inputs, images have {}",
                weights.display(),
                net.input_shape().len(),
                x.len()
            )));
        }
    }
    let predicted: Vec<(InputVector, Label)> = samples
        .iter()
        .map(|(x, _)| (x.clone(), net.label_of(x)))
        .collect();
    let mut order: Vec<usize> = (0..samples.len())
        .filter(|&i| predicted[i].1 == samples[i].1)
        .collect();
    order.shuffle(&mut rng_from(derive(&[seed, 0xDA7A])));

    let oracle: Arc<dyn DecisionOracle> = Arc::new(net);
    let mut out = Vec::with_capacity(count);
    for i in order {
        if out.len() == count {
            break;
        }
        let (original, label) = &predicted[i];
        let Some(start) = select_starting_point(&predicted, original, *label) else {
            continue;
        };
        out.push(EvalInstance {
            oracle: Arc::clone(&oracle),
            original: original.clone(),
            label: *label,
            start: predicted[start].0.clone(),
            optimum: None,
        });
    }
    if out.len() < count {
        return Err(CliError::Victim(format!(
            "only {} of {count} images are correctly classified and attackable",
            out.len()
        )));
    }
    Ok(out)
}
