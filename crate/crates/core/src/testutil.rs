use crate::signal::{Class, ExtruderStart, LabeledExtrusion, PropertyStats, SearchPoint};

/// A labeled row whose properties are flat at the given values.
pub(crate) fn row(
    id: usize,
    product: &str,
    props: &[f64],
    extruders: &[(bool, f64, f64)],
    steadiness: Option<f64>,
    class: Class,
) -> LabeledExtrusion {
    let properties = props
        .iter()
        .enumerate()
        .map(|(i, &v)| PropertyStats {
            name: format!("p{i}"),
            min: v - 1.0,
            max: v + 1.0,
            mean: v,
            std: 0.5,
            first: v,
            last: v,
        })
        .collect();
    let extruders = extruders
        .iter()
        .map(|&(usage, target_speed, acceleration)| ExtruderStart {
            usage,
            target_speed,
            acceleration,
        })
        .collect();
    LabeledExtrusion {
        id,
        start_time: 100 * id as i64,
        search_point: SearchPoint {
            properties,
            extruders,
            material: None,
            die: None,
            product_type: product.to_string(),
        },
        steadiness_time: steadiness,
        class,
    }
}
