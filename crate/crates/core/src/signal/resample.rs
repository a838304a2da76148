use std::collections::BTreeMap;

use super::{Column, RawSignal, SignalKind, UniformFrame, Value};
use crate::error::{Error, Result};

/// Aligns signals to a 1 Hz clock over the inclusive tick span `[t0, t1]`
/// using last-observation-carried-forward.
///
/// Raw timestamps are floored to their containing tick; when several samples
/// share a tick the last one wins.
pub fn resample_locf(signals: &[RawSignal], span: (i64, i64)) -> Result<UniformFrame> {
    let (t0, t1) = span;
    if t1 < t0 {
        return Err(Error::InvalidConfig(format!("empty span [{t0}, {t1}]")));
    }
    let len = (t1 - t0 + 1) as usize;
    let mut columns = BTreeMap::new();
    for signal in signals {
        signal.validate()?;
        let first = signal.samples.first().map(|s| s.t.floor() as i64);
        if first.is_none_or(|t| t > t0) {
            return Err(Error::Curation {
                signal: signal.name.clone(),
                reason: format!("no sample at or before t0={t0}"),
            });
        }
        let column = match signal.kind {
            SignalKind::Continuous | SignalKind::Boolean => {
                let values = carry_forward(signal, t0, len, |v| match v {
                    Value::Num(x) => *x,
                    Value::Cat(_) => unreachable!("validated"),
                });
                Column::Numeric(values)
            }
            SignalKind::Categorical => {
                let mut vocabulary: Vec<String> = signal.vocabulary.clone();
                for s in &signal.samples {
                    if let Value::Cat(c) = &s.value {
                        if !vocabulary.contains(c) {
                            vocabulary.push(c.clone());
                        }
                    }
                }
                let codes = carry_forward(signal, t0, len, |v| match v {
                    Value::Cat(c) => vocabulary.iter().position(|x| x == c).unwrap() as u32,
                    Value::Num(_) => unreachable!("validated"),
                });
                Column::Categorical { vocabulary, codes }
            }
        };
        columns.insert(signal.name.clone(), column);
    }
    Ok(UniformFrame {
        start: t0,
        len,
        columns,
    })
}

fn carry_forward<V: Copy>(signal: &RawSignal, t0: i64, len: usize, mut convert: impl FnMut(&Value) -> V) -> Vec<V> {
    let samples = &signal.samples;
    let mut out = Vec::with_capacity(len);
    let mut next = 0;
    let mut current: Option<V> = None;
    for i in 0..len {
        let tick = t0 + i as i64;
        while next < samples.len() && samples[next].t.floor() as i64 <= tick {
            current = Some(convert(&samples[next].value));
            next += 1;
        }
        out.push(current.expect("first sample precedes t0"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carries_last_observation() {
        let s = RawSignal::continuous("p", vec![(0.0, 5.0), (3.0, 7.0)]);
        let f = resample_locf(&[s], (0, 4)).unwrap();
        assert_eq!(f.numeric("p").unwrap(), &[5.0, 5.0, 5.0, 7.0, 7.0]);
        assert_eq!(f.clock().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn uniform_signal_is_unchanged() {
        let values = [1.0, 4.0, 2.0, 8.0];
        let s = RawSignal::continuous("s", values.iter().enumerate().map(|(i, &v)| (i as f64, v)).collect());
        let f = resample_locf(&[s], (0, 3)).unwrap();
        assert_eq!(f.numeric("s").unwrap(), &values);
    }

    #[test]
    fn categorical_change() {
        let s = RawSignal::categorical("material", vec![(0.0, "A"), (2.0, "B")]);
        let f = resample_locf(&[s], (0, 3)).unwrap();
        let col = f.column("material").unwrap();
        let labels: Vec<_> = (0..4).map(|i| col.label(i).unwrap()).collect();
        assert_eq!(labels, ["A", "A", "B", "B"]);
    }

    #[test]
    fn sub_second_samples_are_floored_and_last_wins() {
        let s = RawSignal::continuous("p", vec![(0.2, 1.0), (1.1, 2.0), (1.9, 3.0)]);
        let f = resample_locf(&[s], (0, 2)).unwrap();
        assert_eq!(f.numeric("p").unwrap(), &[1.0, 3.0, 3.0]);
    }

    #[test]
    fn missing_history_names_the_signal() {
        let s = RawSignal::continuous("late", vec![(3.0, 1.0)]);
        match resample_locf(&[s], (0, 4)) {
            Err(Error::Curation { signal, .. }) => assert_eq!(signal, "late"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
