use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{CorpusError, PsychTrait, TraitProfile};

/// Raw trait scores on the instrument scale, `[1, scale_max]`.
pub type RawTraits = BTreeMap<PsychTrait, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyItem {
    pub item_id: String,
    pub target: PsychTrait,
    pub reversed: bool,
    pub scale_max: u8,
}

/// Item-to-trait scoring key for the questionnaires.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionnaireKey {
    items: BTreeMap<String, KeyItem>,
}

#[derive(Deserialize)]
struct KeyRow {
    item_id: String,
    #[serde(rename = "trait")]
    target: String,
    reversed: String,
    scale_max: u8,
}

fn parse_flag(s: &str) -> Result<bool, CorpusError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" | "r" => Ok(true),
        "0" | "false" | "no" | "n" | "" => Ok(false),
        other => Err(CorpusError::InvalidKey(format!("bad reversed flag `{other}`"))),
    }
}

impl QuestionnaireKey {
    /// Every trait needs at least one item, and each item's scale must match
    /// its trait's instrument (5 for the Big Five, 7 for attachment).
    pub fn new(items: impl IntoIterator<Item = KeyItem>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for item in items {
            if item.scale_max != item.target.scale_max() {
                return Err(CorpusError::InvalidKey(format!(
                    "item `{}` has scale_max {} but `{}` uses {}",
                    item.item_id,
                    item.scale_max,
                    item.target,
                    item.target.scale_max()
                )));
            }
            if map.insert(item.item_id.clone(), item).is_some() {
                return Err(CorpusError::InvalidKey("duplicate item id".into()));
            }
        }
        for t in PsychTrait::ALL {
            if !map.values().any(|i: &KeyItem| i.target == t) {
                return Err(CorpusError::InvalidKey(format!("no items for `{t}`")));
            }
        }
        Ok(QuestionnaireKey { items: map })
    }

    /// Reads the `item_id,trait,reversed,scale_max` CSV format.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, CorpusError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut items = Vec::new();
        for row in rdr.deserialize::<KeyRow>() {
            let row = row?;
            items.push(KeyItem {
                item_id: row.item_id,
                target: row.target.parse()?,
                reversed: parse_flag(&row.reversed)?,
                scale_max: row.scale_max,
            });
        }
        Self::new(items)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path)
            .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
        Self::from_csv_reader(file)
    }

    pub fn get(&self, item_id: &str) -> Option<&KeyItem> {
        self.items.get(item_id)
    }

    pub fn items(&self) -> impl Iterator<Item = &KeyItem> {
        self.items.values()
    }
}

/// Scores Likert responses: reversed items map `r -> scale_max + 1 - r`, and
/// each trait is the mean of its answered items. Traits with no answered
/// items are absent from the result.
pub fn score_questionnaire(
    responses: &BTreeMap<String, i64>,
    key: &QuestionnaireKey,
) -> Result<RawTraits, CorpusError> {
    let mut sums: BTreeMap<PsychTrait, (f64, usize)> = BTreeMap::new();
    for (item_id, &value) in responses {
        let item = key.get(item_id).ok_or_else(|| CorpusError::UnknownItem(item_id.clone()))?;
        let max = i64::from(item.scale_max);
        if !(1..=max).contains(&value) {
            return Err(CorpusError::ResponseOutOfScale {
                item: item_id.clone(),
                value,
                scale_max: item.scale_max,
            });
        }
        let scored = if item.reversed { max + 1 - value } else { value };
        let entry = sums.entry(item.target).or_insert((0.0, 0));
        entry.0 += scored as f64;
        entry.1 += 1;
    }
    Ok(sums.into_iter().map(|(t, (s, n))| (t, s / n as f64)).collect())
}

/// Min-max maps raw scores `x -> (x - 1) / (scale_max - 1)`.
pub fn normalize_traits(raw: &RawTraits) -> Result<TraitProfile, CorpusError> {
    let mut values = [0.0; 7];
    for t in PsychTrait::ALL {
        let x = *raw.get(&t).ok_or(CorpusError::MissingTrait(t))?;
        let max = f64::from(t.scale_max());
        if !(1.0..=max).contains(&x) || x.is_nan() {
            return Err(CorpusError::RawOutOfRange { name: t, value: x, scale_max: t.scale_max() });
        }
        values[t.index()] = (x - 1.0) / (max - 1.0);
    }
    Ok(TraitProfile::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Four items per trait; ids are `<trait>_<n>`, items 3 and 4 reversed.
    fn key() -> QuestionnaireKey {
        let items = PsychTrait::ALL.into_iter().flat_map(|t| {
            (1..=4).map(move |n| KeyItem {
                item_id: format!("{t}_{n}"),
                target: t,
                reversed: n >= 3,
                scale_max: t.scale_max(),
            })
        });
        QuestionnaireKey::new(items).unwrap()
    }

    fn responses(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn reversed_items_average() {
        let r = responses(&[("openness_1", 4), ("openness_2", 4), ("openness_3", 2), ("openness_4", 1)]);
        let raw = score_questionnaire(&r, &key()).unwrap();
        assert_eq!(raw[&PsychTrait::Openness], 4.25);
        assert_eq!(raw.len(), 1);
    }

    #[test]
    fn minimum_responses_score_one() {
        let r = responses(&[("extraversion_1", 1), ("extraversion_2", 1)]);
        let raw = score_questionnaire(&r, &key()).unwrap();
        assert_eq!(raw[&PsychTrait::Extraversion], 1.0);
    }

    #[test]
    fn seven_point_reversal() {
        let r = responses(&[("anxiety_3", 7)]);
        let raw = score_questionnaire(&r, &key()).unwrap();
        assert_eq!(raw[&PsychTrait::Anxiety], 1.0);
    }

    #[test]
    fn rejects_out_of_scale_and_unknown_items() {
        let r = responses(&[("openness_1", 6)]);
        assert!(matches!(score_questionnaire(&r, &key()), Err(CorpusError::ResponseOutOfScale { .. })));
        let r = responses(&[("openness_1", 0)]);
        assert!(matches!(score_questionnaire(&r, &key()), Err(CorpusError::ResponseOutOfScale { .. })));
        let r = responses(&[("nope", 3)]);
        assert!(matches!(score_questionnaire(&r, &key()), Err(CorpusError::UnknownItem(_))));
    }

    #[test]
    fn key_csv_parses_and_validates() {
        let mut csv_text = String::from("item_id,trait,reversed,scale_max\n");
        for t in PsychTrait::ALL {
            csv_text.push_str(&format!("{t}_a,{t},false,{}\n", t.scale_max()));
            csv_text.push_str(&format!("{t}_b,{t},true,{}\n", t.scale_max()));
        }
        let k = QuestionnaireKey::from_csv_reader(csv_text.as_bytes()).unwrap();
        assert!(k.get("anxiety_b").unwrap().reversed);
        assert_eq!(k.items().count(), 14);

        let bad = csv_text.replace("openness_a,openness,false,5", "openness_a,openness,false,7");
        assert!(QuestionnaireKey::from_csv_reader(bad.as_bytes()).is_err());
        let missing: String = csv_text.lines().filter(|l| !l.contains("neuroticism")).map(|l| format!("{l}\n")).collect();
        assert!(QuestionnaireKey::from_csv_reader(missing.as_bytes()).is_err());
    }

    fn full_raw(v: f64) -> RawTraits {
        PsychTrait::ALL.into_iter().map(|t| (t, v.min(f64::from(t.scale_max())))).collect()
    }

    #[test]
    fn normalization_values() {
        let mut raw = full_raw(1.0);
        raw.insert(PsychTrait::Conscientiousness, 3.69);
        raw.insert(PsychTrait::Avoidance, 7.0);
        raw.insert(PsychTrait::Openness, 5.0);
        let p = normalize_traits(&raw).unwrap();
        assert!((p.get(PsychTrait::Conscientiousness) - 0.6725).abs() < 1e-12);
        assert_eq!(p.get(PsychTrait::Anxiety), 0.0);
        assert_eq!(p.get(PsychTrait::Avoidance), 1.0);
        assert_eq!(p.get(PsychTrait::Openness), 1.0);
    }

    #[test]
    fn normalization_rejects_out_of_range_and_missing() {
        let mut raw = full_raw(2.0);
        raw.insert(PsychTrait::Openness, 5.5);
        assert!(matches!(normalize_traits(&raw), Err(CorpusError::RawOutOfRange { .. })));
        let mut raw = full_raw(2.0);
        raw.remove(&PsychTrait::Neuroticism);
        assert!(matches!(normalize_traits(&raw), Err(CorpusError::MissingTrait(PsychTrait::Neuroticism))));
    }

    proptest! {
        #[test]
        fn scoring_is_bounded_and_monotone(
            answers in proptest::collection::vec(1i64..=7, 28),
            bump_item in 0usize..28,
        ) {
            let k = key();
            let ids: Vec<String> = k.items().map(|i| i.item_id.clone()).collect();
            let clamp_to = |id: &str, v: i64| v.min(i64::from(k.get(id).unwrap().scale_max));
            let base: BTreeMap<String, i64> =
                ids.iter().zip(&answers).map(|(id, &v)| (id.clone(), clamp_to(id, v))).collect();
            let profile = normalize_traits(&score_questionnaire(&base, &k).unwrap()).unwrap();
            for v in profile.values() {
                prop_assert!((0.0..=1.0).contains(v));
            }

            let id = &ids[bump_item];
            let item = k.get(id).unwrap();
            if base[id] < i64::from(item.scale_max) {
                let mut bumped = base.clone();
                *bumped.get_mut(id).unwrap() += 1;
                let after = normalize_traits(&score_questionnaire(&bumped, &k).unwrap()).unwrap();
                let (b, a) = (profile.get(item.target), after.get(item.target));
                if item.reversed { prop_assert!(a <= b) } else { prop_assert!(a >= b) }
            }
        }
    }
}
