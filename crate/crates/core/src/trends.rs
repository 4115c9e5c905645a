//! Per-label article counts over time.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::barriers::{assign_barrier, BarrierKind, BarriersDb};
use crate::corpus::{Corpus, TimeWindow};
use crate::time::{BinSize, BucketAxis};

/// Counts per barrier label per bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub kind: BarrierKind,
    pub bin: BinSize,
    /// Bucket labels (ISO dates for day/week, timestamps for hours).
    pub bins: Vec<String>,
    /// Label → count per bucket. Unknown labels are their own series.
    pub series: BTreeMap<String, Vec<u64>>,
    pub cumulative: bool,
}

impl TrendSeries {
    /// Sum over all labels and buckets (last bucket per label when cumulative).
    pub fn total(&self) -> u64 {
        if self.cumulative {
            self.series.values().filter_map(|v| v.last()).sum()
        } else {
            self.series.values().flatten().sum()
        }
    }
}

/// Counts each article in `window` once, under its barrier label and bucket.
/// Every label seen anywhere in `corpus` gets a series, so windows without
/// articles still show the label axis. Cumulative mode prefix-sums each
/// series.
pub fn compute_trends(
    corpus: &Corpus,
    db: &BarriersDb,
    kind: BarrierKind,
    window: &TimeWindow,
    bin: BinSize,
    cumulative: bool,
) -> TrendSeries {
    let axis = BucketAxis::covering(window.start(), window.end(), bin);
    let labels: BTreeSet<String> =
        corpus.articles().iter().map(|a| assign_barrier(a, kind, db).bucket().to_string()).collect();
    let mut series: BTreeMap<String, Vec<u64>> = labels.into_iter().map(|l| (l, vec![0; axis.len])).collect();
    for article in corpus.articles().iter().filter(|a| window.contains(a.published_at)) {
        let label = assign_barrier(article, kind, db);
        let idx = axis.index_of(article.published_at).expect("window lies inside the axis");
        series.get_mut(label.bucket()).expect("label collected above")[idx] += 1;
    }
    if cumulative {
        for counts in series.values_mut() {
            prefix_sum(counts);
        }
    }
    TrendSeries { kind, bin, bins: axis.labels(), series, cumulative }
}

pub fn prefix_sum(counts: &mut [u64]) {
    let mut acc = 0;
    for c in counts.iter_mut() {
        acc += *c;
        *c = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Article;
    use crate::data::ECONOMIC_CLUSTERS_CSV;
    use crate::time::parse_timestamp;

    const PUBLISHERS: &str = "source_name,hq_country,political_alignment\nil.example,Israel,center-left\nru.example,Russia,State-controlled\n";

    fn db() -> BarriersDb {
        BarriersDb::from_csv_strs(PUBLISHERS, ECONOMIC_CLUSTERS_CSV).unwrap()
    }

    fn article(id: &str, ts: &str, source: &str) -> Article {
        Article {
            id: id.into(),
            title: String::new(),
            body: String::new(),
            source_name: source.into(),
            published_at: parse_timestamp(ts).unwrap(),
            concepts: vec![],
            categories: vec![],
        }
    }

    fn window(a: &str, b: &str) -> TimeWindow {
        TimeWindow::new(parse_timestamp(a).unwrap(), parse_timestamp(b).unwrap()).unwrap()
    }

    #[test]
    fn empty_window_is_all_zero() {
        let corpus = Corpus::new("e", [article("a", "2023-10-01T00:00:00Z", "il.example")]);
        let t = compute_trends(
            &corpus,
            &db(),
            BarrierKind::Economic,
            &window("2023-11-01", "2023-11-04"),
            BinSize::Day,
            false,
        );
        assert_eq!(t.bins, ["2023-11-01", "2023-11-02", "2023-11-03"]);
        assert_eq!(t.series["C1"], [0, 0, 0]);
        assert_eq!(t.total(), 0);
    }

    #[test]
    fn same_day_same_label() {
        let corpus =
            Corpus::new("e", (0..3).map(|i| article(&i.to_string(), &format!("2023-11-02T0{i}:00:00Z"), "il.example")));
        let t = compute_trends(
            &corpus,
            &db(),
            BarrierKind::Geographic,
            &window("2023-11-01", "2023-11-04"),
            BinSize::Day,
            false,
        );
        assert_eq!(t.series["Israel"], [0, 3, 0]);
    }

    #[test]
    fn cumulative_prefix_sum_and_unknown_bucket() {
        let corpus = Corpus::new(
            "e",
            [
                article("a", "2023-11-01T10:00:00Z", "ru.example"),
                article("b", "2023-11-03T10:00:00Z", "ru.example"),
                article("c", "2023-11-03T11:00:00Z", "ru.example"),
                article("d", "2023-11-02T11:00:00Z", "mystery.example"),
            ],
        );
        let w = window("2023-11-01", "2023-11-04");
        let plain = compute_trends(&corpus, &db(), BarrierKind::Economic, &w, BinSize::Day, false);
        assert_eq!(plain.series["C12"], [1, 0, 2]);
        assert_eq!(plain.series["Unknown"], [0, 1, 0]);
        assert_eq!(plain.total(), 4);
        let cum = compute_trends(&corpus, &db(), BarrierKind::Economic, &w, BinSize::Day, true);
        assert_eq!(cum.series["C12"], [1, 1, 3]);
        assert_eq!(cum.total(), 4);
    }

    #[test]
    fn two_day_rebinning_sums() {
        let corpus = Corpus::new(
            "e",
            [
                article("a", "2023-11-01T10:00:00Z", "ru.example"),
                article("b", "2023-11-02T10:00:00Z", "ru.example"),
                article("c", "2023-11-02T12:00:00Z", "il.example"),
            ],
        );
        let w = window("2023-11-01", "2023-11-03");
        let daily = compute_trends(&corpus, &db(), BarrierKind::Economic, &w, BinSize::Day, false);
        let weekly = compute_trends(&corpus, &db(), BarrierKind::Economic, &w, BinSize::Week, false);
        for (label, counts) in &daily.series {
            assert_eq!(weekly.series[label], [counts.iter().sum::<u64>()]);
        }
        let hourly = compute_trends(&corpus, &db(), BarrierKind::Economic, &w, BinSize::Hour, false);
        assert_eq!(hourly.bins.len(), 48);
        assert_eq!(hourly.total(), 3);
    }
}
