//! Plain-text tables for evaluation results.

use std::collections::BTreeMap;
use std::fmt::Write;

use factalign_core::metrics::{AgreementReport, BleuScore, F1Report, StatsReport};
use factalign_core::Language;

/// Column order used by every per-language table.
pub const LANGUAGE_ORDER: [Language; 8] = [
    Language::Hi,
    Language::Mr,
    Language::Te,
    Language::Ta,
    Language::En,
    Language::Gu,
    Language::Bn,
    Language::Kn,
];

/// Published transfer-learning mT5 selection F1 per language, in
/// [`LANGUAGE_ORDER`], followed by the average.
pub const PUBLISHED_MT5_F1: [f64; 9] = [0.902, 0.831, 0.841, 0.886, 0.845, 0.851, 0.751, 0.785, 0.837];

/// Renders rows as a left-aligned first column and right-aligned others.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0usize; cols];
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (i, c) in r.iter().enumerate().take(cols) {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |r: &[String]| {
        let mut s = String::new();
        for (i, c) in r.iter().enumerate().take(cols) {
            let pad = width[i] - c.chars().count();
            if i > 0 {
                s.push_str("  ");
            }
            if i == 0 {
                s.push_str(c);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    let total: usize = width.iter().sum::<usize>() + 2 * (cols.saturating_sub(1));
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

fn present(langs: impl Iterator<Item = Language>) -> Vec<Language> {
    let set: std::collections::BTreeSet<Language> = langs.collect();
    LANGUAGE_ORDER.into_iter().filter(|l| set.contains(l)).collect()
}

/// One row of F1 per language plus the average, optionally followed by
/// the published reference row.
pub fn f1_table(method: &str, report: &F1Report, with_reference: bool) -> String {
    let langs = if with_reference {
        LANGUAGE_ORDER.to_vec()
    } else {
        present(report.per_language.keys().copied())
    };
    let mut header = vec!["Method".to_string()];
    header.extend(langs.iter().map(|l| l.code().to_string()));
    header.push("Avg.".into());
    let mut row = vec![method.to_string()];
    for l in &langs {
        row.push(
            report
                .per_language
                .get(l)
                .map_or("-".to_string(), |p| format!("{:.3}", p.f1)),
        );
    }
    row.push(format!("{:.3}", report.macro_avg.f1));
    let mut rows = vec![row];
    if with_reference {
        let mut r = vec!["published mT5 (transfer)".to_string()];
        r.extend(PUBLISHED_MT5_F1.iter().map(|v| format!("{v:.3}")));
        rows.push(r);
    }
    let mut out = table(&header, &rows);
    let detail_header: Vec<String> = ["Lang", "P", "R", "F1", "Support"].map(String::from).to_vec();
    let mut detail: Vec<Vec<String>> = present(report.per_language.keys().copied())
        .into_iter()
        .map(|l| {
            let p = report.per_language[&l];
            vec![
                l.code().into(),
                format!("{:.3}", p.precision),
                format!("{:.3}", p.recall),
                format!("{:.3}", p.f1),
                p.support.to_string(),
            ]
        })
        .collect();
    for (name, p) in [("macro", report.macro_avg), ("micro", report.micro)] {
        detail.push(vec![
            name.into(),
            format!("{:.3}", p.precision),
            format!("{:.3}", p.recall),
            format!("{:.3}", p.f1),
            p.support.to_string(),
        ]);
    }
    out.push('\n');
    out.push_str(&table(&detail_header, &detail));
    out
}

/// `Lang | I | avg/min/max T | avg/min/max F | V`.
pub fn stats_table(reports: &[StatsReport]) -> String {
    let header = ["Lang", "I", "avg/min/max T", "avg/min/max F", "V"].map(String::from).to_vec();
    let by_lang: BTreeMap<Language, &StatsReport> = reports.iter().map(|r| (r.language, r)).collect();
    let rows: Vec<Vec<String>> = present(by_lang.keys().copied())
        .into_iter()
        .map(|l| {
            let r = by_lang[&l];
            vec![
                l.code().into(),
                r.instance_count.to_string(),
                format!("{:.1}/{}/{}", r.word_count.avg, r.word_count.min, r.word_count.max),
                format!("{:.1}/{}/{}", r.fact_count.avg, r.fact_count.min, r.fact_count.max),
                r.vocabulary_size.to_string(),
            ]
        })
        .collect();
    let mut out = table(&header, &rows);
    for r in reports {
        let _ = writeln!(out, "\ntop predicates ({}):", r.language);
        for (label, n) in &r.top_predicates {
            let _ = writeln!(out, "  {label}: {n}");
        }
        let _ = writeln!(out, "fact count distribution ({}):", r.language);
        for (k, frac) in &r.fact_count_histogram {
            let _ = writeln!(out, "  {k}: {frac:.3}");
        }
    }
    out
}

pub fn kappa_table(report: &AgreementReport) -> String {
    let header = ["Pair", "kappa"].map(String::from).to_vec();
    let mut rows: Vec<Vec<String>> = report
        .pairwise_kappa
        .iter()
        .map(|((a, b), k)| vec![format!("{a} / {b}"), format!("{k:.6}")])
        .collect();
    rows.push(vec!["average".into(), format!("{:.6}", report.average_kappa)]);
    table(&header, &rows)
}

/// BLEU scaled by 100 per language, plus the average over languages.
pub fn bleu_table(model: &str, scores: &BTreeMap<Language, BleuScore>) -> String {
    let langs = present(scores.keys().copied());
    let mut header = vec!["Model".to_string()];
    header.extend(langs.iter().map(|l| l.code().to_string()));
    header.push("Avg.".into());
    let mut row = vec![model.to_string()];
    let mut sum = 0.0;
    for l in &langs {
        let b = scores[l].bleu * 100.0;
        sum += b;
        row.push(format!("{b:.1}"));
    }
    row.push(format!("{:.1}", sum / langs.len().max(1) as f64));
    table(&header, &[row])
}
