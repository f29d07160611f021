//! Run a small benchmark campaign, summarize it, compute a data profile and
//! write the CSV exports to a directory (default `campaign-example`).

use snowpac::harness::{self, CampaignSpec};
use snowpac::problems::Formulation;

fn main() -> snowpac::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "campaign-example".into());
    let out = std::path::Path::new(&out);
    std::fs::create_dir_all(out).map_err(|e| snowpac::SnowpacError::Io { path: out.to_path_buf(), source: e })?;

    let mut spec = CampaignSpec::new(vec!["hs228".into(), "example2d".into()], vec![Formulation::MeanMean], vec![50], 3);
    spec.evaluation_budget = Some(60);
    spec.workers = 2;
    let records = harness::run_campaign(&spec)?;
    let summary = harness::summarize(&records, 1e-2, 1e-2);
    print!("{}", harness::summary_to_text(&summary));

    let profile = harness::data_profile(&records, 1e-2, 1e-2, &harness::default_alphas(20))?;
    for (a, d) in profile.alphas.iter().zip(&profile.fraction_solved).step_by(5) {
        println!("d({a:>4}) = {d:.2}");
    }
    harness::write_records(&records, &out.join("records.csv"))?;
    harness::write_profile(&profile, 1e-2, 1e-2, &out.join("profile.csv"))?;
    println!("wrote {}", out.display());
    Ok(())
}
