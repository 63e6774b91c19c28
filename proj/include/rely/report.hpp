// Renders analysis results as sectioned key-value reports and small CSV
// tables.  Field names are stable and nothing time- or host-dependent is
// written, so rerunning the same analysis produces byte-identical files.
#pragma once

#include <string>

#include "rely/admissions.hpp"
#include "rely/reliance.hpp"
#include "rely/text_format.hpp"

namespace rely {

// Each writer appends its sections to the document, leaving room for the
// caller to lead with a section holding the resolved run configuration.

void append_estimate(TextDocument& doc, const RelianceEstimate& estimate);
void append_bootstrap(TextDocument& doc, const BootstrapResult& result, double alpha);
void append_parity(TextDocument& doc, const ParityResult& result);
void append_bands(TextDocument& doc, const BandResult& result);

// Per-group measures (and the stacked-identity validation when it ran) are
// shared by the reliance and rank commands; the ordering sections are what
// makes a rank report.
void append_rank_measures(TextDocument& doc, const RankingReport& report);
void append_rank_orderings(TextDocument& doc, const RankingReport& report);

// CSV tables for plotting: one band row per covariate, one ranking row per
// group and covariate set.  Both start with a header row.
std::string bands_csv(const BandResult& result);
std::string ranking_csv(const RankingReport& report);

} // namespace rely
