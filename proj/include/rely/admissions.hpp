// Synthetic school-admissions study with survey selection.
//
// Data generating process, drawn independently per applicant:
//   race    ~ Bernoulli(0.5)
//   sex     ~ Bernoulli(0.3)
//   ability ~ Normal(6, 1)
//   effort  ~ Normal(1, 1)
//   score   = round(ability + effort), half away from zero, clipped to [0, 10]
//   admit   = 1{ -2*race + sex + score/5 - 2.2 >= 0 }
//   respond = 1{ race + 3*sex + score/8 + effort - 1.5 >= 0 }
//
// Admission decisions are observed only for survey respondents, so the
// admission oracle is partially identified: a probability model fitted on
// respondents brackets the population oracle once scaled by the response
// rate.  The band analysis reproduces that pipeline end to end and compares
// the resulting reliance intervals with exact values computed by enumerating
// the discrete joint of (race, sex, score), integrating the effort tail of
// the response rule by adaptive quadrature.
//
// Draw order is part of the format: each record consumes exactly four
// uniforms, in field order (race, sex, then one Box-Muller pair giving
// ability and effort), so datasets are reproducible from the seed alone.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rely/dataset.hpp"
#include "rely/rng.hpp"

namespace rely {

struct AdmissionsRecord {
    int race = 0;
    int sex = 0;
    int score = 0;
    double ability = 0.0;
    double effort = 0.0;
    int admit = 0;
    int respond = 0;
};

// Admission rule: 1{ -2*race + sex + score/5 - 2.2 >= 0 }.
int true_decision(int race, int sex, int score);

// Survey response rule: 1{ race + 3*sex + score/8 + effort - 1.5 >= 0 }.
int survey_response(int race, int sex, int score, double effort);

AdmissionsRecord simulate_record(SeededRng& rng);

// Column schema of the simulated cohort CSV: race, sex, score, ability,
// effort, admit (outcome), respond (selection).
Schema admissions_schema();

// Full cohort of n applicants, deterministic given the seed.
Dataset simulate_admissions(std::size_t n, std::uint64_t seed);

struct ProbabilityInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// Interval for the population probability when the estimate f1_value is
// available only on a subpopulation observed with probability p_z1:
// [f1*p_z1, f1*p_z1 + (1 - p_z1)], width 1 - p_z1.
ProbabilityInterval identification_interval(double f1_value, double p_z1);

enum class AdmissionsCovariate { race, sex, score };
enum class Conditioning { population, respondents };

const char* admissions_covariate_name(AdmissionsCovariate k);

// Exact P(respond = 1) by enumeration.
double exact_response_rate();

// Exact P(admit = 1), either over the whole population or conditional on
// responding.
double exact_acceptance_rate(Conditioning conditioning);

// Exact reliance of the true decision rule on one covariate under square
// loss, over the chosen distribution.  The decision is deterministic in the
// covariates, so the baseline is 0 and reliance equals the probability that
// splicing the covariate flips the decision.
double true_reliance(AdmissionsCovariate k, Conditioning conditioning);

struct BandCovariate {
    std::string name;
    double r_min = 0.0;
    double r_max = 0.0;
    double true_value = 0.0;  // enumerated respondent-conditioned reliance
};

struct BandResult {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t respondents = 0;
    double respondent_fraction = 0.0;
    double p_z1_used = 0.0;
    double respondent_acceptance = 0.0;
    double population_acceptance = 0.0;
    double logistic_accuracy = 0.0;  // in-sample, respondents
    bool separation_warning = false;
    std::vector<BandCovariate> bands;  // race, sex, score
};

struct BandOptions {
    // Response probability fed to the envelope.  Negative selects the
    // empirical respondent fraction, mirroring what the analyst knows.
    double p_z1_override = -1.0;
    // p_z1 = 0 gives the vacuous [0, 1] envelope and is refused unless this
    // is set.
    bool allow_vacuous = false;
    std::size_t threads = 1;
};

// Simulates a cohort, fits the respondent logistic model, brackets it by the
// response rate and computes conservative reliance bounds per covariate on
// the respondent sample, attaching enumerated true values.
BandResult run_band_analysis(std::size_t n, std::uint64_t seed, const BandOptions& options = {});

} // namespace rely
