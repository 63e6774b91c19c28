#include "rely/admissions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rely/errors.hpp"
#include "rely/fit.hpp"
#include "rely/reliance.hpp"

namespace rely {

namespace {

constexpr double kSurveyThreshold = 1.5;
constexpr double kInf = std::numeric_limits<double>::infinity();

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

double phi(double x) { return boost::math::pdf(kStdNormal, x); }

double Phi(double x) {
    if (x == kInf) return 1.0;
    if (x == -kInf) return 0.0;
    return boost::math::cdf(kStdNormal, x);
}

// Score cell boundaries in s = ability + effort space.  Interior scores v
// collect s in [v - 0.5, v + 0.5); the clip absorbs both tails.
void score_cell(int score, double& lo, double& hi) {
    lo = score == 0 ? -kInf : score - 0.5;
    hi = score == 10 ? kInf : score + 0.5;
}

// P(score = v): ability + effort ~ Normal(7, sqrt(2)).
double p_score(int score) {
    double lo, hi;
    score_cell(score, lo, hi);
    const double sd = std::sqrt(2.0);
    return Phi((hi - 7.0) / sd) - Phi((lo - 7.0) / sd);
}

// P(score = v, effort >= t) = integral over e >= t of
// phi(e - 1) * P(ability in [lo - e, hi - e)), ability ~ Normal(6, 1).
double p_score_and_effort_tail(int score, double t) {
    double lo, hi;
    score_cell(score, lo, hi);
    auto integrand = [&](double e) {
        return phi(e - 1.0) * (Phi(hi - 6.0 - e) - Phi(lo - 6.0 - e));
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, t, kInf, 10,
                                                                         1e-13);
}

// Exact joint of (race, sex, score), population and respondent-conditioned.
struct EnumeratedJoint {
    double pop[2][2][11] = {};
    double resp[2][2][11] = {};
    double p_z1 = 0.0;
};

const EnumeratedJoint& joint() {
    static const EnumeratedJoint j = [] {
        EnumeratedJoint out;
        const double p_race[2] = {0.5, 0.5};
        const double p_sex[2] = {0.7, 0.3};
        for (int x1 = 0; x1 < 2; ++x1) {
            for (int x2 = 0; x2 < 2; ++x2) {
                for (int v = 0; v <= 10; ++v) {
                    double base = p_race[x1] * p_sex[x2];
                    out.pop[x1][x2][v] = base * p_score(v);
                    double t = kSurveyThreshold - x1 - 3.0 * x2 - v / 8.0;
                    double with_z = base * p_score_and_effort_tail(v, t);
                    out.resp[x1][x2][v] = with_z;
                    out.p_z1 += with_z;
                }
            }
        }
        for (int x1 = 0; x1 < 2; ++x1)
            for (int x2 = 0; x2 < 2; ++x2)
                for (int v = 0; v <= 10; ++v) out.resp[x1][x2][v] /= out.p_z1;
        return out;
    }();
    return j;
}

using Cells = double[2][2][11];

const Cells& cells_for(Conditioning conditioning) {
    return conditioning == Conditioning::population ? joint().pop : joint().resp;
}

} // namespace

int true_decision(int race, int sex, int score) {
    return -2.0 * race + sex + score / 5.0 - 2.2 >= 0.0 ? 1 : 0;
}

int survey_response(int race, int sex, int score, double effort) {
    return race + 3.0 * sex + score / 8.0 + effort - kSurveyThreshold >= 0.0 ? 1 : 0;
}

AdmissionsRecord simulate_record(SeededRng& rng) {
    AdmissionsRecord rec;
    rec.race = rng.bernoulli(0.5) ? 1 : 0;
    rec.sex = rng.bernoulli(0.3) ? 1 : 0;
    auto [z1, z2] = rng.normal_pair();
    rec.ability = 6.0 + z1;
    rec.effort = 1.0 + z2;
    double s = rec.ability + rec.effort;
    long rounded = std::lround(s);  // rounds half away from zero
    rec.score = static_cast<int>(std::clamp<long>(rounded, 0, 10));
    rec.admit = true_decision(rec.race, rec.sex, rec.score);
    rec.respond = survey_response(rec.race, rec.sex, rec.score, rec.effort);
    return rec;
}

Schema admissions_schema() {
    Schema schema;
    auto add = [&](const char* name, ColumnKind kind, ColumnRole role) {
        ColumnSchema col;
        col.name = name;
        col.kind = kind;
        col.role = role;
        schema.columns.push_back(col);
    };
    add("race", ColumnKind::binary, ColumnRole::covariate);
    add("sex", ColumnKind::binary, ColumnRole::covariate);
    add("score", ColumnKind::count, ColumnRole::covariate);
    add("ability", ColumnKind::real, ColumnRole::auxiliary);
    add("effort", ColumnKind::real, ColumnRole::auxiliary);
    add("admit", ColumnKind::binary, ColumnRole::outcome);
    add("respond", ColumnKind::binary, ColumnRole::selection);
    return schema;
}

Dataset simulate_admissions(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw UsageError("simulation needs n >= 1");
    Dataset data = Dataset::empty(admissions_schema());
    data.provenance = "simulate(n=" + std::to_string(n) + ", seed=" + std::to_string(seed) + ")";
    SeededRng rng(seed);
    std::vector<double> row(data.schema.size());
    for (std::size_t i = 0; i < n; ++i) {
        AdmissionsRecord rec = simulate_record(rng);
        row[0] = rec.race;
        row[1] = rec.sex;
        row[2] = rec.score;
        row[3] = rec.ability;
        row[4] = rec.effort;
        row[5] = rec.admit;
        row[6] = rec.respond;
        data.append_row(row);
    }
    return data;
}

ProbabilityInterval identification_interval(double f1_value, double p_z1) {
    if (!(f1_value >= 0.0 && f1_value <= 1.0))
        throw UsageError("identification interval needs f1 in [0, 1]");
    if (!(p_z1 >= 0.0 && p_z1 <= 1.0))
        throw UsageError("identification interval needs p_z1 in [0, 1]");
    return {f1_value * p_z1, f1_value * p_z1 + (1.0 - p_z1)};
}

const char* admissions_covariate_name(AdmissionsCovariate k) {
    switch (k) {
        case AdmissionsCovariate::race: return "race";
        case AdmissionsCovariate::sex: return "sex";
        case AdmissionsCovariate::score: return "score";
    }
    return "?";
}

double exact_response_rate() { return joint().p_z1; }

double exact_acceptance_rate(Conditioning conditioning) {
    const Cells& p = cells_for(conditioning);
    double acc = 0.0;
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            for (int v = 0; v <= 10; ++v)
                if (true_decision(x1, x2, v)) acc += p[x1][x2][v];
    return acc;
}

double true_reliance(AdmissionsCovariate k, Conditioning conditioning) {
    const Cells& p = cells_for(conditioning);

    // Marginal of the spliced covariate under the same distribution.
    double marginal[11] = {};
    int support = k == AdmissionsCovariate::score ? 11 : 2;
    for (int x1 = 0; x1 < 2; ++x1) {
        for (int x2 = 0; x2 < 2; ++x2) {
            for (int v = 0; v <= 10; ++v) {
                int key = k == AdmissionsCovariate::race ? x1
                          : k == AdmissionsCovariate::sex ? x2
                                                          : v;
                marginal[key] += p[x1][x2][v];
            }
        }
    }

    // The decision is deterministic, so reliance under square loss is the
    // probability that the spliced decision disagrees with the original.
    double r = 0.0;
    for (int x1 = 0; x1 < 2; ++x1) {
        for (int x2 = 0; x2 < 2; ++x2) {
            for (int v = 0; v <= 10; ++v) {
                double pa = p[x1][x2][v];
                if (pa == 0.0) continue;
                int ya = true_decision(x1, x2, v);
                for (int b = 0; b < support; ++b) {
                    int yb = k == AdmissionsCovariate::race ? true_decision(b, x2, v)
                             : k == AdmissionsCovariate::sex ? true_decision(x1, b, v)
                                                             : true_decision(x1, x2, b);
                    if (yb != ya) r += pa * marginal[b];
                }
            }
        }
    }
    return r;
}

BandResult run_band_analysis(std::size_t n, std::uint64_t seed, const BandOptions& options) {
    if (n < 100) throw UsageError("band analysis needs n >= 100, got " + std::to_string(n));

    BandResult result;
    result.n = n;
    result.seed = seed;

    Dataset cohort = simulate_admissions(n, seed);
    const std::vector<double>& respond = cohort.column("respond");
    const std::vector<double>& admit = cohort.column("admit");

    std::vector<std::size_t> resp_rows;
    double admits_all = 0.0, admits_resp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        admits_all += admit[i];
        if (respond[i] == 1.0) {
            resp_rows.push_back(i);
            admits_resp += admit[i];
        }
    }
    result.respondents = resp_rows.size();
    result.respondent_fraction = static_cast<double>(resp_rows.size()) / static_cast<double>(n);
    result.population_acceptance = admits_all / static_cast<double>(n);
    if (resp_rows.empty()) throw DataError("simulated cohort has no survey respondents");
    result.respondent_acceptance = admits_resp / static_cast<double>(resp_rows.size());

    Dataset respondents = gather_rows(cohort, resp_rows);
    const std::vector<std::string> covariates = {"race", "sex", "score"};
    FittedModel model = fit_logistic(respondents, "admit", covariates);
    result.separation_warning = model.diagnostics.separation_warning;
    std::shared_ptr<const Oracle> f1 = model.oracle();

    std::size_t correct = 0;
    {
        std::vector<double> buf(covariates.size());
        const std::vector<double>& y = respondents.column("admit");
        for (std::size_t i = 0; i < respondents.n_rows(); ++i) {
            for (std::size_t k = 0; k < covariates.size(); ++k)
                buf[k] = respondents.column(covariates[k])[i];
            double pred = f1->predict(buf) >= 0.5 ? 1.0 : 0.0;
            if (pred == y[i]) ++correct;
        }
    }
    result.logistic_accuracy =
        static_cast<double>(correct) / static_cast<double>(respondents.n_rows());

    result.p_z1_used =
        options.p_z1_override >= 0.0 ? options.p_z1_override : result.respondent_fraction;
    BoundedOracle envelope = bound_oracle(f1, result.p_z1_used, options.allow_vacuous);

    RelianceOptions est;
    est.threads = options.threads;
    const AdmissionsCovariate ks[3] = {AdmissionsCovariate::race, AdmissionsCovariate::sex,
                                       AdmissionsCovariate::score};
    for (AdmissionsCovariate k : ks) {
        BandCovariate band;
        band.name = admissions_covariate_name(k);
        Partition part;
        part.x1_columns = {band.name};
        for (const std::string& c : covariates)
            if (c != band.name) part.x2_columns.push_back(c);
        part.outcome = "admit";
        RelianceInterval interval = reliance_bounds(respondents, envelope, LossSpec{}, part, est);
        band.r_min = interval.r_min;
        band.r_max = interval.r_max;
        band.true_value = true_reliance(k, Conditioning::respondents);
        result.bands.push_back(band);
    }
    return result;
}

} // namespace rely
