#include "rely/report.hpp"

#include <cmath>
#include <cstddef>

#include "rely/losses.hpp"

namespace rely {

namespace {

void set_size(TextSection& s, std::string key, std::size_t v) {
    s.set(std::move(key), std::to_string(v));
}

void set_double(TextSection& s, std::string key, double v) {
    s.set(std::move(key), format_double(v));
}

void set_bool(TextSection& s, std::string key, bool v) {
    s.set(std::move(key), v ? "true" : "false");
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

void append_estimate(TextDocument& doc, const RelianceEstimate& estimate) {
    TextSection& s = doc.add("estimate");
    set_double(s, "r", estimate.r_hat);
    set_double(s, "b", estimate.b_hat);
    set_double(s, "normalized", estimate.normalized);
    set_size(s, "n", estimate.n);
    s.set("x1", join(estimate.x1_columns, ","));
    s.set("loss", loss_kind_name(estimate.loss.kind));
    if (estimate.loss.kind == LossKind::cross_entropy)
        set_double(s, "clip_epsilon", estimate.loss.clip_epsilon);
    if (estimate.loss.kind == LossKind::utility) {
        set_double(s, "lambda", estimate.loss.lambda);
        s.set("risk_p0_column", estimate.loss.risk_p0_column);
        s.set("risk_p1_column", estimate.loss.risk_p1_column);
    }
    s.set("method", reliance_method_name(estimate.method));
}

void append_bootstrap(TextDocument& doc, const BootstrapResult& result, double alpha) {
    append_estimate(doc, result.point);
    TextSection& s = doc.add("bootstrap");
    set_size(s, "B", result.B);
    set_size(s, "redraws", result.redraws);
    set_double(s, "alpha", alpha);
    set_double(s, "r_lo", result.r_interval.r_min);
    set_double(s, "r_hi", result.r_interval.r_max);
    set_double(s, "normalized_lo", result.normalized_interval.r_min);
    set_double(s, "normalized_hi", result.normalized_interval.r_max);
}

void append_parity(TextDocument& doc, const ParityResult& result) {
    TextSection& s = doc.add("parity");
    set_double(s, "statistic", result.statistic);
    set_double(s, "p_value", result.p_value);
    set_double(s, "null_scale", result.null_scale);
    set_size(s, "dof", result.dof);
    set_size(s, "B", result.B);
    set_size(s, "redraws", result.redraws);
}

void append_bands(TextDocument& doc, const BandResult& result) {
    TextSection& c = doc.add("cohort");
    set_size(c, "n", result.n);
    set_size(c, "seed", result.seed);
    set_size(c, "respondents", result.respondents);
    set_double(c, "respondent_fraction", result.respondent_fraction);
    set_double(c, "p_z1", result.p_z1_used);
    set_double(c, "respondent_acceptance", result.respondent_acceptance);
    set_double(c, "population_acceptance", result.population_acceptance);
    set_double(c, "model_accuracy", result.logistic_accuracy);
    set_bool(c, "separation_warning", result.separation_warning);
    for (const BandCovariate& band : result.bands) {
        TextSection& s = doc.add("band");
        s.set("covariate", band.name);
        set_double(s, "r_min", band.r_min);
        set_double(s, "r_max", band.r_max);
        set_double(s, "true_value", band.true_value);
    }
}

void append_rank_orderings(TextDocument& doc, const RankingReport& report) {
    for (std::size_t set = 0; set < report.covariate_sets.size(); ++set) {
        TextSection& o = doc.add("ordering");
        o.set("set", report.set_labels.at(set));
        o.set("ranked", join(report.orderings.at(set), ","));
    }
}

void append_rank_measures(TextDocument& doc, const RankingReport& report) {
    for (const RankEntry& entry : report.entries) {
        for (std::size_t set = 0; set < report.covariate_sets.size(); ++set) {
            TextSection& s = doc.add("measure");
            s.set("group", entry.group);
            s.set("set", report.set_labels.at(set));
            set_size(s, "n", entry.n);
            if (entry.ok(set)) {
                set_double(s, "r", entry.r_hat.at(set));
                set_double(s, "b", entry.b_hat.at(set));
                set_double(s, "normalized", entry.normalized.at(set));
            } else {
                s.set("error", entry.errors.at(set));
            }
        }
    }
    if (report.validation.performed) {
        TextSection& v = doc.add("validation");
        set_bool(v, "performed", true);
        set_bool(v, "resampled", report.validation.resampled);
        set_size(v, "aligned_n", report.validation.aligned_n);
        set_double(v, "max_abs_gap", report.validation.max_abs_gap);
        set_bool(v, "orderings_match", report.validation.orderings_match);
    }
}

std::string bands_csv(const BandResult& result) {
    std::string out = "covariate,r_min,r_max,true_value\n";
    for (const BandCovariate& band : result.bands) {
        out += csv_field(band.name);
        out += ',';
        out += format_double(band.r_min);
        out += ',';
        out += format_double(band.r_max);
        out += ',';
        out += format_double(band.true_value);
        out += '\n';
    }
    return out;
}

std::string ranking_csv(const RankingReport& report) {
    std::string out = "set,group,n,r,b,normalized,rank\n";
    for (std::size_t set = 0; set < report.covariate_sets.size(); ++set) {
        const std::vector<std::string>& order = report.orderings.at(set);
        for (const RankEntry& entry : report.entries) {
            out += csv_field(report.set_labels.at(set));
            out += ',';
            out += csv_field(entry.group);
            out += ',';
            out += std::to_string(entry.n);
            if (entry.ok(set)) {
                out += ',';
                out += format_double(entry.r_hat.at(set));
                out += ',';
                out += format_double(entry.b_hat.at(set));
                out += ',';
                out += format_double(entry.normalized.at(set));
                std::size_t rank = 0;
                for (std::size_t p = 0; p < order.size(); ++p)
                    if (order[p] == entry.group) rank = p + 1;
                out += ',';
                if (rank > 0) out += std::to_string(rank);
            } else {
                out += ",,,,";
            }
            out += '\n';
        }
    }
    return out;
}

} // namespace rely
