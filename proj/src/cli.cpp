#include "rely/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rely/admissions.hpp"
#include "rely/config.hpp"
#include "rely/dataset.hpp"
#include "rely/errors.hpp"
#include "rely/fit.hpp"
#include "rely/reliance.hpp"
#include "rely/report.hpp"

namespace rely {

namespace {

// ---- output plumbing ----

std::string resolve_out_dir(const std::string& configured) {
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("RELY_OUT_DIR"); env && *env) return env;
    return ".";
}

std::string prepare_out_dir(const std::string& configured) {
    std::string dir = resolve_out_dir(configured);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw DataError("failed writing '" + path + "'");
    std::cout << "wrote " << path << "\n";
}

// ---- config assembly from flags ----

struct ConfigFlags {
    std::string config_path;
    std::vector<std::string> x1;
    std::string data, schema, simulate_n, simulate_seed;
    std::string derive_interruptions, derive_tokens;
    std::string x2, outcome, group, method, validate_stacked;
    std::string loss, clip_epsilon, lambda, risk_p0, risk_p1;
    std::string fitter, model, covariates, intercept, max_iter, tol, tuning_c;
    std::string B, refit, alpha;
    std::string out_dir, seed, threads;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file");
        cmd->add_option("--data", data, "input CSV ([input] data)");
        cmd->add_option("--schema", schema, "schema file ([input] schema)");
        cmd->add_option("--simulate-n", simulate_n, "simulated cohort size ([input] simulate_n)");
        cmd->add_option("--simulate-seed", simulate_seed,
                        "simulator seed ([input] simulate_seed)");
        cmd->add_option("--derive-interruptions", derive_interruptions,
                        "interruption count column ([derive] interruptions)");
        cmd->add_option("--derive-tokens", derive_tokens,
                        "token count column ([derive] tokens)");
        cmd->add_option("--x1", x1, "audited covariate set, comma separated; repeatable "
                                    "([analysis] x1)");
        cmd->add_option("--x2", x2, "remaining covariates ([analysis] x2)");
        cmd->add_option("--outcome", outcome, "outcome column ([analysis] outcome)");
        cmd->add_option("--group", group, "group column ([analysis] group)");
        cmd->add_option("--method", method,
                        "automatic, exhaustive or categorical ([analysis] method)");
        cmd->add_option("--validate-stacked", validate_stacked,
                        "true/false ([analysis] validate_stacked)");
        cmd->add_option("--loss", loss, "square, cross_entropy or utility ([loss] kind)");
        cmd->add_option("--clip-epsilon", clip_epsilon,
                        "cross-entropy clamp ([loss] clip_epsilon)");
        cmd->add_option("--lambda", lambda, "utility weight ([loss] lambda)");
        cmd->add_option("--risk-p0", risk_p0, "P(S=0|x) column ([loss] risk_p0)");
        cmd->add_option("--risk-p1", risk_p1, "P(S=1|x) column ([loss] risk_p1)");
        cmd->add_option("--fitter", fitter, "ols, logistic or huber ([fitter] kind)");
        cmd->add_option("--model", model, "saved model file ([fitter] model)");
        cmd->add_option("--covariates", covariates,
                        "fitter covariates, comma separated ([fitter] covariates)");
        cmd->add_option("--intercept", intercept, "true/false ([fitter] intercept)");
        cmd->add_option("--max-iter", max_iter, "iteration cap ([fitter] max_iter)");
        cmd->add_option("--tol", tol, "convergence tolerance ([fitter] tol)");
        cmd->add_option("--tuning-c", tuning_c, "Huber tuning constant ([fitter] tuning_c)");
        cmd->add_option("--B", B, "bootstrap resamples ([bootstrap] B)");
        cmd->add_option("--refit", refit, "true/false ([bootstrap] refit)");
        cmd->add_option("--alpha", alpha, "interval level ([bootstrap] alpha)");
        cmd->add_option("--out-dir", out_dir, "output directory ([run] out_dir)");
        cmd->add_option("--seed", seed, "analysis seed ([run] seed)");
        cmd->add_option("--threads", threads, "worker threads, 0 = hardware ([run] threads)");
    }

    TextDocument overrides() const {
        TextDocument over;
        auto section_for = [&over](const char* name) -> TextSection& {
            for (TextSection& s : over.sections)
                if (s.name == name) return s;
            return over.add(name);
        };
        auto add = [&](const char* section, const char* key, const std::string& value) {
            if (!value.empty()) section_for(section).set(key, value);
        };
        add("input", "data", data);
        add("input", "schema", schema);
        add("input", "simulate_n", simulate_n);
        add("input", "simulate_seed", simulate_seed);
        add("derive", "interruptions", derive_interruptions);
        add("derive", "tokens", derive_tokens);
        for (const std::string& set : x1) add("analysis", "x1", set);
        add("analysis", "x2", x2);
        add("analysis", "outcome", outcome);
        add("analysis", "group", group);
        add("analysis", "method", method);
        add("analysis", "validate_stacked", validate_stacked);
        add("loss", "kind", loss);
        add("loss", "clip_epsilon", clip_epsilon);
        add("loss", "lambda", lambda);
        add("loss", "risk_p0", risk_p0);
        add("loss", "risk_p1", risk_p1);
        add("fitter", "kind", fitter);
        add("fitter", "model", model);
        add("fitter", "covariates", covariates);
        add("fitter", "intercept", intercept);
        add("fitter", "max_iter", max_iter);
        add("fitter", "tol", tol);
        add("fitter", "tuning_c", tuning_c);
        add("bootstrap", "B", B);
        add("bootstrap", "refit", refit);
        add("bootstrap", "alpha", alpha);
        add("run", "out_dir", out_dir);
        add("run", "seed", seed);
        add("run", "threads", threads);
        return over;
    }

    RunConfig resolve() const {
        TextDocument base;
        if (!config_path.empty()) base = TextDocument::parse_file(config_path);
        RunConfig cfg = RunConfig::parse(merge_config(base, overrides()));
        cfg.validate();
        if (cfg.fitter_configured && cfg.fitter.covariates.empty()) {
            auto push = [&](const std::string& c) {
                auto& cov = cfg.fitter.covariates;
                if (std::find(cov.begin(), cov.end(), c) == cov.end()) cov.push_back(c);
            };
            for (const auto& set : cfg.x1_sets)
                for (const std::string& c : set) push(c);
            for (const std::string& c : cfg.x2_columns) push(c);
        }
        return cfg;
    }
};

// ---- shared command plumbing ----

struct LoadedInput {
    Dataset data;
    LoadReport report;
};

LoadedInput load_input(const RunConfig& cfg) {
    LoadedInput in;
    if (cfg.simulate_n) {
        in.data = simulate_admissions(*cfg.simulate_n, cfg.simulate_seed);
        in.report.rows_kept = in.data.n_rows();
    } else {
        Schema schema = Schema::parse_file(cfg.schema_path);
        in.data = load_csv(cfg.data_path, schema, &in.report);
    }
    if (cfg.derive_rate)
        in.data = derive_interruption_rate(in.data, cfg.derive_interruptions, cfg.derive_tokens,
                                           "interruption_rate", &in.report);
    if (in.data.n_rows() == 0) throw DataError("input has no usable rows");
    return in;
}

void append_load_report(TextDocument& doc, const LoadedInput& in) {
    TextSection& s = doc.add("input_report");
    s.set("provenance", in.data.provenance);
    s.set("rows_kept", std::to_string(in.data.n_rows()));
    s.set("rows_dropped", std::to_string(in.report.rows_dropped));
    const std::size_t cap = 20;
    for (std::size_t i = 0; i < in.report.drops.size() && i < cap; ++i)
        s.set("drop", "row " + std::to_string(in.report.drops[i].first) + ": " +
                          in.report.drops[i].second);
    if (in.report.drops.size() > cap)
        s.set("drops_not_listed", std::to_string(in.report.drops.size() - cap));
}

// Embeds the model (coefficients and fit diagnostics) in the report, tagged
// with the group id for per-group fits.
void append_model(TextDocument& doc, const FittedModel& model, const std::string& group) {
    TextDocument m = model.to_document();
    for (TextSection& s : m.sections) {
        TextSection& target = doc.add(s.name);
        if (!group.empty()) target.set("group", group);
        for (auto& e : s.entries) target.entries.push_back(std::move(e));
    }
}

std::string resolve_outcome(const RunConfig& cfg, const Schema& schema) {
    if (cfg.outcome.empty()) return schema.at(schema.outcome_index()).name;
    if (!schema.find(cfg.outcome))
        throw UsageError("[analysis] outcome column '" + cfg.outcome +
                         "' is not in the schema");
    return cfg.outcome;
}

Partition make_partition(const RunConfig& cfg, const std::vector<std::string>& x1,
                         const std::vector<std::string>& oracle_inputs,
                         const std::string& outcome) {
    Partition p;
    p.x1_columns = x1;
    if (cfg.x2_columns.empty()) {
        for (const std::string& c : oracle_inputs)
            if (std::find(x1.begin(), x1.end(), c) == x1.end()) p.x2_columns.push_back(c);
    } else {
        p.x2_columns = cfg.x2_columns;
    }
    p.outcome = outcome;
    return p;
}

FittedModel resolve_model(const RunConfig& cfg, const Dataset& data,
                          const std::string& outcome) {
    if (!cfg.model_path.empty()) return FittedModel::load(cfg.model_path);
    return cfg.fitter.fit(data, outcome);
}

void require_oracle_source(const RunConfig& cfg) {
    if (!cfg.fitter_configured && cfg.model_path.empty())
        throw UsageError("configure an oracle: [fitter] kind or [fitter] model");
}

void require_x1(const RunConfig& cfg) {
    if (cfg.x1_sets.empty())
        throw UsageError("configure at least one [analysis] x1 covariate set");
}

// Reassigns the group role to the named column so split_by_group follows the
// configuration rather than whatever the schema declared.
Dataset with_group_role(Dataset data, const std::string& group_col) {
    bool found = false;
    for (ColumnSchema& c : data.schema.columns) {
        if (c.name == group_col) {
            if (c.role == ColumnRole::outcome)
                throw UsageError("[analysis] group column '" + group_col +
                                 "' is the outcome column");
            c.role = ColumnRole::group;
            found = true;
        } else if (c.role == ColumnRole::group) {
            c.role = ColumnRole::auxiliary;
        }
    }
    if (!found)
        throw UsageError("[analysis] group column '" + group_col + "' is not in the schema");
    return data;
}

// Splits by group, fits one oracle per group (or reuses a loaded model) and
// ranks.  Groups whose fit fails keep an entry carrying the error and stay
// out of the orderings; model sections for successful fits are appended to
// model_doc.
RankingReport run_grouped(const RunConfig& cfg, const Dataset& data, const RelianceOptions& est,
                          TextDocument& model_doc) {
    Dataset grouped = with_group_role(data, cfg.group_column);
    std::string outcome = resolve_outcome(cfg, grouped.schema);
    auto parts = split_by_group(grouped);
    if (parts.empty())
        throw DataError("group column '" + cfg.group_column + "' has no observed levels");

    std::optional<FittedModel> shared;
    if (!cfg.model_path.empty()) shared = FittedModel::load(cfg.model_path);

    struct Prepared {
        const std::string* id;
        const Dataset* data;
        std::shared_ptr<const Oracle> oracle;
        std::string error;
    };
    std::vector<Prepared> prep;
    for (const auto& [label, part] : parts) {
        Prepared p{&label, &part, nullptr, ""};
        try {
            FittedModel model = shared ? *shared : cfg.fitter.fit(part, outcome);
            p.oracle = model.oracle();
            append_model(model_doc, model, label);
        } catch (const Error& e) {
            p.error = e.what();
        }
        prep.push_back(std::move(p));
    }

    std::vector<GroupInput> ok;
    for (const Prepared& p : prep)
        if (p.error.empty()) ok.push_back({*p.id, p.data, p.oracle});
    if (ok.empty())
        throw DataError("no group could be analyzed; first failure: " + prep.front().error);

    RankOptions ro;
    ro.validate_stacked = cfg.validate_stacked;
    ro.seed = cfg.seed;
    ro.estimate = est;
    RankingReport report = rank_reliance(ok, cfg.loss, cfg.x1_sets, ro);

    if (ok.size() != prep.size()) {
        std::vector<RankEntry> merged;
        std::size_t next = 0;
        for (const Prepared& p : prep) {
            if (p.error.empty()) {
                merged.push_back(std::move(report.entries[next++]));
            } else {
                RankEntry e;
                e.group = *p.id;
                e.n = p.data->n_rows();
                double nan = std::numeric_limits<double>::quiet_NaN();
                for (std::size_t s = 0; s < cfg.x1_sets.size(); ++s) {
                    e.r_hat.push_back(nan);
                    e.b_hat.push_back(nan);
                    e.normalized.push_back(nan);
                    e.errors.push_back(p.error);
                }
                merged.push_back(std::move(e));
            }
        }
        report.entries = std::move(merged);
    }
    return report;
}

void print_measures(const RankingReport& report) {
    for (const RankEntry& entry : report.entries) {
        for (std::size_t s = 0; s < report.set_labels.size(); ++s) {
            std::cout << entry.group << " x1=" << report.set_labels[s] << ": ";
            if (entry.ok(s)) {
                std::cout << "r=" << format_double(entry.r_hat[s])
                          << " b=" << format_double(entry.b_hat[s])
                          << " normalized=" << format_double(entry.normalized[s]) << "\n";
            } else {
                std::cout << "failed (" << entry.errors[s] << ")\n";
            }
        }
    }
}

void print_validation(const StackedValidation& val) {
    if (!val.performed) return;
    std::cout << "stacked identity: max gap " << format_double(val.max_abs_gap)
              << ", orderings " << (val.orderings_match ? "match" : "DIFFER")
              << (val.resampled ? " (groups resampled to equal size)" : "") << "\n";
}

// ---- commands ----

int cmd_simulate(std::size_t n, std::uint64_t seed, const std::string& out_dir_flag) {
    std::string dir = prepare_out_dir(out_dir_flag);
    Dataset cohort = simulate_admissions(n, seed);

    const std::vector<double>& respond = cohort.column("respond");
    const std::vector<double>& admit = cohort.column("admit");
    std::size_t respondents = 0;
    double admits_all = 0.0, admits_resp = 0.0;
    for (std::size_t i = 0; i < cohort.n_rows(); ++i) {
        admits_all += admit[i];
        if (respond[i] == 1.0) {
            ++respondents;
            admits_resp += admit[i];
        }
    }

    write_csv(cohort, dir + "/cohort.csv");
    std::cout << "wrote " << dir << "/cohort.csv\n";
    write_text_file(dir + "/cohort.schema", cohort.schema.to_document().serialize());

    TextDocument doc;
    TextSection& run = doc.add("run");
    run.set("command", "simulate");
    run.set("n", std::to_string(n));
    run.set("seed", std::to_string(seed));
    TextSection& c = doc.add("cohort");
    c.set("rows", std::to_string(cohort.n_rows()));
    c.set("respondents", std::to_string(respondents));
    c.set("respondent_fraction",
          format_double(static_cast<double>(respondents) / static_cast<double>(n)));
    c.set("population_acceptance", format_double(admits_all / static_cast<double>(n)));
    if (respondents > 0)
        c.set("respondent_acceptance",
              format_double(admits_resp / static_cast<double>(respondents)));
    write_text_file(dir + "/simulate.report", doc.serialize());

    std::cout << "simulated " << n << " applicants, " << respondents << " respondents\n";
    return 0;
}

int cmd_bands(std::size_t n, std::uint64_t seed, const std::optional<double>& p_z1,
              bool allow_vacuous, std::size_t threads, const std::string& out_dir_flag) {
    std::string dir = prepare_out_dir(out_dir_flag);
    BandOptions opt;
    if (p_z1) opt.p_z1_override = *p_z1;
    opt.allow_vacuous = allow_vacuous;
    opt.threads = threads;
    BandResult res = run_band_analysis(n, seed, opt);

    const BandCovariate* race = nullptr;
    const BandCovariate* sex = nullptr;
    const BandCovariate* score = nullptr;
    for (const BandCovariate& b : res.bands) {
        if (b.name == "race") race = &b;
        if (b.name == "sex") sex = &b;
        if (b.name == "score") score = &b;
    }
    if (!race || !sex || !score)
        throw DataError("band analysis did not produce race, sex and score bands");
    bool above = race->r_min > score->r_max && sex->r_min > score->r_max;
    bool overlap = race->r_min <= sex->r_max && sex->r_min <= race->r_max;
    bool inside = true;
    for (const BandCovariate& b : res.bands)
        inside = inside && b.r_min <= b.true_value && b.true_value <= b.r_max;
    bool asserted = n >= 1000;

    TextDocument doc;
    TextSection& run = doc.add("run");
    run.set("command", "bands");
    run.set("n", std::to_string(n));
    run.set("seed", std::to_string(seed));
    if (p_z1) run.set("p_z1_override", format_double(*p_z1));
    run.set("threads", std::to_string(threads));
    append_bands(doc, res);
    TextSection& claims = doc.add("claims");
    claims.set("asserted", asserted ? "true" : "false");
    claims.set("race_sex_above_score", above ? "PASS" : "FAIL");
    claims.set("race_sex_overlap", overlap ? "PASS" : "FAIL");
    claims.set("true_values_inside", inside ? "PASS" : "FAIL");

    write_text_file(dir + "/bands.report", doc.serialize());
    write_text_file(dir + "/bands.csv", bands_csv(res));

    const char* note = asserted ? "" : " (informational, n < 1000)";
    std::cout << "race & sex above score: " << (above ? "PASS" : "FAIL") << note << "\n";
    std::cout << "race & sex bands overlap: " << (overlap ? "PASS" : "FAIL") << note << "\n";
    std::cout << "true values inside bands: " << (inside ? "PASS" : "FAIL") << note << "\n";
    return 0;
}

int cmd_reliance(const RunConfig& cfg) {
    require_x1(cfg);
    require_oracle_source(cfg);
    LoadedInput in = load_input(cfg);
    std::string dir = prepare_out_dir(cfg.out_dir);

    TextDocument doc = cfg.to_document();
    append_load_report(doc, in);
    RelianceOptions est;
    est.method = cfg.method;
    est.threads = cfg.threads;

    if (cfg.group_column.empty()) {
        std::string outcome = resolve_outcome(cfg, in.data.schema);
        FittedModel model = resolve_model(cfg, in.data, outcome);
        append_model(doc, model, "");
        std::shared_ptr<const Oracle> oracle = model.oracle();
        for (const std::vector<std::string>& set : cfg.x1_sets) {
            Partition part = make_partition(cfg, set, model.columns, outcome);
            if (cfg.bootstrap) {
                if (cfg.bootstrap_refit && !cfg.fitter_configured)
                    throw UsageError("[bootstrap] refit needs a [fitter] kind, not a model file");
                BootstrapOptions bo;
                bo.B = cfg.bootstrap_B;
                bo.seed = cfg.seed;
                bo.refit = cfg.bootstrap_refit;
                bo.fitter = &cfg.fitter;
                bo.alpha = cfg.bootstrap_alpha;
                bo.estimate = est;
                BootstrapResult res = bootstrap_reliance(in.data, oracle.get(), cfg.loss, part, bo);
                append_bootstrap(doc, res, cfg.bootstrap_alpha);
                std::cout << "x1=" << join(set, "+") << ": r=" << format_double(res.point.r_hat)
                          << " b=" << format_double(res.point.b_hat)
                          << " normalized=" << format_double(res.point.normalized)
                          << " normalized interval ["
                          << format_double(res.normalized_interval.r_min) << ", "
                          << format_double(res.normalized_interval.r_max) << "]\n";
            } else {
                RelianceEstimate res = estimate_reliance(in.data, *oracle, cfg.loss, part, est);
                append_estimate(doc, res);
                std::cout << "x1=" << join(set, "+") << ": r=" << format_double(res.r_hat)
                          << " b=" << format_double(res.b_hat)
                          << " normalized=" << format_double(res.normalized) << "\n";
            }
        }
    } else {
        TextDocument models;
        RankingReport report = run_grouped(cfg, in.data, est, models);
        append_rank_measures(doc, report);
        for (TextSection& s : models.sections) doc.sections.push_back(std::move(s));
        print_measures(report);
        print_validation(report.validation);
    }

    write_text_file(dir + "/reliance.report", doc.serialize());
    return 0;
}

int cmd_parity(const RunConfig& cfg) {
    require_x1(cfg);
    if (cfg.x1_sets.size() != 1)
        throw UsageError("parity tests exactly one [analysis] x1 set, got " +
                         std::to_string(cfg.x1_sets.size()));
    if (!cfg.group_column.empty())
        throw UsageError("parity runs on the whole sample; remove [analysis] group");
    if (!cfg.fitter_configured)
        throw UsageError("parity refits the model; configure [fitter] kind, not a model file");

    LoadedInput in = load_input(cfg);
    std::string dir = prepare_out_dir(cfg.out_dir);
    TextDocument doc = cfg.to_document();
    append_load_report(doc, in);

    std::string outcome = resolve_outcome(cfg, in.data.schema);
    FittedModel model = cfg.fitter.fit(in.data, outcome);
    append_model(doc, model, "");

    RelianceOptions est;
    est.method = cfg.method;
    est.threads = cfg.threads;
    Partition part = make_partition(cfg, cfg.x1_sets.front(), cfg.fitter.covariates, outcome);
    ParityResult res =
        parity_test(in.data, cfg.fitter, cfg.loss, part, cfg.bootstrap_B, cfg.seed, est);
    append_parity(doc, res);

    write_text_file(dir + "/parity.report", doc.serialize());
    std::cout << "parity: statistic=" << format_double(res.statistic)
              << " p_value=" << format_double(res.p_value) << " dof=" << res.dof
              << " B=" << res.B << " seed=" << cfg.seed << "\n";
    return 0;
}

int cmd_rank(const RunConfig& cfg) {
    require_x1(cfg);
    require_oracle_source(cfg);
    if (cfg.group_column.empty())
        throw UsageError("rank needs an [analysis] group column");

    LoadedInput in = load_input(cfg);
    std::string dir = prepare_out_dir(cfg.out_dir);
    TextDocument doc = cfg.to_document();
    append_load_report(doc, in);
    RelianceOptions est;
    est.method = cfg.method;
    est.threads = cfg.threads;

    TextDocument models;
    RankingReport report = run_grouped(cfg, in.data, est, models);
    append_rank_orderings(doc, report);
    append_rank_measures(doc, report);
    for (TextSection& s : models.sections) doc.sections.push_back(std::move(s));

    write_text_file(dir + "/rank.report", doc.serialize());
    write_text_file(dir + "/rank.csv", ranking_csv(report));

    for (std::size_t s = 0; s < report.set_labels.size(); ++s)
        std::cout << "ranking x1=" << report.set_labels[s] << ": "
                  << join(report.orderings[s], " > ") << "\n";
    print_validation(report.validation);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Covariate reliance auditing toolkit"};
    app.require_subcommand(1);

    CLI::App* sim = app.add_subcommand("simulate", "Simulate the admissions cohort");
    std::size_t sim_n = 0;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    sim->add_option("--n", sim_n, "cohort size")->required();
    sim->add_option("--seed", sim_seed, "simulator seed");
    sim->add_option("--out-dir", sim_out, "output directory");

    CLI::App* bands = app.add_subcommand(
        "bands", "Reliance bounds for the admissions study under survey selection");
    std::size_t bands_n = 10000;
    std::uint64_t bands_seed = 7;
    std::size_t bands_threads = 1;
    double bands_p_z1 = 0.0;
    bool bands_vacuous = false;
    std::string bands_out;
    bands->add_option("--n", bands_n, "cohort size");
    bands->add_option("--seed", bands_seed, "simulator seed");
    CLI::Option* p_z1_opt =
        bands->add_option("--p-z1", bands_p_z1, "override the response probability");
    bands->add_flag("--allow-vacuous", bands_vacuous, "accept the vacuous [0,1] envelope");
    bands->add_option("--threads", bands_threads, "worker threads, 0 = hardware");
    bands->add_option("--out-dir", bands_out, "output directory");

    CLI::App* rel = app.add_subcommand("reliance", "Reliance estimates from a run config");
    ConfigFlags rel_flags;
    rel_flags.attach(rel);

    CLI::App* par = app.add_subcommand("parity", "Conditional statistical parity test");
    ConfigFlags par_flags;
    par_flags.attach(par);

    CLI::App* rank = app.add_subcommand("rank", "Rank decision-makers by normalized reliance");
    ConfigFlags rank_flags;
    rank_flags.attach(rank);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: usage: " << e.what() << "\n";
        return 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_n, sim_seed, sim_out);
        if (bands->parsed()) {
            std::optional<double> p_z1;
            if (p_z1_opt->count() > 0) p_z1 = bands_p_z1;
            return cmd_bands(bands_n, bands_seed, p_z1, bands_vacuous, bands_threads, bands_out);
        }
        if (rel->parsed()) return cmd_reliance(rel_flags.resolve());
        if (par->parsed()) return cmd_parity(par_flags.resolve());
        if (rank->parsed()) return cmd_rank(rank_flags.resolve());
        std::cerr << "error: usage: no command given\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: numeric: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
}

} // namespace rely
