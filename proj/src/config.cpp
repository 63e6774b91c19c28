#include "rely/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <set>

#include "rely/errors.hpp"

namespace rely {

namespace {

void check_keys(const TextSection& section, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : section.entries) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw UsageError("config section [" + section.name + "] has unknown key '" + key +
                             "'");
    }
}

std::size_t parse_size(const std::string& text, std::string_view what) {
    long long v = parse_int(text, what);
    if (v < 0) throw UsageError(std::string(what) + " must be nonnegative, got " + text);
    return static_cast<std::size_t>(v);
}

std::uint64_t parse_seed(const std::string& text, std::string_view what) {
    long long v = parse_int(text, what);
    if (v < 0) throw UsageError(std::string(what) + " must be nonnegative, got " + text);
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> parse_columns(const std::string& text, std::string_view what) {
    std::vector<std::string> out;
    for (const std::string& part : split(text, ',')) {
        std::string name = trim(part);
        if (name.empty())
            throw UsageError(std::string(what) + " has an empty column name in '" + text + "'");
        out.push_back(std::move(name));
    }
    if (out.empty()) throw UsageError(std::string(what) + " lists no columns");
    return out;
}

const TextSection* unique_section(const TextDocument& doc, std::string_view name) {
    auto all = doc.find_all(name);
    if (all.size() > 1)
        throw UsageError("config repeats section [" + std::string(name) + "]");
    return all.empty() ? nullptr : all.front();
}

} // namespace

RunConfig RunConfig::parse(const TextDocument& doc) {
    static const std::set<std::string> kSections = {"input", "derive",    "analysis", "loss",
                                                    "fitter", "bootstrap", "run"};
    for (const TextSection& s : doc.sections)
        if (!kSections.count(s.name))
            throw UsageError("config has unknown section [" + s.name + "]");

    RunConfig cfg;

    if (const TextSection* s = unique_section(doc, "input")) {
        check_keys(*s, {"data", "schema", "simulate_n", "simulate_seed"});
        if (auto v = s->get("data")) cfg.data_path = *v;
        if (auto v = s->get("schema")) cfg.schema_path = *v;
        if (auto v = s->get("simulate_n")) cfg.simulate_n = parse_size(*v, "[input] simulate_n");
        if (auto v = s->get("simulate_seed"))
            cfg.simulate_seed = parse_seed(*v, "[input] simulate_seed");
    }

    if (const TextSection* s = unique_section(doc, "derive")) {
        check_keys(*s, {"interruptions", "tokens"});
        cfg.derive_rate = true;
        cfg.derive_interruptions = s->require("interruptions");
        cfg.derive_tokens = s->require("tokens");
    }

    if (const TextSection* s = unique_section(doc, "analysis")) {
        check_keys(*s, {"x1", "x2", "outcome", "group", "method", "validate_stacked"});
        for (const std::string& line : s->get_all("x1"))
            cfg.x1_sets.push_back(parse_columns(line, "[analysis] x1"));
        if (auto v = s->get("x2")) cfg.x2_columns = parse_columns(*v, "[analysis] x2");
        if (auto v = s->get("outcome")) cfg.outcome = *v;
        if (auto v = s->get("group")) cfg.group_column = *v;
        if (auto v = s->get("method")) cfg.method = reliance_method_from_name(*v);
        if (auto v = s->get("validate_stacked"))
            cfg.validate_stacked = parse_bool(*v, "[analysis] validate_stacked");
    }

    if (const TextSection* s = unique_section(doc, "loss")) {
        check_keys(*s, {"kind", "clip_epsilon", "lambda", "risk_p0", "risk_p1"});
        if (auto v = s->get("kind")) cfg.loss.kind = loss_kind_from_name(*v);
        if (auto v = s->get("clip_epsilon"))
            cfg.loss.clip_epsilon = parse_double(*v, "[loss] clip_epsilon");
        if (auto v = s->get("lambda")) cfg.loss.lambda = parse_double(*v, "[loss] lambda");
        if (auto v = s->get("risk_p0")) cfg.loss.risk_p0_column = *v;
        if (auto v = s->get("risk_p1")) cfg.loss.risk_p1_column = *v;
    }

    if (const TextSection* s = unique_section(doc, "fitter")) {
        check_keys(*s, {"kind", "model", "covariates", "intercept", "max_iter", "tol",
                        "tuning_c"});
        if (auto v = s->get("kind")) {
            if (*v != "ols" && *v != "logistic" && *v != "huber")
                throw UsageError("[fitter] kind must be ols, logistic or huber, got '" + *v +
                                 "'");
            cfg.fitter.fitter = *v;
            cfg.fitter_configured = true;
        }
        if (auto v = s->get("model")) cfg.model_path = *v;
        if (auto v = s->get("covariates"))
            cfg.fitter.covariates = parse_columns(*v, "[fitter] covariates");
        if (auto v = s->get("intercept"))
            cfg.fitter.options.intercept = parse_bool(*v, "[fitter] intercept");
        if (auto v = s->get("max_iter"))
            cfg.fitter.options.max_iter = parse_size(*v, "[fitter] max_iter");
        if (auto v = s->get("tol")) cfg.fitter.options.tol = parse_double(*v, "[fitter] tol");
        if (auto v = s->get("tuning_c"))
            cfg.fitter.options.tuning_c = parse_double(*v, "[fitter] tuning_c");
    }

    if (const TextSection* s = unique_section(doc, "bootstrap")) {
        check_keys(*s, {"B", "refit", "alpha"});
        cfg.bootstrap = true;
        if (auto v = s->get("B")) cfg.bootstrap_B = parse_size(*v, "[bootstrap] B");
        if (auto v = s->get("refit")) cfg.bootstrap_refit = parse_bool(*v, "[bootstrap] refit");
        if (auto v = s->get("alpha")) cfg.bootstrap_alpha = parse_double(*v, "[bootstrap] alpha");
    }

    if (const TextSection* s = unique_section(doc, "run")) {
        check_keys(*s, {"out_dir", "seed", "threads"});
        if (auto v = s->get("out_dir")) cfg.out_dir = *v;
        if (auto v = s->get("seed")) cfg.seed = parse_seed(*v, "[run] seed");
        if (auto v = s->get("threads")) cfg.threads = parse_size(*v, "[run] threads");
    }

    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    return parse(TextDocument::parse_file(path));
}

void RunConfig::validate() const {
    bool has_data = !data_path.empty();
    bool has_sim = simulate_n.has_value();
    if (has_data && has_sim)
        throw UsageError("config sets both [input] data and [input] simulate_n; pick one");
    if (!has_data && !has_sim)
        throw UsageError("config needs an input source: [input] data or [input] simulate_n");
    if (has_data && schema_path.empty())
        throw UsageError("[input] data needs a companion [input] schema file");
    if (has_sim && !schema_path.empty())
        throw UsageError("[input] schema does not apply to simulated input");
    if (has_sim && *simulate_n < 1) throw UsageError("[input] simulate_n must be at least 1");

    if (fitter_configured && !model_path.empty())
        throw UsageError("[fitter] sets both kind and model; pick one");

    loss.validate();

    for (const std::vector<std::string>& set : x1_sets) {
        std::set<std::string> seen;
        for (const std::string& name : set)
            if (!seen.insert(name).second)
                throw UsageError("[analysis] x1 set lists column '" + name + "' twice");
    }

    if (bootstrap) {
        if (bootstrap_B < 1) throw UsageError("[bootstrap] B must be at least 1");
        if (!(bootstrap_alpha > 0.0 && bootstrap_alpha < 1.0))
            throw UsageError("[bootstrap] alpha must be in (0, 1)");
    }
}

TextDocument RunConfig::to_document() const {
    TextDocument doc;

    TextSection& in = doc.add("input");
    if (!data_path.empty()) {
        in.set("data", data_path);
        in.set("schema", schema_path);
    }
    if (simulate_n) {
        in.set("simulate_n", std::to_string(*simulate_n));
        in.set("simulate_seed", std::to_string(simulate_seed));
    }

    if (derive_rate) {
        TextSection& d = doc.add("derive");
        d.set("interruptions", derive_interruptions);
        d.set("tokens", derive_tokens);
    }

    TextSection& a = doc.add("analysis");
    for (const std::vector<std::string>& set : x1_sets) a.set("x1", join(set, ","));
    if (!x2_columns.empty()) a.set("x2", join(x2_columns, ","));
    if (!outcome.empty()) a.set("outcome", outcome);
    if (!group_column.empty()) a.set("group", group_column);
    a.set("method", reliance_method_name(method));
    a.set("validate_stacked", validate_stacked ? "true" : "false");

    TextSection& l = doc.add("loss");
    l.set("kind", loss_kind_name(loss.kind));
    if (loss.kind == LossKind::cross_entropy)
        l.set("clip_epsilon", format_double(loss.clip_epsilon));
    if (loss.kind == LossKind::utility) {
        l.set("lambda", format_double(loss.lambda));
        l.set("risk_p0", loss.risk_p0_column);
        l.set("risk_p1", loss.risk_p1_column);
    }

    if (fitter_configured || !model_path.empty()) {
        TextSection& f = doc.add("fitter");
        if (!model_path.empty()) {
            f.set("model", model_path);
        } else {
            f.set("kind", fitter.fitter);
            if (!fitter.covariates.empty()) f.set("covariates", join(fitter.covariates, ","));
            f.set("intercept", fitter.options.intercept ? "true" : "false");
            f.set("max_iter", std::to_string(fitter.options.max_iter));
            if (fitter.options.tol != 0.0) f.set("tol", format_double(fitter.options.tol));
            if (fitter.fitter == "huber")
                f.set("tuning_c", format_double(fitter.options.tuning_c));
        }
    }

    if (bootstrap) {
        TextSection& b = doc.add("bootstrap");
        b.set("B", std::to_string(bootstrap_B));
        b.set("refit", bootstrap_refit ? "true" : "false");
        b.set("alpha", format_double(bootstrap_alpha));
    }

    TextSection& r = doc.add("run");
    if (!out_dir.empty()) r.set("out_dir", out_dir);
    r.set("seed", std::to_string(seed));
    r.set("threads", std::to_string(threads));

    return doc;
}

TextDocument merge_config(const TextDocument& base, const TextDocument& overrides) {
    TextDocument merged = base;
    for (const TextSection& over : overrides.sections) {
        TextSection* target = nullptr;
        for (TextSection& s : merged.sections)
            if (s.name == over.name) target = &s;
        if (!target) {
            merged.sections.push_back(over);
            continue;
        }
        std::set<std::string> replaced;
        for (const auto& [key, value] : over.entries) {
            if (replaced.insert(key).second) {
                auto& es = target->entries;
                es.erase(std::remove_if(es.begin(), es.end(),
                                        [&](const auto& e) { return e.first == key; }),
                         es.end());
            }
            target->set(key, value);
        }
    }
    return merged;
}

} // namespace rely
