// Run configuration for the audit commands.  A config file is the single
// source of truth for a run; command-line flags override individual fields
// one-to-one via merge_config, and reports embed the resolved result, so a
// report always records exactly what was computed.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rely/fit.hpp"
#include "rely/losses.hpp"
#include "rely/reliance.hpp"
#include "rely/text_format.hpp"

namespace rely {

struct RunConfig {
    // [input] exactly one source: a CSV file read under a schema, or the
    // admissions simulator.
    std::string data_path;
    std::string schema_path;
    std::optional<std::size_t> simulate_n;
    std::uint64_t simulate_seed = 0;

    // [derive] appends an interruption_rate outcome from two count columns.
    bool derive_rate = false;
    std::string derive_interruptions;
    std::string derive_tokens;

    // [analysis]
    std::vector<std::vector<std::string>> x1_sets;  // one entry per x1 line
    std::vector<std::string> x2_columns;  // empty: fitter covariates not in x1
    std::string outcome;                  // empty: the schema's outcome column
    std::string group_column;             // empty: whole-sample analysis
    RelianceMethod method = RelianceMethod::automatic;
    bool validate_stacked = false;

    // [loss]
    LossSpec loss;

    // [fitter] a fitter kind, or a saved model file to load instead.
    FitterSpec fitter;
    bool fitter_configured = false;
    std::string model_path;

    // [bootstrap] intervals are computed when the section is present.
    bool bootstrap = false;
    std::size_t bootstrap_B = 1000;
    bool bootstrap_refit = false;
    double bootstrap_alpha = 0.05;

    // [run]
    std::string out_dir;     // empty: RELY_OUT_DIR, then the working directory
    std::uint64_t seed = 0;  // bootstrap, parity and ranking alignment seed
    std::size_t threads = 1;

    // Strict parse: unknown sections or keys are usage errors.
    static RunConfig parse(const TextDocument& doc);
    static RunConfig parse_file(const std::string& path);

    // Structural checks shared by every command: exactly one input source,
    // schema present with a data path, fitter kind and model file mutually
    // exclusive, loss spec coherent, x1 sets free of duplicates.
    void validate() const;

    // The effective configuration with defaults written out, embedded at the
    // top of every report.
    TextDocument to_document() const;
};

// Overlays override entries onto base, section by section.  The first
// override entry for a key drops every base entry with that key, so one
// --x1 flag replaces all configured x1 sets while untouched keys survive.
TextDocument merge_config(const TextDocument& base, const TextDocument& overrides);

} // namespace rely
