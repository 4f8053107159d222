#pragma once
// Run configuration: a small TOML-style reader (sections, scalars, one-line
// arrays) and the typed experiment config it feeds.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclebench/model.hpp"
#include "cyclebench/training.hpp"

namespace cyclebench {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat "section.key" -> value map. Supported values: quoted strings, numbers,
// true/false, and one-line arrays of strings or numbers. No nested tables.
class TomlLite {
public:
    static TomlLite parse_file(const std::string& path);
    static TomlLite parse_text(const std::string& text, const std::string& name);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key) const;
    double get_number(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_string_array(const std::string& key,
                                              const std::vector<std::string>& fallback) const;
    std::vector<double> get_number_array(const std::string& key,
                                         const std::vector<double>& fallback) const;
    std::vector<std::string> keys() const;

private:
    struct Value {
        enum class Kind { string, number, boolean, string_array, number_array };
        Kind kind = Kind::string;
        std::string str;
        double num = 0.0;
        bool flag = false;
        std::vector<std::string> strs;
        std::vector<double> nums;
    };
    const Value& at(const std::string& key) const;
    std::map<std::string, Value> values_;
    std::string name_;
};

enum class TrainVariant { iswor = 0, iswr = 1 };
std::string to_string(TrainVariant v);
TrainVariant train_variant_from_string(const std::string& s);

struct ExperimentConfig {
    std::string prices_path, factors_path, recessions_path;
    bool factors_percent = true;
    bool use_rf = false;
    std::vector<ModelKind> kinds{ModelKind::lstm, ModelKind::blstm, ModelKind::gru};
    LstmHSource lstm_h_source = LstmHSource::candidate;
    std::vector<TrainVariant> variants{TrainVariant::iswor};
    GridSpec grid;
    TrainConfig train;  // seed defaults to 42 when loaded from a file
    std::string out_dir = "out";
};

// Throws ConfigError on unknown keys, wrong types or invalid combinations.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from(const TomlLite& toml);

}  // namespace cyclebench
