#include "cyclebench/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cyclebench {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

[[noreturn]] void bad(const std::string& name, int line, const std::string& what) {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

TomlLite TomlLite::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

TomlLite TomlLite::parse_text(const std::string& text, const std::string& name) {
    TomlLite t;
    t.name_ = name;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') bad(name, lineno, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) bad(name, lineno, "empty section name");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) bad(name, lineno, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) bad(name, lineno, "empty key");
        std::string raw = trim(s.substr(eq + 1));
        if (raw.empty()) bad(name, lineno, "empty value for '" + key + "'");

        Value v;
        auto parse_scalar = [&](const std::string& tok) {
            Value sv;
            if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
                sv.kind = Value::Kind::string;
                sv.str = tok.substr(1, tok.size() - 2);
            } else if (tok == "true" || tok == "false") {
                sv.kind = Value::Kind::boolean;
                sv.flag = tok == "true";
            } else if (parse_number(tok, sv.num)) {
                sv.kind = Value::Kind::number;
            } else {
                bad(name, lineno, "cannot parse value '" + tok + "' for '" + key + "'");
            }
            return sv;
        };

        if (raw.front() == '[') {
            const std::size_t close = raw.find(']');
            if (close == std::string::npos) bad(name, lineno, "unterminated array");
            const std::string tail = trim(raw.substr(close + 1));
            if (!tail.empty() && tail[0] != '#')
                bad(name, lineno, "trailing content after array");
            std::string inner = trim(raw.substr(1, close - 1));
            std::vector<Value> items;
            while (!inner.empty()) {
                std::size_t cut;
                if (inner.front() == '"') {
                    const std::size_t q = inner.find('"', 1);
                    if (q == std::string::npos) bad(name, lineno, "unterminated string");
                    cut = inner.find(',', q);
                } else {
                    cut = inner.find(',');
                }
                const std::string tok = trim(cut == std::string::npos ? inner : inner.substr(0, cut));
                if (tok.empty()) bad(name, lineno, "empty array element");
                items.push_back(parse_scalar(tok));
                inner = cut == std::string::npos ? "" : trim(inner.substr(cut + 1));
            }
            if (items.empty()) {
                v.kind = Value::Kind::string_array;
            } else if (items.front().kind == Value::Kind::string) {
                v.kind = Value::Kind::string_array;
                for (const auto& it : items) {
                    if (it.kind != Value::Kind::string)
                        bad(name, lineno, "mixed-type array for '" + key + "'");
                    v.strs.push_back(it.str);
                }
            } else {
                v.kind = Value::Kind::number_array;
                for (const auto& it : items) {
                    if (it.kind != Value::Kind::number)
                        bad(name, lineno, "mixed-type array for '" + key + "'");
                    v.nums.push_back(it.num);
                }
            }
        } else {
            std::string tok = raw;
            if (raw.front() == '"') {
                const std::size_t q = raw.find('"', 1);
                if (q == std::string::npos) bad(name, lineno, "unterminated string");
                const std::string tail = trim(raw.substr(q + 1));
                if (!tail.empty() && tail[0] != '#')
                    bad(name, lineno, "trailing content after string");
                tok = raw.substr(0, q + 1);
            } else {
                const std::size_t hash = raw.find('#');
                if (hash != std::string::npos) tok = trim(raw.substr(0, hash));
            }
            v = parse_scalar(tok);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (t.values_.count(full)) bad(name, lineno, "duplicate key '" + full + "'");
        t.values_[full] = std::move(v);
    }
    return t;
}

const TomlLite::Value& TomlLite::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(name_ + ": missing required key '" + key + "'");
    return it->second;
}

bool TomlLite::has(const std::string& key) const { return values_.count(key) > 0; }

std::string TomlLite::get_string(const std::string& key) const {
    const Value& v = at(key);
    if (v.kind != Value::Kind::string)
        throw ConfigError(name_ + ": '" + key + "' must be a quoted string");
    return v.str;
}

std::string TomlLite::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double TomlLite::get_number(const std::string& key) const {
    const Value& v = at(key);
    if (v.kind != Value::Kind::number)
        throw ConfigError(name_ + ": '" + key + "' must be a number");
    return v.num;
}

double TomlLite::get_number(const std::string& key, double fallback) const {
    return has(key) ? get_number(key) : fallback;
}

bool TomlLite::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = at(key);
    if (v.kind != Value::Kind::boolean)
        throw ConfigError(name_ + ": '" + key + "' must be true or false");
    return v.flag;
}

std::vector<std::string> TomlLite::get_string_array(
    const std::string& key, const std::vector<std::string>& fallback) const {
    if (!has(key)) return fallback;
    const Value& v = at(key);
    if (v.kind != Value::Kind::string_array)
        throw ConfigError(name_ + ": '" + key + "' must be an array of strings");
    return v.strs;
}

std::vector<double> TomlLite::get_number_array(const std::string& key,
                                               const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const Value& v = at(key);
    if (v.kind != Value::Kind::number_array)
        throw ConfigError(name_ + ": '" + key + "' must be an array of numbers");
    return v.nums;
}

std::vector<std::string> TomlLite::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

std::string to_string(TrainVariant v) {
    return v == TrainVariant::iswor ? "iswor" : "iswr";
}

TrainVariant train_variant_from_string(const std::string& s) {
    if (s == "iswor") return TrainVariant::iswor;
    if (s == "iswr") return TrainVariant::iswr;
    throw ConfigError("unknown train variant '" + s + "' (expected iswor or iswr)");
}

namespace {

int to_int(double v, const std::string& key) {
    if (std::floor(v) != v || std::abs(v) > 1e9)
        throw ConfigError("'" + key + "' must be an integer, got " + std::to_string(v));
    return static_cast<int>(v);
}

std::vector<int> to_int_vec(const std::vector<double>& v, const std::string& key) {
    std::vector<int> out;
    for (double x : v) {
        out.push_back(to_int(x, key));
        if (out.back() < 1) throw ConfigError("'" + key + "' entries must be positive");
    }
    return out;
}

}  // namespace

ExperimentConfig experiment_config_from(const TomlLite& toml) {
    static const std::set<std::string> known = {
        "data.prices",     "data.factors",    "data.recessions", "data.factors_percent",
        "features.use_rf", "models",          "lstm_h_source",   "train.variants",
        "train.seed",      "train.lr",        "train.l2",        "train.dropout",
        "train.patience",  "train.max_epochs", "train.batch",    "grid.width",
        "grid.lag",        "out.dir",
    };
    for (const std::string& k : toml.keys())
        if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");

    ExperimentConfig cfg;
    cfg.prices_path = toml.get_string("data.prices");
    cfg.factors_path = toml.get_string("data.factors");
    cfg.recessions_path = toml.get_string("data.recessions");
    cfg.factors_percent = toml.get_bool("data.factors_percent", true);
    cfg.use_rf = toml.get_bool("features.use_rf", false);

    cfg.kinds.clear();
    for (const std::string& s : toml.get_string_array("models", {"lstm", "blstm", "gru"})) {
        try {
            cfg.kinds.push_back(model_kind_from_string(s));
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.kinds.empty()) throw ConfigError("'models' must name at least one model kind");
    std::sort(cfg.kinds.begin(), cfg.kinds.end());
    if (std::adjacent_find(cfg.kinds.begin(), cfg.kinds.end()) != cfg.kinds.end())
        throw ConfigError("'models' lists a kind twice");

    try {
        cfg.lstm_h_source = h_source_from_string(toml.get_string("lstm_h_source", "candidate"));
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    cfg.variants.clear();
    for (const std::string& s : toml.get_string_array("train.variants", {"iswor"}))
        cfg.variants.push_back(train_variant_from_string(s));
    if (cfg.variants.empty()) throw ConfigError("'train.variants' must not be empty");
    std::sort(cfg.variants.begin(), cfg.variants.end());
    if (std::adjacent_find(cfg.variants.begin(), cfg.variants.end()) != cfg.variants.end())
        throw ConfigError("'train.variants' lists a variant twice");

    cfg.grid.widths = to_int_vec(toml.get_number_array("grid.width", {32, 64, 128}), "grid.width");
    cfg.grid.lags = to_int_vec(toml.get_number_array("grid.lag", {5, 7, 9}), "grid.lag");
    if (cfg.grid.widths.empty() || cfg.grid.lags.empty())
        throw ConfigError("grid arrays must not be empty");

    cfg.train.seed = static_cast<std::uint64_t>(toml.get_number("train.seed", 42));
    cfg.train.lr = toml.get_number("train.lr", 1e-3);
    cfg.train.l2 = toml.get_number("train.l2", 1e-2);
    cfg.train.dropout = toml.get_number("train.dropout", 0.2);
    cfg.train.patience = to_int(toml.get_number("train.patience", 10), "train.patience");
    cfg.train.max_epochs = to_int(toml.get_number("train.max_epochs", 200), "train.max_epochs");
    cfg.train.batch = to_int(toml.get_number("train.batch", 32), "train.batch");
    if (cfg.train.lr <= 0 || cfg.train.batch < 1 || cfg.train.max_epochs < 0 ||
        cfg.train.patience < 0 || cfg.train.dropout < 0 || cfg.train.dropout >= 1 ||
        cfg.train.l2 < 0)
        throw ConfigError("invalid train.* settings");

    cfg.out_dir = toml.get_string("out.dir", "out");
    if (cfg.out_dir.empty()) throw ConfigError("'out.dir' must not be empty");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from(TomlLite::parse_file(path));
}

}  // namespace cyclebench
