#include "cyclebench/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cyclebench {

namespace {

constexpr const char* kMagic = "cyclebench-checkpoint v1";

std::string hexf(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hexf(const std::string& s, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(path + ": bad numeric value '" + s + "'");
    return v;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

// Reads "key rest-of-line"; throws if the key differs.
std::string expect_kv(std::istream& in, const std::string& key, const std::string& path) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": truncated checkpoint (expected '" + key + "')");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto sp = line.find(' ');
    const std::string k = sp == std::string::npos ? line : line.substr(0, sp);
    if (k != key)
        throw std::runtime_error(path + ": expected key '" + key + "', found '" + k + "'");
    return sp == std::string::npos ? std::string() : line.substr(sp + 1);
}

std::vector<double> parse_vec(const std::string& s, const std::string& path) {
    std::vector<double> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(parse_hexf(tok, path));
    return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const CheckpointMeta& meta) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << kMagic << "\n";
    out << "kind " << to_string(params.kind) << "\n";
    out << "h_source " << to_string(params.h_source) << "\n";
    out << "width " << params.width << "\n";
    out << "input_dim " << params.input_dim << "\n";
    out << "lag " << meta.lag << "\n";
    out << "seed " << meta.seed << "\n";
    out << "feature_names " << join(meta.feature_names, ',') << "\n";
    out << "feature_mean";
    for (double v : meta.feature_mean) out << ' ' << hexf(v);
    out << "\n";
    out << "feature_sd";
    for (double v : meta.feature_sd) out << ' ' << hexf(v);
    out << "\n";
    out << "target_mean " << hexf(meta.target_mean) << "\n";
    out << "target_sd " << hexf(meta.target_sd) << "\n";
    auto refs = tensor_refs(params);
    out << "tensors " << refs.size() << "\n";
    for (const auto& r : refs) {
        out << "tensor " << r.name << ' ' << r.rows << ' ' << r.cols << "\n";
        // one line per row, row-major within the line
        for (Eigen::Index i = 0; i < r.rows; ++i) {
            for (Eigen::Index j = 0; j < r.cols; ++j) {
                if (j) out << ' ';
                out << hexf(r.data[j * r.rows + i]);  // column-major storage
            }
            out << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failure on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty checkpoint");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMagic)
        throw std::runtime_error(path + ": not a cyclebench checkpoint (bad magic line)");

    const ModelKind kind = model_kind_from_string(expect_kv(in, "kind", path));
    const LstmHSource hs = h_source_from_string(expect_kv(in, "h_source", path));
    const int width = std::stoi(expect_kv(in, "width", path));
    const int input_dim = std::stoi(expect_kv(in, "input_dim", path));

    Checkpoint ck;
    ck.meta.lag = std::stoi(expect_kv(in, "lag", path));
    ck.meta.seed = std::stoull(expect_kv(in, "seed", path));
    const std::string names = expect_kv(in, "feature_names", path);
    if (!names.empty()) ck.meta.feature_names = split(names, ',');
    ck.meta.feature_mean = parse_vec(expect_kv(in, "feature_mean", path), path);
    ck.meta.feature_sd = parse_vec(expect_kv(in, "feature_sd", path), path);
    ck.meta.target_mean = parse_hexf(expect_kv(in, "target_mean", path), path);
    ck.meta.target_sd = parse_hexf(expect_kv(in, "target_sd", path), path);

    ck.params = make_model(kind, width, input_dim, hs);
    auto refs = tensor_refs(ck.params);
    const std::size_t n_tensors = std::stoul(expect_kv(in, "tensors", path));
    if (n_tensors != refs.size())
        throw std::runtime_error(path + ": tensor count " + std::to_string(n_tensors) +
                                 " does not match architecture (" +
                                 std::to_string(refs.size()) + ")");
    for (auto& r : refs) {
        const std::string head = expect_kv(in, "tensor", path);
        std::istringstream hs_in(head);
        std::string name;
        Eigen::Index rows = 0, cols = 0;
        hs_in >> name >> rows >> cols;
        if (name != r.name || rows != r.rows || cols != r.cols)
            throw std::runtime_error(path + ": tensor header mismatch, expected '" + r.name +
                                     " " + std::to_string(r.rows) + " " +
                                     std::to_string(r.cols) + "', found '" + head + "'");
        for (Eigen::Index i = 0; i < r.rows; ++i) {
            if (!std::getline(in, line))
                throw std::runtime_error(path + ": truncated tensor " + r.name);
            std::istringstream row(line);
            std::string tok;
            for (Eigen::Index j = 0; j < r.cols; ++j) {
                if (!(row >> tok))
                    throw std::runtime_error(path + ": short row in tensor " + r.name);
                r.data[j * r.rows + i] = parse_hexf(tok, path);
            }
        }
    }
    return ck;
}

}  // namespace cyclebench
