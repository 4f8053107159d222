#pragma once
// Shared helpers for the test binaries: scratch directories that clean up
// after themselves and tiny in-memory panels.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cyclebench/market_data.hpp"

namespace cyclebench::testutil {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// n weekday rows starting 2000-01-03; close = 100 + i, one extra linear
// feature; recession flag wherever pred(i) holds.
template <typename Pred>
FeaturePanel linear_panel(int n, Pred rec) {
    FeaturePanel p;
    p.features.resize(n, 2);
    Date d{2000, 1, 3};
    for (int i = 0; i < n; ++i) {
        p.dates.push_back(d);
        d = next_weekday(d);
        p.features(i, 0) = 100.0 + i;
        p.features(i, 1) = 0.5 * i - 3.0;
        p.target.push_back(100.0 + i);
        p.recession.push_back(rec(i) ? 1 : 0);
    }
    p.feature_names = {"close", "aux"};
    return p;
}

inline FeaturePanel linear_panel(int n) {
    return linear_panel(n, [](int) { return false; });
}

}  // namespace cyclebench::testutil
