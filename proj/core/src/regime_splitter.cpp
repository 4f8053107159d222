#include "cyclebench/regime_splitter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cyclebench {

namespace {

std::vector<int> range_rows(int first, int last) {
    std::vector<int> out;
    out.reserve(size_t(std::max(0, last - first + 1)));
    for (int r = first; r <= last; ++r) out.push_back(r);
    return out;
}

int ceil_share(double share, int n) { return int(std::ceil(share * n - 1e-9)); }

// ISWR placement for a total size T. Cases, in preference order:
//   a) full first recession, expansion padding strictly before it
//      (the literal construction; used whenever any size is feasible)
//   b) full first recession, all A preceding rows plus forward spill f
//   c) recession head truncated, expansion padding before
//   d) no preceding expansion available: recession tail plus forward spill
// Forward spill consumes the head of the between-recession window E, which
// shrinks the buffered ISWOR capacity; cap(f) accounts for that.
struct Placement {
    bool ok = false;
    int iswr_first = 0, iswr_last = 0;  // inclusive rows
    int forward = 0;                    // rows taken past the recession end
};

Placement place_iswr(int variant, int T, int A, int R1, int E, int rec1_first,
                     int rec1_last, double buffer_fraction) {
    auto cap = [&](int f) {
        const int w = E - f;
        const int b = int(std::floor(buffer_fraction * w));
        return w - 2 * b;
    };
    Placement out;
    switch (variant) {
        case 0: {  // backward only, full recession
            if (T >= 2 * R1 && T - R1 <= A && T <= cap(0)) {
                out.ok = true;
                out.iswr_first = rec1_first - (T - R1);
                out.iswr_last = rec1_last;
            }
            break;
        }
        case 1: {  // full recession, spill forward past its end
            const int f = T - R1 - A;
            if (T >= 2 * R1 && f >= 1 && f <= E && T <= cap(f)) {
                out.ok = true;
                out.iswr_first = rec1_first - A;
                out.iswr_last = rec1_last + f;
                out.forward = f;
            }
            break;
        }
        case 2: {  // truncated recession head, backward padding
            const int K = T / 2;
            const int p = T - K;
            if (K >= 1 && K < R1 && p <= A && T <= cap(0)) {
                out.ok = true;
                out.iswr_first = rec1_first - p;
                out.iswr_last = rec1_first + K - 1;
            }
            break;
        }
        case 3: {  // recession tail, forward padding
            const int K = std::min(R1, T / 2);
            const int f = T - K;
            if (K >= 1 && f >= K && f <= E && T <= cap(f)) {
                out.ok = true;
                out.iswr_first = rec1_last - K + 1;
                out.iswr_last = rec1_last + f;
                out.forward = f;
            }
            break;
        }
    }
    return out;
}

}  // namespace

std::vector<SubPeriod> build_subperiods(const FeaturePanel& panel,
                                        const RecessionCalendar& calendar) {
    const int n = int(panel.rows());
    if (n == 0) throw std::invalid_argument("build_subperiods: empty panel");

    // Panel row span of every calendar interval that intersects the panel.
    std::vector<std::pair<int, int>> rec;
    for (const auto& iv : calendar.intervals) {
        auto lo = std::lower_bound(panel.dates.begin(), panel.dates.end(), iv.start);
        auto hi = std::upper_bound(panel.dates.begin(), panel.dates.end(), iv.end);
        if (lo != hi)
            rec.emplace_back(int(lo - panel.dates.begin()), int(hi - panel.dates.begin()) - 1);
    }
    if (rec.size() < 2)
        throw std::invalid_argument("build_subperiods: fewer than 2 recessions in panel range");

    SplitPolicy policy;  // defaults fix the OOS sizing used for the range end
    std::vector<SubPeriod> out;
    for (size_t i = 0; i + 1 < rec.size(); ++i) {
        SubPeriod sp;
        sp.first_row = i == 0 ? 0 : rec[i - 1].second + 1;
        sp.rec1_first = rec[i].first;
        sp.rec1_last = rec[i].second;
        sp.rec2_first = rec[i + 1].first;
        sp.rec2_last = rec[i + 1].second;
        const int n2 = sp.rec2_last - sp.rec2_first + 1;
        const int oos_rec = ceil_share(policy.oos_recession_share, n2);
        sp.last_row = std::min(sp.rec2_last + oos_rec, n - 1);
        char label[8];
        std::snprintf(label, sizeof label, "%02d-%02d", panel.dates[size_t(sp.rec1_first)].year % 100,
                      panel.dates[size_t(sp.last_row)].year % 100);
        sp.label = label;
        out.push_back(sp);
    }
    return out;
}

SplitSet split_subperiod(const FeaturePanel& panel, const SubPeriod& sp,
                         const SplitPolicy& policy) {
    auto bail = [&](const char* constraint, const std::string& why) -> void {
        throw std::runtime_error("split_subperiod(" + sp.label + "): constraint " + constraint +
                                 " infeasible: " + why);
    };

    const int n = int(panel.rows());
    if (sp.first_row < 0 || sp.last_row >= n || sp.rec1_first < sp.first_row ||
        sp.rec2_last > sp.last_row || sp.rec1_last >= sp.rec2_first)
        throw std::invalid_argument("split_subperiod: malformed sub-period " + sp.label);

    SplitSet s;
    // (4) 70/30 allocation of the second recession, ceiling on the OOS side.
    const int n2 = sp.rec2_last - sp.rec2_first + 1;
    const int oos_rec_n = ceil_share(policy.oos_recession_share, n2);
    const int val_n = n2 - oos_rec_n;
    if (val_n < 1) bail("(4)", "second recession too short for a validation slice");
    s.validation = range_rows(sp.rec2_first, sp.rec2_first + val_n - 1);
    const int oos_rec_first = sp.rec2_first + val_n;

    // (3) OOS expansion rows: after the recession end first, falling back to
    // rows immediately before Validation when the panel ends.
    const int avail_post = std::min(sp.last_row, n - 1) - sp.rec2_last;
    const int take_post = std::min(oos_rec_n, std::max(0, avail_post));
    const int shortfall = oos_rec_n - take_post;
    const int fallback_first = sp.rec2_first - shortfall;
    if (shortfall > 0 && fallback_first <= sp.rec1_last + 1)
        bail("(3)", "not enough expansion rows before Validation for the OOS fallback");
    s.oos = range_rows(oos_rec_first, sp.rec2_last);
    for (int r = sp.rec2_last + 1; r <= sp.rec2_last + take_post; ++r) s.oos.push_back(r);
    for (int r = fallback_first; r < sp.rec2_first; ++r) s.oos.push_back(r);
    std::sort(s.oos.begin(), s.oos.end());

    // Expansion window between recession 1 and Validation, minus fallback rows.
    const int w_first = sp.rec1_last + 1;
    const int w_last = fallback_first - 1;  // == rec2_first-1 when no fallback
    const int E = w_last - w_first + 1;
    if (E < 1) bail("(5)", "no expansion rows between first recession and Validation");

    const int A = sp.rec1_first - sp.first_row;           // preceding expansion rows
    const int R1 = sp.rec1_last - sp.rec1_first + 1;

    // Largest equal-size |ISWR| = |ISWOR| = T; placement variants tried in
    // preference order, sizes descending within each.
    Placement chosen;
    const int t_hi = E + 2 * R1 + A;
    for (int variant = 0; variant < 4 && !chosen.ok; ++variant)
        for (int T = t_hi; T >= 2; --T) {
            chosen = place_iswr(variant, T, A, R1, E, sp.rec1_first, sp.rec1_last,
                                policy.buffer_fraction);
            if (chosen.ok) break;
        }
    if (!chosen.ok)
        bail("(2)/(6)", "no ISWR size with |ISWR| = |ISWOR| and recession fraction <= " +
                            std::to_string(policy.max_iswr_recession_fraction));

    s.iswr = range_rows(chosen.iswr_first, chosen.iswr_last);
    const int T = int(s.iswr.size());

    // ISWOR: freshest T rows of the buffered window (head-truncated).
    const int ww_first = w_first + chosen.forward;
    const int ww = E - chosen.forward;
    const int b = int(std::floor(policy.buffer_fraction * ww));
    const int iswor_last = w_last - b;
    const int iswor_first = iswor_last - T + 1;
    if (iswor_first < ww_first + b) bail("(5)", "buffered ISWOR window smaller than ISWR");
    s.iswor = range_rows(iswor_first, iswor_last);
    return s;
}

std::vector<std::string> validate_split(const FeaturePanel& panel, const SplitSet& s,
                                        const SubPeriod& sp, const SplitPolicy& policy) {
    std::vector<std::string> v;
    auto flag = [&](const std::string& msg) { v.push_back(msg); };
    auto rec_count = [&](const std::vector<int>& rows) {
        int c = 0;
        for (int r : rows) c += panel.recession[size_t(r)] != 0;
        return c;
    };

    if (s.iswr.empty() || s.iswor.empty() || s.validation.empty() || s.oos.empty()) {
        flag("structure: empty split component");
        return v;
    }
    // Disjointness across all four sets.
    std::vector<int> all;
    for (const auto* set : {&s.iswr, &s.iswor, &s.validation, &s.oos})
        all.insert(all.end(), set->begin(), set->end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
        flag("structure: split components overlap");
    if (all.front() < sp.first_row || all.back() > sp.last_row)
        flag("structure: indices outside the sub-period range");

    // (1) leakage: every training row precedes every OOS row.
    const int train_max = std::max(s.iswr.back(), s.iswor.back());
    if (!(train_max < s.oos.front()))
        flag("constraint (1): training index " + std::to_string(train_max) +
             " not before OOS start " + std::to_string(s.oos.front()));

    // (2) equal sizes.
    if (s.iswr.size() != s.iswor.size())
        flag("constraint (2): |ISWR| = " + std::to_string(s.iswr.size()) +
             " != |ISWOR| = " + std::to_string(s.iswor.size()));

    // (3) OOS half recession / half expansion.
    {
        const int rec = rec_count(s.oos);
        const int exp = int(s.oos.size()) - rec;
        if (std::abs(rec - exp) > 1)
            flag("constraint (3): OOS recession rows " + std::to_string(rec) +
                 " vs expansion rows " + std::to_string(exp));
    }

    // (4) 70/30 second-recession allocation.
    {
        const int n2 = sp.rec2_last - sp.rec2_first + 1;
        const int want_oos = ceil_share(policy.oos_recession_share, n2);
        int in_rec2 = 0;
        for (int r : s.oos) in_rec2 += (r >= sp.rec2_first && r <= sp.rec2_last);
        if (in_rec2 != want_oos)
            flag("constraint (4): OOS holds " + std::to_string(in_rec2) +
                 " second-recession rows, expected " + std::to_string(want_oos));
        const int want_val = n2 - want_oos;
        const bool val_ok = int(s.validation.size()) == want_val &&
                            s.validation.front() == sp.rec2_first &&
                            s.validation.back() == sp.rec2_first + want_val - 1;
        if (!val_ok)
            flag("constraint (4): Validation is not the first " + std::to_string(want_val) +
                 " second-recession rows");
    }

    // (5) buffers around ISWOR inside the expansion window.
    {
        const int w_first = std::max(sp.rec1_last, s.iswr.back()) + 1;
        int next_assigned = s.validation.front();
        for (int r : s.oos)
            if (r > s.iswor.back()) {
                next_assigned = std::min(next_assigned, r);
                break;
            }
        const int w_last = next_assigned - 1;
        const int ww = w_last - w_first + 1;
        const int b = int(std::floor(policy.buffer_fraction * ww));
        const int head_gap = s.iswor.front() - w_first;
        const int tail_gap = w_last - s.iswor.back();
        if (head_gap < b || tail_gap < b)
            flag("constraint (5): ISWOR buffers " + std::to_string(head_gap) + "/" +
                 std::to_string(tail_gap) + " smaller than " + std::to_string(b));
    }

    // (6) recession fraction of ISWR.
    {
        const int rec = rec_count(s.iswr);
        if (double(rec) > policy.max_iswr_recession_fraction * double(s.iswr.size()) + 1e-9)
            flag("constraint (6): ISWR recession fraction " + std::to_string(rec) + "/" +
                 std::to_string(s.iswr.size()) + " exceeds " +
                 std::to_string(policy.max_iswr_recession_fraction));
    }
    return v;
}

void write_splits_json(const std::string& path,
                       const std::vector<std::pair<SubPeriod, SplitSet>>& splits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    auto emit_array = [&](const char* key, const std::vector<int>& rows, bool last) {
        out << "    \"" << key << "\": [";
        for (size_t i = 0; i < rows.size(); ++i) out << (i ? "," : "") << rows[i];
        out << (last ? "]\n" : "],\n");
    };
    out << "[\n";
    for (size_t i = 0; i < splits.size(); ++i) {
        const auto& [sp, s] = splits[i];
        out << "  {\n    \"label\": \"" << sp.label << "\",\n";
        emit_array("iswr", s.iswr, false);
        emit_array("iswor", s.iswor, false);
        emit_array("validation", s.validation, false);
        emit_array("oos", s.oos, true);
        out << (i + 1 < splits.size() ? "  },\n" : "  }\n");
    }
    out << "]\n";
}

}  // namespace cyclebench
