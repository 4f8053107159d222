#pragma once
// Two-recession sub-periods and the four-way ISWR/ISWOR/Validation/OOS
// split inside each. All index sets refer to rows of one FeaturePanel.
//
// Split layout per sub-period (chronological):
//
//   [expansion .. recession 1 ..] [buffer | ISWOR | buffer] [Val] [OOS]
//    \_______ ISWR ________/       expansion between recessions  2nd recession
//                                                               tail + expansion
//
// Constraints enforced (numbering used in validation messages):
//   (1) every ISWR/ISWOR row precedes every OOS row (leakage)
//   (2) |ISWR| = |ISWOR|
//   (3) OOS is half recession / half expansion (counts within 1)
//   (4) OOS takes the last 70% of the second recession, Validation the
//       first 30% (ceiling on the OOS side)
//   (5) 10% head/tail buffers around ISWOR within the expansion window
//   (6) recession rows are at most half of ISWR

#include <string>
#include <utility>
#include <vector>

#include "cyclebench/market_data.hpp"

namespace cyclebench {

struct SubPeriod {
    std::string label;           // e.g. "73-80"
    int first_row = 0;           // inclusive panel row range
    int last_row = 0;
    int rec1_first = 0, rec1_last = 0;  // first recession rows (inclusive)
    int rec2_first = 0, rec2_last = 0;  // second recession rows (inclusive)
};

struct SplitPolicy {
    double oos_recession_share = 0.7;
    double validation_recession_share = 0.3;
    double buffer_fraction = 0.10;
    double max_iswr_recession_fraction = 0.5;
};

struct SplitSet {
    std::vector<int> iswr;        // in-sample with recession rows
    std::vector<int> iswor;       // in-sample without recession rows
    std::vector<int> validation;  // first 30% of second recession
    std::vector<int> oos;         // recession tail + matching expansion rows
};

// One SubPeriod per consecutive pair of recessions intersecting the panel
// (k intervals -> k-1 sub-periods). Throws when fewer than 2 intersect.
std::vector<SubPeriod> build_subperiods(const FeaturePanel& panel,
                                        const RecessionCalendar& calendar);

// Deterministic construction satisfying constraints (1)-(6); |ISWR| is the
// largest size for which a feasible placement exists. Throws naming the
// first infeasible constraint.
SplitSet split_subperiod(const FeaturePanel& panel, const SubPeriod& sp,
                         const SplitPolicy& policy = {});

// Audits a SplitSet; empty result means all constraints hold. Violations
// are data, not errors: each string names the constraint number.
std::vector<std::string> validate_split(const FeaturePanel& panel, const SplitSet& s,
                                        const SubPeriod& sp, const SplitPolicy& policy = {});

// splits.json: array of objects with keys label,iswr,iswor,validation,oos.
void write_splits_json(const std::string& path,
                       const std::vector<std::pair<SubPeriod, SplitSet>>& splits);

}  // namespace cyclebench
