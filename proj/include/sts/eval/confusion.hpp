#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sts/classifier/types.hpp"

namespace sts::eval {

// 3x3 counts, row = truth, column = prediction, class order
// SitToStand / StandToSit / Other.
struct ConfusionMatrix3 {
    long long counts[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    void add(clf::StSClass truth, clf::StSClass predicted) {
        ++counts[static_cast<int>(truth)][static_cast<int>(predicted)];
    }
    long long row_sum(int r) const { return counts[r][0] + counts[r][1] + counts[r][2]; }
    long long total() const { return row_sum(0) + row_sum(1) + row_sum(2); }
};

struct AccuracyReport {
    ConfusionMatrix3 matrix;
    std::optional<double> recall[3];       // undefined when a class is absent from truth
    double overall = 0.0;                  // unweighted mean of the defined recalls
    double sts_false_positive_rate = 0.0;  // Other predicted as either StS class / total Other
    std::vector<std::string> warnings;
};

AccuracyReport confusion_and_accuracy(const std::vector<clf::StSClass>& truth,
                                      const std::vector<clf::StSClass>& predicted);

// Recomputes recalls/overall from a bare matrix (used to cross-check emitted
// artifacts).
AccuracyReport accuracy_from_matrix(const ConfusionMatrix3& m);

std::string confusion_to_csv(const ConfusionMatrix3& m);
ConfusionMatrix3 confusion_from_csv(const std::string& path);

}  // namespace sts::eval
